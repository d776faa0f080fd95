"""Riemannian volume comparison on a smooth sphere and on a C^{1,1} surface.

On the round unit 2-sphere the geodesic ball volume equals the model
value 2 pi (1 - cos r), so the ratio to the curvature-one model is one.
Compared with the flat model the ratio decreases strictly.  The cap_cone
surface glues a spherical cap to a flat cone along a circle where the
curvature jumps; its Ricci curvature is nonnegative, and the ratio to
the flat disk area must not increase.
"""

import json

import numpy as np

from geomlab.dsl import parse_metric_spec
from geomlab.volume import ratio_series, riemannian_ball_volume


def load(name, **params):
    return parse_metric_spec(json.dumps({"kind": "builtin", "name": name, "params": params}))


def show(title, rep):
    print(title)
    for r, v, q in zip(rep.grid, rep.numerator.values, rep.ratios):
        print(f"  r={r:.3f}  volume={v:.6f}  ratio={q:.6f}")
    print(f"  nonincreasing within 1e-3: {rep.nonincreasing} (worst relative increase {rep.worst_violation:.2e})\n")


def main():
    grid = np.linspace(0.25, 3.0, 12)
    sphere = riemannian_ball_volume(load("sphere2", half=30.0), [0.0, 0.0], grid)
    show("round sphere vs curvature-one model", ratio_series(sphere, (1.0, 2)))
    show("round sphere vs flat model", ratio_series(sphere, (0.0, 2)))

    grid = np.linspace(0.25, 3.3, 12)
    cone = riemannian_ball_volume(load("cap_cone"), [0.0, 0.0], grid)
    show("cap glued to a cone vs flat model", ratio_series(cone, (0.0, 2)))


if __name__ == "__main__":
    main()
