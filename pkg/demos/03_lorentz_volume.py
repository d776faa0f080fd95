"""Volumes of future balls over a spacelike patch.

The C^{1,1} Robertson-Walker fixture has a warping function whose second
derivative jumps at t = 0.5.  It satisfies the comparison condition for
kappa = 0 and beta = 0, so the volume of the future ball of time t over
the patch A, divided by the model volume over a patch of equal area,
must not increase in t.  A Monte Carlo estimate at a few times checks
the quadrature independently.
"""

import json

import numpy as np

from geomlab.dsl import parse_document
from geomlab.fixtures import builtin_document
from geomlab.models import make_model
from geomlab.volume import lorentzian_ball_volume, ratio_series


def main():
    doc = parse_document(json.dumps(builtin_document("rw_c11")))
    M, hyp = doc.metric, doc.hypersurface
    grid = np.linspace(0.1, 1.5, 15)
    vol = lorentzian_ball_volume(M, hyp, grid, per_axis=12)
    rep = ratio_series(vol, make_model(0.0, 0.0, M.n), area=vol.meta["area"])
    print(f"patch area {vol.meta['area']:.4f}, {vol.meta['rays']} normal rays")
    for t, v, q in zip(rep.grid, vol.values, rep.ratios):
        print(f"  t={t:.2f}  volume={v:.6f}  ratio={q:.6f}")
    print(f"nonincreasing within 1e-3: {rep.nonincreasing} (worst relative increase {rep.worst_violation:.2e})")

    times = [0.5, 1.0, 1.5]
    mc = lorentzian_ball_volume(M, hyp, times, method="monte-carlo", n_samples=20_000, seed=1)
    quad = np.interp(times, grid, vol.values)
    print("\nquadrature vs Monte Carlo")
    for t, a, b, s in zip(times, quad, mc.values, mc.error):
        print(f"  t={t:.1f}  quadrature={a:.5f}  monte carlo={b:.5f} +- {s:.5f}  ({abs(a - b) / s:.2f} sigma)")


if __name__ == "__main__":
    main()
