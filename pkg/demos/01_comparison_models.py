"""Warped comparison models and their collapse times.

Every pair (kappa, beta) selects a warping function f with f'' = -kappa f
and (n-1) f'(0)/f(0) = beta.  The model collapses when f reaches zero; the
extended function f_tilde is zero from then on.  This script prints the
catalog of model rows in dimension 3, a few values of the normalized ball
volume, and how f_tilde behaves along sequences (kappa_k, beta_k) that
approach a boundary case.
"""

import math

import numpy as np

from geomlab.models import LIMIT_CASES, ball_volume_normalized, catalog, f_tilde, limit_family_check, make_model


def main():
    print("model rows, n = 3")
    for row in catalog(3):
        b = row["collapse_time"]
        print(f"  {row['row']:<18} kappa={row['kappa']:>5g} beta={row['beta']:>5g}  "
              f"fiber={row['fiber']:<10} f={row['f']:<32} collapse={'never' if b is None else f'{b:.4f}'}")

    m = make_model(1.0, 0.0, 3)
    t = np.array([0.0, 0.5, 1.0, math.pi / 2, 2.0])
    print("\nkappa=1, beta=0: f_tilde and ball volume per unit area")
    for ti, fi, vi in zip(t, f_tilde(m, t), ball_volume_normalized(m, t)):
        print(f"  t={ti:.4f}  f_tilde={fi:.6f}  volume={vi:.6f}")

    print("\nlimits of f_tilde along k = 4, 8, 16")
    for case in LIMIT_CASES:
        rep = limit_family_check(case)
        print(f"  {case:<22} raw={np.round(rep.raw, 4)}  normalized={np.round(rep.normalized, 4)}  "
              f"verdict={'pass' if rep.verdict else 'fail'}")


if __name__ == "__main__":
    main()
