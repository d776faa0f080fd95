"""Library of named metric documents.

Every builtin is itself an ordinary ``components`` or ``warped_product``
document, so the fixtures exercise the same parser as user input.
"""

from __future__ import annotations

import math

__all__ = ["builtin_document", "BUILTIN_NAMES"]


def _diag_components(diag):
    n = len(diag)
    out = []
    for i in range(n):
        for j in range(i, n):
            out.append(diag[i] if i == j else "0")
    return out


def _flat(n, lorentzian, half=5.0):
    coords = ["t", "x", "y", "z"][:n] if lorentzian else ["x", "y", "z", "w"][:n]
    diag = ["1"] * n
    if lorentzian:
        diag[0] = "-1"
    return {
        "kind": "components", "n": n, "coords": coords,
        "box": [[-half, half]] * n,
        "signature": "lorentzian" if lorentzian else "riemannian",
        "components": _diag_components(diag),
        "name": f"{'minkowski' if lorentzian else 'euclidean'}{n}",
    }


def _minkowski(n, half=5.0):
    doc = _flat(n, True, half)
    doc["sigma"] = "t"
    doc["patch"] = {
        "params": [f"u{i}" for i in range(1, n)],
        "box": [[-1.0, 1.0]] * (n - 1),
        "embedding": ["0"] + [f"u{i}" for i in range(1, n)],
    }
    return doc


def _sphere_stereo(n=2, half=6.0):
    coords = ["x", "y", "z", "w"][:n]
    r2 = "+".join(f"{c}^2" for c in coords)
    conf = f"1/(1+({r2})/4)^2"
    return {
        "kind": "components", "n": n, "coords": coords, "box": [[-half, half]] * n,
        "signature": "riemannian", "components": _diag_components([conf] * n),
        "name": f"round sphere S^{n} (stereographic)",
    }


def _sphere_polar(half_phi=7.0):
    return {
        "kind": "components", "n": 2, "coords": ["th", "ph"],
        "box": [[0.05, math.pi - 0.05], [-half_phi, half_phi]],
        "signature": "riemannian", "components": ["1", "0", "sin(th)^2"],
        "name": "round sphere S^2 (polar)",
    }


def _ricci_counterexample(eps=1.0, half=5.0):
    return {
        "kind": "components", "n": 3, "coords": ["x", "y", "z"], "box": [[-half, half]] * 3,
        "signature": "lorentzian", "time_orientation": [1, 0, 0],
        "components": _diag_components([f"-1-{float(eps)!r}*x^2*y^2*z^2", "1", "1"]),
        "name": f"ricci counterexample (eps={eps:g})",
    }


def _cap_cone(a=1.0, half=6.0):
    """Spherical cap of curvature 1 glued C^1 to a flat cone at coordinate radius ``a``."""
    s_in = 1.0 / (1.0 + a * a / 4.0)
    alpha = -(a * a / 2.0) / (1.0 + a * a / 4.0)
    c = s_in / a**alpha
    comp = (f"piecewise(x^2+y^2 < {a * a!r}, 1/(1+(x^2+y^2)/4)^2, "
            f"{c * c!r}*(x^2+y^2)^{alpha!r})")
    return {
        "kind": "components", "n": 2, "coords": ["x", "y"], "box": [[-half, half]] * 2,
        "signature": "riemannian", "components": [comp, "0", comp],
        "interfaces": [f"x^2+y^2 = {a * a!r}"],
        "name": f"cap-cone surface (a={a:g})",
        "kappa_min": 0.0,
        "center": [0.0, 0.0],
    }


def _rw_c11(omega=0.8, t_switch=0.5, half=3.0, t_top=2.0):
    f = f"piecewise(t < {t_switch!r}, 1, cos({omega!r}*(t-{t_switch!r})))"
    return {
        "kind": "warped_product", "n": 2, "f": f, "fiber": "flat",
        "coords": ["t", "x"], "t_range": [-0.5, t_top], "fiber_halfwidth": half,
        "interfaces": [f"t = {t_switch!r}"],
        "name": f"C11 Robertson-Walker (omega={omega:g})",
        "sigma": "t",
        "patch": {"params": ["u"], "box": [[-1.0, 1.0]], "embedding": ["0", "u"]},
        "ccc": [0.0, 0.0],
    }


def _collapse_c11(half=1.5, margin=5e-3):
    """``-dt^2 + cos(t)^2 (dx^2 + psi(x)^2 dy^2)`` with fiber curvature -1 for x<0, 0 for x>0."""
    psi2 = "piecewise(x < 0, cosh(x)^2, 1)"
    return {
        "kind": "components", "n": 3, "coords": ["t", "x", "y"],
        "box": [[-0.5, math.pi / 2 - margin], [-half, half], [-half, half]],
        "signature": "lorentzian",
        "components": ["-1", "0", "0", "cos(t)^2", "0", f"cos(t)^2*{psi2}"],
        "interfaces": ["x = 0"],
        "name": "C11 collapsing fiber product",
        "sigma": "t",
        "patch": {"params": ["u", "v"], "box": [[-0.5, 0.5], [-0.5, 0.5]],
                  "embedding": ["0", "u", "v"]},
        "ccc": [1.0, 0.0],
    }


def _model(kappa=0.0, beta=0.0, n=3, fiber_halfwidth=1.0, patch_half=0.5, t_range=None):
    from .models import make_model

    mod = make_model(kappa, beta, n)
    if t_range is None:
        lo = max(-1.0, 0.5 * mod.past_zero())
        hi = min(2.0, mod.collapse - 5e-3) if math.isfinite(mod.collapse) else 2.0
        t_range = [lo, hi]
    params = [f"u{i}" for i in range(1, n)]
    return {
        "kind": "warped_product", "n": n, "f": mod.f_expr, "fiber": mod.fiber,
        "t_range": list(t_range), "fiber_halfwidth": fiber_halfwidth,
        "name": f"model(kappa={kappa:g}, beta={beta:g}, n={n})",
        "sigma": "t",
        "patch": {"params": params, "box": [[-patch_half, patch_half]] * (n - 1),
                  "embedding": ["0"] + params},
        "ccc": [kappa, beta],
    }


_BUILTINS = {
    "minkowski2": lambda **kw: _minkowski(2, **kw),
    "minkowski3": lambda **kw: _minkowski(3, **kw),
    "minkowski4": lambda **kw: _minkowski(4, **kw),
    "euclidean2": lambda **kw: _flat(2, False, **kw),
    "euclidean3": lambda **kw: _flat(3, False, **kw),
    "sphere2": lambda **kw: _sphere_stereo(2, **kw),
    "sphere3": lambda **kw: _sphere_stereo(3, **kw),
    "sphere2_polar": _sphere_polar,
    "ricci_counterexample": _ricci_counterexample,
    "cap_cone": _cap_cone,
    "rw_c11": _rw_c11,
    "collapse_c11": _collapse_c11,
    "model": _model,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin_document(name: str, **params) -> dict:
    """Document for builtin ``name`` with keyword overrides."""
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    return _BUILTINS[name](**params)
