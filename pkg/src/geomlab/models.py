"""Comparison spacetimes ``-dt^2 + f(t)^2 h`` and constant-curvature ball volumes.

Each ``(kappa, beta, n)`` selects one warping function ``f`` and one fiber of
constant curvature ``+1``, ``0`` or ``-1`` such that the slice ``{t = 0}`` has
mean curvature ``beta`` and ``Ric(X, X) = (n-1) kappa`` for every unit timelike
``X``.  Negative warping functions are kept as-is; every consumer uses ratios
``f(t)/f(0)`` or absolute values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

__all__ = [
    "CLASSIFY_TOL",
    "ComparisonModel",
    "SnFunction",
    "make_model",
    "f_tilde",
    "area_ratio",
    "ball_volume_normalized",
    "riemannian_model_volume",
    "sphere_area",
    "LimitReport",
    "limit_family_check",
    "LIMIT_CASES",
    "catalog",
]

CLASSIFY_TOL = 1e-12

_FIBER_CURVATURE = {"sphere": 1.0, "flat": 0.0, "hyperbolic": -1.0}


@dataclass(frozen=True)
class ComparisonModel:
    """One row of the warping-function table.

    Attributes
    ----------
    kappa, beta, n
        Curvature bound, mean-curvature bound and spacetime dimension.
    row
        Short row label, e.g. ``"kappa<0,|x|<1"``.
    fiber
        ``"sphere"``, ``"flat"`` or ``"hyperbolic"``.
    offset
        The shift ``b`` inside the warping function.
    collapse
        First positive zero of ``f`` (``inf`` if none).
    f_expr
        Warping function as a DSL expression in ``t``.
    """

    kappa: float
    beta: float
    n: int
    row: str
    fiber: str
    offset: float
    collapse: float
    f_expr: str
    _f: Callable = None
    _df: Callable = None

    @property
    def fiber_curvature(self) -> float:
        return _FIBER_CURVATURE[self.fiber]

    def f(self, t):
        return self._f(np.asarray(t, dtype=float))

    def df(self, t):
        return self._df(np.asarray(t, dtype=float))

    @property
    def f0(self) -> float:
        return float(self.f(0.0))

    def past_zero(self) -> float:
        """Largest nonpositive zero of ``f`` (``-inf`` if none)."""
        k, b = self.kappa, self.offset
        s = math.sqrt(abs(k))
        if self.row == "kappa<0,x>1":
            return -b / s
        if self.row == "kappa=0,beta>0":
            return -b
        if self.row in ("kappa>0,beta!=0", "kappa>0,beta=0"):
            if self.row == "kappa>0,beta=0":
                return -math.pi / (2 * s)
            return -b / s if b > 0 else (-b - math.pi) / s
        return -math.inf

    def metric(self, t_range=None, fiber_halfwidth: float = 1.0, derivatives="closed_form"):
        """The model as a warped-product :class:`~geomlab.metric.MetricField`.

        The default time range stays strictly inside the interval where ``f``
        is nonzero.
        """
        from .dsl import warped_product_metric

        if t_range is None:
            lo = max(-1.0, 0.5 * self.past_zero())
            hi = min(2.0, self.collapse - 1e-3) if math.isfinite(self.collapse) else 2.0
            t_range = (lo, hi)
        return warped_product_metric(
            self.f_expr,
            self.n,
            self.fiber,
            t_range=t_range,
            fiber_halfwidth=fiber_halfwidth,
            derivatives=derivatives,
            name=f"model(kappa={self.kappa:g}, beta={self.beta:g}, n={self.n})",
        )

    def to_dict(self) -> dict:
        return {
            "row": self.row,
            "kappa": self.kappa,
            "beta": self.beta,
            "n": self.n,
            "fiber": self.fiber,
            "b": self.offset,
            "collapse_time": None if math.isinf(self.collapse) else self.collapse,
            "f": self.f_expr,
        }


def _num(x: float) -> str:
    return repr(float(x))


def _arg(s: float, b: float = 0.0) -> str:
    """Text of ``s*t + b`` without unit factors or doubled signs."""
    term = "t" if s == 1.0 else f"{_num(s)}*t"
    if b == 0.0:
        return term
    return f"{term} {'+' if b > 0 else '-'} {_num(abs(b))}"


def _over(expr: str, s: float) -> str:
    return expr if s == 1.0 else f"{expr}/{_num(s)}"


def make_model(kappa: float, beta: float, n: int) -> ComparisonModel:
    """Select the table row for ``(kappa, beta, n)``.

    Ties within :data:`CLASSIFY_TOL` resolve to the boundary rows.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    kappa, beta = float(kappa), float(beta)
    m = n - 1
    tol = CLASSIFY_TOL
    if kappa < -tol:
        s = math.sqrt(-kappa)
        x = beta / (m * s)
        if abs(abs(x) - 1.0) <= tol:
            sg = 1.0 if beta > 0 else -1.0
            return _build(kappa, beta, n, "kappa<0,|x|=1", "flat", 0.0, math.inf,
                          lambda t: np.exp(sg * s * t), lambda t: sg * s * np.exp(sg * s * t),
                          f"exp({_arg(sg * s) if sg > 0 else '-' + _arg(s)})")
        if abs(x) < 1.0:
            b = math.atanh(x)
            return _build(kappa, beta, n, "kappa<0,|x|<1", "sphere", b, math.inf,
                          lambda t: np.cosh(s * t + b) / s, lambda t: np.sinh(s * t + b),
                          _over(f"cosh({_arg(s, b)})", s))
        b = 0.5 * math.log((x + 1.0) / (x - 1.0))  # inverse hyperbolic cotangent
        collapse = math.inf if x > 1.0 else -b / s
        row = "kappa<0,x>1" if x > 1.0 else "kappa<0,x<-1"
        return _build(kappa, beta, n, row, "hyperbolic", b, collapse,
                      lambda t: np.sinh(s * t + b) / s, lambda t: np.cosh(s * t + b),
                      _over(f"sinh({_arg(s, b)})", s))
    if kappa <= tol:
        if abs(beta) <= tol:
            return _build(0.0 if abs(kappa) <= tol else kappa, beta, n, "kappa=0,beta=0", "flat",
                          0.0, math.inf, lambda t: np.ones_like(t), lambda t: np.zeros_like(t), "1")
        b = m / beta
        collapse = math.inf if beta > 0 else -b
        row = "kappa=0,beta>0" if beta > 0 else "kappa=0,beta<0"
        return _build(kappa, beta, n, row, "hyperbolic", b, collapse,
                      lambda t: t + b, lambda t: np.ones_like(t), _arg(1.0, b))
    s = math.sqrt(kappa)
    if abs(beta) <= tol:
        return _build(kappa, beta, n, "kappa>0,beta=0", "hyperbolic", math.pi / 2,
                      math.pi / (2 * s), lambda t: np.cos(s * t) / s, lambda t: -np.sin(s * t),
                      _over(f"cos({_arg(s)})", s))
    x = beta / (m * s)
    b = math.atan(1.0 / x)
    collapse = (-b + 0.5 * math.pi * (1.0 + math.copysign(1.0, beta))) / s
    return _build(kappa, beta, n, "kappa>0,beta!=0", "hyperbolic", b, collapse,
                  lambda t: np.sin(s * t + b) / s, lambda t: np.cos(s * t + b),
                  _over(f"sin({_arg(s, b)})", s))


def _build(kappa, beta, n, row, fiber, b, collapse, f, df, expr) -> ComparisonModel:
    return ComparisonModel(kappa, beta, n, row, fiber, float(b), float(collapse), expr, f, df)


# ------------------------------------------------------------------ evaluators


def f_tilde(model: ComparisonModel, t):
    """Warping function extended by zero from the collapse time on."""
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        val = model.f(np.where(t < model.collapse, t, 0.0))
    out = np.where(t < model.collapse, val, 0.0)
    return out if out.ndim else float(out)


def area_ratio(model: ComparisonModel, t):
    """``(f_tilde(t) / f(0))^(n-1)``: relative area of the future sphere of time ``t``."""
    out = (np.asarray(f_tilde(model, t)) / model.f0) ** (model.n - 1)
    return out if np.ndim(out) else float(out)


def _ball_closed_form(model: ComparisonModel, t: float):
    """Closed forms where available, else ``None``."""
    m = model.n - 1
    if model.row == "kappa=0,beta=0":
        return t
    if model.row in ("kappa=0,beta>0", "kappa=0,beta<0"):
        b = model.offset
        return ((t + b) ** (m + 1) - b ** (m + 1)) / ((m + 1) * b ** m)
    if model.row == "kappa<0,|x|=1":
        c = m * math.copysign(math.sqrt(-model.kappa), model.beta)
        return math.expm1(c * t) / c
    return None


def ball_volume_normalized(model: ComparisonModel, t):
    """``int_0^t area_ratio``; constant from the collapse time on."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ts)
    for i, ti in enumerate(ts):
        if ti < 0:
            raise ValueError("t must be nonnegative")
        upper = min(ti, model.collapse)
        cf = _ball_closed_form(model, upper)
        if cf is None:
            cf = integrate.quad(lambda s: area_ratio(model, s), 0.0, upper,
                                epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        out[i] = cf
    return out if np.ndim(t) else float(out[0])


@dataclass(frozen=True)
class SnFunction:
    """Generalized sine: solution of ``y'' + kappa y = 0`` with ``y(0)=0, y'(0)=1``."""

    kappa: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        k = self.kappa
        if k > 0:
            r = math.sqrt(k)
            return np.sin(r * s) / r
        if k < 0:
            r = math.sqrt(-k)
            return np.sinh(r * s) / r
        return s.copy() if s.ndim else float(s)

    @property
    def diameter(self) -> float:
        return math.pi / math.sqrt(self.kappa) if self.kappa > 0 else math.inf


def sphere_area(n: int) -> float:
    """Area of the unit ``(n-1)``-sphere in ``R^n``."""
    return 2 * math.pi ** (n / 2) / special.gamma(n / 2)


def riemannian_model_volume(kappa: float, n: int, r):
    """Volume of a geodesic ball of radius ``r`` in the simply connected space form."""
    sn = SnFunction(kappa)
    c = sphere_area(n)
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(rs)
    for i, ri in enumerate(rs):
        if ri < 0:
            raise ValueError("r must be nonnegative")
        upper = min(ri, sn.diameter)
        if kappa == 0:
            out[i] = c * upper**n / n
        elif n == 2:
            out[i] = c * (1 - np.cos(math.sqrt(kappa) * upper)) / kappa if kappa > 0 else \
                c * (np.cosh(math.sqrt(-kappa) * upper) - 1) / (-kappa)
        else:
            out[i] = c * integrate.quad(lambda s: sn(s) ** (n - 1), 0.0, upper,
                                        epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return out if np.ndim(r) else float(out[0])


# ---------------------------------------------------------------- limit cases


def _case_sequences(case: str, n: int, kappa0: float, beta0: float):
    """Return ``(kappa0, beta0, k -> (kappa_k, beta_k))`` for a listed limit case."""
    m = n - 1
    if case == "kappa0=0,beta0!=0":
        if beta0 == 0:
            raise ValueError("case needs beta0 != 0")
        return 0.0, beta0, lambda k: (-1.0 / k, beta0 + 1.0 / k)
    if case == "kappa0=0,beta0=0":
        return 0.0, 0.0, lambda k: (-1.0 / k, m * math.sqrt(1.0 / k))
    if case == "kappa0>0,beta0=0":
        if kappa0 <= 0:
            raise ValueError("case needs kappa0 > 0")
        return kappa0, 0.0, lambda k: (kappa0 - 1.0 / k, 1.0 / k)
    if case == "kappa0<0,beta0=+edge":
        if kappa0 >= 0:
            raise ValueError("case needs kappa0 < 0")
        return kappa0, m * math.sqrt(-kappa0), lambda k: (kappa0 - 1.0 / k, m * math.sqrt(-kappa0 + 1.0 / k))
    if case == "kappa0<0,beta0=-edge":
        if kappa0 >= 0:
            raise ValueError("case needs kappa0 < 0")
        b0 = -m * math.sqrt(-kappa0)
        return kappa0, b0, lambda k: (kappa0 - 1.0 / k, b0 + 1.0 / k)
    if case == "constant":
        return kappa0, beta0, lambda k: (kappa0, beta0)
    raise ValueError(f"unknown limit case {case!r}; valid: {', '.join(LIMIT_CASES)}")


LIMIT_CASES = (
    "kappa0=0,beta0!=0",
    "kappa0=0,beta0=0",
    "kappa0>0,beta0=0",
    "kappa0<0,beta0=+edge",
    "kappa0<0,beta0=-edge",
    "constant",
)

_CASE_DEFAULTS = {
    "kappa0=0,beta0!=0": (0.0, -1.0),
    "kappa0=0,beta0=0": (0.0, 0.0),
    "kappa0>0,beta0=0": (1.0, 0.0),
    "kappa0<0,beta0=+edge": (-1.0, None),
    "kappa0<0,beta0=-edge": (-1.0, None),
    "constant": (-0.5, 0.3),
}


@dataclass
class LimitReport:
    case: str
    n: int
    kappa0: float
    beta0: float
    ks: list
    params: list
    raw: list
    normalized: list
    raw_converges: bool
    normalized_converges: bool
    expected_raw_converges: bool
    verdict: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _monotone_to_zero(seq, atol=1e-14) -> bool:
    seq = np.asarray(seq, dtype=float)
    if np.all(seq <= atol):
        return True
    return bool(np.all(np.diff(seq) < 0) or np.all(seq[1:] <= atol))


def limit_family_check(case: str, t_grid=None, ks=(4, 8, 16), n: int = 3,
                       kappa0: float | None = None, beta0: float | None = None,
                       raw_floor: float = 0.1) -> LimitReport:
    """Sup-over-grid discrepancies of ``f_tilde`` along a listed ``(kappa, beta)`` sequence.

    The raw discrepancy compares ``f_tilde`` itself, the normalized one compares
    ``f_tilde(t) / f(0)``.  A family "converges" when its discrepancy decreases
    strictly along ``ks`` (or is identically zero).  For the exceptional
    ``-edge`` case the raw discrepancy must instead stay above ``raw_floor``.
    """
    if case not in LIMIT_CASES:
        raise ValueError(f"unknown limit case {case!r}; valid: {', '.join(LIMIT_CASES)}")
    dk, db = _CASE_DEFAULTS[case]
    kappa0 = dk if kappa0 is None else kappa0
    beta0 = db if beta0 is None else beta0
    kappa0, beta0, seq = _case_sequences(case, n, kappa0, 0.0 if beta0 is None else beta0)
    t_grid = np.linspace(0.0, 3.0, 301) if t_grid is None else np.asarray(t_grid, dtype=float)
    limit = make_model(kappa0, beta0, n)
    lim_raw = np.asarray(f_tilde(limit, t_grid))
    lim_norm = lim_raw / limit.f0
    raw, normalized, params = [], [], []
    for k in ks:
        kk, bk = seq(k)
        mod = make_model(kk, bk, n)
        vals = np.asarray(f_tilde(mod, t_grid))
        raw.append(float(np.max(np.abs(vals - lim_raw))))
        normalized.append(float(np.max(np.abs(vals / mod.f0 - lim_norm))))
        params.append((kk, bk, mod.row))
    exceptional = case == "kappa0<0,beta0=-edge"
    raw_conv = _monotone_to_zero(raw)
    norm_conv = _monotone_to_zero(normalized)
    if exceptional:
        verdict = min(raw) >= raw_floor and norm_conv
        raw_conv = False
    else:
        verdict = raw_conv
    return LimitReport(case, n, kappa0, beta0, list(ks), params, raw, normalized,
                       raw_conv, norm_conv, not exceptional, bool(verdict))


def catalog(n: int = 3) -> list[dict]:
    """Representative parameters for each of the nine rows."""
    m = n - 1
    reps = [(-1.0, 0.5 * m), (-1.0, m), (-1.0, 2.0 * m), (-1.0, -2.0 * m),
            (0.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 0.5), (1.0, 0.0)]
    return [make_model(k, b, n).to_dict() for k, b in reps]


def catalog_json(n: int = 3) -> str:
    return json.dumps(catalog(n), indent=2, sort_keys=True)
