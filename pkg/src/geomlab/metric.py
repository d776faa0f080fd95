"""Metric fields on a single coordinate chart and their curvature.

All evaluators are batched: a point array of shape ``(..., n)`` yields
component arrays with the leading shape preserved.  Index conventions:

* ``g(x)[..., i, j]``            metric components
* ``dg(x)[..., i, j, k]``        ``d_k g_ij``
* ``d2g(x)[..., i, j, k, l]``    ``d_k d_l g_ij``
* ``christoffel[..., k, i, j]``  ``Gamma^k_ij``
* ``ricci[..., i, j]``           Ricci tensor, ``R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg, optimize
from scipy.stats import norm, qmc

from . import expr as ex

__all__ = [
    "ChartDomain",
    "Interface",
    "MetricField",
    "TangentVector",
    "CurvatureSample",
    "RicciBoundReport",
    "DomainError",
    "SignatureError",
    "metric_eval",
    "christoffel_at",
    "christoffels",
    "christoffel_derivatives",
    "ricci_tensor",
    "ricci_at",
    "check_ricci_bound",
    "causal_class",
    "timelike_unit_sampler",
]


class DomainError(ValueError):
    """A point or stencil lies outside the chart box."""


class SignatureError(ValueError):
    """Eigenvalue signs disagree with the declared signature."""


@dataclass(frozen=True)
class ChartDomain:
    n: int
    box: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        box = np.asarray(self.box, dtype=float).reshape(self.n, 2)
        object.__setattr__(self, "box", box)
        if self.n < 2:
            raise ValueError("chart dimension must be at least 2")
        if len(self.names) != self.n:
            raise ValueError("need one coordinate name per dimension")
        if np.any(box[:, 1] <= box[:, 0]):
            raise ValueError("chart box needs positive extent on every axis")

    @classmethod
    def make(cls, box, names=None) -> "ChartDomain":
        box = np.asarray(box, dtype=float)
        n = box.shape[0]
        if names is None:
            names = tuple(f"x{i}" for i in range(n))
        return cls(n, box, tuple(names))

    @property
    def extent(self) -> np.ndarray:
        return self.box[:, 1] - self.box[:, 0]

    def contains(self, x, margin=0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = np.broadcast_to(np.asarray(margin, dtype=float), (self.n,))
        return np.all((x >= self.box[:, 0] + m) & (x <= self.box[:, 1] - m), axis=-1)

    def env(self, x) -> dict:
        x = np.asarray(x, dtype=float)
        return {name: x[..., k] for k, name in enumerate(self.names)}


@dataclass(frozen=True)
class Interface:
    """Hypersurface ``{level(x) = 0}`` across which second derivatives may jump."""

    text: str
    level: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def from_equation(cls, text: str, chart: ChartDomain) -> "Interface":
        if "=" not in text:
            raise ValueError(f"interface locus must be an equation, got {text!r}")
        lhs, rhs = text.split("=", 1)
        node = ex.sub(ex.parse_expr(lhs, chart.names), ex.parse_expr(rhs, chart.names))
        dnodes = [node.diff(v) for v in chart.names]

        def level(x, node=node):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(node.evaluate(chart.env(x)), x.shape[:-1]).astype(float)

        def grad(x, dnodes=dnodes):
            x = np.asarray(x, dtype=float)
            env = chart.env(x)
            return np.stack(
                [np.broadcast_to(d.evaluate(env), x.shape[:-1]) for d in dnodes], axis=-1
            ).astype(float)

        return cls(text.strip(), level, grad)

    def distance(self, x) -> np.ndarray:
        """First-order coordinate distance ``|F| / |grad F|``."""
        gr = np.linalg.norm(self.grad(x), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.level(x)) / np.where(gr > 0, gr, np.nan)


def _sym_from_upper(vals: Sequence, n: int, shape) -> np.ndarray:
    out = np.empty(tuple(shape) + (n, n))
    k = 0
    for i in range(n):
        for j in range(i, n):
            v = np.broadcast_to(vals[k], shape)
            out[..., i, j] = v
            out[..., j, i] = v
            k += 1
    return out


class MetricField:
    """Symmetric (0,2) metric on one chart.

    Parameters
    ----------
    chart
        Coordinate domain.
    g_func
        Batched component evaluator ``x -> (..., n, n)``.
    signature
        ``"riemannian"`` or ``"lorentzian"``.
    time_orientation
        Covector ``w``; a causal vector ``X`` is future pointing iff ``w(X) > 0``.
        Required for Lorentzian metrics.
    dg_func, d2g_func
        Optional analytic derivative evaluators.  Missing ones are obtained by
        central finite differences (one-sided within a stencil of an interface).
    interfaces
        Declared loci where second derivatives jump.
    """

    def __init__(
        self,
        chart: ChartDomain,
        g_func: Callable,
        *,
        signature: str = "riemannian",
        time_orientation=None,
        dg_func: Callable | None = None,
        d2g_func: Callable | None = None,
        interfaces: Sequence[Interface] = (),
        fd_rel_step: float = 1e-4,
        name: str = "",
        smoothness: str | None = None,
        mode: str | None = None,
    ):
        if signature not in ("riemannian", "lorentzian"):
            raise ValueError(f"unknown signature {signature!r}")
        if signature == "lorentzian" and time_orientation is None:
            raise ValueError("Lorentzian metrics need a time-orientation covector")
        self.chart = chart
        self.n = chart.n
        self._g = g_func
        self._dg = dg_func
        self._d2g = d2g_func
        self.signature = signature
        self.time_orientation = (
            None if time_orientation is None else np.asarray(time_orientation, dtype=float)
        )
        self.interfaces = tuple(interfaces)
        self.fd_step = fd_rel_step * chart.extent
        self.name = name
        self.smoothness = smoothness or ("C11" if self.interfaces else "smooth")
        if mode is None:
            mode = "closed_form" if dg_func is not None else "finite_difference"
        self.mode = mode
        # nested difference quotients reach 2 steps per level
        self.stencil_width = (
            4.0 * float(np.max(self.fd_step))
            if self._d2g is None
            else 1e-9 * float(np.max(chart.extent))
        )

    # ------------------------------------------------------------ construction

    @classmethod
    def from_expressions(
        cls,
        chart: ChartDomain,
        components: Sequence,
        *,
        derivatives: str = "closed_form",
        **kwargs,
    ) -> "MetricField":
        """Build from the ``n(n+1)/2`` upper-triangle component expressions."""
        n = chart.n
        m = n * (n + 1) // 2
        if len(components) != m:
            raise ValueError(
                f"incomplete symmetric matrix: expected {m} components, got {len(components)}"
            )
        nodes = [
            c if isinstance(c, ex.Node) else ex.parse_expr(str(c), chart.names)
            for c in components
        ]
        names = chart.names
        upper = [(i, j) for i in range(n) for j in range(i, n)]
        comp_of = {}
        for c, (i, j) in enumerate(upper):
            comp_of[i, j] = comp_of[j, i] = c

        def gather(flat_nodes, index, tail):
            fn = ex.compile_nodes(flat_nodes, names)
            index = np.asarray(index)

            def f(x):
                x = np.asarray(x, dtype=float)
                shape = x.shape[:-1]
                vals = fn(*(x[..., k] for k in range(n)))
                arr = np.stack([np.broadcast_to(v, shape) for v in vals], axis=-1)
                return arr[..., index.ravel()].reshape(shape + tail)

            return f

        g_index = [[comp_of[i, j] for j in range(n)] for i in range(n)]
        g_func = gather(nodes, g_index, (n, n))
        if derivatives == "finite_difference":
            return cls(chart, g_func, mode="finite_difference", **kwargs)
        if derivatives != "closed_form":
            raise ValueError(f"unknown derivative mode {derivatives!r}")
        d1 = {(c, k): nodes[c].diff(names[k]) for c in range(m) for k in range(n)}
        d1_keys = list(d1)
        d1_pos = {key: p for p, key in enumerate(d1_keys)}
        dg_index = [[[d1_pos[comp_of[i, j], k] for k in range(n)] for j in range(n)] for i in range(n)]
        dg = gather([d1[key] for key in d1_keys], dg_index, (n, n, n))
        d2 = {(c, k, l): d1[c, k].diff(names[l]) for c in range(m) for k in range(n) for l in range(k, n)}
        d2_keys = list(d2)
        d2_pos = {key: p for p, key in enumerate(d2_keys)}
        d2g_index = [[[[d2_pos[comp_of[i, j], min(k, l), max(k, l)] for l in range(n)]
                       for k in range(n)] for j in range(n)] for i in range(n)]
        d2g = gather([d2[key] for key in d2_keys], d2g_index, (n, n, n, n))

        field_ = cls(chart, g_func, dg_func=dg, d2g_func=d2g, mode="closed_form", **kwargs)
        field_.component_nodes = nodes
        return field_

    # -------------------------------------------------------------- evaluation

    def g(self, x) -> np.ndarray:
        return self._g(np.asarray(x, dtype=float))

    def dg(self, x) -> np.ndarray:
        if self._dg is not None:
            return self._dg(np.asarray(x, dtype=float))
        return self._fd(self.g, x)

    def d2g(self, x) -> np.ndarray:
        if self._d2g is not None:
            return self._d2g(np.asarray(x, dtype=float))
        return self._fd(self.dg, x)

    def ginv(self, x) -> np.ndarray:
        return np.linalg.inv(self.g(x))

    def _fd(self, func, x) -> np.ndarray:
        """Second-order difference quotient of ``func`` along every axis.

        Central stencils are used unless an interface level changes sign across
        the stencil; then a three-point one-sided stencil on the side of ``x``
        is used instead.
        """
        x = np.asarray(x, dtype=float)
        f0 = func(x)
        outs = []
        for k in range(self.n):
            h = self.fd_step[k]
            e = np.zeros(self.n)
            e[k] = h
            fp, fm = func(x + e), func(x - e)
            d = (fp - fm) / (2 * h)
            if self.interfaces:
                side = self._one_sided_side(x, e)
                if np.any(side != 0):
                    fp2 = func(x + 2 * e)
                    fm2 = func(x - 2 * e)
                    fwd = (-3 * f0 + 4 * fp - fp2) / (2 * h)
                    bwd = (3 * f0 - 4 * fm + fm2) / (2 * h)
                    s = side.reshape(side.shape + (1,) * (f0.ndim - side.ndim))
                    d = np.where(s > 0, fwd, np.where(s < 0, bwd, d))
            outs.append(d)
        return np.stack(outs, axis=-1)

    def _one_sided_side(self, x, e) -> np.ndarray:
        """+1 forward stencil, -1 backward stencil, 0 central."""
        side = np.zeros(x.shape[:-1], dtype=int)
        for itf in self.interfaces:
            l0 = itf.level(x)
            lp = itf.level(x + e)
            lm = itf.level(x - e)
            lp2 = itf.level(x + 2 * e)
            lm2 = itf.level(x - 2 * e)
            straddle = np.sign(lp) != np.sign(lm)
            fwd_ok = (np.sign(lp) == np.sign(l0)) & (np.sign(lp2) == np.sign(l0))
            bwd_ok = (np.sign(lm) == np.sign(l0)) & (np.sign(lm2) == np.sign(l0))
            side = np.where(straddle & fwd_ok, 1, np.where(straddle & bwd_ok, -1, side))
        return side

    def near_interface(self, x, width=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        width = self.stencil_width if width is None else width
        out = np.zeros(x.shape[:-1], dtype=bool)
        for itf in self.interfaces:
            out |= np.nan_to_num(itf.distance(x), nan=np.inf) <= width
        return out

    # ------------------------------------------------------------------ checks

    def check_signature(self, x) -> None:
        vals = np.linalg.eigvalsh(self.g(x))
        neg = np.sum(vals < 0, axis=-1)
        want = 0 if self.signature == "riemannian" else 1
        if np.any(neg != want) or np.any(np.abs(vals) < 1e-300):
            raise SignatureError(
                f"metric {self.name!r} does not have {self.signature} signature at sampled points"
            )

    def require_inside(self, x, margin=0.0) -> None:
        if not np.all(self.chart.contains(x, margin)):
            raise DomainError(f"point outside chart box of metric {self.name!r}")

    def inner(self, x, X, Y) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", X, self.g(x), Y)

    def is_future(self, X) -> np.ndarray:
        return np.einsum("i,...i->...", self.time_orientation, X) > 0

    def with_interfaces(self, interfaces) -> "MetricField":
        new = object.__new__(MetricField)
        new.__dict__.update(self.__dict__)
        new.interfaces = tuple(interfaces)
        return new

    def __repr__(self):
        return f"MetricField({self.name or 'unnamed'}, n={self.n}, {self.signature}, {self.mode})"


# ---------------------------------------------------------------------- types


@dataclass
class TangentVector:
    base: np.ndarray
    components: np.ndarray
    causal: str | None = None

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.components = np.asarray(self.components, dtype=float)

    @classmethod
    def at(cls, M: "MetricField", base, components) -> "TangentVector":
        """Vector checked to sit inside the chart, with its causal class cached."""
        base = np.asarray(base, dtype=float)
        M.require_inside(base)
        comps = np.asarray(components, dtype=float)
        if comps.shape != (M.n,):
            raise ValueError(f"need {M.n} components")
        return cls(base, comps, causal_class(M, base, comps))


@dataclass
class CurvatureSample:
    point: np.ndarray
    ricci: np.ndarray
    valid: bool


@dataclass
class RicciBoundReport:
    kappa: float
    mode: str
    min_margin: float
    witness_point: np.ndarray | None
    witness_vector: np.ndarray | None
    n_valid: int
    n_skipped: int
    passed: bool
    tol: float
    C: float | None = None
    n_vectors: int = 0
    margins: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "mode": self.mode,
            "min_margin": self.min_margin,
            "witness_point": None if self.witness_point is None else self.witness_point.tolist(),
            "witness_vector": None if self.witness_vector is None else self.witness_vector.tolist(),
            "n_valid": self.n_valid,
            "n_skipped": self.n_skipped,
            "passed": self.passed,
            "tol": self.tol,
            "C": self.C,
        }


# ----------------------------------------------------------------- operations


def metric_eval(M: MetricField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    M.require_inside(x)
    return M.g(x)


def _safe_inv(g: np.ndarray) -> np.ndarray:
    """Batched inverse; exactly singular entries come back as NaN instead of raising."""
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError:
        det = np.linalg.det(g)
        ok = np.abs(det) > 0
        out = np.full(g.shape, np.nan)
        out[ok] = np.linalg.inv(g[ok])
        return out


def christoffels(M: MetricField, x, g=None, dg=None) -> np.ndarray:
    """Batched ``Gamma^k_ij`` without domain checks (hot path for integrators)."""
    g = M.g(x) if g is None else g
    dg = M.dg(x) if dg is None else dg
    # low[..., l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    d_i_gjl = np.einsum("...jli->...lij", dg)
    d_j_gil = np.einsum("...ilj->...lij", dg)
    d_l_gij = np.einsum("...ijl->...lij", dg)
    low = 0.5 * (d_i_gjl + d_j_gil - d_l_gij)
    n = g.shape[-1]
    lead = g.shape[:-2]
    return (_safe_inv(g) @ low.reshape(lead + (n, n * n))).reshape(lead + (n, n, n))


def christoffel_derivatives(M: MetricField, x, g=None, dg=None, d2g=None):
    """Return ``(Gamma, dGamma)`` with ``dGamma[..., k, i, j, m] = d_m Gamma^k_ij``."""
    g = M.g(x) if g is None else g
    dg = M.dg(x) if dg is None else dg
    d2g = M.d2g(x) if d2g is None else d2g
    ginv = _safe_inv(g)
    low = 0.5 * (
        np.einsum("...jli->...lij", dg)
        + np.einsum("...ilj->...lij", dg)
        - np.einsum("...ijl->...lij", dg)
    )
    dlow = 0.5 * (
        np.einsum("...jlim->...lijm", d2g)
        + np.einsum("...iljm->...lijm", d2g)
        - np.einsum("...ijlm->...lijm", d2g)
    )
    n = g.shape[-1]
    lead = g.shape[:-2]
    gamma = (ginv @ low.reshape(lead + (n, n * n))).reshape(lead + (n, n, n))
    # d_m g^{kl} = -g^{ka} d_m g_ab g^{bl}, assembled as (k, m, l)
    tmp = (ginv @ dg.reshape(lead + (n, n * n))).reshape(lead + (n, n, n))
    dginv_kml = -(np.swapaxes(tmp, -1, -2) @ ginv[..., None, :, :])
    part1 = (dginv_kml.reshape(lead + (n * n, n)) @ low.reshape(lead + (n, n * n)))
    part1 = np.moveaxis(part1.reshape(lead + (n, n, n, n)), -3, -1)
    part2 = (ginv @ dlow.reshape(lead + (n, n ** 3))).reshape(lead + (n, n, n, n))
    dgamma = part1 + part2
    return gamma, dgamma


def christoffel_at(M: MetricField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    margin = 0.0 if M._dg is not None else 2 * M.fd_step
    M.require_inside(x, margin)
    g = M.g(x)
    if np.any(np.abs(np.linalg.det(g)) < 1e-14):
        raise linalg.LinAlgError("metric not invertible at x")
    return christoffels(M, x, g=g)


def ricci_tensor(M: MetricField, x) -> np.ndarray:
    """Batched Ricci components (no domain checks)."""
    gamma, dgamma = christoffel_derivatives(M, x)
    t1 = np.einsum("...rnsr->...sn", dgamma)
    t2 = np.einsum("...rrsn->...sn", dgamma)
    t3 = np.einsum("...rrl,...lns->...sn", gamma, gamma)
    t4 = np.einsum("...rnl,...lrs->...sn", gamma, gamma)
    ric = t1 - t2 + t3 - t4
    return 0.5 * (ric + np.swapaxes(ric, -1, -2))


def ricci_at(M: MetricField, x) -> CurvatureSample:
    x = np.asarray(x, dtype=float)
    margin = 0.0 if M._d2g is not None else 4 * M.fd_step
    M.require_inside(x, margin)
    if np.any(np.abs(np.linalg.det(M.g(x))) < 1e-14):
        raise linalg.LinAlgError("metric not invertible at x")
    ric = ricci_tensor(M, x)
    valid = not bool(np.any(M.near_interface(x)))
    return CurvatureSample(point=x, ricci=ric, valid=valid)


def causal_class(M: MetricField, x, X, tol=1e-12) -> str:
    q = float(M.inner(x, X, X))
    if M.signature == "riemannian":
        return "spacelike" if q > 0 else "undetermined"
    if q < -tol:
        return "timelike"
    if q > tol:
        return "spacelike"
    return "null"


# ------------------------------------------------------------------ samplers


def _sphere_points(dim: int, count: int, seed: int = 7) -> np.ndarray:
    """Deterministic low-discrepancy points on the unit sphere in R^dim."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    m = max(int(math.ceil(math.log2(max(count, 2)))), 1)
    u = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]
    z = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def _orthonormal_frame(g: np.ndarray):
    """g-orthonormal frame from the eigen-decomposition; timelike vectors first."""
    vals, vecs = np.linalg.eigh(g)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    return vecs / np.sqrt(np.abs(vals)), vals


def timelike_unit_sampler(M: MetricField, x, C: float, count: int = 4096):
    """Future unit timelike vectors at ``x`` with Euclidean norm at most ``C``.

    Points are spread over the hyperboloid ``g(X,X) = -1`` by rapidity ``s``
    and spatial direction ``u``: ``X = cosh(s) e0 + sinh(s) u``.  For each
    ``u`` the admissible rapidities form an interval ``[0, s_max]`` (the
    squared norm is convex in ``s``) whose right end is always included.
    """
    x = np.asarray(x, dtype=float)
    frame, _ = _orthonormal_frame(M.g(x))
    e0 = frame[:, 0]
    if M.time_orientation is not None and M.time_orientation @ e0 < 0:
        e0 = -e0
    spatial = frame[:, 1:]
    n = M.n
    n_dir = max(2, int(round(count ** ((n - 2) / (n - 1))))) if n > 2 else 2
    n_s = max(2, count // n_dir)
    dirs = _sphere_points(n - 1, n_dir) @ spatial.T
    fracs = np.linspace(0.0, 1.0, n_s)
    if e0 @ e0 > C * C:
        return np.empty((0, n))
    out = []
    for u in dirs:
        a, b, c = e0 @ e0, u @ u, e0 @ u

        def q(s):
            return a * np.cosh(s) ** 2 + b * np.sinh(s) ** 2 + 2 * c * np.cosh(s) * np.sinh(s)

        hi = 1.0
        while q(hi) <= C * C:
            hi *= 2.0
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if q(mid) <= C * C:
                lo = mid
            else:
                hi = mid
        s = lo * fracs
        out.append(np.cosh(s)[:, None] * e0 + np.sinh(s)[:, None] * u)
    return np.concatenate(out, axis=0)


def _refine_timelike(M: MetricField, g, R, X0, C):
    """Polish a sampled minimizer of ``Ric(X,X)`` on the h-bounded hyperboloid.

    The hyperboloid is parametrized by its spatial part ``v`` in a
    g-orthonormal frame, ``X = sqrt(1 + |v|^2) e0 + E v``, and the h-bound is
    enforced as an inequality constraint.
    """
    frame, _ = _orthonormal_frame(g)
    e0 = frame[:, 0]
    if M.time_orientation is not None and M.time_orientation @ e0 < 0:
        e0 = -e0
    E = frame[:, 1:]
    coef = np.linalg.lstsq(np.column_stack([e0, E]), X0, rcond=None)[0]

    def vec(v):
        return np.sqrt(1.0 + v @ v) * e0 + E @ v

    res = optimize.minimize(
        lambda v: vec(v) @ R @ vec(v),
        coef[1:],
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda v: C * C - vec(v) @ vec(v)}],
        options={"ftol": 1e-14, "maxiter": 200},
    )
    v = res.x
    if not np.all(np.isfinite(v)):
        return X0
    if vec(v) @ vec(v) > C * C:
        # shrink the spatial part back inside the bound
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if vec(mid * v) @ vec(mid * v) <= C * C else (lo, mid)
        v = lo * v
    X = vec(v)
    return X if X @ R @ X < X0 @ R @ X0 else X0


def check_ricci_bound(
    M: MetricField,
    kappa: float,
    points,
    *,
    mode: str = "riemannian",
    C: float | None = None,
    n_vectors: int = 4096,
    tol: float = 1e-8,
) -> RicciBoundReport:
    """Minimum of the Ricci lower-bound margin over sample points and vectors.

    ``riemannian`` mode minimizes ``Ric(X,X) - (n-1) kappa g(X,X)`` over g-unit
    vectors; ``timelike`` mode minimizes ``Ric(X,X) - (n-1) kappa`` over future
    unit timelike ``X`` with Euclidean norm at most ``C``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = M.n
    if mode == "timelike" and (M.signature != "lorentzian" or C is None):
        raise ValueError("timelike mode needs a Lorentzian metric and an h-bound C")
    inside = M.chart.contains(pts, 4 * M.fd_step if M._d2g is None else 0.0)
    valid = inside & ~M.near_interface(pts)
    n_skipped = int(np.sum(~valid))
    pts = pts[valid]
    if len(pts) == 0:
        raise ValueError("empty valid sample set")
    ric = ricci_tensor(M, pts)
    gs = M.g(pts)
    best = (np.inf, None, None)
    per_point = np.empty(len(pts))
    dirs = _sphere_points(n, n_vectors) if mode == "riemannian" else None
    for idx, (p, R, g) in enumerate(zip(pts, ric, gs)):
        if mode == "riemannian":
            X = dirs
            q = np.einsum("ki,ij,kj->k", X, g, X)
            X = X / np.sqrt(q)[:, None]
            # generalized eigenvectors give the exact minimizer of the pencil
            _, ev = linalg.eigh(R, g)
            X = np.concatenate([X, ev.T / np.sqrt(np.einsum("ki,ij,kj->k", ev.T, g, ev.T))[:, None]])
            margin = np.einsum("ki,ij,kj->k", X, R, X) - (n - 1) * kappa
        else:
            X = timelike_unit_sampler(M, p, C, n_vectors)
            if len(X) == 0:
                per_point[idx] = np.inf
                continue
            margin = np.einsum("ki,ij,kj->k", X, R, X) - (n - 1) * kappa
            Xr = _refine_timelike(M, g, R, X[int(np.argmin(margin))], C)
            X = np.concatenate([X, Xr[None]])
            margin = np.append(margin, Xr @ R @ Xr - (n - 1) * kappa)
        j = int(np.argmin(margin))
        per_point[idx] = margin[j]
        if margin[j] < best[0]:
            best = (float(margin[j]), p.copy(), X[j].copy())
    if not np.isfinite(best[0]):
        raise ValueError("empty valid sample set: no admissible vectors under the h-bound")
    return RicciBoundReport(
        kappa=kappa,
        mode=mode,
        min_margin=best[0],
        witness_point=best[1],
        witness_vector=best[2],
        n_valid=len(pts),
        n_skipped=n_skipped,
        passed=best[0] >= -tol,
        tol=tol,
        C=C,
        n_vectors=n_vectors,
        margins=per_point,
    )
