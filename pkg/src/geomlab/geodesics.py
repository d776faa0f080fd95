"""Geodesic flow, exponential maps and transported Jacobians.

The workhorse is :func:`flow`, a batched fixed-step classical RK4 integrator
of the geodesic equation.  Optional passengers ride along with each
geodesic: a parallel-transported frame, Jacobi fields (linearized geodesic
equation in coordinates) and the accumulated volume ``int |J| dt`` of the
Jacobian determinant built from those Jacobi fields.

Steps that would cross a declared interface locus are split: the crossing is
located by regula falsi to just before the locus, a micro-step carries the
state across, and the remainder of the step is taken on the far side.  This
keeps every RK stage on one smooth piece and preserves the fourth order on
C^{1,1} metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .metric import (
    DomainError,
    MetricField,
    TangentVector,
    christoffel_derivatives,
    christoffels,
)

__all__ = [
    "GeodesicState",
    "GeodesicSolution",
    "TransportFrame",
    "FlowResult",
    "flow",
    "integrate_geodesic",
    "exp_map",
    "exp_map_batch",
    "arc_length",
    "normal_jacobian",
    "orthonormalize",
    "DEFAULT_STEP",
    "TOL_FRAME",
]

DEFAULT_STEP = 1e-2
EVENT_TOL = 1e-10  # interface crossings are located to this level-set tolerance
TOL_FRAME = 1e-6  # largest accepted drift of a transported frame from orthonormality


class _Layout:
    """Column layout of the packed state ``[x | v | frame | jx | jv | vol]``."""

    def __init__(self, n: int, k: int, m: int, vol: bool):
        self.n, self.k, self.m, self.vol = n, k, m, vol
        o = 0
        self.x = slice(o, o + n); o += n
        self.v = slice(o, o + n); o += n
        self.E = slice(o, o + n * k); o += n * k
        self.jx = slice(o, o + n * m); o += n * m
        self.jv = slice(o, o + n * m); o += n * m
        self.V = slice(o, o + (1 if vol else 0)); o += 1 if vol else 0
        self.size = o

    def split(self, y):
        B = y.shape[0]
        n = self.n
        return (
            y[:, self.x],
            y[:, self.v],
            y[:, self.E].reshape(B, n, self.k),
            y[:, self.jx].reshape(B, n, self.m),
            y[:, self.jv].reshape(B, n, self.m),
        )


def _jdet(g, v, jx, scale):
    mat = np.concatenate([v[:, :, None], jx], axis=2)
    return np.sqrt(np.abs(np.linalg.det(g))) * np.linalg.det(mat) * scale


def _rhs(M: MetricField, y, lay: _Layout, scale):
    x, v, E, jx, jv = lay.split(y)
    B = y.shape[0]
    with np.errstate(all="ignore"):
        g = M.g(x)
        dg = M.dg(x)
        if lay.m:
            gam, dgam = christoffel_derivatives(M, x, g, dg, M.d2g(x))
        else:
            gam = christoffels(M, x, g, dg)
        out = np.empty_like(y)
        n = lay.n
        # gam_v[b, k, j] = Gamma^k_ij v^i
        gam_v = (v[:, None, None, :] @ gam)[:, :, 0, :]
        out[:, lay.x] = v
        out[:, lay.v] = -(gam_v @ v[:, :, None])[..., 0]
        if lay.k:
            out[:, lay.E] = -(gam_v @ E).reshape(B, -1)
        if lay.m:
            out[:, lay.jx] = jv.reshape(B, -1)
            vv = (v[:, :, None] * v[:, None, :]).reshape(B, 1, n * n)
            dgam_vv = (np.moveaxis(dgam, -1, 2).reshape(B, n * n, n * n) @ vv[:, 0, :, None])
            acc = dgam_vv.reshape(B, n, n) @ jx + 2.0 * (gam_v @ jv)
            out[:, lay.jv] = -acc.reshape(B, -1)
        if lay.vol:
            out[:, lay.V] = np.abs(_jdet(g, v, jx, scale))[:, None]
    return out


def _rk4(f, y, h):
    hh = h[:, None]
    k1 = f(y)
    k2 = f(y + 0.5 * hh * k1)
    k3 = f(y + 0.5 * hh * k2)
    k4 = f(y + hh * k3)
    return y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _levels(M: MetricField, x):
    if not M.interfaces:
        return np.zeros((x.shape[0], 0))
    return np.stack([itf.level(x) for itf in M.interfaces], axis=-1)


def _advance(M: MetricField, y, h, lay: _Layout, scale, counter):
    """One nominal step of size ``h`` per member with interface splitting."""
    f = lambda yy, sc=scale: _rhs(M, yy, lay, sc)  # noqa: E731
    if not M.interfaces:
        return _rk4(f, y, h)
    cur = y.copy()
    rem = h.copy()
    for _ in range(4 * len(M.interfaces) + 4):
        act = np.nonzero(rem > 0)[0]
        if act.size == 0:
            break
        ya, ra, sa = cur[act], rem[act], scale[act]
        fa = lambda yy, sc=sa: _rhs(M, yy, lay, sc)  # noqa: E731
        trial = _rk4(fa, ya, ra)
        L0 = _levels(M, ya[:, lay.x])
        L1 = _levels(M, trial[:, lay.x])
        cross = (np.sign(L0) * np.sign(L1) < 0) & (np.abs(L0) > 0.5 * EVENT_TOL)
        any_cross = cross.any(axis=1)
        done = act[~any_cross]
        cur[done] = trial[~any_cross]
        rem[done] = 0.0
        if not any_cross.any():
            break
        sub = np.nonzero(any_cross)[0]
        yc, rc, sc = ya[sub], ra[sub], sa[sub]
        fc = lambda yy, s_=sc: _rhs(M, yy, lay, s_)  # noqa: E731
        theta = np.ones(sub.size)
        which = np.zeros(sub.size, dtype=int)
        for i in range(L0.shape[1]):
            mask = cross[sub, i]
            if not mask.any():
                continue
            th = _locate_crossing(M, fc, yc, rc, lay, i, L0[sub, i], L1[sub, i], mask)
            better = mask & (th < theta)
            theta[better] = th[better]
            which[better] = i
        landed = _rk4(fc, yc, theta * rc)
        # micro-step across the locus so the next stages sit on the far side
        xl, vl = landed[:, lay.x], landed[:, lay.v]
        grads = np.stack([M.interfaces[w].grad(xl[j]) for j, w in enumerate(which)])
        rate = np.abs(np.einsum("bi,bi->b", grads, vl))
        micro = np.where(rate > 0, 3.0 * EVENT_TOL / np.maximum(rate, 1e-300), 0.0)
        micro = np.minimum(micro, (1.0 - theta) * rc)
        crossed = _rk4(fc, landed, micro)
        cur[act[sub]] = crossed
        rem[act[sub]] = np.maximum((1.0 - theta) * rc - micro, 0.0)
        counter[0] += sub.size
    return cur


def _locate_crossing(M, f, y, h, lay, i, l0, l1, mask, iters=60):
    """Fraction ``theta`` of the step landing just before interface ``i`` (Illinois)."""
    target = np.sign(l0) * EVENT_TOL
    a = np.zeros_like(h)
    b = np.ones_like(h)
    fa = l0 - target
    fb = l1 - target
    side = np.zeros_like(h)
    th = np.ones_like(h)
    itf = M.interfaces[i]
    for _ in range(iters):
        with np.errstate(all="ignore"):
            c = np.where(fb != fa, b - fb * (b - a) / (fb - fa), 0.5 * (a + b))
        c = np.clip(c, a, b)
        c = np.where(np.isfinite(c), c, 0.5 * (a + b))
        yc = _rk4(f, y, c * h)
        fc = itf.level(yc[:, lay.x]) - target
        same_as_a = np.sign(fc) == np.sign(fa)
        a_new = np.where(same_as_a, c, a)
        b_new = np.where(same_as_a, b, c)
        fa_new = np.where(same_as_a, fc, np.where(side == 1, 0.5 * fa, fa))
        fb_new = np.where(same_as_a, np.where(side == -1, 0.5 * fb, fb), fc)
        side = np.where(same_as_a, -1, 1)
        a, b, fa, fb = a_new, b_new, fa_new, fb_new
        th = a  # ``a`` always stays on the start side of the locus
        if np.all((np.abs(fa) <= 0.5 * EVENT_TOL) | (b - a < 1e-15) | ~mask):
            break
    return np.where(mask, th, 1.0)


def _exit_fraction(M: MetricField, x_old, x_new):
    """Fraction of the last step before the chart boundary, by linear interpolation."""
    lo, hi = M.chart.box[:, 0], M.chart.box[:, 1]
    dx = x_new - x_old
    with np.errstate(all="ignore"):
        f_hi = np.where(x_new > hi, (hi - x_old) / dx, 1.0)
        f_lo = np.where(x_new < lo, (lo - x_old) / dx, 1.0)
    frac = np.minimum(f_hi, f_lo).min(axis=1)
    return np.clip(np.nan_to_num(frac, nan=0.0), 0.0, 1.0)


@dataclass
class FlowResult:
    """Node-wise output of :func:`flow`.

    ``t[k, b]`` is the parameter of node ``k`` for member ``b``; ``alive[k, b]``
    is false once member ``b`` has left the chart or failed.
    """

    t: np.ndarray
    y: np.ndarray | None
    y_final: np.ndarray
    alive: np.ndarray | None
    reason: np.ndarray
    end_time: np.ndarray
    layout: _Layout
    scale: np.ndarray
    crossings: int = 0

    def _part(self, y, sl, shape=None):
        out = y[..., sl]
        return out if shape is None else out.reshape(out.shape[:-1] + shape)

    @property
    def x(self):
        return self._part(self.y, self.layout.x)

    @property
    def v(self):
        return self._part(self.y, self.layout.v)

    @property
    def frame(self):
        lay = self.layout
        return self._part(self.y, lay.E, (lay.n, lay.k))

    @property
    def jx(self):
        lay = self.layout
        return self._part(self.y, lay.jx, (lay.n, lay.m))

    @property
    def jv(self):
        lay = self.layout
        return self._part(self.y, lay.jv, (lay.n, lay.m))

    @property
    def volume(self):
        return self.y[..., self.layout.V][..., 0]

    @property
    def x_final(self):
        return self.y_final[:, self.layout.x]

    @property
    def v_final(self):
        return self.y_final[:, self.layout.v]

    def final(self, name):
        lay = self.layout
        B = self.y_final.shape[0]
        if name == "jx":
            return self.y_final[:, lay.jx].reshape(B, lay.n, lay.m)
        if name == "jv":
            return self.y_final[:, lay.jv].reshape(B, lay.n, lay.m)
        if name == "frame":
            return self.y_final[:, lay.E].reshape(B, lay.n, lay.k)
        if name == "volume":
            return self.y_final[:, lay.V][:, 0]
        raise KeyError(name)

    def jdet(self, M: MetricField):
        """Signed Jacobian determinant at every recorded node."""
        K, B, _ = self.y.shape
        flat = self.y.reshape(K * B, -1)
        lay = self.layout
        x = flat[:, lay.x]
        v = flat[:, lay.v]
        jx = flat[:, lay.jx].reshape(K * B, lay.n, lay.m)
        with np.errstate(all="ignore"):
            out = _jdet(M.g(x), v, jx, np.tile(self.scale, K))
        return out.reshape(K, B)


def flow(
    M: MetricField,
    x0,
    v0,
    T,
    *,
    h: float = DEFAULT_STEP,
    steps: int | None = None,
    frame0=None,
    jacobi0=None,
    volume_scale=None,
    record: bool = True,
) -> FlowResult:
    """Integrate a batch of geodesics.

    Parameters
    ----------
    x0, v0
        Initial positions and velocities, shape ``(B, n)``.
    T
        Final parameter, scalar or per member.  All members take the same
        number of steps, so each uses its own step ``T_b / steps``.
    h
        Target step; ``steps`` defaults to ``ceil(max(T) / h)``.
    frame0
        ``(B, n, k)`` vectors to parallel-transport.
    jacobi0
        Pair ``(J(0), J'(0))`` of ``(B, n, m)`` arrays in coordinates.
    volume_scale
        Per-member factor making the Jacobian determinant dimensionless; when
        given (requires ``m = n - 1`` Jacobi fields) ``int_0^t |J|`` is carried.
    record
        Keep every node; otherwise only the final state.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    v0 = np.atleast_2d(np.asarray(v0, dtype=float))
    B, n = x0.shape
    T = np.broadcast_to(np.asarray(T, dtype=float), (B,)).copy()
    if np.any(T < 0):
        raise ValueError("T must be nonnegative")
    if not np.all(M.chart.contains(x0)):
        raise DomainError("initial point outside chart box")
    k = 0 if frame0 is None else np.asarray(frame0).shape[-1]
    m = 0 if jacobi0 is None else np.asarray(jacobi0[0]).shape[-1]
    vol = volume_scale is not None
    if vol and m != n - 1:
        raise ValueError("volume accumulation needs n-1 Jacobi fields")
    lay = _Layout(n, k, m, vol)
    y = np.zeros((B, lay.size))
    y[:, lay.x] = x0
    y[:, lay.v] = v0
    if k:
        y[:, lay.E] = np.asarray(frame0, dtype=float).reshape(B, -1)
    if m:
        y[:, lay.jx] = np.asarray(jacobi0[0], dtype=float).reshape(B, -1)
        y[:, lay.jv] = np.asarray(jacobi0[1], dtype=float).reshape(B, -1)
    scale = np.ones(B) if volume_scale is None else np.broadcast_to(
        np.asarray(volume_scale, dtype=float), (B,)).copy()
    if steps is None:
        steps = max(1, int(math.ceil(float(np.max(T)) / h - 1e-9))) if np.max(T) > 0 else 1
    hb = T / steps
    alive = np.ones(B, dtype=bool)
    reason = np.array(["reached T"] * B, dtype=object)
    end_time = T.copy()
    Y = np.empty((steps + 1, B, lay.size)) if record else None
    A = np.empty((steps + 1, B), dtype=bool) if record else None
    if record:
        Y[0], A[0] = y, alive
    counter = [0]
    for step in range(steps):
        idx = np.nonzero(alive & (hb > 0))[0]
        if idx.size:
            ynew = _advance(M, y[idx], hb[idx], lay, scale[idx], counter)
            finite = np.all(np.isfinite(ynew), axis=1)
            inside = M.chart.contains(ynew[:, lay.x]) & finite
            ok = inside
            y[idx[ok]] = ynew[ok]
            dead = idx[~ok]
            alive[dead] = False
            reason[dead] = np.where(finite[~ok], "exited chart", "step failure")
            frac = _exit_fraction(M, y[dead, lay.x], ynew[~ok][:, lay.x])
            end_time[dead] = (step + np.where(finite[~ok], frac, 0.0)) * hb[dead]
        if record:
            Y[step + 1], A[step + 1] = y, alive
    t = np.outer(np.arange(steps + 1), hb)
    return FlowResult(t, Y, y.copy(), A, reason, end_time, lay, scale, counter[0])


# ------------------------------------------------------------ single geodesic


@dataclass
class GeodesicState:
    t: float
    position: np.ndarray
    velocity: np.ndarray


@dataclass
class GeodesicSolution:
    """Trajectory of one geodesic with cubic Hermite dense output."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    energy: np.ndarray
    reason: str
    error_estimate: float | None = None
    crossings: int = 0
    _dense: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.t) >= 2:
            self._dense = (
                CubicHermiteSpline(self.t, self.x, self.v, axis=0),
                CubicHermiteSpline(self.t, self.v, self.a, axis=0),
            )

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def __call__(self, s):
        """Dense position and velocity at parameter(s) ``s``."""
        if self._dense is None:
            return self.x[0], self.v[0]
        return self._dense[0](s), self._dense[1](s)

    @property
    def states(self) -> list[GeodesicState]:
        return [GeodesicState(float(t), x, v) for t, x, v in zip(self.t, self.x, self.v)]

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def to_csv_rows(self):
        n = self.x.shape[1]
        header = ["t"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)] + ["energy"]
        rows = [[t, *x, *v, e] for t, x, v, e in zip(self.t, self.x, self.v, self.energy)]
        return header, rows


def _solution_from_flow(M: MetricField, res: FlowResult) -> GeodesicSolution:
    alive = res.alive[:, 0]
    K = int(np.sum(alive))
    x = res.x[:K, 0]
    v = res.v[:K, 0]
    t = res.t[:K, 0]
    g = M.g(x)
    energy = np.einsum("ki,kij,kj->k", v, g, v)
    a = -np.einsum("kcij,ki,kj->kc", christoffels(M, x, g), v, v)
    return GeodesicSolution(t, x, v, a, energy, str(res.reason[0]), crossings=res.crossings)


def integrate_geodesic(
    M: MetricField,
    v: TangentVector,
    T: float,
    *,
    h: float = DEFAULT_STEP,
    error_estimate: bool = True,
) -> GeodesicSolution:
    """Integrate the geodesic with initial data ``v`` on ``[0, T]``.

    The step-halving error estimate is ``|y_h(T) - y_{h/2}(T)| / 15``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if not M.chart.contains(v.base):
        raise DomainError("base point outside chart box")
    res = flow(M, v.base[None], v.components[None], T, h=h)
    sol = _solution_from_flow(M, res)
    if len(sol.t) < 2:
        raise DomainError("geodesic leaves the chart immediately")
    if error_estimate and sol.reason == "reached T":
        fine = flow(M, v.base[None], v.components[None], T, h=h / 2, record=False)
        if fine.reason[0] == "reached T":
            diff = fine.y_final[0] - res.y_final[0]
            sol.error_estimate = float(np.max(np.abs(diff))) / 15.0
    return sol


def exp_map_batch(M: MetricField, P, W, *, h: float = DEFAULT_STEP, steps: int | None = None):
    """Batched ``exp_p(w)``; returns ``(points, ok)`` with ``ok`` false on chart exit."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    speed = np.sqrt(np.abs(np.einsum("bi,bij,bj->b", W, M.g(P), W)))
    if steps is None:
        steps = max(1, int(math.ceil(max(float(np.max(speed)), 1e-12) / h)))
    res = flow(M, P, W, 1.0, steps=steps, record=False)
    return res.x_final, res.reason == "reached T"


def exp_map(M: MetricField, p, w, *, h: float = DEFAULT_STEP) -> np.ndarray:
    """``exp_p(w)``; raises :class:`DomainError` if the geodesic leaves the chart first."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if not M.chart.contains(p):
        raise DomainError("base point outside chart box")
    if not np.any(w):
        return p.copy()
    pts, ok = exp_map_batch(M, p, w, h=h)
    if not ok[0]:
        raise DomainError("geodesic leaves the chart before parameter 1")
    return pts[0]


def arc_length(M: MetricField, curve, t1: float, t2: float, *, order: int = 8, pieces: int | None = None) -> float:
    """``int_{t1}^{t2} sqrt|g(c', c')| dt`` by composite Gauss-Legendre quadrature.

    ``curve`` is a :class:`GeodesicSolution` or a pair ``(t_samples, x_samples)``
    (interpolated by a cubic spline).
    """
    if isinstance(curve, GeodesicSolution):
        lo, hi = curve.span
        breaks = curve.t
        vel = lambda s: curve(s)[1]  # noqa: E731
        pos = lambda s: curve(s)[0]  # noqa: E731
    else:
        ts, xs = (np.asarray(a, dtype=float) for a in curve)
        lo, hi = float(ts[0]), float(ts[-1])
        spl = CubicSpline(ts, xs, axis=0)
        breaks = ts
        vel = spl.derivative()
        pos = spl
    if not (lo - 1e-12 <= t1 < t2 <= hi + 1e-12):
        raise ValueError(f"[{t1}, {t2}] is not inside the curve span [{lo}, {hi}]")
    if pieces is None:
        inner = breaks[(breaks > t1) & (breaks < t2)]
        edges = np.concatenate([[t1], inner, [t2]])
    else:
        edges = np.linspace(t1, t2, pieces + 1)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    s = (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * weights).ravel()
    x, xd = pos(s), vel(s)
    q = np.einsum("ki,kij,kj->k", xd, M.g(x), xd)
    return float(np.sum(w * np.sqrt(np.abs(q))))


# ------------------------------------------------------- normal exponential map


def orthonormalize(g: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the columns of ``vectors`` with respect to ``g`` (no null vectors)."""
    out = np.array(vectors, dtype=float)
    for a in range(out.shape[1]):
        for b in range(a):
            eb = out[:, b]
            out[:, a] -= (eb @ g @ out[:, a]) / (eb @ g @ eb) * eb
        out[:, a] /= math.sqrt(abs(out[:, a] @ g @ out[:, a]))
    return out


@dataclass
class TransportFrame:
    """Normal geodesic with its parallel frame and normal-exponential Jacobian."""

    normal: np.ndarray
    t: np.ndarray
    x: np.ndarray
    frame: np.ndarray
    J: np.ndarray
    zero_nodes: np.ndarray
    frame_error: float
    reason: str

    def J_at(self, s):
        return np.interp(s, self.t, self.J)

    def to_csv_rows(self):
        n = self.x.shape[1]
        header = ["t"] + [f"x{i}" for i in range(n)] + ["J"]
        return header, [[t, *x, j] for t, x, j in zip(self.t, self.x, self.J)]


def normal_volume_scale(M: MetricField, q, nvec, tangents) -> np.ndarray:
    """Factor making the normal-exponential Jacobian equal 1 at the foot point."""
    q = np.atleast_2d(q)
    g = M.g(q)
    mat = np.concatenate([np.atleast_2d(nvec)[:, :, None], np.atleast_3d(tangents)], axis=2)
    raw = np.sqrt(np.abs(np.linalg.det(g))) * np.linalg.det(mat)
    return 1.0 / raw


def normal_jacobian(
    M: MetricField,
    q,
    nvec,
    tangents,
    dnormal,
    tau_max: float,
    *,
    h: float = DEFAULT_STEP,
) -> TransportFrame:
    """Jacobian of the normal exponential map along ``tau -> exp_q(tau n)``.

    Parameters
    ----------
    q, nvec
        Foot point and future unit normal.
    tangents
        ``(n, n-1)`` basis of the tangent space of the hypersurface at ``q``.
    dnormal
        ``(n, n-1)`` coordinate derivatives of the unit normal field along
        ``tangents`` (the shape-operator initial data of the Jacobi fields).
    """
    q = np.asarray(q, dtype=float)
    nvec = np.asarray(nvec, dtype=float)
    tangents = np.asarray(tangents, dtype=float)
    g0 = M.g(q)
    frame0 = np.concatenate([nvec[:, None], orthonormalize(g0, tangents)], axis=1)
    scale = normal_volume_scale(M, q, nvec, tangents[None])
    res = flow(M, q[None], nvec[None], tau_max, h=h, frame0=frame0[None],
               jacobi0=(tangents[None], np.asarray(dnormal, dtype=float)[None]),
               volume_scale=scale)
    K = int(np.sum(res.alive[:, 0]))
    J = res.jdet(M)[:K, 0]
    x = res.x[:K, 0]
    E = res.frame[:K, 0]
    gs = M.g(x)
    gram = np.einsum("kia,kij,kjb->kab", E, gs, E)
    eta = np.diag([-1.0] + [1.0] * (M.n - 1)) if M.signature == "lorentzian" else np.eye(M.n)
    frame_error = float(np.max(np.abs(gram - eta)))
    zero_nodes = np.nonzero(np.sign(J[1:]) != np.sign(J[:-1]))[0] + 1
    return TransportFrame(nvec, res.t[:K, 0], x, E, J, zero_nodes, frame_error, str(res.reason[0]))
