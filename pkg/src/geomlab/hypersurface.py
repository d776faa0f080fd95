"""Spacelike hypersurfaces, unit normals, mean curvature and time separation.

A hypersurface is the zero set of a level function ``F`` whose future side is
where ``F`` grows along future-pointing vectors.  A compact patch ``A`` is the
image of a closed parameter box under an embedding.  Time separation from the
hypersurface is found by shooting normal geodesics: a point ``p`` is reached
from foot parameter ``u`` after normal time ``tau`` when
``exp(q(u), tau n(u)) = p``, and the separation is the largest such ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import expr as ex
from .geodesics import flow
from .metric import MetricField, christoffels
from .shooting import solve_preimages

__all__ = [
    "Hypersurface",
    "HypersurfaceError",
    "NormalBundleSample",
    "NormalShooter",
    "SeparationResult",
    "CutRecord",
    "unit_normal",
    "mean_curvature",
    "time_separation",
    "cut_function",
    "ball_membership",
    "TOL_CUT",
    "CUT_BRACKET",
]

TOL_CUT = 1e-3
CUT_BRACKET = 1e-2
SHOOT_STEP = 5e-2


class HypersurfaceError(ValueError):
    """Degenerate level function, point off the hypersurface or non-spacelike slice."""


@dataclass
class NormalBundleSample:
    """Normal data at foot points ``q = embed(u)``.

    ``tangents[b]`` holds the coordinate vectors ``d embed / d u_a`` as columns and
    ``dnormal[b]`` the coordinate derivatives of the unit normal field along them.
    """

    u: np.ndarray
    q: np.ndarray
    normal: np.ndarray
    tangents: np.ndarray
    dnormal: np.ndarray
    area_weight: np.ndarray


class Hypersurface:
    """Level set ``{F = 0}`` with a parameterized compact patch.

    Parameters
    ----------
    M
        Lorentzian metric.
    level
        Expression for ``F`` in the chart coordinates.
    params, param_box, embedding
        Patch parameter names, their closed box and the embedding expressions
        (one per chart coordinate, in the parameters).
    search_box
        Parameter box used for competitor searches; defaults to the patch box
        widened by its own width on each side, trimmed to stay in the chart.
    """

    def __init__(self, M: MetricField, level: str, params, param_box, embedding,
                 *, search_box=None):
        if M.signature != "lorentzian":
            raise HypersurfaceError("hypersurfaces are only supported in Lorentzian metrics")
        self.M = M
        self.n = M.n
        self.text = str(level)
        names = M.chart.names
        self.level_node = ex.parse_expr(str(level), names)
        grad = [self.level_node.diff(v) for v in names]
        hess = [gd.diff(v) for gd in grad for v in names]
        self._F = ex.compile_nodes([self.level_node], names)
        self._dF = ex.compile_nodes(grad, names)
        self._d2F = ex.compile_nodes(hess, names)
        self.params = tuple(params)
        self.m = len(self.params)
        if self.m != self.n - 1:
            raise HypersurfaceError(f"patch needs {self.n - 1} parameters, got {self.m}")
        self.param_box = np.asarray(param_box, dtype=float).reshape(self.m, 2)
        if np.any(self.param_box[:, 1] <= self.param_box[:, 0]):
            raise HypersurfaceError("patch box needs positive extent on every axis")
        if len(embedding) != self.n:
            raise HypersurfaceError(f"embedding needs {self.n} expressions")
        self._args = (str(level), self.params, self.param_box.tolist(), [str(e) for e in embedding],
                      search_box)
        emb = [ex.parse_expr(str(e), self.params) for e in embedding]
        self._emb = ex.compile_nodes(emb, self.params)
        self._demb = ex.compile_nodes([e.diff(p) for e in emb for p in self.params], self.params)
        self.orientation = self._orientation()
        self.search_box = (self._default_search_box() if search_box is None
                           else np.asarray(search_box, dtype=float).reshape(self.m, 2))
        self._check_patch()

    @classmethod
    def from_spec(cls, M: MetricField, sigma: str, patch: dict | None, **kwargs) -> "Hypersurface":
        """Build from the ``"sigma"`` and ``"patch"`` entries of a metric document."""
        if patch is None:
            params = [f"u{i}" for i in range(1, M.n)]
            patch = {"params": params, "box": (0.5 * M.chart.box[1:]).tolist(),
                     "embedding": ["0"] + params}
        return cls(M, sigma, patch["params"], patch["box"], patch["embedding"],
                   search_box=patch.get("search_box"), **kwargs)

    def with_metric(self, M: MetricField) -> "Hypersurface":
        """Same level set and patch in another metric on the same chart."""
        level, params, box, emb, search = self._args
        return Hypersurface(M, level, params, box, emb, search_box=search)

    # ------------------------------------------------------------ evaluation

    @staticmethod
    def _stack(fn, x, tail):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        vals = fn(*(x[..., i] for i in range(x.shape[-1])))
        out = np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in vals], -1)
        return out.reshape(shape + tail)

    def level(self, x) -> np.ndarray:
        return self._stack(self._F, x, ())

    def level_grad(self, x) -> np.ndarray:
        return self._stack(self._dF, x, (self.n,))

    def level_hess(self, x) -> np.ndarray:
        return self._stack(self._d2F, x, (self.n, self.n))

    def embed(self, u) -> np.ndarray:
        return self._stack(self._emb, u, (self.n,))

    def tangents(self, u) -> np.ndarray:
        """``(..., n, n-1)`` coordinate tangent vectors of the embedding."""
        return self._stack(self._demb, u, (self.n, self.m))

    def side(self, x) -> np.ndarray:
        """Positive on the future side of the hypersurface."""
        return self.orientation * self.level(x)

    def in_box(self, u, box=None) -> np.ndarray:
        box = self.param_box if box is None else box
        u = np.asarray(u, dtype=float)
        tol = 1e-9 * (box[:, 1] - box[:, 0])
        return np.all((u >= box[:, 0] - tol) & (u <= box[:, 1] + tol), axis=-1)

    def param_grid(self, per_axis: int, box=None, nodes: str = "uniform"):
        """Tensor grid and product weights over a parameter box.

        ``nodes="gauss"`` uses Gauss-Legendre nodes; otherwise a uniform grid
        with trapezoid weights.
        """
        box = self.param_box if box is None else np.asarray(box, dtype=float)
        if nodes == "gauss":
            x, w = np.polynomial.legendre.leggauss(per_axis)
            axes = [0.5 * (b - a) * x + 0.5 * (a + b) for a, b in box]
            wts = [0.5 * (b - a) * w for a, b in box]
        else:
            axes = [np.linspace(a, b, per_axis) for a, b in box]
            wts = []
            for a, b in box:
                w = np.full(per_axis, (b - a) / max(per_axis - 1, 1))
                w[[0, -1]] *= 0.5
                wts.append(w)
        U = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.m)
        W = np.prod(np.stack(np.meshgrid(*wts, indexing="ij"), -1).reshape(-1, self.m), axis=1)
        return U, W

    def _orientation(self) -> int:
        x0 = self.embed(self.param_box.mean(axis=1))
        self.M.require_inside(x0)
        dF = self.level_grad(x0)
        G = self.M.ginv(x0) @ dF
        if float(dF @ G) >= 0:
            raise HypersurfaceError("hypersurface is not spacelike at the patch center")
        # -G points toward increasing F
        return 1 if bool(self.M.is_future(-G)) else -1

    def _default_search_box(self) -> np.ndarray:
        box = self.param_box.copy()
        w = box[:, 1] - box[:, 0]
        wide = np.stack([box[:, 0] - w, box[:, 1] + w], axis=1)
        # shrink toward the patch until sampled embedded points sit in the chart
        for _ in range(60):
            U, _ = self.param_grid(7, wide)
            if np.all(self.M.chart.contains(self.embed(U))):
                return wide
            wide = 0.5 * (wide + box)
        return box

    def _check_patch(self) -> None:
        U, _ = self.param_grid(5)
        X = self.embed(U)
        if not np.all(self.M.chart.contains(X)):
            raise HypersurfaceError("patch leaves the chart box")
        scale = np.max(np.abs(self.level_grad(X))) * float(np.max(self.M.chart.extent))
        if np.max(np.abs(self.level(X))) > 1e-9 * max(scale, 1.0):
            raise HypersurfaceError("patch embedding does not lie on the level set")
        self.normal_data(U)  # raises when not spacelike

    # -------------------------------------------------------------- normals

    def normal_and_derivative(self, x):
        """Future unit normal field of the level sets and its coordinate Jacobian.

        Returns ``(n, dn)`` with ``dn[..., i, m] = d_m n^i``.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        g = self.M.g(x)
        gi = np.linalg.inv(g)
        dg = self.M.dg(x)
        dF = self.level_grad(x)
        d2F = self.level_hess(x)
        G = np.einsum("zij,zj->zi", gi, dF)
        q = np.einsum("zi,zi->z", dF, G)
        if np.any(~(q < 0)):
            raise HypersurfaceError("level set is not spacelike at a sampled point")
        N = np.sqrt(-q)
        s = -self.orientation
        dG = -np.einsum("zia,zabm,zb->zim", gi, dg, G) + np.einsum("zij,zjm->zim", gi, d2F)
        dq = np.einsum("zim,zi->zm", d2F, G) + np.einsum("zi,zim->zm", dF, dG)
        dN = -dq / (2.0 * N[:, None])
        nvec = s * G / N[:, None]
        dn = s * (dG / N[:, None, None] - G[:, :, None] * dN[:, None, :] / (N * N)[:, None, None])
        return nvec, dn

    def normal_field(self, x) -> np.ndarray:
        return self.normal_and_derivative(x)[0]

    def normal_data(self, u) -> NormalBundleSample:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        q = self.embed(u)
        E = self.tangents(u)
        nvec, dn = self.normal_and_derivative(q)
        dnE = np.einsum("zim,zma->zia", dn, E)
        gram = np.einsum("zia,zij,zjb->zab", E, self.M.g(q), E)
        det = np.linalg.det(gram)
        if np.any(det <= 0):
            raise HypersurfaceError("patch is degenerate or not spacelike")
        return NormalBundleSample(u, q, nvec, E, dnE, np.sqrt(det))

    def mean_curvature(self, u) -> np.ndarray:
        """Trace of ``V -> tan(nabla_V n)`` over the patch tangent spaces at ``embed(u)``."""
        d = self.normal_data(u)
        g = self.M.g(d.q)
        gam = christoffels(self.M, d.q)
        cov = d.dnormal + np.einsum("zkij,zia,zj->zka", gam, d.tangents, d.normal)
        S = np.einsum("zka,zkl,zlb->zab", cov, g, d.tangents)
        gram = np.einsum("zia,zij,zjb->zab", d.tangents, g, d.tangents)
        return np.einsum("zab,zba->z", np.linalg.inv(gram), S)

    def project_parameters(self, q) -> np.ndarray:
        """Parameters of the closest embedded grid node (coarse inverse of the embedding)."""
        U, _ = self.param_grid(41 if self.m == 1 else 15, self.search_box)
        _, idx = cKDTree(self.embed(U)).query(np.atleast_2d(q))
        return U[idx]


# ---------------------------------------------------------------- operations


def _hypersurface_point(hyp: Hypersurface, q, tol=1e-8):
    q = np.atleast_2d(np.asarray(q, dtype=float))
    hyp.M.require_inside(q)
    grad = np.linalg.norm(hyp.level_grad(q), axis=-1)
    if np.any(grad < 1e-12):
        raise HypersurfaceError("level gradient vanishes")
    if np.any(np.abs(hyp.level(q)) > tol * np.maximum(grad, 1.0)):
        raise HypersurfaceError("point is not on the hypersurface")
    return q


def unit_normal(M: MetricField, hyp: Hypersurface, q) -> np.ndarray:
    """Future unit normal at a point of the hypersurface."""
    if M is not hyp.M:
        hyp = hyp.with_metric(M)
    q = _hypersurface_point(hyp, q)
    out = hyp.normal_field(q)
    return out[0] if out.shape[0] == 1 else out


def mean_curvature(M: MetricField, hyp: Hypersurface, u) -> np.ndarray | float:
    """Mean curvature at patch parameters ``u``."""
    if M is not hyp.M:
        hyp = hyp.with_metric(M)
    out = hyp.mean_curvature(np.atleast_2d(u))
    return float(out[0]) if np.ndim(u) == 1 else out


# ------------------------------------------------------------- normal shooting


@dataclass
class SeparationResult:
    """Time separation estimates for a batch of points.

    ``tau[i]`` is the largest normal time over competitors reaching ``p_i``
    (0 when none does), ``foot[i]`` its foot parameter, ``witnesses[i]`` all
    distinct ``(u, tau)`` competitors.  ``lower_bound_only[i]`` is set when
    the search region may not contain the maximizer.
    """

    tau: np.ndarray
    foot: np.ndarray
    witnesses: list
    lower_bound_only: np.ndarray
    future_side: np.ndarray

    def n_maximizers(self, tol: float = TOL_CUT) -> np.ndarray:
        out = np.zeros(len(self.tau), dtype=int)
        for i, w in enumerate(self.witnesses):
            if len(w):
                out[i] = int(np.sum(np.abs(w[:, -1] - self.tau[i]) <= tol))
        return out


class NormalShooter:
    """Competitor search over normal geodesics of a hypersurface.

    Parameters
    ----------
    hyp
        The hypersurface; its ``search_box`` bounds the foot parameters.
    tau_max
        Largest normal time explored.
    n_feet, n_times
        Resolution of the seeding cloud (feet per parameter axis, time nodes).
    h
        Target integration step for shooting.
    """

    def __init__(self, hyp: Hypersurface, tau_max: float, *, n_feet: int | None = None,
                 n_times: int = 24, h: float = SHOOT_STEP, tol: float = 1e-9, k: int = 4):
        self.hyp = hyp
        self.M = hyp.M
        self.m = hyp.m
        self.tau_max = float(tau_max)
        self.h, self.tol, self.k = h, tol, k
        n_feet = n_feet or (33 if self.m == 1 else 13)
        U, _ = hyp.param_grid(n_feet, hyp.search_box)
        d = hyp.normal_data(U)
        steps = max(1, int(math.ceil(self.tau_max / h)))
        res = flow(self.M, d.q, d.normal, self.tau_max, steps=steps)
        stride = max(1, steps // n_times)
        xs, zs = [d.q], [np.concatenate([U, np.zeros((len(U), 1))], axis=1)]
        for kk in range(stride, steps + 1, stride):
            alive = res.alive[kk]
            xs.append(res.x[kk][alive])
            zs.append(np.concatenate([U[alive], res.t[kk][alive][:, None]], axis=1))
        self.cloud_x = np.concatenate(xs)
        self.cloud_z = np.concatenate(zs)
        self.tree = cKDTree(self.cloud_x)
        box = hyp.search_box
        self.spacing = np.concatenate([(box[:, 1] - box[:, 0]) / max(n_feet - 1, 1),
                                       [stride * self.tau_max / steps]])
        self.lo = np.concatenate([box[:, 0], [0.0]])
        self.hi = np.concatenate([box[:, 1], [self.tau_max]])
        # last time each foot's geodesic stays in the chart
        self.reach = res.end_time

    def evaluate(self, Z, *, jacobian: bool = True, index=None):
        """Endpoints ``exp(q(u), tau n(u))`` and their ``(u, tau)`` Jacobian."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        u, tau = Z[:, :self.m], Z[:, self.m]
        B = len(Z)
        inside_q = self.M.chart.contains(self.hyp.embed(u)) if B else np.zeros(0, bool)
        phi = np.full((B, self.M.n), np.nan)
        jac = np.full((B, self.M.n, self.M.n), np.nan)
        ok = np.zeros(B, dtype=bool)
        idx = np.nonzero(inside_q)[0]
        if idx.size == 0:
            return phi, jac, ok
        d = self.hyp.normal_data(u[idx])
        t = tau[idx]
        steps = max(1, int(math.ceil(float(np.max(np.abs(t))) / self.h)))
        j0 = (d.tangents, t[:, None, None] * d.dnormal) if jacobian else None
        res = flow(self.M, d.q, t[:, None] * d.normal, 1.0, steps=steps, jacobi0=j0, record=False)
        good = res.reason == "reached T"
        phi[idx] = res.x_final
        if jacobian:
            vend = res.v_final
            small = np.abs(t) < 1e-12
            dtau = np.where(small[:, None], d.normal, vend / np.where(small, 1.0, t)[:, None])
            jac[idx] = np.concatenate([res.final("jx"), dtau[:, :, None]], axis=2)
        ok[idx] = good
        return phi, jac, ok

    def separation(self, P) -> SeparationResult:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        B = len(P)
        future = self.hyp.side(P) > 0
        tau = np.zeros(B)
        foot = np.full((B, self.m), np.nan)
        wit = [np.zeros((0, self.m + 1)) for _ in range(B)]
        lb = np.zeros(B, dtype=bool)
        idx = np.nonzero(future)[0]
        if idx.size:
            pre = solve_preimages(self.evaluate, self.cloud_x, self.cloud_z, self.spacing,
                                  P[idx], self.lo, self.hi, k=self.k, tol=self.tol, tree=self.tree)
            for j, i in enumerate(idx):
                zs = pre.z[j]
                zs = zs[zs[:, -1] > 0] if len(zs) else zs
                wit[i] = zs
                lb[i] = bool(pre.outside[j])
                if len(zs):
                    best = int(np.argmax(zs[:, -1]))
                    tau[i] = zs[best, -1]
                    foot[i] = zs[best, :self.m]
                    on_edge = ~self.hyp.in_box(foot[i], _shrink(self.hyp.search_box, 1e-6))
                    lb[i] |= bool(on_edge)
                else:
                    lb[i] = True
        return SeparationResult(tau, foot, wit, lb, future)


def _shrink(box, rel):
    w = box[:, 1] - box[:, 0]
    return np.stack([box[:, 0] + rel * w, box[:, 1] - rel * w], axis=1)


def time_separation(M: MetricField, hyp: Hypersurface, p, *, tau_max: float | None = None,
                    shooter: NormalShooter | None = None) -> SeparationResult:
    """Time separation from the hypersurface by normal-geodesic competitor search.

    Points on the past side (or on the hypersurface) get 0.
    """
    if shooter is None:
        if tau_max is None:
            tau_max = float(np.max(M.chart.extent))
        shooter = NormalShooter(hyp, tau_max)
    return shooter.separation(p)


@dataclass
class CutRecord:
    """Cut estimate along one normal geodesic.

    ``status`` is ``"cut found"``, ``"exceeds horizon"`` (no longer competitor
    up to ``T_max``) or ``"truncated horizon"`` (the geodesic left the chart
    first; the estimate is then the exit time).
    """

    foot: np.ndarray
    normal: np.ndarray
    estimate: float
    bracket: tuple
    status: str
    witness: np.ndarray | None = None
    probes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "foot": self.foot.tolist(),
            "normal": self.normal.tolist(),
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "status": self.status,
            "witness": None if self.witness is None else self.witness.tolist(),
        }


def cut_function(M: MetricField, hyp: Hypersurface, u, T_max: float, *,
                 tol_cut: float = TOL_CUT, bracket: float = CUT_BRACKET, n_scan: int = 16,
                 shooter: NormalShooter | None = None, h: float = SHOOT_STEP) -> CutRecord:
    """Last time the normal geodesic from ``embed(u)`` maximizes separation.

    Scans ``t`` for the predicate "a competitor is longer than ``t + tol_cut``"
    and bisects the first bracket down to width ``bracket``.
    """
    u = np.asarray(u, dtype=float)
    d = hyp.normal_data(u[None])
    q, nvec = d.q[0], d.normal[0]
    steps = max(1, int(math.ceil(T_max / h)))
    res = flow(M, q[None], nvec[None], T_max, steps=steps)
    horizon = float(res.end_time[0])
    truncated = res.reason[0] != "reached T"
    if shooter is None:
        shooter = NormalShooter(hyp, max(T_max, 1e-3))
    t_nodes = res.t[:, 0]
    x_nodes = res.x[:, 0]
    alive = res.alive[:, 0]
    last = int(np.nonzero(alive)[0][-1])

    def point(t):
        k = min(int(t / (T_max / steps)), last - 1) if last > 0 else 0
        if t >= t_nodes[last]:
            return x_nodes[last]
        if last == 0:
            return x_nodes[0]
        # restart from the node below for an exact point
        r = flow(M, x_nodes[k][None], res.v[k, 0][None], t - t_nodes[k], h=h, record=False)
        return r.x_final[0]

    def longer(ts):
        pts = np.array([point(t) for t in ts])
        sep = shooter.separation(pts)
        return sep.tau > np.asarray(ts) + tol_cut, sep

    top = horizon if truncated else T_max
    scan = np.linspace(0.0, top, n_scan + 1)[1:]
    if truncated:
        scan = scan[:-1] if len(scan) > 1 else scan
    fired, sep = longer(scan)
    probes = list(zip(scan.tolist(), sep.tau.tolist()))
    if not np.any(fired):
        status = "truncated horizon" if truncated else "exceeds horizon"
        est = horizon if truncated else T_max
        return CutRecord(u, nvec, est, (est, est), status, None, probes)
    j = int(np.argmax(fired))
    a = 0.0 if j == 0 else float(scan[j - 1])
    b = float(scan[j])
    witness = np.concatenate([sep.foot[j], [sep.tau[j]]])
    while b - a > bracket:
        mid = 0.5 * (a + b)
        f, s = longer([mid])
        probes.append((mid, float(s.tau[0])))
        if f[0]:
            b = mid
            witness = np.concatenate([s.foot[0], [s.tau[0]]])
        else:
            a = mid
    return CutRecord(u, nvec, 0.5 * (a + b), (a, b), "cut found", witness, probes)


def ball_membership(M: MetricField, hyp: Hypersurface, t: float, p, *, tol: float = TOL_CUT,
                    shooter: NormalShooter | None = None, separation: SeparationResult | None = None):
    """Classify points as ``"interior"``, ``"sphere"`` or ``"outside"`` of the future ball of time ``t``.

    Returns ``(labels, provisional)``; ``provisional`` marks lower-bound-only
    separation estimates.
    """
    if separation is None:
        separation = time_separation(M, hyp, p, tau_max=t * 1.25 + tol, shooter=shooter)
    return classify(hyp, t, separation, tol)


def classify(hyp: Hypersurface, t: float, sep: SeparationResult, tol: float = TOL_CUT):
    """Membership labels from precomputed separations (see :func:`ball_membership`)."""
    in_a = np.zeros(len(sep.tau), dtype=bool)
    has = np.all(np.isfinite(sep.foot), axis=1)
    in_a[has] = hyp.in_box(sep.foot[has])
    labels = np.full(len(sep.tau), "outside", dtype=object)
    sphere = in_a & (np.abs(sep.tau - t) <= tol) & (sep.tau > 0)
    interior = in_a & (sep.tau > 0) & (sep.tau < t) & ~sphere
    labels[sphere] = "sphere"
    labels[interior] = "interior"
    return labels, sep.lower_bound_only.copy()
