"""Two-point shooting by batched Gauss-Newton on Jacobi-field Jacobians.

A *shooting map* sends parameters ``z`` to the endpoint of a geodesic.  Seeds
come from a cloud of precomputed endpoints indexed by a KD-tree; every seed
is then refined by Newton steps whose Jacobian is assembled from Jacobi
fields integrated alongside the geodesic.  Distinct converged preimages are
reported so callers can take the extremum over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geodesics import DEFAULT_STEP, flow
from .metric import MetricField, _orthonormal_frame, _sphere_points

__all__ = ["Preimages", "RiemannianShooter", "batched_exp", "solve_preimages"]


@dataclass
class Preimages:
    """Converged preimages for a batch of target points.

    ``z[i]`` is a ``(k_i, d)`` array of distinct solutions for target ``i``;
    ``outside[i]`` is true when a solution converged outside the search box.
    """

    z: list
    outside: np.ndarray
    residual: list = field(default_factory=list)


def _newton(evaluate, z0, targets, lo, hi, tol, max_iter=25, max_step=None, project=None,
            loose_tol=None):
    """Batched chord/Gauss-Newton for ``Phi(z) = target``.

    ``evaluate(z, jacobian=..., index=...) -> (phi, jac, ok)`` where ``index``
    holds the member numbers of the sub-batch ``z``.  The Jacobian is computed
    on the first pass and refreshed only for members whose residual did not
    drop by a factor 10, so most iterations integrate bare geodesics.
    Iterates are kept inside ``[lo, hi]`` widened by half its size and then
    passed through ``project(z, index)`` when given.

    Near conjugate points the integrator cannot focus geodesics exactly, so
    the residual stalls above ``tol``.  A member whose residual is below
    ``loose_tol`` (default ``1000 tol``) and no longer halves under a fresh
    Jacobian is accepted, as is any member below ``loose_tol`` when the
    iteration budget runs out.
    """
    loose_tol = 1e3 * tol if loose_tol is None else loose_tol
    z = np.array(z0, dtype=float)
    B, d = z.shape
    width = hi - lo
    wlo, whi = lo - 0.5 * width, hi + 0.5 * width
    max_step = 0.25 * width if max_step is None else max_step
    converged = np.zeros(B, dtype=bool)
    failed = np.zeros(B, dtype=bool)
    resid = np.full(B, np.inf)
    J = np.full((B, d, d), np.nan)
    fresh = np.zeros(B, dtype=bool)
    need = np.ones(B, dtype=bool)
    for _ in range(max_iter):
        act = np.nonzero(~converged & ~failed)[0]
        if act.size == 0:
            break
        phi = np.full((act.size, targets.shape[1]), np.nan)
        ok = np.zeros(act.size, dtype=bool)
        want = need[act]
        for flag in (True, False):
            sel = np.nonzero(want == flag)[0]
            if sel.size:
                p_, j_, o_ = evaluate(z[act[sel]], jacobian=flag, index=act[sel])
                phi[sel], ok[sel] = p_, o_
                if flag:
                    J[act[sel]] = j_
        fresh[act] = want
        r = phi - targets[act]
        err = np.max(np.abs(r), axis=1)
        err = np.where(ok, err, np.inf)
        slow = err > 0.1 * resid[act]
        stalled = ok & fresh[act] & (err > 0.5 * resid[act]) & (err < loose_tol)
        resid[act] = err
        done = ok & ((err < tol) | stalled)
        converged[act[done]] = True
        # a stale Jacobian that stops helping is refreshed; a fresh one that fails is fatal
        stale_fail = ~ok & ~fresh[act]
        failed[act[~ok & fresh[act]]] = True
        need[act] = (slow & ~fresh[act]) | stale_fail
        go = ok & ~done
        if not go.any():
            continue
        idx = act[go]
        Jg, rr = J[idx], r[go]
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(Jg)
        # at conjugate points whole directions collapse; solve in the range only
        sing = ~(cond < 1e8)
        step = np.empty_like(rr)
        if np.any(~sing):
            step[~sing] = -np.linalg.solve(Jg[~sing], rr[~sing][..., None])[..., 0]
        if np.any(sing):
            Js = np.where(np.isfinite(Jg[sing]), Jg[sing], 0.0)
            step[sing] = -np.einsum("bij,bj->bi", np.linalg.pinv(Js, rcond=1e-8), rr[sing])
        bad = ~np.all(np.isfinite(step), axis=1)
        step[bad] = 0.0
        scale = np.max(np.abs(step) / max_step, axis=1)
        step /= np.maximum(scale, 1.0)[:, None]
        z[idx] = np.clip(z[idx] + step, wlo, whi)
        if project is not None:
            z[idx] = project(z[idx], idx)
        failed[idx[bad]] = True
    converged |= ~failed & (resid < loose_tol)
    return z, converged, resid


def _dedupe(zs: np.ndarray, scale: np.ndarray, rel: float = 1e-5) -> np.ndarray:
    out = []
    for z in zs:
        if not any(np.all(np.abs(z - o) <= rel * scale) for o in out):
            out.append(z)
    return np.array(out).reshape(len(out), zs.shape[1] if zs.ndim == 2 else 0)


def _distinct_seeds(cand_z: np.ndarray, spacing: np.ndarray) -> np.ndarray:
    """Drop seeds lying within ~1.5 cloud cells of an earlier (closer) seed."""
    keep = []
    for z in cand_z:
        if not any(np.all(np.abs(z - k) <= 1.5 * spacing) for k in keep):
            keep.append(z)
    return np.array(keep)


def solve_preimages(
    evaluate,
    cloud_x: np.ndarray,
    cloud_z: np.ndarray,
    spacing: np.ndarray,
    targets: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    *,
    k: int = 6,
    tol: float = 1e-9,
    tree: cKDTree | None = None,
    max_iter: int = 25,
) -> Preimages:
    """All distinct preimages of ``targets`` reachable from cloud seeds."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    tree = cKDTree(cloud_x) if tree is None else tree
    k = min(k, len(cloud_x))
    _, nn = tree.query(targets, k=k)
    nn = np.atleast_2d(nn).reshape(len(targets), k)
    seeds, owner = [], []
    for i in range(len(targets)):
        for z in _distinct_seeds(cloud_z[nn[i]], spacing):
            seeds.append(z)
            owner.append(i)
    seeds = np.array(seeds)
    owner = np.array(owner)
    z, conv, resid = _newton(evaluate, seeds, targets[owner], lo, hi, tol, max_iter=max_iter)
    inside = np.all((z >= lo - 1e-9 * (hi - lo)) & (z <= hi + 1e-9 * (hi - lo)), axis=1)
    scale = np.maximum(hi - lo, 1e-12)
    out_z, out_res = [], []
    outside = np.zeros(len(targets), dtype=bool)
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(len(targets) + 1))
    for i in range(len(targets)):
        sel = order[bounds[i]:bounds[i + 1]]
        good = sel[conv[sel] & inside[sel]]
        outside[i] = bool(np.any(conv[sel] & ~inside[sel]))
        out_z.append(_dedupe(z[good], scale))
        out_res.append(resid[good])
    return Preimages(out_z, outside, out_res)


class RiemannianShooter:
    """Distances from a fixed base point via ``exp_p(v) = q``.

    Parameters
    ----------
    M
        Riemannian metric.
    p
        Base point.
    r_max
        Largest initial speed (radius) explored.
    n_dirs, n_radii
        Resolution of the seeding cloud.
    """

    def __init__(self, M: MetricField, p, r_max: float, *, n_dirs: int | None = None,
                 n_radii: int = 24, h: float = DEFAULT_STEP, tol: float = 1e-9, k: int = 6):
        self.M = M
        self.p = np.asarray(p, dtype=float)
        self.n = M.n
        self.h = h
        self.tol = tol
        self.k = k
        self.r_max = float(r_max)
        frame, _ = _orthonormal_frame(M.g(self.p))
        self.frame = frame
        n_dirs = n_dirs or (64 if self.n == 2 else 400)
        dirs = _sphere_points(self.n, n_dirs) @ frame.T
        steps = max(1, int(math.ceil(self.r_max / h)))
        res = flow(M, np.repeat(self.p[None], len(dirs), 0), dirs, self.r_max, steps=steps)
        stride = max(1, steps // n_radii)
        xs, zs = [], []
        for kk in range(stride, steps + 1, stride):
            alive = res.alive[kk]
            xs.append(res.x[kk][alive])
            zs.append(dirs[alive] * res.t[kk][alive][:, None])
        self.cloud_x = np.concatenate(xs)
        self.cloud_z = np.concatenate(zs)
        self.tree = cKDTree(self.cloud_x)
        # cloud cell size in velocity space, expressed per coordinate
        self.spacing = np.full(self.n, self.r_max * max(2 * math.pi / n_dirs ** (1 / (self.n - 1)),
                                                          stride * h / self.r_max))
        reach = self.r_max * np.linalg.norm(frame, 2)
        self.lo = -np.full(self.n, reach)
        self.hi = np.full(self.n, reach)

    def _evaluate(self, V, jacobian: bool = True, index=None):
        X0 = np.repeat(self.p[None], len(V), 0)
        return batched_exp(self.M, X0, V, h=self.h, jacobian=jacobian)

    def preimages(self, Q) -> Preimages:
        return solve_preimages(self._evaluate, self.cloud_x, self.cloud_z, self.spacing,
                               Q, self.lo, self.hi, k=self.k, tol=self.tol, tree=self.tree)

    def distance(self, Q):
        """``(distance, velocity, found)`` per target; minimum over preimages."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        pre = self.preimages(Q)
        g0 = self.M.g(self.p)
        dist = np.full(len(Q), np.inf)
        vel = np.full((len(Q), self.n), np.nan)
        for i, zs in enumerate(pre.z):
            if len(zs):
                lens = np.sqrt(np.einsum("bi,ij,bj->b", zs, g0, zs))
                j = int(np.argmin(lens))
                dist[i], vel[i] = lens[j], zs[j]
        same = np.all(np.abs(Q - self.p) < 1e-14, axis=1)
        dist[same] = 0.0
        vel[same] = 0.0
        return dist, vel, np.isfinite(dist)



def batched_exp(M: MetricField, X0, V, *, h: float, jacobian: bool = True, bins: int | None = None):
    """``exp_{X0}(V)`` with the Jacobian ``d exp / dV``, batched by speed.

    Members are grouped into speed bins so slow geodesics are not integrated
    with the step count of the fastest one.  Returns ``(points, jac, ok)``.
    """
    X0 = np.atleast_2d(X0)
    V = np.atleast_2d(V)
    B, n = V.shape
    out = np.full((B, n), np.nan)
    jac = np.full((B, n, n), np.nan) if jacobian else None
    ok = np.zeros(B, dtype=bool)
    if B == 0:
        return out, jac, ok
    if bins is None:
        # per-step overhead dominates small batches
        bins = 1 if B < 4096 else 4
    speed = np.sqrt(np.abs(np.einsum("bi,bij,bj->b", V, M.g(X0), V)))
    steps_all = np.maximum(1, np.ceil(speed / h)).astype(int)
    edges = np.unique(np.quantile(steps_all, np.linspace(0, 1, bins + 1)[1:], method="higher"))
    lo = 0
    for e in edges:
        sel = np.nonzero((steps_all > lo) & (steps_all <= e))[0]
        lo = e
        if sel.size == 0:
            continue
        m = sel.size
        j0 = (np.zeros((m, n, n)), np.repeat(np.eye(n)[None], m, 0)) if jacobian else None
        res = flow(M, X0[sel], V[sel], 1.0, steps=int(e), jacobi0=j0, record=False)
        out[sel] = res.x_final
        ok[sel] = res.reason == "reached T"
        if jacobian:
            jac[sel] = res.final("jx")
    return out, jac, ok
