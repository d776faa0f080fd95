"""Ball volumes by normal-exponential quadrature and by Monte Carlo.

Lorentzian future balls of time ``t`` above a patch ``A`` are integrated as
``int_A int_0^{min(t, cut)} |J| dtau dmu``, where ``J`` is the Jacobian of the
normal exponential map carried by the geodesic integrator.  Riemannian balls
use polar coordinates at the center.  Both have a Monte Carlo counterpart
that samples a coordinate box and decides membership with a shooting oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .geodesics import flow
from .hypersurface import SHOOT_STEP, TOL_CUT, Hypersurface, NormalShooter, classify
from .metric import MetricField, _orthonormal_frame, _sphere_points
from .models import ComparisonModel, ball_volume_normalized, riemannian_model_volume
from .shooting import RiemannianShooter

__all__ = [
    "VolumeSeries",
    "RatioReport",
    "lorentzian_ball_volume",
    "riemannian_ball_volume",
    "ratio_series",
    "TOL_MONO",
    "MC_BUDGET",
]

TOL_MONO = 1e-3
MC_BUDGET = 200_000
VOLUME_STEP = 1e-2


@dataclass
class VolumeSeries:
    """Volumes on a parameter grid.

    ``error`` is the quadrature tolerance estimate or the Monte Carlo
    standard error, per node.
    """

    grid: np.ndarray
    values: np.ndarray
    method: str
    error: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)
    shell: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "method": self.method,
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "error": self.error.tolist(),
            "meta": self.meta,
        }
        if self.shell is not None:
            out["shell"] = self.shell.tolist()
        return out

    def csv_rows(self):
        header = ["grid", "value", "error"] + (["shell"] if self.shell is not None else [])
        rows = []
        for i in range(len(self.grid)):
            row = [float(self.grid[i]), float(self.values[i]), float(self.error[i])]
            if self.shell is not None:
                row.append(float(self.shell[i]))
            rows.append(row)
        return header, rows


# ----------------------------------------------------------------- Lorentzian


def _hermite_values(t_nodes, V, dV, grid):
    """Accumulated integral at ``grid`` from node values and derivatives."""
    spl = CubicHermiteSpline(t_nodes, V, dV, axis=0, extrapolate=False)
    return spl(grid)


def _ray_cut_times(M, hyp, shooter, X, t_nodes, alive, tol_cut, bracket, probes):
    """First node time per ray where a strictly longer competitor appears.

    Rays are probed at ``probes`` equally spaced node indices; a ray whose
    predicate fires is refined by bisection over its recorded nodes.
    """
    K, B = alive.shape
    cut = np.full(B, np.inf)
    picks = np.unique(np.linspace(1, K - 1, probes).round().astype(int))
    last_alive = np.array([np.nonzero(alive[:, b])[0][-1] for b in range(B)])
    pts, owner, kidx = [], [], []
    for k in picks:
        sel = np.nonzero(alive[k])[0]
        pts.append(X[k, sel])
        owner.append(sel)
        kidx.append(np.full(sel.size, k))
    pts = np.concatenate(pts)
    owner = np.concatenate(owner)
    kidx = np.concatenate(kidx)
    sep = shooter.separation(pts)
    fired = sep.tau > t_nodes[kidx, owner] + tol_cut
    first = {}
    for j in np.nonzero(fired)[0]:
        b = owner[j]
        first[b] = min(first.get(b, K), kidx[j])
    for b, kf in first.items():
        prev = picks[picks < kf]
        lo = int(prev[-1]) if prev.size else 0
        hi = int(kf)
        while hi - lo > 1 and t_nodes[hi, b] - t_nodes[lo, b] > bracket:
            mid = (lo + hi) // 2
            s = shooter.separation(X[mid, b][None])
            if s.tau[0] > t_nodes[mid, b] + tol_cut:
                hi = mid
            else:
                lo = mid
        cut[b] = 0.5 * (t_nodes[lo, b] + t_nodes[hi, b])
    return cut, last_alive


def _lorentz_quadrature(M, hyp, grid, per_axis, h, cut, shooter, tol_cut, bracket, probes):
    U, W = hyp.param_grid(per_axis, nodes="gauss")
    d = hyp.normal_data(U)
    T = float(np.max(grid))
    steps = max(1, int(math.ceil(T / h)))
    scale = 1.0 / (np.sqrt(np.abs(np.linalg.det(M.g(d.q))))
                   * np.linalg.det(np.concatenate([d.normal[:, :, None], d.tangents], axis=2)))
    res = flow(M, d.q, d.normal, T, steps=steps, jacobi0=(d.tangents, d.dnormal), volume_scale=scale)
    t_nodes = res.t
    J = np.abs(res.jdet(M))
    Vacc = res.volume
    if cut == "search":
        cut_t, last = _ray_cut_times(M, hyp, shooter, res.x, t_nodes, res.alive, tol_cut, bracket, probes)
    else:
        cut_t = np.full(len(U), np.inf)
        last = np.array([np.nonzero(res.alive[:, b])[0][-1] for b in range(len(U))])
        if cut == "first_conjugate":
            sgn = np.sign(res.jdet(M))
            for b in range(len(U)):
                flips = np.nonzero(sgn[1:, b] != sgn[:-1, b])[0]
                if flips.size:
                    cut_t[b] = t_nodes[flips[0] + 1, b]
    exits = res.end_time
    short = exits < T - 1e-12
    # per-ray integral up to min(t, cut, exit)
    per_ray = np.empty((len(U), len(grid)))
    shell = np.empty((len(U), len(grid)))
    for b in range(len(U)):
        K = last[b] + 1
        tb = t_nodes[:K, b]
        clip = np.minimum(grid, min(cut_t[b], tb[-1]))
        if K >= 2:
            per_ray[b] = _hermite_values(tb, Vacc[:K, b], J[:K, b], clip)
            live = (grid < cut_t[b]) & (grid <= tb[-1])
            shell[b] = np.where(live, np.interp(grid, tb, J[:K, b]), 0.0)
        else:
            per_ray[b] = 0.0
            shell[b] = 0.0
    w = W * d.area_weight
    vol = w @ per_ray
    sh = w @ shell
    info = {
        "rays": int(len(U)),
        "rays_cut": int(np.sum(np.isfinite(cut_t))),
        "rays_exited": int(np.sum(short)),
        "cut_mode": cut,
        "area": float(np.sum(w)),
    }
    if np.any(short & (exits < np.max(grid) - 1e-9)):
        bad = int(np.argmin(exits))
        info["existence_failure"] = {"foot": U[bad].tolist(), "exit_time": float(exits[bad])}
    return vol, sh, info


def lorentzian_ball_volume(
    M: MetricField,
    hyp: Hypersurface,
    grid,
    *,
    method: str = "quadrature",
    per_axis: int = 16,
    h: float = VOLUME_STEP,
    cut: str = "search",
    tol_cut: float = TOL_CUT,
    bracket: float = 1e-2,
    probes: int = 8,
    n_samples: int = MC_BUDGET,
    seed: int = 0,
    shooter: NormalShooter | None = None,
    chunk: int = 20_000,
) -> VolumeSeries:
    """Volumes of the future balls of times ``grid`` above the patch.

    Parameters
    ----------
    method
        ``"quadrature"`` (normal-exponential Jacobian over a Gauss-Legendre
        patch grid) or ``"monte-carlo"`` (box sampling with membership).
    cut
        ``"search"`` clips rays at the located cut time, ``"first_conjugate"``
        at the first zero of ``J``, ``"none"`` never clips.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("times must be nonnegative")
    T = float(np.max(grid))
    if shooter is None and (method != "quadrature" or cut == "search"):
        shooter = NormalShooter(hyp, 1.25 * T + 0.05)
    if method == "quadrature":
        vol, shell, info = _lorentz_quadrature(M, hyp, grid, per_axis, h, cut, shooter,
                                               tol_cut, bracket, probes)
        coarse, _, _ = _lorentz_quadrature(M, hyp, grid, max(2, per_axis // 2), h,
                                           "none" if cut == "search" else cut, shooter,
                                           tol_cut, bracket, probes)
        if cut == "search" and info["rays_cut"]:
            err = np.full(len(grid), np.nan)
        else:
            err = np.abs(vol - coarse)
        info["per_axis"] = per_axis
        return VolumeSeries(grid, vol, "quadrature", err, "lorentzian ball volume", info, shell)
    if method != "monte-carlo":
        raise ValueError(f"unknown method {method!r}")
    lo, hi = _lorentz_bounding_box(M, hyp, T, h)
    rng = np.random.default_rng(seed)
    box_vol = float(np.prod(hi - lo))
    sums = np.zeros(len(grid))
    sq = np.zeros(len(grid))
    provisional = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        X = lo + (hi - lo) * rng.random((m, M.n))
        dens = np.sqrt(np.abs(np.linalg.det(M.g(X))))
        sep = shooter.separation(X)
        for i, t in enumerate(grid):
            labels, prov = classify(hyp, t, sep, tol=0.0)
            inside = (labels != "outside") & (sep.tau <= t)
            val = np.where(inside, dens, 0.0)
            sums[i] += val.sum()
            sq[i] += (val * val).sum()
        provisional += int(np.sum(sep.lower_bound_only & sep.future_side))
        done += m
    mean = sums / n_samples
    var = np.maximum(sq / n_samples - mean * mean, 0.0)
    vol = box_vol * mean
    err = box_vol * np.sqrt(var / n_samples)
    info = {"samples": int(n_samples), "seed": int(seed), "box": [lo.tolist(), hi.tolist()],
            "provisional": provisional}
    return VolumeSeries(grid, vol, "monte-carlo", err, "lorentzian ball volume", info)


def _lorentz_bounding_box(M, hyp, T, h, per_axis=9, pad=0.02):
    """Coordinate box containing the normal geodesics from the patch up to ``T``."""
    U, _ = hyp.param_grid(per_axis)
    d = hyp.normal_data(U)
    res = flow(M, d.q, d.normal, T, h=max(h, T / 200))
    X = res.x[res.alive]
    lo, hi = X.min(axis=0), X.max(axis=0)
    w = np.maximum(hi - lo, 1e-9)
    lo = np.maximum(lo - pad * w, M.chart.box[:, 0])
    hi = np.minimum(hi + pad * w, M.chart.box[:, 1])
    return lo, hi


# ----------------------------------------------------------------- Riemannian


def _polar_directions(n: int, count: int):
    """Unit directions with equal-area quadrature weights summing to the sphere area."""
    if n == 2:
        ang = 2 * math.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(count, 2 * math.pi / count)
    if n == 3:
        n_th = max(2, int(round(math.sqrt(count / 2))))
        n_ph = 2 * n_th
        x, w = np.polynomial.legendre.leggauss(n_th)
        ph = 2 * math.pi * (np.arange(n_ph) + 0.5) / n_ph
        C, P = np.meshgrid(x, ph, indexing="ij")
        S = np.sqrt(1 - C * C)
        dirs = np.stack([S * np.cos(P), S * np.sin(P), C], -1).reshape(-1, 3)
        wts = (w[:, None] * np.full(n_ph, 2 * math.pi / n_ph)[None]).ravel()
        return dirs, wts
    dirs = _sphere_points(n, count)
    from .models import sphere_area

    return dirs, np.full(count, sphere_area(n) / count)


def _complement(g, u):
    """``g``-orthonormal basis of the complement of unit vector ``u`` (columns)."""
    n = len(u)
    basis = [u]
    for e in np.eye(n):
        w = e.copy()
        for b in basis:
            w -= (b @ g @ w) * b
        nw = math.sqrt(max(w @ g @ w, 0.0))
        if nw > 1e-8:
            basis.append(w / nw)
        if len(basis) == n:
            break
    return np.array(basis[1:]).T


def riemannian_ball_volume(
    M: MetricField,
    p,
    grid,
    *,
    method: str = "quadrature",
    n_dirs: int | None = None,
    h: float = VOLUME_STEP,
    cut: str = "first_conjugate",
    n_samples: int = MC_BUDGET,
    seed: int = 0,
    shooter: RiemannianShooter | None = None,
    box=None,
    chunk: int = 20_000,
) -> VolumeSeries:
    """Volumes of geodesic balls ``B_p(r)`` for ``r`` in ``grid``.

    ``cut`` is ``"first_conjugate"`` (rays stop at the first zero of the
    polar Jacobian), ``"search"`` (rays stop once a shorter geodesic reaches
    their point) or ``"none"``.  Rays leaving the chart set the
    ``chart_clipped`` flag and contribute only their in-chart part.
    """
    p = np.asarray(p, dtype=float)
    grid = np.asarray(grid, dtype=float)
    R = float(np.max(grid))
    n = M.n
    g0 = M.g(p)
    frame, _ = _orthonormal_frame(g0)
    if method == "quadrature":
        count = n_dirs or (256 if n == 2 else 800)
        dirs, wts = _polar_directions(n, count)
        U = dirs @ frame.T
        B = len(U)
        comp = np.stack([_complement(g0, u) for u in U])
        scale = 1.0 / (math.sqrt(abs(np.linalg.det(g0)))
                       * np.linalg.det(np.concatenate([U[:, :, None], comp], axis=2)))
        steps = max(1, int(math.ceil(R / h)))
        res = flow(M, np.repeat(p[None], B, 0), U, R, steps=steps,
                   jacobi0=(np.zeros((B, n, n - 1)), comp), volume_scale=scale)
        t_nodes = res.t
        Jsig = res.jdet(M)
        J = np.abs(Jsig)
        last = np.array([np.nonzero(res.alive[:, b])[0][-1] for b in range(B)])
        cut_t = np.full(B, np.inf)
        if cut == "first_conjugate":
            for b in range(B):
                K = last[b] + 1
                s = np.sign(Jsig[1:K, b])
                flips = np.nonzero(s[1:] != s[:-1])[0]
                if flips.size:
                    k0 = flips[0] + 1
                    ta, tb = t_nodes[k0, b], t_nodes[k0 + 1, b]
                    ja, jb = Jsig[k0, b], Jsig[k0 + 1, b]
                    cut_t[b] = ta + (tb - ta) * ja / (ja - jb)
        elif cut == "search":
            shooter = shooter or RiemannianShooter(M, p, 1.1 * R, h=SHOOT_STEP)
            for k in np.unique(np.linspace(1, steps, 12).round().astype(int)):
                sel = np.nonzero(res.alive[k] & ~np.isfinite(cut_t))[0]
                if sel.size == 0:
                    continue
                dist, _, found = shooter.distance(res.x[k, sel])
                shorter = found & (dist < t_nodes[k, sel] - TOL_CUT)
                cut_t[sel[shorter]] = t_nodes[k, sel[shorter]]
        elif cut != "none":
            raise ValueError(f"unknown cut mode {cut!r}")
        per_ray = np.empty((B, len(grid)))
        shell = np.empty((B, len(grid)))
        for b in range(B):
            K = last[b] + 1
            tb = t_nodes[:K, b]
            stop = min(cut_t[b], tb[-1])
            clip = np.minimum(grid, stop)
            per_ray[b] = _hermite_values(tb, res.volume[:K, b], J[:K, b], clip) if K >= 2 else 0.0
            shell[b] = np.where((grid < cut_t[b]) & (grid <= tb[-1]), np.interp(grid, tb, J[:K, b]), 0.0)
        vol = wts @ per_ray
        clipped = bool(np.any(res.reason != "reached T"))
        info = {"directions": int(B), "cut_mode": cut, "chart_clipped": clipped,
                "rays_exited": int(np.sum(res.reason != "reached T")),
                "rays_cut": int(np.sum(np.isfinite(cut_t)))}
        # quadrature error proxy: halving the number of directions
        half = wts[::2] * (wts.sum() / wts[::2].sum()) if n == 2 else None
        err = np.abs(vol - half @ per_ray[::2]) if half is not None else np.full(len(grid), np.nan)
        return VolumeSeries(grid, vol, "quadrature", err, "riemannian ball volume", info, wts @ shell)
    if method != "monte-carlo":
        raise ValueError(f"unknown method {method!r}")
    shooter = shooter or RiemannianShooter(M, p, 1.1 * R, h=SHOOT_STEP)
    if box is None:
        X = shooter.cloud_x
        lo = np.maximum(X.min(axis=0), M.chart.box[:, 0])
        hi = np.minimum(X.max(axis=0), M.chart.box[:, 1])
        lo = np.minimum(lo, p)
        hi = np.maximum(hi, p)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in np.asarray(box, dtype=float).T)
    rng = np.random.default_rng(seed)
    box_vol = float(np.prod(hi - lo))
    sums = np.zeros(len(grid))
    sq = np.zeros(len(grid))
    missing = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        X = lo + (hi - lo) * rng.random((m, n))
        dens = np.sqrt(np.abs(np.linalg.det(M.g(X))))
        dist, _, found = shooter.distance(X)
        missing += int(np.sum(~found))
        for i, r in enumerate(grid):
            val = np.where(found & (dist <= r), dens, 0.0)
            sums[i] += val.sum()
            sq[i] += (val * val).sum()
        done += m
    mean = sums / n_samples
    var = np.maximum(sq / n_samples - mean * mean, 0.0)
    info = {"samples": int(n_samples), "seed": int(seed), "box": [lo.tolist(), hi.tolist()],
            "unreached": missing}
    return VolumeSeries(grid, box_vol * mean, "monte-carlo", box_vol * np.sqrt(var / n_samples),
                        "riemannian ball volume", info)


# ---------------------------------------------------------------------- ratios


@dataclass
class RatioReport:
    """Ratio of a volume series to a comparison series with a monotonicity verdict."""

    numerator: VolumeSeries
    denominator: VolumeSeries
    grid: np.ndarray
    ratios: np.ndarray
    nonincreasing: bool
    worst_violation: float
    worst_at: float | None
    tol_mono: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "ratios": self.ratios.tolist(),
            "nonincreasing": self.nonincreasing,
            "worst_violation": self.worst_violation,
            "worst_at": self.worst_at,
            "tol_mono": self.tol_mono,
            "notes": list(self.notes),
            "numerator": self.numerator.to_dict(),
            "denominator": self.denominator.to_dict(),
        }


def monotonicity(ratios, tol_mono: float = TOL_MONO):
    """``(verdict, worst relative increase, index of its right endpoint)``."""
    r = np.asarray(ratios, dtype=float)
    if len(r) < 2:
        return True, 0.0, None
    rel = (r[1:] - r[:-1]) / np.abs(r[:-1])
    k = int(np.argmax(rel))
    worst = float(rel[k])
    return bool(worst <= tol_mono), worst, k + 1


def model_series(model, grid, *, area: float = 1.0, n: int | None = None) -> VolumeSeries:
    """Comparison volumes: a :class:`ComparisonModel` (times ``area``) or a Riemannian ``(kappa, n)``."""
    grid = np.asarray(grid, dtype=float)
    if isinstance(model, ComparisonModel):
        vals = area * np.asarray(ball_volume_normalized(model, grid))
        label = f"comparison model kappa={model.kappa:g} beta={model.beta:g}"
    else:
        kappa, dim = model
        vals = np.asarray(riemannian_model_volume(kappa, dim, grid))
        label = f"space form kappa={kappa:g} n={dim}"
    return VolumeSeries(grid, vals, "closed-form", np.zeros(len(grid)), label)


def ratio_series(num: VolumeSeries, model, *, tol_mono: float = TOL_MONO, area: float = 1.0) -> RatioReport:
    """Ratio of ``num`` to a model series and its monotonicity verdict.

    ``model`` is a :class:`VolumeSeries` on the same grid, a
    :class:`ComparisonModel` (scaled by ``area``) or a Riemannian ``(kappa, n)``.
    Grid points with a vanishing denominator are dropped with a note.
    """
    den = model if isinstance(model, VolumeSeries) else model_series(model, num.grid, area=area)
    if len(den.grid) != len(num.grid) or not np.allclose(den.grid, num.grid):
        raise ValueError("numerator and denominator grids differ")
    keep = den.values > 0
    notes = []
    if not np.all(keep):
        notes.append(f"dropped {int(np.sum(~keep))} grid points with zero denominator")
    ratios = num.values[keep] / den.values[keep]
    grid = num.grid[keep]
    ok, worst, k = monotonicity(ratios, tol_mono)
    return RatioReport(num, den, grid, ratios, ok, worst, None if k is None else float(grid[k]),
                       tol_mono, notes)
