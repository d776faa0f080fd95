"""Smooth approximations of low-regularity metrics and their quality checks.

Components are sampled on a grid, convolved with a scaled bump kernel and
blended back into the source outside a neighborhood of the verification
region by a smooth cutoff.  The result is interpolated by a quintic tensor
spline, so the smoothed metric has analytic first and second derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special
from scipy.interpolate import NdBSpline, make_interp_spline

from .geodesics import flow
from .hypersurface import Hypersurface
from .metric import ChartDomain, MetricField, _orthonormal_frame, _sphere_points, check_ricci_bound

__all__ = [
    "MollifierError",
    "MollifiedFamily",
    "ApproxCheckReport",
    "NestingReport",
    "bump_kernel",
    "mollify_metric",
    "mollified_family",
    "metric_distance_dh",
    "inner_approximation",
    "cone_nesting_check",
    "eps_family_checks",
    "geodesic_continuity",
    "tilted_unit_vectors",
]

SPLINE_DEGREE = 5
CELLS_PER_EPS = 8


class MollifierError(ValueError):
    """Raised when the smoothing cannot be carried out on the requested region."""


# ------------------------------------------------------------------- kernel


def _bump(r2):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - r2, 1e-300)), 0.0)


def _bump_mass(n: int) -> float:
    """Integral of the unnormalized radial bump over the unit ball of R^n."""
    area = 2 * math.pi ** (n / 2) / special.gamma(n / 2)
    val, _ = integrate.quad(lambda r: math.exp(-1.0 / (1.0 - r * r)) * r ** (n - 1), 0.0, 1.0,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return area * val


def bump_kernel(eps: float, spacing, n: int):
    """Discrete weights of the scaled bump ``rho_eps`` on a grid of given spacing.

    Returns ``(weights, mass)``: weights are normalized to sum to one, ``mass``
    is their sum before normalization (the trapezoid value of the continuous
    integral, which is 1 up to discretization error).
    """
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (n,))
    half = [int(math.floor(eps / s)) for s in spacing]
    axes = [np.arange(-k, k + 1) * s for k, s in zip(half, spacing)]
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum(m * m for m in mesh) / (eps * eps)
    dens = _bump(r2) / (_bump_mass(n) * eps**n)
    raw = dens * float(np.prod(spacing))
    mass = float(raw.sum())
    return raw / mass, mass


def _smoothstep(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    f0 = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    f1 = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return f0 / (f0 + f1)


def _cutoff(axes, inner, outer):
    """Product cutoff: 1 on the box ``inner``, 0 outside ``outer``."""
    zeta = 1.0
    for i, x in enumerate(axes):
        lo = _smoothstep((x - outer[i, 0]) / (inner[i, 0] - outer[i, 0]))
        hi = _smoothstep((outer[i, 1] - x) / (outer[i, 1] - inner[i, 1]))
        shape = [1] * len(axes)
        shape[i] = -1
        zeta = zeta * (lo * hi).reshape(shape)
    return zeta


# ------------------------------------------------------------------- splines


class _GridSpline:
    """Quintic tensor spline of symmetric matrix samples with derivatives."""

    def __init__(self, axes, values):
        self.n = len(axes)
        n = self.n
        iu = np.triu_indices(n)
        c = values[..., iu[0], iu[1]]
        ts = []
        for ax, x in enumerate(axes):
            spl = make_interp_spline(x, c, k=SPLINE_DEGREE, axis=ax)
            ts.append(spl.t)
            # coefficients come back with the interpolation axis first
            c = np.moveaxis(spl.c, 0, ax)
        self.iu = iu
        self.spline = NdBSpline(tuple(ts), c, SPLINE_DEGREE)

    def _sym(self, flat):
        n = self.n
        out = np.empty(flat.shape[:-1] + (n, n))
        out[..., self.iu[0], self.iu[1]] = flat
        out[..., self.iu[1], self.iu[0]] = flat
        return out

    def value(self, x, nu=None):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        flat = self.spline(x.reshape(-1, self.n), nu=nu)
        return self._sym(flat).reshape(shape + (self.n, self.n))

    def g(self, x):
        return self.value(x)

    def dg(self, x):
        return np.stack([self.value(x, nu=tuple(int(i == k) for i in range(self.n)))
                         for k in range(self.n)], -1)

    def d2g(self, x):
        n = self.n
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (n, n, n, n))
        for k in range(n):
            for m in range(k, n):
                nu = [0] * n
                nu[k] += 1
                nu[m] += 1
                val = self.value(x, nu=tuple(nu))
                out[..., k, m] = val
                out[..., m, k] = val
        return out


# ------------------------------------------------------------------ family


@dataclass
class MollifiedFamily:
    """Smoothed members of a source metric for a descending list of scales.

    ``region`` is the verification box ``K`` where the cutoff equals one;
    ``grid_box`` and ``spacing`` describe the sampling grid, which is also
    the chart of every member.
    """

    source: MetricField
    eps: list
    members: list
    region: np.ndarray
    grid_box: np.ndarray
    spacing: np.ndarray
    kernel_mass: list
    kernel_sum: list
    second_difference: list
    source_second_difference: float
    kernel: str = "radial bump exp(-1/(1-|x|^2)), support radius eps"
    meta: dict = field(default_factory=dict)

    @property
    def c2_bound(self) -> float:
        return float(max(self.second_difference))


def _grid_axes(box, spacing):
    return [np.linspace(a, b, int(round((b - a) / s)) + 1) for (a, b), s in zip(box, spacing)]


def _second_differences(G, axes, region):
    """Largest second difference quotient of the samples ``G`` over nodes in ``region``."""
    n = len(axes)
    sl = []
    for x, (a, b) in zip(axes, region):
        idx = np.nonzero((x >= a - 1e-12) & (x <= b + 1e-12))[0]
        sl.append(slice(max(idx[0] - 1, 0), min(idx[-1] + 2, len(x))))
    sub = G[tuple(sl)]
    h = [x[1] - x[0] for x in axes]
    best = 0.0
    for i in range(n):
        d2 = np.diff(sub, 2, axis=i) / h[i] ** 2
        best = max(best, float(np.max(np.abs(d2))))
        for j in range(i + 1, n):
            dm = np.diff(np.diff(sub, axis=i), axis=j) / (h[i] * h[j])
            best = max(best, float(np.max(np.abs(dm))))
    return best


def _sample_grid(M: MetricField, region, eps_max: float, spacing):
    region = np.asarray(region, dtype=float).reshape(M.n, 2)
    pad = 3.0 * eps_max + 2.0 * np.asarray(spacing)
    box = np.stack([region[:, 0] - pad, region[:, 1] + pad], axis=1)
    if np.any(box[:, 0] < M.chart.box[:, 0]) or np.any(box[:, 1] > M.chart.box[:, 1]):
        raise MollifierError(
            f"eps={eps_max:g} is too large for the margin between the region and the chart box")
    axes = _grid_axes(box, spacing)
    box = np.array([[x[0], x[-1]] for x in axes])
    X = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    G = M.g(X)
    return region, box, axes, G


def _convolve(G, weights):
    """Componentwise convolution with reflective padding at the grid edges."""
    pad = [(k // 2, k // 2) for k in weights.shape]
    out = np.empty_like(G)
    for i in range(G.shape[-2]):
        for j in range(i, G.shape[-1]):
            comp = np.pad(G[..., i, j], pad, mode="reflect")
            val = signal.fftconvolve(comp, weights, mode="valid")
            out[..., i, j] = val
            out[..., j, i] = val
    return out


def _member(M: MetricField, box, axes, G, eps, weights, region):
    conv = _convolve(G, weights)
    inner = np.stack([region[:, 0] - eps, region[:, 1] + eps], axis=1)
    outer = np.stack([region[:, 0] - 2 * eps, region[:, 1] + 2 * eps], axis=1)
    zeta = _cutoff(axes, inner, outer)[..., None, None]
    blended = zeta * conv + (1.0 - zeta) * G
    spl = _GridSpline(axes, blended)
    chart = ChartDomain.make(box.tolist(), M.chart.names)
    smooth = MetricField(chart, spl.g, signature=M.signature, time_orientation=M.time_orientation,
                         dg_func=spl.dg, d2g_func=spl.d2g, name=f"{M.name} smoothed eps={eps:g}",
                         smoothness="smooth", mode="spline")
    return smooth, blended


def mollify_metric(M: MetricField, eps: float, region, *, spacing=None, eps_max: float | None = None):
    """Smooth metric ``zeta (rho_eps * g) + (1 - zeta) g`` on a grid around ``region``.

    Parameters
    ----------
    region
        Verification box ``K`` (``(n, 2)``), where the cutoff is identically one.
    spacing
        Grid spacing per axis; defaults to ``eps / 8``.
    eps_max
        Scale used to size the grid margin (defaults to ``eps``).

    Raises
    ------
    MollifierError
        When the grid around ``region`` does not fit in the chart.
    """
    spacing = np.full(M.n, eps / CELLS_PER_EPS) if spacing is None else \
        np.broadcast_to(np.asarray(spacing, dtype=float), (M.n,))
    region, box, axes, G = _sample_grid(M, region, eps_max or eps, spacing)
    weights, _ = bump_kernel(eps, [x[1] - x[0] for x in axes], M.n)
    return _member(M, box, axes, G, eps, weights, region)[0]


def mollified_family(M: MetricField, eps_list, region, *, spacing=None) -> MollifiedFamily:
    """Members for every scale in ``eps_list`` on one shared grid."""
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if not eps_list or eps_list[-1] <= 0:
        raise MollifierError("scales must be positive")
    spacing = np.full(M.n, eps_list[-1] / CELLS_PER_EPS) if spacing is None else \
        np.broadcast_to(np.asarray(spacing, dtype=float), (M.n,))
    region, box, axes, G = _sample_grid(M, region, eps_list[0], spacing)
    h = [x[1] - x[0] for x in axes]
    members, masses, sums, c2 = [], [], [], []
    for eps in eps_list:
        weights, mass = bump_kernel(eps, h, M.n)
        if np.any(weights < 0):
            raise MollifierError("kernel weights must be nonnegative")
        smooth, blended = _member(M, box, axes, G, eps, weights, region)
        members.append(smooth)
        masses.append(mass)
        sums.append(float(weights.sum()))
        c2.append(_second_differences(blended, axes, region))
    return MollifiedFamily(M, eps_list, members, region, box, np.array(h), masses, sums, c2,
                           _second_differences(G, axes, region))


# ----------------------------------------------------------------- distance


def _background(h, x):
    if h is None:
        return np.broadcast_to(np.eye(x.shape[-1]), x.shape[:-1] + (x.shape[-1],) * 2)
    if isinstance(h, MetricField):
        return h.g(x)
    h = np.asarray(h, dtype=float)
    return np.broadcast_to(h, x.shape[:-1] + h.shape)


def metric_distance_dh(g1: MetricField, g2: MetricField, points, h=None, *, return_witness=False):
    """``sup |g1(X,Y) - g2(X,Y)| / (|X|_h |Y|_h)`` over ``points`` and all vector pairs.

    For each point the supremum over vector pairs is the spectral radius of
    the difference taken in an ``h``-orthonormal basis, so only the points
    are sampled.  ``h`` is a Riemannian :class:`MetricField`, a constant
    matrix, or ``None`` for the Euclidean metric of the chart.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample set")
    D = g1.g(x) - g2.g(x)
    L = np.linalg.cholesky(_background(h, x))
    Li = np.linalg.inv(L)
    S = Li @ D @ np.swapaxes(Li, -1, -2)
    rad = np.max(np.abs(np.linalg.eigvalsh(S)), axis=-1)
    k = int(np.argmax(rad))
    if return_witness:
        return float(rad[k]), x[k]
    return float(rad[k])


def inner_approximation(M_smooth: MetricField, lam: float, h=None) -> MetricField:
    """``g + lam h``: a metric whose causal cones sit inside those of ``g``."""
    if M_smooth.signature != "lorentzian":
        raise ValueError("inner approximations need a Lorentzian metric")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if isinstance(h, MetricField):
        g = lambda x: M_smooth.g(x) + lam * h.g(x)  # noqa: E731
        dg = lambda x: M_smooth.dg(x) + lam * h.dg(x)  # noqa: E731
        d2g = lambda x: M_smooth.d2g(x) + lam * h.d2g(x)  # noqa: E731
    else:
        def g(x):
            x = np.asarray(x, dtype=float)
            return M_smooth.g(x) + lam * _background(h, x)

        dg, d2g = M_smooth.dg, M_smooth.d2g
    return MetricField(M_smooth.chart, g, signature="lorentzian",
                       time_orientation=M_smooth.time_orientation, dg_func=dg, d2g_func=d2g,
                       name=f"{M_smooth.name} + {lam:g} h", smoothness=M_smooth.smoothness,
                       mode=M_smooth.mode)


@dataclass
class NestingReport:
    """Outcome of sampling the null cone of the narrower metric."""

    samples: int
    violations: int
    worst: float
    witness_point: np.ndarray | None
    witness_vector: np.ndarray | None

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "violations": self.violations,
            "worst": self.worst,
            "witness_point": None if self.witness_point is None else self.witness_point.tolist(),
            "witness_vector": None if self.witness_vector is None else self.witness_vector.tolist(),
        }


def cone_nesting_check(g: MetricField, g_inner: MetricField, points, n_samples: int = 100_000) -> NestingReport:
    """Check that null vectors of ``g_inner`` are ``g``-timelike.

    Null vectors ``e0 + u`` are built from a ``g_inner``-orthonormal frame
    with ``u`` running over a deterministic set of unit spatial directions;
    ``g(X, X) < 0`` must hold strictly.  ``worst`` is the largest value of
    ``g(X, X) / |X|^2`` seen.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = g.n
    per = max(1, int(math.ceil(n_samples / len(pts))))
    dirs = _sphere_points(n - 1, per) if n > 2 else np.array([[1.0], [-1.0]] * ((per + 1) // 2))[:per]
    gi = g_inner.g(pts)
    go = g.g(pts)
    total, bad, worst, wp, wv = 0, 0, -np.inf, None, None
    for p, a, b in zip(pts, gi, go):
        frame, _ = _orthonormal_frame(a)
        X = frame[:, 0][None, :] + dirs @ frame[:, 1:].T
        val = np.einsum("ki,ij,kj->k", X, b, X) / np.einsum("ki,ki->k", X, X)
        total += len(X)
        viol = val >= 0
        bad += int(np.sum(viol))
        j = int(np.argmax(val))
        if val[j] > worst:
            worst, wp, wv = float(val[j]), p.copy(), X[j].copy()
    return NestingReport(total, bad, worst, wp if bad else None, wv if bad else None)


# -------------------------------------------------------------------- checks


def tilted_unit_vectors(M: MetricField, point, normal, tangent, count: int = 10, rapidity: float = 1.0):
    """Unit timelike vectors ``cosh(a) n + sinh(a) e`` for ``a`` evenly spaced in ``[-rapidity, rapidity]``.

    ``e`` is ``tangent`` made orthogonal to ``normal`` and normalized, so the
    grid spans one timelike plane through ``normal``.
    """
    p = np.asarray(point, dtype=float)
    g = M.g(p)
    nvec = np.asarray(normal, dtype=float)
    e = np.asarray(tangent, dtype=float)
    e = e + (nvec @ g @ e) / (nvec @ g @ nvec) * -nvec
    e = e / math.sqrt(e @ g @ e)
    a = np.linspace(-rapidity, rapidity, count)
    return np.cosh(a)[:, None] * nvec + np.sinh(a)[:, None] * e


def geodesic_continuity(source: MetricField, members, points, vectors, T: float, *, h: float = 0.01):
    """Largest velocity deviation ``sup_t |dgamma_eps/dt - dgamma/dt|`` for each member.

    Geodesics of ``source`` and of each member start from the same
    ``(points, vectors)``; the supremum runs over the recorded times where
    both are alive.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    P = np.broadcast_to(P, V.shape).copy()
    steps = max(1, int(math.ceil(T / h)))
    ref = flow(source, P, V, T, steps=steps)
    out = []
    for Me in members:
        res = flow(Me, P, V, T, steps=steps)
        both = ref.alive & res.alive
        out.append(float(np.max(np.linalg.norm(res.v - ref.v, axis=-1)[both])))
    return out


@dataclass
class ApproxCheckReport:
    """Per-scale quality measures of a smoothed family.

    ``entries`` holds one dict per scale; ``eps0`` maps each check name to
    the largest listed scale below which (inclusive) the check passes at
    every listed scale, or ``None``.
    """

    eps: list
    entries: list
    eps0: dict
    verdicts: dict
    params: dict

    def to_dict(self) -> dict:
        return {"eps": list(self.eps), "entries": self.entries, "eps0": self.eps0,
                "verdicts": self.verdicts, "params": self.params}

    def csv_rows(self):
        keys = list(self.entries[0].keys()) if self.entries else []
        keys = [k for k in keys if not isinstance(self.entries[0][k], (dict, list))]
        return keys, [[e[k] for k in keys] for e in self.entries]


def _lattice(box, per_axis):
    axes = [np.linspace(a, b, per_axis) for a, b in box]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(box))


def _eps0(eps_desc, passes):
    """Largest scale from which every smaller listed scale passes."""
    best = None
    for e, ok in zip(reversed(eps_desc), reversed(passes)):
        if not ok:
            break
        best = e
    return best


def eps_family_checks(
    family: MollifiedFamily,
    hyp: Hypersurface,
    *,
    kappa: float,
    beta: float,
    C: float = 2.0,
    deltas=(0.1, 0.05),
    etas=(0.1, 0.05),
    T: float = 0.25,
    region=None,
    per_axis: int = 9,
    n_vectors: int = 512,
    nesting_samples: int = 100_000,
    feet: int = 9,
) -> ApproxCheckReport:
    """Quality of every member: distance, derivative convergence, curvature margins.

    Parameters
    ----------
    hyp
        Hypersurface of the source metric; its patch is the set ``A`` where
        the mean curvature of each member is measured.
    kappa, beta
        Bounds of the comparison condition satisfied by the source.
    C
        Euclidean bound on the unit timelike vectors in the Ricci check.
    T
        Normal geodesics from ``A`` are followed up to this time in the
        source and in each member; their largest coordinate deviation is
        reported.
    """
    M = family.source
    n = M.n
    K = family.region if region is None else np.asarray(region, dtype=float)
    pts = _lattice(K, per_axis)
    U, _ = hyp.param_grid(feet)
    d_src = hyp.normal_data(U)
    steps = max(1, int(math.ceil(T / 0.01)))
    ref = flow(M, d_src.q, d_src.normal, T, steps=steps)
    mid = len(U) // 2
    tilt = tilted_unit_vectors(M, d_src.q[mid], d_src.normal[mid], d_src.tangents[mid][:, 0])
    vel_dev = geodesic_continuity(M, family.members, d_src.q[mid], tilt, T)
    entries = []
    for eps, Me, c2 in zip(family.eps, family.members, family.second_difference):
        dh = metric_distance_dh(M, Me, pts)
        c1 = float(np.max(np.abs(Me.dg(pts) - M.dg(pts))))
        ric = check_ricci_bound(Me, kappa, pts, mode="timelike", C=C, n_vectors=n_vectors)
        hyp_e = hyp.with_metric(Me)
        H = hyp_e.mean_curvature(U)
        inner = inner_approximation(Me, 2.0 * dh)
        nest = cone_nesting_check(M, inner, pts, nesting_samples)
        d_e = hyp_e.normal_data(U)
        res = flow(Me, d_e.q, d_e.normal, T, steps=steps)
        both = ref.alive & res.alive
        dev = float(np.max(np.linalg.norm(res.x - ref.x, axis=-1)[both]))
        entry = {
            "eps": eps,
            "d_h": dh,
            "c1_deviation": c1,
            "second_difference": c2,
            "ricci_min": ric.min_margin,
            "ricci_witness": None if ric.witness_point is None else ric.witness_point.tolist(),
            "mean_curvature_sup": float(np.max(H)),
            "mean_curvature_excess": float(np.max(H) - beta),
            "nesting_lambda": 2.0 * dh,
            "nesting_violations": nest.violations,
            "nesting_samples": nest.samples,
            "geodesic_deviation": dev,
            "geodesics_complete": bool(np.all(res.reason == "reached T")),
            "velocity_deviation": vel_dev[family.eps.index(eps)],
            "kernel_mass": family.kernel_mass[family.eps.index(eps)],
        }
        for dl in deltas:
            entry[f"ricci_margin_delta_{dl:g}"] = ric.min_margin + (n - 1) * dl
        for et in etas:
            entry[f"mean_curvature_margin_eta_{et:g}"] = float(beta + et - np.max(H))
        entries.append(entry)
    eps = family.eps
    eps0 = {}
    for dl in deltas:
        eps0[f"ricci_delta_{dl:g}"] = _eps0(eps, [e[f"ricci_margin_delta_{dl:g}"] >= 0 for e in entries])
    for et in etas:
        eps0[f"mean_curvature_eta_{et:g}"] = _eps0(
            eps, [e[f"mean_curvature_margin_eta_{et:g}"] >= 0 for e in entries])
    c1 = [e["c1_deviation"] for e in entries]
    verdicts = {
        "d_h_below_eps": all(e["d_h"] < e["eps"] for e in entries),
        "c1_strictly_decreasing": all(b < a for a, b in zip(c1, c1[1:])),
        "uniform_c2_bound": family.c2_bound <= 1.05 * family.source_second_difference + 1e-9,
        "nesting_zero_violations": all(e["nesting_violations"] == 0 for e in entries),
        "geodesics_complete": all(e["geodesics_complete"] for e in entries),
        "kernel_normalized": all(abs(w - 1.0) <= 1e-10 for w in family.kernel_sum),
    }
    for key, val in eps0.items():
        verdicts[key] = val is not None
    params = {"kappa": kappa, "beta": beta, "C": C, "deltas": list(deltas), "etas": list(etas),
              "T": T, "region": np.asarray(K).tolist(), "points": int(len(pts)),
              "c2_bound": family.c2_bound, "source_second_difference": family.source_second_difference,
              "spacing": family.spacing.tolist()}
    return ApproxCheckReport(list(eps), entries, eps0, verdicts, params)
