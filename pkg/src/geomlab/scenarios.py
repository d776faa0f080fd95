"""End-to-end verification scenarios and their reports.

Each scenario loads a metric document, runs the engines with the
parameters of its configuration and records checks.  A check stores the
measured value, the comparison operator and the threshold, so its verdict
can be recomputed from the emitted payload alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import MetricDocument, parse_document
from .fixtures import builtin_document
from .hypersurface import TOL_CUT, Hypersurface, NormalShooter, cut_function
from .metric import check_ricci_bound, ricci_tensor
from .models import LIMIT_CASES, catalog, limit_family_check, make_model
from .mollifier import eps_family_checks, mollified_family
from .shooting import RiemannianShooter
from .volume import (
    TOL_MONO,
    VolumeSeries,
    lorentzian_ball_volume,
    model_series,
    ratio_series,
    riemannian_ball_volume,
)

__all__ = [
    "SCHEMA_VERSION",
    "SCENARIOS",
    "ScenarioError",
    "Check",
    "RunReport",
    "load_config",
    "run_scenario",
    "emit_report",
    "recompute_verdict",
]

SCHEMA_VERSION = "geomlab-report/1"
SCENARIOS = (
    "bishop-gromov",
    "lorentz-volume",
    "myers",
    "singularity-bound",
    "mollify-check",
    "cut-locus",
    "table1-audit",
)
FORMATS = ("json", "csv", "svg")


class ScenarioError(ValueError):
    """Invalid configuration, fixture failure or violated precondition."""


_OPS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "==": lambda a, b: a == b,
}


@dataclass
class Check:
    """``value op threshold`` with its verdict and free-form context."""

    name: str
    value: object
    op: str
    threshold: object
    passed: bool = field(init=False)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(_OPS[self.op](self.value, self.threshold))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op,
                "threshold": self.threshold, "passed": self.passed, "detail": self.detail}


def recompute_verdict(check: dict) -> bool:
    """Verdict of an emitted check entry from its stored value and threshold."""
    return bool(_OPS[check["op"]](check["value"], check["threshold"]))


@dataclass
class RunReport:
    scenario: str
    config: dict
    seed: int
    checks: list
    series: dict
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        # wall time is kept out so identical runs give identical bytes
        return {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "config": self.config,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "series": self.series,
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _series(kind: str, grid, values, **extra) -> dict:
    out = {"kind": kind, "grid": np.asarray(grid, dtype=float).tolist(),
           "values": np.asarray(values, dtype=float).tolist()}
    out.update(extra)
    return out


def _volume_payload(vs: VolumeSeries) -> dict:
    extra = {"error": vs.error.tolist(), "method": vs.method, "meta": vs.meta}
    if vs.shell is not None:
        extra["shell"] = vs.shell.tolist()
    return _series("volume", vs.grid, vs.values, **extra)


# ---------------------------------------------------------------- loading


def _document(spec, base: Path | None) -> MetricDocument:
    if spec is None:
        raise ScenarioError("configuration needs a 'document'")
    if isinstance(spec, str):
        path = Path(spec)
        if not path.is_absolute() and base is not None:
            path = base / path
        if not path.exists():
            raise ScenarioError(f"document file not found: {path}")
        text = path.read_text(encoding="utf-8")
    else:
        text = json.dumps(spec)
    try:
        return parse_document(text)
    except Exception as err:  # any parse failure is a fixture load failure
        raise ScenarioError(f"could not load document: {err}") from err


def load_config(path) -> dict:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise ScenarioError(f"could not read configuration {path}: {err}") from err
    if not isinstance(cfg, dict):
        raise ScenarioError("configuration must be a JSON object")
    cfg.setdefault("_base", str(path.parent.resolve()))
    return cfg


def _params(cfg: dict) -> dict:
    p = cfg.get("params", {})
    if not isinstance(p, dict):
        raise ScenarioError("'params' must be an object")
    return p


def _ccc(doc: MetricDocument, p: dict):
    kappa = p.get("kappa", doc.spec.get("ccc", [None, None])[0])
    beta = p.get("beta", doc.spec.get("ccc", [None, None])[1])
    if kappa is None or beta is None:
        raise ScenarioError("kappa and beta are needed (params or the document's 'ccc')")
    return float(kappa), float(beta)


def _need_hypersurface(doc: MetricDocument) -> Hypersurface:
    if doc.hypersurface is None:
        raise ScenarioError("document has no hypersurface ('sigma')")
    return doc.hypersurface


# -------------------------------------------------------------- scenarios


def _table1_audit(cfg, p, rng):
    checks, series = [], {}
    tol = float(p.get("tol", 1e-6))
    dims = p.get("dims", [3])
    for n in dims:
        rows = catalog(int(n))
        ric_err, h_err = [], []
        for row in rows:
            doc = parse_document(json.dumps(builtin_document(
                "model", kappa=row["kappa"], beta=row["beta"], n=int(n))))
            M, hyp = doc.metric, doc.hypersurface
            t_lo, t_hi = M.chart.box[0]
            ts = np.linspace(t_lo + 0.1 * (t_hi - t_lo), t_hi - 0.1 * (t_hi - t_lo), 5)
            X = np.zeros((len(ts), M.n))
            X[:, 0] = ts
            ric = ricci_tensor(M, X)[:, 0, 0]
            e_r = float(np.max(np.abs(ric - (M.n - 1) * row["kappa"])))
            U, _ = hyp.param_grid(3)
            H = hyp.mean_curvature(U)
            e_h = float(np.max(np.abs(H - row["beta"])))
            ric_err.append(e_r)
            h_err.append(e_h)
            label = f"n={n} {row['row']} (kappa={row['kappa']:g}, beta={row['beta']:g})"
            checks.append(Check(f"ricci_tt {label}", e_r, "<=", tol))
            checks.append(Check(f"mean_curvature {label}", e_h, "<=", tol))
        series[f"model_row_ricci_error_n{n}"] = _series("error", np.arange(len(rows)), ric_err,
                                                     rows=[r["row"] for r in rows])
        series[f"model_row_mean_curvature_error_n{n}"] = _series("error", np.arange(len(rows)), h_err,
                                                              rows=[r["row"] for r in rows])
    if p.get("limits", True):
        ks = tuple(p.get("ks", (4, 8, 16)))
        for case in LIMIT_CASES:
            if case == "constant":
                continue
            rep = limit_family_check(case, ks=ks, n=int(p.get("limit_n", 3)))
            checks.append(Check(f"f_tilde limit {case}", rep.verdict, "==", True,
                                {"raw": rep.raw, "normalized": rep.normalized}))
            series[f"limit_raw {case}"] = _series("discrepancy", ks, rep.raw)
            series[f"limit_normalized {case}"] = _series("discrepancy", ks, rep.normalized)
    return checks, series


def _disk_points(rng, count, center, radius):
    n = len(center)
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return center + r[:, None] * d


def _myers(cfg, p, rng, doc):
    M = doc.metric
    kappa = float(p.get("kappa", 1.0))
    tol = float(p.get("tol", 1e-3))
    bound = math.pi / math.sqrt(kappa)
    center = np.asarray(p.get("sample_center", M.chart.box.mean(axis=1)), dtype=float)
    radius = float(p.get("sample_radius", 2.0))
    n_bases = int(p.get("n_bases", 10))
    n_targets = int(p.get("n_targets", 100))
    h = float(p.get("h", 0.05))
    r_max = float(p.get("r_max_factor", 1.05)) * bound
    pts = _disk_points(rng, n_bases * (n_targets + 1), center, radius)
    ric = check_ricci_bound(M, kappa, pts[:: max(1, len(pts) // 50)], mode="riemannian")
    checks = [Check("ricci lower bound (precondition)", ric.min_margin, ">=", -1e-6)]
    dists, missing = [], 0
    for b in range(n_bases):
        base = pts[b * (n_targets + 1)]
        targets = pts[b * (n_targets + 1) + 1:(b + 1) * (n_targets + 1)]
        sh = RiemannianShooter(M, base, r_max, h=h)
        d, _, found = sh.distance(targets)
        missing += int(np.sum(~found))
        dists.append(d[found])
    dists = np.concatenate(dists)
    checks.append(Check("max sampled distance <= pi/sqrt(kappa) + tol", float(np.max(dists)), "<=",
                        bound + tol, {"pairs": int(len(dists))}))
    checks.append(Check("unresolved pairs", missing, "==", 0))
    attain = []
    for pair in p.get("antipodal_pairs", [[[2.0, 0.0], [-2.0, 0.0]]]):
        a, q = (np.asarray(v, dtype=float) for v in pair)
        sh = RiemannianShooter(M, a, r_max, h=h)
        d, _, found = sh.distance(q[None])
        attain.append(float(d[0]) if found[0] else 0.0)
    if attain:
        checks.append(Check("antipodal distance >= pi/sqrt(kappa) - tol", max(attain), ">=", bound - tol,
                            {"distances": attain}))
    series = {"sampled_distances": _series("distance", np.arange(len(dists)), np.sort(dists))}
    return checks, series


def _bishop_gromov(cfg, p, rng, doc):
    M = doc.metric
    center = np.asarray(p.get("center", doc.spec.get("center", M.chart.box.mean(axis=1))), dtype=float)
    kappa = float(p.get("kappa", doc.spec.get("kappa_min", 0.0)))
    r_max = float(p.get("r_max", 1.0))
    n_r = int(p.get("n_r", 50))
    tol_mono = float(p.get("tol_mono", TOL_MONO))
    tol_bound = float(p.get("tol_bound", 1e-3))
    grid = np.linspace(r_max / n_r, r_max, n_r)
    probe = _disk_points(rng, 200, center, float(p.get("ricci_radius", 1.0)))
    probe = probe[M.chart.contains(probe)]
    ric = check_ricci_bound(M, kappa, probe, mode="riemannian")
    checks = [Check("ricci lower bound (precondition)", ric.min_margin, ">=", -1e-6,
                    {"skipped_near_interfaces": ric.n_skipped})]
    vol = riemannian_ball_volume(M, center, grid, n_dirs=p.get("n_dirs"), h=float(p.get("h", 1e-2)),
                                 cut=p.get("cut", "first_conjugate"))
    checks.append(Check("balls inside chart (precondition)", bool(vol.meta["chart_clipped"]), "==", False))
    rep = ratio_series(vol, (kappa, M.n), tol_mono=tol_mono)
    checks.append(Check("ratio nonincreasing (worst relative increase)", rep.worst_violation, "<=",
                        tol_mono, {"at": rep.worst_at}))
    excess = float(np.max(rep.ratios) - 1.0)
    checks.append(Check("volume <= (1 + tol) model volume", excess, "<=", tol_bound))
    if p.get("expect_equality"):
        checks.append(Check("ratio constant (equality case)", float(np.max(np.abs(rep.ratios - 1.0))),
                            "<=", float(p.get("equality_tol", 1e-3))))
    series = {"ratio": _series("ratio", rep.grid, rep.ratios, verdict=rep.nonincreasing),
              "volume": _volume_payload(vol),
              "model_volume": _series("volume", rep.denominator.grid, rep.denominator.values)}
    mc_n = int(p.get("mc_samples", 0))
    if mc_n:
        radii = np.asarray(p.get("mc_radii", [grid[len(grid) // 3], grid[2 * len(grid) // 3]]), dtype=float)
        sh = RiemannianShooter(M, center, 1.1 * float(np.max(radii)), h=float(p.get("mc_h", 0.05)))
        mc = riemannian_ball_volume(M, center, radii, method="monte-carlo", n_samples=mc_n,
                                    seed=int(rng.integers(2**63)), shooter=sh)
        quad = np.interp(radii, vol.grid, vol.values)
        z = np.abs(quad - mc.values) / np.maximum(mc.error, 1e-300)
        checks.append(Check("quadrature vs monte-carlo (sigmas)", float(np.max(z)), "<=", 3.0,
                            {"quadrature": quad.tolist(), "monte_carlo": mc.values.tolist(),
                             "sigma": mc.error.tolist()}))
        series["monte_carlo_volume"] = _volume_payload(mc)
    return checks, series


def _lorentz_volume(cfg, p, rng, doc):
    M = doc.metric
    hyp = _need_hypersurface(doc)
    kappa, beta = _ccc(doc, p)
    T = float(p.get("T", 1.5))
    n_t = int(p.get("n_t", 30))
    tol_mono = float(p.get("tol_mono", TOL_MONO))
    grid = np.linspace(T / n_t, T, n_t)
    checks = []
    # CCC preconditions on a coarse lattice of the region swept by the ball
    lo, hi = M.chart.box[:, 0].copy(), M.chart.box[:, 1].copy()
    U, _ = hyp.param_grid(5)
    q = hyp.embed(U)
    lo[:] = np.min(q, axis=0)
    hi[:] = np.max(q, axis=0)
    lo[0], hi[0] = max(M.chart.box[0, 0], lo[0]), min(M.chart.box[0, 1], hi[0] + T)
    axes = [np.linspace(a, b, 5) for a, b in zip(lo, hi)]
    probe = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, M.n)
    ric = check_ricci_bound(M, kappa, probe, mode="timelike",
                            C=float(p.get("C", 3.0)), n_vectors=int(p.get("n_vectors", 256)))
    checks.append(Check("timelike ricci >= (n-1) kappa (precondition)", ric.min_margin, ">=", -1e-6,
                        {"skipped_near_interfaces": ric.n_skipped}))
    H = hyp.mean_curvature(hyp.param_grid(9)[0])
    checks.append(Check("mean curvature <= beta (precondition)", float(np.max(H) - beta), "<=", 1e-6))
    vol = lorentzian_ball_volume(M, hyp, grid, per_axis=int(p.get("per_axis", 16)),
                                 h=float(p.get("h", 1e-2)), cut=p.get("cut", "search"))
    ext = vol.meta.get("existence_failure")
    checks.append(Check("normal geodesics exist up to T (precondition)", ext is None, "==", True,
                        {} if ext is None else ext))
    model = make_model(kappa, beta, M.n)
    rep = ratio_series(vol, model, tol_mono=tol_mono, area=vol.meta["area"])
    checks.append(Check("ratio nonincreasing (worst relative increase)", rep.worst_violation, "<=",
                        tol_mono, {"at": rep.worst_at}))
    cd = (vol.values[2:] - vol.values[:-2]) / (grid[2:] - grid[:-2])
    shell = vol.shell[1:-1]
    coarea = float(np.max(np.abs(cd - shell) / np.maximum(np.abs(shell), 1e-300)))
    checks.append(Check("coarea consistency (relative)", coarea, "<=", float(p.get("coarea_tol", 0.02))))
    series = {"ratio": _series("ratio", rep.grid, rep.ratios, verdict=rep.nonincreasing),
              "volume": _volume_payload(vol),
              "model_volume": _series("volume", rep.denominator.grid, rep.denominator.values)}
    ctl = p.get("control", {"kappa": -1.0, "beta": 0.5, "n": 3, "T": 0.9, "per_axis": 8})
    if ctl:
        cdoc = parse_document(json.dumps(builtin_document(
            "model", kappa=ctl["kappa"], beta=ctl["beta"], n=int(ctl["n"]))))
        cT = float(ctl.get("T", T))
        cgrid = np.linspace(cT / n_t, cT, n_t)
        cvol = lorentzian_ball_volume(cdoc.metric, cdoc.hypersurface, cgrid,
                                      per_axis=int(ctl.get("per_axis", 8)), cut=ctl.get("cut", "search"))
        cmodel = make_model(ctl["kappa"], ctl["beta"], int(ctl["n"]))
        crep = ratio_series(cvol, cmodel, area=cvol.meta["area"])
        spread = float(np.max(crep.ratios) - np.min(crep.ratios))
        checks.append(Check("equality control: ratio spread", spread, "<=",
                            float(ctl.get("tol", 1e-4)), {"model": cmodel.to_dict()}))
        series["control_ratio"] = _series("ratio", crep.grid, crep.ratios, verdict=crep.nonincreasing)
    mc_n = int(p.get("mc_samples", 0))
    if mc_n:
        times = np.asarray(p.get("mc_times", [grid[n_t // 3], grid[2 * n_t // 3], grid[-1]]), dtype=float)
        mc = lorentzian_ball_volume(M, hyp, times, method="monte-carlo", n_samples=mc_n,
                                    seed=int(rng.integers(2**63)))
        quad = np.interp(times, vol.grid, vol.values)
        z = np.abs(quad - mc.values) / np.maximum(mc.error, 1e-300)
        checks.append(Check("quadrature vs monte-carlo (sigmas)", float(np.max(z)), "<=", 3.0,
                            {"quadrature": quad.tolist(), "monte_carlo": mc.values.tolist(),
                             "sigma": mc.error.tolist()}))
        series["monte_carlo_volume"] = _volume_payload(mc)
    return checks, series


def _future_samples(rng, M, hyp, count, t_margin=0.0):
    """Uniform samples of the chart box on the future side of the hypersurface."""
    lo, hi = M.chart.box[:, 0], M.chart.box[:, 1]
    out = []
    while sum(len(o) for o in out) < count:
        X = lo + (hi - lo) * rng.random((4 * count, M.n))
        keep = hyp.side(X) > t_margin
        out.append(X[keep])
    return np.concatenate(out)[:count]


def _singularity_bound(cfg, p, rng, doc):
    M = doc.metric
    hyp = _need_hypersurface(doc)
    kappa, beta = _ccc(doc, p)
    model = make_model(kappa, beta, M.n)
    b = model.collapse
    if not math.isfinite(b):
        raise ScenarioError("the comparison model does not collapse; no finite bound")
    tol = float(p.get("tol", 1e-2))
    n = int(p.get("n_samples", 500))
    tau_max = float(p.get("tau_max", 1.25 * b))
    sh = NormalShooter(hyp, tau_max)
    X = _future_samples(rng, M, hyp, n)
    sep = sh.separation(X)
    tmax = float(np.max(sep.tau))
    checks = [Check("max sampled tau <= b (1 + tol)", tmax, "<=", b * (1 + tol),
                    {"b": b, "samples": n, "provisional": int(np.sum(sep.lower_bound_only))})]
    feet = np.asarray(p.get("cut_feet", [hyp.param_box.mean(axis=1).tolist()]), dtype=float)
    ests = []
    for u in feet:
        rec = cut_function(M, hyp, u, tau_max, shooter=sh)
        ests.append(rec.estimate)
        checks.append(Check(f"cut estimate at foot {u.tolist()} equals b", abs(rec.estimate - b), "<=",
                            float(p.get("cut_tol", 1e-2)), {"status": rec.status, "estimate": rec.estimate}))
    series = {"sampled_tau": _series("tau", np.arange(n), np.sort(sep.tau)),
              "cut_estimates": _series("cut", np.arange(len(ests)), ests)}
    return checks, series


def _cut_locus(cfg, p, rng, doc):
    M = doc.metric
    hyp = _need_hypersurface(doc)
    tol = float(p.get("tol", TOL_CUT))
    n = int(p.get("n_samples", 2000))
    kappa, beta = _ccc(doc, p)
    model = make_model(kappa, beta, M.n)
    tau_max = float(p.get("tau_max", 1.25 * model.collapse if math.isfinite(model.collapse)
                          else float(M.chart.extent[0])))
    sh = NormalShooter(hyp, tau_max)
    X = _future_samples(rng, M, hyp, n)
    sep = sh.separation(X)
    reached = sep.tau > 0
    multi = sep.n_maximizers(tol) >= 2
    frac = float(np.sum(multi & reached) / max(int(np.sum(reached)), 1))
    checks = [Check("two-witness fraction", frac, "<", float(p.get("max_fraction", 0.01)),
                    {"samples": n, "reached": int(np.sum(reached)), "two_witness": int(np.sum(multi))})]
    recs = []
    for u in np.asarray(p.get("cut_feet", [hyp.param_box.mean(axis=1).tolist()]), dtype=float):
        recs.append(cut_function(M, hyp, u, tau_max, shooter=sh).to_dict())
    series = {"cut_estimates": _series("cut", np.arange(len(recs)), [r["estimate"] for r in recs],
                                       records=recs)}
    return checks, series


def _mollify_check(cfg, p, rng, doc):
    M = doc.metric
    kappa, beta = _ccc(doc, p)
    eps = p.get("eps", [0.1, 0.05, 0.025])
    region = np.asarray(p.get("region", [[0.3, 0.9], [-1.0, 1.0]]), dtype=float)
    sig = p.get("sigma", {"level": "t-0.5", "params": ["u"], "box": [[-0.8, 0.8]],
                          "embedding": ["0.5", "u"]})
    hyp = Hypersurface(M, sig["level"], sig["params"], sig["box"], sig["embedding"])
    fam = mollified_family(M, eps, region)
    rep = eps_family_checks(fam, hyp, kappa=kappa, beta=beta, C=float(p.get("C", 2.0)),
                            deltas=tuple(p.get("deltas", (0.1, 0.05))),
                            etas=tuple(p.get("etas", (0.1, 0.05))), T=float(p.get("T", 0.3)),
                            nesting_samples=int(p.get("nesting_samples", 100_000)))
    checks = []
    for e in rep.entries:
        checks.append(Check(f"d_h < eps at eps={e['eps']:g}", e["d_h"], "<", e["eps"]))
        checks.append(Check(f"cone nesting violations at eps={e['eps']:g}", e["nesting_violations"], "==", 0,
                            {"samples": e["nesting_samples"], "lambda": e["nesting_lambda"]}))
    c1 = [e["c1_deviation"] for e in rep.entries]
    steps = [b - a for a, b in zip(c1, c1[1:])]
    checks.append(Check("C1 deviation strictly decreasing (largest step)", max(steps) if steps else -1.0,
                        "<", 0.0, {"c1": c1}))
    vel = [e["velocity_deviation"] for e in rep.entries]
    ratios = [a / b if b > 0 else math.inf for a, b in zip(vel, vel[1:])]
    checks.append(Check("geodesic velocity deviation ratio per halving (smallest)", min(ratios) if ratios else math.inf,
                        ">=", 1.5, {"velocity_deviation": vel}))
    checks.append(Check("uniform second-difference bound", rep.params["c2_bound"], "<=",
                        1.05 * rep.params["source_second_difference"] + 1e-9))
    checks.append(Check("kernel weights sum to one", max(abs(w - 1.0) for w in fam.kernel_sum), "<=", 1e-10))
    for key, e0 in rep.eps0.items():
        checks.append(Check(f"eps0 located for {key}", e0 is not None, "==", True, {"eps0": e0}))
    ent = rep.entries
    series = {
        "d_h": _series("distance", eps, [e["d_h"] for e in ent]),
        "c1_deviation": _series("deviation", eps, c1),
        "second_difference": _series("second_difference", eps, [e["second_difference"] for e in ent]),
        "ricci_min": _series("margin", eps, [e["ricci_min"] for e in ent]),
        "mean_curvature_sup": _series("margin", eps, [e["mean_curvature_sup"] for e in ent]),
        "geodesic_deviation": _series("deviation", eps, [e["geodesic_deviation"] for e in ent]),
        "velocity_deviation": _series("deviation", eps, [e["velocity_deviation"] for e in ent]),
    }
    return checks, series


_RUNNERS = {
    "bishop-gromov": _bishop_gromov,
    "lorentz-volume": _lorentz_volume,
    "myers": _myers,
    "singularity-bound": _singularity_bound,
    "mollify-check": _mollify_check,
    "cut-locus": _cut_locus,
}


def run_scenario(config: dict, scenario: str | None = None, seed: int | None = None) -> RunReport:
    """Run one scenario; ``scenario`` and ``seed`` override the configuration."""
    name = scenario or config.get("scenario")
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {name!r}; valid scenarios: {', '.join(SCENARIOS)}")
    seed = int(config.get("seed", 0) if seed is None else seed)
    if not 0 <= seed < 2**64:
        raise ScenarioError("seed must be an unsigned 64-bit integer")
    rng = np.random.default_rng(seed)
    p = _params(config)
    base = Path(config["_base"]) if "_base" in config else None
    start = time.perf_counter()
    if name == "table1-audit":
        checks, series = _table1_audit(config, p, rng)
    else:
        doc = _document(config.get("document"), base)
        checks, series = _RUNNERS[name](config, p, rng, doc)
    echo = {k: v for k, v in config.items() if not k.startswith("_")}
    echo["scenario"] = name
    return RunReport(name, _clean(echo), seed, checks, _clean(series), time.perf_counter() - start)


# ---------------------------------------------------------------- emitting


def _svg(report: RunReport) -> str:
    ratio = {k: s for k, s in report.series.items() if s.get("kind") == "ratio"}
    chosen = ratio or report.series
    W, H, pad = 640, 400, 50
    xs = [x for s in chosen.values() for x in s["grid"] if isinstance(x, (int, float))]
    ys = [y for s in chosen.values() for y in s["values"] if isinstance(y, (int, float))]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<text x="{pad}" y="24" font-family="sans-serif" font-size="14">'
           f'{report.scenario}: {"PASS" if report.passed else "FAIL"}</text>']
    for i, (name, s) in enumerate(sorted(chosen.items())):
        pts = [(x, y) for x, y in zip(s["grid"], s["values"])
               if isinstance(x, (int, float)) and isinstance(y, (int, float))]
        coords = " ".join(f"{pad + (x - x0) / (x1 - x0) * (W - 2 * pad):.2f},"
                          f"{H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad):.2f}" for x, y in pts)
        c = colors[i % len(colors)]
        verdict = s.get("verdict")
        tag = "" if verdict is None else (" nonincreasing" if verdict else " NOT nonincreasing")
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{pad}" y="{44 + 16 * i}" font-family="sans-serif" font-size="12" '
                   f'fill="{c}">{name}{tag}</text>')
    out.append(f'<text x="{pad}" y="{H - 10}" font-family="sans-serif" font-size="11">'
               f'x: [{x0:.4g}, {x1:.4g}]  y: [{y0:.6g}, {y1:.6g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def emit_report(report: RunReport, formats, out_dir) -> list:
    """Write the report in the requested formats; returns the written paths."""
    formats = set(formats)
    bad = formats - set(FORMATS)
    if bad:
        raise ScenarioError(f"unknown formats {sorted(bad)}; valid: {', '.join(FORMATS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = _safe(report.scenario)
    written = []
    if "json" in formats:
        path = out / f"{stem}.json"
        path.write_text(report.to_json(), encoding="utf-8")
        written.append(path)
    if "csv" in formats:
        for name, s in sorted(report.series.items()):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            cols = ["grid", "values"] + [k for k in ("error", "shell") if k in s]
            w.writerow(cols)
            for row in zip(*(s[c] for c in cols)):
                w.writerow(row)
            path = out / f"{stem}__{_safe(name)}.csv"
            path.write_text(buf.getvalue(), encoding="utf-8")
            written.append(path)
    if "svg" in formats:
        path = out / f"{stem}.svg"
        path.write_text(_svg(report), encoding="utf-8")
        written.append(path)
    return written
