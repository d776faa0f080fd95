"""Smoothing by convolution, the d_h distance, cone nesting and the per-scale checks."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomlab.dsl import parse_document, parse_metric_spec
from geomlab.hypersurface import Hypersurface
from geomlab.metric import check_ricci_bound, ricci_at
from geomlab.mollifier import (
    MollifierError,
    bump_kernel,
    cone_nesting_check,
    eps_family_checks,
    geodesic_continuity,
    inner_approximation,
    metric_distance_dh,
    mollified_family,
    mollify_metric,
    tilted_unit_vectors,
)

BOX2 = [[-1, 1], [-1, 1]]
REGION2 = [[-0.3, 0.3], [-0.3, 0.3]]
RW_REGION = [[0.3, 0.9], [-1.0, 1.0]]


def lorentz2(components, box=BOX2):
    doc = {"kind": "components", "n": 2, "coords": ["t", "x"], "box": box, "signature": "lorentzian",
           "components": components}
    return parse_metric_spec(json.dumps(doc))


def builtin(name):
    return parse_document(json.dumps({"kind": "builtin", "name": name}))


def probe(region, count, seed=0):
    region = np.asarray(region, dtype=float)
    return np.random.default_rng(seed).uniform(region[:, 0], region[:, 1], size=(count, len(region)))


@pytest.fixture(scope="module")
def rw_family():
    doc = builtin("rw_c11")
    return doc, mollified_family(doc.metric, [0.1, 0.05, 0.025], RW_REGION)


# ------------------------------------------------------------------ kernel


@pytest.mark.parametrize("n,eps", [(1, 0.1), (2, 0.05), (3, 0.1)])
def test_kernel_normalized_and_symmetric(n, eps):
    w, mass = bump_kernel(eps, eps / 8, n)
    assert abs(w.sum() - 1.0) <= 1e-10
    # the unnormalized sum is a quadrature of the continuous kernel mass
    assert mass == pytest.approx(1.0, abs=1e-3)
    assert np.all(w >= 0)
    for ax in range(n):
        np.testing.assert_allclose(w, np.flip(w, axis=ax), atol=1e-18)


def test_kernel_quadrature_converges():
    gaps = [abs(1.0 - bump_kernel(0.1, 0.1 / k, 2)[1]) for k in (8, 16, 32, 64)]
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-9


# ------------------------------------------------------------------ smoothing


def test_constant_metric_unchanged():
    M = lorentz2(["-1", "0", "1"])
    S = mollify_metric(M, 0.1, REGION2)
    pts = probe([[-0.5, 0.5], [-0.5, 0.5]], 300)
    assert np.max(np.abs(S.g(pts) - M.g(pts))) <= 1e-12


def test_affine_metric_unchanged():
    M = lorentz2(["-1-0.2*x", "0.1*t", "1+0.3*t-0.1*x"])
    S = mollify_metric(M, 0.1, REGION2)
    pts = probe([[-0.5, 0.5], [-0.5, 0.5]], 300)
    assert np.max(np.abs(S.g(pts) - M.g(pts))) <= 1e-10


def test_smooth_metric_error_quadratic_in_eps():
    M = lorentz2(["-1-0.3*sin(2*x)*cos(t)", "0.1*sin(t+x)", "1+0.2*cos(3*t)"])
    pts = probe(REGION2, 200, seed=1)
    err = [np.max(np.abs(mollify_metric(M, e, REGION2, eps_max=0.1).g(pts) - M.g(pts))) for e in (0.1, 0.05, 0.025)]
    for a, b in zip(err, err[1:]):
        assert a / b == pytest.approx(4.0, rel=0.1)


def test_c11_metric_error_quadratic_in_eps(rw_family):
    doc, fam = rw_family
    pts = probe(RW_REGION, 400, seed=2)
    err = [np.max(np.abs(Me.g(pts) - doc.metric.g(pts))) for Me in fam.members]
    for a, b in zip(err, err[1:]):
        assert a / b == pytest.approx(4.0, rel=0.15)


def test_smoothed_member_has_ricci_across_interface(rw_family):
    _, fam = rw_family
    s = ricci_at(fam.members[-1], [0.5, 0.0])
    assert s.valid
    assert fam.members[-1].smoothness == "smooth"


def test_region_too_close_to_chart_edge():
    M = lorentz2(["-1", "0", "1"])
    with pytest.raises(MollifierError):
        mollify_metric(M, 0.2, [[-0.9, 0.9], [-0.3, 0.3]])
    with pytest.raises(MollifierError):
        mollified_family(M, [0.1, 0.0], REGION2)


def test_riemannian_ricci_bound_nearly_preserved():
    M = parse_metric_spec('{"kind": "builtin", "name": "sphere2"}')
    region = [[-0.5, 0.5], [-0.5, 0.5]]
    S = mollify_metric(M, 0.05, region)
    rep = check_ricci_bound(S, 1.0 - 0.05, probe(region, 40, seed=3))
    assert rep.passed


# ------------------------------------------------------------------ distance


def test_distance_to_self_is_zero():
    M = builtin("collapse_c11").metric
    assert metric_distance_dh(M, M, probe([[0.1, 0.9], [-0.5, 0.5], [-0.5, 0.5]], 50)) == 0.0


@pytest.mark.parametrize("c", [0.3, 1e-3])
def test_distance_between_constant_metrics(c):
    a = lorentz2(["-1", "0", "1"])
    b = lorentz2([f"-1-{c}", "0", "1"])
    assert metric_distance_dh(a, b, [[0.0, 0.0], [0.2, 0.1]]) == pytest.approx(c, rel=1e-12)
    # a stretched background halves the measured distance along t
    assert metric_distance_dh(a, b, [[0.0, 0.0]], h=np.diag([2.0, 1.0])) == pytest.approx(c / 2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
def test_distance_symmetric_and_triangle(coef):
    a = lorentz2(["-1", "0", "1"])
    b = lorentz2([f"-1+({coef[0]})*0.5", f"({coef[1]})*0.3", f"1+({coef[2]})*0.5"])
    c = lorentz2([f"-1+({coef[3]})*0.5", f"({coef[4]})*0.3", f"1+({coef[5]})*0.5"])
    pts = [[0.0, 0.0]]
    dab, dba = metric_distance_dh(a, b, pts), metric_distance_dh(b, a, pts)
    assert dab == pytest.approx(dba, abs=1e-15)
    assert metric_distance_dh(a, c, pts) <= dab + metric_distance_dh(b, c, pts) + 1e-14


def test_distance_empty_points():
    a = lorentz2(["-1", "0", "1"])
    with pytest.raises(ValueError):
        metric_distance_dh(a, a, np.zeros((0, 2)))


# ------------------------------------------------------------------ cone nesting


def test_minkowski_inner_cone_nested():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski3"}')
    inner = inner_approximation(M, 0.1)
    rep = cone_nesting_check(M, inner, [[0.0, 0.0, 0.0]], n_samples=100_000)
    assert rep.samples >= 100_000
    assert rep.violations == 0
    assert rep.worst < 0
    assert rep.witness_point is None


def test_zero_width_gap_is_not_strict():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski3"}')
    rep = cone_nesting_check(M, inner_approximation(M, 0.0), [[0.0, 0.0, 0.0]], n_samples=2000)
    # null vectors of g are g-null, not g-timelike; the margin is zero up to rounding
    assert rep.worst >= -1e-12


def test_inner_approximation_argument_checks():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski3"}')
    with pytest.raises(ValueError):
        inner_approximation(M, -0.1)
    with pytest.raises(ValueError):
        inner_approximation(parse_metric_spec('{"kind": "builtin", "name": "euclidean2"}'), 0.1)


def test_auto_gap_nests_source_cones(rw_family):
    doc, fam = rw_family
    pts = probe(RW_REGION, 20, seed=4)
    for Me in fam.members:
        lam = 2.0 * metric_distance_dh(doc.metric, Me, pts)
        rep = cone_nesting_check(doc.metric, inner_approximation(Me, lam), pts, n_samples=20_000)
        assert rep.violations == 0


# ------------------------------------------------------------------ per-scale checks


def test_family_checks_on_c11_fixture(rw_family):
    doc, fam = rw_family
    hyp = Hypersurface(doc.metric, "t-0.5", ["u"], [[-0.8, 0.8]], ["0.5", "u"])
    rep = eps_family_checks(fam, hyp, kappa=0.0, beta=0.0, T=0.3, nesting_samples=20_000)
    assert all(rep.verdicts.values()), rep.verdicts
    assert rep.eps == [0.1, 0.05, 0.025]
    for e in rep.entries:
        assert e["d_h"] < e["eps"]
        assert e["nesting_violations"] == 0
    assert rep.eps0["ricci_delta_0.05"] is not None
    keys, rows = rep.csv_rows()
    assert "d_h" in keys and len(rows) == 3


def test_flat_family_has_exact_margins():
    M = lorentz2(["-1", "0", "1"])
    fam = mollified_family(M, [0.1, 0.05], REGION2)
    hyp = Hypersurface(M, "t", ["u"], [[-0.2, 0.2]], ["0", "u"])
    rep = eps_family_checks(fam, hyp, kappa=0.0, beta=0.0, T=0.1, per_axis=5, nesting_samples=2000)
    for e in rep.entries:
        assert e["d_h"] <= 1e-12
        assert abs(e["ricci_min"]) <= 1e-6
        assert abs(e["mean_curvature_sup"]) <= 1e-9


def test_geodesic_continuity_ratio(rw_family):
    doc, fam = rw_family
    M = doc.metric
    p = np.array([0.35, 0.0])
    V = tilted_unit_vectors(M, p, [1.0, 0.0], [0.0, 1.0])
    assert len(V) == 10
    np.testing.assert_allclose(np.einsum("ki,ij,kj->k", V, M.g(p), V), -1.0, atol=1e-13)
    dev = geodesic_continuity(M, fam.members, p, V, 0.4)
    assert all(a / b >= 1.5 for a, b in zip(dev, dev[1:]))
