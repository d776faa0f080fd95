"""Metric evaluation, Christoffel symbols, Ricci curvature and bound reports."""

import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from geomlab.dsl import parse_metric_spec, warped_product_metric
from geomlab.metric import (
    DomainError,
    MetricField,
    TangentVector,
    causal_class,
    check_ricci_bound,
    christoffel_at,
    metric_eval,
    ricci_at,
)


def sympy_geometry(g, coords):
    """Christoffel symbols ``Gamma[k][i][j]`` and Ricci tensor of a sympy metric."""
    n = len(coords)
    ginv = g.inv()
    gam = [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[l, i], coords[j]) + sp.diff(g[l, j], coords[i])
                                          - sp.diff(g[i, j], coords[l])) for l in range(n)) / 2)
             for j in range(n)] for i in range(n)] for k in range(n)]
    ric = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            ric[i, j] = sp.simplify(sum(
                sp.diff(gam[k][i][j], coords[k]) - sp.diff(gam[k][i][k], coords[j])
                + sum(gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k] for l in range(n))
                for k in range(n)))
    return gam, ric


def counterexample_metric(eps=1.0):
    doc = {"kind": "builtin", "name": "ricci_counterexample", "params": {"eps": eps}}
    return parse_metric_spec(json.dumps(doc))


# ------------------------------------------------------------------ evaluation


def test_flat_metric_is_identity():
    M = parse_metric_spec('{"kind": "builtin", "name": "euclidean3"}')
    np.testing.assert_array_equal(metric_eval(M, [0.3, -1.0, 2.0]), np.eye(3))


def test_counterexample_metric_value():
    np.testing.assert_array_equal(metric_eval(counterexample_metric(), [1, 1, 1]), np.diag([-2.0, 1, 1]))


def test_outside_chart_raises():
    M = parse_metric_spec('{"kind": "builtin", "name": "euclidean2"}')
    with pytest.raises(DomainError):
        metric_eval(M, [10.0, 0.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2.0, 2.0), min_size=3, max_size=3))
def test_symmetry_exact(x):
    for name in ("ricci_counterexample", "collapse_c11"):
        M = parse_metric_spec(json.dumps({"kind": "builtin", "name": name}))
        p = np.clip(np.asarray(x), M.chart.box[:, 0], M.chart.box[:, 1])
        g = M.g(p)
        assert np.max(np.abs(g - np.swapaxes(g, -1, -2))) == 0.0


@pytest.mark.parametrize("name,pattern", [("sphere3", (1, 1, 1)), ("collapse_c11", (-1, 1, 1)),
                                          ("ricci_counterexample", (-1, 1, 1)), ("cap_cone", (1, 1))])
def test_signature_stable_on_grid(name, pattern):
    M = parse_metric_spec(json.dumps({"kind": "builtin", "name": name}))
    pts = np.random.default_rng(1).uniform(M.chart.box[:, 0], M.chart.box[:, 1], size=(1000, M.n))
    signs = np.sign(np.linalg.eigvalsh(M.g(pts)))
    assert np.all(signs == np.sort(np.asarray(pattern, dtype=float)))


# ------------------------------------------------------------------ Christoffels


def test_flat_christoffels_vanish():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski3"}')
    assert np.all(christoffel_at(M, [0.1, 0.2, 0.3]) == 0.0)


def test_polar_sphere_christoffels():
    M = parse_metric_spec('{"kind": "builtin", "name": "sphere2_polar"}')
    th = 0.7
    G = christoffel_at(M, [th, 0.3])
    assert G[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), abs=1e-14)
    assert G[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th), abs=1e-14)
    np.testing.assert_allclose(G, np.swapaxes(G, 1, 2), atol=0)


def test_warped_christoffels_match_sympy():
    t, x, y = sp.symbols("t x y")
    f = sp.cosh(t) + t**2 / 3
    conf = 1 / (1 - (x**2 + y**2) / 4) ** 2
    g = sp.diag(-1, f**2 * conf, f**2 * conf)
    gam, _ = sympy_geometry(g, [t, x, y])
    M = warped_product_metric("cosh(t)+t^2/3", 3, "hyperbolic", t_range=(-0.5, 1.5))
    p = [0.4, 0.3, -0.2]
    G = christoffel_at(M, p)
    subs = dict(zip((t, x, y), p))
    want = np.array([[[float(gam[k][i][j].subs(subs)) for j in range(3)] for i in range(3)] for k in range(3)])
    np.testing.assert_allclose(G, want, atol=1e-13)
    # fiber block: Gamma^t_ij = f f' h_ij
    fv, dfv = float(f.subs(t, 0.4)), float(sp.diff(f, t).subs(t, 0.4))
    h = float(conf.subs(subs))
    assert G[0, 1, 1] == pytest.approx(fv * dfv * h, rel=1e-13)


def test_finite_difference_order_two():
    comps = ["1+x^2*y/3", "x*y/5", "1+sin(x)^2"]
    from geomlab.metric import ChartDomain

    chart = ChartDomain.make([[-1, 1], [-1, 1]], ["x", "y"])
    exact = MetricField.from_expressions(chart, comps)
    p = np.array([0.3, -0.4])
    G = christoffel_at(exact, p)
    errs = []
    for rel in (4e-2, 2e-2, 1e-2):
        fd = MetricField.from_expressions(chart, comps, derivatives="finite_difference", fd_rel_step=rel)
        errs.append(np.max(np.abs(christoffel_at(fd, p) - G)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


# ------------------------------------------------------------------ Ricci


def test_flat_ricci_zero_and_valid():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski4"}')
    s = ricci_at(M, [0.1, 0.2, 0.3, 0.4])
    assert s.valid
    assert np.max(np.abs(s.ricci)) <= 1e-8


def test_counterexample_ricci_matrix():
    s = ricci_at(counterexample_metric(1.0), [1.0, 1.0, 1.0])
    want = 0.25 * np.array([[4, 0, 0], [0, -1, -3], [0, -3, -1]])
    np.testing.assert_allclose(s.ricci, want, atol=1e-8)


@pytest.mark.parametrize("eps", [0.25, 0.5, 2.0])
def test_counterexample_ricci_general_eps(eps):
    x, y, z = sp.symbols("x y z")
    _, ric = sympy_geometry(sp.diag(-1 - sp.Rational(str(eps)) * x**2 * y**2 * z**2, 1, 1), [x, y, z])
    oracle = np.array(ric.subs({x: 1, y: 1, z: 1}), dtype=float)
    closed = np.array([[(1 + eps) * 2 * eps, 0, 0], [0, -eps, -eps * (2 + eps)],
                       [0, -eps * (2 + eps), -eps]]) / (1 + eps) ** 2
    np.testing.assert_allclose(oracle, closed, atol=1e-12)
    np.testing.assert_allclose(ricci_at(counterexample_metric(eps), [1, 1, 1]).ricci, closed, atol=1e-8)


def test_round_sphere_ricci_equals_metric():
    M = parse_metric_spec('{"kind": "builtin", "name": "sphere2"}')
    pts = np.random.default_rng(3).uniform(-3, 3, size=(8, 2))
    for p in pts:
        np.testing.assert_allclose(ricci_at(M, p).ricci, M.g(p), atol=1e-10)


def test_invalid_near_interface():
    M = parse_metric_spec(json.dumps({"kind": "builtin", "name": "rw_c11", "derivatives": "finite_difference"}))
    assert not ricci_at(M, [0.5, 0.0]).valid
    assert ricci_at(M, [0.8, 0.0]).valid


# ------------------------------------------------------------------ bound reports


def test_sphere_bound_equality():
    M = parse_metric_spec('{"kind": "builtin", "name": "sphere2"}')
    pts = np.random.default_rng(4).uniform(-2, 2, size=(20, 2))
    rep = check_ricci_bound(M, 1.0, pts)
    assert rep.passed
    assert abs(rep.min_margin) < 1e-9


@pytest.mark.parametrize("C", [1.5, 4.0, 10.0])
def test_flat_lorentzian_margin_zero(C):
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski3"}')
    rep = check_ricci_bound(M, 0.0, [[0, 0, 0], [1, 1, 1]], mode="timelike", C=C)
    assert rep.passed
    assert rep.min_margin == pytest.approx(0.0, abs=1e-12)


def test_counterexample_witness_value():
    M = counterexample_metric(1.0)
    y = 4.0
    X = np.array([np.sqrt((1 + 2 * y * y) / 2), y, y])
    R = ricci_at(M, [1, 1, 1]).ricci
    assert X @ M.g(np.array([1.0, 1, 1])) @ X == pytest.approx(-1.0)
    assert X @ R @ X == pytest.approx(0.5 - y * y, abs=1e-8)
    rep = check_ricci_bound(M, 0.0, [[1, 1, 1]], mode="timelike", C=np.linalg.norm(X) * (1 + 1e-9))
    assert not rep.passed
    assert rep.min_margin <= -15.5 + 1e-6
    assert rep.witness_vector @ M.g(np.array([1.0, 1, 1])) @ rep.witness_vector == pytest.approx(-1.0)
    assert np.linalg.norm(rep.witness_vector) <= np.linalg.norm(X) * (1 + 1e-6)


def test_counterexample_violation_unbounded_in_C():
    M = counterexample_metric(1.0)
    minima = [check_ricci_bound(M, 0.0, [[1, 1, 1]], mode="timelike", C=C).min_margin for C in (2, 5, 10, 40)]
    assert np.all(np.diff(minima) < 0)
    assert minima[-1] < -10


def test_empty_sample_set():
    M = parse_metric_spec(json.dumps({"kind": "builtin", "name": "rw_c11", "derivatives": "finite_difference"}))
    with pytest.raises(ValueError, match="empty"):
        check_ricci_bound(M, 0.0, [[0.5, 0.0]], mode="timelike", C=3.0)


def test_tangent_vector_causal_class():
    M = parse_metric_spec('{"kind": "builtin", "name": "minkowski2"}')
    assert causal_class(M, [0, 0], [1, 0]) == "timelike"
    assert causal_class(M, [0, 0], [1, 1]) == "null"
    assert causal_class(M, [0, 0], [0, 1]) == "spacelike"
    with pytest.raises(DomainError):
        TangentVector.at(M, [9.0, 0.0], [1.0, 0.0])
    assert TangentVector.at(M, [0, 0], [2, 1]).causal == "timelike"
