"""Comparison warped products, f_tilde, comparison volumes and limit behavior."""

import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from geomlab.models import (
    LIMIT_CASES,
    SnFunction,
    area_ratio,
    ball_volume_normalized,
    catalog,
    catalog_json,
    f_tilde,
    limit_family_check,
    make_model,
    riemannian_model_volume,
)

FIBER_K = {"sphere": 1, "flat": 0, "hyperbolic": -1}
REPS = [(-1.0, 1.0), (-1.0, 2.0), (-1.0, 4.0), (-1.0, -4.0), (0.0, 0.0), (0.0, 1.0), (0.0, -1.0),
        (1.0, 0.5), (1.0, 0.0), (-2.0, -1.0), (4.0, -3.0), (-0.25, 1.0), (-0.25, -1.0)]


def test_flat_row():
    m = make_model(0.0, 0.0, 4)
    assert m.fiber == "flat"
    assert math.isinf(m.collapse)
    np.testing.assert_array_equal(m.f(np.linspace(0, 5, 6)), 1.0)
    assert f_tilde(m, 3.7) == 1.0


def test_positive_curvature_row():
    m = make_model(1.0, 0.0, 3)
    assert m.collapse == pytest.approx(math.pi / 2)
    t = np.linspace(0, 1.5, 7)
    np.testing.assert_allclose(m.f(t), np.cos(t), atol=1e-15)


def test_negative_beta_flat_curvature_row():
    m = make_model(0.0, -1.0, 2)
    assert m.fiber == "hyperbolic"
    assert m.offset == -1.0
    assert m.collapse == 1.0
    assert m.f(np.array(0.3)) == pytest.approx(-0.7)
    assert f_tilde(m, 2.0) == 0.0
    assert f_tilde(m, 0.0) == -1.0
    assert area_ratio(m, 0.0) == 1.0
    assert area_ratio(m, 0.5) == pytest.approx(0.5)
    assert area_ratio(m, 1.5) == 0.0
    assert ball_volume_normalized(m, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert ball_volume_normalized(m, 3.0) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_flat_ball_volume_is_t(n):
    m = make_model(0.0, 0.0, n)
    np.testing.assert_allclose(ball_volume_normalized(m, np.array([0.0, 0.7, 2.5])), [0.0, 0.7, 2.5])


@pytest.mark.parametrize("kappa,beta", REPS)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_row_solves_comparison_equations(kappa, beta, n):
    """``f'' = -kappa f``, ``(n-1) f'(0)/f(0) = beta`` and ``f'^2 + k_fiber + kappa f^2 = 0``."""
    m = make_model(kappa, beta, n)
    t = sp.symbols("t")
    f = sp.sympify(m.f_expr, locals={"t": t})
    assert float(sp.simplify(sp.diff(f, t, 2) + kappa * f).subs(t, 0.37)) == pytest.approx(0.0, abs=1e-12)
    h0 = (n - 1) * sp.diff(f, t).subs(t, 0) / f.subs(t, 0)
    assert float(h0) == pytest.approx(beta, abs=1e-12)
    ident = sp.diff(f, t) ** 2 + FIBER_K[m.fiber] + kappa * f**2
    for tv in (0.0, 0.2, 0.45):
        assert float(ident.subs(t, tv)) == pytest.approx(0.0, abs=1e-12)
    # the numeric evaluator agrees with the printed expression
    ts = np.linspace(0, 0.45, 5)
    np.testing.assert_allclose(m.f(ts), [float(f.subs(t, v)) for v in ts], rtol=1e-13, atol=1e-14)


def test_catalog_covers_nine_rows():
    rows = {r["row"] for r in catalog(3)}
    assert len(rows) == 9
    data = json.loads(catalog_json(3))
    assert {"kappa", "beta", "n", "fiber", "b", "collapse_time", "row"} <= set(data[0])


def test_boundary_rows_classified_exactly():
    assert make_model(-1.0, 2.0, 3).row == "kappa<0,|x|=1"
    assert make_model(-1.0, -2.0, 3).row == "kappa<0,|x|=1"
    assert make_model(-4.0, 4.0 * (1 + 1e-13), 3).row == "kappa<0,|x|=1"


@pytest.mark.parametrize("kappa,beta", [(kb) for kb in REPS if make_model(*kb, 3).collapse < math.inf])
def test_collapse_to_zero(kappa, beta):
    m = make_model(kappa, beta, 3)
    b = m.collapse
    vals = [abs(f_tilde(m, b - 10.0**-k)) for k in range(1, 8)]
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 1e-6
    assert f_tilde(m, b) == 0.0
    assert np.all(np.asarray(f_tilde(m, b + np.linspace(0, 3, 7))) == 0.0)


@pytest.mark.parametrize("kappa,beta", REPS)
def test_boundedness(kappa, beta):
    m = make_model(kappa, beta, 3)
    T = 3.0
    t = np.linspace(0, T, 301)
    ft = np.asarray(f_tilde(m, t))
    if kappa <= 0:
        bound = max(abs(f_tilde(m, T) / m.f0), 1.0)
        assert np.all(np.abs(ft / m.f0) <= bound + 1e-12)
    else:
        assert np.all(np.abs(ft) <= 1 / math.sqrt(kappa) + 1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-4, 4), st.floats(-6, 6), st.integers(2, 6))
def test_area_ratio_at_zero_is_one(kappa, beta, n):
    assert area_ratio(make_model(kappa, beta, n), 0.0) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(-3, 3), st.integers(2, 4), st.floats(0, 3), st.floats(0, 1))
def test_ball_volume_is_integral_of_area(kappa, beta, n, t, dt):
    m = make_model(kappa, beta, n)
    v0, v1 = ball_volume_normalized(m, t), ball_volume_normalized(m, t + dt)
    assert v1 >= v0 - 1e-12
    # constant from the collapse time on
    if t >= m.collapse:
        assert v1 == pytest.approx(v0, abs=1e-12)


def test_riemannian_model_volumes():
    assert riemannian_model_volume(0.0, 2, 1.3) == pytest.approx(math.pi * 1.3**2, rel=1e-12)
    assert riemannian_model_volume(1.0, 2, 1.0) == pytest.approx(2 * math.pi * (1 - math.cos(1.0)), rel=1e-12)
    assert riemannian_model_volume(1.0, 2, 10.0) == pytest.approx(4 * math.pi, rel=1e-12)
    assert riemannian_model_volume(1.0, 3, math.pi) == pytest.approx(2 * math.pi**2, rel=1e-12)
    r = sp.symbols("r")
    hyp3 = 4 * sp.pi * sp.integrate(sp.sinh(r) ** 2, (r, 0, 1))
    assert riemannian_model_volume(-1.0, 3, 1.0) == pytest.approx(float(hyp3), rel=1e-12)


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0])
def test_sn_function(kappa):
    sn = SnFunction(kappa)
    assert sn(0.0) == 0.0
    h = 1e-4
    s = np.linspace(h, 3.0, 50)
    assert (sn(h) - sn(-h)) / (2 * h) == pytest.approx(1.0, abs=1e-8)
    resid = (sn(s + h) - 2 * sn(s) + sn(s - h)) / h**2 + kappa * sn(s)
    assert np.max(np.abs(resid)) <= 1e-6
    if kappa == 0.0:
        np.testing.assert_array_equal(sn(s), s)


@pytest.mark.parametrize("case", [c for c in LIMIT_CASES if c not in ("kappa0<0,beta0=-edge", "constant")])
def test_convergent_limit_cases(case):
    rep = limit_family_check(case)
    assert rep.verdict
    assert np.all(np.diff(rep.raw) < 0)


def test_exceptional_limit_case():
    rep = limit_family_check("kappa0<0,beta0=-edge")
    assert min(rep.raw) >= 0.1
    assert np.all(np.diff(rep.normalized) < 0)
    assert rep.verdict and not rep.raw_converges and rep.normalized_converges


def test_constant_sequence_zero():
    rep = limit_family_check("constant")
    assert rep.raw == [0.0, 0.0, 0.0]
    assert rep.verdict


def test_limit_case_mismatch():
    with pytest.raises(ValueError):
        limit_family_check("kappa0>0,beta0=0", kappa0=-1.0)
    with pytest.raises(ValueError):
        limit_family_check("no such case")
