"""Unit normals, mean curvature, time separation, cut function and ball membership."""

import json
import math

import numpy as np
import pytest

from geomlab.dsl import parse_document
from geomlab.fixtures import builtin_document
from geomlab.geodesics import flow
from geomlab.hypersurface import (
    TOL_CUT,
    Hypersurface,
    HypersurfaceError,
    NormalShooter,
    ball_membership,
    cut_function,
    mean_curvature,
    time_separation,
    unit_normal,
)
from geomlab.models import catalog


def doc_of(name, **params):
    return parse_document(json.dumps(builtin_document(name, **params)))


def tilted_minkowski():
    d = builtin_document("minkowski2")
    d["sigma"] = "t - x/2"
    d["patch"] = {"params": ["u"], "box": [[-1.0, 1.0]], "embedding": ["u/2", "u"]}
    return parse_document(json.dumps(d))


def test_flat_slice_normal_and_curvature():
    doc = doc_of("minkowski3")
    np.testing.assert_allclose(unit_normal(doc.metric, doc.hypersurface, [0.0, 0.3, -0.2]), [1, 0, 0], atol=1e-15)
    assert mean_curvature(doc.metric, doc.hypersurface, [0.1, 0.2]) == pytest.approx(0.0, abs=1e-14)


def test_tilted_hyperplane_normal():
    doc = tilted_minkowski()
    n = unit_normal(doc.metric, doc.hypersurface, [0.25, 0.5])
    np.testing.assert_allclose(n, np.array([1.0, 0.5]) / math.sqrt(0.75), atol=1e-14)
    assert n @ doc.metric.g(np.array([0.25, 0.5])) @ n == pytest.approx(-1.0, abs=1e-14)


def test_off_level_point_rejected():
    doc = doc_of("minkowski2")
    with pytest.raises(HypersurfaceError):
        unit_normal(doc.metric, doc.hypersurface, [0.3, 0.0])


def test_timelike_level_set_rejected():
    d = builtin_document("minkowski2")
    doc = parse_document(json.dumps(d))
    with pytest.raises(HypersurfaceError):
        Hypersurface(doc.metric, "x", ["u"], [[-1, 1]], ["u", "0"])


@pytest.mark.parametrize("row", catalog(3), ids=lambda r: r["row"])
def test_model_normals_and_mean_curvature(row):
    doc = doc_of("model", kappa=row["kappa"], beta=row["beta"], n=3)
    hyp = doc.hypersurface
    U, _ = hyp.param_grid(5)
    d = hyp.normal_data(U)
    np.testing.assert_allclose(d.normal, np.broadcast_to([1.0, 0, 0], d.normal.shape), atol=1e-14)
    assert np.max(np.abs(hyp.mean_curvature(U) - row["beta"])) <= 1e-6


def test_mean_curvature_negative_beta_model():
    doc = doc_of("model", kappa=0.0, beta=-1.0, n=3)
    assert mean_curvature(doc.metric, doc.hypersurface, [0.0, 0.0]) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("name", ["minkowski3", "rw_c11", "collapse_c11", "model"])
def test_normal_bundle_invariants(name):
    doc = doc_of(name) if name != "model" else doc_of("model", kappa=-1.0, beta=0.7, n=3)
    hyp = doc.hypersurface
    U, _ = hyp.param_grid(7)
    d = hyp.normal_data(U)
    g = doc.metric.g(d.q)
    nn = np.einsum("bi,bij,bj->b", d.normal, g, d.normal)
    pair = np.einsum("bi,bij,bja->ba", d.normal, g, d.tangents)
    assert np.max(np.abs(nn + 1)) <= 1e-10
    assert np.max(np.abs(pair)) <= 1e-10
    assert np.all(doc.metric.is_future(d.normal))
    assert np.all(d.area_weight > 0)


def test_separation_past_side_is_zero():
    doc = doc_of("minkowski2")
    sep = time_separation(doc.metric, doc.hypersurface, [[-0.5, 0.2], [0.0, 0.3]], tau_max=1.0)
    np.testing.assert_array_equal(sep.tau, [0.0, 0.0])


def test_minkowski_separation():
    d = builtin_document("minkowski2")
    d["patch"]["box"] = [[-1.5, 1.5]]
    doc = parse_document(json.dumps(d))
    sep = time_separation(doc.metric, doc.hypersurface, [[2.0, 1.0]], tau_max=3.0)
    assert sep.tau[0] == pytest.approx(2.0, abs=1e-8)
    assert sep.foot[0, 0] == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("row", catalog(3), ids=lambda r: r["row"])
def test_model_separation_exact(row):
    doc = doc_of("model", kappa=row["kappa"], beta=row["beta"], n=3)
    M, hyp = doc.metric, doc.hypersurface
    horizon = M.chart.box[0, 1]
    b = row["collapse_time"] or math.inf
    top = 0.9 * min(b, horizon)
    t0 = np.linspace(0.15 * top, top, 5)
    x0 = np.linspace(-0.4, 0.4, 5)
    T, X = np.meshgrid(t0, x0, indexing="ij")
    P = np.stack([T.ravel(), X.ravel(), 0.5 * X.ravel()[::-1]], -1)
    sh = NormalShooter(hyp, top * 1.05)
    sep = sh.separation(P)
    assert np.max(np.abs(sep.tau - P[:, 0])) <= 1e-4
    np.testing.assert_allclose(sep.foot, P[:, 1:], atol=1e-4)


def test_flat_cut_exceeds_horizon():
    doc = doc_of("minkowski2")
    rec = cut_function(doc.metric, doc.hypersurface, np.array([0.0]), 2.0)
    assert rec.status == "exceeds horizon"
    assert rec.estimate == 2.0


def test_model_cut_time_and_probe_consistency():
    doc = doc_of("model", kappa=1.0, beta=0.0, n=3)
    M, hyp = doc.metric, doc.hypersurface
    rec = cut_function(M, hyp, np.array([0.0, 0.0]), math.pi / 2)
    assert rec.estimate == pytest.approx(math.pi / 2, abs=1e-2)
    assert rec.bracket[0] <= rec.estimate <= rec.bracket[1]
    t = 0.5 * rec.estimate
    d = hyp.normal_data(np.zeros((1, 2)))
    p = flow(M, d.q, d.normal, t, record=False).x_final
    sep = time_separation(M, hyp, p, tau_max=1.2 * t)
    assert sep.tau[0] == pytest.approx(t, abs=TOL_CUT)


def test_lower_bound_consistency_along_normals():
    doc = doc_of("rw_c11")
    M, hyp = doc.metric, doc.hypersurface
    U = np.array([[-0.6], [0.0], [0.5]])
    d = hyp.normal_data(U)
    sh = NormalShooter(hyp, 1.6)
    for t in (0.3, 0.8, 1.4):
        pts = flow(M, d.q, d.normal, t, record=False).x_final
        sep = sh.separation(pts)
        assert np.all(sep.tau >= t - TOL_CUT)


def test_ball_membership_cases():
    doc = doc_of("model", kappa=0.0, beta=0.0, n=3)
    M, hyp = doc.metric, doc.hypersurface
    sh = NormalShooter(hyp, 1.5)
    t = 1.0
    pts = np.array([[0.5, 0.1, 0.2],     # above a foot in A, tau = t/2
                    [1.2, 0.0, 0.0],     # tau > t
                    [0.5, 0.8, 0.0],     # foot outside the patch
                    [1.0, 0.2, 0.2],     # on the sphere of time t
                    [-0.2, 0.0, 0.0]])   # past side
    labels, provisional = ball_membership(M, hyp, t, pts, shooter=sh)
    assert list(labels) == ["interior", "outside", "outside", "sphere", "outside"]
    assert not provisional[0]
