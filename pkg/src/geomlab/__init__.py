"""Numerical verification of curvature comparison theorems for low-regularity metrics.

The package evaluates metrics given by component expressions, integrates
geodesics with Jacobi fields, builds comparison warped products, computes
time separations and cut loci of spacelike hypersurfaces, measures ball
volumes and smooths C^{1,1} metrics by convolution.
"""

from .dsl import MetricDocument, MetricSpecError, load_document, parse_document, parse_metric_spec
from .fixtures import BUILTIN_NAMES, builtin_document
from .geodesics import exp_map, flow, integrate_geodesic, normal_jacobian
from .hypersurface import (
    Hypersurface,
    NormalShooter,
    ball_membership,
    cut_function,
    mean_curvature,
    time_separation,
    unit_normal,
)
from .metric import MetricField, TangentVector, check_ricci_bound, christoffel_at, metric_eval, ricci_at
from .models import (
    ComparisonModel,
    area_ratio,
    ball_volume_normalized,
    f_tilde,
    limit_family_check,
    make_model,
    riemannian_model_volume,
)
from .mollifier import eps_family_checks, inner_approximation, metric_distance_dh, mollify_metric
from .scenarios import SCENARIOS, emit_report, run_scenario
from .shooting import RiemannianShooter
from .volume import lorentzian_ball_volume, ratio_series, riemannian_ball_volume

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "ComparisonModel",
    "Hypersurface",
    "MetricDocument",
    "MetricField",
    "MetricSpecError",
    "NormalShooter",
    "RiemannianShooter",
    "SCENARIOS",
    "TangentVector",
    "area_ratio",
    "ball_membership",
    "ball_volume_normalized",
    "builtin_document",
    "check_ricci_bound",
    "christoffel_at",
    "cut_function",
    "emit_report",
    "eps_family_checks",
    "exp_map",
    "f_tilde",
    "flow",
    "inner_approximation",
    "integrate_geodesic",
    "limit_family_check",
    "load_document",
    "lorentzian_ball_volume",
    "make_model",
    "mean_curvature",
    "metric_distance_dh",
    "metric_eval",
    "mollify_metric",
    "normal_jacobian",
    "parse_document",
    "parse_metric_spec",
    "ratio_series",
    "ricci_at",
    "riemannian_ball_volume",
    "riemannian_model_volume",
    "run_scenario",
    "time_separation",
    "unit_normal",
]
