"""JSON-framed metric documents.

Three document kinds are understood::

    {"kind": "builtin", "name": "minkowski4", "params": {...}}
    {"kind": "components", "n": 2, "coords": ["t", "x"], "box": [[-1, 1], [-1, 1]],
     "signature": "lorentzian", "components": ["-1", "0", "1"],
     "interfaces": ["t = 0.5"]}
    {"kind": "warped_product", "n": 3, "f": "cos(t)", "fiber": "hyperbolic",
     "t_range": [-0.5, 1.5], "fiber_halfwidth": 1.0}

Component lists hold the upper triangle row by row.  A document may also
carry a hypersurface: ``"sigma"`` is the level-set expression (future side
where it is positive) and ``"patch"`` gives parameter names, a parameter box
and embedding expressions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expr as ex
from .metric import ChartDomain, Interface, MetricField, SignatureError

__all__ = [
    "MetricSpecError",
    "MetricDocument",
    "parse_metric_spec",
    "parse_document",
    "load_document",
    "build_from_dict",
    "warped_product_metric",
    "conformal_fiber_factor",
]


class MetricSpecError(ValueError):
    """Malformed metric document; ``line``/``col`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)


@dataclass
class MetricDocument:
    metric: MetricField
    hypersurface: object | None
    spec: dict


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _locate(text: str | None, needle: str, offset: int = 0):
    """Line/column of ``offset`` inside the JSON string literal ``needle``."""
    if not text:
        return None, None
    lit = json.dumps(needle)
    pos = text.find(lit)
    if pos < 0:
        return None, None
    return _line_col(text, pos + 1 + offset)


def _parse(expr_text, names, text=None) -> ex.Node:
    if isinstance(expr_text, (int, float)):
        return ex.Num(float(expr_text))
    if not isinstance(expr_text, str):
        raise MetricSpecError(f"expected an expression string, got {expr_text!r}")
    try:
        return ex.parse_expr(expr_text, names)
    except ex.ExprSyntaxError as err:
        line, col = _locate(text, expr_text, err.offset)
        raise MetricSpecError(f"syntax error in {expr_text!r}: {err.args[0]}", line, col) from None


def conformal_fiber_factor(names, curvature: float) -> str:
    """Conformal factor of the constant-curvature fiber metric ``delta / (1 + k|x|^2/4)^2``."""
    if curvature == 0:
        return "1"
    r2 = "+".join(f"{v}^2" for v in names)
    return f"1/(1+{curvature!r}*({r2})/4)^2"


_FIBER_K = {"flat": 0.0, "sphere": 1.0, "hyperbolic": -1.0}


def warped_product_metric(
    f_expr: str,
    n: int,
    fiber: str,
    *,
    t_range=(-0.5, 1.5),
    fiber_halfwidth: float = 1.0,
    coords=None,
    interfaces=None,
    derivatives: str = "closed_form",
    name: str = "",
    text: str | None = None,
) -> MetricField:
    """``-dt^2 + f(t)^2 h`` with ``h`` the conformally flat constant-curvature fiber."""
    if fiber not in _FIBER_K:
        raise MetricSpecError(f"unknown fiber {fiber!r}; use flat, sphere or hyperbolic")
    coords = tuple(coords) if coords else ("t",) + tuple(f"x{i}" for i in range(1, n))
    if len(coords) != n:
        raise MetricSpecError("coords must list n names")
    f_node = _parse(f_expr, (coords[0],), text)
    fiber_names = coords[1:]
    if fiber_names and _FIBER_K[fiber] < 0 and fiber_halfwidth * np.sqrt(n - 1) >= 2.0:
        raise MetricSpecError("hyperbolic fiber chart must stay inside |x| < 2")
    conf = ex.parse_expr(conformal_fiber_factor(fiber_names, _FIBER_K[fiber]), fiber_names)
    diag = ex.mul(ex.power(f_node, ex.Num(2.0)), conf)
    comps = []
    for i in range(n):
        for j in range(i, n):
            if i != j:
                comps.append(ex.ZERO)
            elif i == 0:
                comps.append(ex.Num(-1.0))
            else:
                comps.append(diag)
    box = [list(t_range)] + [[-fiber_halfwidth, fiber_halfwidth]] * (n - 1)
    chart = ChartDomain(n, np.asarray(box, dtype=float), coords)
    itfs = _interfaces(interfaces, chart, comps, text)
    time_orientation = np.eye(n)[0]
    return MetricField.from_expressions(
        chart, comps, derivatives=derivatives, signature="lorentzian",
        time_orientation=time_orientation, interfaces=itfs,
        name=name or f"warped({f_expr}, {fiber})",
    )


def _interfaces(declared, chart: ChartDomain, comps, text=None) -> list[Interface]:
    """Declared loci, or the branch loci of ``piecewise`` components when none are declared."""
    out = []
    if declared is None:
        seen = set()
        for c in comps:
            for cond in ex.piecewise_conditions(c):
                key = str(cond.level())
                if key not in seen:
                    seen.add(key)
                    out.append(_interface_from_node(cond.level(), key, chart))
        return out
    for item in declared:
        try:
            itf = Interface.from_equation(item, chart)
        except ex.ExprSyntaxError as err:
            line, col = _locate(text, item, err.offset)
            raise MetricSpecError(f"syntax error in interface {item!r}: {err.args[0]}", line, col) from None
        except ValueError as err:
            raise MetricSpecError(str(err)) from None
        out.append(itf)
    for itf in out:
        _check_locus_inside(itf, chart)
    return out


def _interface_from_node(node: ex.Node, text: str, chart: ChartDomain) -> Interface:
    dnodes = [node.diff(v) for v in chart.names]

    def level(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(node.evaluate(chart.env(x)), x.shape[:-1]).astype(float)

    def grad(x):
        x = np.asarray(x, dtype=float)
        env = chart.env(x)
        return np.stack([np.broadcast_to(d.evaluate(env), x.shape[:-1]) for d in dnodes], -1).astype(float)

    itf = Interface(f"{text} = 0", level, grad)
    _check_locus_inside(itf, chart)
    return itf


def _check_locus_inside(itf: Interface, chart: ChartDomain, samples: int = 9) -> None:
    axes = [np.linspace(lo, hi, samples) for lo, hi in chart.box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, chart.n)
    lv = itf.level(pts)
    if not (np.any(lv <= 0) and np.any(lv >= 0)):
        raise MetricSpecError(f"interface locus {itf.text!r} does not meet the chart box")


def _components_metric(doc: dict, text=None) -> MetricField:
    for key in ("n", "box", "components"):
        if key not in doc:
            raise MetricSpecError(f"components document needs {key!r}")
    n = int(doc["n"])
    coords = tuple(doc.get("coords") or (f"x{i}" for i in range(n)))
    if len(coords) != n:
        raise MetricSpecError("coords must list n names")
    try:
        chart = ChartDomain(n, np.asarray(doc["box"], dtype=float), coords)
    except ValueError as err:
        raise MetricSpecError(str(err)) from None
    raw = doc["components"]
    m = n * (n + 1) // 2
    if len(raw) != m:
        raise MetricSpecError(
            f"incomplete symmetric matrix: expected {m} upper-triangle components, got {len(raw)}"
        )
    comps = [_parse(c, coords, text) for c in raw]
    signature = doc.get("signature", "riemannian")
    tor = doc.get("time_orientation")
    if signature == "lorentzian" and tor is None:
        tor = np.eye(n)[0]
    itfs = _interfaces(doc.get("interfaces"), chart, comps, text)
    try:
        return MetricField.from_expressions(
            chart, comps, derivatives=doc.get("derivatives", "closed_form"),
            signature=signature, time_orientation=tor, interfaces=itfs,
            name=doc.get("name", ""),
        )
    except ValueError as err:
        raise MetricSpecError(str(err)) from None


def build_from_dict(doc: dict, text: str | None = None) -> MetricField:
    """Metric described by an already-decoded document."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise MetricSpecError("document must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "builtin":
        from .fixtures import builtin_document

        try:
            inner = builtin_document(doc.get("name", ""), **doc.get("params", {}))
        except (KeyError, TypeError) as err:
            raise MetricSpecError(str(err.args[0] if err.args else err)) from None
        for key in ("box", "t_range", "fiber_halfwidth", "derivatives"):
            if key in doc:
                inner[key] = doc[key]
        M = build_from_dict(inner)
    elif kind == "components":
        M = _components_metric(doc, text)
    elif kind == "warped_product":
        for key in ("n", "f", "fiber"):
            if key not in doc:
                raise MetricSpecError(f"warped_product document needs {key!r}")
        M = warped_product_metric(
            doc["f"], int(doc["n"]), doc["fiber"],
            t_range=tuple(doc.get("t_range", (-0.5, 1.5))),
            fiber_halfwidth=float(doc.get("fiber_halfwidth", 1.0)),
            coords=doc.get("coords"), interfaces=doc.get("interfaces"),
            derivatives=doc.get("derivatives", "closed_form"),
            name=doc.get("name", ""), text=text,
        )
    else:
        raise MetricSpecError(f"unknown kind {kind!r}; use builtin, components or warped_product")
    probe = np.asarray(doc.get("probe", M.chart.box.mean(axis=1)), dtype=float)
    try:
        M.check_signature(probe)
    except SignatureError as err:
        raise MetricSpecError(f"signature mismatch at probe point {probe.tolist()}: {err}") from None
    return M


def _decode(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise MetricSpecError(f"JSON syntax error: {err.msg}", err.lineno, err.colno) from None


def parse_metric_spec(text: str) -> MetricField:
    """Parse a metric document into a :class:`MetricField`."""
    return build_from_dict(_decode(text), text)


def _merged_spec(doc: dict) -> dict:
    """Document with builtin defaults (hypersurface etc.) filled in."""
    if doc.get("kind") != "builtin":
        return doc
    from .fixtures import builtin_document

    merged = builtin_document(doc.get("name", ""), **doc.get("params", {}))
    merged.update({k: v for k, v in doc.items() if k not in ("kind", "name", "params")})
    return merged


def parse_document(text: str) -> MetricDocument:
    """Metric plus optional hypersurface."""
    doc = _decode(text)
    M = build_from_dict(doc, text)
    full = _merged_spec(doc)
    hyp = None
    if "sigma" in full:
        from .hypersurface import Hypersurface

        try:
            hyp = Hypersurface.from_spec(M, full["sigma"], full.get("patch"))
        except ex.ExprSyntaxError as err:
            raise MetricSpecError(f"syntax error in hypersurface: {err.args[0]}") from None
    return MetricDocument(M, hyp, full)


def load_document(path) -> MetricDocument:
    return parse_document(Path(path).read_text(encoding="utf-8"))
