"""Operator-spec documents: JSON descriptions of operators and vectors.

The document format is the package's external interface for describing
operators; see docs/formats.md for the full schema. Parsing is strict:
unknown kinds, malformed payloads, and dimension mismatches raise
ConfigurationError with the offending key in the message.
"""

import json
import math

import numpy as np

from monosum import convex
from monosum.errors import ConfigurationError
from monosum.graphs import (
    IntervalNormalConeGraph,
    PiecewiseLinearGraph,
    PolyGraph,
)
from monosum.linalg import SymSparseMatrix, as_vector
from monosum.monotone import (
    FormSumOperator,
    LinearOperator,
    OperatorSpec,
    SeparableOperator,
    SubdifferentialOperator,
    zero_operator,
    identity_operator,
)
from monosum.problems import (
    GridSpec,
    PotentialSpec,
    build_laplacian,
    make_reaction_graph,
    sample_potential,
)


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigurationError(f"{context}: missing required key '{key}'")
    return doc[key]


def parse_grid(doc: dict) -> GridSpec:
    return GridSpec(int(_require(doc, "dim", "grid")), int(_require(doc, "n", "grid")))


def parse_matrix(doc: dict) -> SymSparseMatrix:
    n = int(_require(doc, "n", "matrix"))
    entries = _require(doc, "entries", "matrix")
    try:
        tripled = [(int(i), int(j), float(v)) for i, j, v in entries]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"matrix entries must be [i, j, value] triples: {exc}") from exc
    return SymSparseMatrix.from_entries(n, tripled, psd=bool(doc.get("psd", True)))


def serialize_matrix(m: SymSparseMatrix) -> dict:
    upper = [
        [int(i), int(j), float(v)]
        for i, j, v in zip(m.rows, m.cols, m.vals)
        if i <= j
    ]
    return {"n": m.n, "entries": upper, "psd": m.psd}


def parse_graph(doc: dict):
    variant = _require(doc, "variant", "graph")
    if variant == "preset":
        return make_reaction_graph(_require(doc, "name", "graph preset"))
    if variant == "odd_poly":
        return PolyGraph(
            float(doc.get("c1", 0.0)), float(doc.get("c3", 0.0)), float(doc.get("c5", 0.0))
        )
    if variant == "piecewise_linear":
        return PiecewiseLinearGraph(
            [(float(x), float(lo), float(hi)) for x, lo, hi in _require(doc, "breakpoints", "graph")],
            left_slope=float(doc.get("left_slope", 0.0)),
            right_slope=float(doc.get("right_slope", 0.0)),
        )
    if variant == "interval_normal_cone":
        a = doc.get("a", None)
        b = doc.get("b", None)
        return IntervalNormalConeGraph(
            -math.inf if a is None else float(a),
            math.inf if b is None else float(b),
        )
    raise ConfigurationError(f"unknown graph variant '{variant}'")


def parse_convex(doc: dict) -> convex.ConvexFunctionSpec:
    if "preset" in doc:
        name = doc["preset"]
        params = {k: v for k, v in doc.items() if k != "preset"}
        return convex.preset(name, **params)
    if "sum" in doc:
        parts = [parse_convex(d) for d in doc["sum"]]
        if len(parts) < 2:
            raise ConfigurationError("convex sum needs at least two summands")
        out = parts[0]
        for p in parts[1:]:
            out = out.add(p)
        return out
    if "quadratic" in doc:
        return convex.quadratic(parse_matrix(doc["quadratic"]))
    raise ConfigurationError("convex function document needs 'preset', 'sum', or 'quadratic'")


def parse_operator(doc) -> OperatorSpec:
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigurationError("operator document must be a JSON object or a path")
    kind = _require(doc, "kind", "operator")
    weight = float(doc.get("weight", 1.0))
    if kind == "linear":
        if "preset" in doc:
            name = doc["preset"]
            if name == "laplacian":
                grid = parse_grid(_require(doc, "grid", "linear preset"))
                return LinearOperator(build_laplacian(grid), weight=grid.weight, label="laplacian")
            dim = int(_require(doc, "dimension", "linear preset"))
            if name == "zero":
                return zero_operator(dim, weight)
            if name == "identity":
                return identity_operator(dim, weight)
            if name == "diagonal":
                return LinearOperator(
                    SymSparseMatrix.diagonal(as_vector(_require(doc, "values", "diagonal"))),
                    weight,
                    label="diagonal",
                )
            raise ConfigurationError(f"unknown linear preset '{name}'")
        return LinearOperator(parse_matrix(_require(doc, "matrix", "linear")), weight)
    if kind == "separable":
        graph = parse_graph(_require(doc, "graph", "separable"))
        dim = doc.get("dimension")
        return SeparableOperator(graph, None if dim is None else int(dim), weight)
    if kind == "subdifferential":
        fn = parse_convex(_require(doc, "function", "subdifferential"))
        dim = doc.get("dimension")
        return SubdifferentialOperator(fn, None if dim is None else int(dim), weight)
    if kind == "form_sum":
        grid = parse_grid(_require(doc, "grid", "form_sum"))
        pot_doc = _require(doc, "potential", "form_sum")
        if isinstance(pot_doc, list):
            q = as_vector(pot_doc)
        else:
            q = sample_potential(parse_potential(pot_doc), grid)
        return FormSumOperator(build_laplacian(grid), q, weight=grid.weight)
    raise ConfigurationError(f"unknown operator kind '{kind}'")


def parse_potential(doc: dict) -> PotentialSpec:
    centers = doc.get("centers")
    return PotentialSpec(
        exponent=float(doc.get("exponent", 0.75)),
        cutoff=float(doc.get("cutoff", 2.0)),
        offset=float(doc.get("offset", 0.0)),
        centers=None if centers is None else tuple(tuple(c) for c in np.atleast_2d(centers)),
        truncation=int(doc.get("truncation", 16)),
    )


def parse_vector(doc, seed: int = 0) -> np.ndarray:
    """Vectors are literal lists or {"random": {"dim": n, "scale": s}} drawn
    from the run's seeded generator; {"zeros"/"ones": n} also work."""
    if isinstance(doc, (list, tuple)):
        return as_vector(doc)
    if isinstance(doc, (int, float)):
        return as_vector([doc])
    if isinstance(doc, dict):
        if "random" in doc:
            spec = doc["random"]
            dim = int(_require(spec, "dim", "random vector"))
            rng = np.random.default_rng(int(spec.get("seed", seed)))
            return float(spec.get("scale", 1.0)) * rng.standard_normal(dim)
        if "zeros" in doc:
            return np.zeros(int(doc["zeros"]))
        if "ones" in doc:
            return np.ones(int(doc["ones"]))
    raise ConfigurationError("vector document must be a list, number, or random/zeros/ones spec")
