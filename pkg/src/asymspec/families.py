"""Operator families over the parameter interval (0, 1].

A family is a declarative recipe mapping the parameter ``h`` to a square
complex matrix of fixed dimension. Limits as ``h -> 0`` are replaced by
statistics over a finite geometric sampling grid: the value of a trace "in
the tail" is the maximum over the last ``tail_window`` samples, and its trend
is the sign of the least-squares slope of those samples against ``log h``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadParameter,
    DimensionMismatch,
    ExprError,
    LengthMismatch,
    SchemaError,
    TraceError,
)
from .exprs import FuncExpr, eval_expr, parse_expr
from .linalg import ComplexMatrix, jordan_block, matrix_from_dict, matrix_to_dict

# Dead-band on the window slope below which a trend counts as flat.
TREND_DEADBAND = 1e-10


# ---------------------------------------------------------------------------
# Sampling grid


@dataclass(frozen=True)
class HGrid:
    """Strictly decreasing samples of h in (0, 1] plus a tail window size."""

    samples: tuple[float, ...]
    tail_window: int

    def __post_init__(self) -> None:
        if len(self.samples) < 4:
            raise BadParameter("grid needs at least 4 samples")
        if not all(0.0 < h <= 1.0 for h in self.samples):
            raise BadParameter("grid samples must lie in (0, 1]")
        if not all(a > b for a, b in zip(self.samples, self.samples[1:])):
            raise BadParameter("grid samples must be strictly decreasing")
        if not 1 <= self.tail_window <= len(self.samples):
            raise BadParameter("tail_window must be between 1 and the sample count")

    @property
    def count(self) -> int:
        return len(self.samples)

    @property
    def window_samples(self) -> tuple[float, ...]:
        return self.samples[-self.tail_window :]


def geometric_grid(
    h0: float = 1.0, ratio: float = 0.5, count: int = 20, tail_window: int = 6
) -> HGrid:
    """Grid ``h0 * ratio**j`` for j = 0..count-1."""
    if not 0.0 < h0 <= 1.0:
        raise BadParameter("h0 must lie in (0, 1]")
    if not 0.0 < ratio < 1.0:
        raise BadParameter("ratio must lie strictly between 0 and 1")
    if count < 4:
        raise BadParameter("count must be at least 4")
    return HGrid(tuple(h0 * ratio**j for j in range(count)), tail_window)


# ---------------------------------------------------------------------------
# Tail estimation


class Trend(str, enum.Enum):
    DECREASING = "decreasing"
    FLAT = "flat"
    INCREASING = "increasing"


@dataclass(frozen=True)
class TailEstimate:
    """Max of the window values plus the direction they move as h -> 0."""

    value: float
    trend: Trend
    window_values: tuple[float, ...]


def _window_slope(hs: Sequence[float], values: Sequence[float]) -> float:
    # Least-squares slope of values against log h. Positive slope means the
    # values shrink as h -> 0 (log h runs to -infinity).
    if len(values) < 2:
        return 0.0
    xs = np.log(np.asarray(hs, dtype=np.float64))
    ys = np.asarray(values, dtype=np.float64)
    xdev = xs - xs.mean()
    denom = float(np.dot(xdev, xdev))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xdev, ys - ys.mean()) / denom)


def tail_limsup(values: Sequence[float], grid: HGrid) -> TailEstimate:
    """Tail statistic of one value per grid sample (ordered like the grid).

    Non-finite values inside the window force value ``inf`` with a flat
    trend; non-finite values outside the window are ignored (only the tail
    defines the estimate).
    """
    vals = [float(v) for v in values]
    if len(vals) != grid.count:
        raise LengthMismatch(f"expected {grid.count} values, got {len(vals)}")
    window = tuple(vals[-grid.tail_window :])
    if not all(math.isfinite(v) for v in window):
        return TailEstimate(math.inf, Trend.FLAT, window)
    slope = _window_slope(grid.window_samples, window)
    if abs(slope) <= TREND_DEADBAND:
        trend = Trend.FLAT
    elif slope > 0.0:
        trend = Trend.DECREASING
    else:
        trend = Trend.INCREASING
    return TailEstimate(max(window), trend, window)


def default_vanish_tol(values: Sequence[float]) -> float:
    """Scale-aware tolerance: 1e-4 times (1 + the trace magnitude at h0)."""
    first = float(values[0])
    if not math.isfinite(first):
        return 1e-4
    return 1e-4 * (1.0 + abs(first))


def tail_vanishes(estimate: TailEstimate, tol: float) -> bool:
    """True when the tail value is below ``tol`` and not trending upward."""
    return estimate.value <= tol and estimate.trend is not Trend.INCREASING


def vanishes(values: Sequence[float], grid: HGrid, tol: float) -> bool:
    """Same test as :func:`tail_vanishes`, starting from one value per sample."""
    return tail_vanishes(tail_limsup(values, grid), tol)


def scalar_trace(func: Callable[[float], float], grid: HGrid) -> list[float]:
    """Evaluate a scalar function at every grid sample, in grid order."""
    out = []
    for h in grid.samples:
        try:
            out.append(float(func(h)))
        except Exception as exc:
            raise TraceError(h, str(exc)) from exc
    return out


# ---------------------------------------------------------------------------
# Family recipe nodes


class FamilyNode:
    """Base for recipe nodes; subclasses define ``dim`` and ``_eval``."""

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    def _eval(self, h: float) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(FamilyNode):
    matrix: ComplexMatrix

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def _eval(self, h: float) -> np.ndarray:
        return self.matrix.array


@dataclass(frozen=True)
class Jordan(FamilyNode):
    size: int
    eigenvalue: complex
    _matrix: ComplexMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_matrix", jordan_block(self.size, self.eigenvalue))

    @property
    def dim(self) -> int:
        return self.size

    def _eval(self, h: float) -> np.ndarray:
        return self._matrix.array


@dataclass(frozen=True)
class DiagExpr(FamilyNode):
    """Diagonal family whose entries are expressions in the free variable h."""

    entries: tuple[str, ...]
    _asts: tuple[FuncExpr, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise BadParameter("diag_expr needs at least one entry")
        object.__setattr__(self, "_asts", tuple(parse_expr(src) for src in self.entries))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def _eval(self, h: float) -> np.ndarray:
        values = []
        for i, ast in enumerate(self._asts):
            try:
                values.append(eval_expr(ast, {"h": complex(h)}))
            except Exception as exc:
                raise ExprError(f"entry {i} ({self.entries[i]!r}) at h={h!r}: {exc}") from exc
        return np.diag(np.asarray(values, dtype=np.complex128))


@dataclass(frozen=True)
class HScaled(FamilyNode):
    inner: FamilyNode

    @property
    def dim(self) -> int:
        return self.inner.dim

    def _eval(self, h: float) -> np.ndarray:
        return h * self.inner._eval(h)


@dataclass(frozen=True)
class Sum(FamilyNode):
    children: tuple[FamilyNode, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise BadParameter("sum needs at least one child")
        dims = {c.dim for c in self.children}
        if len(dims) != 1:
            raise DimensionMismatch(f"sum children disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.children[0].dim

    def _eval(self, h: float) -> np.ndarray:
        acc = self.children[0]._eval(h).copy()
        for child in self.children[1:]:
            acc += child._eval(h)
        return acc


@dataclass(frozen=True)
class Product(FamilyNode):
    children: tuple[FamilyNode, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise BadParameter("product needs at least one child")
        dims = {c.dim for c in self.children}
        if len(dims) != 1:
            raise DimensionMismatch(f"product children disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.children[0].dim

    def _eval(self, h: float) -> np.ndarray:
        acc = self.children[0]._eval(h)
        for child in self.children[1:]:
            acc = acc @ child._eval(h)
        return acc


@dataclass(frozen=True)
class SeededRandom(FamilyNode):
    """Fixed (h-independent) random matrix, reproducible from the seed.

    Entries are ``scale * (x + iy)`` with x, y independent standard normals
    drawn from ``numpy.random.default_rng(seed)``.
    """

    size: int
    seed: int
    scale_factor: float = 1.0
    _matrix: ComplexMatrix = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.size < 1:
            raise BadParameter("random node needs size >= 1")
        rng = np.random.default_rng(self.seed)
        a = rng.standard_normal((self.size, self.size)) + 1j * rng.standard_normal(
            (self.size, self.size)
        )
        object.__setattr__(self, "_matrix", ComplexMatrix(self.scale_factor * a))

    @property
    def dim(self) -> int:
        return self.size

    def _eval(self, h: float) -> np.ndarray:
        return self._matrix.array


@dataclass(frozen=True)
class FamilySpec:
    """A recipe node plus its (validated) dimension."""

    dim: int
    node: FamilyNode

    def __post_init__(self) -> None:
        if self.dim != self.node.dim:
            raise DimensionMismatch(
                f"declared dim {self.dim} does not match node dim {self.node.dim}"
            )


def family_eval(spec: FamilySpec, h: float) -> ComplexMatrix:
    """Evaluate the family at a parameter value in (0, 1]."""
    return ComplexMatrix(family_eval_array(spec, h))


def family_eval_array(spec: FamilySpec, h: float) -> np.ndarray:
    """Like :func:`family_eval` but returns the raw array. Do not mutate it."""
    if not 0.0 < h <= 1.0:
        raise BadParameter(f"h must lie in (0, 1], got {h!r}")
    return spec.node._eval(float(h))


# Convenience constructors


def constant_family(matrix) -> FamilySpec:
    m = matrix if isinstance(matrix, ComplexMatrix) else ComplexMatrix(matrix)
    return FamilySpec(m.dim, Constant(m))


def jordan_family(dim: int, eigenvalue: complex) -> FamilySpec:
    return FamilySpec(dim, Jordan(dim, complex(eigenvalue)))


def diag_family(entries: Sequence[str]) -> FamilySpec:
    node = DiagExpr(tuple(entries))
    return FamilySpec(node.dim, node)


def h_scaled(spec: FamilySpec) -> FamilySpec:
    return FamilySpec(spec.dim, HScaled(spec.node))


def family_sum(*specs: FamilySpec) -> FamilySpec:
    node = Sum(tuple(s.node for s in specs))
    return FamilySpec(node.dim, node)


def family_product(*specs: FamilySpec) -> FamilySpec:
    node = Product(tuple(s.node for s in specs))
    return FamilySpec(node.dim, node)


def random_family(dim: int, seed: int, scale: float = 1.0) -> FamilySpec:
    return FamilySpec(dim, SeededRandom(dim, seed, scale))


# ---------------------------------------------------------------------------
# JSON form: {"dim": n, "node": {"kind": ..., ...}}


def _complex_from_json(value: object, path: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        re_part = value.get("re", 0.0)
        im_part = value.get("im", 0.0)
        if isinstance(re_part, (int, float)) and isinstance(im_part, (int, float)):
            return complex(re_part, im_part)
    raise SchemaError("expected a number or {re, im} object", path)


def _complex_to_json(value: complex) -> dict:
    return {"re": float(value.real), "im": float(value.imag)}


def _require(data: dict, key: str, path: str) -> object:
    if key not in data:
        raise SchemaError(f"missing key {key!r}", path)
    return data[key]


def _node_from_dict(data: object, path: str) -> FamilyNode:
    if not isinstance(data, dict):
        raise SchemaError("expected a node object", path)
    kind = _require(data, "kind", path)
    if kind == "constant":
        return Constant(matrix_from_dict(_require(data, "matrix", path), f"{path}/matrix"))
    if kind == "jordan":
        size = _require(data, "dim", path)
        if not isinstance(size, int) or size < 1:
            raise SchemaError("dim must be a positive integer", f"{path}/dim")
        eig = _complex_from_json(_require(data, "eigenvalue", path), f"{path}/eigenvalue")
        return Jordan(size, eig)
    if kind == "diag_expr":
        entries = _require(data, "entries", path)
        if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
            raise SchemaError("entries must be a list of strings", f"{path}/entries")
        try:
            return DiagExpr(tuple(entries))
        except Exception as exc:
            raise SchemaError(f"bad entry expression: {exc}", f"{path}/entries") from exc
    if kind == "h_scaled":
        return HScaled(_node_from_dict(_require(data, "inner", path), f"{path}/inner"))
    if kind in ("sum", "product"):
        children = _require(data, "children", path)
        if not isinstance(children, list) or not children:
            raise SchemaError("children must be a nonempty list", f"{path}/children")
        nodes = tuple(
            _node_from_dict(child, f"{path}/children/{i}") for i, child in enumerate(children)
        )
        try:
            return Sum(nodes) if kind == "sum" else Product(nodes)
        except DimensionMismatch as exc:
            raise SchemaError(str(exc), f"{path}/children") from exc
    if kind == "random":
        size = _require(data, "dim", path)
        seed = _require(data, "seed", path)
        scale = data.get("scale", 1.0)
        if not isinstance(size, int) or size < 1:
            raise SchemaError("dim must be a positive integer", f"{path}/dim")
        if not isinstance(seed, int):
            raise SchemaError("seed must be an integer", f"{path}/seed")
        if not isinstance(scale, (int, float)):
            raise SchemaError("scale must be a number", f"{path}/scale")
        return SeededRandom(size, seed, float(scale))
    raise SchemaError(f"unknown node kind {kind!r}", f"{path}/kind")


def family_from_dict(data: object) -> FamilySpec:
    if not isinstance(data, dict):
        raise SchemaError("expected a family object", "")
    dim = _require(data, "dim", "")
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError("dim must be a positive integer", "/dim")
    node = _node_from_dict(_require(data, "node", ""), "/node")
    if node.dim != dim:
        raise SchemaError(f"node dimension {node.dim} does not match dim {dim}", "/dim")
    return FamilySpec(dim, node)


def _node_to_dict(node: FamilyNode) -> dict:
    if isinstance(node, Constant):
        return {"kind": "constant", "matrix": matrix_to_dict(node.matrix)}
    if isinstance(node, Jordan):
        return {"kind": "jordan", "dim": node.size, "eigenvalue": _complex_to_json(node.eigenvalue)}
    if isinstance(node, DiagExpr):
        return {"kind": "diag_expr", "entries": list(node.entries)}
    if isinstance(node, HScaled):
        return {"kind": "h_scaled", "inner": _node_to_dict(node.inner)}
    if isinstance(node, Sum):
        return {"kind": "sum", "children": [_node_to_dict(c) for c in node.children]}
    if isinstance(node, Product):
        return {"kind": "product", "children": [_node_to_dict(c) for c in node.children]}
    if isinstance(node, SeededRandom):
        return {
            "kind": "random",
            "dim": node.size,
            "seed": node.seed,
            "scale": float(node.scale_factor),
        }
    raise BadParameter(f"node {type(node).__name__} has no JSON form")


def family_to_dict(spec: FamilySpec) -> dict:
    return {"dim": spec.dim, "node": _node_to_dict(spec.node)}
