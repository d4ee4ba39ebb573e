"""Intervals, weight/test functions, node sets and quadrature rules.

Everything here is immutable: node arrays are copied and flagged read-only
on construction so a rule can be shared between threads or cached.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError, InvalidArgument, NumericalError

# Interior nodes of a scattered set must stay at least this far apart.
MIN_NODE_GAP = 1e-12
MAX_REDRAWS = 100


@dataclass(frozen=True)
class Interval:
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise InvalidArgument(f"interval endpoints must be finite, got [{a}, {b}]")
        if not a < b:
            raise InvalidArgument(f"interval needs a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def to_reference(self, x):
        """Affine map [a, b] -> [-1, 1]."""
        return (2.0 * np.asarray(x, dtype=float) - self.a - self.b) / (self.b - self.a)

    def from_reference(self, t):
        """Affine map [-1, 1] -> [a, b]."""
        return 0.5 * (self.b - self.a) * np.asarray(t, dtype=float) + self.midpoint


def _finite_eval(func, x, what):
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        y = np.asarray(func(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)] if x.ndim else x
        raise EvaluationError(f"{what} is not finite at x = {np.atleast_1d(bad)[:5]}")
    return y


class WeightKind(enum.Enum):
    ONE = "one"
    ONE_MINUS_X2 = "one_minus_x2"
    SQRT_ONE_MINUS_X2 = "sqrt_one_minus_x2"
    X_SQRT_ONE_MINUS_X3 = "x_sqrt_one_minus_x3"
    COS_20PI_X = "cos20pix"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightFn:
    """A (possibly sign-changing) weight function omega on [a, b].

    Calling the object evaluates it on scalars or arrays and raises
    :class:`EvaluationError` if any value is non-finite.
    """

    kind: WeightKind
    func: Callable = field(repr=False, compare=False)
    label: str = ""

    def __call__(self, x):
        return _finite_eval(self.func, x, f"weight function {self.name!r}")

    @property
    def name(self) -> str:
        return self.label or self.kind.value

    def check_interval(self, interval: Interval) -> None:
        if self.kind is WeightKind.X_SQRT_ONE_MINUS_X3 and interval.b > 1.0:
            raise InvalidArgument("x*sqrt(1-x^3) is only real-valued for b <= 1")
        if self.kind is WeightKind.SQRT_ONE_MINUS_X2 and (interval.a < -1.0 or interval.b > 1.0):
            raise InvalidArgument("sqrt(1-x^2) is only real-valued on a subset of [-1, 1]")

    @classmethod
    def custom(cls, func: Callable, label: str = "custom") -> "WeightFn":
        return cls(WeightKind.CUSTOM, func, label)

    @classmethod
    def from_expression(cls, text: str) -> "WeightFn":
        from .expr import compile_expression

        return cls(WeightKind.CUSTOM, compile_expression(text), f"expr:{text}")


WEIGHTS = {
    "one": WeightFn(WeightKind.ONE, lambda x: np.ones_like(x)),
    "one_minus_x2": WeightFn(WeightKind.ONE_MINUS_X2, lambda x: 1.0 - x**2),
    "sqrt_one_minus_x2": WeightFn(
        WeightKind.SQRT_ONE_MINUS_X2, lambda x: np.sqrt(np.maximum(1.0 - x**2, 0.0))
    ),
    "x_sqrt_one_minus_x3": WeightFn(
        WeightKind.X_SQRT_ONE_MINUS_X3, lambda x: x * np.sqrt(1.0 - x**3)
    ),
    "cos20pix": WeightFn(WeightKind.COS_20PI_X, lambda x: np.cos(20.0 * np.pi * x)),
}


def get_weight(spec: str) -> WeightFn:
    """Look up a catalog weight, or compile ``expr:<expression>``."""
    if spec in WEIGHTS:
        return WEIGHTS[spec]
    if spec.startswith("expr:"):
        return WeightFn.from_expression(spec[len("expr:"):])
    raise InvalidArgument(f"unknown weight {spec!r}; choose from {sorted(WEIGHTS)} or expr:...")


class TestKind(enum.Enum):
    ABS_X3 = "absx3"
    EXP_X = "expx"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TestFunction:
    """An integrand f applied by a quadrature rule."""

    __test__ = False  # keep pytest from collecting this class

    kind: TestKind
    func: Callable = field(repr=False, compare=False)
    label: str = ""

    def __call__(self, x):
        return _finite_eval(self.func, x, f"test function {self.name!r}")

    @property
    def name(self) -> str:
        return self.label or self.kind.value

    @classmethod
    def custom(cls, func: Callable, label: str = "custom") -> "TestFunction":
        return cls(TestKind.CUSTOM, func, label)


TEST_FUNCTIONS = {
    "absx3": TestFunction(TestKind.ABS_X3, lambda x: np.abs(x) ** 3),
    "expx": TestFunction(TestKind.EXP_X, np.exp),
}


def sign(x):
    """Sign with sign(0) = +1; works on scalars and arrays."""
    if np.ndim(x) == 0:
        return -1.0 if x < 0 else 1.0
    return np.where(np.asarray(x) < 0, -1.0, 1.0)


@dataclass(frozen=True)
class NodeSet:
    interval: Interval
    nodes: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float).ravel()
        if x.size < 1:
            raise InvalidArgument("a node set needs at least one node")
        if not np.all(np.isfinite(x)):
            raise InvalidArgument("nodes must be finite")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgument("nodes must be strictly increasing")
        if x[0] < self.interval.a or x[-1] > self.interval.b:
            raise InvalidArgument(f"nodes leave [{self.interval.a}, {self.interval.b}]")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    def __len__(self):
        return self.nodes.size

    @property
    def N(self) -> int:
        return self.nodes.size

    def __eq__(self, other):
        if not isinstance(other, NodeSet):
            return NotImplemented
        return self.interval == other.interval and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash((self.interval, self.nodes.tobytes()))


def make_equidistant(interval: Interval, N: int) -> NodeSet:
    if N < 2:
        raise InvalidArgument(f"equidistant nodes need N >= 2, got {N}")
    n = np.arange(N, dtype=float)
    x = interval.a + interval.length * n / (N - 1)
    x[-1] = interval.b
    return NodeSet(interval, x)


def make_scattered(interval: Interval, N: int, seed: int) -> NodeSet:
    """Equidistant nodes with Gaussian jitter on the interior points.

    The standard deviation is ``(b - a) / 2 / (4 N)``, i.e. ``1 / (4 N)`` on
    [-1, 1]. Endpoints stay pinned. A draw that leaves the open interval or
    lands within ``MIN_NODE_GAP`` of another node is redrawn, at most
    ``MAX_REDRAWS`` times per node. Draws come from numpy's PCG64 stream, so
    a given ``seed`` reproduces the same nodes.
    """
    if N < 2:
        raise InvalidArgument(f"scattered nodes need N >= 2, got {N}")
    base = make_equidistant(interval, N).nodes
    x = base.copy()
    if N == 2:
        return NodeSet(interval, x)
    rng = np.random.Generator(np.random.PCG64(seed))
    sd = 0.5 * interval.length / (4.0 * N)
    x[1:-1] = base[1:-1] + sd * rng.standard_normal(N - 2)
    for n in range(1, N - 1):
        for _ in range(MAX_REDRAWS):
            others = np.delete(x, n)
            ok = interval.a < x[n] < interval.b and np.min(np.abs(others - x[n])) > MIN_NODE_GAP
            if ok:
                break
            x[n] = base[n] + sd * rng.standard_normal()
        else:
            raise NumericalError(f"could not place scattered node {n} after {MAX_REDRAWS} draws")
    return NodeSet(interval, np.sort(x))


class Method(enum.Enum):
    LS = "ls"
    NNLS = "nnls"
    TRAPEZOID = "trap"


@dataclass(frozen=True)
class QuadRule:
    """Nodes plus weights; ``weight`` is only used to check NNLS sign-consistency."""

    nodeset: NodeSet
    weights: np.ndarray
    method: Method
    target_degree: Optional[int] = None
    exactness_residual: Optional[float] = None
    weight: Optional[WeightFn] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size != self.nodeset.N:
            raise InvalidArgument(f"{w.size} weights for {self.nodeset.N} nodes")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.method is Method.NNLS and self.weight is not None:
            target = sign(self.weight(self.nodeset.nodes))
            bad = (w != 0) & (sign(w) != target)
            if np.any(bad):
                raise InvalidArgument(f"NNLS rule is not sign-consistent at nodes {np.flatnonzero(bad)}")

    @property
    def nodes(self) -> np.ndarray:
        return self.nodeset.nodes

    @property
    def N(self) -> int:
        return self.nodeset.N


def apply_rule(rule: QuadRule, f) -> float:
    """Q_N[f] = sum_n w_n f(x_n)."""
    values = f(rule.nodes) if isinstance(f, (TestFunction, WeightFn)) else _finite_eval(
        f, rule.nodes, "integrand"
    )
    return float(np.dot(rule.weights, values))
