"""Gauss-Legendre rules and the moment vector m_k = I[phi_k]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Interval, WeightFn
from .dop import DopBasis, eval_dop_all
from .errors import InvalidArgument, NumericalError

DEFAULT_J = 200
NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100


@dataclass(frozen=True)
class GaussLegendreRule:
    J: int
    interval: Interval
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=64)
def _reference_gauss_legendre(J: int):
    """Nodes/weights on [-1, 1] by Newton's method on P_J."""
    i = np.arange(1, J + 1)
    x = -np.cos(np.pi * (i - 0.25) / (J + 0.5))  # ascending Chebyshev-like guesses
    for _ in range(NEWTON_MAXITER):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(1, J):
            p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
        # p1 = P_J(x), p0 = P_{J-1}(x)
        dp = J * (x * p1 - p0) / (x**2 - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            break
    else:
        raise NumericalError(f"Gauss-Legendre Newton iteration did not converge for J={J}")
    # derivative at the converged roots
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(1, J):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    dp = J * (x * p1 - p0) / (x**2 - 1.0)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    # enforce exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if J % 2:
        x[J // 2] = 0.0
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(J: int, interval: Interval = Interval()) -> GaussLegendreRule:
    """J-point Gauss-Legendre rule on ``interval``; exact up to degree 2J-1."""
    if J < 1:
        raise InvalidArgument(f"J must be >= 1, got {J}")
    t, w = _reference_gauss_legendre(int(J))
    half = 0.5 * interval.length
    return GaussLegendreRule(J, interval, interval.from_reference(t), half * w)


@dataclass(frozen=True)
class MomentVector:
    d: int
    values: np.ndarray
    J_used: int


def compute_moments(basis: DopBasis, w: WeightFn, J: int = DEFAULT_J) -> MomentVector:
    """m_k ~ sum_j w_j^GL phi_k(x_j^GL) omega(x_j^GL)."""
    gl = gauss_legendre(J, basis.interval)
    omega = w(gl.nodes)
    phi = eval_dop_all(basis, gl.nodes)
    values = phi @ (gl.weights * omega)
    values.setflags(write=False)
    return MomentVector(basis.degree, values, J)
