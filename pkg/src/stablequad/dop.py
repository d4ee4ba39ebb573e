"""Discrete orthonormal polynomials (DOPs) on a node set.

The basis is built by modified Gram-Schmidt on Legendre polynomials mapped
to [a, b], with one re-orthogonalisation sweep. Alongside the nodal values
we carry the lower-triangular coefficient matrix expressing each phi_k in
the Legendre basis, which lets us evaluate phi_k anywhere in [a, b].

For equidistant nodes the DOPs are known in closed form (normalised
discrete Chebyshev polynomials, the alpha = beta = 0 Hahn family);
:func:`discrete_chebyshev_eval` implements that as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Interval, NodeSet
from .errors import DegeneracyError, InvalidArgument

DEGENERACY_TOL = 1e-13


def legendre_values(t, d: int) -> np.ndarray:
    """Legendre polynomials P_0..P_d at ``t`` (in [-1, 1]); shape (d+1, len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    P = np.empty((d + 1, t.size))
    P[0] = 1.0
    if d >= 1:
        P[1] = t
    for k in range(1, d):
        P[k + 1] = ((2 * k + 1) * t * P[k] - k * P[k - 1]) / (k + 1)
    return P


def nodal_inner_product(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InvalidArgument(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


@dataclass(frozen=True)
class DopBasis:
    """phi_0..phi_d orthonormal w.r.t. sum_n f(x_n) g(x_n).

    Attributes
    ----------
    nodal_values : ndarray, shape (d+1, N)
        ``nodal_values[k, n] = phi_k(x_n)``; this is the exactness matrix A.
    coeffs : ndarray, shape (d+1, d+1)
        Lower triangular, positive diagonal. Row k holds the Legendre
        coefficients of phi_k on [a, b].
    """

    degree: int
    nodeset: NodeSet
    nodal_values: np.ndarray
    coeffs: np.ndarray

    @property
    def interval(self) -> Interval:
        return self.nodeset.interval

    def gram(self) -> np.ndarray:
        return self.nodal_values @ self.nodal_values.T


def build_dop_basis(nodeset: NodeSet, d: int) -> DopBasis:
    N = nodeset.N
    if d < 0:
        raise InvalidArgument(f"degree must be >= 0, got {d}")
    if N <= d:
        raise InvalidArgument(f"need more nodes than the degree (N > d), got N={N}, d={d}")
    V = legendre_values(nodeset.interval.to_reference(nodeset.nodes), d)
    Q = np.empty((d + 1, N))
    C = np.zeros((d + 1, d + 1))
    for k in range(d + 1):
        q = V[k].copy()
        c = np.zeros(d + 1)
        c[k] = 1.0
        for _ in range(2):  # second sweep restores orthogonality lost to rounding
            for j in range(k):
                r = np.dot(Q[j], q)
                q -= r * Q[j]
                c -= r * C[j]
        norm = np.linalg.norm(q)
        if norm < DEGENERACY_TOL:
            raise DegeneracyError(f"Gram-Schmidt breakdown at degree {k} (norm {norm:.3e})")
        Q[k] = q / norm
        C[k] = c / norm
    Q.setflags(write=False)
    C.setflags(write=False)
    return DopBasis(d, nodeset, Q, C)


def eval_dop(basis: DopBasis, k: int, points) -> np.ndarray:
    """phi_k at arbitrary ``points`` of [a, b], via the stored coefficients."""
    if not 0 <= k <= basis.degree:
        raise InvalidArgument(f"k must lie in [0, {basis.degree}], got {k}")
    t = basis.interval.to_reference(points)
    return basis.coeffs[k, : k + 1] @ legendre_values(t, k)


def eval_dop_all(basis: DopBasis, points) -> np.ndarray:
    """All phi_0..phi_d at ``points``; shape (d+1, len(points))."""
    t = basis.interval.to_reference(points)
    return basis.coeffs @ legendre_values(t, basis.degree)


def h_k(N: int, k: int) -> float:
    """Squared norm of the k-th discrete Chebyshev polynomial on 0..N-1.

    Equals (N+k)! (N-k-1)! / ((2k+1) ((N-1)!)^2); evaluated with lgamma
    because the factorials overflow around N = 170.
    """
    if not 0 <= k <= N - 1:
        raise InvalidArgument(f"need 0 <= k <= N-1, got N={N}, k={k}")
    log_h = (
        math.lgamma(N + k + 1)
        + math.lgamma(N - k)
        - math.log(2 * k + 1)
        - 2.0 * math.lgamma(N)
    )
    return math.exp(log_h)


def hahn_chebyshev(N: int, k: int, t):
    """Unnormalised discrete Chebyshev polynomial Q_k(t; 0, 0, N-1) via its 3F2 sum."""
    t = np.asarray(t, dtype=float)
    total = np.ones_like(t)
    term = np.ones_like(t)
    for j in range(k):
        # ratio of consecutive terms of sum_j (-k)_j (k+1)_j (-t)_j / ((1)_j (1-N)_j j!)
        term = term * (-k + j) * (k + 1 + j) * (-t + j) / ((1 + j) * (1 - N + j) * (j + 1))
        total = total + term
    return total


def discrete_chebyshev_eval(N: int, k: int, interval: Interval, x):
    """Normalised discrete Chebyshev phi_k on [a, b], node x_n <-> grid index n-1."""
    if not 0 <= k <= N - 1:
        raise InvalidArgument(f"need 0 <= k <= N-1, got N={N}, k={k}")
    t = (N - 1) * (np.asarray(x, dtype=float) - interval.a) / interval.length
    return hahn_chebyshev(N, k, t) / math.sqrt(h_k(N, k))


def n_of_d(d: int) -> int:
    """Smallest N from which ||phi_k||_inf <= 1/sqrt(h_k) holds for all k <= d."""
    if d < 0:
        raise InvalidArgument(f"d must be >= 0, got {d}")
    num = (2 * d - 1) ** 2 + 1
    return (num + 1) // 2


def k_of_n(N: int) -> float:
    """Largest degree covered by the sup-norm bound on N equidistant nodes."""
    if N < 1:
        raise InvalidArgument(f"N must be >= 1, got {N}")
    return 0.5 * (1.0 + math.sqrt(2 * N - 1))


def sup_norm_constant(basis: DopBasis, grid_size: int = 10_001) -> float:
    """Empirical C with max_k ||phi_k||_inf^2 <= C / N, sampled on a uniform grid.

    For non-equidistant nodes no such bound is known in closed form; this
    estimate is a diagnostic only.
    """
    grid = np.linspace(basis.interval.a, basis.interval.b, grid_size)
    sup = np.max(np.abs(eval_dop_all(basis, grid)), axis=1)
    return float(basis.nodeset.N * np.max(sup**2))
