"""LS and sign-consistent NNLS quadrature weights.

With an orthonormal DOP basis the exactness matrix A satisfies A A^T = I,
so the minimal-norm solution of A w = m is simply w = A^T m. The NNLS rule
instead solves min ||A S u - m|| over u >= 0 with S = diag(sign omega(x_n))
and returns w = S u, which has the sign of omega at every node by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Method, QuadRule, WeightFn, sign
from .dop import DopBasis
from .errors import InvalidArgument, NnlsConvergenceError
from .moments import MomentVector

# ||A w - m||_2 at or below this counts as exact.
EXACTNESS_TOL = 1e-13


@dataclass(frozen=True)
class NnlsSolution:
    x: np.ndarray
    passive_set: tuple
    residual_norm: float
    iterations: int


def _check_dims(basis: DopBasis, moments: MomentVector):
    if moments.d != basis.degree or moments.values.size != basis.degree + 1:
        raise InvalidArgument(
            f"basis has degree {basis.degree} but moments have d={moments.d} "
            f"({moments.values.size} values)"
        )


def exactness_residual(basis: DopBasis, moments: MomentVector, weights) -> float:
    _check_dims(basis, moments)
    w = np.asarray(weights, dtype=float)
    if w.shape != (basis.nodeset.N,):
        raise InvalidArgument(f"expected {basis.nodeset.N} weights, got shape {w.shape}")
    return float(np.linalg.norm(basis.nodal_values @ w - moments.values))


def ls_weights(basis: DopBasis, moments: MomentVector) -> QuadRule:
    """Minimal Euclidean-norm weights with degree of exactness d."""
    _check_dims(basis, moments)
    w = basis.nodal_values.T @ moments.values
    return QuadRule(
        basis.nodeset,
        w,
        Method.LS,
        target_degree=basis.degree,
        exactness_residual=exactness_residual(basis, moments, w),
    )


def default_nnls_tol(B) -> float:
    M, N = B.shape
    return 10.0 * np.finfo(float).eps * np.linalg.norm(B, 1) * max(M, N)


def lawson_hanson(B, c, tol=None, maxiter=None) -> NnlsSolution:
    """Solve min ||B x - c||_2 subject to x >= 0 (Lawson & Hanson, ch. 23).

    Parameters
    ----------
    B : array_like, shape (M, N)
    c : array_like, shape (M,)
    tol : float, optional
        Dual-feasibility tolerance on the gradient ``B^T (c - B x)``.
        Defaults to ``10 * eps * ||B||_1 * max(M, N)``.
    maxiter : int, optional
        Cap on inner (passive-set) solves, default ``3 * N``.

    Notes
    -----
    When several indices share the largest gradient entry the lowest index
    enters the passive set. Passive-set subproblems use an SVD-based
    least-squares solve, never the normal equations.
    """
    B = np.asarray(B, dtype=float)
    c = np.asarray(c, dtype=float).ravel()
    if B.ndim != 2 or B.shape[0] != c.size:
        raise InvalidArgument(f"B has shape {B.shape}, c has {c.size} entries")
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(c))):
        raise InvalidArgument("B and c must be finite")
    M, N = B.shape
    if tol is None:
        tol = default_nnls_tol(B)
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    if maxiter is None:
        maxiter = 3 * N

    x = np.zeros(N)
    passive = np.zeros(N, dtype=bool)
    blocked = np.zeros(N, dtype=bool)
    w = B.T @ (c - B @ x)
    iterations = 0

    def snapshot():
        idx = tuple(int(i) for i in np.flatnonzero(passive))
        return NnlsSolution(x.copy(), idx, float(np.linalg.norm(B @ x - c)), iterations)

    while True:
        candidates = ~passive & ~blocked & (w > tol)
        if not np.any(candidates):
            break
        t = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[t] = True
        first = True
        while True:
            iterations += 1
            if iterations > maxiter:
                raise NnlsConvergenceError(
                    f"Lawson-Hanson exceeded {maxiter} inner iterations", snapshot()
                )
            idx = np.flatnonzero(passive)
            z = np.zeros(N)
            z[idx] = np.linalg.lstsq(B[:, idx], c, rcond=None)[0]
            if first and z[t] <= 0:
                # rounding made the entering column useless; skip it until x moves
                passive[t] = False
                blocked[t] = True
                break
            first = False
            if np.all(z[idx] > 0):
                x = z
                blocked[:] = False
                break
            neg = idx[z[idx] <= 0]
            alpha = np.min(x[neg] / (x[neg] - z[neg]))
            x = x + alpha * (z - x)
            passive &= x > 0
            x[~passive] = 0.0
        w = B.T @ (c - B @ x)

    return snapshot()


def nnls_weights(
    basis: DopBasis, moments: MomentVector, w: WeightFn, tol=None
) -> QuadRule:
    """Sign-consistent weights with approximate degree of exactness d."""
    _check_dims(basis, moments)
    s = sign(w(basis.nodeset.nodes))
    B = basis.nodal_values * s[None, :]
    sol = lawson_hanson(B, moments.values, tol=tol)
    weights = s * sol.x
    return QuadRule(
        basis.nodeset,
        weights,
        Method.NNLS,
        target_degree=basis.degree,
        exactness_residual=exactness_residual(basis, moments, weights),
        weight=w,
    )
