"""Stability, sign-consistency and accuracy measures, plus the d-vs-N study."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .core import (
    Interval,
    Method,
    NodeSet,
    QuadRule,
    WeightFn,
    apply_rule,
    make_equidistant,
    sign,
)
from .dop import build_dop_basis
from .errors import InvalidArgument, NnlsConvergenceError, SearchFailure
from .moments import DEFAULT_J, compute_moments, gauss_legendre
from .solvers import EXACTNESS_TOL, ls_weights, nnls_weights

K_OMEGA_PANELS = 200
K_OMEGA_J = 50


@dataclass(frozen=True)
class StabilityReport:
    kappa: float
    K_omega: float

    @property
    def difference(self) -> float:
        return self.kappa - self.K_omega


def kappa(weights) -> float:
    return float(np.sum(np.abs(np.asarray(weights, dtype=float))))


def _sign_change_breaks(w: WeightFn, edges: np.ndarray) -> list:
    values = w(edges)
    breaks = []
    for lo, hi, vlo, vhi in zip(edges[:-1], edges[1:], values[:-1], values[1:]):
        if vlo * vhi < 0:
            breaks.append(optimize.brentq(lambda t: float(w(t)), lo, hi, xtol=1e-15, rtol=1e-15))
    return breaks


def k_omega(w: WeightFn, interval: Interval = Interval(), J: int = K_OMEGA_J) -> float:
    """K_omega = int_a^b |omega(x)| dx by composite Gauss-Legendre.

    The 200 uniform panels are additionally cut at every sign change of
    omega detected on the panel edges, so each panel integrates a smooth
    function.
    """
    if J < 1:
        raise InvalidArgument(f"J must be >= 1, got {J}")
    edges = np.linspace(interval.a, interval.b, K_OMEGA_PANELS + 1)
    edges = np.unique(np.concatenate([edges, _sign_change_breaks(w, edges)]))
    ref = gauss_legendre(J)
    t = np.asarray(ref.nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * t[None, :] + 0.5 * (hi + lo)
    vals = np.abs(w(x.ravel())).reshape(x.shape)
    return float(np.sum(0.5 * (hi - lo) * vals * ref.weights[None, :]))


def stability_report(rule: QuadRule, w: WeightFn, J: int = K_OMEGA_J) -> StabilityReport:
    return StabilityReport(kappa(rule.weights), k_omega(w, rule.nodeset.interval, J))


def sign_consistency_measure(rule: QuadRule, w: WeightFn) -> float:
    """(1/N) sum |sign(w_n) - sign(omega(x_n))|; zero weights count as consistent."""
    weights = rule.weights
    mismatch = np.abs(sign(weights) - sign(w(rule.nodes)))
    mismatch[weights == 0] = 0.0
    return float(np.mean(mismatch))


def trapezoid_rule(nodeset: NodeSet, w: WeightFn) -> QuadRule:
    """Composite trapezoid for int f*omega, folded into per-node weights."""
    x = nodeset.nodes
    if x.size < 2:
        raise InvalidArgument("the trapezoid rule needs N >= 2")
    h = np.diff(x)
    base = np.zeros_like(x)
    base[:-1] += 0.5 * h
    base[1:] += 0.5 * h
    return QuadRule(nodeset, base * w(x), Method.TRAPEZOID)


def integration_error(rule: QuadRule, f, reference: float) -> float:
    return abs(apply_rule(rule, f) - reference)


@lru_cache(maxsize=256)
def _cached_reference(f_name, w_name, a, b, f, w):
    return _adaptive_integral(lambda x: float(f(x)) * float(w(x)), a, b, w)


def _adaptive_integral(g, a, b, w=None):
    points = [p for p in (0.0,) if a < p < b]
    if w is not None:
        edges = np.linspace(a, b, K_OMEGA_PANELS + 1)
        points += _sign_change_breaks(w, edges)
    cuts = sorted(set([a, b] + points))
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(g, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=500)
        total += val
    return total


def reference_integral(f, w: WeightFn, interval: Interval = Interval()) -> float:
    """High-accuracy I[f] = int f omega by adaptive Gauss-Kronrod (QUADPACK).

    Sub-intervals are cut at 0 (kink of |x|^3) and at sign changes of omega.
    Catalog pairs are cached by name.
    """
    from .core import TestKind, WeightKind

    f_kind = getattr(f, "kind", None)
    if f_kind is not None and f_kind is not TestKind.CUSTOM and w.kind is not WeightKind.CUSTOM:
        return _cached_reference(f.name, w.name, interval.a, interval.b, f, w)
    return _adaptive_integral(lambda x: float(f(x)) * float(w(x)), interval.a, interval.b, w)


def build_rule(
    nodeset: NodeSet, d: int, w: WeightFn, method: Method, J: int = DEFAULT_J
) -> QuadRule:
    """Convenience pipeline: DOP basis -> moments -> LS/NNLS weights (or trapezoid)."""
    if method is Method.TRAPEZOID:
        return trapezoid_rule(nodeset, w)
    basis = build_dop_basis(nodeset, d)
    moments = compute_moments(basis, w, J)
    if method is Method.LS:
        return ls_weights(basis, moments)
    return nnls_weights(basis, moments, w)


def _scan_nodeset(interval: Interval, N: int) -> NodeSet:
    # A single node: the position is irrelevant for d = 0, use the midpoint.
    if N == 1:
        return NodeSet(interval, [interval.midpoint])
    return make_equidistant(interval, N)


@dataclass
class MinimalNCriterion:
    kappa_factor: float = 2.0
    exactness_tol: float = EXACTNESS_TOL
    cap: int = 5000
    confirm_window: int = 0
    J: int = DEFAULT_J
    interval: Interval = field(default_factory=Interval)


def criterion_holds(rule: QuadRule, K: float, method: Method, crit: MinimalNCriterion) -> bool:
    ok = kappa(rule.weights) <= crit.kappa_factor * K
    if method is Method.NNLS:
        ok = ok and rule.exactness_residual <= crit.exactness_tol
    return bool(ok)


def minimal_stable_n(
    d: int, w: WeightFn, method: Method, criterion: Optional[MinimalNCriterion] = None
) -> int:
    """Smallest equidistant N >= d+1 meeting the stability (and exactness) criterion.

    LS needs kappa <= 2 K_omega; NNLS additionally needs an exactness
    residual at or below the tolerance. With ``confirm_window = W > 0`` the
    next W values of N must satisfy the criterion as well.
    """
    if d < 0:
        raise InvalidArgument(f"d must be >= 0, got {d}")
    if method is Method.TRAPEZOID:
        raise InvalidArgument("minimal_stable_n supports LS and NNLS only")
    crit = criterion or MinimalNCriterion()
    K = k_omega(w, crit.interval)
    profile = []

    def holds(N):
        try:
            rule = build_rule(_scan_nodeset(crit.interval, N), d, w, method, crit.J)
        except NnlsConvergenceError:
            profile.append((N, float("nan")))
            return False
        profile.append((N, kappa(rule.weights)))
        return criterion_holds(rule, K, method, crit)

    N = d + 1
    while N <= crit.cap:
        if holds(N) and all(holds(N + i) for i in range(1, crit.confirm_window + 1)):
            return N
        N += 1
    raise SearchFailure(
        f"no N <= {crit.cap} satisfies the criterion for d={d}, weight {w.name}", profile[-50:]
    )


@dataclass(frozen=True)
class PowerLawFit:
    C: float
    s: float
    samples: tuple
    residual: float
    space: str = "linear"


def power_law_fit(samples, space: str = "linear") -> PowerLawFit:
    """Fit N = C d^s to ``(d, N)`` samples.

    ``space="linear"`` minimises sum (N - C d^s)^2 directly (d = 0 is a
    valid sample there); ``space="log"`` is ordinary least squares on
    log N = log C + s log d and drops d = 0. The log-space estimate seeds
    the linear-space Gauss-Newton iteration. ``residual`` is the 2-norm of
    the misfit in the chosen space.
    """
    if space not in ("linear", "log"):
        raise InvalidArgument(f"space must be 'linear' or 'log', got {space!r}")
    pts = [(float(d), float(n)) for d, n in samples]
    usable = [(d, n) for d, n in pts if d >= 1]
    if len(usable) < 2 or len({d for d, _ in usable}) < 2:
        raise InvalidArgument("power-law fit needs at least 2 samples with distinct d >= 1")
    ld = np.log([p[0] for p in usable])
    ln = np.log([p[1] for p in usable])
    X = np.column_stack([np.ones_like(ld), ld])
    coef, *_ = np.linalg.lstsq(X, ln, rcond=None)
    C, s = float(np.exp(coef[0])), float(coef[1])
    if space == "log":
        resid = float(np.linalg.norm(X @ coef - ln))
        return PowerLawFit(C, s, tuple(samples), resid, space)
    d = np.array([p[0] for p in pts])
    n = np.array([p[1] for p in pts])
    with warnings.catch_warnings():
        # exact fits leave the covariance undefined; we only use the optimum
        warnings.simplefilter("ignore", optimize.OptimizeWarning)
        (C, s), _ = optimize.curve_fit(lambda d, C, s: C * d**s, d, n, p0=(C, s), maxfev=10_000)
    resid = float(np.linalg.norm(C * d**s - n))
    return PowerLawFit(float(C), float(s), tuple(samples), resid, space)


def _minimal_n_task(args):
    from .core import get_weight

    weight_spec, method_value, d, crit = args
    try:
        return d, minimal_stable_n(d, get_weight(weight_spec), Method(method_value), crit), ""
    except SearchFailure as exc:
        return d, None, str(exc)


def ratio_study(weight_spec: str, method: Method, d_values, criterion=None, jobs: int = 1):
    """Minimal N for each d (catalog name or ``expr:`` weight), plus the power-law fit.

    Returns ``(rows, fit)`` where rows are ``(d, N or None, error)`` sorted by
    d and ``fit`` is None when fewer than two searches succeeded.
    """
    crit = criterion or MinimalNCriterion()
    tasks = [(weight_spec, method.value, int(d), crit) for d in d_values]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_minimal_n_task, tasks))
    else:
        rows = [_minimal_n_task(t) for t in tasks]
    rows.sort(key=lambda r: r[0])
    ok = [(d, n) for d, n, _ in rows if n is not None]
    try:
        fit = power_law_fit(ok)
    except InvalidArgument:
        fit = None
    return rows, fit
