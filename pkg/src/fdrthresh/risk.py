"""Exact risk functionals for soft thresholding under Gaussian noise.

For a single coordinate ``X = mu + Z`` with ``Z ~ N(0, 1)`` the soft
threshold rule at level ``L`` has mean squared error

    R(mu, L) = E (soft(X, L) - mu)^2
             = mu^2 [Phi(L - mu) - Phi(-L - mu)] + q(L - mu) + q(L + mu),
    q(a)     = (1 + L^2) Phi(-a) + (a - 2 L) phi(a),

obtained by splitting the loss over the kill region ``|X| <= L`` and the
two survive regions and reducing each piece to truncated normal moments.
Mixing over an empirical prior ``G`` (the distribution of the unknown
means) gives the average risk ``R_G``, its clipped-second-moment proxy
``rho_G(L) = E_G min(theta^2, L^2)``, the tail-penalized surrogate
``rho_G(L) + B0 Phi(-L)``, the two-sided rejection probability, and the
nominal false-discovery curve ``t -> 2 Phi(-t) / S_G(t)`` whose crossing
points calibrate the level selectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauss import norm_cdf, norm_pdf

__all__ = [
    "EmpiricalPrior",
    "soft_risk",
    "bayes_soft_risk",
    "clipped_second_moment",
    "surrogate_risk",
    "default_surrogate_constant",
    "rejection_prob",
    "fdr_curve",
    "population_fdr_levels",
    "OptimalLevels",
    "optimal_levels",
    "smooth_risk_bound",
    "DiagnosticConstants",
    "diagnostic_constants",
]

# Numerator 2*Phi(-t) underflows past ~38.6; the curve-crossing search never
# needs to look beyond this.
_TAIL_SEARCH_CAP = 38.0


@dataclass(frozen=True, eq=False)
class EmpiricalPrior:
    """Discrete distribution of coordinate means.

    ``atoms`` are the distinct support points, ``weights`` their
    probabilities (summing to one), and ``n`` the number of coordinates the
    prior summarizes (used for default level ranges; ``len(atoms)`` when
    not given).
    """

    atoms: np.ndarray
    weights: np.ndarray
    n: int

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 1 or atoms.size == 0:
            raise ValueError("atoms must be a nonempty 1-d vector")
        if not np.isfinite(atoms).all():
            raise ValueError("atoms must be finite")
        if weights.shape != atoms.shape:
            raise ValueError("weights must match atoms in length")
        if (weights < 0.0).any() or not np.isfinite(weights).all():
            raise ValueError("weights must be nonnegative and finite")
        total = float(weights.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights / total)
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @classmethod
    def from_atoms(cls, atoms, weights=None, n: int | None = None) -> "EmpiricalPrior":
        atoms = np.asarray(atoms, dtype=float)
        if weights is None:
            weights = np.full(atoms.shape, 1.0 / max(atoms.size, 1))
        if n is None:
            n = atoms.size
        return cls(atoms, np.asarray(weights, dtype=float), int(n))

    @classmethod
    def from_vector(cls, theta) -> "EmpiricalPrior":
        """Empirical distribution of the entries of a mean vector."""
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("theta must be a nonempty 1-d vector")
        values, counts = np.unique(theta, return_counts=True)
        return cls(values, counts / theta.size, theta.size)

    @property
    def mean_square(self) -> float:
        return float(np.dot(self.weights, self.atoms**2))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.atoms)))

    @property
    def is_degenerate(self) -> bool:
        """True when all mass sits at zero (no signal)."""
        return bool(np.all((self.atoms == 0.0) | (self.weights == 0.0)))


def _survive_term(a, level):
    """q(a) = E (Z - level)^2 1{Z > a} expressed through closed-form moments."""
    m0 = norm_cdf(-a)
    dens = norm_pdf(a)
    return (1.0 + level * level) * m0 + (a - 2.0 * level) * dens


def soft_risk(mu, level):
    """Mean squared error of soft thresholding at ``level``, mean ``mu``.

    Broadcasts over array arguments.  ``level = +inf`` (the zero estimator)
    gives ``mu^2``; ``level = 0`` (the identity) gives 1.
    """
    mu_arr = np.asarray(mu, dtype=float)
    lev_arr = np.asarray(level, dtype=float)
    if np.isnan(mu_arr).any():
        raise ValueError("mu must not contain NaN")
    if np.isnan(lev_arr).any() or (lev_arr < 0.0).any():
        raise ValueError("level must be >= 0")
    mu_b, lev_b = np.broadcast_arrays(mu_arr, lev_arr)
    finite = np.isfinite(lev_b)
    lev_f = np.where(finite, lev_b, 1.0)
    kill = mu_b**2 * (norm_cdf(lev_f - mu_b) - norm_cdf(-lev_f - mu_b))
    out = kill + _survive_term(lev_f - mu_b, lev_f) + _survive_term(lev_f + mu_b, lev_f)
    out = np.where(finite, out, mu_b**2)
    if out.ndim == 0:
        return float(out)
    return out


def _prior_mix(prior: EmpiricalPrior, values_by_atom, t_shape) -> np.ndarray | float:
    mixed = np.tensordot(prior.weights, values_by_atom, axes=(0, 0))
    if t_shape == ():
        return float(mixed)
    return mixed


def bayes_soft_risk(prior: EmpiricalPrior, level):
    """Average soft-threshold risk ``E_G R(theta, level)``."""
    lev = np.asarray(level, dtype=float)
    vals = soft_risk(prior.atoms[:, None], np.atleast_1d(lev)[None, :])
    mixed = prior.weights @ np.atleast_2d(vals)
    return float(mixed[0]) if lev.ndim == 0 else mixed


def clipped_second_moment(prior: EmpiricalPrior, level):
    """``E_G min(theta^2, level^2)``; exact ``E_G theta^2`` at ``level = inf``."""
    lev = np.asarray(level, dtype=float)
    if np.isnan(lev).any() or (lev < 0.0).any():
        raise ValueError("level must be >= 0")
    clipped = np.minimum(prior.atoms[:, None] ** 2, np.atleast_1d(lev)[None, :] ** 2)
    mixed = prior.weights @ clipped
    return float(mixed[0]) if lev.ndim == 0 else mixed


def surrogate_risk(prior: EmpiricalPrior, level, b0: float = 4.0):
    """Clipped second moment plus the Gaussian-tail penalty ``b0 * Phi(-level)``.

    ``b0 >= 4`` is required; with that constant the surrogate dominates the
    exact average risk up to the standard sandwich inequalities.
    """
    if not (b0 >= 4.0):
        raise ValueError("b0 must be >= 4")
    lev = np.asarray(level, dtype=float)
    tail = np.where(np.isfinite(lev), norm_cdf(-np.where(np.isfinite(lev), lev, 1.0)), 0.0)
    out = clipped_second_moment(prior, level) + b0 * tail
    return float(out) if lev.ndim == 0 else out


def default_surrogate_constant(alpha2p: float, c0: float = 1.0) -> float:
    """Recommended tail weight ``max(8 / alpha2p, 2 c0^2)``.

    ``alpha2p`` is the population step-down rate and ``c0`` the smooth-family
    risk constant (1 for soft thresholding).  Always >= 4.
    """
    if not (0.0 < alpha2p < 1.0):
        raise ValueError("alpha2p must lie in (0, 1)")
    if not (c0 >= 1.0):
        raise ValueError("c0 must be >= 1")
    return max(8.0 / alpha2p, 2.0 * c0 * c0)


def rejection_prob(prior: EmpiricalPrior, t):
    """Two-sided exceedance probability ``E_G P(|theta + Z| >= t)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.isnan(t_arr).any() or (t_arr < 0.0).any():
        raise ValueError("t must be >= 0")
    th = prior.atoms[:, None]
    tt = np.atleast_1d(t_arr)[None, :]
    vals = norm_cdf(th - tt) + norm_cdf(-th - tt)
    mixed = prior.weights @ vals
    return float(mixed[0]) if t_arr.ndim == 0 else mixed


def fdr_curve(prior: EmpiricalPrior, t):
    """Nominal false-discovery proportion ``2 Phi(-t) / S_G(t)`` at level ``t``.

    Equals 1 at ``t = 0`` and, for a prior with any nonzero atom, decreases
    strictly to 0; for the degenerate prior it is identically 1.
    """
    t_arr = np.asarray(t, dtype=float)
    num = 2.0 * norm_cdf(-np.atleast_1d(t_arr))
    den = np.atleast_1d(rejection_prob(prior, t_arr))
    out = num / den
    return float(out[0]) if t_arr.ndim == 0 else out


def population_fdr_levels(prior: EmpiricalPrior, alpha1p: float, alpha2p: float):
    """Crossing points of the nominal false-discovery curve.

    Returns ``(level1, level2)`` where ``level1`` is the smallest ``t`` with
    curve ``<= alpha1p`` and ``level2`` the largest ``t`` with curve
    ``>= alpha2p``.  Requires ``0 < alpha2p < alpha1p < 1``; then
    ``level1 <= level2``.  Both are ``+inf`` for the degenerate prior.
    """
    if not (0.0 < alpha2p < alpha1p < 1.0):
        raise ValueError("need 0 < alpha2p < alpha1p < 1")
    if prior.is_degenerate:
        return math.inf, math.inf

    def crossing(target: float) -> float:
        lo, hi = 0.0, 1.0
        while fdr_curve(prior, hi) > target:
            hi *= 2.0
            if hi > _TAIL_SEARCH_CAP:
                raise ValueError("curve crossing lies beyond the searchable tail")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if fdr_curve(prior, mid) > target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    return crossing(alpha1p), crossing(alpha2p)


@dataclass(frozen=True)
class OptimalLevels:
    """Minimizers of the exact and surrogate average risks.

    ``level_exact``/``level_surrogate`` are +inf when the zero estimator
    (infinite level) is optimal, in which case the corresponding risk is
    the prior mean square.
    """

    level_exact: float
    risk_exact: float
    level_surrogate: float
    risk_surrogate: float
    b0: float


def _golden_min(f, lo: float, hi: float, tol: float = 1e-10):
    """Golden-section minimum of ``f`` on [lo, hi]; returns (argmin, value)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _minimize_level(f, limit_at_inf: float, level_max: float):
    grid = np.linspace(0.0, level_max, 2048)
    vals = f(grid)
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    x, v = _golden_min(lambda z: float(f(np.asarray(z))), float(lo), float(hi))
    if float(vals[i]) < v:
        x, v = float(grid[i]), float(vals[i])
    tol = 1e-12 * max(1.0, abs(limit_at_inf))
    if v < limit_at_inf - tol:
        return x, v
    return math.inf, limit_at_inf


def optimal_levels(
    prior: EmpiricalPrior, b0: float = 4.0, level_max: float | None = None
) -> OptimalLevels:
    """Minimize the exact and surrogate risks over levels in [0, inf].

    The search scans a 2048-point grid on ``[0, level_max]``, refines the
    best bracket by golden section, and compares against the infinite-level
    limit (both functionals tend to the prior mean square).  The default
    ``level_max = sqrt(2 log n) + 4`` covers every minimizer: beyond it the
    Gaussian-tail terms are negligible at the 1e-12 comparison tolerance.
    """
    if level_max is None:
        level_max = math.sqrt(2.0 * math.log(max(prior.n, 2))) + 4.0
    if not (level_max > 0.0) or not math.isfinite(level_max):
        raise ValueError("level_max must be positive and finite")
    limit = prior.mean_square
    lam_exact, eta_exact = _minimize_level(
        lambda lv: bayes_soft_risk(prior, lv), limit, level_max
    )
    lam_sur, eta_sur = _minimize_level(
        lambda lv: surrogate_risk(prior, lv, b0), limit, level_max
    )
    return OptimalLevels(lam_exact, eta_exact, lam_sur, eta_sur, float(b0))


def smooth_risk_bound(prior: EmpiricalPrior, level: float, c0: float) -> float:
    """Risk envelope for any sandwiched Lipschitz threshold family.

    ``clipped_second_moment(prior, sqrt(level^2 + 2)) + c0^2 * soft_risk(0, level)``
    with ``c0 = slope / (2 - slope) >= 1``.  Valid for every family whose
    rule is sandwiched between soft and hard and is ``slope``-Lipschitz.
    """
    if not (c0 >= 1.0):
        raise ValueError("c0 must be >= 1")
    level = float(level)
    if math.isnan(level) or level < 0.0:
        raise ValueError("level must be >= 0")
    if math.isinf(level):
        return prior.mean_square
    widened = math.sqrt(level * level + 2.0)
    return float(clipped_second_moment(prior, widened) + c0 * c0 * soft_risk(0.0, level))


@dataclass(frozen=True)
class DiagnosticConstants:
    """Finite-sample constants entering the adaptive-risk error terms."""

    l2n: float
    tau1_star: float
    tau2_star: float
    nu1_star: float
    nu2_star: float


def _log_plus(x: float) -> float:
    return max(1.0, math.log(x))


def diagnostic_constants(
    n: int,
    delta1: float,
    delta2: float,
    c1: float,
    c2: float,
    eta_star: float,
    alpha1: float,
    alpha1p: float,
    alpha2: float,
    alpha2p: float,
    m0: float = 4.0,
) -> DiagnosticConstants:
    """Evaluate the error-term constants for a given selector configuration.

    ``eta_star`` is the surrogate optimal risk (per coordinate) of the
    target mean vector; ``c1``, ``c2`` describe the level transform's decay
    certificate (identity transform: ``c1 = 2``, ``c2 = 0``); the rate
    constants are

        L2n  = (log n)^(-3/2) [ delta1 (log n)^((5-c1)/2) / LL^c2
                                + (log n)^((3-c1)/2) / LL^(c2-1) ]^(1+delta1)
        tau2 = L2n / n^(1+delta1),
        tau1 = max( log(e v log n)/(1 v log n),
                    (log L1)^(-c2) / L1^(c1/2), 1/L1 ),

    with ``LL = 1 v log log n`` and ``L1 = e v log(1/eta_star)``, plus the
    selector tail exponents ``nu_j = r_j - 1 - log r_j`` for the nominal to
    population level ratios ``r_1 = alpha1/alpha1p``, ``r_2 = alpha2/alpha2p``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0.0 <= delta1 <= delta2):
        raise ValueError("need 0 <= delta1 <= delta2")
    if not (0.0 < c1 <= 2.0):
        raise ValueError("c1 must lie in (0, 2]")
    if abs(c2) > m0:
        raise ValueError("|c2| must not exceed m0")
    if c1 == 2.0 and c2 > 0.0:
        raise ValueError("c2 must be <= 0 when c1 = 2")
    if not (eta_star > 0.0):
        raise ValueError("eta_star must be positive")
    # equality of nominal and population rates is allowed here (it just
    # zeroes the tail exponent); the selector itself demands strict gaps
    if not (0.0 < alpha2p <= alpha2 <= alpha1 <= alpha1p < 1.0):
        raise ValueError("need 0 < alpha2p <= alpha2 <= alpha1 <= alpha1p < 1")

    logn = math.log(n)
    ll = _log_plus(logn)
    bracket = delta1 * logn ** ((5.0 - c1) / 2.0) / ll**c2
    bracket += logn ** ((3.0 - c1) / 2.0) / ll ** (c2 - 1.0)
    l2n = logn**-1.5 * bracket ** (1.0 + delta1)
    tau2 = l2n / n ** (1.0 + delta1)

    l1 = max(math.e, math.log(1.0 / eta_star))
    tau1 = max(
        math.log(max(math.e, logn)) / max(1.0, logn),
        math.log(l1) ** (-c2) / l1 ** (c1 / 2.0),
        1.0 / l1,
    )

    def tail_exponent(r: float) -> float:
        return r - 1.0 - math.log(r)

    nu1 = tail_exponent(alpha1 / alpha1p)
    nu2 = tail_exponent(alpha2 / alpha2p)
    return DiagnosticConstants(l2n, tau1, tau2, nu1, nu2)
