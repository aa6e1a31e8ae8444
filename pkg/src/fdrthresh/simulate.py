"""Monte Carlo harness: signal generators, risk experiments, exact oracles.

Noise replication is counter-based: replicate ``i`` always draws from a
Philox stream keyed by the root seed with block counter ``i << 192``, so
results are bit-reproducible for a given (seed, config) regardless of
block sizes or evaluation order, and distinct replicates can never share
stream state.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .estimators import fdr_threshold_estimate
from .risk import EmpiricalPrior, optimal_levels
from .selector import FdrConfig
from .thresholds import ThresholdFamily, apply_family

__all__ = [
    "SignalGenerator",
    "minimax_level",
    "minimax_benchmark",
    "McEstimate",
    "mc_mean",
    "mc_risk",
    "oracle_loss_min",
    "RegretReport",
    "regret_experiment",
    "CommonMeanReport",
    "common_mean_experiment",
    "MinimaxReport",
    "minimax_ball_experiment",
    "ConcentrationReport",
    "concentration_check",
]


def minimax_level(n: int, p: float, radius: float) -> float:
    """Calibrated threshold level ``1 v sqrt(2 log(n ^ radius^(-p')))``.

    ``p' = p`` for ``p > 0`` and 1 for ``p = 0`` (where ``radius`` is the
    sparsity fraction).  This is the level at which least-favorable signals
    concentrate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if p < 0.0 or radius <= 0.0:
        raise ValueError("need p >= 0 and radius > 0")
    pp = p if p > 0.0 else 1.0
    inner = min(float(n), radius**-pp)
    return max(1.0, math.sqrt(2.0 * max(0.0, math.log(inner))))


def minimax_benchmark(n: int, p: float, radius: float, weak: bool = False) -> float:
    """Leading-order minimax risk over the ball: ``M n radius^p' level^(2-p)``.

    ``M = 1`` for strong balls and ``2/(2-p)`` for weak balls (``p < 2``).
    """
    if not (0.0 <= p < 2.0):
        raise ValueError("benchmark requires 0 <= p < 2")
    if weak and p == 0.0:
        raise ValueError("weak balls require p > 0")
    lam = minimax_level(n, p, radius)
    mult = 1.0 if not weak else 2.0 / (2.0 - p)
    pp = p if p > 0.0 else 1.0
    return mult * n * radius**pp * lam ** (2.0 - p)


@dataclass(frozen=True)
class SignalGenerator:
    """Deterministic mean-vector configurations for experiments.

    kinds:
      zero                     all coordinates 0
      common_mean(mu)          all coordinates mu
      spikes(count, value)     `count` coordinates at `value`, rest 0
      least_favorable(p, radius, weak, level)
                               hardest configuration in the given ball:
                               strong balls put floor(n radius^p / level^p)
                               spikes at `level` (floor(n radius) for p=0);
                               weak balls use the capped ordered profile
                               min(radius (n/k)^(1/p), level).
    """

    kind: str
    mu: float = 0.0
    count: int = 0
    value: float = 0.0
    p: float = 0.0
    radius: float = 0.0
    weak: bool = False
    level: float | None = None

    @classmethod
    def zero(cls) -> "SignalGenerator":
        return cls("zero")

    @classmethod
    def common_mean(cls, mu: float) -> "SignalGenerator":
        return cls("common_mean", mu=float(mu))

    @classmethod
    def spikes(cls, count: int, value: float) -> "SignalGenerator":
        if count < 0:
            raise ValueError("count must be >= 0")
        return cls("spikes", count=int(count), value=float(value))

    @classmethod
    def least_favorable(
        cls, p: float, radius: float, weak: bool = False, level: float | None = None
    ) -> "SignalGenerator":
        if p < 0.0 or radius <= 0.0:
            raise ValueError("need p >= 0 and radius > 0")
        if weak and p == 0.0:
            raise ValueError("weak balls require p > 0")
        return cls("least_favorable", p=float(p), radius=float(radius), weak=weak, level=level)

    def realize(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == "zero":
            return np.zeros(n)
        if self.kind == "common_mean":
            return np.full(n, self.mu)
        if self.kind == "spikes":
            if self.count > n:
                raise ValueError("count must not exceed n")
            theta = np.zeros(n)
            theta[: self.count] = self.value
            return theta
        if self.kind == "least_favorable":
            lam = self.level if self.level is not None else minimax_level(n, self.p, self.radius)
            if self.weak:
                k = np.arange(1, n + 1)
                theta = np.minimum(self.radius * (n / k) ** (1.0 / self.p), lam)
                assert (theta <= self.radius * (n / k) ** (1.0 / self.p) * (1 + 1e-12)).all()
                return theta
            if self.p == 0.0:
                m = min(int(math.floor(n * self.radius)), n)
            else:
                m = min(int(math.floor(n * self.radius**self.p / lam**self.p)), n)
            theta = np.zeros(n)
            theta[:m] = lam
            if self.p > 0.0:
                assert np.mean(np.abs(theta) ** self.p) <= self.radius**self.p * (1 + 1e-12)
            else:
                assert np.count_nonzero(theta) <= n * self.radius * (1 + 1e-12)
            return theta
        raise ValueError(f"unknown signal kind: {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "common_mean":
            return f"common_mean(mu={self.mu:g})"
        if self.kind == "spikes":
            return f"spikes(count={self.count}, value={self.value:g})"
        return (
            f"least_favorable(p={self.p:g}, radius={self.radius:g}, "
            f"weak={self.weak}, level={self.level})"
        )


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error and provenance."""

    mean: float
    std_error: float
    replicates: int
    seed: int
    config_fingerprint: str


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 192))


def _fingerprint(**fields) -> str:
    blob = json.dumps(fields, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _theta_digest(theta: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(theta, dtype="<f8").tobytes()).hexdigest()[:16]


def mc_mean(
    theta,
    statistic: Callable[[np.ndarray], float],
    replicates: int,
    seed: int,
    antithetic: bool = False,
    label: str = "",
) -> McEstimate:
    """Average ``statistic(theta + noise)`` over independent replicates.

    With ``antithetic=True`` (requires an even count) replicate ``2j + 1``
    reuses the negated noise of replicate ``2j`` and the standard error is
    computed over the independent pair averages.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a nonempty 1-d vector")
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    if antithetic and replicates % 2:
        raise ValueError("antithetic pairing requires an even replicate count")
    seed = int(seed)
    n = theta.size

    if antithetic:
        pair_vals = np.empty(replicates // 2)
        for j in range(replicates // 2):
            z = _replicate_rng(seed, j).standard_normal(n)
            pair_vals[j] = 0.5 * (statistic(theta + z) + statistic(theta - z))
        samples = pair_vals
    else:
        samples = np.empty(replicates)
        for i in range(replicates):
            z = _replicate_rng(seed, i).standard_normal(n)
            samples[i] = statistic(theta + z)

    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size))
    fp = _fingerprint(
        label=label,
        n=n,
        replicates=replicates,
        seed=seed,
        antithetic=antithetic,
        theta=_theta_digest(theta),
    )
    return McEstimate(mean, se, replicates, seed, fp)


def mc_risk(
    theta,
    estimate_fn: Callable[[np.ndarray], np.ndarray],
    replicates: int,
    seed: int,
    antithetic: bool = False,
    label: str = "",
) -> McEstimate:
    """Monte Carlo total squared-error risk ``E ||estimate(X) - theta||^2``."""
    theta = np.asarray(theta, dtype=float)

    def loss(x: np.ndarray) -> float:
        diff = np.asarray(estimate_fn(x), dtype=float) - theta
        return float(diff @ diff)

    return mc_mean(theta, loss, replicates, seed, antithetic=antithetic, label=label or "risk")


def oracle_loss_min(x, theta) -> tuple[float, float]:
    """Exact minimum over levels of the soft-threshold loss on one draw.

    Minimizes ``||soft(x, L) - theta||^2`` over ``L in [0, inf]``.  The loss
    is piecewise quadratic in ``L`` between consecutive order statistics of
    ``|x|``, so each segment is minimized in closed form.  Returns
    ``(level, loss)`` with ``level = +inf`` when zeroing everything is
    optimal (always the case for ``theta = 0``, where the loss at +inf is 0).
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if x.shape != theta.shape or x.ndim != 1 or x.size == 0:
        raise ValueError("x and theta must be matching nonempty 1-d vectors")
    if not (np.isfinite(x).all() and np.isfinite(theta).all()):
        raise ValueError("x and theta must be finite")
    n = x.size
    order = np.argsort(np.abs(x), kind="stable")
    mags = np.abs(x)[order]
    signed_err = (np.sign(x) * (x - theta))[order]
    th2 = (theta**2)[order]

    # prefix_kill[m] = loss of the m smallest-magnitude coords once killed
    prefix_kill = np.concatenate([[0.0], np.cumsum(th2)])
    # suffix sums over the active (surviving) coords
    suf1 = np.concatenate([np.cumsum(signed_err[::-1])[::-1], [0.0]])
    suf2 = np.concatenate([np.cumsum((signed_err**2)[::-1])[::-1], [0.0]])

    total = float(prefix_kill[-1])
    best_level = math.inf
    best_loss = total
    edges = np.concatenate([[0.0], mags])
    for m in range(n):
        lo = float(edges[m])
        hi = float(mags[m])
        if hi <= lo and m > 0:
            continue  # empty segment created by tied magnitudes
        cnt = n - m
        s1 = float(suf1[m])
        s2 = float(suf2[m])

        def seg_loss(lam: float) -> float:
            return float(prefix_kill[m]) + s2 - 2.0 * lam * s1 + cnt * lam * lam

        stat = min(max(s1 / cnt, lo), hi)
        for lam in (lo, stat, hi):
            val = seg_loss(lam)
            if val < best_loss - 1e-15 * max(1.0, total):
                best_loss = val
                best_level = lam
    if best_loss >= total - 1e-15 * max(1.0, total):
        return math.inf, total
    return best_level, best_loss


@dataclass(frozen=True)
class RegretReport:
    """Adaptive risk against the exact fixed-level optimum."""

    n: int
    mc: McEstimate
    exact_total: float
    regret: float
    ratio: float
    degenerate: bool
    oracle_mc: McEstimate | None = None
    oracle_ratio: float = math.nan


def regret_experiment(
    theta,
    replicates: int,
    seed: int,
    config: FdrConfig = FdrConfig(),
    family: ThresholdFamily = ThresholdFamily("soft"),
    strong: bool = False,
) -> RegretReport:
    """Monte Carlo risk of the adaptive rule vs the exact optimum ``n eta``.

    With ``strong=True`` also estimates the pathwise oracle benchmark
    ``E min_L ||soft(X, L) - theta||^2`` on the same noise streams.
    """
    theta = np.asarray(theta, dtype=float)
    prior = EmpiricalPrior.from_vector(theta)
    opt = optimal_levels(prior)
    exact_total = opt.risk_exact * theta.size

    mc = mc_risk(
        theta,
        lambda x: fdr_threshold_estimate(x, family, config).estimate,
        replicates,
        seed,
        label=f"regret:{family.describe()}",
    )
    degenerate = exact_total < 1e-10
    ratio = math.nan if degenerate else mc.mean / exact_total

    oracle_mc = None
    oracle_ratio = math.nan
    if strong:
        oracle_mc = mc_mean(
            theta,
            lambda x: oracle_loss_min(x, theta)[1],
            replicates,
            seed,
            label="oracle_loss",
        )
        if oracle_mc.mean > 1e-10:
            oracle_ratio = mc.mean / oracle_mc.mean
    return RegretReport(
        theta.size, mc, exact_total, mc.mean - exact_total, ratio, degenerate, oracle_mc, oracle_ratio
    )


@dataclass(frozen=True)
class CommonMeanReport:
    """Risk table for the shared-mean configuration."""

    n: int
    mu: float
    rows: tuple[tuple[str, float, float], ...]
    exact_total: float


def common_mean_experiment(
    n: int,
    mu: float,
    replicates: int,
    seed: int,
    config: FdrConfig = FdrConfig(),
    firm_slope: float = 1.5,
) -> CommonMeanReport:
    """Compare adaptive thresholding with the sample mean when all means equal ``mu``.

    The sample-mean comparator has total risk exactly 1; thresholding wins
    whenever the common mean is small against ``1/sqrt(n)``.
    """
    theta = np.full(int(n), float(mu))
    prior = EmpiricalPrior.from_vector(theta)
    exact_total = optimal_levels(prior).risk_exact * n

    soft_fam = ThresholdFamily("soft")
    firm_fam = ThresholdFamily("firm", firm_slope=firm_slope)
    rows = []
    for label, fn in (
        ("fdr_soft", lambda x: fdr_threshold_estimate(x, soft_fam, config).estimate),
        ("fdr_firm", lambda x: fdr_threshold_estimate(x, firm_fam, config).estimate),
        ("sample_mean", lambda x: np.full(x.shape, float(x.mean()))),
    ):
        est = mc_risk(theta, fn, replicates, seed, label=f"common_mean:{label}")
        rows.append((label, est.mean, est.std_error))
    return CommonMeanReport(int(n), float(mu), tuple(rows), exact_total)


@dataclass(frozen=True)
class MinimaxReport:
    """Adaptive risk against the ball's leading-order minimax benchmark."""

    n: int
    p: float
    radius: float
    weak: bool
    level: float
    mc: McEstimate
    benchmark: float
    ratio: float


def minimax_ball_experiment(
    n: int,
    p: float,
    radius: float,
    replicates: int,
    seed: int,
    config: FdrConfig = FdrConfig(),
    family: ThresholdFamily = ThresholdFamily("soft"),
    weak: bool = False,
) -> MinimaxReport:
    """Run the adaptive rule on the least-favorable signal of a ball."""
    gen = SignalGenerator.least_favorable(p, radius, weak=weak)
    theta = gen.realize(int(n))
    mc = mc_risk(
        theta,
        lambda x: fdr_threshold_estimate(x, family, config).estimate,
        replicates,
        seed,
        label=f"minimax:{gen.describe()}",
    )
    bench = minimax_benchmark(int(n), p, radius, weak=weak)
    return MinimaxReport(
        int(n), float(p), float(radius), weak, minimax_level(int(n), p, radius), mc, bench, mc.mean / bench
    )


@dataclass(frozen=True)
class ConcentrationReport:
    """Variance of the scaled loss against its isoperimetric bound."""

    n: int
    variance: float
    bound: float
    se_variance: float
    passed: bool


def concentration_check(
    theta,
    level: float,
    family: ThresholdFamily,
    replicates: int,
    seed: int,
) -> ConcentrationReport:
    """Check ``Var(||t(X, level) - theta|| / sqrt(n)) <= 4 slope^2 / n``.

    The scaled loss is a ``slope/sqrt(n)``-Lipschitz function of the noise,
    so Gaussian concentration bounds its variance by ``4 slope^2 / n``; the
    check passes when the sample variance is within three standard errors
    of that bound.  Requires a smooth family.
    """
    if not family.is_smooth:
        raise ValueError("concentration bound requires a smooth family")
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    level = float(level)
    if math.isnan(level) or level < 0.0:
        raise ValueError("level must be >= 0")

    samples = np.empty(int(replicates))
    for i in range(int(replicates)):
        z = _replicate_rng(int(seed), i).standard_normal(n)
        diff = np.asarray(apply_family(theta + z, level, family)) - theta
        samples[i] = math.sqrt(float(diff @ diff) / n)
    var = float(samples.var(ddof=1))
    centered = samples - samples.mean()
    m4 = float(np.mean(centered**4))
    se_var = math.sqrt(max(m4 - var * var, 0.0) / samples.size)
    bound = 4.0 * family.slope**2 / n
    return ConcentrationReport(n, var, bound, se_var, var <= bound + 3.0 * se_var)
