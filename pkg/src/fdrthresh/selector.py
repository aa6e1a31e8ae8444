"""Data-driven threshold level selection by multiple-testing rules.

Candidate levels are two-sided normal quantiles ``xi_k = -Q(alpha k / (2n))``
for k = 1..n, where ``Q`` is the standard normal quantile function.  With
``N(t)`` counting observations of magnitude at least ``t`` (ties count),

* the step-up level is ``min{ xi_k : N(xi_k) >= k }`` (the threshold form
  of the classic step-up p-value rule at slope ``alpha1``), and
* the step-down level is ``max{ xi_k : N(xi_{k+1}) < k + 1 }`` computed at
  slope ``alpha2``, with the convention ``xi_{n+1} = 0`` so that ``k = n``
  always qualifies; it is ``+inf`` exactly when no magnitude reaches
  ``xi_1``.

Both are ``+inf`` when nothing qualifies, and step-up <= step-down always
holds when ``alpha2 <= alpha1``.  The selected threshold level is

    lambda = (1 - w) * sqrt(1 + delta1) * g1(step_up)
               + w  * sqrt(1 + delta2) * step_down,

where ``g1`` is a certified monotone transform (identity by default) and
``w`` is the interpolation knob.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gauss import norm_cdf, norm_quantile
from .risk import soft_risk

__all__ = [
    "G1Transform",
    "FdrConfig",
    "SelectorTrace",
    "candidate_levels",
    "exceed_count",
    "step_up_level",
    "step_down_level",
    "select_lambda",
]


class G1Transform:
    """Monotone transform applied to the step-up level before use.

    The identity is always valid.  A custom transform ``g`` must satisfy,
    on a verification grid over (0, 10]:

    * ``0 <= g(x) <= x`` and ``g`` nondecreasing with slope at most ``m0``,
    * ``soft_risk(0, g(x)) <= 4 Phi(-x)``, and
    * ``soft_risk(0, g(x)) <= m0 Phi(-x) / ((x^c1 + 2)(1 v log x)^c2)``

    with exponents ``0 < c1 <= 2``, ``|c2| <= m0``, and ``c2 <= 0`` when
    ``c1 = 2``.  Violations raise ValueError at construction, reporting the
    first failing grid point.
    """

    def __init__(
        self,
        fn: Callable[[float], float] | None = None,
        c1: float = 2.0,
        c2: float = 0.0,
        m0: float = 4.0,
    ) -> None:
        if not (0.0 < c1 <= 2.0):
            raise ValueError("c1 must lie in (0, 2]")
        if abs(c2) > m0:
            raise ValueError("|c2| must not exceed m0")
        if c1 == 2.0 and c2 > 0.0:
            raise ValueError("c2 must be <= 0 when c1 = 2")
        self.fn = fn
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.m0 = float(m0)
        if fn is not None:
            self._verify()

    @classmethod
    def identity(cls) -> "G1Transform":
        return cls(None)

    @property
    def is_identity(self) -> bool:
        return self.fn is None

    def _verify(self) -> None:
        xs = np.linspace(1e-3, 10.0, 800)
        gs = np.array([float(self.fn(float(x))) for x in xs])
        rtol = 1.0 + 1e-9
        for i, (x, g) in enumerate(zip(xs, gs)):
            if not (-1e-12 <= g <= x * rtol + 1e-12):
                raise ValueError(f"transform violates 0 <= g(x) <= x at x = {x:.6g}")
            if i > 0:
                dg = gs[i] - gs[i - 1]
                dx = xs[i] - xs[i - 1]
                if dg < -1e-12:
                    raise ValueError(f"transform is decreasing at x = {x:.6g}")
                if dg > self.m0 * dx * rtol + 1e-12:
                    raise ValueError(f"transform slope exceeds m0 at x = {x:.6g}")
        risk0 = soft_risk(0.0, np.maximum(gs, 0.0))
        tails = norm_cdf(-xs)
        cap1 = 4.0 * tails
        cap2 = self.m0 * tails / ((xs**self.c1 + 2.0) * np.maximum(1.0, np.log(xs)) ** self.c2)
        bad = np.nonzero(risk0 > np.minimum(cap1, cap2) * rtol)[0]
        if bad.size:
            x = xs[bad[0]]
            raise ValueError(f"transform fails the risk-decay certificate at x = {x:.6g}")

    def __call__(self, x: float) -> float:
        x = float(x)
        if math.isinf(x):
            return math.inf
        if self.fn is None:
            return x
        return float(self.fn(x))


@dataclass(frozen=True)
class FdrConfig:
    """Selector configuration.

    Slopes must satisfy ``0 < alpha2p < alpha2 <= alpha1 < alpha1p < 1``:
    ``alpha1``/``alpha2`` drive the step-up/step-down rules and the primed
    values are the slack levels entering tail exponents and population
    crossings.  ``0 <= delta1 <= delta2`` inflate the two interval ends and
    ``interp`` picks a point of the selected interval (0 = lower end).
    """

    alpha1: float = 0.05
    alpha2: float = 0.05
    alpha1p: float = 0.1
    alpha2p: float = 0.025
    delta1: float = 0.0
    delta2: float = 0.0
    interp: float = 0.0
    g1: G1Transform = field(default_factory=G1Transform.identity)

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha2p < self.alpha2 <= self.alpha1 < self.alpha1p < 1.0):
            raise ValueError("need 0 < alpha2p < alpha2 <= alpha1 < alpha1p < 1")
        if not (0.0 <= self.delta1 <= self.delta2):
            raise ValueError("need 0 <= delta1 <= delta2")
        if math.isinf(self.delta2):
            raise ValueError("delta2 must be finite")
        if not (0.0 <= self.interp <= 1.0):
            raise ValueError("interp must lie in [0, 1]")


def candidate_levels(n: int, alpha: float) -> np.ndarray:
    """Two-sided quantile levels ``-Q(alpha k / (2n))`` for k = 1..n.

    Strictly decreasing while positive; entries whose tail probability
    ``alpha k / (2n)`` reaches 1/2 are clamped to 0 (they would otherwise
    be negative and a magnitude threshold below 0 is meaningless).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError("n must be a positive integer")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    p = alpha * np.arange(1, n + 1) / (2.0 * n)
    levels = np.where(p < 0.5, -norm_quantile(np.minimum(p, 0.49999999)), 0.0)
    return np.maximum(levels, 0.0)


def exceed_count(x, t: float) -> int:
    """Number of observations with ``|x_i| >= t`` (ties count; N(inf) = 0)."""
    arr = np.asarray(x, dtype=float)
    if math.isnan(t):
        raise ValueError("t must not be NaN")
    if math.isinf(t):
        return 0
    return int(np.count_nonzero(np.abs(arr) >= t))


def _check_observations(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("x must be a nonempty 1-d vector")
    if not np.isfinite(arr).all():
        raise ValueError("x must be finite")
    return arr


def _counts_at(mags_desc: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """N(levels[j]) for each j, from magnitudes sorted in decreasing order."""
    # count of entries >= t equals the insertion index of t into the
    # ascending array of magnitudes from the right, flipped:
    asc = mags_desc[::-1]
    return mags_desc.size - np.searchsorted(asc, levels, side="left")


def step_up_level(x, alpha1: float) -> float:
    """Smallest candidate level whose exceedance count reaches its index.

    Returns +inf when no candidate qualifies (then nothing is selected).
    Equivalent to thresholding at the step-up p-value rule with slope
    ``alpha1``: magnitudes at or above the returned level are exactly the
    rejected coordinates.
    """
    arr = _check_observations(x)
    levels = candidate_levels(arr.size, alpha1)
    mags = np.sort(np.abs(arr))[::-1]
    counts = _counts_at(mags, levels)
    ok = np.nonzero(counts >= np.arange(1, arr.size + 1))[0]
    if ok.size == 0:
        return math.inf
    return float(levels[ok[-1]])


def step_down_level(x, alpha2: float) -> float:
    """Largest candidate level at which the step-down scan halts.

    Uses the convention ``level_{n+1} = 0``, so index ``n`` always
    qualifies once anything qualifies at all; the result is +inf exactly
    when no magnitude reaches the first candidate level.
    """
    arr = _check_observations(x)
    n = arr.size
    levels = candidate_levels(n, alpha2)
    mags = np.sort(np.abs(arr))[::-1]
    if mags[0] < levels[0]:
        return math.inf
    next_levels = np.concatenate([levels[1:], [0.0]])
    counts_next = _counts_at(mags, next_levels)
    ok = np.nonzero(counts_next < np.arange(2, n + 2))[0]
    # index n always qualifies: N(0) = n < n + 1
    return float(levels[ok[0]])


@dataclass(frozen=True)
class SelectorTrace:
    """Full record of one level selection, serializable for diagnostics.

    ``exceed_counts[k-1]`` is the count at the k-th step-up candidate.
    """

    xi1_candidates: np.ndarray
    xi2_candidates: np.ndarray
    exceed_counts: np.ndarray
    xi1_hat: float
    xi2_hat: float
    lower: float
    upper: float
    lambda_hat: float

    def to_dict(self) -> dict:
        return {
            "xi1_candidates": self.xi1_candidates.tolist(),
            "xi2_candidates": self.xi2_candidates.tolist(),
            "exceed_counts": self.exceed_counts.tolist(),
            "xi1_hat": self.xi1_hat,
            "xi2_hat": self.xi2_hat,
            "lower": self.lower,
            "upper": self.upper,
            "lambda_hat": self.lambda_hat,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def select_lambda(x, config: FdrConfig) -> SelectorTrace:
    """Run both selectors on ``x`` and pick the threshold level.

    The selected interval is ``[sqrt(1+delta1) g1(up), sqrt(1+delta2) down]``
    and ``lambda_hat`` sits at fraction ``config.interp`` of it.  When the
    step-up level is +inf (nothing selected anywhere) the interval collapses
    to +inf and the downstream estimate is identically zero.
    """
    arr = _check_observations(x)
    n = arr.size
    xi1_cands = candidate_levels(n, config.alpha1)
    xi2_cands = candidate_levels(n, config.alpha2)
    mags = np.sort(np.abs(arr))[::-1]
    counts = _counts_at(mags, xi1_cands)

    xi1 = step_up_level(arr, config.alpha1)
    xi2 = step_down_level(arr, config.alpha2)

    lower = math.sqrt(1.0 + config.delta1) * config.g1(xi1)
    upper = math.sqrt(1.0 + config.delta2) * xi2
    w = config.interp
    if math.isinf(lower):
        lam = math.inf
    elif w == 0.0:
        lam = lower
    elif w == 1.0:
        lam = upper
    else:
        lam = lower + w * (upper - lower)
    return SelectorTrace(
        xi1_candidates=xi1_cands,
        xi2_candidates=xi2_cands,
        exceed_counts=counts.astype(int),
        xi1_hat=xi1,
        xi2_hat=xi2,
        lower=lower,
        upper=upper,
        lambda_hat=lam,
    )
