"""Coverage of the combination-code space and coupon-collector estimates."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, TextIO, Tuple

import numpy as np

from chartcov import config, render
from chartcov.refmodels import CombinationCode, all_codes
from chartcov.simgen import ScenarioTrace

logger = logging.getLogger(__name__)

MAX_EXACT_TYPES = 20


class CoverageError(ValueError):
    """Raised when counts break the coverage invariants."""


class NeverCompletes(ValueError):
    """Raised when some coupon type can never be drawn."""


@dataclass(frozen=True)
class CoverageReport:
    counts: Dict[CombinationCode, int]
    total: int
    feasible_uncovered: Tuple[CombinationCode, ...]
    threshold: int = 1

    def count(self, code: CombinationCode) -> int:
        return self.counts.get(code, 0)

    @property
    def covered(self) -> int:
        return sum(1 for code, n in self.counts.items() if code.feasible and n > 0)


def _report(counts: Dict[CombinationCode, int], k: int) -> CoverageReport:
    if k < 1:
        raise ValueError("threshold k must be at least 1")
    for code, n in counts.items():
        if n and not code.feasible:
            raise CoverageError(f"infeasible code {code} observed {n} times")
    ordered = {code: counts.get(code, 0) for code in all_codes()}
    uncovered = tuple(sorted((c for c, n in ordered.items() if c.feasible and n < k),
                             key=lambda c: (ordered[c], c)))
    return CoverageReport(ordered, sum(ordered.values()), uncovered, k)


def histogram(traces: Iterable[ScenarioTrace], k: int = 1) -> CoverageReport:
    counts: Dict[CombinationCode, int] = {}
    for trace in traces:
        counts[trace.code] = counts.get(trace.code, 0) + 1
    return _report(counts, k)


def report_from_counts(counts: Mapping[str, int], k: int = 1) -> CoverageReport:
    """Build a report from code strings to counts, as stored in the catalog."""
    return _report({CombinationCode.parse(code): n for code, n in counts.items()}, k)


def verdict(report: CoverageReport, k: int) -> List[CombinationCode]:
    """Feasible codes observed fewer than k times, rarest first."""
    if k < 1:
        raise ValueError("threshold k must be at least 1")
    under = [code for code, n in report.counts.items() if code.feasible and n < k]
    return sorted(under, key=lambda code: (report.counts[code], code))


def emit_report(report: CoverageReport, fmt: str, sink: TextIO,
                width: int = None, height: int = None) -> None:
    if fmt == 'csv':
        render.write_coverage_csv(report.counts, sink)
    elif fmt == 'svg':
        sink.write(render.coverage_svg(report.counts,
                                       width or config.SVG_WIDTH,
                                       height or config.SVG_HEIGHT))
    else:
        raise ValueError(f"unknown report format: {fmt}")


@dataclass(frozen=True)
class CcpEstimate:
    n_types: int
    weights: Tuple[float, ...]
    trials: int
    mean_draws: float
    sd_draws: float
    curve: Tuple[Tuple[int, float], ...]
    analytic_mean: Optional[float] = None
    sorted_draws: Tuple[int, ...] = field(default=(), repr=False)

    def completion_prob(self, n: int) -> float:
        """Estimated probability that every type is seen within n draws."""
        if not self.sorted_draws:
            return 0.0
        return int(np.searchsorted(self.sorted_draws, n, side='right')) / self.trials


def uniform_expectation(n: int) -> float:
    """n times the n-th harmonic number."""
    return n * sum(1.0 / k for k in range(1, n + 1))


def weighted_expectation(weights: Sequence[float]) -> float:
    """Inclusion-exclusion over all non-empty subsets of types."""
    if len(weights) > MAX_EXACT_TYPES:
        raise ValueError(f"exact expectation limited to {MAX_EXACT_TYPES} types")
    total = 0.0
    for size in range(1, len(weights) + 1):
        sign = 1.0 if size % 2 else -1.0
        for subset in itertools.combinations(weights, size):
            total += sign / sum(subset)
    return total


def _check_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty list")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if w.sum() > 1.0 + 1e-9:
        raise ValueError(f"weights sum to {w.sum():.6f} > 1")
    zero = np.flatnonzero(w == 0)
    if zero.size:
        raise NeverCompletes(f"types {zero.tolist()} have weight 0 and can never be collected")
    return w


def _draws_to_complete(rng: np.random.Generator, cdf: np.ndarray, n_types: int, max_draws: int) -> int:
    seen = np.zeros(n_types + 1, dtype=bool)
    seen[n_types] = True  # the no-type slot
    remaining = n_types
    drawn = 0
    chunk = max(64, 2 * n_types)
    while drawn < max_draws:
        batch = np.searchsorted(cdf, rng.random(chunk), side='right')
        values, first = np.unique(batch, return_index=True)
        new = ~seen[values]
        if new.any():
            seen[values[new]] = True
            remaining -= int(new.sum())
            if remaining == 0:
                done = drawn + int(first[new].max()) + 1
                if done > max_draws:
                    break
                return done
        drawn += chunk
        chunk = min(chunk * 2, 1 << 16)
    raise NeverCompletes(f"not all types collected within {max_draws} draws")


def ccp_mc(weights: Sequence[float], trials: int, seed: int, max_draws: int = None) -> CcpEstimate:
    """Monte Carlo draws-to-complete for weighted coupons.

    Weights may sum to less than one; the remainder is a draw that yields no
    type. Trial ``i`` uses the stream ``default_rng([seed, i])``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    w = _check_weights(weights)
    n_types = w.size
    cdf = np.minimum(np.cumsum(np.append(w, max(0.0, 1.0 - w.sum()))), 1.0)
    cdf[-1] = 1.0
    limit = config.CCP_MAX_DRAWS if max_draws is None else max_draws

    draws = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        draws[trial] = _draws_to_complete(np.random.default_rng([seed, trial]), cdf, n_types, limit)
    draws.sort()

    points = [2 ** e for e in range(config.CCP_CURVE_MAX_EXPONENT + 1)]
    reached = np.searchsorted(draws, points, side='right') / trials
    analytic = None
    if np.allclose(w, 1.0 / n_types):
        analytic = uniform_expectation(n_types)
    elif n_types <= MAX_EXACT_TYPES:
        analytic = weighted_expectation(w.tolist())

    estimate = CcpEstimate(
        n_types=n_types,
        weights=tuple(w.tolist()),
        trials=trials,
        mean_draws=float(draws.mean()),
        sd_draws=float(draws.std(ddof=1)) if trials > 1 else 0.0,
        curve=tuple(zip(points, (float(p) for p in reached))),
        analytic_mean=analytic,
        sorted_draws=tuple(int(d) for d in draws),
    )
    logger.info("CCP over %d types, %d trials: mean %.2f draws", n_types, trials, estimate.mean_draws)
    return estimate


def ccp_from_report(report: CoverageReport, trials: int, seed: int) -> Tuple[CcpEstimate, str]:
    """Unknown-N variant: collect the observed feasible codes at their observed rates.

    Returns the estimate and a caveat naming the feasible codes never seen,
    whose true mass the estimate cannot account for.
    """
    if report.total == 0:
        raise NeverCompletes("no observations to estimate weights from")
    observed = [(code, n) for code, n in report.counts.items() if n > 0]
    weights = [n / report.total for _, n in observed]
    unseen = [code for code, n in report.counts.items() if code.feasible and n == 0]
    estimate = ccp_mc(weights, trials, seed)
    if unseen:
        caveat = (f"{len(unseen)} feasible codes were never observed; their probability mass is unknown, "
                  f"so the estimate covers the {len(observed)} observed codes only")
    else:
        caveat = "every feasible code was observed"
    return estimate, caveat


def completion_draws(estimate: CcpEstimate, probability: float) -> int:
    """Smallest draw count whose empirical completion probability reaches `probability`."""
    if not 0.0 < probability <= 1.0:
        raise ValueError("probability must lie in (0, 1]")
    index = max(0, math.ceil(probability * estimate.trials) - 1)
    return estimate.sorted_draws[index]
