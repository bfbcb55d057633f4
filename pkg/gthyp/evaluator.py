"""Exact and Monte Carlo error probabilities of decision rules on a fixed design.

Exact mode enumerates every k-subset of items in colex order, chunk by chunk,
and reduces per-chunk histograms with integer sums. Monte Carlo mode draws
uniform subsets in fixed-size blocks, each block with its own derived seed.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from math import comb

import numpy as np

from .core import (
    CompRule,
    DecisionRule,
    SizeDistribution,
    TestMatrix,
    WeightRule,
    check_budget,
    covered_mask,
    popcount,
    responses_of,
    subset_chunks,
)
from .errors import InputError
from .parallel import ordered_map

logger = logging.getLogger(__name__)

MC_BLOCK = 1000
Z_95 = 1.96


@dataclass(frozen=True)
class ErrorPair:
    """err_h0 = P(accept H1 | H0), err_h1 = P(accept H0 | H1)."""

    err_h0: float
    err_h1: float

    def __post_init__(self):
        for name in ("err_h0", "err_h1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(f"{name} must be in [0, 1], got {value}")

    @property
    def eps(self) -> float:
        return max(self.err_h0, self.err_h1)


@dataclass(frozen=True)
class ExactCounts:
    b1_s: int  # s-subsets with response weight > T
    b2_s1: int  # (s+1)-subsets with response weight <= T
    denom_s: int
    denom_s1: int

    def __post_init__(self):
        if not 0 <= self.b1_s <= self.denom_s or not 0 <= self.b2_s1 <= self.denom_s1:
            raise InputError(f"inconsistent counts: {self}")

    def exact(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.b1_s, self.denom_s), Fraction(self.b2_s1, self.denom_s1)

    def errors(self) -> ErrorPair:
        return ErrorPair(self.b1_s / self.denom_s, self.b2_s1 / self.denom_s1)


@dataclass(frozen=True)
class MCEstimate:
    point: ErrorPair
    half_width: tuple[float, float]
    trials: int

    def contains(self, exact: ErrorPair) -> bool:
        return (
            abs(self.point.err_h0 - exact.err_h0) <= self.half_width[0]
            and abs(self.point.err_h1 - exact.err_h1) <= self.half_width[1]
        )


def _check_sizes(matrix: TestMatrix, s: int) -> None:
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    if s + 1 > matrix.n_items:
        raise InputError(f"need s + 1 <= t, got s={s}, t={matrix.n_items}")


def _check_threshold(matrix: TestMatrix, threshold: int) -> None:
    if not 0 <= threshold <= matrix.n_tests:
        raise InputError(f"threshold must be in [0, {matrix.n_tests}], got {threshold}")


# ── Histograms over all k-subsets ──────────────────────────────────


def _reduce_chunks(
    matrix: TestMatrix, k: int, fn: Callable[[np.ndarray], np.ndarray], size: int, threads: int,
) -> np.ndarray:
    total = np.zeros(size, dtype=np.int64)
    chunks = subset_chunks(matrix.n_items, k)
    while batch := list(islice(chunks, max(1, threads) * 4)):
        for part in ordered_map(fn, batch, threads):
            total += part
    return total


def weight_histogram(
    matrix: TestMatrix, k: int, cap: int | None = None, threads: int = 1,
) -> np.ndarray:
    """hist[w] = number of k-subsets whose response has weight w."""
    check_budget(comb(matrix.n_items, k), cap, f"weight histogram (t={matrix.n_items}, k={k})")
    size = matrix.n_tests + 1

    def count(chunk: np.ndarray) -> np.ndarray:
        return np.bincount(popcount(responses_of(matrix, chunk)), minlength=size)

    return _reduce_chunks(matrix, k, count, size, threads)


def covered_histogram(
    matrix: TestMatrix, k: int, cap: int | None = None, threads: int = 1,
) -> np.ndarray:
    """hist[c] = number of k-subsets whose response covers exactly c columns."""
    t = matrix.n_items
    check_budget(comb(t, k) * t, cap, f"cover histogram (t={t}, k={k})")
    size = t + 1

    def count(chunk: np.ndarray) -> np.ndarray:
        covered = covered_mask(matrix, responses_of(matrix, chunk)).sum(axis=1)
        return np.bincount(covered, minlength=size)

    return _reduce_chunks(matrix, k, count, size, threads)


def wdr_counts_from_histograms(
    hist_s: np.ndarray, hist_s1: np.ndarray, threshold: int,
) -> ExactCounts:
    return ExactCounts(
        b1_s=int(hist_s[threshold + 1:].sum()),
        b2_s1=int(hist_s1[:threshold + 1].sum()),
        denom_s=int(hist_s.sum()),
        denom_s1=int(hist_s1.sum()),
    )


# ── Exact errors ───────────────────────────────────────────────────


def exact_wdr_counts(
    matrix: TestMatrix, s: int, threshold: int, cap: int | None = None, threads: int = 1,
) -> ExactCounts:
    _check_sizes(matrix, s)
    _check_threshold(matrix, threshold)
    t = matrix.n_items
    check_budget(comb(t, s) + comb(t, s + 1), cap, f"exact WDR error (t={t}, s={s})")
    hist_s = weight_histogram(matrix, s, cap, threads)
    hist_s1 = weight_histogram(matrix, s + 1, cap, threads)
    return wdr_counts_from_histograms(hist_s, hist_s1, threshold)


def universal_error_wdr(
    matrix: TestMatrix, s: int, threshold: int, cap: int | None = None, threads: int = 1,
) -> ErrorPair:
    """Error pair at the worst size distribution p_s = p_{s+1} = 1/2; `.eps` is the universal error."""
    return exact_wdr_counts(matrix, s, threshold, cap, threads).errors()


def exact_comp_error(
    matrix: TestMatrix, s: int, cap: int | None = None, threads: int = 1,
) -> ErrorPair:
    _check_sizes(matrix, s)
    t = matrix.n_items
    check_budget((comb(t, s) + comb(t, s + 1)) * t, cap, f"exact COMP error (t={t}, s={s})")
    hist_s = covered_histogram(matrix, s, cap, threads)
    hist_s1 = covered_histogram(matrix, s + 1, cap, threads)
    return ErrorPair(
        int(hist_s[s + 1:].sum()) / comb(t, s),
        int(hist_s1[:s + 1].sum()) / comb(t, s + 1),
    )


def _rejects_h0(matrix: TestMatrix, rule: DecisionRule, responses: np.ndarray) -> np.ndarray:
    match rule:
        case WeightRule(threshold=threshold):
            return popcount(responses) > threshold
        case CompRule(s=s):
            return covered_mask(matrix, responses).sum(axis=1) > s
    raise InputError(f"unknown decision rule: {rule!r}")


def _h1_decisions(
    matrix: TestMatrix, rule: DecisionRule, k: int, threads: int,
) -> int:
    """Number of k-subsets on which the rule accepts H1."""

    def count(chunk: np.ndarray) -> np.ndarray:
        return np.array([np.count_nonzero(_rejects_h0(matrix, rule, responses_of(matrix, chunk)))])

    return int(_reduce_chunks(matrix, k, count, 1, threads)[0])


def general_error(
    matrix: TestMatrix,
    rule: DecisionRule,
    dist: SizeDistribution,
    s: int,
    cap: int | None = None,
    threads: int = 1,
) -> ErrorPair:
    """Conditional errors under an arbitrary size distribution, by exact enumeration.

    Sizes 0..s form H0 and sizes s+1..t form H1. A hypothesis with zero prior
    mass contributes zero error.
    """
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    t = matrix.n_items
    if isinstance(rule, WeightRule):
        _check_threshold(matrix, rule.threshold)
    support = dist.support()
    if support and support[-1] > t:
        raise InputError(f"size distribution puts mass on |S| = {support[-1]} > t = {t}")
    per_subset = t if isinstance(rule, CompRule) else 1
    check_budget(sum(comb(t, k) for k in support) * per_subset, cap, "general error")

    h0_mass = h1_mass = Fraction(0)
    h0_err = h1_err = Fraction(0)
    for k in support:
        p = Fraction(dist.probs[k])
        rejected = Fraction(_h1_decisions(matrix, rule, k, threads), comb(t, k))
        if k <= s:
            h0_mass += p
            h0_err += p * rejected
        else:
            h1_mass += p
            h1_err += p * (1 - rejected)
    return ErrorPair(
        float(h0_err / h0_mass) if h0_mass else 0.0,
        float(h1_err / h1_mass) if h1_mass else 0.0,
    )


def sum_lower_bound(matrix: TestMatrix, s: int, cap: int | None = None) -> float:
    """Half the least error sum any rule can reach at p_s = p_{s+1} = 1/2."""
    _check_sizes(matrix, s)
    t = matrix.n_items
    check_budget(comb(t, s) + comb(t, s + 1), cap, f"sum lower bound (t={t}, s={s})")

    def response_counts(k: int) -> dict[bytes, int]:
        rows = np.concatenate([responses_of(matrix, chunk) for chunk in subset_chunks(t, k)])
        unique, counts = np.unique(rows, axis=0, return_counts=True)
        return {row.tobytes(): int(c) for row, c in zip(unique, counts)}

    n_s, n_s1 = response_counts(s), response_counts(s + 1)
    total = sum(
        min(Fraction(n_s[y], comb(t, s)), Fraction(n_s1[y], comb(t, s + 1)))
        for y in n_s.keys() & n_s1.keys()
    )
    return float(total / 2)


# ── Monte Carlo ────────────────────────────────────────────────────


def _random_subsets(rng: np.random.Generator, t: int, k: int, m: int) -> np.ndarray:
    rows = np.tile(np.arange(t, dtype=np.intp), (m, 1))
    return rng.permuted(rows, axis=1)[:, :k]


def _half_width(p: float, n: int) -> float:
    return Z_95 * math.sqrt(p * (1.0 - p) / n)


def _mc_histograms(
    matrix: TestMatrix,
    s: int,
    trials: int,
    seed: int,
    stat: Callable[[np.ndarray], np.ndarray],
    size: int,
    threads: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Histograms of `stat` over random s-subsets and (s+1)-subsets.

    Block b of hypothesis h (0 for size s, 1 for size s+1) draws its subsets
    from the stream keyed (seed, h, b), so results do not depend on threads.
    """
    _check_sizes(matrix, s)
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    t = matrix.n_items
    n_blocks = -(-trials // MC_BLOCK)

    def run_block(task: tuple[int, int]) -> np.ndarray:
        hypothesis, block = task
        m = min(MC_BLOCK, trials - block * MC_BLOCK)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(hypothesis, block)))
        subsets = _random_subsets(rng, t, s + hypothesis, m)
        return np.bincount(stat(responses_of(matrix, subsets)), minlength=size)

    tasks = [(h, b) for h in (0, 1) for b in range(n_blocks)]
    parts = ordered_map(run_block, tasks, threads)
    return sum(parts[:n_blocks]), sum(parts[n_blocks:])


def mc_weight_histograms(
    matrix: TestMatrix, s: int, trials: int, seed: int, threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Sampled counterparts of `weight_histogram` at sizes s and s+1."""
    return _mc_histograms(matrix, s, trials, seed, popcount, matrix.n_tests + 1, threads)


def mc_error(
    matrix: TestMatrix,
    rule: DecisionRule,
    s: int,
    trials: int,
    seed: int,
    threads: int = 1,
) -> MCEstimate:
    """Estimate the error pair from `trials` uniform s-subsets and (s+1)-subsets.

    Half-widths are normal-approximation 95% intervals.
    """
    if isinstance(rule, WeightRule):
        _check_threshold(matrix, rule.threshold)

    def rejects(responses: np.ndarray) -> np.ndarray:
        return _rejects_h0(matrix, rule, responses).astype(np.intp)

    on_s, on_s1 = _mc_histograms(matrix, s, trials, seed, rejects, 2, threads)
    point = ErrorPair(int(on_s[1]) / trials, int(on_s1[0]) / trials)
    return MCEstimate(
        point=point,
        half_width=(_half_width(point.err_h0, trials), _half_width(point.err_h1, trials)),
        trials=trials,
    )


def evaluate(
    matrix: TestMatrix,
    rule: DecisionRule,
    s: int,
    method: str = "exact",
    trials: int | None = None,
    seed: int | None = None,
    cap: int | None = None,
    threads: int = 1,
) -> ErrorPair:
    """Worst-distribution error pair by the requested method."""
    if method == "exact":
        if isinstance(rule, WeightRule):
            return universal_error_wdr(matrix, s, rule.threshold, cap, threads)
        if rule.s != s:
            raise InputError(f"COMP parameter {rule.s} differs from s={s}")
        return exact_comp_error(matrix, s, cap, threads)
    if method == "monte-carlo":
        if trials is None or seed is None:
            raise InputError("monte-carlo evaluation needs trials and seed")
        return mc_error(matrix, rule, s, trials, seed, threads).point
    raise InputError(f"unknown method {method!r}; expected 'exact' or 'monte-carlo'")


RECORD_FIELDS = (
    "N", "t", "s", "rule", "parameter", "w", "err_h0", "err_h1", "eps", "method", "trials", "seed",
)


@dataclass(frozen=True)
class EvaluationRecord:
    """One evaluated (design, rule) pair, in the column order of RECORD_FIELDS."""

    n_tests: int
    n_items: int
    s: int
    rule: str
    parameter: int
    column_weight: int | None
    errors: ErrorPair
    method: str
    trials: int | None = None
    seed: int | None = None

    def as_row(self) -> list:
        return [
            self.n_tests, self.n_items, self.s, self.rule, self.parameter,
            "" if self.column_weight is None else self.column_weight,
            self.errors.err_h0, self.errors.err_h1, self.errors.eps, self.method,
            "" if self.trials is None else self.trials,
            "" if self.seed is None else self.seed,
        ]


def evaluation_record(
    matrix: TestMatrix,
    rule: DecisionRule,
    s: int,
    errors: ErrorPair,
    method: str,
    trials: int | None = None,
    seed: int | None = None,
) -> EvaluationRecord:
    return EvaluationRecord(
        n_tests=matrix.n_tests,
        n_items=matrix.n_items,
        s=s,
        rule=rule.label,
        parameter=rule.parameter,
        column_weight=matrix.constant_weight(),
        errors=errors,
        method=method,
        trials=trials if method == "monte-carlo" else None,
        seed=seed if method == "monte-carlo" else None,
    )
