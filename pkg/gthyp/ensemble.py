"""Constant-column-weight random designs and the exact union-weight law.

A design from the ensemble has t independent columns, each uniform over the
C(N, w) binary columns of weight w. `union_weight_pmf` gives the exact law of
the weight of the OR of k such columns, by inclusion-exclusion over big
integers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .core import TestMatrix
from .errors import InputError

logger = logging.getLogger(__name__)


def weight_from_Q(n_tests: int, Q: float) -> int:
    """Column weight floor(Q N), never less than 1."""
    if n_tests < 1:
        raise InputError(f"N must be >= 1, got {n_tests}")
    if not 0 < Q < 1:
        raise InputError(f"Q must be in (0, 1), got {Q}")
    return max(1, math.floor(Q * n_tests))


@dataclass(frozen=True)
class EnsembleSpec:
    n_tests: int
    n_items: int
    column_weight: int

    def __post_init__(self):
        if self.n_tests < 1:
            raise InputError(f"N must be >= 1, got {self.n_tests}")
        if self.n_items < 1:
            raise InputError(f"t must be >= 1, got {self.n_items}")
        if not 1 <= self.column_weight <= self.n_tests:
            raise InputError(
                f"column weight must be in [1, {self.n_tests}], got {self.column_weight}"
            )


def derive_seed(master_seed: int, *key: int) -> int:
    """64-bit seed for the stream identified by `key` under `master_seed`."""
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, np.uint64)[0])


def sample_matrix(spec: EnsembleSpec, seed: int) -> TestMatrix:
    """Draw a design: each column's support is the first w entries of a row shuffle."""
    rng = np.random.default_rng(seed)
    rows = np.tile(np.arange(spec.n_tests), (spec.n_items, 1))
    support = rng.permuted(rows, axis=1)[:, :spec.column_weight]
    bits = np.zeros((spec.n_tests, spec.n_items), dtype=np.uint8)
    bits[support, np.arange(spec.n_items)[:, None]] = 1
    return TestMatrix(bits)


# ── Union-weight law ───────────────────────────────────────────────


def union_weight_count(n_tests: int, k: int, column_weight: int, w: int) -> int:
    """Number of ordered k-tuples of weight-w̄ columns whose OR has weight w."""
    if w < column_weight or w > min(n_tests, k * column_weight):
        return 0
    onto = sum(
        (-1) ** i * math.comb(w, i) * math.comb(w - i, column_weight) ** k
        for i in range(w - column_weight + 1)
    )
    return math.comb(n_tests, w) * onto


@dataclass(frozen=True)
class UnionWeightPMF:
    """Exact law of the OR weight of k independent weight-w̄ columns of length N.

    `counts[w]` is the number of ordered column tuples giving weight w; every
    probability is counts[w] / total with total = C(N, w̄)^k.
    """

    n_tests: int
    k: int
    column_weight: int
    counts: dict[int, int]
    total: int

    @property
    def support(self) -> range:
        return range(self.column_weight, min(self.n_tests, self.k * self.column_weight) + 1)

    def exact(self, w: int) -> Fraction:
        return Fraction(self.counts.get(w, 0), self.total)

    def probability(self, w: int) -> float:
        return float(self.exact(w))

    @cached_property
    def pmf(self) -> dict[int, float]:
        return {w: self.probability(w) for w in self.support}

    def at_most(self, threshold: int) -> Fraction:
        """P(weight <= threshold)."""
        return Fraction(sum(c for w, c in self.counts.items() if w <= threshold), self.total)

    def above(self, threshold: int) -> Fraction:
        """P(weight > threshold)."""
        return 1 - self.at_most(threshold)


def union_weight_pmf(n_tests: int, k: int, column_weight: int) -> UnionWeightPMF:
    if n_tests < 1:
        raise InputError(f"N must be >= 1, got {n_tests}")
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if not 1 <= column_weight <= n_tests:
        raise InputError(f"column weight must be in [1, {n_tests}], got {column_weight}")
    top = min(n_tests, k * column_weight)
    counts = {
        w: union_weight_count(n_tests, k, column_weight, w)
        for w in range(column_weight, top + 1)
    }
    return UnionWeightPMF(
        n_tests=n_tests,
        k=k,
        column_weight=column_weight,
        counts=counts,
        total=math.comb(n_tests, column_weight) ** k,
    )


# ── Ensemble-average error of the weight rule ──────────────────────


@dataclass(frozen=True)
class EnsembleBound:
    """Ensemble probabilities of the two WDR failure events.

    p_h0: an s-subset's response weight exceeds T.
    p_h1: an (s+1)-subset's response weight is at most T.
    The expected universal error over the ensemble lies in [lower, upper].
    """

    n_tests: int
    s: int
    threshold: int
    column_weight: int
    p_h0: Fraction
    p_h1: Fraction

    @property
    def lower(self) -> float:
        return float(max(self.p_h0, self.p_h1))

    @property
    def upper(self) -> float:
        return float(min(Fraction(1), self.p_h0 + self.p_h1))


def ensemble_wdr_error(n_tests: int, s: int, threshold: int, column_weight: int) -> EnsembleBound:
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    if not 0 <= threshold <= n_tests:
        raise InputError(f"threshold must be in [0, {n_tests}], got {threshold}")
    p_h0 = union_weight_pmf(n_tests, s, column_weight).above(threshold)
    p_h1 = union_weight_pmf(n_tests, s + 1, column_weight).at_most(threshold)
    return EnsembleBound(n_tests, s, threshold, column_weight, p_h0, p_h1)


def best_ensemble_design(n_tests: int, s: int) -> EnsembleBound:
    """Minimise p_h0 + p_h1 over column weights and thresholds; ties go to smaller (w̄, T)."""
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    best: EnsembleBound | None = None
    for column_weight in range(1, n_tests + 1):
        law_s = union_weight_pmf(n_tests, s, column_weight)
        law_s1 = union_weight_pmf(n_tests, s + 1, column_weight)
        for threshold in range(n_tests + 1):
            candidate = EnsembleBound(
                n_tests, s, threshold, column_weight,
                law_s.above(threshold), law_s1.at_most(threshold),
            )
            if best is None or candidate.p_h0 + candidate.p_h1 < best.p_h0 + best.p_h1:
                best = candidate
    logger.debug(f"best ensemble design N={n_tests} s={s}: w={best.column_weight} T={best.threshold}")
    return best
