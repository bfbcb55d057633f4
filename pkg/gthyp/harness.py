"""Experiment protocols: best-design search over random designs, exponent and search tables.

For every candidate column weight w, `best_matrix_search` draws `repeats`
designs from the constant-weight ensemble, evaluates each one and keeps the
design with the smallest universal error. Design r of weight w is drawn with
seed derive_seed(master_seed, w, r), so a search with more repeats sees the
same designs as a shorter one plus some more.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .core import DEFAULT_ENUMERATION_CAP, CompRule, TestMatrix
from .ensemble import EnsembleSpec, derive_seed, sample_matrix
from .errors import InputError, ResourceError
from .evaluator import (
    ErrorPair,
    exact_comp_error,
    mc_error,
    mc_weight_histograms,
    weight_histogram,
)
from .exponent import comp_capacity, comp_exponent, wdr_crossover_rate, wdr_exponent
from .parallel import ordered_map

logger = logging.getLogger(__name__)

RULES = ("WDR", "COMP")
METHODS = ("exact", "monte-carlo")

# Stream index of the Monte Carlo evaluation seed under a design's key.
_MC_STREAM = 1


@dataclass(frozen=True)
class SearchConfig:
    s: int
    t: int
    N: int
    rule: str
    weights: tuple[int, ...]
    thresholds: tuple[int, ...] = ()
    repeats: int = 1000
    master_seed: int = 0
    method: str = "exact"
    trials: int | None = None
    cap: int | None = None

    def __post_init__(self):
        if self.s < 1 or self.s + 1 > self.t:
            raise InputError(f"need 1 <= s and s + 1 <= t, got s={self.s}, t={self.t}")
        if self.N < 1:
            raise InputError(f"N must be >= 1, got {self.N}")
        if self.rule not in RULES:
            raise InputError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.repeats < 1:
            raise InputError(f"repeats must be >= 1, got {self.repeats}")
        if not self.weights:
            raise InputError("no candidate column weights")
        bad = [w for w in self.weights if not 1 <= w <= self.N]
        if bad:
            raise InputError(f"column weights {bad} outside [1, {self.N}]")
        if self.rule == "WDR":
            if not self.thresholds:
                raise InputError("WDR search needs candidate thresholds")
            bad = [T for T in self.thresholds if not 0 <= T <= self.N]
            if bad:
                raise InputError(f"thresholds {bad} outside [0, {self.N}]")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method == "monte-carlo" and (self.trials is None or self.trials < 1):
            raise InputError("monte-carlo method needs trials >= 1")

    def matrix_seed(self, weight: int, repetition: int) -> int:
        return derive_seed(self.master_seed, weight, repetition)

    def evaluation_seed(self, weight: int, repetition: int) -> int:
        return derive_seed(self.master_seed, weight, repetition, _MC_STREAM)


@dataclass(frozen=True)
class SkippedCandidate:
    weight: int
    reason: str


@dataclass(frozen=True)
class SearchResult:
    config: SearchConfig
    best_matrix: TestMatrix
    best_w: int
    best_T: int | None
    errors: ErrorPair
    seed: int
    repetition: int
    skipped: tuple[SkippedCandidate, ...] = field(default=())

    @property
    def eps(self) -> float:
        return self.errors.eps


def _check_feasible(config: SearchConfig) -> None:
    if config.method != "exact":
        return
    cap = DEFAULT_ENUMERATION_CAP if config.cap is None else config.cap
    per_subset = config.t if config.rule == "COMP" else 1
    needed = (comb(config.t, config.s) + comb(config.t, config.s + 1)) * per_subset
    if needed > cap:
        raise ResourceError(
            f"exact {config.rule} evaluation at t={config.t}, s={config.s} needs {needed} "
            f"subset evaluations, over the cap of {cap}; use method=monte-carlo"
        )


def _wdr_errors(
    config: SearchConfig, matrix: TestMatrix, weight: int, repetition: int,
) -> list[ErrorPair]:
    """Error pair for every candidate threshold, from one pair of weight histograms."""
    if config.method == "exact":
        hist_s = weight_histogram(matrix, config.s, config.cap)
        hist_s1 = weight_histogram(matrix, config.s + 1, config.cap)
    else:
        seed = config.evaluation_seed(weight, repetition)
        hist_s, hist_s1 = mc_weight_histograms(matrix, config.s, config.trials, seed)
    above = np.cumsum(hist_s[::-1])[::-1]  # above[w] = #{weight >= w}
    at_most = np.cumsum(hist_s1)
    n_s, n_s1 = int(hist_s.sum()), int(hist_s1.sum())
    size = hist_s.size
    return [
        ErrorPair(
            int(above[T + 1]) / n_s if T + 1 < size else 0.0,
            int(at_most[T]) / n_s1,
        )
        for T in config.thresholds
    ]


def _comp_errors(config: SearchConfig, matrix: TestMatrix, weight: int, repetition: int) -> ErrorPair:
    if config.method == "exact":
        return exact_comp_error(matrix, config.s, config.cap)
    seed = config.evaluation_seed(weight, repetition)
    return mc_error(matrix, CompRule(config.s), config.s, config.trials, seed).point


def best_matrix_search(config: SearchConfig, threads: int = 1) -> SearchResult:
    """Smallest universal error over random designs and candidate (w, T).

    Ties go to the earliest (w, T, repetition) in configuration order.
    Weights whose evaluation fails with a resource error are skipped and
    reported on the result; if every weight fails the error propagates.
    An exact search over the enumeration cap raises before sampling.
    """
    started = time.monotonic()
    best_key: tuple | None = None
    best: tuple | None = None
    skipped: list[SkippedCandidate] = []
    _check_feasible(config)

    for w_idx, weight in enumerate(config.weights):
        spec = EnsembleSpec(config.N, config.t, weight)

        def evaluate_repetition(r: int, spec=spec, weight=weight):
            matrix = sample_matrix(spec, config.matrix_seed(weight, r))
            if config.rule == "WDR":
                return matrix, _wdr_errors(config, matrix, weight, r)
            return matrix, [_comp_errors(config, matrix, weight, r)]

        try:
            outcomes = ordered_map(evaluate_repetition, range(config.repeats), threads)
        except ResourceError as e:
            logger.warning(f"Skipping w={weight} (N={config.N}, t={config.t}): {e}")
            skipped.append(SkippedCandidate(weight, str(e)))
            continue

        for r, (matrix, pairs) in enumerate(outcomes):
            for T_idx, pair in enumerate(pairs):
                key = (pair.eps, w_idx, T_idx, r)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (matrix, weight, T_idx, pair, r)
        logger.info(
            f"{config.rule} N={config.N} t={config.t} w={weight}: "
            f"best eps so far {best_key[0]:.4f} after {config.repeats} repeats"
        )

    if best is None:
        raise ResourceError(
            f"every candidate weight was skipped for N={config.N}, t={config.t}: "
            + "; ".join(s.reason for s in skipped)
        )

    matrix, weight, T_idx, pair, r = best
    duration_ms = int((time.monotonic() - started) * 1000)
    logger.info(
        f"{config.rule} N={config.N} t={config.t}: eps={pair.eps:.4f} w={weight} "
        f"({duration_ms}ms, {len(skipped)} skipped)"
    )
    return SearchResult(
        config=config,
        best_matrix=matrix,
        best_w=weight,
        best_T=config.thresholds[T_idx] if config.rule == "WDR" else None,
        errors=pair,
        seed=config.matrix_seed(weight, r),
        repetition=r,
        skipped=tuple(skipped),
    )


# ── Tables ─────────────────────────────────────────────────────────


TABLE1_FIELDS = ("s", "E_wdr", "tau_star", "Q_star", "E_comp0", "C_comp", "R_wdr")
TABLE2_FIELDS = (
    "N", "t", "s", "rule", "w", "T", "err_h0", "err_h1", "eps", "method", "trials", "master_seed",
)


@dataclass(frozen=True)
class Table1Row:
    s: int
    E_wdr: float
    tau_star: float
    Q_star: float
    E_comp0: float
    C_comp: float
    R_wdr: float

    def as_row(self) -> list:
        return [getattr(self, name) for name in TABLE1_FIELDS]


@dataclass(frozen=True)
class Table2Row:
    N: int
    t: int
    s: int
    rule: str
    w: int
    T: int | None
    err_h0: float
    err_h1: float
    eps: float
    method: str
    trials: int | None
    master_seed: int

    def as_row(self) -> list:
        values = [getattr(self, name) for name in TABLE2_FIELDS]
        return ["" if v is None else v for v in values]

    @classmethod
    def from_result(cls, result: SearchResult) -> Table2Row:
        config = result.config
        return cls(
            N=config.N,
            t=config.t,
            s=config.s,
            rule=config.rule,
            w=result.best_w,
            T=result.best_T,
            err_h0=result.errors.err_h0,
            err_h1=result.errors.err_h1,
            eps=result.eps,
            method=config.method,
            trials=config.trials if config.method == "monte-carlo" else None,
            master_seed=config.master_seed,
        )


def table1_row(s: int) -> Table1Row:
    wdr = wdr_exponent(s)
    capacity = comp_capacity(s)
    return Table1Row(
        s=s,
        E_wdr=wdr.exponent,
        tau_star=wdr.tau_star,
        Q_star=wdr.Q_star,
        E_comp0=comp_exponent(s, 0.0).exponent,
        C_comp=capacity,
        R_wdr=wdr_crossover_rate(s, wdr.exponent, capacity),
    )


def table1(s_list: list[int], threads: int = 1) -> list[Table1Row]:
    rows = ordered_map(table1_row, s_list, threads)
    for row in rows:
        logger.info(f"table1 s={row.s}: E_wdr={row.E_wdr:.4f} E_comp0={row.E_comp0:.4f}")
    return rows


def table2(scenarios: list[SearchConfig], threads: int = 1) -> list[SearchResult]:
    """Run every scenario in order; rows come from Table2Row.from_result."""
    return [best_matrix_search(config, threads) for config in scenarios]
