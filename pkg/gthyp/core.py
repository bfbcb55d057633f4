"""Binary test designs, response vectors, the cover relation and decision rules.

Columns of a test matrix are stored twice: as the N x t 0/1 array the user
sees, and as packed 64-bit words (one row of words per column) so that a
disjunctive sum is a bitwise OR and a response weight is a popcount.

Item indices are 0-based in this API. Text formats and CLI output use 1-based
labels; conversion happens at those boundaries only.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import islice
from math import comb

import numpy as np

from .errors import InputError, ParseError, ResourceError

DEFAULT_ENUMERATION_CAP = 10**8
SUBSET_CHUNK = 4096

# Subset tables up to this many rows are built once and cached.
_TABLE_LIMIT = 1 << 18

_HEADER_RE = re.compile(r"[1-9][0-9]* [1-9][0-9]*")


class Hypothesis(str, enum.Enum):
    H0 = "H0"  # |S| <= s
    H1 = "H1"  # |S| >= s + 1


# ── Bit packing ────────────────────────────────────────────────────


def n_words(n_bits: int) -> int:
    return max(1, -(-n_bits // 64))


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack an (m, n) 0/1 array into (m, ceil(n/64)) uint64 words."""
    m, n = bits.shape
    width = n_words(n)
    padded = np.zeros((m, width * 64), dtype=np.uint8)
    padded[:, :n] = bits
    packed = np.packbits(padded.reshape(m, width, 64), axis=2, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(m, width).astype(np.uint64)


def unpack_row(words: np.ndarray, n: int) -> np.ndarray:
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def popcount(words: np.ndarray) -> np.ndarray:
    """Number of ones per row of an (m, W) word array."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# ── Domain types ───────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class ResponseVector:
    """Outcome of the N pooled tests: bits[i] = 1 iff test i is positive."""

    bits: np.ndarray
    weight: int = field(init=False)
    words: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size == 0:
            raise InputError("response vector must be a non-empty 1-D array")
        if not np.isin(bits, (0, 1)).all():
            raise InputError("response vector entries must be 0 or 1")
        bits = _frozen(bits.astype(np.uint8, copy=True))
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "words", _frozen(pack_rows(bits[None, :])[0]))
        object.__setattr__(self, "weight", int(bits.sum()))

    @classmethod
    def from_words(cls, words: np.ndarray, length: int) -> ResponseVector:
        return cls(unpack_row(words, length))

    @classmethod
    def zeros(cls, length: int) -> ResponseVector:
        return cls(np.zeros(length, dtype=np.uint8))

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResponseVector):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, eq=False)
class TestMatrix:
    """N x t binary test design. bits[i, j] = 1 iff item j is in test i."""

    __test__ = False  # not a pytest class

    bits: np.ndarray
    words: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise InputError(f"test matrix must be 2-D, got shape {bits.shape}")
        if bits.shape[0] < 1 or bits.shape[1] < 1:
            raise InputError(f"test matrix needs N >= 1 and t >= 1, got {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise InputError("test matrix entries must be 0 or 1")
        bits = _frozen(bits.astype(np.uint8, copy=True))
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "words", _frozen(pack_rows(bits.T)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int] | str]) -> TestMatrix:
        """Build from a list of columns, each a 0/1 sequence or a string like "110"."""
        cols = [[int(c) for c in col] for col in columns]
        return cls(np.array(cols, dtype=np.uint8).T)

    @classmethod
    def identity(cls, size: int) -> TestMatrix:
        return cls(np.eye(size, dtype=np.uint8))

    @property
    def n_tests(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_items(self) -> int:
        return int(self.bits.shape[1])

    def column(self, j: int) -> ResponseVector:
        return ResponseVector(self.bits[:, j])

    def column_weights(self) -> np.ndarray:
        return self.bits.sum(axis=0)

    def constant_weight(self) -> int | None:
        """The common column weight, or None when columns differ in weight."""
        weights = self.column_weights()
        return int(weights[0]) if (weights == weights[0]).all() else None

    def __eq__(self, other) -> bool:
        if not isinstance(other, TestMatrix):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))

    # Matrix text format: "N t", then N rows of t characters from {0,1}.

    def to_text(self) -> str:
        rows = ["".join("1" if b else "0" for b in row) for row in self.bits]
        return f"{self.n_tests} {self.n_items}\n" + "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str, path: str | None = None) -> TestMatrix:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ParseError("empty matrix file", line=1, path=path)
        if not _HEADER_RE.fullmatch(lines[0]):
            raise ParseError(
                f"header must be 'N t' with positive integers, got {lines[0]!r}",
                line=1, path=path,
            )
        n, t = (int(v) for v in lines[0].split(" "))
        rows = []
        for i in range(n):
            lineno = i + 2
            if i + 1 >= len(lines):
                raise ParseError(f"expected {n} rows, file ends early", line=lineno, path=path)
            row = lines[i + 1]
            if len(row) != t:
                raise ParseError(f"expected {t} characters, got {len(row)}", line=lineno, path=path)
            bad = next((c for c in row if c not in "01"), None)
            if bad is not None:
                raise ParseError(f"invalid character {bad!r}", line=lineno, path=path)
            rows.append([1 if c == "1" else 0 for c in row])
        if len(lines) > n + 1:
            raise ParseError("unexpected content after last row", line=n + 2, path=path)
        return cls(np.array(rows, dtype=np.uint8))


@dataclass(frozen=True)
class DefectiveSet:
    """Sorted, distinct 0-based item indices."""

    members: tuple[int, ...] = ()

    def __post_init__(self):
        members = tuple(sorted(int(m) for m in self.members))
        if len(set(members)) != len(members):
            raise InputError(f"defective set has repeated items: {members}")
        if members and members[0] < 0:
            raise InputError(f"item index {members[0]} is negative")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> DefectiveSet:
        """Build from 1-based item labels."""
        return cls(tuple(int(label) - 1 for label in labels))

    def labels(self) -> tuple[int, ...]:
        return tuple(m + 1 for m in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def union(self, other: DefectiveSet) -> DefectiveSet:
        return DefectiveSet(tuple(set(self.members) | set(other.members)))


@dataclass(frozen=True)
class CompRule:
    """COMP: accept H0 iff at most s columns are covered by the response."""

    s: int

    def __post_init__(self):
        if self.s < 1:
            raise InputError(f"COMP parameter s must be >= 1, got {self.s}")

    label = "COMP"

    @property
    def parameter(self) -> int:
        return self.s


@dataclass(frozen=True)
class WeightRule:
    """Weight decision rule: accept H0 iff the response weight is <= threshold."""

    threshold: int

    def __post_init__(self):
        if self.threshold < 0:
            raise InputError(f"threshold T must be >= 0, got {self.threshold}")

    label = "WDR"

    @property
    def parameter(self) -> int:
        return self.threshold

    @classmethod
    def from_tau(cls, tau: float, n_tests: int) -> WeightRule:
        """T = floor(tau * N)."""
        if not 0 < tau < 1:
            raise InputError(f"tau must be in (0, 1), got {tau}")
        return cls(int(np.floor(tau * n_tests)))


DecisionRule = CompRule | WeightRule


@dataclass(frozen=True)
class SizeDistribution:
    """Distribution (p_0, ..., p_t) of the defective-set size."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise InputError("size distribution is empty")
        if any(p < 0 for p in probs):
            raise InputError("size distribution has a negative entry")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise InputError(f"size distribution sums to {sum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def worst_case(cls, s: int, t: int) -> SizeDistribution:
        """p_s = p_{s+1} = 1/2, the distribution attaining the universal error."""
        probs = [0.0] * (t + 1)
        probs[s] = probs[s + 1] = 0.5
        return cls(tuple(probs))

    @classmethod
    def point(cls, k: int, t: int) -> SizeDistribution:
        probs = [0.0] * (t + 1)
        probs[k] = 1.0
        return cls(tuple(probs))

    def support(self) -> list[int]:
        return [k for k, p in enumerate(self.probs) if p > 0]


# ── Subset enumeration ─────────────────────────────────────────────


def iter_subsets(t: int, k: int) -> Iterator[tuple[int, ...]]:
    """k-subsets of range(t) in colexicographic order."""
    if k == 0:
        yield ()
        return
    for top in range(k - 1, t):
        for rest in iter_subsets(top, k - 1):
            yield rest + (top,)


@lru_cache(maxsize=32)
def _subset_table(t: int, k: int) -> np.ndarray:
    table = np.array(list(iter_subsets(t, k)), dtype=np.intp).reshape(comb(t, k), k)
    return _frozen(table)


def subset_chunks(t: int, k: int, chunk_size: int = SUBSET_CHUNK) -> Iterator[np.ndarray]:
    """Yield (m, k) index arrays covering all k-subsets of range(t) in colex order."""
    count = comb(t, k)
    if count <= _TABLE_LIMIT:
        table = _subset_table(t, k)
        for start in range(0, count, chunk_size):
            yield table[start:start + chunk_size]
        return
    subsets = iter_subsets(t, k)
    while chunk := list(islice(subsets, chunk_size)):
        yield np.array(chunk, dtype=np.intp).reshape(len(chunk), k)


def check_budget(evaluations: int, cap: int | None, what: str) -> None:
    cap = DEFAULT_ENUMERATION_CAP if cap is None else cap
    if evaluations > cap:
        raise ResourceError(
            f"{what} needs {evaluations} subset evaluations, over the cap of {cap}; "
            "use the Monte Carlo method or raise the cap"
        )


def responses_of(matrix: TestMatrix, subsets: np.ndarray) -> np.ndarray:
    """Packed responses (m, W) for an (m, k) array of subsets."""
    m, k = subsets.shape
    if k == 0:
        return np.zeros((m, matrix.words.shape[1]), dtype=np.uint64)
    return np.bitwise_or.reduce(matrix.words[subsets], axis=1)


def covered_mask(matrix: TestMatrix, responses: np.ndarray) -> np.ndarray:
    """(m, t) boolean: column j is covered by response row i."""
    outside = matrix.words[None, :, :] & ~responses[:, None, :]
    return ~outside.any(axis=2)


# ── Operations ─────────────────────────────────────────────────────


def _check_members(matrix: TestMatrix, defectives: DefectiveSet) -> None:
    if defectives.members and defectives.members[-1] >= matrix.n_items:
        raise InputError(
            f"item index {defectives.members[-1]} out of range for t={matrix.n_items}"
        )


def response(matrix: TestMatrix, defectives: DefectiveSet) -> ResponseVector:
    """Bitwise OR of the columns in the defective set; all-zero when it is empty."""
    _check_members(matrix, defectives)
    subsets = np.array([defectives.members], dtype=np.intp).reshape(1, len(defectives))
    return ResponseVector.from_words(responses_of(matrix, subsets)[0], matrix.n_tests)


def covers(u: ResponseVector, v: ResponseVector) -> bool:
    """True iff u OR v == u."""
    if len(u) != len(v):
        raise InputError(f"length mismatch: {len(u)} vs {len(v)}")
    return bool(np.array_equal(u.words | v.words, u.words))


def covered_columns(matrix: TestMatrix, y: ResponseVector) -> frozenset[int]:
    if len(y) != matrix.n_tests:
        raise InputError(f"response has length {len(y)}, matrix has N={matrix.n_tests}")
    mask = covered_mask(matrix, y.words[None, :])[0]
    return frozenset(int(j) for j in np.flatnonzero(mask))


def decide(rule: DecisionRule, matrix: TestMatrix, y: ResponseVector) -> Hypothesis:
    match rule:
        case WeightRule(threshold=threshold):
            return Hypothesis.H0 if y.weight <= threshold else Hypothesis.H1
        case CompRule(s=s):
            return Hypothesis.H0 if len(covered_columns(matrix, y)) <= s else Hypothesis.H1
    raise InputError(f"unknown decision rule: {rule!r}")


def find_disjunct_violation(
    matrix: TestMatrix, s: int, cap: int | None = None,
) -> tuple[DefectiveSet, int] | None:
    """First s-subset (colex order) whose response covers an outside column.

    Returns (S, j) with j not in S covered by x(S), or None for a disjunctive s-code.
    """
    t = matrix.n_items
    if not 1 <= s <= t - 1:
        raise InputError(f"need 1 <= s <= t-1, got s={s}, t={t}")
    check_budget(comb(t, s) * t, cap, f"disjunctive check (t={t}, s={s})")
    for chunk in subset_chunks(t, s):
        mask = covered_mask(matrix, responses_of(matrix, chunk))
        bad = np.flatnonzero(mask.sum(axis=1) > s)
        if bad.size:
            row = int(bad[0])
            outside = mask[row].copy()
            outside[chunk[row]] = False
            return DefectiveSet(tuple(chunk[row])), int(np.flatnonzero(outside)[0])
    return None


def is_disjunctive_code(matrix: TestMatrix, s: int, cap: int | None = None) -> bool:
    return find_disjunct_violation(matrix, s, cap) is None
