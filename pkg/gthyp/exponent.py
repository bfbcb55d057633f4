"""Error exponents of the weight and COMP decision rules, in bits.

The central quantity is A(k, Q, q): the decay rate of the probability that k
independent random columns of relative weight Q OR to relative weight q. It
is evaluated through the root y in (0, 1) of

    q = Q (1 + y + ... + y^(k-1)),

and every optimisation below is a vectorised grid search over A followed by
bisection, golden-section or zoom refinement. All arithmetic is float64.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, InputError

logger = logging.getLogger(__name__)

LOG2E = math.log2(math.e)
INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

Y_ITERATIONS = 50  # bisection steps for y: 2^-50 < 1e-13
Q_TOL = 1e-12
TAU_TOL = 1e-8
RATE_TOL = 1e-5
TAU_GRID = 512
COMP_GRID = 256
ZOOM_POINTS = 64
ZOOMS = 3


# ── Elementary helpers ─────────────────────────────────────────────


def _xlog2x(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log2(x)
    return np.where(x > 0, out, 0.0)


def _entropy(Q):
    Q = np.asarray(Q, dtype=float)
    return -(_xlog2x(Q) + _xlog2x(1.0 - Q))


def entropy(Q: float) -> float:
    """Binary entropy h(Q) in bits, with 0 log 0 = 0."""
    if not 0.0 <= Q <= 1.0:
        raise InputError(f"entropy argument must be in [0, 1], got {Q}")
    return float(_entropy(Q))


def positive_part(x: float) -> float:
    return max(x, 0.0)


# ── The root y and the exponent A ──────────────────────────────────


def _geometric(y, k: int):
    """1 + y + ... + y^(k-1) by Horner's rule."""
    acc = np.ones_like(y)
    for _ in range(k - 1):
        acc = 1.0 + y * acc
    return acc


def _solve_y(k: int, Q, q):
    Q, q = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(q, dtype=float))
    lo = np.zeros(Q.shape)
    hi = np.ones(Q.shape)
    for _ in range(Y_ITERATIONS):
        mid = 0.5 * (lo + hi)
        above = Q * _geometric(mid, k) > q
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _check_region(k: int, Q: float, q: float) -> None:
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if not 0.0 < Q < 1.0:
        raise InputError(f"Q must be in (0, 1), got {Q}")
    if not Q < q < min(1.0, k * Q):
        raise InputError(f"q must be in ({Q}, {min(1.0, k * Q)}), got {q}")


def solve_y(k: int, Q: float, q: float) -> float:
    """Unique y in (0, 1) with q = Q (1 - y^k) / (1 - y)."""
    _check_region(k, Q, q)
    return float(_solve_y(k, Q, q))


def _union_exponent(k: int, Q, q):
    """A(k, Q, q) on the closed region Q <= q <= min(1, kQ), using the end limits."""
    Q, q = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(q, dtype=float))
    y = np.clip(_solve_y(k, Q, q), np.finfo(float).tiny, np.nextafter(1.0, 0.0))
    hQ = _entropy(Q)
    with np.errstate(divide="ignore", invalid="ignore"):
        interior = (
            _xlog2x(1.0 - q)
            + q * np.log2(Q)
            + k * (q - Q) * np.log2(y)
            + (k * Q - q) * np.log2(1.0 - y)
            + k * hQ
        )
        at_low = (k - 1) * hQ
        at_high = _xlog2x(1.0 - np.minimum(k * Q, 1.0)) - k * (1.0 - Q) * np.log2(1.0 - Q)
    out = np.where(q <= Q, at_low, np.where(q >= k * Q, at_high, interior))
    return np.maximum(out, 0.0)


def union_exponent(k: int, Q: float, q: float) -> float:
    """A(k, Q, q) in bits for Q < q < min(1, kQ)."""
    _check_region(k, Q, q)
    return float(_union_exponent(k, Q, q))


def union_exponent_limit_low(k: int, Q: float) -> float:
    """A(k, Q, q) as q -> Q from above: (k - 1) h(Q)."""
    return (k - 1) * entropy(Q)


def union_exponent_limit_high(k: int, Q: float) -> float:
    """A(k, Q, q) as q -> kQ from below, for kQ < 1."""
    if not 0.0 < Q < 1.0 / k:
        raise InputError(f"need 0 < Q < 1/k, got Q={Q}, k={k}")
    return float(_xlog2x(1.0 - k * Q) - k * (1.0 - Q) * math.log2(1.0 - Q))


def zero_point(k: int, Q: float) -> float:
    """The q at which A(k, Q, q) vanishes: 1 - (1 - Q)^k."""
    return -math.expm1(k * math.log1p(-Q))


# ── Scalar optimisers ──────────────────────────────────────────────


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float,
) -> tuple[float, float]:
    """Maximise a unimodal f on [a, b]; returns (x, f(x))."""
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


# ── Weight decision rule ───────────────────────────────────────────


@dataclass(frozen=True)
class TauExponent:
    s: int
    tau: float
    Q_star: float
    value: float
    boundary: bool  # Q* = tau/s, where the H0-side error vanishes


@dataclass(frozen=True)
class WdrExponentResult:
    s: int
    tau_star: float
    Q_star: float
    exponent: float
    boundary: bool


def tau_interval(s: int, tau: float) -> tuple[float, float]:
    """Open Q-interval (max{1-(1-tau)^(1/(s+1)), tau/s}, 1-(1-tau)^(1/s))."""
    lower = max(-math.expm1(math.log1p(-tau) / (s + 1)), tau / s)
    upper = -math.expm1(math.log1p(-tau) / s)
    return lower, upper


def _tau_exponents(s: int, taus: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (Q*, value, boundary) for a vector of tau values."""
    taus = np.asarray(taus, dtype=float)
    zero_s1 = -np.expm1(np.log1p(-taus) / (s + 1))
    edge = taus / s
    lower = np.maximum(zero_s1, edge)
    upper = -np.expm1(np.log1p(-taus) / s)

    at_edge_s = _union_exponent(s, edge, taus)
    at_edge_s1 = _union_exponent(s + 1, edge, taus)
    boundary = (edge >= zero_s1) & (at_edge_s <= at_edge_s1)

    def gap(Q):
        return _union_exponent(s, Q, taus) - _union_exponent(s + 1, Q, taus)

    lo, hi = lower.copy(), upper.copy()
    while np.max(hi - lo) > Q_TOL:
        mid = 0.5 * (lo + hi)
        positive = gap(mid) > 0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    root = 0.5 * (lo + hi)

    Q_star = np.where(boundary, edge, root)
    value = np.where(boundary, at_edge_s1, _union_exponent(s, root, taus))
    return Q_star, value, boundary


def tau_exponent(s: int, tau: float) -> TauExponent:
    """Exponent of the weight rule with threshold floor(tau N), optimised over Q."""
    if not 0.0 < tau < 1.0:
        raise InputError(f"tau must be in (0, 1), got {tau}")
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    lower, upper = tau_interval(s, tau)
    if not lower < upper:
        raise DomainError(f"empty Q-interval for s={s}, tau={tau}: ({lower}, {upper})")

    Q_star, value, boundary = _tau_exponents(s, np.array([tau]))
    if not boundary[0]:
        g_lo = union_exponent_at(s, lower, tau) - union_exponent_at(s + 1, lower, tau)
        g_hi = union_exponent_at(s, upper, tau) - union_exponent_at(s + 1, upper, tau)
        logger.debug(f"tau bracket s={s} tau={tau}: g({lower})={g_lo} g({upper})={g_hi}")
        if not (g_lo > 0 > g_hi):
            raise ConvergenceError(
                "no sign change of A(s) - A(s+1) on the Q-interval",
                {"s": s, "tau": tau, "Q_lo": lower, "Q_hi": upper, "g_lo": g_lo, "g_hi": g_hi},
            )
    return TauExponent(s, tau, float(Q_star[0]), float(value[0]), bool(boundary[0]))


def union_exponent_at(k: int, Q: float, q: float) -> float:
    """A(k, Q, q) on the closed region, ends taken as limits."""
    return float(_union_exponent(k, Q, q))


def wdr_exponent(s: int) -> WdrExponentResult:
    """Best exponent of the weight rule over tau, with its optimising tau and Q."""
    if s < 2:
        raise DomainError(f"the weight-rule exponent needs s >= 2, got {s}")
    taus = np.arange(1, TAU_GRID + 1) / (TAU_GRID + 1)
    _, values, _ = _tau_exponents(s, taus)
    i = int(np.argmax(values))

    def value_at(tau: float) -> float:
        return float(_tau_exponents(s, np.array([tau]))[1][0])

    a = taus[i - 1] if i > 0 else taus[0] / 2
    b = taus[i + 1] if i + 1 < taus.size else (taus[-1] + 1.0) / 2
    tau_star, _ = golden_section_max(value_at, a, b, TAU_TOL)
    if value_at(tau_star) < values[i]:
        tau_star = float(taus[i])
    best = tau_exponent(s, tau_star)
    logger.debug(f"wdr exponent s={s}: tau={best.tau} Q={best.Q_star} E={best.value}")
    return WdrExponentResult(s, best.tau, best.Q_star, best.value, best.boundary)


def wdr_asymptotic_floor(s: int) -> float:
    """log2(e) / (4 s^2), the large-s lower bound of the weight-rule exponent."""
    return LOG2E / (4 * s * s)


# ── COMP ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class CompExponentResult:
    s: int
    R: float
    exponent: float
    Q_opt: float
    q_opt: float


def _comp_terms(s: int, Q, q):
    """(A(s, Q, q), h(Q) - q h(Q/q)) on broadcast grids."""
    Q, q = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(q, dtype=float))
    gain = _entropy(Q) - q * _entropy(np.minimum(Q / q, 1.0))
    return _union_exponent(s, Q, q), gain


def _q_span(s: int, Q):
    return np.minimum(1.0, s * Q) - Q


@lru_cache(maxsize=16)
def _coarse_surface(s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rate-free terms on the starting (Q, q) grid, shared by every rate."""
    Qs = (np.arange(COMP_GRID) + 0.5) / COMP_GRID
    u = np.linspace(0.0, 1.0, COMP_GRID + 1)[None, :]
    union, gain = _comp_terms(s, Qs[:, None], Qs[:, None] + u * _q_span(s, Qs)[:, None])
    for array in (Qs, union, gain):
        array.setflags(write=False)
    return Qs, union, gain


def _inner_min(
    s: int, Qs: np.ndarray, R: float, coarse: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """min over q in [Q, min(1, sQ)] for each Q; returns (values, minimising q)."""
    span = _q_span(s, Qs)[:, None]
    rows = np.arange(Qs.size)
    lo = np.zeros((Qs.size, 1))
    hi = np.ones((Qs.size, 1))
    for level in range(ZOOMS + 1):
        points = COMP_GRID if level == 0 else ZOOM_POINTS
        grid = lo + (hi - lo) * np.linspace(0.0, 1.0, points + 1)[None, :]
        if level == 0 and coarse is not None:
            union, gain = coarse
        else:
            union, gain = _comp_terms(s, Qs[:, None], Qs[:, None] + grid * span)
        values = union + np.maximum(gain - R, 0.0)
        j = np.argmin(values, axis=1)
        best_u = grid[rows, j]
        step = (hi - lo)[:, 0] / points
        lo = np.clip(best_u - step, 0.0, 1.0)[:, None]
        hi = np.clip(best_u + step, 0.0, 1.0)[:, None]
    return values[rows, j], Qs + best_u * span[:, 0]


def comp_exponent(s: int, R: float) -> CompExponentResult:
    """max over Q of min over q of A(s, Q, q) + [h(Q) - q h(Q/q) - R]^+."""
    if s < 2:
        raise DomainError(f"the COMP exponent needs s >= 2, got {s}")
    if not 0.0 <= R < 1.0:
        raise InputError(f"rate must be in [0, 1), got {R}")
    Qs, union, gain = _coarse_surface(s)
    values, q_opts = _inner_min(s, Qs, R, (union, gain))
    step = 1.0 / COMP_GRID
    for _ in range(ZOOMS):
        i = int(np.argmax(values))
        Qs = np.linspace(max(Qs[i] - step, 1e-12), min(Qs[i] + step, 1.0 - 1e-12), ZOOM_POINTS + 1)
        step = Qs[1] - Qs[0]
        values, q_opts = _inner_min(s, Qs, R)
    i = int(np.argmax(values))
    return CompExponentResult(s, R, float(values[i]), float(Qs[i]), float(q_opts[i]))


def _comp_gain_at_zero(s: int, Q):
    q0 = -np.expm1(s * np.log1p(-np.asarray(Q, dtype=float)))
    return _entropy(Q) - q0 * _entropy(Q / q0)


def comp_capacity(s: int) -> float:
    """Largest rate with a positive COMP exponent: max over Q of h(Q) - q0 h(Q/q0)."""
    if s < 2:
        raise DomainError(f"the COMP capacity needs s >= 2, got {s}")
    Qs = (np.arange(1024) + 0.5) / 1024
    i = int(np.argmax(_comp_gain_at_zero(s, Qs)))
    _, value = golden_section_max(
        lambda Q: float(_comp_gain_at_zero(s, Q)),
        max(Qs[i] - 1 / 1024, 1e-12), min(Qs[i] + 1 / 1024, 1 - 1e-12), 1e-10,
    )
    return value


def _bisect_rate(predicate: Callable[[float], bool], hi: float) -> float:
    """sup{R in [0, hi] : predicate(R)} for a predicate true at 0 and false at hi."""
    lo = 0.0
    while hi - lo > RATE_TOL:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def comp_capacity_by_bisection(s: int) -> float:
    """The same capacity, located directly from the exponent's sign."""
    if comp_exponent(s, 0.0).exponent <= 1e-9:
        raise ConvergenceError("COMP exponent is not positive at rate 0", {"s": s})
    return _bisect_rate(lambda R: comp_exponent(s, R).exponent > 1e-9, 1.0 - RATE_TOL)


def wdr_crossover_rate(s: int, e_wdr: float | None = None, c_comp: float | None = None) -> float:
    """Largest rate at which the COMP exponent still beats the weight-rule exponent."""
    e_wdr = wdr_exponent(s).exponent if e_wdr is None else e_wdr
    c_comp = comp_capacity(s) if c_comp is None else c_comp
    at_zero = comp_exponent(s, 0.0).exponent
    if at_zero <= e_wdr:
        raise ConvergenceError(
            "COMP exponent at rate 0 does not exceed the weight-rule exponent",
            {"s": s, "E_comp0": at_zero, "E_wdr": e_wdr},
        )
    return _bisect_rate(lambda R: comp_exponent(s, R).exponent > e_wdr, c_comp)


# ── Converse ───────────────────────────────────────────────────────


def lower_bound_error(n_tests: int, n_items: int, s: int) -> float:
    """(1/2)(2^(-N/s) t/(t-s) - s/(t-s)), clamped at 0."""
    if n_tests < 1:
        raise InputError(f"N must be >= 1, got {n_tests}")
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    if n_items <= s:
        raise InputError(f"need t > s, got t={n_items}, s={s}")
    value = 0.5 * (2.0 ** (-n_tests / s) * n_items - s) / (n_items - s)
    return max(value, 0.0)
