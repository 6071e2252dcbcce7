"""Rounded value domain and the probabilistic rounding addition operator.

Nonnegative quantities are stored as elements of B = {0} u {(1+delta)^j : j a
nonnegative integer}.  Zero is kept exactly; every other value is identified
by its integer exponent j, so table keys built from these values hash and
compare exactly.

Adding two stored values x1, x2 re-rounds the true sum onto the grid:

    x1 (+) x2 = (1+delta)^floor(log_{1+delta}(x1+x2) + r)

with r drawn uniformly from (0,1).  The fractional part p of the base-(1+delta)
logarithm of the sum equals the probability of landing on the upper of the two
bracketing exponents, which makes the rounding unbiased in the log domain.
In deterministic mode r is pinned to 1/2 (round to the nearest exponent); in
exact mode no rounding happens at all and the dynamic programs fall back to
plain integer arithmetic.

Randomness comes from a counter-based stream: each draw is a pure function of
(seed, stream id, draw counter), so results are reproducible regardless of
evaluation order or thread count.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

RANDOMIZED = "randomized"
DETERMINISTIC = "deterministic"
EXACT = "exact"

MODES = (RANDOMIZED, DETERMINISTIC, EXACT)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Exponent code used by the dynamic-programming tables in rounded modes.
ZERO_CODE = -1


def _mix64(x: int) -> int:
    """splitmix64 finalizer; a bijective 64-bit mixer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _hash_parts(parts: tuple) -> int:
    """Stable 64-bit digest of a tuple of ints/strings/nested tuples."""
    raw = repr(parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "big")


class RandomStream:
    """Deterministic multi-stream uniform source.

    A stream is identified by (seed, stream id); consecutive calls to
    :meth:`uniform` advance a draw counter.  Identical identifiers always
    reproduce the identical sequence, and distinct stream ids give
    statistically independent sequences, so concurrent consumers only need
    disjoint ids.
    """

    __slots__ = ("seed", "stream_id", "_key", "_counter")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed & _MASK64
        self.stream_id = stream_id & _MASK64
        self._key = _mix64(self.seed ^ _mix64(self.stream_id ^ _GOLDEN))
        self._counter = 0

    def substream(self, *parts) -> "RandomStream":
        """Child stream whose id is a stable hash of `parts`.

        Parts may be ints, strings or nested tuples of those; the derivation
        does not depend on interpreter hash randomization.
        """
        return RandomStream(self.seed, self.stream_id ^ _hash_parts(parts))

    @property
    def counter(self) -> int:
        return self._counter

    def uniform(self) -> float:
        """Next uniform real, strictly inside (0, 1)."""
        v = _mix64(self._key ^ ((self._counter * _GOLDEN) & _MASK64))
        self._counter += 1
        return ((v >> 11) + 0.5) * (2.0 ** -53)

    def uniform_block(self, count: int) -> np.ndarray:
        """Vectorized equivalent of `count` consecutive :meth:`uniform` calls."""
        start = self._counter
        self._counter += count
        ctr = (np.arange(start, start + count, dtype=np.uint64)
               * np.uint64(_GOLDEN)) ^ np.uint64(self._key)
        x = ctr
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        x = x ^ (x >> np.uint64(31))
        return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


@dataclass(frozen=True, slots=True)
class ApproxValue:
    """Element of the rounded domain: exact zero or (1+delta)^exponent.

    `exponent is None` encodes zero; otherwise the exponent is a nonnegative
    integer.  The numeric value depends on the context's delta, which is not
    stored here on purpose: membership in the domain is structural.
    """

    exponent: int | None

    def __post_init__(self):
        if self.exponent is not None and self.exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")

    @property
    def is_zero(self) -> bool:
        return self.exponent is None


ZERO = ApproxValue(None)


def power(exponent: int) -> ApproxValue:
    return ApproxValue(exponent)


@dataclass(frozen=True)
class RoundingContext:
    """Parameters governing one rounding run.

    delta:  grid coarseness, must lie in (0, 1/2) in the rounded modes.
    epsilon: target approximation slack, in (0, 1).
    n:      instance size (vertex count) used for the default value cap.
    mode:   randomized | deterministic | exact.
    seed:   base seed for all random streams of the run.
    snap_tolerance: logarithms within this distance of an integer are snapped
            to it before rounding, so exact powers survive float noise.
    cap_value: stored values above this are dropped by the dynamic programs;
            defaults to (1+epsilon) * n**2.
    """

    delta: float
    epsilon: float
    n: int
    mode: str = RANDOMIZED
    seed: int = 0
    snap_tolerance: float = 1e-9
    cap_value: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode != EXACT and not (0.0 < self.delta <= 1.0):
            raise ValueError("delta must lie in (0, 1]")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.cap_value is None:
            object.__setattr__(self, "cap_value",
                               (1.0 + self.epsilon) * float(self.n) ** 2)

    @property
    def ln1pd(self) -> float:
        return math.log1p(self.delta)

    @property
    def cap_exponent(self) -> int:
        """Largest exponent whose value does not exceed cap_value."""
        if self.cap_value <= 0:
            return 0
        return math.floor(self._snapped_log(self.cap_value))

    def _snapped_log(self, s: float) -> float:
        """log base (1+delta) of s, snapped to the nearest integer when close."""
        L = math.log(s) / self.ln1pd
        k = round(L)
        if abs(L - k) < self.snap_tolerance:
            return float(k)
        return L

    def root_stream(self) -> RandomStream:
        return RandomStream(self.seed)


def _as_real(x, ctx: RoundingContext) -> float:
    if isinstance(x, ApproxValue):
        return value_of(x, ctx)
    v = float(x)
    if v < 0:
        raise ValueError("rounded-domain inputs must be nonnegative")
    return v


def value_of(v: ApproxValue, ctx: RoundingContext) -> float:
    """Real value represented by `v` under the context's delta."""
    if v.is_zero:
        return 0.0
    return (1.0 + ctx.delta) ** v.exponent


def up_probability(x1, x2, ctx: RoundingContext) -> float:
    """Probability that rounding the sum x1+x2 lands on the upper exponent.

    Equals the fractional part of log_{1+delta}(x1+x2); raises on zero sum.
    """
    s = _as_real(x1, ctx) + _as_real(x2, ctx)
    if s <= 0:
        raise ValueError("up_probability undefined for zero sum")
    L = ctx._snapped_log(s)
    return L - math.floor(L)


def oplus(x1, x2, ctx: RoundingContext, stream: RandomStream) -> ApproxValue:
    """Rounding addition of two nonnegative reals or ApproxValues.

    Returns ZERO iff both inputs are zero.  Otherwise the result is the
    exponent floor(L + r) where L is the (snapped) base-(1+delta) log of the
    sum; r is drawn from `stream` in randomized mode and is 1/2 in
    deterministic mode.  When the sum is an exact power no draw is consumed,
    since both choices of r give the same exponent.

    Results above the context's cap exponent are returned as-is; callers that
    maintain capped tables are expected to drop such entries.
    """
    if ctx.mode == EXACT:
        raise ValueError("exact mode performs plain integer addition, not oplus")
    s = _as_real(x1, ctx) + _as_real(x2, ctx)
    if s == 0.0:
        return ZERO
    L = ctx._snapped_log(s)
    base = math.floor(L)
    p = L - base
    if p == 0.0:
        j = base
    elif ctx.mode == DETERMINISTIC:
        j = math.floor(L + 0.5)
    else:
        j = base + (1 if stream.uniform() >= 1.0 - p else 0)
    if j < 0:
        raise ValueError("sum below 1 cannot be represented on the grid")
    return ApproxValue(j)


def round_single(x: int, ctx: RoundingContext, stream: RandomStream) -> ApproxValue:
    """Round a single nonnegative integer onto the grid (same law as oplus(x, 0))."""
    if not isinstance(x, int) or isinstance(x, bool):
        raise ValueError("round_single takes a nonnegative integer")
    if x < 0:
        raise ValueError("round_single takes a nonnegative integer")
    return oplus(x, 0, ctx, stream)


@dataclass
class LemmaViolation:
    """One failed always-true per-step inequality, with full context."""

    lemma: str
    node: object
    detail: dict


class Rounder:
    """Mode-dispatched arithmetic used by the dynamic programs.

    Table coordinates are plain ints ("codes").  In the rounded modes a code
    is ZERO_CODE (-1) for exact zero or the grid exponent; in exact mode it is
    the exact nonnegative integer itself.  Keeping codes as ints makes table
    keys cheap to hash, sort and compare.

    Every addition funnels through :meth:`add` / :meth:`add_real`, which also
    verify the lower-bound inequality relating the two operands to the
    rounding-up probability (a consequence of both being grid values); any
    violation would indicate an implementation bug and is recorded rather
    than raised.
    """

    def __init__(self, ctx: RoundingContext, check_lemma3: bool = True):
        self.ctx = ctx
        self.exact = ctx.mode == EXACT
        self._det = ctx.mode == DETERMINISTIC
        self._seed_key = RandomStream(ctx.seed)._key
        self._ln1pd = None if self.exact else ctx.ln1pd
        self._snap = ctx.snap_tolerance
        self._opd = ctx.delta
        self.cap_exponent = None if self.exact else ctx.cap_exponent
        self._slack_exp = None
        if not self.exact:
            self._slack_exp = math.ceil(
                ctx._snapped_log(1.0 + ctx.epsilon) - 1e-12)
        self.check_lemma3 = check_lemma3 and not self.exact
        self.lemma_violations: list[LemmaViolation] = []
        self.exponents_used: set[int] = set()
        self.max_chain_depth = 0

    # -- draws ------------------------------------------------------------

    def _draw(self, sid) -> float:
        v = _mix64(self._seed_key ^ _hash_parts(sid))
        return ((v >> 11) + 0.5) * (2.0 ** -53)

    # -- code arithmetic ---------------------------------------------------

    def zero(self) -> int:
        return 0 if self.exact else ZERO_CODE

    def is_zero(self, a: int) -> bool:
        return a == 0 if self.exact else a == ZERO_CODE

    def real(self, a: int) -> float:
        if self.exact:
            return float(a)
        if a == ZERO_CODE:
            return 0.0
        return (1.0 + self.ctx.delta) ** a

    def _lemma3_check(self, z1: float, z2: float, p: float, sid) -> None:
        # z_small >= delta * p * z_big / 2 must hold whenever both operands
        # are grid values; checked both ways since the roles are symmetric.
        bound = 0.5 * self._opd * p
        tol = 1e-12 * max(z1, z2)
        if z2 + tol < bound * z1 or z1 + tol < bound * z2:
            self.lemma_violations.append(LemmaViolation(
                "operand-lower-bound", sid,
                {"z1": z1, "z2": z2, "p": p, "delta": self._opd}))

    def _round_sum(self, s: float, sid) -> int:
        L = math.log(s) / self._ln1pd
        base = math.floor(L)
        p = L - base
        if p < self._snap or p > 1.0 - self._snap:
            j = round(L)
        elif self._det:
            j = math.floor(L + 0.5)
        else:
            j = base + (1 if self._draw(sid) >= 1.0 - p else 0)
        self.exponents_used.add(j)
        return j

    def add(self, a: int, b: int, sid) -> int:
        """Code for the (rounded) sum of two stored codes."""
        if self.exact:
            return a + b
        if a == ZERO_CODE:
            if b == ZERO_CODE:
                return ZERO_CODE
            self.exponents_used.add(b)
            return b
        if b == ZERO_CODE:
            self.exponents_used.add(a)
            return a
        d1 = 1.0 + self.ctx.delta
        z1 = d1 ** a
        z2 = d1 ** b
        s = z1 + z2
        if self.check_lemma3:
            L = math.log(s) / self._ln1pd
            p = L - math.floor(L)
            if p >= self._snap and p <= 1.0 - self._snap:
                self._lemma3_check(z1, z2, p, sid)
        return self._round_sum(s, sid)

    def add_real(self, a: int, x, sid) -> int:
        """Code for the rounded sum of a stored code and a nonnegative real."""
        if self.exact:
            xi = int(x)
            if xi != x:
                raise ValueError("exact mode requires integer addends")
            return a + xi
        xv = float(x)
        if xv < 0:
            raise ValueError("addend must be nonnegative")
        za = 0.0 if a == ZERO_CODE else (1.0 + self.ctx.delta) ** a
        s = za + xv
        if s == 0.0:
            return ZERO_CODE
        return self._round_sum(s, sid)

    def enter(self, x: int, sid) -> int:
        """Code for a raw nonnegative integer entering a table."""
        if x < 0:
            raise ValueError("table inputs must be nonnegative")
        if self.exact:
            return x
        if x == 0:
            return ZERO_CODE
        return self._round_sum(float(x), sid)

    # -- cap and slack comparisons ----------------------------------------

    def over_cap(self, a: int) -> bool:
        if self.exact:
            return False
        return a != ZERO_CODE and a > self.cap_exponent

    def exceeds_slack(self, a: int, b: int) -> bool:
        """value(a) > (1+epsilon) * value(b)?  Exact mode compares exactly."""
        if self.exact:
            return a > b
        if a == ZERO_CODE:
            return False
        if b == ZERO_CODE:
            return True
        return a > b + self._slack_exp

    def exceeds_slack_int(self, a: int, x: int) -> bool:
        """value(a) > (1+epsilon) * x for an exact integer bound x?"""
        if self.exact:
            return a > x
        if a == ZERO_CODE:
            return False
        bound = (1.0 + self.ctx.epsilon) * x
        if bound <= 0:
            return True
        return a > math.floor(self.ctx._snapped_log(bound))

    def meets_floor_slack(self, a: int, b: int) -> bool:
        """value(a) >= value(b) / (1+epsilon)?  Exact mode: a >= b."""
        if self.exact:
            return a >= b
        if b == ZERO_CODE:
            return True
        if a == ZERO_CODE:
            return False
        return a >= b - self._slack_exp

    def meets_floor_slack_int(self, a: int, x: int) -> bool:
        """value(a) >= x / (1+epsilon) for an exact integer bound x?"""
        if self.exact:
            return a >= x
        if x <= 0:
            return True
        if a == ZERO_CODE:
            return False
        return (1.0 + self.ctx.delta) ** a >= x / (1.0 + self.ctx.epsilon)
