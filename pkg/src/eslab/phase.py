"""Exact mod-1 phases: 128-bit fixed-point angles and polynomial phase streams.

An :class:`Angle` stores a real number mod 1 as an unsigned 128-bit integer
``raw`` interpreted as ``raw / 2**128``.  Addition and integer multiplication
wrap mod ``2**128``, which matches arithmetic mod 1 exactly at ``2**-128``
granularity.  A :class:`PolynomialPhase` is a polynomial

    g(n) = sum_{j=1..k} alpha_j * (n - base)**j

with Angle coefficients and the constant term dropped (only magnitudes of
phase-weighted sums are ever of interest, and those are invariant under a
global unimodular factor).

Streaming evaluation over a window uses an order-k forward-difference table.
Because every quantity is an integer mod 2**128 and polynomial sequences over
Z/M satisfy the difference recurrence exactly, the stream has zero drift: it
reproduces the exact fixed-point value of g(n) at every point.  The hot path
runs on vectorized two-limb (2 x uint64) arithmetic; a pure-Python
incremental generator and a per-point Horner evaluator are kept as
independent cross-checks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError

FRAC_BITS = 128
MODULUS = 1 << FRAC_BITS
_MASK = MODULUS - 1
_MASK64 = (1 << 64) - 1
_HEX_RE = re.compile(r"\A[0-9a-fA-F]{32}\Z")

MAX_DEGREE = 8


def _round_div(num: int, den: int) -> int:
    """Nearest integer to num/den with ties broken to even."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        q += 1
    return q


class Angle:
    """A real number mod 1 in unsigned 128-bit fixed point."""

    __slots__ = ("raw",)

    def __init__(self, raw: int):
        self.raw = raw & _MASK

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "Angle":
        return cls(0)

    @classmethod
    def from_fraction(cls, a, q: int | None = None) -> "Angle":
        """Nearest representable angle to the rational a/q (ties to even)."""
        fr = Fraction(a, q) if q is not None else Fraction(a)
        fr -= math.floor(fr)
        return cls(_round_div(fr.numerator * MODULUS, fr.denominator))

    @classmethod
    def from_float(cls, x: float) -> "Angle":
        x = x - math.floor(x)
        return cls(round(x * MODULUS))

    @classmethod
    def from_hex(cls, s: str) -> "Angle":
        if not _HEX_RE.match(s):
            raise ConfigError(f"angle hex literal must be 32 hex digits, got {s!r}")
        return cls(int(s, 16))

    @classmethod
    def parse(cls, s: str) -> "Angle":
        """Parse an angle from a CLI literal.

        Accepted forms: a rational "a/q", a decimal string ("0.317",
        "1e-9"), or a 32-hex-digit raw value.
        """
        s = s.strip()
        if "/" in s:
            a_str, q_str = s.split("/", 1)
            return cls.from_fraction(int(a_str), int(q_str))
        if "." in s or "e" in s.lower().replace("0x", ""):
            try:
                return cls.from_fraction(Fraction(s))
            except ValueError:
                pass
        if _HEX_RE.match(s):
            return cls.from_hex(s)
        try:
            return cls.from_fraction(int(s), 1)
        except ValueError as exc:
            raise ConfigError(f"cannot parse angle literal {s!r}") from exc

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Angle") -> "Angle":
        return Angle(self.raw + other.raw)

    def __sub__(self, other: "Angle") -> "Angle":
        return Angle(self.raw - other.raw)

    def __neg__(self) -> "Angle":
        return Angle(-self.raw)

    def scaled(self, m: int) -> "Angle":
        """m * self for an arbitrary integer m, exact mod 1."""
        return Angle(self.raw * m)

    def __eq__(self, other) -> bool:
        return isinstance(other, Angle) and self.raw == other.raw

    def __hash__(self) -> int:
        return hash(("Angle", self.raw))

    # -- views -------------------------------------------------------------

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, MODULUS)

    def to_float(self) -> float:
        """Value in [0, 1) to double precision."""
        return self.raw / MODULUS

    def signed(self) -> Fraction:
        """Exact representative in [-1/2, 1/2)."""
        if 2 * self.raw >= MODULUS:
            return Fraction(self.raw - MODULUS, MODULUS)
        return Fraction(self.raw, MODULUS)

    def signed_float(self) -> float:
        if 2 * self.raw >= MODULUS:
            return (self.raw - MODULUS) / MODULUS
        return self.raw / MODULUS

    def norm_exact(self) -> Fraction:
        """Distance to the nearest integer, exact."""
        return Fraction(min(self.raw, MODULUS - self.raw), MODULUS)

    @property
    def norm(self) -> float:
        return min(self.raw, MODULUS - self.raw) / MODULUS

    def to_hex(self) -> str:
        return format(self.raw, "032x")

    def __repr__(self) -> str:
        return f"Angle({self.to_float():.6g})"


def e_of(angle: Angle) -> complex:
    """exp(2*pi*i*angle) from the top 53 bits of the angle."""
    x = (angle.raw >> (FRAC_BITS - 53)) * 2.0**-53
    return complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))


@dataclass(frozen=True)
class PolynomialPhase:
    """Coefficients alpha_1..alpha_k of g(n) = sum alpha_j (n - base)^j."""

    base: int
    coeffs: tuple[Angle, ...]

    def __post_init__(self):
        k = len(self.coeffs)
        if not 1 <= k <= MAX_DEGREE:
            raise ConfigError(f"phase degree must be in [1, {MAX_DEGREE}], got {k}")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @classmethod
    def from_fractions(cls, base: int, coeffs: Iterable) -> "PolynomialPhase":
        return cls(base, tuple(Angle.from_fraction(Fraction(c)) for c in coeffs))

    def raw_coeffs(self) -> tuple[int, ...]:
        return tuple(c.raw for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c.raw == 0 for c in self.coeffs)


def zero_phase(base: int, k: int = 1) -> PolynomialPhase:
    return PolynomialPhase(base, tuple(Angle(0) for _ in range(k)))


def monomial_to_shifted(alpha: Angle, k: int, base: int) -> PolynomialPhase:
    """Rewrite alpha*n^k in the shifted basis around ``base``.

    The coefficient of (n - base)^j is binom(k, j) * base^(k-j) * alpha,
    computed by exact big-integer times fixed-point multiplication.  The
    constant term alpha*base^k is dropped.
    """
    if not 1 <= k <= MAX_DEGREE:
        raise ConfigError(f"monomial degree must be in [1, {MAX_DEGREE}], got {k}")
    coeffs = tuple(
        alpha.scaled(math.comb(k, j) * base ** (k - j)) for j in range(1, k + 1)
    )
    return PolynomialPhase(base, coeffs)


def monomial_constant(alpha: Angle, k: int, base: int) -> Angle:
    """The constant term alpha*base^k that monomial_to_shifted drops."""
    return alpha.scaled(base**k)


def shift_basis(phase: PolynomialPhase, new_base: int) -> PolynomialPhase:
    """Re-express the phase around ``new_base``; same values mod the constant.

    beta_j = sum_{i>=j} binom(i, j) * (new_base - base)^(i-j) * alpha_i,
    with exact big-integer multipliers.
    """
    delta = new_base - phase.base
    if abs(delta) > 1 << 62:
        raise ConfigError("basis shift exceeds 2^62")
    k = phase.degree
    raw = phase.raw_coeffs()
    new_raw = []
    for j in range(1, k + 1):
        acc = 0
        for i in range(j, k + 1):
            acc += math.comb(i, j) * delta ** (i - j) * raw[i - 1]
        new_raw.append(acc & _MASK)
    return PolynomialPhase(new_base, tuple(Angle(r) for r in new_raw))


def phase_at(phase: PolynomialPhase, n: int) -> Angle:
    """g(n) mod 1 by exact big-integer Horner evaluation (the oracle path)."""
    d = n - phase.base
    raw = phase.raw_coeffs()
    acc = raw[-1]
    for j in range(phase.degree - 1, 0, -1):
        acc = (acc * d + raw[j - 1]) & _MASK
    return Angle((acc * d) & _MASK)


# -- streaming over a window ------------------------------------------------
#
# Values g(lo+1), ..., g(lo+H) are produced from the forward-difference table
# seeded at lo+1.  All arithmetic is mod 2**128, carried on two uint64 limbs.


def _diff_seeds(phase: PolynomialPhase, lo: int) -> list[int]:
    """Forward differences Delta^m g(lo+1) for m = 0..k, exact mod 2**128."""
    k = phase.degree
    vals = [phase_at(phase, lo + 1 + i).raw for i in range(k + 1)]
    seeds = [vals[0]]
    cur = vals
    for _ in range(k):
        cur = [(cur[i + 1] - cur[i]) & _MASK for i in range(len(cur) - 1)]
        seeds.append(cur[0])
    return seeds


def _add2(hi_a, lo_a, hi_b, lo_b):
    lo = lo_a + lo_b
    carry = (lo < lo_a).astype(np.uint64)
    hi = hi_a + hi_b + carry
    return hi, lo


def _cumsum2(hi, lo):
    """Prefix sums of two-limb values mod 2**128.

    Each step adds one value < 2**64 to the low limb, so at most one wrap
    occurs per step; carries are the running count of wraps.
    """
    cl = np.cumsum(lo, dtype=np.uint64)
    wrapped = cl < lo
    carries = np.cumsum(wrapped, dtype=np.uint64)
    ch = np.cumsum(hi, dtype=np.uint64) + carries
    return ch, cl


def phase_stream_limbs(phase: PolynomialPhase, lo: int, count: int):
    """(hi, lo) uint64 arrays of g(lo+1..lo+count) in fixed point, exact."""
    if count < 0:
        raise ConfigError("stream length must be nonnegative")
    if abs(lo - phase.base) > 1 << 62 or abs(lo + count - phase.base) > 1 << 62:
        raise ConfigError("window is more than 2^62 away from the phase base")
    if count == 0:
        return np.empty(0, np.uint64), np.empty(0, np.uint64)
    k = phase.degree
    if count <= k + 2:
        vals = [phase_at(phase, lo + 1 + i).raw for i in range(count)]
        hi = np.array([v >> 64 for v in vals], np.uint64)
        lo_ = np.array([v & _MASK64 for v in vals], np.uint64)
        return hi, lo_
    seeds = _diff_seeds(phase, lo)
    hi = np.full(count, np.uint64(seeds[k] >> 64))
    lo_ = np.full(count, np.uint64(seeds[k] & _MASK64))
    for m in range(k - 1, -1, -1):
        ch, cl = _cumsum2(hi, lo_)
        # exclusive prefix: shift right one, seed in front
        hi = np.empty(count, np.uint64)
        lo_ = np.empty(count, np.uint64)
        hi[0] = 0
        lo_[0] = 0
        hi[1:] = ch[:-1]
        lo_[1:] = cl[:-1]
        sh = np.full(count, np.uint64(seeds[m] >> 64))
        sl = np.full(count, np.uint64(seeds[m] & _MASK64))
        hi, lo_ = _add2(hi, lo_, sh, sl)
    return hi, lo_


def phase_stream(phase: PolynomialPhase, lo: int, count: int) -> Iterator[Angle]:
    """Yield g(n) mod 1 for n = lo+1, ..., lo+count as exact Angles."""
    hi, lo_ = phase_stream_limbs(phase, lo, count)
    for h, l in zip(hi.tolist(), lo_.tolist()):
        yield Angle((h << 64) | l)


def phase_stream_incremental(phase: PolynomialPhase, lo: int, count: int) -> Iterator[Angle]:
    """Pure-Python forward-difference stream; independent of the limb engine."""
    if count <= 0:
        return
    k = phase.degree
    table = _diff_seeds(phase, lo)
    for _ in range(count):
        yield Angle(table[0])
        for m in range(k):
            table[m] = (table[m] + table[m + 1]) & _MASK


@dataclass(frozen=True)
class RationalStrip:
    """Result of splitting each coefficient into a/(q*j) plus a remainder.

    The rational parts contribute a constant angle on each residue class of
    (n - base) mod ``modulus`` (= k! * q): reassembling
    e(stripped(n)) * e(offset(class)) reproduces e(g(n)) on each class up to
    the 2**-128 resolution floor.  Offsets are computed in exact rational
    arithmetic on demand (the full table can be huge for large q).
    """

    numerators: tuple[int, ...]
    q: int
    stripped: PolynomialPhase
    modulus: int

    def offset(self, r: int) -> Angle:
        """Constant angle of the rational parts on class (n - base) == r."""
        frac = Fraction(0)
        for j, a_j in enumerate(self.numerators, start=1):
            frac += Fraction(a_j * r**j, self.q * j)
        return Angle.from_fraction(frac - math.floor(frac))

    def offsets(self, limit: int = 1 << 16) -> tuple[Angle, ...]:
        """The full per-class offset table; refuses absurd table sizes."""
        if self.modulus > limit:
            raise ConfigError(
                f"offset table has {self.modulus} classes; query offset(r) instead"
            )
        return tuple(self.offset(r) for r in range(self.modulus))


def rational_part_strip(phase: PolynomialPhase, q: int) -> RationalStrip:
    """Strip the nearest rational a_j/(q*j) from each coefficient.

    a_j is the nearest integer to q*j*alpha_j (ties to even); the stripped
    coefficient is alpha_j - a_j/(q*j) quantized back to fixed point.
    """
    if q <= 0:
        raise ConfigError("strip modulus q must be positive")
    if q > 10**6:
        raise ConfigError("strip modulus q must be at most 10^6")
    k = phase.degree
    mod = math.factorial(k) * q
    nums = []
    stripped_raw = []
    for j in range(1, k + 1):
        raw = phase.coeffs[j - 1].raw
        den = q * j
        a_j = _round_div(raw * den, MODULUS) % den
        rat_raw = _round_div(a_j * MODULUS, den)
        nums.append(a_j)
        stripped_raw.append((raw - rat_raw) & _MASK)
    stripped = PolynomialPhase(phase.base, tuple(Angle(x) for x in stripped_raw))
    return RationalStrip(tuple(nums), q, stripped, mod)


def limbs_to_floats(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """Top 53 bits of each fixed-point value as a float64 in [0, 1)."""
    return (hi >> np.uint64(11)).astype(np.float64) * 2.0**-53


def phase_floats(phase: PolynomialPhase, lo: int, count: int) -> np.ndarray:
    hi, lo_ = phase_stream_limbs(phase, lo, count)
    return limbs_to_floats(hi, lo_)


def e_values(phase: PolynomialPhase, lo: int, count: int) -> np.ndarray:
    """exp(2*pi*i*g(n)) for n = lo+1..lo+count as a complex128 array.

    Phases are exact fixed point; the only approximation is the final
    sin/cos on the top 53 bits (error below 2**-50 per term).
    """
    x = phase_floats(phase, lo, count)
    return np.exp(2j * np.pi * x)
