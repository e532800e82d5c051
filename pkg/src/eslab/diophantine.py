"""Diophantine recovery: rational approximation, simultaneous q-searches,
major/minor arc classification, and the n^{it} model fit.

All distance-to-integer computations run in exact 128-bit fixed point.  The
exhaustive searches are vectorized on two uint64 limbs with a float prefilter
whose margin provably cannot drop the true minimizer; survivors are compared
in exact integer arithmetic, so every returned minimum is certified and ties
break to the smallest q.  Whenever a distance is below 2**-100 the result is
at the representation's resolution floor, which callers should treat as
"rational up to quantization".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError, StructureError
from .phase import (
    MODULUS,
    Angle,
    PolynomialPhase,
    phase_at,
    rational_part_strip,
    shift_basis,
)
from .sieve import Window

_M32 = (1 << 32) - 1
_EXHAUSTIVE_CAP = 1 << 21
_CHUNK = 1 << 20
QUANTIZATION_FLOOR = 2.0**-100


@dataclass(frozen=True)
class RationalApprox:
    """A rational a/q with err = ||q*alpha|| (distance of q*alpha to Z)."""

    a: int
    q: int
    err: float


def _dist_limbs(raw: int, q_lo: int, q_hi: int):
    """||q*alpha|| numerators (times 2**128) for q in [q_lo, q_hi), two-limb.

    Returns (hi, lo) uint64 arrays of min(v, 2**128 - v) where
    v = q*raw mod 2**128.
    """
    q = np.arange(q_lo, q_hi, dtype=np.uint64)
    r0 = np.uint64(raw & _M32)
    r1 = np.uint64((raw >> 32) & _M32)
    r2 = np.uint64((raw >> 64) & _M32)
    r3 = np.uint64((raw >> 96) & _M32)
    t = q * r0
    l0 = t & np.uint64(_M32)
    t = q * r1 + (t >> np.uint64(32))
    l1 = t & np.uint64(_M32)
    t = q * r2 + (t >> np.uint64(32))
    l2 = t & np.uint64(_M32)
    t = q * r3 + (t >> np.uint64(32))
    l3 = t & np.uint64(_M32)
    lo = l0 | (l1 << np.uint64(32))
    hi = l2 | (l3 << np.uint64(32))
    # negation mod 2**128
    zero_lo = lo == 0
    neg_lo = (~lo) + np.uint64(1)
    neg_hi = (~hi) + zero_lo.astype(np.uint64)
    take = (hi < neg_hi) | ((hi == neg_hi) & (lo <= neg_lo))
    d_hi = np.where(take, hi, neg_hi)
    d_lo = np.where(take, lo, neg_lo)
    return d_hi, d_lo


def _dist_floats(d_hi, d_lo) -> np.ndarray:
    return d_hi.astype(np.float64) * 2.0**-64 + d_lo.astype(np.float64) * 2.0**-128


def _dist_exact(raw: int, q: int) -> int:
    v = (q * raw) & (MODULUS - 1)
    return min(v, MODULUS - v)


def continued_fraction_convergents(alpha: Angle, q_max: int) -> list[RationalApprox]:
    """All continued-fraction convergents a/q with q <= q_max, increasing q."""
    if q_max < 1:
        raise ConfigError("q_max must be at least 1")
    raw = alpha.raw
    out = [RationalApprox(0, 1, _dist_exact(raw, 1) / MODULUS)]
    if raw == 0:
        return out
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    num, den = MODULUS, raw  # alpha = raw / MODULUS, first coefficient already 0
    while True:
        a, rem = divmod(num, den)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        if q > q_max:
            break
        out.append(RationalApprox(p, q, _dist_exact(raw, q) / MODULUS))
        if rem == 0:
            break
        num, den = den, rem
    return out


def best_rational(alpha: Angle, q_max: int) -> RationalApprox:
    """The q <= q_max minimizing ||q*alpha||, ties to the smallest q.

    Exhaustive (certified) for q_max <= 2**21; above that the minimizer is
    taken from the continued-fraction convergents, which attain the minimum.
    """
    if q_max < 1:
        raise ConfigError("q_max must be at least 1")
    raw = alpha.raw
    if q_max > _EXHAUSTIVE_CAP:
        convs = continued_fraction_convergents(alpha, q_max)
        best = min(convs, key=lambda c: (_dist_exact(raw, c.q), c.q))
        return best
    best_pair = None  # (dist, q)
    for lo in range(1, q_max + 1, _CHUNK):
        hi = min(lo + _CHUNK, q_max + 1)
        d_hi, d_lo = _dist_limbs(raw, lo, hi)
        d_f = _dist_floats(d_hi, d_lo)
        thresh = d_f.min() * (1 + 1e-9) + 2.0**-90
        if best_pair is not None:
            thresh = min(thresh, best_pair[0] / MODULUS * (1 + 1e-9) + 2.0**-90)
        for i in np.nonzero(d_f <= thresh)[0].tolist():
            q = lo + i
            d = (int(d_hi[i]) << 64) | int(d_lo[i])
            if best_pair is None or (d, q) < best_pair:
                best_pair = (d, q)
    d, q = best_pair
    a = _round_nearest(q * raw, MODULUS)
    g = math.gcd(a, q) if a else 1
    if a and g > 1:
        a, q = a // g, q // g
    return RationalApprox(a, q, d / MODULUS)


def _round_nearest(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


@dataclass(frozen=True)
class QSearchResult:
    q: int
    quality: float


def simultaneous_q_search(
    coeffs: PolynomialPhase, H: int, q_max: int
) -> QSearchResult | None:
    """Smallest q <= q_max minimizing max_j H^j * ||q*alpha_j|| (certified).

    Returns None when q_max < 1.  The search is exhaustive; the float
    prefilter only prunes q that provably cannot attain the minimum, and the
    surviving candidates are ranked by exact integer comparison.
    """
    if q_max < 1:
        return None
    if q_max > 10**7:
        raise ConfigError("q_max beyond 10^7 is outside the exhaustive-search budget")
    raws = coeffs.raw_coeffs()
    k = len(raws)
    weights = [H**j for j in range(1, k + 1)]
    w_f = [float(w) for w in weights]
    best = None  # (quality_int, q)
    for lo in range(1, q_max + 1, _CHUNK):
        hi = min(lo + _CHUNK, q_max + 1)
        qual_f = None
        tables = []
        for j, raw in enumerate(raws):
            d_hi, d_lo = _dist_limbs(raw, lo, hi)
            tables.append((d_hi, d_lo))
            part = _dist_floats(d_hi, d_lo) * w_f[j]
            qual_f = part if qual_f is None else np.maximum(qual_f, part)
        thresh = qual_f.min() * (1 + 1e-9) + 2.0**-90
        if best is not None:
            thresh = min(thresh, best[0] / MODULUS * (1 + 1e-9) + 2.0**-90)
        for i in np.nonzero(qual_f <= thresh)[0].tolist():
            q = lo + i
            exact = max(
                weights[j] * ((int(tables[j][0][i]) << 64) | int(tables[j][1][i]))
                for j in range(k)
            )
            if best is None or (exact, q) < best:
                best = (exact, q)
    exact, q = best
    return QSearchResult(q, exact / MODULUS)


@dataclass(frozen=True)
class TypeIIStructure:
    q: int
    quality: float
    combined: tuple[Angle, ...]


def type_ii_structure_search(
    coeffs: PolynomialPhase, N: int, H: int, q_max: int
) -> TypeIIStructure:
    """Search the type-II Diophantine structure of the coefficients.

    Minimizes max_j (H^(j+1)/N) * ||q*(j*alpha_j + (j+1)*N*alpha_{j+1})||
    over q <= q_max (alpha_{k+1} = 0), with the combined angles computed
    exactly in fixed point with big-integer multiplier N.  N should be the
    phase's base point scale.
    """
    if q_max < 1:
        raise ConfigError("q_max must be at least 1")
    if N <= 0:
        raise ConfigError("N must be positive")
    raws = coeffs.raw_coeffs()
    k = len(raws)
    combined = []
    for j in range(1, k + 1):
        nxt = raws[j] if j < k else 0
        combined.append((j * raws[j - 1] + (j + 1) * N * nxt) % MODULUS)
    weights = [H ** (j + 1) for j in range(1, k + 1)]
    w_f = [float(w) / N for w in weights]
    best = None
    for lo in range(1, q_max + 1, _CHUNK):
        hi = min(lo + _CHUNK, q_max + 1)
        qual_f = None
        tables = []
        for j, raw in enumerate(combined):
            d_hi, d_lo = _dist_limbs(raw, lo, hi)
            tables.append((d_hi, d_lo))
            part = _dist_floats(d_hi, d_lo) * w_f[j]
            qual_f = part if qual_f is None else np.maximum(qual_f, part)
        thresh = qual_f.min() * (1 + 1e-9) + 2.0**-90
        if best is not None:
            thresh = min(thresh, (best[0] / N) / MODULUS * (1 + 1e-9) + 2.0**-90)
        for i in np.nonzero(qual_f <= thresh)[0].tolist():
            q = lo + i
            exact = max(
                weights[j] * ((int(tables[j][0][i]) << 64) | int(tables[j][1][i]))
                for j in range(k)
            )
            if best is None or (exact, q) < best:
                best = (exact, q)
    exact, q = best
    return TypeIIStructure(q, exact / N / MODULUS, tuple(Angle(c) for c in combined))


@dataclass(frozen=True)
class MonomialLift:
    """Result of lifting monomial structure through the induction chain."""

    q_prime: int
    hypotheses: tuple[float, ...]  # ||q C(k,j) N^(k-j) alpha|| * H^j, j = 1..k
    bound_chain: tuple[float, ...]  # N^(k-j) ||q' alpha|| H^j for j = k..1
    final_quality: float  # N^(k-1) H ||q' alpha||


def monomial_lift(q: int, alpha: Angle, k: int, N: int, H: int) -> MonomialLift:
    """Verify the descent from shifted-coefficient structure to ||q' alpha||.

    q' = lcm(q*C(k,j), 1 <= j <= k).  Each induction step j = k..1 requires
    N^(k-j) * ||q' alpha|| < 1/2; a violation raises StructureError naming
    the step.
    """
    if q < 1:
        raise ConfigError("q must be positive")
    if not 1 <= k <= 16:
        raise ConfigError("k out of range")
    raw = alpha.raw
    hyps = tuple(
        _dist_exact(raw, q * math.comb(k, j) * N ** (k - j)) / MODULUS * H**j
        for j in range(1, k + 1)
    )
    q_prime = q
    for j in range(1, k + 1):
        q_prime = math.lcm(q_prime, q * math.comb(k, j))
    d = _dist_exact(raw, q_prime)
    chain = []
    for j in range(k, 0, -1):
        scale = N ** (k - j)
        if 2 * scale * d >= MODULUS:
            raise StructureError(
                f"induction step j={j}: N^(k-j) ||q' alpha|| = "
                f"{scale * d / MODULUS:.3g} >= 1/2",
                step=j,
                quality=scale * d / MODULUS,
            )
        chain.append(scale * d * H**j / MODULUS)
    return MonomialLift(q_prime, hyps, tuple(chain), chain[-1])


@dataclass(frozen=True)
class Arc:
    """Major/minor classification of alpha in the standard dissection."""

    major: bool
    a: int | None
    q: int | None
    Q: float
    X: int
    H: int
    k: int

    @property
    def width(self) -> float:
        return self.Q / (self.X ** (self.k - 1) * self.H)


def classify_arc(alpha: Angle, k: int, X: int, H: int, Q: float) -> Arc:
    """Major iff some 1 <= a <= q <= Q with gcd(a,q)=1 has |q*alpha - a| <= width.

    width = Q / (X^(k-1) H).  The witness with the smallest q is returned.
    """
    if Q < 1:
        raise ConfigError("Q must be at least 1")
    width = Fraction(Q) / (X ** (k - 1) * H)
    if width >= Fraction(1, 2):
        raise ConfigError("arc width >= 1/2: the dissection is ill-posed")
    raw = alpha.raw
    q_cap = int(math.floor(Q))
    bound = width * MODULUS  # compare dist <= bound exactly
    bound_f = float(width)
    for lo in range(1, q_cap + 1, _CHUNK):
        hi = min(lo + _CHUNK, q_cap + 1)
        d_hi, d_lo = _dist_limbs(raw, lo, hi)
        d_f = _dist_floats(d_hi, d_lo)
        cand = np.nonzero(d_f <= bound_f * (1 + 1e-9) + 2.0**-90)[0]
        for i in cand.tolist():
            q = lo + i
            d = (int(d_hi[i]) << 64) | int(d_lo[i])
            if d > bound:
                continue
            a = _round_nearest(q * raw, MODULUS)
            if 1 <= a <= q and math.gcd(a, q) == 1:
                return Arc(True, a, q, Q, X, H, k)
    return Arc(False, None, None, Q, X, H, k)


@dataclass(frozen=True)
class NitModel:
    """Fit of e(g(n)) by eta * n^{it} on a progression inside the window."""

    t: float
    eta: complex
    eta_phase: Angle
    max_dev: float
    target_scale: float
    structure_quality: float
    progression_start: int
    progression_step: int
    progression_count: int


def nit_approximation(
    coeffs: PolynomialPhase,
    window: Window,
    q: int,
    B: float,
    A: float = 2.0,
    residue: int = 1,
    structure_q_max: int = 10**4,
    structure_threshold: float | None = None,
) -> NitModel:
    """Model e(g(n)) as eta * n^{it} on an arithmetic progression.

    Shifts the phase basis to the window start, verifies the measured
    type-II structural bounds (StructureError on failure), strips rational
    parts mod k!q, sets t = 2*pi*n0*beta_1', and measures the sup deviation
    on the progression {n0 < n <= n0+H0, n == residue mod k!q} where
    H0 = H*(log N)^(-B).  eta is the mean-normalized unimodular factor of
    the class.
    """
    n0 = window.start
    H = window.length
    if n0 < 3:
        raise ConfigError("window start too small for a log scale")
    logN = math.log(n0)
    shifted = shift_basis(coeffs, n0) if coeffs.base != n0 else coeffs
    fit = type_ii_structure_search(shifted, n0, H, structure_q_max)
    threshold = logN**10 if structure_threshold is None else structure_threshold
    if fit.quality > threshold:
        raise StructureError(
            f"type-II structural bound fails: quality {fit.quality:.3g} > "
            f"threshold {threshold:.3g}",
            step="structure",
            quality=fit.quality,
        )
    H0 = H * logN ** (-B)
    if H0 < 10:
        raise ConfigError(
            f"progression length H0 = H (log N)^-B = {H0:.3g} below 10; reduce B"
        )
    strip = rational_part_strip(shifted, q)
    mod = strip.modulus
    r = residue % mod
    if math.gcd(r, mod) != 1:
        raise ConfigError(f"residue {residue} not coprime to k!q = {mod}")
    beta1p = strip.stripped.coeffs[0]
    t = 2 * math.pi * n0 * float(beta1p.signed())
    first = n0 + 1 + ((r - (n0 + 1)) % mod)
    last = n0 + int(H0)
    ns = list(range(first, last + 1, mod))
    if not ns:
        raise ConfigError("progression is empty; increase H or reduce B")
    gv = np.array([phase_at(coeffs, n).to_float() for n in ns])
    zn = np.exp(2j * np.pi * gv)
    model = np.exp(1j * t * np.log(np.array(ns, dtype=np.float64)))
    S = complex(np.sum(zn * np.conj(model)))
    eta = S / abs(S) if abs(S) > 0 else complex(1.0)
    max_dev = float(np.max(np.abs(zn - eta * model)))
    eta_phase = Angle.from_float(math.atan2(eta.imag, eta.real) / (2 * math.pi))
    return NitModel(
        t,
        eta,
        eta_phase,
        max_dev,
        logN ** (-A - 15),
        fit.quality,
        first,
        mod,
        len(ns),
    )
