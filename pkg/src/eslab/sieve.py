"""Segmented sieve of arithmetic data over short windows at large offsets.

A :class:`Window` is the half-open integer interval (start, start+length].
:func:`sieve_window` produces, for every n in the window, the von Mangoldt
value, the Mobius value, and the full factorization: exponents of all primes
up to sqrt(start+length) in CSR layout plus one residual cofactor, which is
prime by construction whenever it exceeds 1.

Windows larger than one segment (2**20 integers, sized for L2 cache) are
processed in streaming fashion; segments can be sieved by a thread pool and
are merged in index order, so results are identical for any worker count.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConfigError

SEGMENT = 1 << 20
_MAX_END = 1 << 63

_MAGIC = b"ESLAB1"


@dataclass(frozen=True)
class Window:
    """The half-open interval (start, start+length] of integers."""

    start: int
    length: int
    theta: float | None = None

    def __post_init__(self):
        if self.start < 0 or self.start > 1 << 62:
            raise ConfigError(f"window start must be in [0, 2^62], got {self.start}")
        if self.length < 0:
            raise ConfigError("window length must be nonnegative")
        if self.start + self.length > _MAX_END:
            raise ConfigError(
                f"window end {self.start + self.length} exceeds the 2^63 cap"
            )

    @classmethod
    def from_theta(cls, start: int, theta: float) -> "Window":
        """Window of length floor(start**theta)."""
        if not 0 < theta <= 1:
            raise ConfigError(f"theta must lie in (0, 1], got {theta}")
        length = start if theta == 1.0 else int(math.floor(start**theta))
        return cls(start, length, theta=theta)

    @property
    def end(self) -> int:
        return self.start + self.length

    def __iter__(self):
        return iter(range(self.start + 1, self.end + 1))

    def values(self) -> np.ndarray:
        return np.arange(self.start + 1, self.end + 1, dtype=np.uint64)


def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit by a plain sieve of Eratosthenes."""
    if limit < 2:
        return np.empty(0, dtype=np.uint64)
    if limit > 1 << 32:
        raise BudgetError(f"base prime limit {limit} exceeds 2^32")
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.uint64)


@dataclass
class ArithmeticTable:
    """Per-n arithmetic data over a window.

    Factorizations are stored in CSR form: for index i (n = start+1+i) the
    base-prime part is ``seed_primes[seed_indptr[i]:seed_indptr[i+1]]`` with
    matching ``seed_exponents``; ``residual[i]`` is the leftover cofactor
    (1 or a prime above sqrt(end)).
    """

    window: Window
    von_mangoldt: np.ndarray  # float64
    mobius: np.ndarray  # int8
    is_prime: np.ndarray  # bool
    residual: np.ndarray  # uint64
    seed_indptr: np.ndarray  # int64, length H+1
    seed_primes: np.ndarray  # uint64
    seed_exponents: np.ndarray  # uint8
    _prime_list: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.window.length

    def index(self, n: int) -> int:
        i = n - self.window.start - 1
        if not 0 <= i < self.window.length:
            raise IndexError(f"{n} outside window ({self.window.start}, {self.window.end}]")
        return i

    def factorization(self, n: int) -> list[tuple[int, int]]:
        """(prime, exponent) pairs of n, residual included, ascending primes."""
        i = self.index(n)
        lo, hi = self.seed_indptr[i], self.seed_indptr[i + 1]
        pairs = [
            (int(p), int(e))
            for p, e in zip(self.seed_primes[lo:hi], self.seed_exponents[lo:hi])
        ]
        r = int(self.residual[i])
        if r > 1:
            pairs.append((r, 1))
        return pairs

    def lam(self, n: int) -> float:
        return float(self.von_mangoldt[self.index(n)])

    def mu(self, n: int) -> int:
        return int(self.mobius[self.index(n)])

    @property
    def primes(self) -> np.ndarray:
        if self._prime_list is None:
            self._prime_list = self.window.values()[self.is_prime]
        return self._prime_list

    def squarefree_count(self) -> int:
        return int(np.count_nonzero(self.mobius))


def _sieve_segment(lo: int, hi: int, primes: np.ndarray):
    """Factor data for (lo, hi]; returns per-segment arrays."""
    m = hi - lo
    n_vals = np.arange(lo + 1, hi + 1, dtype=np.uint64)
    residual = n_vals.copy()
    distinct = np.zeros(m, dtype=np.uint8)
    totexp = np.zeros(m, dtype=np.uint16)
    has_square = np.zeros(m, dtype=bool)
    first_p = np.zeros(m, dtype=np.uint64)
    pos_parts, prime_parts, exp_parts = [], [], []

    usable = primes[primes.astype(np.float64) <= hi]  # p <= sqrt(end) <= hi
    for p64 in usable.tolist():
        p = int(p64)
        first = (lo // p + 1) * p
        if first > hi:
            continue
        idx = np.arange(first - lo - 1, m, p, dtype=np.int64)
        exps = np.ones(len(idx), dtype=np.uint8)
        pw = p * p
        while pw <= hi:
            f2 = (lo // pw + 1) * pw
            if f2 <= hi:
                off = (f2 - first) // p
                step = pw // p
                exps[off::step] += 1
            pw *= p
        powers = np.uint64(p) ** exps.astype(np.uint64)
        residual[idx] //= powers
        newly = distinct[idx] == 0
        first_p[idx[newly]] = p
        distinct[idx] += 1
        totexp[idx] += exps
        has_square[idx] |= exps >= 2
        pos_parts.append(idx)
        prime_parts.append(np.full(len(idx), p, dtype=np.uint64))
        exp_parts.append(exps)

    res_gt1 = residual > 1
    # n == 1 needs no special case below: it has distinct == 0 and residual 1.
    omega = distinct.astype(np.int64) + res_gt1
    is_prime = ((distinct == 0) & res_gt1) | ((distinct == 1) & ~res_gt1 & (totexp == 1))

    mobius = np.where(omega % 2 == 0, 1, -1).astype(np.int8)
    mobius[has_square] = 0
    mobius[n_vals == 1] = 1

    lam = np.zeros(m, dtype=np.float64)
    pp_mask = (distinct == 1) & ~res_gt1  # n = p^e with p <= sqrt bound
    lam[pp_mask] = np.log(first_p[pp_mask].astype(np.float64))
    big_prime = (distinct == 0) & res_gt1
    lam[big_prime] = np.log(n_vals[big_prime].astype(np.float64))

    if pos_parts:
        pos = np.concatenate(pos_parts)
        prs = np.concatenate(prime_parts)
        exs = np.concatenate(exp_parts)
        order = np.lexsort((prs, pos))
        pos, prs, exs = pos[order], prs[order], exs[order]
        counts = np.bincount(pos, minlength=m)
    else:
        pos = np.empty(0, dtype=np.int64)
        prs = np.empty(0, dtype=np.uint64)
        exs = np.empty(0, dtype=np.uint8)
        counts = np.zeros(m, dtype=np.int64)
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return lam, mobius, is_prime, residual, indptr, prs, exs


def sieve_window(window: Window, workers: int = 1) -> ArithmeticTable:
    """Fully factor every n in the window; see :class:`ArithmeticTable`.

    The residual cofactor left after removing all primes <= sqrt(end) is
    prime whenever it exceeds 1, so residual primality is asserted rather
    than re-tested.
    """
    H = window.length
    if H == 0:
        return ArithmeticTable(
            window,
            np.empty(0, np.float64),
            np.empty(0, np.int8),
            np.empty(0, bool),
            np.empty(0, np.uint64),
            np.zeros(1, np.int64),
            np.empty(0, np.uint64),
            np.empty(0, np.uint8),
        )
    root = math.isqrt(window.end)
    if root > 1 << 32:
        raise BudgetError("sqrt(window end) exceeds 2^32; base primes unsieveable")
    primes = base_primes(root)

    bounds = list(range(window.start, window.end, SEGMENT)) + [window.end]
    segs = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    if workers > 1 and len(segs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: _sieve_segment(*s, primes), segs))
    else:
        parts = [_sieve_segment(lo, hi, primes) for lo, hi in segs]

    lam = np.concatenate([p[0] for p in parts])
    mobius = np.concatenate([p[1] for p in parts])
    is_prime = np.concatenate([p[2] for p in parts])
    residual = np.concatenate([p[3] for p in parts])
    seed_primes = np.concatenate([p[5] for p in parts])
    seed_exps = np.concatenate([p[6] for p in parts])
    indptr = np.zeros(H + 1, dtype=np.int64)
    at = 0
    base = 0
    for (lo, hi), part in zip(segs, parts):
        seg_len = hi - lo
        indptr[at + 1 : at + seg_len + 1] = base + part[4][1:]
        at += seg_len
        base += part[4][-1]
    for arr in (lam, mobius, is_prime, residual, seed_primes, seed_exps, indptr):
        arr.flags.writeable = False
    return ArithmeticTable(
        window, lam, mobius, is_prime, residual, indptr, seed_primes, seed_exps
    )


def chebyshev_psi_delta(table: ArithmeticTable) -> float:
    """Sum of the von Mangoldt values over the window (full-precision sum)."""
    return math.fsum(table.von_mangoldt.tolist())


_TAU_MAX_EXP = 64


@dataclass(frozen=True)
class DivisorMoment:
    total: int
    normalized: float


def divisor_moment(window: Window, r: int, s: int, workers: int = 1) -> DivisorMoment:
    """Sum of tau_r(n)**s over the window, from full factorizations.

    ``normalized`` is total / (H * (log start)**(r**s - 1)), the empirical
    form of the short-interval divisor bound.
    """
    if not 2 <= r <= 5:
        raise ConfigError(f"divisor order r must be in [2, 5], got {r}")
    if not 1 <= s <= 4:
        raise ConfigError(f"moment power s must be in [1, 4], got {s}")
    table = sieve_window(window, workers=workers)
    H = window.length
    if H == 0:
        return DivisorMoment(0, 0.0)
    comb_e = np.array(
        [math.comb(e + r - 1, r - 1) for e in range(_TAU_MAX_EXP)], dtype=np.int64
    )
    tau = np.ones(H, dtype=np.int64)
    pos = np.repeat(
        np.arange(H, dtype=np.int64), np.diff(table.seed_indptr)
    )
    np.multiply.at(tau, pos, comb_e[table.seed_exponents])
    tau[table.residual > 1] *= r
    total = sum(int(t) ** s for t in tau.tolist())
    try:
        denom = H * math.log(max(window.start, 2)) ** (r**s - 1)
        normalized = total / denom
    except OverflowError:
        normalized = 0.0
    return DivisorMoment(total, normalized)


# -- binary cache -------------------------------------------------------------
#
# Layout: magic "ESLAB1", start and length as little-endian uint64, then for
# each n: lambda (float64 LE), mu (int8), seed count (uint8), seeds as
# (prime uint64, exponent uint8) pairs, residual (uint64).


def save_table(table: ArithmeticTable, path) -> int:
    """Serialize to the binary cache format; returns bytes written."""
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<QQ", table.window.start, table.window.length)
    H = table.window.length
    indptr = table.seed_indptr
    for i in range(H):
        lo, hi = int(indptr[i]), int(indptr[i + 1])
        out += struct.pack("<dbB", float(table.von_mangoldt[i]),
                           int(table.mobius[i]), hi - lo)
        for j in range(lo, hi):
            out += struct.pack("<QB", int(table.seed_primes[j]),
                               int(table.seed_exponents[j]))
        out += struct.pack("<Q", int(table.residual[i]))
    with open(path, "wb") as fh:
        fh.write(out)
    return len(out)


def load_table(path) -> ArithmeticTable:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:6] != _MAGIC:
        raise ConfigError(f"{path}: not an arithmetic-table cache (bad magic)")
    start, length = struct.unpack_from("<QQ", blob, 6)
    window = Window(start, length)
    off = 6 + 16
    lam = np.empty(length, np.float64)
    mobius = np.empty(length, np.int8)
    residual = np.empty(length, np.uint64)
    indptr = np.zeros(length + 1, np.int64)
    primes_l, exps_l = [], []
    for i in range(length):
        lam[i], mobius[i], nseeds = struct.unpack_from("<dbB", blob, off)
        off += 10
        for _ in range(nseeds):
            p, e = struct.unpack_from("<QB", blob, off)
            off += 9
            primes_l.append(p)
            exps_l.append(e)
        (residual[i],) = struct.unpack_from("<Q", blob, off)
        off += 8
        indptr[i + 1] = indptr[i] + nseeds
    seed_primes = np.array(primes_l, dtype=np.uint64)
    seed_exps = np.array(exps_l, dtype=np.uint8)
    n_vals = window.values()
    res_gt1 = residual > 1
    distinct = np.diff(indptr)
    totexp = np.zeros(length, np.int64)
    np.add.at(totexp, np.repeat(np.arange(length), distinct), seed_exps.astype(np.int64))
    is_prime = ((distinct == 0) & res_gt1) | ((distinct == 1) & ~res_gt1 & (totexp == 1))
    return ArithmeticTable(
        window, lam, mobius, is_prime, residual, indptr, seed_primes, seed_exps
    )
