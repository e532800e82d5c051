"""Phase-weighted exponential sums over short windows.

Covers the plain Lambda/mu/unit sums, symmetric Weyl sums, dyadic type-I and
type-II bilinear sums, and the exact Heath-Brown identity decomposition of
both Lambda and mu into multilinear components.

Summation order is fixed (ascending n; ascending m then l for bilinear sums)
so results are reproducible; a compensated mode sums with math.fsum instead
and is what the acceptance checks use.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PartialResultError
from .phase import (
    Angle,
    PolynomialPhase,
    e_of,
    e_values,
    monomial_constant,
    monomial_to_shifted,
    phase_at,
)
from .sieve import ArithmeticTable, Window, base_primes, sieve_window

DEFAULT_SEED = 181


@dataclass(frozen=True)
class ExpSumResult:
    """A complex sum value with its term count and |value|/H normalization."""

    value: complex
    terms: int
    normalized: float

    @classmethod
    def of(cls, value: complex, terms: int, denom: int) -> "ExpSumResult":
        return cls(value, terms, abs(value) / denom if denom > 0 else 0.0)


def _series_sum(parts: np.ndarray, compensated: bool) -> complex:
    if len(parts) == 0:
        return 0j
    if compensated:
        return complex(math.fsum(parts.real.tolist()), math.fsum(parts.imag.tolist()))
    # cumulative sum is a strict left-to-right accumulation
    return complex(np.cumsum(parts)[-1])


def lambda_exp_sum(
    table: ArithmeticTable, phase: PolynomialPhase, compensated: bool = False
) -> ExpSumResult:
    """sum of Lambda(n) e(g(n)) over the table's window."""
    H = table.window.length
    if H == 0:
        return ExpSumResult(0j, 0, 0.0)
    ev = e_values(phase, table.window.start, H)
    return ExpSumResult.of(_series_sum(table.von_mangoldt * ev, compensated), H, H)


def mobius_exp_sum(
    table: ArithmeticTable, phase: PolynomialPhase, compensated: bool = False
) -> ExpSumResult:
    """sum of mu(n) e(g(n)) over the table's window."""
    H = table.window.length
    if H == 0:
        return ExpSumResult(0j, 0, 0.0)
    ev = e_values(phase, table.window.start, H)
    return ExpSumResult.of(_series_sum(table.mobius * ev, compensated), H, H)


def phase_weighted_sums(
    table: ArithmeticTable, phase: PolynomialPhase, compensated: bool = False
) -> tuple[ExpSumResult, ExpSumResult]:
    """(Lambda-weighted, mu-weighted) sums sharing one phase stream."""
    H = table.window.length
    if H == 0:
        return ExpSumResult(0j, 0, 0.0), ExpSumResult(0j, 0, 0.0)
    ev = e_values(phase, table.window.start, H)
    lam = ExpSumResult.of(_series_sum(table.von_mangoldt * ev, compensated), H, H)
    mob = ExpSumResult.of(_series_sum(table.mobius * ev, compensated), H, H)
    return lam, mob


def unit_exp_sum(
    table_or_window, phase: PolynomialPhase, compensated: bool = False
) -> ExpSumResult:
    """sum of e(g(n)) over the window (unit weights)."""
    window = getattr(table_or_window, "window", table_or_window)
    H = window.length
    if H == 0:
        return ExpSumResult(0j, 0, 0.0)
    ev = e_values(phase, window.start, H)
    return ExpSumResult.of(_series_sum(ev, compensated), H, H)


def weyl_sum(X: int, H: int, alpha: Angle, k: int, compensated: bool = False) -> ExpSumResult:
    """sum of e(alpha * n^k) over |n - X| <= H (2H+1 terms, literal phase)."""
    if H < 0:
        raise ConfigError("weyl sum half-length H must be nonnegative")
    lo = X - H - 1
    n_terms = 2 * H + 1
    if alpha.raw == 0:
        return ExpSumResult.of(complex(n_terms), n_terms, n_terms)
    phase = monomial_to_shifted(alpha, k, lo)
    ev = e_values(phase, lo, n_terms) * e_of(monomial_constant(alpha, k, lo))
    return ExpSumResult.of(_series_sum(ev, compensated), n_terms, n_terms)


# -- bilinear sums ------------------------------------------------------------

_DESCRIPTORS = ("unit", "log", "mobius", "seeded")


@dataclass(frozen=True)
class BilinearSpec:
    """Dyadic bilinear-sum shape: m ~ M with coefficient descriptors.

    ``b`` weights the dyadic variable m, ``a`` the rough companion in type-II
    sums, and ``psi`` in {"1", "log"} weights the long smooth variable of
    type-I sums.  Descriptors: "unit", "log", "mobius", or "seeded" (complex
    values of modulus <= 1 <= tau_5, drawn deterministically from ``seed``).
    """

    M: int
    b: str = "unit"
    a: str = "unit"
    psi: str = "1"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in (self.b, self.a):
            if name not in _DESCRIPTORS:
                raise ConfigError(f"unknown coefficient descriptor {name!r}")
        if self.psi not in ("1", "log"):
            raise ConfigError(f"psi weight must be '1' or 'log', got {self.psi!r}")

    def tau5_bounded(self, which: str = "b") -> bool:
        """Whether the descriptor provably satisfies |c_m| <= tau_5(m)."""
        return getattr(self, which) in ("unit", "mobius", "seeded")


def _mobius_range(lo: int, hi: int) -> np.ndarray:
    """mu(m) for m in (lo, hi] by a small direct sieve."""
    table = sieve_window(Window(lo, hi - lo))
    return table.mobius


def _coeff_array(desc: str, lo: int, hi: int, seed: int) -> np.ndarray:
    """Coefficient values for m in (lo, hi] under the named descriptor."""
    count = hi - lo
    if desc == "unit":
        return np.ones(count)
    if desc == "log":
        return np.log(np.arange(lo + 1, hi + 1, dtype=np.float64))
    if desc == "mobius":
        return _mobius_range(lo, hi).astype(np.float64)
    rng = np.random.default_rng((seed, lo, hi))
    radius = np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(0.0, 2 * np.pi, count)
    return radius * np.exp(1j * theta)


def _phases_at_points(phase: PolynomialPhase, points: list[int]) -> np.ndarray:
    return np.exp(
        2j
        * np.pi
        * np.array([phase_at(phase, n).to_float() for n in points], dtype=np.float64)
    )


def type_i_sum(
    window: Window,
    spec: BilinearSpec,
    phase: PolynomialPhase,
    compensated: bool = False,
) -> ExpSumResult:
    """sum over m ~ M of b_m * sum_{N/m < l <= (N+H)/m} psi(l) e(g(l m)).

    Range endpoints are exact integer divisions.  The paper-side condition
    M <= delta^C H is not enforced; callers can inspect M/H themselves.
    """
    N, end = window.start, window.end
    M = spec.M
    if M >= N and N > 0:
        warnings.warn(f"type-I range M={M} >= N={N}: empty outer range", stacklevel=2)
        return ExpSumResult(0j, 0, 0.0)
    b_vals = _coeff_array(spec.b, M, 2 * M, spec.seed)
    parts = []
    terms = 0
    for i, m in enumerate(range(M + 1, 2 * M + 1)):
        l_lo = N // m
        l_hi = end // m
        if l_hi <= l_lo:
            continue
        b = b_vals[i]
        if b == 0:
            terms += l_hi - l_lo
            continue
        ls = list(range(l_lo + 1, l_hi + 1))
        ev = _phases_at_points(phase, [l * m for l in ls])
        if spec.psi == "log":
            ev = ev * np.log(np.array(ls, dtype=np.float64))
        parts.append(b * _series_sum(ev, compensated))
        terms += len(ls)
    if not parts:
        return ExpSumResult(0j, terms, 0.0)
    value = _series_sum(np.array(parts, dtype=np.complex128), compensated)
    return ExpSumResult.of(value, terms, window.length)


def type_ii_sum(
    window: Window,
    spec: BilinearSpec,
    phase: PolynomialPhase,
    compensated: bool = False,
) -> ExpSumResult:
    """sum over m ~ M, l with N < l m <= N+H and L/2 <= l <= 2L of a_l b_m e(g(l m)).

    Integer convention: L = N // M and the l range is [(L+1)//2, 2L].  The
    result carries no applicability judgment; use ``type_ii_applicable`` for
    the H >= max(L, M) diagnostic.
    """
    N, end = window.start, window.end
    M = spec.M
    if window.length == 0 or M < 1:
        return ExpSumResult(0j, 0, 0.0)
    L = N // M if M else 0
    l_min_glob, l_max_glob = max(1, (L + 1) // 2), 2 * L
    b_vals = _coeff_array(spec.b, M, 2 * M, spec.seed)
    a_lo, a_hi = l_min_glob - 1, l_max_glob
    if a_hi <= a_lo:
        return ExpSumResult(0j, 0, 0.0)
    a_vals = _coeff_array(spec.a, a_lo, a_hi, spec.seed + 1)
    parts = []
    terms = 0
    for i, m in enumerate(range(M + 1, 2 * M + 1)):
        l_lo = max(N // m, a_lo)
        l_hi = min(end // m, l_max_glob)
        if l_hi <= l_lo:
            continue
        ls = list(range(l_lo + 1, l_hi + 1))
        ev = _phases_at_points(phase, [l * m for l in ls])
        coeffs = a_vals[l_lo - a_lo : l_hi - a_lo]
        parts.append(b_vals[i] * _series_sum(coeffs * ev, compensated))
        terms += len(ls)
    if not parts:
        return ExpSumResult(0j, terms, 0.0)
    value = _series_sum(np.array(parts, dtype=np.complex128), compensated)
    return ExpSumResult.of(value, terms, window.length)


def type_ii_applicable(window: Window, M: int) -> bool:
    """The proposition-side condition H >= max(L, M) with L = N/M."""
    L = window.start // max(M, 1)
    return window.length >= max(L, M)


# -- Heath-Brown identity ------------------------------------------------------
#
# With z = ceil((2N)^(1/3)) and M(s) = sum_{m<=z} mu(m) m^(-s), iterating
# 1/zeta = M + (1/zeta)(1 - zeta M) three times gives, for every n <= z^3,
#
#   Lambda(n) = sum_{j=1..3} (-1)^(j-1) C(3,j)
#               sum_{n = r_1..r_2j, r_i <= z for i > j} log(r_1) mu(r_{j+1})..mu(r_2j)
#   mu(n)     = sum_{j=1..3} (-1)^(j-1) C(3,j)
#               sum_{n = r_2..r_2j, r_i <= z for i > j} mu(r_{j+1})..mu(r_2j)
#
# and the j=1 term of the mu identity vanishes on the window since n > N >= z.
# Components are indexed by j and by the dyadic box of the tuple, where value
# r lands in dyadic class (r-1).bit_length() (i.e. 2^(b-1) < r <= 2^b).


@dataclass(frozen=True)
class HBComponent:
    j: int
    box: tuple[int, ...]
    value: complex
    count: int


@dataclass
class HBDecomposition:
    target: str
    z: int
    components: list[HBComponent]
    total: complex
    per_n_max_err: float
    leaves: int

    def component_sum(self, j: int) -> complex:
        return sum(c.value for c in self.components if c.j == j)


def _mu_lookup(z: int) -> list[int]:
    """mu(m) for 1 <= m <= z as a plain list (m=0 slot unused)."""
    table = sieve_window(Window(0, z))
    return [0] + table.mobius.tolist()


def cube_cutoff(N: int) -> int:
    """Smallest z with z^3 >= 2N."""
    z = round((2 * N) ** (1 / 3))
    while z**3 < 2 * N:
        z += 1
    while z >= 1 and (z - 1) ** 3 >= 2 * N:
        z -= 1
    return max(z, 1)


def _factor_tuples(table: ArithmeticTable, n: int) -> list[tuple[int, int]]:
    return table.factorization(n)


def heath_brown_decompose(
    table: ArithmeticTable,
    phase: PolynomialPhase,
    target: str = "lambda",
    budget_leaves: int = 80_000_000,
) -> HBDecomposition:
    """Exact Heath-Brown decomposition of the Lambda- or mu-weighted phase sum.

    Enumerates, for every n in the window, all ordered factorizations
    n = r_1 ... r_{2j} (Lambda) or n = r_2 ... r_{2j} (mu) with the trailing j
    factors squarefree and <= z, accumulating one component per (j, dyadic
    box).  The per-n identity is checked against the sieve table as it goes;
    the mu case is integer-exact and the operation refuses a window where the
    check fails.
    """
    if target not in ("lambda", "mu"):
        raise ConfigError(f"target must be 'lambda' or 'mu', got {target!r}")
    window = table.window
    N, H = window.start, window.length
    if H == 0:
        return HBDecomposition(target, 0, [], 0j, 0.0, 0)
    z = cube_cutoff(N)
    if window.end > z**3:
        raise ConfigError(
            f"window end {window.end} exceeds the identity's validity range z^3={z**3}"
        )
    mu_small = _mu_lookup(z)
    ev = e_values(phase, window.start, H)
    comps: dict[tuple[int, tuple[int, ...]], list] = {}
    leaves = 0
    max_err = 0.0
    is_lambda = target == "lambda"
    j_range = (1, 2, 3)
    signs = {1: 3.0, 2: -3.0, 3: 1.0}  # (-1)^(j-1) C(3,j)

    for idx, n in enumerate(window):
        factors = _factor_tuples(table, n)
        e_n = ev[idx]
        per_n = 0.0
        for j in j_range:
            n_free = j if is_lambda else j - 1  # unit/log slots
            n_mu = j
            slots = n_free + n_mu
            if slots == 0:
                continue
            acc = _enumerate_slots(
                n, factors, n_free, n_mu, z, mu_small, is_lambda, comps, j, e_n
            )
            leaves += acc[1]
            per_n += signs[j] * acc[0]
            if leaves > budget_leaves:
                done = _finalize_components(comps)
                raise PartialResultError(
                    f"enumeration budget {budget_leaves} exceeded at n={n}",
                    partial=done,
                )
        if is_lambda:
            ref = table.von_mangoldt[idx]
            err = abs(per_n - ref) / max(1.0, abs(ref))
            max_err = max(max_err, err)
        else:
            ref = int(table.mobius[idx])
            if int(round(per_n)) != ref or abs(per_n - round(per_n)) > 1e-9:
                raise ConfigError(
                    f"mu-identity per-n check failed at n={n}: got {per_n}, want {ref}"
                )
    components = _finalize_components(comps)
    total_parts = []
    for j in j_range:
        s = sum(c.value for c in components if c.j == j)
        total_parts.append(signs[j] * s)
    total = complex(
        math.fsum(p.real for p in total_parts), math.fsum(p.imag for p in total_parts)
    )
    return HBDecomposition(target, z, components, total, max_err, leaves)


def _finalize_components(comps) -> list[HBComponent]:
    out = [
        HBComponent(j, box, complex(acc[0], acc[1]), acc[2])
        for (j, box), acc in comps.items()
    ]
    out.sort(key=lambda c: (c.j, c.box))
    return out


def _enumerate_slots(n, factors, n_free, n_mu, z, mu_small, with_log, comps, j, e_n):
    """Distribute the prime powers of n over ordered slots.

    Slot layout: the first ``n_free`` slots are unrestricted (slot 0 carries
    the log weight in the Lambda case); the last ``n_mu`` slots must stay
    squarefree and <= z.  Returns (weighted per-n identity contribution,
    leaf count); component sums are accumulated into ``comps`` keyed by
    (j, dyadic box).  Single recursion over (factor index, slot, remaining
    exponent); leaves with weight 0 (log 1 in slot 0) are skipped.
    """
    slots = n_free + n_mu
    values = [1] * slots
    n_primes = len(factors)
    e_re, e_im = e_n.real, e_n.imag
    totals = [0.0, 0]  # ident_sum, leaves
    log = math.log

    def leaf():
        w = 1.0
        for t in range(n_free, slots):
            w *= mu_small[values[t]]
        if with_log:
            v0 = values[0]
            if v0 == 1:
                return
            w *= log(v0)
        totals[0] += w
        totals[1] += 1
        key = (j, tuple((v - 1).bit_length() for v in values))
        acc = comps.get(key)
        if acc is None:
            comps[key] = [w * e_re, w * e_im, 1]
        else:
            acc[0] += w * e_re
            acc[1] += w * e_im
            acc[2] += 1

    def go(fi: int, slot: int, rem: int):
        p = factors[fi][0]
        last = slots - 1
        if slot == last:
            if slot >= n_free:
                if rem > 1 or (rem == 1 and values[slot] * p > z):
                    return
            old = values[slot]
            if rem:
                values[slot] = old * p**rem
            if fi + 1 == n_primes:
                leaf()
            else:
                go(fi + 1, 0, factors[fi + 1][1])
            values[slot] = old
            return
        max_e = rem if slot < n_free else (1 if rem else 0)
        old = values[slot]
        val = old
        for take in range(max_e + 1):
            if take:
                if slot >= n_free and old * p > z:
                    break
                val *= p
                values[slot] = val
            go(fi, slot + 1, rem - take)
        values[slot] = old

    if n_primes == 0:
        leaf()
    else:
        go(0, 0, factors[0][1])
    return totals[0], totals[1]
