"""Circle-method pipeline for the short-interval Waring-Goldbach problem.

Everything is computed at desk scale with exact or oracle-checkable methods:
Gauss sums by exact rational-phase summation, the singular series from
k-th-power residue histograms, local densities by convolution counting,
the singular integral and the weighted representation count rho(N) by exact
coefficient extraction (FFT convolution of value histograms), and explicit
representation search by meet-in-the-middle over prime k-th powers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, ConfigError
from .phase import Angle, monomial_to_shifted
from .sieve import Window, sieve_window
from .expsums import DEFAULT_SEED, ExpSumResult, lambda_exp_sum


def _is_prime_small(p: int) -> bool:
    if p < 2:
        return False
    for d in range(2, math.isqrt(p) + 1):
        if p % d == 0:
            return False
    return True


def admissibility_exponent(k: int, p: int) -> int:
    """Exponent gamma(k, p): tau+2 if p=2 and tau>0, else tau+1 (tau = v_p(k))."""
    if not _is_prime_small(p):
        raise ConfigError(f"{p} is not prime")
    if k < 1:
        raise ConfigError("k must be positive")
    tau = 0
    kk = k
    while kk % p == 0:
        tau += 1
        kk //= p
    if p == 2 and tau > 0:
        return tau + 2
    return tau + 1


def admissibility_modulus(k: int) -> int:
    """Product of p^gamma(k,p) over primes p with (p-1) | k.

    (p-1) | k forces p <= k+1, so the product is finite and exact.  N must
    be congruent to s modulo this value for N = p_1^k + ... + p_s^k to have
    solutions in primes coprime to the modulus.
    """
    if k < 1:
        raise ConfigError("k must be positive")
    out = 1
    for p in range(2, k + 2):
        if _is_prime_small(p) and k % (p - 1) == 0:
            out *= p ** admissibility_exponent(k, p)
    return out


@dataclass(frozen=True)
class WaringInstance:
    """Configuration (k, s, N, theta) with X = round((N/s)^(1/k)), H = round(X^theta).

    ``feasible`` records whether s*(X-H)^k <= N <= s*(X+H)^k, which is
    necessary for any representation to exist.
    """

    k: int
    s: int
    N: int
    theta: float
    X: int
    H: int
    feasible: bool

    @classmethod
    def create(cls, k: int, s: int, N: int, theta: float) -> "WaringInstance":
        if k < 1 or s < 1 or N < 1:
            raise ConfigError("k, s, N must be positive")
        if not 0 < theta <= 1:
            raise ConfigError(f"theta must lie in (0, 1], got {theta}")
        X = round((N / s) ** (1.0 / k))
        H = round(X**theta)
        if X - H < 1:
            raise ConfigError(f"window [X-H, X+H] = [{X-H}, {X+H}] leaves the integers")
        feasible = s * (X - H) ** k <= N <= s * (X + H) ** k
        return cls(k, s, N, theta, X, H, feasible)

    @property
    def value_range(self) -> tuple[int, int]:
        """Smallest and largest k-th power in the window [X-H, X+H]."""
        return (self.X - self.H) ** self.k, (self.X + self.H) ** self.k

    def window(self) -> Window:
        return Window(self.X - self.H - 1, 2 * self.H + 1)


def gauss_sum(q: int, a: int, k: int) -> complex:
    """S(q, a) = sum over b in [1,q], gcd(b,q)=1 of e(a b^k / q).

    Phases a*b^k mod q are computed in integer arithmetic before
    exponentiating, so each term is an exact rational phase.
    """
    if q < 1:
        raise ConfigError("q must be positive")
    if math.gcd(a, q) != 1:
        raise ConfigError(f"gauss_sum needs gcd(a, q) = 1, got ({a}, {q})")
    total = 0j
    for b in range(1, q + 1):
        if math.gcd(b, q) == 1:
            ph = (a * pow(b, k, q)) % q
            total += cmath.exp(2j * math.pi * ph / q)
    return total


def _power_residue_counts(q: int, k: int) -> np.ndarray:
    """counts[r] = #{1 <= b <= q, gcd(b,q)=1, b^k == r mod q}."""
    b = np.arange(q, dtype=np.int64)
    coprime = np.gcd(b, q) == 1
    if q == 1:
        coprime[0] = True
    # left-to-right binary powering mod q; q^2 fits int64 for q <= 3e9
    r = np.ones(q, dtype=np.int64)
    base = b % q
    e = k
    while e:
        if e & 1:
            r = (r * base) % q
        base = (base * base) % q
        e >>= 1
    return np.bincount(r[coprime], minlength=q)


@dataclass(frozen=True)
class LocalData:
    """Gauss-sum data at modulus q for a given instance."""

    q: int
    gauss: np.ndarray  # S(q, a) for a = 0..q-1 (only coprime a meaningful)
    series_term: complex  # phi(q)^-s sum_a S(q,a)^s e(-aN/q)


def local_data(q: int, instance: "WaringInstance") -> LocalData:
    """All S(q, a) at once via a length-q DFT of the power-residue histogram."""
    counts = _power_residue_counts(q, instance.k)
    phi = int(counts.sum())
    s_all = q * np.fft.ifft(counts.astype(np.float64))
    a = np.arange(q, dtype=np.int64)
    coprime = np.gcd(a, q) == 1
    if q == 1:
        coprime[0] = True
    u = (a * (instance.N % q)) % q
    twist = np.exp(-2j * np.pi * u / q)
    term = np.sum((s_all[coprime] / phi) ** instance.s * twist[coprime])
    return LocalData(q, s_all, complex(term))


@dataclass(frozen=True)
class SingularSeries:
    value: float
    imag_max: float
    tail_estimate: float
    q_max: int


def singular_series(instance: WaringInstance, q_max: int = 10**4) -> SingularSeries:
    """Truncated singular series sum_{q <= q_max} phi(q)^-s S(q,.)^s e(-aN/q).

    The imaginary part (zero by conjugate symmetry up to rounding) is
    discarded and its maximum reported; the tail estimate is the total
    absolute mass of the last decade of q.
    """
    if q_max < 1 or q_max > 10**5:
        raise ConfigError("q_max must be in [1, 10^5]")
    total = 0.0
    imag_max = 0.0
    tail = 0.0
    decade = q_max // 10
    for q in range(1, q_max + 1):
        term = local_data(q, instance).series_term
        total += term.real
        imag_max = max(imag_max, abs(term.imag))
        if q > decade:
            tail += abs(term)
    return SingularSeries(total, imag_max, tail, q_max)


def local_density(p: int, j: int, instance: WaringInstance) -> float:
    """Solution density of b_1^k + ... + b_s^k == N mod p^j with p coprime b_i.

    Counted by s-fold cyclic convolution of the k-th-power residue histogram
    and normalized by p^j / phi(p^j)^s, so the stable limit in j is the Euler
    factor of the singular series at p.
    """
    if not _is_prime_small(p):
        raise ConfigError(f"{p} is not prime")
    if j < 1:
        raise ConfigError("j must be positive")
    pj = p**j
    if pj > 10**7:
        raise BudgetError(f"p^j = {pj} exceeds the 10^7 convolution budget")
    counts = _power_residue_counts(pj, instance.k)
    phi = counts.sum()
    prob = counts / phi
    hat = np.fft.rfft(prob)
    dist = np.fft.irfft(hat**instance.s, n=pj)
    return float(dist[instance.N % pj] * pj)


def stable_local_density(
    p: int, instance: WaringInstance, tol: float = 1e-9, j_cap: int = 12
) -> tuple[float, int]:
    """(density, j) at the first j where density(j) == density(j+1) within tol."""
    prev = local_density(p, 1, instance)
    j = 1
    while j < j_cap and p ** (j + 1) <= 10**7:
        nxt = local_density(p, j + 1, instance)
        if abs(nxt - prev) <= tol * max(1.0, abs(prev)):
            return nxt, j
        prev = nxt
        j += 1
    return prev, j


def archimedean_profile(
    beta: float,
    instance: WaringInstance,
    budget: int = 2 * 10**8,
    allow_fast: bool = False,
) -> complex:
    """v(beta) = k^-1 sum over (X-H)^k <= m <= (X+H)^k of m^(1/k - 1) e(beta m).

    Direct streaming summation.  Negative beta is evaluated as the conjugate
    of the positive case so v(-beta) == conj(v(beta)) holds exactly.  Above
    the term budget a midpoint-rule fast path is used if permitted.
    """
    if abs(beta) > 1:
        raise ConfigError("|beta| must be at most 1")
    if beta < 0:
        return archimedean_profile(-beta, instance, budget, allow_fast).conjugate()
    lo, hi = instance.value_range
    count = hi - lo + 1
    k = instance.k
    if count > budget:
        if not allow_fast:
            raise BudgetError(
                f"{count} terms exceed budget {budget}; pass allow_fast=True"
            )
        return _profile_fast(beta, lo, hi, k)
    total = 0j
    chunk = 10**7
    for start in range(lo, hi + 1, chunk):
        stop = min(start + chunk, hi + 1)
        m = np.arange(start, stop, dtype=np.float64)
        weights = m ** (1.0 / k - 1.0)
        frac = np.mod(beta * (m - lo), 1.0)
        total += np.sum(weights * np.exp(2j * np.pi * frac))
    anchor = float((Fraction(beta) * lo) % 1) if beta else 0.0
    total *= cmath.exp(2j * math.pi * anchor)
    return total / k


def _profile_fast(beta: float, lo: int, hi: int, k: int, panels: int = 200_000) -> complex:
    edges = np.linspace(lo, hi + 1, panels + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    widths = np.diff(edges)
    vals = mids ** (1.0 / k - 1.0) * np.exp(2j * np.pi * np.mod(beta * mids, 1.0))
    return complex(np.sum(vals * widths) / k)


def _fft_length(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


def singular_integral(instance: WaringInstance, budget: int = 10**9) -> float:
    """Exact coefficient extraction of integral of v(beta)^s e(-beta N).

    Equals k^-s * sum over m_1+...+m_s = N (each m_i a k-th-power-range
    index) of prod m_i^(1/k - 1), computed by FFT self-convolution of the
    weight array.  Zero exactly when N is outside the support.
    """
    lo, hi = instance.value_range
    s = instance.s
    if s * hi > budget:
        raise BudgetError(f"support {s * hi} exceeds budget {budget}; shrink X or s")
    if not s * lo <= instance.N <= s * hi:
        return 0.0
    k = instance.k
    m = np.arange(lo, hi + 1, dtype=np.float64)
    w = m ** (1.0 / k - 1.0) / k
    if s == 1:
        return float(w[instance.N - lo])
    D = hi - lo + 1
    L = _fft_length(s * (D - 1) + 1)
    hat = np.fft.rfft(w, L)
    conv = np.fft.irfft(hat**s, L)
    return float(conv[instance.N - s * lo])


@dataclass(frozen=True)
class RhoResult:
    value: float  # sum of prod Lambda(n_i) over solutions
    prime_solutions: int  # unweighted count with every n_i prime


def rho_exact(instance: WaringInstance, budget: int = 10**9) -> RhoResult:
    """Weighted count of N = n_1^k + ... + n_s^k with |n_i - X| <= H.

    Exact coefficient extraction: the Lambda-weighted histogram of k-th
    powers is self-convolved s times by FFT and read off at N.  The prime
    solution count uses the prime-indicator histogram and is rounded to the
    nearest integer (FFT noise is far below 1/2 at desk scale).
    """
    lo, hi = instance.value_range
    s = instance.s
    if s * hi > budget:
        raise BudgetError(f"support {s * hi} exceeds budget {budget}")
    if not s * lo <= instance.N <= s * hi:
        return RhoResult(0.0, 0)
    table = sieve_window(instance.window())
    n_vals = np.arange(instance.X - instance.H, instance.X + instance.H + 1, dtype=np.int64)
    idx = n_vals**instance.k - lo  # hi <= budget <= 1e9 keeps int64 exact
    D = hi - lo + 1
    lam_hist = np.zeros(D)
    lam_hist[idx] = table.von_mangoldt
    prime_hist = np.zeros(D)
    prime_hist[idx] = table.is_prime.astype(np.float64)
    if s == 1:
        at = instance.N - lo
        return RhoResult(float(lam_hist[at]), int(round(prime_hist[at])))
    L = _fft_length(s * (D - 1) + 1)
    lam_conv = np.fft.irfft(np.fft.rfft(lam_hist, L) ** s, L)
    prime_conv = np.fft.irfft(np.fft.rfft(prime_hist, L) ** s, L)
    at = instance.N - s * lo
    return RhoResult(float(lam_conv[at]), int(round(prime_conv[at])))


@dataclass(frozen=True)
class CongruenceDiagnosis:
    modulus: int
    n_residue: int
    s_residue: int

    @property
    def ok(self) -> bool:
        return self.n_residue == self.s_residue


@dataclass(frozen=True)
class RepresentationSearch:
    tuples: list
    diagnosis: CongruenceDiagnosis
    primes_in_window: int


def find_representations(
    instance: WaringInstance, limit: int = 10, budget: int = 5 * 10**7
) -> RepresentationSearch:
    """Up to ``limit`` tuples of primes (p_1 <= ... <= p_s) with sum p_i^k = N.

    Meet-in-the-middle: half sums over ceil(s/2) primes are indexed by value;
    every returned tuple is verified exactly in integer arithmetic.  An empty
    list is valid and comes with the congruence diagnosis N mod R vs s mod R.
    The diagnosis implies emptiness only when the window's primes are all
    coprime to R (p^k == 1 mod R then holds for each of them), which is
    automatic once X - H exceeds the largest prime factor of R.
    """
    if instance.s < 2:
        raise ConfigError("representation search needs s >= 2")
    R = admissibility_modulus(instance.k)
    diag = CongruenceDiagnosis(R, instance.N % R, instance.s % R)
    table = sieve_window(instance.window())
    primes = [int(p) for p in table.primes.tolist()]
    n_p = len(primes)
    s1 = (instance.s + 1) // 2
    s2 = instance.s - s1
    half_count = math.comb(n_p + s1 - 1, s1)
    if half_count > budget:
        feasible = s1
        while feasible > 1 and math.comb(n_p + feasible - 1, feasible) > budget:
            feasible -= 1
        raise BudgetError(
            f"half enumeration needs {half_count} tuples (> {budget}); "
            f"largest feasible split is {feasible} primes per half"
        )
    if not instance.feasible:
        return RepresentationSearch([], diag, n_p)
    k, N = instance.k, instance.N
    pk = {p: p**k for p in primes}

    # first half: non-decreasing s1-tuples, keyed by sum of k-th powers
    half: dict[int, list[tuple[int, ...]]] = {}

    def build(start: int, depth: int, tup: tuple, acc: int):
        if acc > N:
            return
        if depth == s1:
            half.setdefault(acc, []).append(tup)
            return
        for i in range(start, n_p):
            p = primes[i]
            build(i, depth + 1, tup + (p,), acc + pk[p])

    build(0, 0, (), 0)

    out: list[tuple[int, ...]] = []

    def probe(start: int, depth: int, tup: tuple, acc: int) -> bool:
        """Enumerate the non-decreasing second half; True when limit reached."""
        if acc > N:
            return False
        if depth == s2:
            lhs = half.get(N - acc)
            if lhs:
                lead = tup[0] if tup else None
                for cand in lhs:
                    if lead is not None and cand[-1] > lead:
                        continue
                    full = cand + tup
                    assert sum(v**k for v in full) == N
                    assert all(abs(v - instance.X) <= instance.H for v in full)
                    out.append(full)
                    if len(out) >= limit:
                        return True
            return False
        for i in range(start, n_p):
            p = primes[i]
            if probe(i, depth + 1, tup + (p,), acc + pk[p]):
                return True
        return False

    if s2 == 0:
        for cand in half.get(N, []):
            out.append(cand)
            if len(out) >= limit:
                break
    else:
        probe(0, 0, (), 0)
    return RepresentationSearch(out[:limit], diag, n_p)


def prime_generating_sum(instance: WaringInstance, alpha: Angle) -> ExpSumResult:
    """f(alpha): Lambda-weighted sum of e(alpha n^k) over |n - X| <= H.

    Delegates to lambda_exp_sum with the shifted monomial phase, hence the
    value carries an overall unimodular factor e(alpha*(X-H-1)^k) relative to
    the literal definition; magnitudes are unaffected.
    """
    window = instance.window()
    table = sieve_window(window)
    phase = monomial_to_shifted(alpha, instance.k, window.start)
    return lambda_exp_sum(table, phase, compensated=True)


def major_arc_main_term(instance: WaringInstance, q_max: int = 10**4) -> float:
    """Predicted main term: truncated singular series times singular integral."""
    series = singular_series(instance, q_max)
    integral = singular_integral(instance)
    return series.value * integral


def admissible_batch(
    k: int, s: int, near: int, count: int, seed: int = DEFAULT_SEED
) -> list[int]:
    """Deterministic batch of N == s (mod R(k)) around ``near``."""
    R = admissibility_modulus(k)
    base = near - ((near - s) % R)
    rng = np.random.default_rng((seed, k, s, near))
    span = np.arange(-5 * count, 5 * count + 1)
    rng.shuffle(span)
    picked: list[int] = []
    for off in span.tolist():
        cand = base + off * R
        if cand > 0:
            picked.append(cand)
        if len(picked) == count:
            break
    return sorted(picked)
