"""Exact counting for Vinogradov systems and short-interval Weyl mean values.

J_{t,k}(H) counts ordered solutions of x_1^j + ... + x_t^j = y_1^j + ... +
y_t^j for all 1 <= j <= k with variables in [1, H].  The count equals the sum
of squared multiplicities of the power-sum vector over all H^t tuples, which
is what is computed: multisets are enumerated once and weighted by their
permutation counts, keys are exact integer vectors, and totals are carried
as arbitrary-precision integers (J overflows 64 bits quickly).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConfigError

_TUPLE_BUDGET = 10**9


@dataclass(frozen=True)
class VinogradovCount:
    t: int
    k: int
    H: int
    count: int
    normalized: float


def _multiset_power_sums(values: np.ndarray, t: int, k: int):
    """(power-sum matrix, permutation counts) over non-decreasing t-tuples.

    Rows of the matrix are (sum v^1, ..., sum v^k); the weight of a row is
    the number of ordered rearrangements of its multiset.
    """
    n = len(values)
    combos = np.fromiter(
        itertools.chain.from_iterable(
            itertools.combinations_with_replacement(range(n), t)
        ),
        dtype=np.int64,
        count=math.comb(n + t - 1, t) * t,
    ).reshape(-1, t)
    vals = values[combos]  # (m, t)
    sums = np.empty((vals.shape[0], k), dtype=np.int64)
    power = vals.copy()
    sums[:, 0] = power.sum(axis=1)
    for j in range(1, k):
        power *= vals
        sums[:, j] = power.sum(axis=1)
    # permutation count t! / prod(run lengths!) from the run structure
    perms = np.full(vals.shape[0], math.factorial(t), dtype=np.int64)
    if t > 1:
        run = np.ones(vals.shape[0], dtype=np.int64)
        for pos in range(1, t):
            same = vals[:, pos] == vals[:, pos - 1]
            run = np.where(same, run + 1, 1)
            perms[same] //= run[same]
    return sums, perms


def _sum_squared_multiplicities(sums: np.ndarray, perms: np.ndarray) -> int:
    _, inverse = np.unique(sums, axis=0, return_inverse=True)
    ordered = np.bincount(inverse.ravel(), weights=perms.astype(np.float64))
    # weights stay below 2^53 under the tuple budget, so float64 is exact
    per_key = np.rint(ordered).astype(np.int64)
    return int(sum(int(c) * int(c) for c in per_key.tolist()))


def count_vinogradov_solutions(t: int, k: int, H: int) -> VinogradovCount:
    """Exact J_{t,k}(H) by hashing power-sum vectors (certified integer)."""
    if t < 1 or k < 1 or H < 1:
        raise ConfigError("t, k, H must be positive")
    if H**t > _TUPLE_BUDGET:
        feasible = int(_TUPLE_BUDGET ** (1.0 / t))
        raise BudgetError(
            f"H^t = {H**t} exceeds {_TUPLE_BUDGET}; largest feasible H is {feasible}"
        )
    values = np.arange(1, H + 1, dtype=np.int64)
    if H ** k * t > 2**62:
        raise BudgetError("power sums would overflow the exact integer kernel")
    sums, perms = _multiset_power_sums(values, t, k)
    count = _sum_squared_multiplicities(sums, perms)
    normalized = count / float(H) ** (2 * t - k * (k + 1) // 2)
    return VinogradovCount(t, k, H, count, normalized)


def weyl_mean_value(t: int, X: int, H: int, k: int) -> int:
    """Exact integral of |F(alpha)|^(2t) with F(alpha) = sum e(alpha n^k),
    |n - X| <= H: the number of solutions of sum x_i^k = sum y_i^k in the
    window, via the t-fold sumset histogram."""
    if t < 1 or k < 1 or H < 0 or X - H < 0:
        raise ConfigError("need t, k >= 1 and 0 <= H <= X")
    if (2 * H + 1) ** t > _TUPLE_BUDGET:
        raise BudgetError(f"(2H+1)^t = {(2*H+1)**t} exceeds {_TUPLE_BUDGET}")
    if (X + H) ** k * t > 2**62:
        # values overflow the vector kernel; exact big-int dictionary path
        if (2 * H + 1) ** t > 10**7:
            raise BudgetError("window too wide for the big-integer fallback")
        powers_py = [n**k for n in range(X - H, X + H + 1)]
        counts = {0: 1}
        for _ in range(t):
            nxt: dict = {}
            for v, c in counts.items():
                for p in powers_py:
                    key = v + p
                    nxt[key] = nxt.get(key, 0) + c
            counts = nxt
        return sum(c * c for c in counts.values())
    n = np.arange(X - H, X + H + 1, dtype=np.int64)
    powers = n**k
    uniq = powers.copy()
    cnt = np.ones(len(uniq), dtype=np.int64)
    for _ in range(t - 1):
        sums = (uniq[:, None] + powers[None, :]).ravel()
        wts = np.repeat(cnt, len(powers))
        uniq, inverse = np.unique(sums, return_inverse=True)
        acc = np.bincount(inverse, weights=wts.astype(np.float64))
        cnt = np.rint(acc).astype(np.int64)
    return int(sum(int(c) * int(c) for c in cnt.tolist()))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]


def scaling_exponent(t: int, k: int, H_list: list[int]) -> SlopeFit:
    """Ordinary least-squares slope of log J_{t,k}(H) against log H."""
    if len(H_list) < 4:
        raise ConfigError("need at least 4 H values")
    if any(b <= a for a, b in zip(H_list, H_list[1:])):
        raise ConfigError("H_list must be strictly ascending")
    counts = [count_vinogradov_solutions(t, k, H).count for H in H_list]
    x = np.log(np.array(H_list, dtype=np.float64))
    y = np.log(np.array([float(c) for c in counts]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return SlopeFit(float(slope), float(intercept), tuple(float(r) for r in resid))


def daemen_ratio(t: int, k: int, X: int, H: int) -> float:
    """Measured ratio of the Weyl mean value to (H^(k(k+1)/2-1)/X^(k-1)) * J.

    The comparison lemma gives only an unspecified implicit constant, so the
    ratio is reported as a diagnostic.
    """
    mv = weyl_mean_value(t, X, H, k)
    J = count_vinogradov_solutions(t, k, H).count
    scale = float(H) ** (k * (k + 1) // 2 - 1) / float(X) ** (k - 1)
    return mv / (scale * J)
