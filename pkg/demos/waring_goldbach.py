#!/usr/bin/env python3
"""Sums of five prime squares with all primes in a short interval.

Desk-scale run of the circle-method pipeline: exact representation count by
convolution, the major-arc prediction (truncated singular series times
singular integral), and explicit representations by meet-in-the-middle.
"""

from eslab import (
    WaringInstance,
    admissibility_modulus,
    admissible_batch,
    find_representations,
    rho_exact,
    singular_integral,
    singular_series,
)

k, s = 2, 5
R = admissibility_modulus(k)
print(f"k={k}, s={s}: admissibility modulus R = {R}, need N == {s % R} (mod {R})\n")

for N in admissible_batch(k, s, 5 * 10**6, 3):
    inst = WaringInstance.create(k, s, N, 0.8)
    series = singular_series(inst, 2000)
    integral = singular_integral(inst)
    rho = rho_exact(inst)
    reps = find_representations(inst, limit=3)
    print(f"N = {N}  (X = {inst.X}, H = {inst.H})")
    print(f"  singular series (q <= 2000): {series.value:.4f}  tail ~ {series.tail_estimate:.4f}")
    print(f"  singular integral          : {integral:.1f}")
    print(f"  predicted main term        : {series.value * integral:.1f}")
    print(f"  exact rho(N)               : {rho.value:.1f}  ({rho.prime_solutions} prime tuples)")
    for tup in reps.tuples:
        terms = " + ".join(f"{p}^2" for p in tup)
        print(f"    {N} = {terms}")
    print()
