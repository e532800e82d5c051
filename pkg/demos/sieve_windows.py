#!/usr/bin/env python3
"""Sieve short windows at large offsets and inspect the arithmetic data."""

import math

from eslab import Window, chebyshev_psi_delta, divisor_moment, sieve_window

# a short window around 10^12: every n is fully factored
window = Window(10**12, 40)
table = sieve_window(window)

print(f"window ({window.start}, {window.end}]")
for n in list(window)[:12]:
    fac = " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in table.factorization(n))
    mark = " prime" if table.is_prime[table.index(n)] else ""
    print(f"  {n} = {fac}{mark}")

print(f"\nprimes in window: {table.primes.tolist()}")
print(f"psi-mass: {chebyshev_psi_delta(table):.4f}")
print(f"squarefree: {table.squarefree_count()} of {len(table)}")

# the short-interval divisor bound, empirically: the normalized ratio
# sum tau_r(n)^s / (H (log x)^(r^s - 1)) stays bounded across scales
print("\ndivisor moment tau_2(n)^2, windows (x, x + x^0.75]:")
for x in (10**6, 10**7, 10**8):
    m = divisor_moment(Window(x, int(x**0.75)), 2, 2)
    print(f"  x = {x:>9}: total {m.total:>12}  normalized {m.normalized:.4f}")
