#!/usr/bin/env python3
"""Lambda- and mu-weighted phase sums: rational vs generic coefficients.

At a rational alpha = a/q the Lambda sum keeps a main term of size about
|mu(q)|/phi(q) * H; at a generic (minor-arc) alpha both sums collapse to
square-root scale.  This is the discorrelation phenomenon the library
measures.
"""

import math

from eslab import Angle, Window, monomial_to_shifted, phase_weighted_sums, sieve_window

N = 10**7
window = Window.from_theta(N, 0.7)
table = sieve_window(window)
H = window.length
print(f"window ({N}, {N}+{H}], log N = {math.log(N):.2f}\n")

cases = [
    ("alpha = 0 (trivial)", Angle(0), 1),
    ("alpha = 1/3, k=1", Angle.from_fraction(1, 3), 1),
    ("alpha = 1/4, k=2", Angle.from_fraction(1, 4), 2),
    ("golden ratio, k=1", Angle.from_float((5**0.5 - 1) / 2), 1),
    ("golden ratio, k=2", Angle.from_float((5**0.5 - 1) / 2), 2),
    ("sqrt(2)-1, k=3", Angle.from_float(2**0.5 - 1), 3),
]

print(f"{'phase':<24} {'|S_Lambda|/H':>12} {'|S_mu|/H':>12}")
for label, alpha, k in cases:
    phase = monomial_to_shifted(alpha, k, N)
    lam, mob = phase_weighted_sums(table, phase, compensated=True)
    print(f"{label:<24} {lam.normalized:>12.5f} {mob.normalized:>12.5f}")

print(f"\nsquare-root scale 1/sqrt(H) = {1 / math.sqrt(H):.5f} for comparison")
