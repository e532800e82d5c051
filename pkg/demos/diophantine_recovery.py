#!/usr/bin/env python3
"""Recover rational structure from phase coefficients.

Large weighted sums only happen when every coefficient sits near a rational
with a common small denominator at scale H^-j.  The searches below certify
exact minima, so the recovered (q, quality) pairs are trustworthy evidence.
"""

from fractions import Fraction

from eslab import (
    Angle,
    PolynomialPhase,
    best_rational,
    classify_arc,
    monomial_lift,
    simultaneous_q_search,
    type_ii_structure_search,
)

N, H = 10**7, 10**5

print("best rational approximations of 0.6180339887 (golden ratio):")
alpha = Angle.from_float(0.6180339887)
for q_max in (10, 100, 1000, 10**5):
    r = best_rational(alpha, q_max)
    print(f"  q <= {q_max:>6}: {r.a}/{r.q}  ||q alpha|| = {r.err:.3e}")

print("\nsimultaneous q-search on a planted phase (denominator 12):")
planted = PolynomialPhase.from_fractions(
    N, [Fraction(5, 12) + Fraction(1, 50 * H), Fraction(7, 12) + Fraction(1, 20 * H**2)]
)
fit = simultaneous_q_search(planted, H, 10**4)
print(f"  recovered q = {fit.q}, quality max_j H^j ||q a_j|| = {fit.quality:.3f}")

print("\ntype-II structure of the same phase:")
t2 = type_ii_structure_search(planted, N, H, 10**4)
print(f"  q = {t2.q}, quality = {t2.quality:.3e}")

print("\nmonomial lift: alpha = 1/3 + 1e-12 seen through binomial coefficients")
lifted = monomial_lift(3, Angle.from_fraction(Fraction(1, 3) + Fraction(1, 10**12)), 2, 10**4, 10**3)
print(f"  q' = {lifted.q_prime}, descent chain = {[f'{b:.2e}' for b in lifted.bound_chain]}")

print("\narc classification at Q = 250, X = N, H as above, k = 1:")
for label, a in [("1/3", Angle.from_fraction(1, 3)), ("golden", alpha)]:
    arc = classify_arc(a, 1, N, H, 250.0)
    kind = f"major ({arc.a}/{arc.q})" if arc.major else "minor"
    print(f"  {label}: {kind}")
