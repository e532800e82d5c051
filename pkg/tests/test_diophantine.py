"""Rational approximation, q-searches, arc classification, n^{it} fits."""

import math
import random
from fractions import Fraction

import pytest

from eslab.errors import ConfigError, StructureError
from eslab.phase import MODULUS, Angle, PolynomialPhase, shift_basis
from eslab.sieve import Window
from eslab.diophantine import (
    Arc,
    best_rational,
    classify_arc,
    continued_fraction_convergents,
    monomial_lift,
    nit_approximation,
    simultaneous_q_search,
    type_ii_structure_search,
)

rng = random.Random(5551212)


def brute_norm(raw, q):
    v = (q * raw) % MODULUS
    return min(v, MODULUS - v)


class TestConvergents:
    def test_exact_third(self):
        convs = continued_fraction_convergents(Angle.from_fraction(1, 3), 10)
        assert [(c.a, c.q) for c in convs] == [(0, 1), (1, 3)]

    def test_zero(self):
        convs = continued_fraction_convergents(Angle(0), 5)
        assert [(c.a, c.q) for c in convs] == [(0, 1)]

    def test_golden_example(self):
        convs = continued_fraction_convergents(Angle.from_float(0.618034), 13)
        pairs = [(c.a, c.q) for c in convs]
        for want in [(1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]:
            assert want in pairs

    def test_quality_bound(self):
        # every convergent satisfies |alpha - a/q| < 1/q^2
        for _ in range(50):
            a = Angle(rng.getrandbits(128))
            for c in continued_fraction_convergents(a, 10**6):
                err = abs(Fraction(a.raw, MODULUS) - Fraction(c.a, c.q))
                assert err < Fraction(1, c.q**2)

    def test_nondecreasing_q(self):
        # q repeats only for the leading 0/1, 1/1 pair of a CF starting [0;1,..]
        for _ in range(20):
            a = Angle(rng.getrandbits(128))
            qs = [c.q for c in continued_fraction_convergents(a, 10**5)]
            assert qs == sorted(qs)
            assert len(set(qs)) >= len(qs) - 1


class TestBestRational:
    def test_example_near_third(self):
        r = best_rational(Angle.from_float(0.3333340), 10)
        assert (r.a, r.q) == (1, 3)
        assert r.err == pytest.approx(2e-6, rel=1e-6)

    def test_example_golden(self):
        r = best_rational(Angle.from_float(0.618034), 10)
        assert r.q == 8
        assert r.err == pytest.approx(0.055728, rel=1e-4)

    def test_exact_half(self):
        r = best_rational(Angle.from_fraction(1, 2), 10)
        assert (r.a, r.q, r.err) == (1, 2, 0.0)

    def test_matches_exhaustive_with_tie_break(self):
        for _ in range(300):
            a = Angle(rng.getrandbits(128) if rng.random() < 0.5
                      else (rng.randrange(1, 60) * MODULUS) // rng.randrange(1, 60) % MODULUS)
            q_max = rng.randrange(1, 500)
            got = best_rational(a, q_max)
            want = min(range(1, q_max + 1), key=lambda q: (brute_norm(a.raw, q), q))
            assert got.q == want

    def test_err_is_minimal_property(self):
        for _ in range(50):
            a = Angle(rng.getrandbits(128))
            r = best_rational(a, 1000)
            for q in range(1, 1001):
                assert r.err <= brute_norm(a.raw, q) / MODULUS + 1e-18

    def test_large_qmax_uses_convergents(self):
        a = Angle.from_fraction(1, 3)
        r = best_rational(a, 10**7)
        assert r.q == 3 and r.err < 1e-30

    def test_qmax_validation(self):
        with pytest.raises(ConfigError):
            best_rational(Angle(1), 0)


class TestSimultaneous:
    def test_common_denominator(self):
        ph = PolynomialPhase.from_fractions(0, [Fraction(1, 6), Fraction(5, 6)])
        r = simultaneous_q_search(ph, 100, 10)
        assert r.q == 6
        assert r.quality < 1e-30

    def test_perturbed_example(self):
        H = 10**4
        ph = PolynomialPhase.from_fractions(0, [Fraction(1, 3) + Fraction(1, 10 * H)])
        r = simultaneous_q_search(ph, H, 10)
        assert r.q == 3
        assert r.quality == pytest.approx(0.3, rel=1e-9)

    def test_generic_minor_is_large(self):
        ph = PolynomialPhase(0, (Angle(rng.getrandbits(128)),))
        r = simultaneous_q_search(ph, 10**4, 100)
        assert r.quality > 1.0

    def test_none_on_empty_search(self):
        ph = PolynomialPhase(0, (Angle(1),))
        assert simultaneous_q_search(ph, 10, 0) is None

    def test_monotone_in_qmax(self):
        for _ in range(20):
            k = rng.randrange(1, 4)
            ph = PolynomialPhase(0, tuple(Angle(rng.getrandbits(128)) for _ in range(k)))
            H = rng.randrange(10, 10**5)
            quals = [simultaneous_q_search(ph, H, qm).quality for qm in (10, 100, 1000)]
            assert quals[0] >= quals[1] >= quals[2]

    def test_matches_brute_force(self):
        for _ in range(30):
            k = rng.randrange(1, 4)
            ph = PolynomialPhase(0, tuple(Angle(rng.getrandbits(128)) for _ in range(k)))
            H = rng.randrange(2, 1000)
            q_max = rng.randrange(1, 200)
            got = simultaneous_q_search(ph, H, q_max)
            raws = ph.raw_coeffs()

            def qual(q):
                return max(H**j * brute_norm(raws[j - 1], q) for j in range(1, k + 1))

            want_q = min(range(1, q_max + 1), key=lambda q: (qual(q), q))
            assert got.q == want_q
            assert got.quality == pytest.approx(qual(want_q) / MODULUS, rel=1e-12, abs=1e-300)


class TestTypeIIStructure:
    def test_monomial_rational_gives_zero_quality(self):
        from eslab.phase import monomial_to_shifted

        ph = monomial_to_shifted(Angle.from_fraction(2, 5), 3, 10**4)
        r = type_ii_structure_search(ph, 10**4, 10**3, 5 * math.factorial(3))
        assert r.quality < 1e-20

    def test_k1_reduction(self):
        ph = PolynomialPhase.from_fractions(0, [Fraction(1, 7)])
        r = type_ii_structure_search(ph, 1000, 100, 10)
        assert r.q == 7
        assert r.quality < 1e-30
        # combined angle is j*alpha_j with alpha_2 = 0
        assert r.combined[0] == Angle.from_fraction(1, 7)

    def test_generic_large(self):
        ph = PolynomialPhase(0, (Angle(rng.getrandbits(128)), Angle(rng.getrandbits(128))))
        r = type_ii_structure_search(ph, 10**6, 10**4, 50)
        assert r.quality > 1.0

    def test_combined_angles_exact(self):
        k = 3
        raws = [rng.getrandbits(128) for _ in range(k)]
        ph = PolynomialPhase(0, tuple(Angle(r) for r in raws))
        N = 987654321
        r = type_ii_structure_search(ph, N, 100, 5)
        for j in range(1, k + 1):
            nxt = raws[j] if j < k else 0
            want = (j * raws[j - 1] + (j + 1) * N * nxt) % MODULUS
            assert r.combined[j - 1].raw == want


class TestMonomialLift:
    def test_exact_rational(self):
        lift = monomial_lift(5, Angle.from_fraction(2, 5), 3, 10**5, 10**3)
        assert lift.q_prime == math.lcm(5 * 3, 5 * 3, 5 * 1)
        assert all(b < 1e-15 for b in lift.bound_chain)

    def test_hand_chain_example(self):
        # k=2, N=1e4, H=1e3, alpha = 1/3 + 1e-12: q' = lcm(6, 3) = 6,
        # final quality = N*H*||6 alpha|| = 1e7 * 6e-12 = 6e-5
        alpha = Angle.from_fraction(Fraction(1, 3) + Fraction(1, 10**12))
        lift = monomial_lift(3, alpha, 2, 10**4, 10**3)
        assert lift.q_prime == 6
        assert lift.final_quality == pytest.approx(6e-5, rel=1e-6)
        assert lift.bound_chain[0] == pytest.approx(6e-6, rel=1e-6)

    def test_generic_alpha_fails_at_first_transition(self):
        # ||.|| <= 1/2 always, so the j=k check cannot fail; the first
        # transition that can is j = k-1, where generic alpha breaks.
        alpha = Angle.from_float(0.6180339887)
        with pytest.raises(StructureError) as exc:
            monomial_lift(1, alpha, 3, 10**6, 10**4)
        assert exc.value.step == 2

    def test_hypotheses_measured(self):
        alpha = Angle.from_fraction(1, 4)
        lift = monomial_lift(4, alpha, 2, 100, 10)
        assert len(lift.hypotheses) == 2


class TestClassifyArc:
    def test_exact_third_major(self):
        arc = classify_arc(Angle.from_fraction(1, 3), 1, 10**6, 10**4, 10.0)
        assert arc.major and (arc.a, arc.q) == (1, 3)

    def test_just_outside_is_minor(self):
        X, H, k, Q = 10**6, 10**4, 1, 5.0
        off = Fraction(2 * 5, X ** (k - 1) * H)
        arc = classify_arc(Angle.from_fraction(Fraction(1, 3) + off), k, X, H, Q)
        assert not arc.major

    def test_large_denominator_minor(self):
        arc = classify_arc(Angle.from_fraction(5, 211), 1, 10**6, 10**6, 100.0)
        assert not arc.major

    def test_matches_brute_force(self):
        X, H = 10**4, 10**4
        for _ in range(150):
            k = rng.randrange(1, 3)
            Q = float(rng.randrange(2, 60))
            a = Angle(rng.getrandbits(128) if rng.random() < 0.6
                      else Angle.from_fraction(rng.randrange(0, 30), rng.randrange(1, 30)).raw
                      + rng.randrange(-1000, 1000))
            got = classify_arc(a, k, X, H, Q)
            width = Fraction(Q) / (X ** (k - 1) * H)
            brute = None
            for q in range(1, int(Q) + 1):
                for cand_a in range(1, q + 1):
                    if math.gcd(cand_a, q) == 1 and abs(
                        Fraction(q * a.raw, MODULUS) - cand_a
                    ) <= width:
                        brute = (cand_a, q)
                        break
                if brute:
                    break
            if brute is None:
                assert not got.major
            else:
                assert got.major and (got.a, got.q) == brute

    def test_width_guard(self):
        with pytest.raises(ConfigError):
            classify_arc(Angle(0), 1, 10, 1, 9.0)


def taylor_phase(t0, k, base):
    coeffs = []
    for j in range(1, k + 1):
        beta = Fraction(t0) * (-1) ** (j - 1) / (2 * math.pi * j * base**j)
        coeffs.append(Angle.from_fraction(beta - math.floor(beta)))
    return PolynomialPhase(base, tuple(coeffs))


class TestNitApproximation:
    def test_all_zero_coefficients(self):
        ph = PolynomialPhase(10**6, (Angle(0), Angle(0), Angle(0)))
        w = Window(10**6, 31623)
        model = nit_approximation(ph, w, 1, 2.0)
        assert model.t == 0.0
        assert model.max_dev == 0.0
        assert model.eta == pytest.approx(1.0)

    def test_tiny_linear_phase(self):
        # k=1 with |alpha| <= 1/(10 H): t ~ 2 pi n0 alpha, small deviation
        N, H = 10**6, 10**4
        alpha = Fraction(1, 10 * H)
        ph = PolynomialPhase.from_fractions(N, [alpha])
        model = nit_approximation(ph, Window(N, H), 1, 0.0)
        assert model.t == pytest.approx(2 * math.pi * N * float(alpha), rel=1e-9)
        assert model.max_dev <= 0.01

    def test_round_trip_taylor(self):
        N, k = 10**6, 3
        w = Window.from_theta(N, 0.75)
        for _ in range(10):
            t0 = rng.uniform(-1, 1) * (N / w.length) ** (k + 1)
            ph = taylor_phase(t0, k, N)
            model = nit_approximation(ph, w, 1, 2.0)
            assert model.t == pytest.approx(t0, rel=0.01, abs=1e-9)
            assert model.max_dev <= 0.01

    def test_round_trip_with_basis_shift(self):
        N, k = 10**6, 3
        w = Window.from_theta(N, 0.75)
        t0 = 0.4 * (N / w.length) ** (k + 1)
        ph = shift_basis(taylor_phase(t0, k, N), N - 777)
        model = nit_approximation(ph, w, 1, 2.0)
        assert model.t == pytest.approx(t0, rel=0.01)
        assert model.max_dev <= 0.01

    def test_structure_precondition_raises(self):
        ph = PolynomialPhase(10**6, (Angle(rng.getrandbits(128)),
                                     Angle(rng.getrandbits(128)),
                                     Angle(rng.getrandbits(128))))
        with pytest.raises(StructureError) as exc:
            nit_approximation(ph, Window(10**6, 31623), 1, 2.0,
                              structure_threshold=1e-6)
        assert exc.value.quality is not None

    def test_progression_length_guard(self):
        ph = PolynomialPhase(10**6, (Angle(0),))
        with pytest.raises(ConfigError):
            nit_approximation(ph, Window(10**6, 1000), 1, 8.0)
