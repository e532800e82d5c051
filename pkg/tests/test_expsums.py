"""Weighted exponential sums, bilinear sums, Heath-Brown decomposition."""

import cmath
import math
import random

import numpy as np
import pytest

from eslab.errors import ConfigError
from eslab.phase import Angle, PolynomialPhase, phase_at, zero_phase
from eslab.sieve import Window, chebyshev_psi_delta, sieve_window
from eslab.expsums import (
    BilinearSpec,
    cube_cutoff,
    heath_brown_decompose,
    lambda_exp_sum,
    mobius_exp_sum,
    phase_weighted_sums,
    type_i_sum,
    type_ii_applicable,
    type_ii_sum,
    unit_exp_sum,
    weyl_sum,
)

rng = random.Random(424242)


def brute_weighted_sum(table, phase, weights):
    """Direct per-n evaluation, independent of the streaming engine."""
    total = 0j
    for i, n in enumerate(table.window):
        total += weights[i] * cmath.exp(2j * math.pi * phase_at(phase, n).to_float())
    return total


class TestPlainSums:
    def test_zero_phase_equals_psi(self):
        t = sieve_window(Window(10, 10))
        r = lambda_exp_sum(t, zero_phase(10))
        assert r.value == pytest.approx(chebyshev_psi_delta(t), rel=1e-12)
        assert r.terms == 10

    def test_alternating_lambda_example(self):
        # alpha=1/2 on (10,20]: log 2 - log(11*13*17*19)
        t = sieve_window(Window(10, 10))
        ph = PolynomialPhase(10, (Angle.from_fraction(1, 2),))
        want = math.log(2) - math.log(11 * 13 * 17 * 19)
        r = lambda_exp_sum(t, ph)
        assert r.value.real == pytest.approx(want, rel=1e-10)
        assert abs(r.value.imag) < 1e-9

    def test_empty_window(self):
        t = sieve_window(Window(50, 0))
        assert lambda_exp_sum(t, zero_phase(50)).value == 0
        assert mobius_exp_sum(t, zero_phase(50)).value == 0

    def test_mobius_zero_phase(self):
        t = sieve_window(Window(1, 9))
        assert mobius_exp_sum(t, zero_phase(1)).value == pytest.approx(-2 + 0j, abs=1e-12)

    def test_mobius_half_phase_example(self):
        t = sieve_window(Window(1, 3))
        ph = PolynomialPhase(1, (Angle.from_fraction(1, 2),))
        assert mobius_exp_sum(t, ph).value == pytest.approx(0j, abs=1e-12)

    def test_streamed_matches_pointwise(self):
        t = sieve_window(Window(31415, 900))
        for _ in range(5):
            k = rng.randrange(1, 5)
            ph = PolynomialPhase(31415, tuple(Angle(rng.getrandbits(128)) for _ in range(k)))
            got = lambda_exp_sum(t, ph, compensated=True).value
            want = brute_weighted_sum(t, ph, t.von_mangoldt)
            assert got == pytest.approx(want, abs=1e-8)

    def test_triangle_inequality(self):
        t = sieve_window(Window(1000, 500))
        bound_l = float(np.sum(t.von_mangoldt))
        bound_m = float(np.sum(np.abs(t.mobius)))
        for _ in range(10):
            k = rng.randrange(1, 6)
            ph = PolynomialPhase(1000, tuple(Angle(rng.getrandbits(128)) for _ in range(k)))
            lam, mob = phase_weighted_sums(t, ph)
            assert abs(lam.value) <= bound_l + 1e-9
            assert abs(mob.value) <= bound_m + 1e-9

    def test_conjugation(self):
        t = sieve_window(Window(5000, 800))
        for _ in range(5):
            k = rng.randrange(1, 4)
            coeffs = tuple(Angle(rng.getrandbits(128)) for _ in range(k))
            ph = PolynomialPhase(5000, coeffs)
            ng = PolynomialPhase(5000, tuple(-c for c in coeffs))
            a = lambda_exp_sum(t, ph, compensated=True).value
            b = lambda_exp_sum(t, ng, compensated=True).value
            assert b == pytest.approx(a.conjugate(), rel=1e-12, abs=1e-9)

    def test_compensated_matches_plain(self):
        t = sieve_window(Window(99991, 3000))
        ph = PolynomialPhase(99991, (Angle.from_float(0.137),))
        a = lambda_exp_sum(t, ph, compensated=False).value
        b = lambda_exp_sum(t, ph, compensated=True).value
        assert a == pytest.approx(b, rel=1e-12)


class TestWeylSum:
    def test_zero_alpha(self):
        assert weyl_sum(100, 7, Angle(0), 3).value == 15

    def test_hand_example_k1(self):
        r = weyl_sum(10, 2, Angle.from_fraction(1, 2), 1)
        assert r.value == pytest.approx(1 + 0j, abs=1e-12)

    def test_hand_example_k2(self):
        r = weyl_sum(2, 2, Angle.from_fraction(1, 4), 2)
        assert r.value == pytest.approx(3 + 2j, abs=1e-12)

    def test_matches_literal_brute(self):
        for _ in range(5):
            X = rng.randrange(10, 3000)
            H = rng.randrange(0, 50)
            k = rng.randrange(1, 5)
            a = Angle(rng.getrandbits(128))
            want = sum(
                cmath.exp(2j * math.pi * a.scaled(n**k).to_float())
                for n in range(X - H, X + H + 1)
            )
            got = weyl_sum(X, H, a, k).value
            assert got == pytest.approx(want, abs=1e-8)


class TestBilinear:
    def test_type_i_mobius_example(self):
        # (10,100], M=2: mu(3)*#{l: 10 < 3l <= 100} + mu(4)*0 = -30
        r = type_i_sum(Window(10, 90), BilinearSpec(M=2, b="mobius"), zero_phase(10))
        assert r.value == pytest.approx(-30 + 0j, abs=1e-12)

    def test_type_i_unit_counts_multiples(self):
        w = Window(200, 150)
        r = type_i_sum(w, BilinearSpec(M=3), zero_phase(200))
        want = sum(350 // m - 200 // m for m in range(4, 7))
        assert r.value == pytest.approx(want + 0j, abs=1e-12)

    def test_type_i_outer_range_warning(self):
        with pytest.warns(UserWarning):
            r = type_i_sum(Window(10, 5), BilinearSpec(M=50), zero_phase(10))
        assert r.value == 0

    def test_type_i_log_specialization(self):
        # collapses to sum over multiples with log weight; brute-check
        w = Window(60, 45)
        ph = PolynomialPhase(60, (Angle.from_float(0.31),))
        r = type_i_sum(w, BilinearSpec(M=1, psi="log"), ph, compensated=True)
        want = 0j
        for m in (2,):
            for l in range(60 // m + 1, 105 // m + 1):
                want += math.log(l) * cmath.exp(
                    2j * math.pi * phase_at(ph, l * m).to_float()
                )
        assert r.value == pytest.approx(want, abs=1e-9)

    def test_type_ii_pair_count(self):
        w = Window(100, 60)
        got = type_ii_sum(w, BilinearSpec(M=5), zero_phase(100)).value
        L = 100 // 5
        cnt = sum(
            1
            for m in range(6, 11)
            for l in range((L + 1) // 2, 2 * L + 1)
            if 100 < l * m <= 160
        )
        assert got == pytest.approx(cnt + 0j, abs=1e-12)

    def test_type_ii_empty_window(self):
        r = type_ii_sum(Window(100, 0), BilinearSpec(M=5), zero_phase(100))
        assert r.value == 0

    def test_type_ii_log_weights_brute(self):
        w = Window(300, 120)
        spec = BilinearSpec(M=8, a="log")
        got = type_ii_sum(w, spec, zero_phase(300), compensated=True).value
        L = 300 // 8
        want = 0.0
        for m in range(9, 17):
            for l in range((L + 1) // 2, 2 * L + 1):
                if 300 < l * m <= 420:
                    want += math.log(l)
        assert got == pytest.approx(want + 0j, rel=1e-9)

    def test_type_ii_seeded_reproducible(self):
        w = Window(300, 120)
        ph = zero_phase(300)
        a = type_ii_sum(w, BilinearSpec(M=8, a="seeded", b="seeded", seed=7), ph).value
        b = type_ii_sum(w, BilinearSpec(M=8, a="seeded", b="seeded", seed=7), ph).value
        c = type_ii_sum(w, BilinearSpec(M=8, a="seeded", b="seeded", seed=8), ph).value
        assert a == b
        assert a != c

    def test_applicability_flag(self):
        assert type_ii_applicable(Window(100, 60), 5)  # L=20, M=5, H=60
        assert not type_ii_applicable(Window(10**6, 100), 5)

    def test_descriptor_validation(self):
        with pytest.raises(ConfigError):
            BilinearSpec(M=2, b="bogus")
        with pytest.raises(ConfigError):
            BilinearSpec(M=2, psi="sqrt")
        assert BilinearSpec(M=2, b="seeded").tau5_bounded("b")
        assert not BilinearSpec(M=2, a="log").tau5_bounded("a")


def brute_hb_tuples(n, j, z, with_log):
    """All ordered factorization tuples with nonzero weight, by brute force."""
    n_free = j if with_log else j - 1
    n_mu = j
    slots = n_free + n_mu

    def mu(v):
        if v == 1:
            return 1
        m, cnt = v, 0
        d = 2
        while d * d <= m:
            if m % d == 0:
                m //= d
                cnt += 1
                if m % d == 0:
                    return 0
            d += 1
        return (-1) ** (cnt + (m > 1))

    out = []

    def rec(prefix, rem):
        depth = len(prefix)
        if depth == slots - 1:
            tup = prefix + (rem,)
            weight = 1.0
            for t in range(n_free, slots):
                v = tup[t]
                if v > z or mu(v) == 0:
                    return
                weight *= mu(v)
            if with_log:
                if tup[0] == 1:
                    return
                weight *= math.log(tup[0])
            out.append((tup, weight))
            return
        for d in sorted(
            d for d in range(1, rem + 1) if rem % d == 0
        ):
            if depth >= n_free and (d > z or mu(d) == 0):
                continue
            rec(prefix + (d,), rem // d)

    rec((), n)
    return out


class TestHeathBrown:
    def test_lambda_identity_zero_phase(self):
        tab = sieve_window(Window(2000, 300))
        hb = heath_brown_decompose(tab, zero_phase(2000), "lambda")
        direct = chebyshev_psi_delta(tab)
        assert hb.total.real == pytest.approx(direct, rel=1e-11)
        assert abs(hb.total.imag) < 1e-9
        assert hb.per_n_max_err < 1e-11

    def test_mu_identity_integer_exact(self):
        tab = sieve_window(Window(2000, 300))
        hb = heath_brown_decompose(tab, zero_phase(2000), "mu")
        assert hb.total == complex(int(np.sum(tab.mobius)))

    def test_empty_window(self):
        tab = sieve_window(Window(100, 0))
        hb = heath_brown_decompose(tab, zero_phase(100), "lambda")
        assert hb.total == 0 and hb.components == []

    def test_phased_totals_match_direct(self):
        tab = sieve_window(Window(5000, 250))
        ph = PolynomialPhase(5000, (Angle.from_float(0.61), Angle.from_float(0.007)))
        for target, direct_fn in (("lambda", lambda_exp_sum), ("mu", mobius_exp_sum)):
            hb = heath_brown_decompose(tab, ph, target)
            direct = direct_fn(tab, ph, compensated=True).value
            assert hb.total == pytest.approx(direct, rel=1e-11, abs=1e-9)

    def test_dyadic_completeness_counts(self):
        # every nonzero-weight tuple lands in exactly one (j, box) component
        tab = sieve_window(Window(100, 40))
        z = cube_cutoff(100)
        for target in ("lambda", "mu"):
            hb = heath_brown_decompose(tab, zero_phase(100), target)
            with_log = target == "lambda"
            j_values = (1, 2, 3)
            for j in j_values:
                want_count = 0
                by_box = {}
                for n in tab.window:
                    for tup, _w in brute_hb_tuples(n, j, z, with_log):
                        box = tuple((v - 1).bit_length() for v in tup)
                        by_box[box] = by_box.get(box, 0) + 1
                        want_count += 1
                comps = [c for c in hb.components if c.j == j]
                assert sum(c.count for c in comps) == want_count
                assert {c.box: c.count for c in comps} == by_box

    def test_validity_range_guard(self):
        tab = sieve_window(Window(1, 9))
        with pytest.raises(ConfigError):
            heath_brown_decompose(tab, zero_phase(1), "lambda")

    def test_budget_carries_partial(self):
        from eslab.errors import PartialResultError

        tab = sieve_window(Window(10**5, 50))
        with pytest.raises(PartialResultError) as exc:
            heath_brown_decompose(tab, zero_phase(10**5), "lambda", budget_leaves=100)
        assert exc.value.partial is not None
