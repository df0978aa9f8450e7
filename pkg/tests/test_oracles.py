"""Transfer matrices, fill-in sampler, window enumeration, blocking shares."""
import math
from fractions import Fraction

import numpy as np
import pytest

from hardcore_entropy import bounds
from hardcore_entropy.lattices import LatticeKind, verify_hard_core
from hardcore_entropy.oracles import (
    REFERENCE_CONSTANTS,
    StripSpec,
    blocking_constant_lower,
    blocking_constant_upper,
    blocking_share_per_odd_site,
    density_upper_from_blocking,
    entropy_1d,
    fill_in_sample,
    influence_window,
    legal_columns,
    stage_unforced_analytic,
    strip_entropy,
    window_probability_exhaustive,
)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


class TestOneDimensional:
    def test_value(self):
        assert entropy_1d() == pytest.approx(0.4812118250596, abs=1e-12)
        assert entropy_1d() == pytest.approx(math.log(GOLDEN_RATIO), abs=1e-14)

    def test_eigenvalue_is_golden_ratio(self):
        assert math.exp(entropy_1d()) == pytest.approx(GOLDEN_RATIO, abs=1e-14)

    def test_width_one_strip_coincides(self):
        assert strip_entropy(1) == pytest.approx(entropy_1d(), abs=1e-12)


class TestStrips:
    def test_legal_column_counts_are_fibonacci(self):
        fib = [1, 2, 3, 5, 8, 13, 21, 34]
        for w, f in zip(range(1, 7), fib[1:]):
            assert len(legal_columns(w)) == f

    def test_width_two_free(self):
        # 3 legal columns (00, 01, 10); dominant eigenvalue 1 + sqrt(2)
        assert strip_entropy(2) == pytest.approx(math.log(1 + math.sqrt(2)) / 2,
                                                 abs=1e-12)

    def test_width_twelve_free(self):
        h = strip_entropy(12)
        assert h == pytest.approx(0.4130830372, abs=1e-9)

    def test_width_fourteen_free(self):
        assert strip_entropy(14) == pytest.approx(0.4122847607, abs=1e-9)

    def test_width_twelve_periodic(self):
        h = strip_entropy(StripSpec(12, "periodic"))
        assert h == pytest.approx(0.4074963771, abs=1e-9)
        assert abs(h - REFERENCE_CONSTANTS[LatticeKind.SQUARE].entropy) < 3e-3

    def test_monotone_decreasing_in_width(self):
        hs = [strip_entropy(w) for w in range(1, 13)]
        assert all(a >= b - 1e-12 for a, b in zip(hs, hs[1:]))
        assert all(h > 0.4075 - 1e-3 for h in hs)

    def test_periodic_below_free(self):
        for w in (8, 12):
            assert strip_entropy(StripSpec(w, "periodic")) < strip_entropy(w)

    def test_closed_form_bounds_below_strip(self):
        ceiling = strip_entropy(12)
        for p in np.linspace(0.01, 0.6, 8):
            assert bounds.bound_bipartite(float(p), 4).value < ceiling

    def test_width_validation(self):
        for w in (0, 15, -3):
            with pytest.raises(ValueError, match="width"):
                StripSpec(w)
        with pytest.raises(ValueError, match="boundary"):
            StripSpec(4, "helical")


class TestWindows:
    def test_window_sizes(self):
        sizes = {
            (LatticeKind.SQUARE, 1): 4,
            (LatticeKind.HONEYCOMB, 1): 3,
            (LatticeKind.TRIANGULAR, 1): 3,
            (LatticeKind.TRIANGULAR, 2): 9,
            (LatticeKind.KAGOME, 2): 6,
            (LatticeKind.SQUARE_MOORE, 3): 16,
        }
        for (kind, stage), want in sizes.items():
            _, window = influence_window(kind, stage)
            assert len(window) == want, (kind, stage)

    @pytest.mark.parametrize("kind", [LatticeKind.TRIANGULAR,
                                      LatticeKind.KAGOME,
                                      LatticeKind.SQUARE_MOORE])
    def test_matches_closed_forms_at_random_points(self, kind):
        rng = np.random.default_rng(2026)
        for _ in range(5):
            p, q, r = rng.uniform(0.05, 0.45, 3)
            s = 1 - (1 - p) * q
            if kind is LatticeKind.TRIANGULAR:
                got = window_probability_exhaustive(kind, (p, q), 2)
                want = (1 - p) ** 3 * s ** 3
            elif kind is LatticeKind.KAGOME:
                got = window_probability_exhaustive(kind, (p, q), 2)
                want = (1 - p) ** 2 * s ** 2
            else:
                got = window_probability_exhaustive(kind, (p, q, r), 3)
                want = (1 - p) ** 4 * (1 - q) ** 2 * (1 - s ** 2 * r) ** 2
            assert got == pytest.approx(want, abs=1e-12)

    def test_square_and_honeycomb_single_stage(self):
        p = 0.1702
        got = window_probability_exhaustive(LatticeKind.SQUARE, (p,), 1)
        assert got == pytest.approx((1 - p) ** 4, abs=1e-14)
        got = window_probability_exhaustive(LatticeKind.HONEYCOMB, (0.2284,), 1)
        assert got == pytest.approx((1 - 0.2284) ** 3, abs=1e-14)

    def test_moore_middle_stage(self):
        p, q, r = 0.1189, 0.1623, 0.2628
        got = window_probability_exhaustive(LatticeKind.SQUARE_MOORE,
                                            (p, q, r), 2)
        s = 1 - (1 - p) * q
        assert got == pytest.approx((1 - p) ** 2 * s ** 4, abs=1e-12)

    def test_unclosed_window_rejected(self):
        # the dots around a triangular stage-2 site need their circles
        target, window = influence_window(LatticeKind.TRIANGULAR, 2)
        circles = [s for s in window if (s[0] - s[1]) % 3 == 0]
        partial = [s for s in window if s not in circles[:2]]
        with pytest.raises(ValueError, match="dependency-closed"):
            window_probability_exhaustive(LatticeKind.TRIANGULAR,
                                          (0.1, 0.2), 2, window=partial)

    def test_oversized_window_rejected(self):
        fake = [(i, 0) for i in range(25)]
        with pytest.raises(ValueError, match="cap"):
            window_probability_exhaustive(LatticeKind.SQUARE, (0.1,), 1,
                                          window=fake)

    def test_stage_bounds_checked(self):
        with pytest.raises(ValueError, match="stage"):
            influence_window(LatticeKind.SQUARE, 2)
        with pytest.raises(ValueError, match="stage"):
            influence_window(LatticeKind.SQUARE, 0)


class TestSampler:
    CASES = [
        (LatticeKind.SQUARE, (0.1702,), (128, 128)),
        (LatticeKind.HONEYCOMB, (0.2284,), (96, 96)),
        (LatticeKind.TRIANGULAR, (0.1457, 0.2501), (96, 96)),
        (LatticeKind.KAGOME, (0.1944, 0.3002), (96, 96)),
        (LatticeKind.SQUARE_MOORE, (0.1189, 0.1623, 0.2628), (128, 128)),
    ]

    @pytest.mark.parametrize("kind,params,dims", CASES,
                             ids=[c[0].value for c in CASES])
    def test_hard_core_and_stats(self, kind, params, dims):
        config, stats = fill_in_sample(kind, params, dims, seed=7)
        assert verify_hard_core(config)
        assert len(stats) == len(params) + 1
        assert stats[0].unforced_empirical == 1.0
        for st in stats:
            assert st.n_sites > 0
            assert 0 <= st.density_empirical <= 1
            if st.unforced_stderr:
                sig = abs(st.unforced_empirical - st.unforced_analytic)
                assert sig < 5 * st.unforced_stderr
            sig = abs(st.density_empirical - st.density_analytic)
            assert sig < 5 * max(st.density_stderr, 1e-9)

    def test_deterministic_per_seed(self):
        a, _ = fill_in_sample(LatticeKind.SQUARE, (0.2,), (64, 64), seed=3)
        b, _ = fill_in_sample(LatticeKind.SQUARE, (0.2,), (64, 64), seed=3)
        c, _ = fill_in_sample(LatticeKind.SQUARE, (0.2,), (64, 64), seed=4)
        np.testing.assert_array_equal(a.values, b.values)
        assert (a.values != c.values).any()

    def test_explicit_final_stage_probability(self):
        # equalized variant: final stage gets its own parameter, not 1/2
        config, stats = fill_in_sample(LatticeKind.SQUARE, (0.2015, 0.4423),
                                       (128, 128), seed=11)
        assert verify_hard_core(config)
        assert stats[1].probability == 0.4423
        assert stats[1].density_analytic == pytest.approx(
            0.4423 * (1 - 0.2015) ** 4)

    def test_arity_checked(self):
        with pytest.raises(ValueError, match="stage probabilities"):
            fill_in_sample(LatticeKind.TRIANGULAR, (0.1,), (12, 12), seed=0)
        with pytest.raises(ValueError, match="outside"):
            fill_in_sample(LatticeKind.SQUARE, (1.2,), (12, 12), seed=0)

    def test_stats_rows_schema(self):
        _, stats = fill_in_sample(LatticeKind.SQUARE, (0.2,), (32, 32), seed=0)
        rows = [r for st in stats for r in st.rows()]
        assert len(rows) == 4
        for row in rows:
            assert {"stage", "metric", "analytic", "empirical", "stderr",
                    "n_sites"} <= set(row)

    def test_analytic_fractions_known_points(self):
        p = 0.1702
        assert stage_unforced_analytic(LatticeKind.SQUARE, (p,)) == \
            pytest.approx((1.0, (1 - p) ** 4))
        p, q = 0.1457, 0.2501
        frac = stage_unforced_analytic(LatticeKind.TRIANGULAR, (p, q))
        assert frac[2] == pytest.approx(0.3032, abs=5e-4)


class TestBlockingConstants:
    def test_lower_is_exact(self):
        assert blocking_constant_lower() == Fraction(15, 8)

    def test_per_odd_share(self):
        assert blocking_share_per_odd_site() == Fraction(15, 32)
        # E[1/(1+Binomial(3,1/2))] by direct expectation
        want = Fraction(1, 8) * (1 + Fraction(3, 2) + 1 + Fraction(1, 4))
        assert blocking_share_per_odd_site() == want

    def test_density_upper(self):
        assert density_upper_from_blocking() == Fraction(8, 31)
        assert density_upper_from_blocking(Fraction(2)) == Fraction(1, 4)

    def test_upper_constant_and_density(self):
        c_max, rho_min = blocking_constant_upper(0.4075)
        assert c_max == pytest.approx(2.6801, abs=1e-3)
        assert rho_min == pytest.approx(0.21367, abs=1e-4)
        assert rho_min == pytest.approx(1 / (2 + c_max), abs=1e-12)

    def test_interval_ordering(self):
        _, rho_min = blocking_constant_upper(0.4075)
        assert rho_min < float(density_upper_from_blocking())

    def test_h_ref_validation(self):
        with pytest.raises(ValueError, match="outside"):
            blocking_constant_upper(0.8)
        with pytest.raises(ValueError, match="no root"):
            blocking_constant_upper(0.05)


class TestReferenceConstants:
    def test_values(self):
        assert REFERENCE_CONSTANTS[LatticeKind.SQUARE].entropy == 0.4075
        assert REFERENCE_CONSTANTS[LatticeKind.SQUARE].density == 0.2266
        assert REFERENCE_CONSTANTS[LatticeKind.HONEYCOMB].entropy == 0.4360
        assert REFERENCE_CONSTANTS[LatticeKind.TRIANGULAR].density == 0.1624
