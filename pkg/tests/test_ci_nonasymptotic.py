import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratioci.ci_nonasymptotic import (
    INFEASIBLE,
    Method,
    bc_alpha_bar,
    bc_easy_halfwidth,
    bc_general_halfwidth,
    build_nonasymptotic_ci,
    halfwidth,
    hoeff_alpha_bar,
    hoeff_easy_halfwidth,
    hoeff_gammas,
    hoeff_general_halfwidth,
)
from ratioci.core import MomentBounds, PairedSample, SupportBounds
from ratioci.diagnostics import n_bar_bc, n_bar_hoeff

MB_REF = [
    MomentBounds(1.0, 1.0, 1.5, a_y=0.5),
    MomentBounds(0.25, 2.0, 1.0625, a_y=0.1),
    MomentBounds(0.1, 1.0, 2.01, a_y=0.05),
]
SB_REF = [
    SupportBounds(0.0, 1.0, 0.0, 1.0, 0.25),
    SupportBounds(-1.0, 2.0, 0.5, 3.0, 1.0),
    SupportBounds(-5.0, 5.0, 0.1, 1.0, 0.4),
]
ALPHAS = [0.01, 0.05, 0.1, 0.2, 0.5]
NS = [10, 50, 200, 1000, 10_000, 100_000]


class TestBcEasy:
    def test_reference_value(self):
        assert bc_easy_halfwidth(100, 0.25, MomentBounds(1.0, 1.0, 1.0), 1.0) == pytest.approx(0.44, rel=1e-12)

    def test_degenerate_class_vanishes(self):
        # K = u_x + u_y - l_y**2 -> 0 as u_x -> 0 with u_y = l_y**2.
        assert bc_easy_halfwidth(10, 0.1, MomentBounds(1.0, 1e-30, 1.0), 1.0) < 1e-13

    def test_requires_positive_a_y(self):
        with pytest.raises(ValueError):
            bc_easy_halfwidth(10, 0.1, MomentBounds(1.0, 1.0, 1.0), 0.0)

    def test_quadrupling_n(self):
        mb = MomentBounds(1.0, 1.0, 1.0)
        assert bc_easy_halfwidth(400, 0.25, mb, 1.0) < bc_easy_halfwidth(100, 0.25, mb, 1.0)


class TestBcGeneral:
    def test_reference_value(self):
        assert bc_general_halfwidth(100, 0.02, MomentBounds(1.0, 1.0, 1.0)) == pytest.approx(1.0, rel=1e-12)

    def test_infeasible_below_alpha_bar(self):
        mb = MomentBounds(0.25, 1.0, 1.0625)
        a_bar = bc_alpha_bar(1000, mb)
        assert a_bar == pytest.approx(0.032)
        assert bc_general_halfwidth(1000, a_bar / 2, mb) == INFEASIBLE
        assert bc_general_halfwidth(1000, a_bar, mb) == INFEASIBLE

    def test_pole_at_alpha_bar(self):
        mb = MomentBounds(0.25, 1.0, 1.0625)
        a_bar = bc_alpha_bar(1000, mb)
        widths = [bc_general_halfwidth(1000, a_bar * (1 + eps), mb) for eps in (1e-1, 1e-3, 1e-6)]
        assert widths[0] < widths[1] < widths[2]
        assert widths[2] > 1e6

    def test_golden_against_easy(self):
        mb = MomentBounds(1.0, 2.0, 1.5)
        n, alpha = 200, 0.1
        K = 2.0 + 1.5 - 1.0
        r = math.sqrt(K / (n * alpha))
        easy = r * (1 + (r + math.sqrt(2.0)) / 1.0)
        eps = math.sqrt(2 * 2.0 / (n * alpha))
        eps_t = math.sqrt(2 * 0.5 / (n * alpha))
        general = (math.sqrt(2.0) + eps) * eps_t / (1 - eps_t) ** 2 + eps
        assert bc_easy_halfwidth(n, alpha, mb, 1.0) == pytest.approx(easy, rel=1e-12)
        assert bc_general_halfwidth(n, alpha, mb) == pytest.approx(general, rel=1e-12)
        assert easy == pytest.approx(0.978553, abs=1e-6)
        assert general == pytest.approx(1.137720, abs=1e-6)


class TestHoeffding:
    def test_easy_reference_value(self):
        sb = SupportBounds(0.0, 1.0, 1.0, 2.0, 1.0)
        alpha = 4 / math.e**2
        r = 1 / math.sqrt(200)
        assert hoeff_easy_halfwidth(200, alpha, sb) == pytest.approx(r * (1 + (1 + r)), rel=1e-12)

    def test_easy_requires_positive_lower_support(self):
        with pytest.raises(ValueError):
            hoeff_easy_halfwidth(100, 0.1, SupportBounds(0.0, 1.0, 0.0, 1.0, 0.5))

    def test_easy_doubling_ranges_doubles_radical(self):
        a = SupportBounds(0.0, 1.0, 1.0, 2.0, 1.0)
        b = SupportBounds(0.0, 2.0, 1.0, 3.0, 1.0)
        L = math.log(4 / 0.1)
        ra = math.sqrt(1 * L / (2 * 100))
        rb = math.sqrt(4 * L / (2 * 100))
        assert rb == pytest.approx(2 * ra)
        assert hoeff_easy_halfwidth(100, 0.1, a) == pytest.approx(ra * (1 + (1 + ra)))
        assert hoeff_easy_halfwidth(100, 0.1, b) == pytest.approx(rb * (1 + (2 + rb)))

    def test_easy_positive_near_level_zero(self):
        sb = SupportBounds(0.0, 1.0, 1.0, 2.0, 1.0)
        assert hoeff_easy_halfwidth(100, 1 - 1e-12, sb) > 0

    def test_general_feasibility_threshold(self):
        sb = SupportBounds(0.0, 1.0, 0.0, 1.0, 0.25)
        assert hoeff_gammas(sb)[1] == pytest.approx(0.125)
        assert n_bar_hoeff(0.05, sb) == pytest.approx(math.log(80) / 0.125)
        assert hoeff_general_halfwidth(35, 0.05, sb) == INFEASIBLE
        assert math.isfinite(hoeff_general_halfwidth(36, 0.05, sb))

    def test_general_formula(self):
        sb = SupportBounds(-1.0, 2.0, 0.5, 3.0, 1.0)
        n, alpha = 500, 0.1
        L = math.log(4 / alpha)
        gx, gy = 2 / 9, 2 / 6.25
        expected = math.sqrt(L / (n * min(gx, gy))) * (
            (2 + math.sqrt(L / (n * gx))) / (1 - math.sqrt(L / (n * gy))) ** 2 + 1
        )
        assert hoeff_general_halfwidth(n, alpha, sb) == pytest.approx(expected, rel=1e-12)

    def test_general_pole(self):
        sb = SupportBounds(0.0, 1.0, 0.0, 1.0, 0.25)
        a_bar = hoeff_alpha_bar(100, sb)
        assert a_bar == pytest.approx(4 * math.exp(-100 * 0.125))
        w = [hoeff_general_halfwidth(100, a_bar * (1 + e), sb) for e in (1e-1, 1e-4, 1e-8)]
        assert w[0] < w[1] < w[2] and w[2] > 1e6


class TestProperties:
    @pytest.mark.parametrize("method", [Method.BC_EASY, Method.BC_GENERAL])
    @pytest.mark.parametrize("mb", MB_REF)
    def test_bc_monotone_grid(self, method, mb):
        self._check_monotone(method, mb)

    @pytest.mark.parametrize(
        "method,sb",
        # The easy interval needs a positive lower support for Y.
        [(Method.HOEFF_GENERAL, sb) for sb in SB_REF] + [(Method.HOEFF_EASY, sb) for sb in SB_REF if sb.a_y > 0],
    )
    def test_hoeff_monotone_grid(self, method, sb):
        self._check_monotone(method, sb)

    @staticmethod
    def _check_monotone(method, bounds):
        grid = np.array([[halfwidth(method, n, a, bounds) for a in ALPHAS] for n in NS])
        for i in range(len(NS) - 1):
            for j in range(len(ALPHAS)):
                if math.isfinite(grid[i, j]):
                    assert grid[i + 1, j] < grid[i, j]
        for i in range(len(NS)):
            for j in range(len(ALPHAS) - 1):
                if math.isfinite(grid[i, j]):
                    assert grid[i, j + 1] < grid[i, j]

    @pytest.mark.parametrize("method,bounds", [(Method.BC_EASY, b) for b in MB_REF] + [(Method.BC_GENERAL, b) for b in MB_REF]
                             + [(Method.HOEFF_EASY, SB_REF[1]), (Method.HOEFF_GENERAL, SB_REF[0]), (Method.HOEFF_GENERAL, SB_REF[2])])
    def test_root_n_rate(self, method, bounds):
        # The rate is asymptotic: start well past the feasibility floor of the class.
        if isinstance(bounds, MomentBounds):
            floor = n_bar_bc(0.1, bounds)
        else:
            floor = n_bar_hoeff(0.1, bounds)
        start = max(10_000, int(1000 * floor))
        for n in (start, 10 * start, 100 * start):
            ratio = halfwidth(method, 4 * n, 0.1, bounds) / halfwidth(method, n, 0.1, bounds)
            assert 0.45 < ratio < 0.55

    @given(st.integers(1, 10**6), st.floats(0.01, 1.0), st.floats(1.0001, 50.0))
    def test_feasibility_duality(self, n, l_y, ratio):
        mb = MomentBounds(l_y, 1.0, l_y**2 * ratio)
        a_bar = bc_alpha_bar(n, mb)
        assert n_bar_bc(a_bar, mb) == pytest.approx(n, rel=1e-12)
        for alpha in (0.01, 0.1, 0.5):
            feasible = math.isfinite(bc_general_halfwidth(n, alpha, mb))
            assert feasible == (alpha > a_bar)
            if abs(n - n_bar_bc(alpha, mb)) > 1e-9 * n:
                assert feasible == (n > n_bar_bc(alpha, mb))


class TestBuild:
    def test_assembly(self):
        s = PairedSample([2.0] * 100, [1.0] * 100)
        ci = build_nonasymptotic_ci(s, 0.02, Method.BC_GENERAL, MomentBounds(1.0, 1.0, 1.0))
        assert ci.feasible and ci.half_width == pytest.approx(1.0)
        assert ci.interval.lo == pytest.approx(1.0) and ci.interval.hi == pytest.approx(3.0)

    def test_zero_denominator(self):
        s = PairedSample([1.0, 1.0], [1.0, -1.0])
        ci = build_nonasymptotic_ci(s, 0.5, Method.HOEFF_EASY, SupportBounds(0.0, 1.0, 0.5, 1.0, 0.5))
        assert ci.feasible and not ci.interval.defined

    def test_infeasible_marker(self):
        s = PairedSample([1.0] * 10, [1.0] * 10)
        ci = build_nonasymptotic_ci(s, 0.01, Method.BC_GENERAL, MomentBounds(0.25, 1.0, 1.0625))
        assert not ci.feasible and ci.half_width == INFEASIBLE and not ci.interval.defined

    def test_mismatched_bounds(self):
        s = PairedSample([1.0], [1.0])
        with pytest.raises(TypeError):
            build_nonasymptotic_ci(s, 0.1, Method.BC_GENERAL, SupportBounds(0.0, 1.0, 0.0, 1.0, 0.5))
        with pytest.raises(TypeError):
            build_nonasymptotic_ci(s, 0.1, Method.HOEFF_GENERAL, MomentBounds(1.0, 1.0, 1.0))

    def test_easy_needs_a_y(self):
        with pytest.raises(ValueError):
            halfwidth(Method.BC_EASY, 10, 0.1, MomentBounds(1.0, 1.0, 1.0))

    def test_easy_and_general_both_defined(self):
        rng = np.random.default_rng(0)
        s = PairedSample(rng.standard_normal(500), 1 + rng.random(500))
        mb = MomentBounds(1.0, 1.0, 2.5, a_y=1.0)
        e = build_nonasymptotic_ci(s, 0.1, Method.BC_EASY, mb)
        g = build_nonasymptotic_ci(s, 0.1, Method.BC_GENERAL, mb)
        assert e.interval.defined and g.interval.defined
        assert e.half_width == pytest.approx(bc_easy_halfwidth(500, 0.1, mb, 1.0))
        assert g.half_width == pytest.approx(bc_general_halfwidth(500, 0.1, mb))

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ValueError):
            bc_general_halfwidth(10, alpha, MomentBounds(1.0, 1.0, 1.0))
