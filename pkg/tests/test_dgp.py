import json
import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from ratioci.dgp import (
    Bernoulli,
    Decay,
    DgpSpec,
    Exponential,
    Family,
    Normal,
    Student,
    TranslatedPareto,
    TranslatedPoisson,
    draw_sample,
    marginal_quantile,
    true_ratio,
)

FAMILIES = {
    "gaussian_product": DgpSpec(Family.GAUSSIAN_PRODUCT, dict(mean_x=1.0, var_x=1.0, mean_y=0.75, var_y=1.0)),
    "bivariate_gaussian": DgpSpec(Family.BIVARIATE_GAUSSIAN, dict(mean_x=0.5, var_x=1.0, mean_y=0.1, var_y=2.0, corr=0.5)),
    "bernoulli_product": DgpSpec(Family.BERNOULLI_PRODUCT, dict(p_x=0.5, p_y=0.25)),
    "student_copula": DgpSpec(Family.STUDENT_COPULA, dict(mean_x=1.0, df_x=5.0, mean_y=0.5, df_y=6.0, corr=0.5)),
    "exponential_copula": DgpSpec(Family.EXPONENTIAL_COPULA, dict(mean_x=1.0, mean_y=0.5, corr=0.5)),
    "pareto_product": DgpSpec(
        Family.PARETO_PRODUCT, dict(mean_x=1.0, threshold_x=-1.5, shape_x=5.0, mean_y=0.5, threshold_y=-1.0, shape_y=6.0)
    ),
    "poisson_copula": DgpSpec(Family.POISSON_COPULA, dict(mean_x=0.5, var_x=2.0, mean_y=0.1, var_y=1.0, corr=0.5)),
    "discrete_product": DgpSpec(
        Family.DISCRETE_PRODUCT, dict(x_atoms=[[-1.0, 0.5], [2.0, 0.5]], y_atoms=[[0.0, 0.2], [1.0, 0.8]])
    ),
    "adversarial_ref": DgpSpec(
        Family.ADVERSARIAL_REF, dict(construction="bc_zero_denominator", l_y=1.0, u_x=1.0, u_y=2.0, xi=0.5)
    ),
}


class TestDraws:
    def test_gaussian_product_mean(self):
        n = 10**5
        s = draw_sample(FAMILIES["gaussian_product"], n, 1)
        assert abs(s.ys.mean() - 0.75) <= 4 * math.sqrt(1 / n)

    def test_bernoulli_support(self):
        s = draw_sample(FAMILIES["bernoulli_product"], 1000, 2)
        assert set(np.unique(s.ys)) <= {0.0, 1.0}
        assert set(np.unique(s.xs)) <= {0.0, 1.0}

    def test_pareto_mean(self):
        m = TranslatedPareto(1.0, -1.5, 5.0)
        spec = DgpSpec(
            Family.PARETO_PRODUCT, dict(mean_x=1.0, threshold_x=-1.5, shape_x=5.0, mean_y=1.0, threshold_y=-1.5, shape_y=5.0)
        )
        n = 10**6
        s = draw_sample(spec, n, 3)
        se = math.sqrt(m.variance() / n)
        assert abs(s.xs.mean() - 1.0) <= 4 * se
        assert abs(s.ys.mean() - 1.0) <= 4 * se
        assert s.xs.min() > -1.5

    def test_pareto_translation(self):
        # Scale t = (E - threshold)(shape - 1); shift keeps the mean at E and the support above the threshold.
        m = TranslatedPareto(1.0, -1.5, 5.0)
        assert m.scale == pytest.approx(10.0)
        assert m.shift == pytest.approx(-11.5)
        assert m.shift + m.scale == pytest.approx(-1.5)

    def test_poisson_translation(self):
        s = draw_sample(FAMILIES["poisson_copula"], 2000, 4)
        shifts = s.ys - (0.1 - 1.0)
        assert np.allclose(shifts, np.round(shifts))
        assert shifts.min() >= 0

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_determinism(self, name):
        a = draw_sample(FAMILIES[name], 500, 77)
        b = draw_sample(FAMILIES[name], 500, 77)
        c = draw_sample(FAMILIES[name], 500, 78)
        assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)
        assert not (np.array_equal(a.xs, c.xs) and np.array_equal(a.ys, c.ys))

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_moment_audit(self, name):
        spec = FAMILIES[name]
        n = 10**6
        s = draw_sample(spec, n, 2024)
        tr = true_ratio(spec, n)
        for arr, mean, var in ((s.xs, tr.e_x, tr.v_x), (s.ys, tr.e_y, tr.v_y)):
            assert abs(arr.mean() - mean) <= 5 * math.sqrt(var / n)
            centred = arr - arr.mean()
            mu4 = float(np.mean(centred**4))
            se_var = math.sqrt(max(mu4 - var**2, 1e-300) / n)
            assert abs(centred.var() - var) <= 5 * se_var

    def test_copula_rank_correlation_monotone(self):
        rhos = []
        for corr in (-0.5, 0.0, 0.5):
            spec = DgpSpec(Family.EXPONENTIAL_COPULA, dict(mean_x=1.0, mean_y=2.0, corr=corr))
            s = draw_sample(spec, 50_000, 5)
            rhos.append(stats.spearmanr(s.xs, s.ys).statistic)
        assert rhos[0] < rhos[1] < rhos[2]
        # Spearman of a Gaussian copula: (6/pi) asin(rho/2).
        assert rhos[2] == pytest.approx(6 / math.pi * math.asin(0.25), abs=0.02)

    def test_adversarial_zero_denominator_rate(self):
        spec = FAMILIES["adversarial_ref"]
        s = draw_sample(spec, 200_000, 6)
        assert float(np.mean(s.ys == 0.0)) == pytest.approx(0.25, abs=0.005)


class TestTrueRatio:
    def test_gaussian(self):
        spec = DgpSpec(Family.GAUSSIAN_PRODUCT, dict(mean_x=1.0, var_x=1.0, mean_y=0.1, var_y=1.0))
        assert true_ratio(spec, 10).theta == pytest.approx(10.0)

    def test_decay(self):
        spec = DgpSpec(Family.GAUSSIAN_PRODUCT, dict(mean_x=1.0, var_x=1.0, var_y=1.0), decay=Decay(0.025, 0.5))
        tr = true_ratio(spec, 400)
        assert tr.e_y == pytest.approx(0.00125)
        assert tr.theta == pytest.approx(1.0 / 0.00125)

    def test_bernoulli(self):
        tr = true_ratio(DgpSpec(Family.BERNOULLI_PRODUCT, dict(p_x=0.3, p_y=0.2)), 5)
        assert (tr.e_y, tr.v_y) == pytest.approx((0.2, 0.16))
        assert tr.cov == 0.0 and tr.cov_exact

    def test_bivariate_cov(self):
        tr = true_ratio(FAMILIES["bivariate_gaussian"], 5)
        assert tr.cov == pytest.approx(0.5 * math.sqrt(2.0)) and tr.cov_exact

    def test_copula_cov_is_flagged_and_close(self):
        spec = FAMILIES["exponential_copula"]
        tr = true_ratio(spec, 5)
        assert not tr.cov_exact
        s = draw_sample(spec, 10**6, 99)
        assert np.cov(s.xs, s.ys, bias=True)[0, 1] == pytest.approx(tr.cov, abs=0.01)
        assert true_ratio(spec, 5) == tr

    def test_decayed_bernoulli(self):
        spec = DgpSpec(Family.BERNOULLI_PRODUCT, dict(p_x=0.5), decay=Decay(0.5, 0.5))
        assert true_ratio(spec, 100).e_y == pytest.approx(0.05)


class TestQuantiles:
    def test_exponential(self):
        assert marginal_quantile(Exponential(1.0), 1 - math.exp(-1)) == pytest.approx(1.0, abs=1e-12)

    def test_student_median(self):
        assert marginal_quantile(Student(0.0, 3.0), 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_normal_scalar_path(self):
        assert marginal_quantile(Normal(1.0, 4.0), 0.975) == pytest.approx(1 + 2 * 1.959963984540054, abs=1e-9)

    @pytest.mark.parametrize("df", [2.5, 3.0, 5.0, 30.0])
    @pytest.mark.parametrize("p", [1e-6, 0.01, 0.3, 0.5, 0.8, 0.999])
    def test_student_against_high_precision_cdf(self, df, p):
        q = float(marginal_quantile(Student(0.0, df), p))
        mpmath.mp.dps = 30
        nu = mpmath.mpf(df)
        x = mpmath.mpf(q)
        # t CDF through the regularised incomplete beta function.
        tail = mpmath.betainc(nu / 2, mpmath.mpf(1) / 2, 0, nu / (nu + x * x), regularized=True) / 2
        cdf = 1 - tail if x > 0 else tail
        dens = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2)) * (1 + x * x / nu) ** (-(nu + 1) / 2)
        assert abs(float((cdf - p) / dens)) <= 1e-8

    @pytest.mark.parametrize("p", [1e-9, 0.1, 0.5, 0.9, 1 - 1e-9])
    def test_pareto_inverts_cdf(self, p):
        m = TranslatedPareto(0.5, -1.0, 6.0)
        q = float(marginal_quantile(m, p))
        cdf = 1 - (m.scale / (q - m.shift)) ** m.shape
        assert cdf == pytest.approx(p, abs=1e-12)

    def test_poisson_round_trip(self):
        m = TranslatedPoisson(0.0, 2.0)
        for k in range(11):
            p = m.cdf(k)
            assert marginal_quantile(m, p) == k + (0.0 - 2.0)
            assert p == pytest.approx(stats.poisson.cdf(k, 2.0), rel=1e-13)
        assert marginal_quantile(m, m.cdf(3) + 1e-12) == 4 - 2.0

    def test_bernoulli_quantile(self):
        assert marginal_quantile(Bernoulli(0.25), 0.7) == 0.0
        assert marginal_quantile(Bernoulli(0.25), 0.8) == 1.0

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.2])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            marginal_quantile(Exponential(1.0), p)


class TestValidation:
    @pytest.mark.parametrize(
        "family,params",
        [
            (Family.STUDENT_COPULA, dict(mean_x=0, df_x=2.0, mean_y=1, df_y=5)),
            (Family.PARETO_PRODUCT, dict(mean_x=1, threshold_x=0, shape_x=2.0, mean_y=1, threshold_y=0, shape_y=3)),
            (Family.PARETO_PRODUCT, dict(mean_x=1, threshold_x=2, shape_x=3.0, mean_y=1, threshold_y=0, shape_y=3)),
            (Family.BERNOULLI_PRODUCT, dict(p_x=0.5, p_y=1.0)),
            (Family.BERNOULLI_PRODUCT, dict(p_x=0.0, p_y=0.5)),
            (Family.BIVARIATE_GAUSSIAN, dict(mean_x=0, var_x=1, mean_y=1, var_y=1, corr=1.0)),
            (Family.EXPONENTIAL_COPULA, dict(mean_x=1, mean_y=1, corr=-1.0)),
            (Family.GAUSSIAN_PRODUCT, dict(mean_x=0, var_x=1)),
            (Family.ADVERSARIAL_REF, dict(construction="nope")),
        ],
    )
    def test_rejects_invalid(self, family, params):
        with pytest.raises(ValueError):
            DgpSpec(family, params)

    def test_decay_validation(self):
        with pytest.raises(ValueError):
            Decay(0.1, -0.5)
        with pytest.raises(ValueError):
            DgpSpec(Family.DISCRETE_PRODUCT, dict(x_atoms=[[1.0, 1.0]], y_atoms=[[1.0, 1.0]]), decay=Decay(1.0, 0.5))

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_json_round_trip(self, name):
        spec = FAMILIES[name]
        again = DgpSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again == spec and again.label() == spec.label()

    def test_decay_round_trip(self):
        spec = DgpSpec(Family.GAUSSIAN_PRODUCT, dict(mean_x=1.0, var_x=1.0, var_y=1.0), decay=Decay(0.1, 0.25))
        d = spec.to_dict()
        assert d["decay"] == {"C": 0.1, "b": 0.25}
        assert DgpSpec.from_dict(d) == spec
