import mpmath
import numpy as np
import pytest
from scipy import stats

from parkwalk.errors import DomainError, SingularFitError
from parkwalk.normalize import (
    NormalizationParams,
    normalization_constant,
    normalized_visits,
    pearson,
    rankdata,
    spearman,
    standardize,
    loglog_slope,
)

ACRE_KM2 = 0.0040468564224


def cohort(rng, n=2506, sigma=0.5):
    area = np.exp(rng.normal(np.log(5.68 * ACRE_KM2), 1.0, n))
    pop = np.exp(rng.normal(np.log(2785), 0.7, n))
    visits = 3.0 * area ** 0.58 * pop ** 0.84 * np.exp(rng.normal(0, sigma, n))
    return area, pop, visits


class TestSlope:
    def test_exact_power_law(self):
        x = np.arange(1, 101, dtype=float)
        slope, icpt = loglog_slope(x, x ** 0.58)
        assert slope == pytest.approx(0.58, abs=1e-9)
        assert icpt == pytest.approx(0.0, abs=1e-9)

    def test_constant_x(self):
        with pytest.raises(SingularFitError):
            loglog_slope([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_non_positive(self):
        with pytest.raises(DomainError):
            loglog_slope([1.0, 0.0, 3.0], [1.0, 2.0, 3.0])

    def test_noisy_recovery(self, rng):
        area = np.exp(rng.normal(-3.7, 1.0, 2506))
        v = 50 * area ** 0.58 * np.exp(rng.normal(0, 0.5, 2506))
        assert loglog_slope(area, v)[0] == pytest.approx(0.58, abs=0.05)

    def test_matches_polyfit(self, rng):
        x = np.exp(rng.normal(size=50))
        y = np.exp(rng.normal(size=50))
        slope, icpt = loglog_slope(x, y)
        ps, pi = np.polyfit(np.log(x), np.log(y), 1)
        assert slope == pytest.approx(ps, rel=1e-10)
        assert icpt == pytest.approx(pi, rel=1e-10, abs=1e-12)

    def test_refit_recovers_both(self, rng):
        # independent area and population keep the marginal slopes unbiased
        params = NormalizationParams.refit(*cohort(rng))
        assert params.source == "refit"
        assert params.area_exponent == pytest.approx(0.58, abs=0.05)
        assert params.population_exponent == pytest.approx(0.84, abs=0.05)

    def test_refit_drops_zero_visits(self, rng):
        a, p, v = cohort(rng, n=200)
        v[:3] = 0.0
        with pytest.warns(UserWarning):
            NormalizationParams.refit(a, p, v)


class TestConstant:
    def test_identity(self):
        assert normalization_constant(1.0, 1.0) == 1.0

    def test_high_precision_oracle(self):
        mpmath.mp.dps = 50
        want = mpmath.power(mpmath.mpf("0.023"), mpmath.mpf("-0.58")) * mpmath.power(2785, mpmath.mpf("-0.84"))
        got = normalization_constant(0.023, 2785.0)
        assert got == pytest.approx(float(want), rel=1e-13)

    def test_population_doubling(self):
        r = normalization_constant(0.05, 4000.0) / normalization_constant(0.05, 2000.0)
        assert r == pytest.approx(2 ** -0.84, rel=1e-14)

    def test_custom_exponents(self):
        p = NormalizationParams(1.0, 1.0)
        assert normalization_constant(2.0, 5.0, p) == pytest.approx(0.1, rel=1e-15)

    def test_positive(self, rng):
        a, p, _ = cohort(rng, n=500)
        assert np.all(normalization_constant(a, p) > 0)


class TestNormalizedVisits:
    def test_product(self):
        p = NormalizationParams(0.0, 0.0)
        assert normalized_visits(1000.0, 1.0, 1.0, p) == 1000.0
        assert normalized_visits(1000.0, 1000.0, 1.0, NormalizationParams(1.0, 0.0)) == pytest.approx(1.0)

    def test_ratio_two(self):
        a = normalized_visits(np.array([2000.0, 1000.0]), 0.02, 3000.0)
        assert a[0] / a[1] == 2.0

    def test_constant_target(self):
        assert normalized_visits(999.0, 0.023, 2785.0, target="constant") == normalization_constant(0.023, 2785.0)

    def test_rank_preserved_under_global_rescale(self, rng):
        a, p, v = cohort(rng, n=300)
        t1 = normalized_visits(v, a, p)
        t2 = 7.3 * t1
        assert np.array_equal(np.argsort(t1, kind="stable"), np.argsort(t2, kind="stable"))

    def test_remains_lognormal(self, rng):
        a, p, v = cohort(rng)
        logs = np.log(normalized_visits(v, a, p))
        # the noise term is the only thing left, so logs are normal with sd ~ 0.5
        assert np.std(logs, ddof=1) == pytest.approx(0.5, abs=0.03)
        assert stats.shapiro(logs).pvalue > 0.01


class TestStandardize:
    def test_moments(self, rng):
        z = standardize(rng.normal(10, 3, 1000))
        assert abs(z.mean()) < 1e-12
        assert np.std(z, ddof=1) == pytest.approx(1.0, rel=1e-12)

    def test_hand(self):
        assert np.allclose(standardize([1.0, 2.0, 3.0]), [-1.0, 0.0, 1.0])

    def test_columns(self, rng):
        z = standardize(rng.normal(size=(50, 3)) * [1, 10, 100])
        assert np.allclose(z.std(axis=0, ddof=1), 1.0)

    def test_zero_variance(self):
        with pytest.raises(SingularFitError):
            standardize([4.0, 4.0, 4.0])


class TestCorrelation:
    def test_pearson_linear(self, rng):
        x = rng.normal(size=40)
        assert pearson(x, 3 * x + 1) == pytest.approx(1.0, abs=1e-12)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_pearson_vs_scipy(self, rng):
        x, y = rng.normal(size=(2, 100))
        assert pearson(x, y) == pytest.approx(stats.pearsonr(x, y).statistic, abs=1e-12)

    def test_spearman_monotone(self, rng):
        x = rng.normal(size=60)
        assert spearman(x, np.exp(x)) == pytest.approx(1.0, abs=1e-12)

    def test_rank_ties(self):
        assert np.array_equal(rankdata([10, 20, 20, 30]), [1.0, 2.5, 2.5, 4.0])

    def test_spearman_vs_scipy_with_ties(self, rng):
        x = rng.integers(0, 8, 200).astype(float)
        y = rng.integers(0, 8, 200).astype(float)
        assert spearman(x, y) == pytest.approx(stats.spearmanr(x, y).statistic, abs=1e-12)
        assert np.allclose(rankdata(x), stats.rankdata(x))

    def test_zero_variance(self):
        with pytest.raises(SingularFitError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
