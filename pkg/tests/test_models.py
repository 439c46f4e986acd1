import math

import numpy as np
import pytest

from curetail.errors import BadAlpha
from curetail.models import (
    FAMILIES,
    CureModel,
    incidence,
    susceptible_cdf,
    susceptible_pdf,
    susceptible_quantile,
    tail_index,
    tau_grid,
)

ALPHAS = np.linspace(0.01, 0.99, 99)


class TestIncidence:
    def test_midpoint(self):
        assert incidence(0.5, (0.4, 2.0)) == pytest.approx(math.exp(0.4) / (1 + math.exp(0.4)))
        assert incidence(0.5, (0.4, 2.0)) == pytest.approx(0.5987, abs=1e-4)

    def test_flat_slope(self):
        v = incidence(np.linspace(0, 1, 11), (0.3, 0.0))
        np.testing.assert_allclose(v, v[0], rtol=0, atol=0)

    def test_symmetric_zero(self):
        assert incidence(0.5, (0.0, 2.0)) == 0.5

    def test_open_unit_interval(self):
        v = incidence(np.linspace(-3, 3, 61))
        assert np.all((v > 0) & (v < 1))


def test_tail_index():
    assert tail_index(0.5) == 0.75
    assert tail_index(0.0) == 0.5


class TestQuantiles:
    def test_gpd(self):
        q = susceptible_quantile("gpd", 0.5, 0.95)
        assert q == pytest.approx((0.05 ** -0.75 - 1) / 0.75, rel=1e-14)
        assert q == pytest.approx(11.276, abs=1e-3)

    def test_frechet(self):
        q = susceptible_quantile("frechet", 0.5, 0.25)
        assert q == pytest.approx((-math.log(0.25)) ** -0.75, rel=1e-14)
        assert q == pytest.approx(0.7827, abs=1e-4)

    @pytest.mark.parametrize("family", FAMILIES + ("pareto",))
    @pytest.mark.parametrize("x", [0.0, 0.3, 0.5, 1.0])
    def test_round_trip_and_monotone(self, family, x):
        q = susceptible_quantile(family, x, ALPHAS)
        assert np.all(np.diff(q) > 0)
        np.testing.assert_allclose(susceptible_cdf(family, x, q), ALPHAS, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
    def test_bad_alpha(self, alpha):
        with pytest.raises(BadAlpha):
            susceptible_quantile("gpd", 0.5, alpha)

    @pytest.mark.parametrize("family", FAMILIES + ("pareto",))
    def test_pdf_is_derivative(self, family):
        t = susceptible_quantile(family, 0.4, np.linspace(0.05, 0.95, 19))
        step = 1e-6 * np.maximum(1.0, np.abs(t))
        fd = (susceptible_cdf(family, 0.4, t + step) - susceptible_cdf(family, 0.4, t - step)) / (2 * step)
        np.testing.assert_allclose(susceptible_pdf(family, 0.4, t), fd, rtol=1e-6)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            susceptible_cdf("weibull", 0.5, 1.0)


class TestTauGrid:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_endpoints(self, family):
        assert tau_grid(family, 0.5, 0.0) == susceptible_quantile(family, 0.5, 0.25)
        assert tau_grid(family, 0.5, 1.0) == pytest.approx(susceptible_quantile(family, 0.5, 0.95))
        assert tau_grid(family, 0.5, 0.0) > 0

    def test_gpd_lower(self):
        assert tau_grid("gpd", 0.5, 0.0) == pytest.approx(0.3211, abs=1e-4)

    def test_s_range(self):
        with pytest.raises(ValueError):
            tau_grid("gpd", 0.5, 1.2)


class TestCureModel:
    def test_censoring_atom(self):
        m = CureModel("frechet", 4.0, epsilon=0.1)
        assert m.censoring_cdf(4.0) == 1.0
        assert m.censoring_cdf_left(4.0) == pytest.approx(0.9)
        assert m.censoring_cdf(-1.0) == 0.0

    def test_observed_identity(self):
        m = CureModel("gpd", 3.0)
        t = np.linspace(0.1, 5, 30)
        lhs = 1 - m.observed_cdf(t, 0.4)
        rhs = (1 - m.cdf(t, 0.4)) * (1 - m.censoring_cdf(t))
        np.testing.assert_allclose(lhs, rhs)

    def test_uncensored_bounds(self):
        m = CureModel("gev", 3.0)
        for t in (0.5, 1.0, 2.9, 3.0, 6.0):
            hu = m.uncensored_cdf(t, 0.5)
            assert 0 <= hu <= m.observed_cdf(t, 0.5) + 1e-12
            assert hu <= m.cdf(t, 0.5) + 1e-12

    def test_gev_negative_support_mass(self):
        # location 1, scale 1: a sliver of mass lies below zero
        mass = susceptible_cdf("gev", 0.5, 0.0)
        assert 0 < mass < 0.002
