import math

import numpy as np
import pytest

from combustion1d.model import FluidParams, ReactionRate


class TestFluidParams:
    def test_defaults_positive(self):
        p = FluidParams()
        assert min(p.a, p.mu, p.kappa, p.q, p.big_k, p.d) > 0

    @pytest.mark.parametrize("field", ["a", "mu", "kappa", "q", "big_k", "d"])
    def test_rejects_nonpositive(self, field):
        with pytest.raises(ValueError, match=field):
            FluidParams(**{field: -1.0})
        with pytest.raises(ValueError, match=field):
            FluidParams(**{field: 0.0})


class TestRawRate:
    def test_below_threshold_is_zero(self):
        rate = ReactionRate(alpha=1.0, act=1.0, theta_ign=1.2, eta=0.0)
        assert rate.phi(1.0) == 0.0

    def test_above_threshold_value(self):
        # 2 * exp(-1/2), evaluated directly from the law
        rate = ReactionRate(alpha=1.0, act=1.0, theta_ign=1.2, eta=0.0)
        assert rate.phi(2.0) == pytest.approx(1.2130613194252668, rel=1e-14)

    def test_exactly_at_threshold_is_zero(self):
        # the indicator is strict
        rate = ReactionRate(theta_ign=1.2)
        assert rate.phi(1.2) == 0.0

    def test_clamps_beyond_cap(self):
        rate = ReactionRate(theta_cap=4.0)
        assert rate.phi(17.0) == rate.phi(4.0)

    def test_vectorized_matches_scalar(self):
        rate = ReactionRate()
        thetas = np.linspace(0.0, 10.0, 77)
        vec = rate.phi(thetas)
        assert vec.shape == thetas.shape
        for th, val in zip(thetas, vec):
            assert rate.phi(float(th)) == val

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValueError):
            ReactionRate().phi(-0.5)

    @pytest.mark.parametrize("kwargs", [
        {"act": 0.0}, {"act": -1.0}, {"theta_ign": 0.0}, {"eta": -0.1},
        {"alpha": -0.5}, {"theta_cap": 1.0, "theta_ign": 1.2},
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            ReactionRate(**kwargs)


class TestRateSup:
    def test_raw_sup_at_cap(self):
        # theta * exp(-1/theta) increases, so the max sits at the cap:
        # 4 * exp(-1/4); cross-checked against a dense scan
        rate = ReactionRate(alpha=1.0, act=1.0, theta_ign=1.2, theta_cap=4.0)
        assert rate.sup() == pytest.approx(3.1152031322856196, rel=1e-12)
        scan = np.linspace(0.0, 4.0, 40001)
        assert rate.sup() == pytest.approx(float(rate.phi(scan).max()), rel=1e-8)

    def test_empty_active_region(self):
        rate = ReactionRate(theta_ign=1.2, theta_cap=1.2)
        assert rate.sup() == 0.0

    def test_mollified_never_exceeds_raw(self):
        raw = ReactionRate(theta_cap=4.0)
        for eta in (0.2, 0.1, 0.05):
            assert raw.mollify(eta).sup() <= raw.sup() + 1e-15


class TestMollify:
    def test_rejects_nonpositive_width(self):
        with pytest.raises(ValueError):
            ReactionRate().mollify(0.0)
        with pytest.raises(ValueError):
            ReactionRate().mollify(-0.1)

    def test_vanishes_below_support(self):
        # convolution support: zero up to theta_ign - eta
        rate = ReactionRate(theta_ign=1.2)
        for eta in (0.2, 0.05):
            smooth = rate.mollify(eta)
            thetas = np.linspace(0.0, 1.2 - eta, 50)
            assert np.all(smooth.phi(thetas) == 0.0)

    def test_table_sup_bounded_by_raw_sup(self):
        rate = ReactionRate(theta_cap=8.0)
        smooth = rate.mollify(0.1)
        assert float(smooth._table.max()) <= rate.sup() + 1e-15

    def test_converges_to_raw_away_from_jump(self):
        # quadrature refinement study: errors at fixed theta shrink with eta
        rate = ReactionRate(theta_ign=1.2)
        for theta in (0.8, 1.5, 2.0, 3.0):
            errs = [abs(rate.mollify(eta).phi(theta) - rate.phi(theta))
                    for eta in (0.1, 0.05, 0.025)]
            assert errs[0] < 0.05
            assert errs[2] <= errs[0] + 1e-15
            assert errs[2] < 0.01

    def test_smooths_the_jump_monotonically(self):
        rate = ReactionRate(theta_ign=1.2)
        smooth = rate.mollify(0.1)
        near = np.linspace(1.05, 1.35, 200)
        vals = smooth.phi(near)
        assert np.all(np.diff(vals) >= -1e-12)

    def test_deterministic_tables(self):
        a = ReactionRate(eta=0.05)
        b = ReactionRate(eta=0.05)
        assert np.array_equal(a._table, b._table)
        assert np.array_equal(a._grid, b._grid)


def test_phi_bounded_by_sup_everywhere():
    rng = np.random.default_rng(7)
    for rate in (ReactionRate(), ReactionRate(eta=0.08), ReactionRate(alpha=0.0),
                 ReactionRate(alpha=2.0, act=0.7, theta_ign=0.9, theta_cap=5.0)):
        thetas = rng.uniform(0.0, 12.0, 500)
        vals = rate.phi(thetas)
        assert np.all(vals >= 0.0)
        assert np.all(vals <= rate.sup() + 1e-14)
