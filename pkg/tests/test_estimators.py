import numpy as np
import pytest

from frictionfusion.estimators import (
    DRY,
    SNOW_ICE,
    WET,
    Configuration,
    FrictionProfile,
    LocalEstimator,
    build_estimate,
    classify,
    emulate,
    local_estimate,
    resolve_error,
)
from frictionfusion.fusion import SGrid
from helpers import random_profile

TURN_PROFILE = FrictionProfile(((-1e6, 0.8), (0.0, 0.4)))
HIGH_MU_PROFILE = FrictionProfile(((-1e6, 1.0),))


class TestFrictionProfile:
    def test_lookup_picks_containing_segment(self):
        assert TURN_PROFILE.mu_at(-0.001) == 0.8
        assert TURN_PROFILE.mu_at(0.0) == 0.4
        assert TURN_PROFILE.mu_at(25.0) == 0.4

    def test_below_domain_rejected(self):
        with pytest.raises(ValueError):
            TURN_PROFILE.mu_at(-2e6)

    def test_segments_must_increase(self):
        with pytest.raises(ValueError):
            FrictionProfile(((-10.0, 0.8), (-10.0, 0.4)))

    def test_first_segment_behind_origin(self):
        with pytest.raises(ValueError):
            FrictionProfile(((0.0, 0.8),))

    def test_mu_bounds(self):
        with pytest.raises(ValueError):
            FrictionProfile(((-10.0, 1.3),))

    def test_shift(self):
        shifted = TURN_PROFILE.shifted(-10.0)
        assert shifted.mu_at(-10.0) == 0.4
        assert shifted.mu_at(-10.001) == 0.8


class TestClassify:
    def test_high_friction_is_dry(self):
        assert classify(1.0) is DRY

    def test_wet_lower_boundary(self):
        assert classify(0.4) is WET

    def test_dry_boundary_belongs_to_wet(self):
        assert classify(0.6) is WET

    def test_below_range_rejected(self):
        with pytest.raises(ValueError):
            classify(0.09)

    def test_partition_is_total_and_single_valued(self):
        for mu in np.arange(0.1, 1.2001, 0.001):
            cls = classify(float(mu))
            assert cls in (DRY, WET, SNOW_ICE)
            if cls is DRY:
                assert mu > 0.6
            elif cls is WET:
                assert 0.4 <= mu <= 0.6
            else:
                assert 0.1 <= mu < 0.4

    def test_class_statistics(self):
        assert (DRY.mean, DRY.margin) == (0.8, 0.2)
        assert (WET.mean, WET.margin) == (0.5, 0.1)
        assert (SNOW_ICE.mean, SNOW_ICE.margin) == (0.25, 0.15)
        assert (DRY.mu_min, WET.mu_min, SNOW_ICE.mu_min) == (0.6, 0.4, 0.1)


class TestResolveError:
    def test_modes(self):
        assert resolve_error("worst-over") == 0.025
        assert resolve_error("worst-under") == -0.025
        assert resolve_error("fixed=0.01") == 0.01

    def test_fixed_bounds(self):
        with pytest.raises(ValueError):
            resolve_error("fixed=0.03")
        with pytest.raises(ValueError):
            resolve_error("sometimes")


class TestLocalEstimate:
    def test_unavailable_at_low_utilization(self):
        est = LocalEstimator(e_l=0.025)
        assert local_estimate(FrictionProfile(((-1e6, 0.8),)), 0.1, est) is None

    def test_worst_under_on_high_mu(self):
        est = LocalEstimator(e_l=-0.025)
        value = local_estimate(HIGH_MU_PROFILE, 0.8, est)
        assert value == (pytest.approx(0.975), 0.025)

    def test_threshold_crossing_with_zero_error(self):
        est = LocalEstimator(e_l=0.0)
        value = local_estimate(FrictionProfile(((-1e6, 0.4),)), 0.51, est)
        assert value == (pytest.approx(0.4), 0.025)

    def test_exactly_at_threshold_is_unavailable(self):
        est = LocalEstimator(e_l=0.0)
        assert local_estimate(HIGH_MU_PROFILE, 0.5, est) is None

    def test_updates_last_available(self):
        est = LocalEstimator(e_l=0.025, initial_estimate=0.8)
        local_estimate(HIGH_MU_PROFILE, 0.9, est)
        assert est.last_available == pytest.approx(1.025)

    def test_lambda_range_checked(self):
        est = LocalEstimator()
        with pytest.raises(ValueError):
            local_estimate(HIGH_MU_PROFILE, 1.2, est)

    def test_error_bound_enforced(self):
        with pytest.raises(ValueError):
            LocalEstimator(e_l=0.05)


class TestBuildEstimate:
    def test_gt_returns_profile(self):
        grid = SGrid()
        est = LocalEstimator()
        mu_hat = build_estimate(Configuration("gt"), TURN_PROFILE, grid, 0.0, est)
        np.testing.assert_array_equal(mu_hat, np.full(51, 0.4))

    def test_gt_tracks_transitions(self):
        grid = SGrid()
        profile = FrictionProfile(((-1e6, 0.8), (10.0, 0.3)))
        mu_hat = build_estimate(Configuration("gt"), profile, grid, 0.0, LocalEstimator())
        np.testing.assert_array_equal(mu_hat[:10], 0.8)
        np.testing.assert_array_equal(mu_hat[10:], 0.3)

    def test_l_holds_last_estimate_minus_worst_error(self):
        grid = SGrid()
        est = LocalEstimator(e_l=0.025, initial_estimate=0.8)
        mu_hat = build_estimate(Configuration("l"), TURN_PROFILE, grid, 0.1, est)
        np.testing.assert_allclose(mu_hat, 0.775)

    def test_l_uses_fresh_estimate_when_available(self):
        grid = SGrid()
        est = LocalEstimator(e_l=0.025, initial_estimate=0.8)
        mu_hat = build_estimate(Configuration("l"), TURN_PROFILE, grid, 0.9, est)
        np.testing.assert_allclose(mu_hat, 0.4 + 0.025 - 0.025)

    def test_l_requires_seed_before_first_availability(self):
        grid = SGrid()
        with pytest.raises(ValueError):
            build_estimate(Configuration("l"), TURN_PROFILE, grid, 0.1, LocalEstimator())

    def test_p_takes_class_minima(self):
        grid = SGrid()
        mu_hat = build_estimate(Configuration("p"), HIGH_MU_PROFILE, grid, 0.0,
                                LocalEstimator())
        np.testing.assert_array_equal(mu_hat, np.full(51, 0.6))

    def test_p_quantizes_per_point(self):
        grid = SGrid()
        profile = FrictionProfile(((-1e6, 1.0), (20.0, 0.45), (40.0, 0.2)))
        mu_hat = build_estimate(Configuration("p"), profile, grid, 0.0, LocalEstimator())
        np.testing.assert_array_equal(mu_hat[:20], 0.6)
        np.testing.assert_array_equal(mu_hat[20:40], 0.4)
        np.testing.assert_array_equal(mu_hat[40:], 0.1)

    def test_f_reports_series_and_posterior(self):
        grid = SGrid()
        est = LocalEstimator(e_l=-0.025, initial_estimate=0.8)
        report = emulate(Configuration("f"), HIGH_MU_PROFILE, grid, 0.9, est)
        assert report.local_available
        assert report.series is not None
        assert report.fused is not None
        near = grid.points < 5.0
        np.testing.assert_allclose(report.series.mu_prime[near], 0.975)
        np.testing.assert_allclose(report.series.margin[near], 0.025)
        np.testing.assert_allclose(report.series.mu_prime[~near], 0.8)
        assert report.mu_hat[0] >= 0.85

    def test_f_without_local_is_predictive_fusion(self):
        grid = SGrid()
        est = LocalEstimator(e_l=0.025, initial_estimate=0.8)
        report = emulate(Configuration("f"), HIGH_MU_PROFILE, grid, 0.0, est)
        assert not report.local_available
        np.testing.assert_allclose(report.series.mu_prime, 0.8)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Configuration("x")


class TestConservatism:
    def test_gt_exactness_random_profiles(self):
        grid = SGrid()
        rng = np.random.RandomState(9)
        for _ in range(20):
            profile = random_profile(rng)
            mu_hat = build_estimate(Configuration("gt"), profile, grid, 0.0,
                                    LocalEstimator())
            np.testing.assert_array_equal(mu_hat, profile.mu_on(grid.points))

    def test_l_never_exceeds_current_truth_when_available(self):
        grid = SGrid()
        rng = np.random.RandomState(10)
        for _ in range(20):
            profile = random_profile(rng)
            for e_l in (-0.025, -0.01, 0.0, 0.01, 0.025):
                est = LocalEstimator(e_l=e_l, initial_estimate=0.8)
                mu_hat = build_estimate(Configuration("l"), profile, grid, 0.8, est)
                assert mu_hat.max() <= profile.mu_at(0.0) + 1e-12

    def test_p_never_exceeds_truth(self):
        grid = SGrid()
        rng = np.random.RandomState(11)
        for _ in range(30):
            profile = random_profile(rng)
            mu_hat = build_estimate(Configuration("p"), profile, grid, 0.0,
                                    LocalEstimator())
            truth = profile.mu_on(grid.points)
            assert (mu_hat <= truth + 1e-12).all()
