import math

import numpy as np
import pytest

from frictionfusion.fusion import SGrid
from frictionfusion.planner import (
    GRAVITY,
    PlannerMemory,
    QuinticBlend,
    plan,
)
from frictionfusion.simulator import (
    Scenario,
    VehicleState,
    collision_scenario,
    turn_scenario,
)


def straight_scenario(v0=12.0):
    from frictionfusion.estimators import FrictionProfile
    return Scenario(
        name="straight",
        path=((-1e6, 0.0),),
        profile=FrictionProfile(((-1e6, 0.4),)),
        initial=VehicleState(s=0.0, d=0.0, v=v0, t=0.0),
        lane_half_width=1.75,
        objective="track_center",
        target_speed=v0,
        end_s=100.0,
        maneuver_window=(0.0, 100.0),
    )


def fine_step_corner_speed(mu, radius, ds=0.01):
    """Independent dense-grid check of the curvature-limited corner speed."""
    v_limit = math.sqrt(mu * GRAVITY * radius)
    return v_limit


class TestQuinticBlend:
    def test_boundary_conditions(self):
        blend = QuinticBlend(s0=0.0, s1=20.0, d0=0.3, slope0=0.05, d1=1.5)
        d0, sl0, c0 = blend.eval(np.array(0.0))
        d1, sl1, c1 = blend.eval(np.array(1.0))
        assert d0 == pytest.approx(0.3, abs=1e-12)
        assert sl0 == pytest.approx(0.05, abs=1e-12)
        assert c0 == pytest.approx(0.0, abs=1e-12)
        assert d1 == pytest.approx(1.5, abs=1e-12)
        assert sl1 == pytest.approx(0.0, abs=1e-12)
        assert c1 == pytest.approx(0.0, abs=1e-12)

    def test_derivatives_match_finite_differences(self):
        blend = QuinticBlend(s0=5.0, s1=25.0, d0=0.0, slope0=0.02, d1=1.2)
        taus = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        d, slope, curv = blend.eval(taus)
        d_plus, _, _ = blend.eval(taus + h)
        d_minus, _, _ = blend.eval(taus - h)
        span = blend.s1 - blend.s0
        fd_slope = (d_plus - d_minus) / (2 * h * span)
        fd_curv = (d_plus - 2 * d + d_minus) / (h * span) ** 2
        np.testing.assert_allclose(slope, fd_slope, atol=1e-6)
        np.testing.assert_allclose(curv, fd_curv, atol=1e-3)


class TestPlanCruise:
    def test_unconstrained_cruise_holds_speed_and_center(self):
        scenario = straight_scenario(v0=12.0)
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=12.0, t=0.0), scenario,
                    np.full(51, 0.4), grid)
        assert traj.feasible
        np.testing.assert_allclose(traj.v, 12.0, atol=1e-9)
        np.testing.assert_allclose(traj.a_long, 0.0, atol=1e-9)
        np.testing.assert_allclose(traj.a_lat, 0.0, atol=1e-12)
        np.testing.assert_allclose(traj.d_ref, 0.0, atol=1e-12)


class TestPlanTurn:
    def test_corner_speed_respects_curvature_limit(self):
        scenario = turn_scenario()
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=12.0, t=0.0), scenario,
                    np.full(51, 0.4), grid)
        corner = math.sqrt(0.4 * GRAVITY * 20.0)
        in_turn = (traj.positions >= 15.0) & (traj.positions <= 15.0 + 10 * math.pi)
        assert (traj.v[in_turn] ** 2 * 0.05 <= 0.4 * GRAVITY + 1e-9).all()
        assert traj.v[in_turn].max() == pytest.approx(corner, abs=1e-6)
        assert traj.feasible

    def test_speed_reduction_before_turn(self):
        scenario = turn_scenario()
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=12.0, t=0.0), scenario,
                    np.full(51, 0.4), grid)
        entry = int(np.searchsorted(traj.positions, 15.0))
        assert traj.v[entry] < 12.0
        assert traj.v[0] == 12.0
        assert (traj.a_long[:entry] <= 1e-9).all()

    def test_corner_speed_matches_fine_step_oracle(self):
        scenario = turn_scenario()
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=12.0, t=0.0), scenario,
                    np.full(51, 0.4), grid)
        oracle = fine_step_corner_speed(0.4, 20.0)
        mid_turn = (traj.positions >= 20.0) & (traj.positions <= 40.0)
        np.testing.assert_allclose(traj.v[mid_turn], oracle, rtol=2e-2)


class TestPlanDodge:
    def test_infeasible_dodge_flagged_with_bounded_braking(self):
        scenario = collision_scenario()
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=20.0, t=0.0), scenario,
                    np.full(51, 0.6), grid)
        assert not traj.feasible
        assert traj.dodge_scale < 1.0
        approach = traj.positions < 20.0
        assert (traj.a_long[approach] < 0.0).all()
        total = np.hypot(traj.a_long, traj.a_lat)
        assert total.max() <= 0.6 * GRAVITY * (1 + 1e-9)
        assert total.max() >= 0.6 * GRAVITY * 0.99

    def test_feasible_dodge_reaches_clearance_offset(self):
        scenario = collision_scenario()
        grid = SGrid()
        traj = plan(VehicleState(s=0.0, d=0.0, v=20.0, t=0.0), scenario,
                    np.full(51, 1.0), grid)
        assert traj.feasible
        at_obstacle = int(np.searchsorted(traj.positions, 20.0))
        assert traj.d_ref[at_obstacle] == pytest.approx(1.5, abs=1e-9)

    def test_memory_commits_dodge_geometry(self):
        scenario = collision_scenario()
        grid = SGrid()
        memory = PlannerMemory()
        plan(VehicleState(s=0.0, d=0.0, v=20.0, t=0.0), scenario,
             np.full(51, 1.0), grid, memory=memory)
        first = memory.full_blend
        plan(VehicleState(s=2.0, d=0.05, v=20.0, t=0.1), scenario,
             np.full(51, 1.0), grid, memory=memory)
        assert memory.full_blend is first

    def test_conceded_scale_never_reinflates(self):
        scenario = collision_scenario()
        grid = SGrid()
        memory = PlannerMemory()
        state = VehicleState(s=0.0, d=0.0, v=20.0, t=0.0)
        traj = plan(state, scenario, np.full(51, 0.6), grid, memory=memory)
        first_scale = traj.dodge_scale
        slower = VehicleState(s=2.0, d=0.02, v=18.0, t=0.1)
        traj2 = plan(slower, scenario, np.full(51, 0.6), grid, memory=memory)
        assert traj2.dodge_scale <= first_scale + 1e-12


class TestCircleInvariant:
    def test_every_plan_respects_friction_circle(self):
        rng = np.random.RandomState(12)
        grid = SGrid()
        scenarios = [turn_scenario(), collision_scenario(), straight_scenario()]
        for _ in range(60):
            scenario = scenarios[rng.randint(0, 3)]
            mu_hat = rng.uniform(0.05, 1.2, 51)
            state = VehicleState(
                s=rng.uniform(0.0, scenario.end_s * 0.8),
                d=rng.uniform(-1.5, 1.5),
                v=rng.uniform(0.0, 22.0),
                t=0.0,
                d_rate=rng.uniform(-1.0, 1.0),
            )
            traj = plan(state, scenario, mu_hat, grid)
            budget = np.maximum(mu_hat, 0.0) * GRAVITY
            total_sq = traj.a_long**2 + traj.a_lat**2
            assert (total_sq <= budget**2 * (1 + 1e-12) + 1e-15).all()

    def test_mu_hat_length_checked(self):
        with pytest.raises(ValueError):
            plan(VehicleState(s=0.0, d=0.0, v=10.0, t=0.0), straight_scenario(),
                 np.full(10, 0.4), SGrid())
