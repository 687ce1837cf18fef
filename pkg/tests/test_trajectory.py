import math

import numpy as np
import pytest

from src.algorithms.gvd import build_gvd
from src.algorithms.trajectory import (
    compute_metrics,
    curvature_array,
    curvature_at,
    fit_spline,
    parameter_at,
    path_clearance,
    plan_velocity,
    traversal_time,
)
from src.models import (
    DegenerateKnotError,
    SmoothedPath,
    SpeedLimits,
    StalledProfileError,
    VelocityInfeasibleError,
    VelocityProfile,
)
from tests.fixtures import two_walls_grid

LIMITS = SpeedLimits(v_max=1.5, omega_max=1.0, a_max=1.0)
DS = 0.1


def straight_knots(length, count=11):
    return np.column_stack((np.linspace(0.0, length, count), np.zeros(count)))


def arc_knots(radius, step_deg=5.0):
    angles = np.radians(np.arange(0.0, 180.0 + step_deg / 2, step_deg))
    return np.column_stack((radius * np.cos(angles), radius * np.sin(angles)))


def limit_violations(profile, ds_tol=1e-9):
    """速度上限と加速度上限の違反数"""
    cap = profile.speed_cap
    over_cap = int(np.count_nonzero(profile.v > cap + ds_tol))
    dv2 = np.abs(np.diff(profile.v ** 2))
    over_accel = int(np.count_nonzero(dv2 > 2.0 * profile.a_max * np.diff(profile.s) + ds_tol))
    return over_cap + over_accel


class TestFitSpline:
    """3次スプライン補間のテスト"""

    def test_straight_line(self):
        spline = fit_spline(straight_knots(10.0))
        assert spline.length == pytest.approx(10.0, abs=1e-9)
        u = np.linspace(0.0, spline.u_max, 50)
        assert curvature_array(spline, u) == pytest.approx(np.zeros(50), abs=1e-9)

    def test_circle_curvature(self):
        """半径2の半円で曲率は 0.5"""
        spline = fit_spline(arc_knots(2.0), bc_type="not-a-knot")
        u = np.linspace(0.0, spline.u_max, 200)
        assert np.all(np.abs(curvature_array(spline, u) - 0.5) <= 0.02)
        assert spline.length == pytest.approx(2.0 * math.pi, abs=1e-3)

    def test_curvature_at_matches_array(self):
        spline = fit_spline(arc_knots(2.0))
        u = spline.u_max / 3.0
        assert curvature_at(spline, u) == pytest.approx(float(curvature_array(spline, np.array([u]))[0]))

    def test_interpolates_knots(self):
        knots = arc_knots(1.5, step_deg=15.0)
        spline = fit_spline(knots)
        x, y = spline.position(spline.u)
        assert np.column_stack((x, y)) == pytest.approx(knots)

    def test_accepts_smoothed_path(self):
        spline = fit_spline(SmoothedPath(vertices=straight_knots(2.0, 5)))
        assert spline.length == pytest.approx(2.0)

    def test_parameter_at(self):
        spline = fit_spline(straight_knots(4.0, 9))
        s = np.array([0.0, 1.0, 2.5, 4.0])
        assert parameter_at(spline, s) == pytest.approx(s, abs=1e-6)

    def test_too_few_knots(self):
        with pytest.raises(DegenerateKnotError):
            fit_spline(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_coincident_knots(self):
        with pytest.raises(DegenerateKnotError):
            fit_spline(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))


class TestPlanVelocity:
    """速度計画のテスト"""

    def test_trapezoid(self):
        """直線10mは加速・巡航・減速の台形プロファイル"""
        spline = fit_spline(straight_knots(10.0))
        profile = plan_velocity(spline, LIMITS, ds=DS)
        assert profile.v[0] == 0.0 and profile.v[-1] == 0.0
        assert profile.v.max() == pytest.approx(1.5)
        assert traversal_time(profile) == pytest.approx(3.0 + 7.75 / 1.5, rel=0.01)

    def test_random_paths_respect_limits(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            x = np.cumsum(0.2 + 0.3 * rng.random(12))
            y = np.cumsum(rng.normal(0.0, 0.2, 12))
            spline = fit_spline(np.column_stack((x, y)))
            profile = plan_velocity(spline, LIMITS, ds=DS)

            assert limit_violations(profile) == 0
            assert (profile.v >= 0.0).all()
            # the profile sits on a limit, so any uniform speed-up breaks one
            assert limit_violations(profile.scaled(1.01)) > 0

    def test_curvature_caps_speed(self):
        spline = fit_spline(arc_knots(0.5), bc_type="not-a-knot")
        profile = plan_velocity(spline, LIMITS, ds=DS)
        # omega_max / kappa = 0.5 m/s on a 0.5 m radius
        assert profile.v.max() <= 0.5 + 0.02

    def test_boundary_speeds(self):
        spline = fit_spline(straight_knots(10.0))
        profile = plan_velocity(spline, LIMITS, v_start=0.5, v_end=1.0, ds=DS)
        assert profile.v[0] == 0.5
        assert profile.v[-1] == 1.0

    def test_start_speed_above_limit(self):
        spline = fit_spline(straight_knots(10.0))
        with pytest.raises(VelocityInfeasibleError) as excinfo:
            plan_velocity(spline, LIMITS, v_start=2.0, ds=DS)
        assert excinfo.value.end == "start"

    def test_end_speed_unreachable(self):
        spline = fit_spline(straight_knots(0.5, 3))
        with pytest.raises(VelocityInfeasibleError) as excinfo:
            plan_velocity(spline, LIMITS, v_end=1.5, ds=DS)
        assert excinfo.value.end == "end"

    def test_negative_speed(self):
        spline = fit_spline(straight_knots(2.0))
        with pytest.raises(VelocityInfeasibleError) as excinfo:
            plan_velocity(spline, LIMITS, v_start=-0.1, ds=DS)
        assert excinfo.value.end == "start"

    def test_invalid_step(self):
        spline = fit_spline(straight_knots(2.0))
        with pytest.raises(ValueError):
            plan_velocity(spline, LIMITS, ds=0.0)


class TestMetrics:
    """走行距離・時間・曲率の評価のテスト"""

    def test_cumulative_time_matches_total(self):
        spline = fit_spline(straight_knots(10.0))
        profile = plan_velocity(spline, LIMITS, ds=DS)
        assert profile.cumulative_time()[-1] == pytest.approx(traversal_time(profile))

    def test_stalled_profile(self):
        profile = VelocityProfile(s=np.array([0.0, 1.0, 2.0]), v=np.array([0.0, 0.0, 1.0]),
                                  curvature=np.zeros(3))
        with pytest.raises(StalledProfileError):
            traversal_time(profile)

    def test_compute_metrics(self):
        spline = fit_spline(arc_knots(2.0), bc_type="not-a-knot")
        profile = plan_velocity(spline, LIMITS, ds=DS)
        metrics = compute_metrics(spline, profile, DS)
        assert metrics.S == pytest.approx(2.0 * math.pi, abs=1e-3)
        assert metrics.T == pytest.approx(traversal_time(profile))
        assert metrics.K_max >= metrics.K_mean
        assert metrics.K_mean == pytest.approx(0.5, abs=0.02)
        assert math.isnan(metrics.min_clearance)

    def test_clearance(self):
        gvd = build_gvd(two_walls_grid(width=40))
        knots = np.column_stack((np.linspace(0.55, 2.95, 7), np.full(7, 0.55)))
        assert path_clearance(knots, gvd) == pytest.approx((0.5, 0.5))

        spline = fit_spline(knots)
        metrics = compute_metrics(spline, plan_velocity(spline, LIMITS, ds=DS), DS, gvd=gvd)
        assert metrics.min_clearance == pytest.approx(0.5)
        assert set(metrics.to_row()) == {"S", "T", "K_max", "K_mean", "min_clearance", "mean_clearance"}
