import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sp

from src.algorithms.gvd import build_gvd
from src.algorithms.qp_solver import BoxQpSolver, projected_gradient_norm, solve_box_qp
from src.algorithms.smoother import assemble_qp, build_reference, objective, second_difference, smooth
from src.models import (
    BoxQp,
    Pose,
    PreconditionError,
    QpNumericError,
    QpSizeError,
    ReferenceIntegrityError,
    ReferencePath,
    SmootherConfig,
    SolverStatus,
)
from tests.fixtures import two_walls_grid

R_C = 0.1 * math.sqrt(2.0)


def reference(points, margins):
    points = np.asarray(points, dtype=float)
    margins = np.asarray(margins, dtype=float)
    return ReferencePath(vertices=points, clearances=margins + R_C, margins=margins, r_c=R_C)


def brute_force_box_qp(P, q, lower, upper):
    """全ての有効制約集合を列挙して最小値を求める"""
    n = q.shape[0]
    best_x, best_value = None, math.inf
    for assignment in itertools.product((0, 1, 2), repeat=n):
        x = np.zeros(n)
        fixed = np.array([a != 2 for a in assignment])
        for i, a in enumerate(assignment):
            if a == 0:
                x[i] = lower[i]
            elif a == 1:
                x[i] = upper[i]
        free = np.flatnonzero(~fixed)
        if free.size:
            act = np.flatnonzero(fixed)
            rhs = -q[free] - P[np.ix_(free, act)] @ x[act]
            x[free] = np.linalg.solve(P[np.ix_(free, free)], rhs)
        if np.any(x < lower - 1e-12) or np.any(x > upper + 1e-12):
            continue
        value = 0.5 * x @ P @ x + q @ x
        if value < best_value:
            best_x, best_value = x, value
    return best_x, best_value


class TestBuildReference:
    """参照経路の再標本化のテスト"""

    @classmethod
    def setup_class(cls):
        cls.gvd = build_gvd(two_walls_grid(width=40))
        cls.path = [Pose(0.55 + 0.1 * k, 0.55, 0.0) for k in range(25)]

    def test_resampled_vertices(self):
        ref = build_reference(self.path, self.gvd, R_C)
        assert ref.n == 25
        assert ref.vertices[0] == pytest.approx([0.55, 0.55])
        assert ref.vertices[-1] == pytest.approx([2.95, 0.55])
        assert ref.spacing == pytest.approx(np.full(24, 0.1))

    def test_clearances_and_margins(self):
        ref = build_reference(self.path, self.gvd, R_C)
        assert ref.clearances == pytest.approx(np.full(25, 0.5))
        expected = math.sqrt(2.0) / 2.0 * 0.5 - R_C
        assert ref.margins == pytest.approx(np.full(25, expected))
        assert not ref.frozen.any()

    def test_duplicate_poses_are_dropped(self):
        doubled = [p for p in self.path for _ in range(2)]
        assert build_reference(doubled, self.gvd, R_C).n == 25

    def test_zero_margin_freezes_vertex(self):
        ref = build_reference(self.path, self.gvd, r_c=0.5)
        assert ref.frozen.all()

    def test_too_short(self):
        with pytest.raises(PreconditionError):
            build_reference(self.path[:2], self.gvd, R_C)
        with pytest.raises(PreconditionError):
            build_reference([self.path[0], self.path[0]], self.gvd, R_C)

    def test_clearance_below_robot_radius(self):
        with pytest.raises(ReferenceIntegrityError):
            build_reference(self.path, self.gvd, r_c=0.6)


class TestAssembleQp:
    """QP の組み立てのテスト"""

    def test_second_difference(self):
        D = second_difference(5).toarray()
        assert D.shape == (3, 5)
        assert D[0].tolist() == [1.0, -2.0, 1.0, 0.0, 0.0]
        assert D[2].tolist() == [0.0, 0.0, 1.0, -2.0, 1.0]

    def test_objective_matches_quadratic_form(self):
        rng = np.random.default_rng(3)
        ref = reference(rng.random((6, 2)), np.full(6, 0.5))
        cfg = SmootherConfig(w_s=4.0, w_r=2.0)
        qp = assemble_qp(ref, cfg)
        x = rng.random(12)
        constant = cfg.w_r * float(np.sum(ref.vertices ** 2))
        assert qp.objective(x) + constant == pytest.approx(objective(x, ref, cfg))

    def test_endpoints_fixed(self):
        ref = reference([(0, 0), (1, 1), (2, 0), (3, 1)], [0.5, 0.5, 0.5, 0.5])
        qp = assemble_qp(ref, SmootherConfig())
        for i in (0, 1, 6, 7):
            assert qp.lower[i] == qp.upper[i]
        assert qp.upper[2] - qp.lower[2] == pytest.approx(1.0)

    def test_too_few_vertices(self):
        with pytest.raises(QpSizeError):
            assemble_qp(reference([(0, 0), (1, 0)], [0.1, 0.1]), SmootherConfig())


class TestSmooth:
    """経路平滑化のテスト"""

    def test_three_vertex_closed_form(self):
        """中央頂点の最適解は (1, 1/41)"""
        ref = reference([(0, 0), (1, 1), (2, 0)], [0.0, 10.0, 0.0])
        result = smooth(ref, SmootherConfig(w_s=10.0, w_r=1.0))
        assert result.status == SolverStatus.SOLVED
        assert result.vertices[1] == pytest.approx([1.0, 1.0 / 41.0], abs=1e-6)

    def test_box_is_active(self):
        ref = reference([(0, 0), (1, 1), (2, 0)], [0.0, 0.2, 0.0])
        result = smooth(ref, SmootherConfig(w_s=10.0, w_r=1.0))
        assert result.vertices[1] == pytest.approx([1.0, 0.8], abs=1e-6)

    def test_straight_reference_unchanged(self):
        points = [(0.1 * k, 0.05 * k) for k in range(12)]
        ref = reference(points, np.full(12, 0.2))
        result = smooth(ref)
        assert result.vertices == pytest.approx(ref.vertices, abs=1e-6)

    def test_zigzag_is_smoothed(self):
        points = [(0.1 * k, 0.05 * (k % 2)) for k in range(30)]
        ref = reference(points, np.full(30, 0.1))
        result = smooth(ref)

        assert result.objective <= result.reference_objective + 1e-9
        assert (result.vertices[0] == ref.vertices[0]).all()
        assert (result.vertices[-1] == ref.vertices[-1]).all()
        deviation = np.abs(result.vertices - ref.vertices)
        assert (deviation <= ref.margins[:, None] + 1e-9).all()

    def test_frozen_vertices_stay(self):
        points = [(0.1 * k, 0.05 * (k % 2)) for k in range(10)]
        margins = np.full(10, 0.1)
        margins[4] = 0.0
        result = smooth(reference(points, margins))
        assert result.vertices[4] == pytest.approx(points[4])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SmootherConfig(w_s=0.0)
        with pytest.raises(ValueError):
            SmootherConfig(w_r=0.0)
        with pytest.raises(ValueError):
            SmootherConfig(max_iter=0)
        assert SmootherConfig(w_r=0.0, allow_zero_reference_weight=True).w_r == 0.0

    @pytest.mark.slow
    def test_long_path(self):
        rng = np.random.default_rng(0)
        xs = np.arange(400) * 0.1
        points = np.column_stack((xs, np.sin(xs) + rng.normal(0.0, 0.02, 400)))
        ref = reference(points, np.full(400, 0.1))
        times = []
        for _ in range(20):
            result = smooth(ref)
            assert result.status == SolverStatus.SOLVED
            assert result.objective <= result.reference_objective + 1e-9
            times.append(result.solve_time)
        assert float(np.median(times)) < 5e-3


class TestBoxQpSolver:
    """箱型制約付きQPソルバーのテスト"""

    def test_matches_active_set_enumeration(self):
        rng = np.random.default_rng(42)
        for trial in range(100):
            d = int(rng.integers(1, 9))
            A = rng.normal(size=(d, d))
            P = A @ A.T + np.eye(d)
            q = rng.normal(size=d) * 3.0
            lower = -rng.random(d)
            upper = rng.random(d)

            expected, value = brute_force_box_qp(P, q, lower, upper)
            solution = solve_box_qp(BoxQp(P=sp.csc_matrix(P), q=q, lower=lower, upper=upper))
            assert solution.status == SolverStatus.SOLVED
            assert solution.x == pytest.approx(expected, abs=1e-5)
            assert 0.5 * solution.x @ P @ solution.x + q @ solution.x == pytest.approx(value, abs=1e-6)

    def test_solution_satisfies_kkt(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(8, 8))
        P = sp.csc_matrix(A @ A.T + np.eye(8))
        q = rng.normal(size=8) * 5.0
        lower, upper = -np.full(8, 0.3), np.full(8, 0.3)
        solution = BoxQpSolver().solve(BoxQp(P=P, q=q, lower=lower, upper=upper))
        assert projected_gradient_norm(P, q, lower, upper, solution.x) <= 1e-5
        assert ((solution.x >= lower) & (solution.x <= upper)).all()

    def test_admm_without_polishing(self):
        """ポリッシングが失敗しても ADMM の反復で収束する"""
        rng = np.random.default_rng(11)
        A = rng.normal(size=(5, 5))
        P = sp.csc_matrix(A @ A.T + np.eye(5))
        q = rng.normal(size=5)
        qp = BoxQp(P=P, q=q, lower=-np.ones(5), upper=np.ones(5))
        solver = BoxQpSolver()
        solver._polish = lambda *args: None
        solution = solver.solve(qp)
        assert solution.status == SolverStatus.SOLVED
        assert solution.iterations > 0
        assert not solution.polished
        expected, _ = brute_force_box_qp(P.toarray(), q, qp.lower, qp.upper)
        assert solution.x == pytest.approx(expected, abs=1e-4)

    def test_returns_best_iterate_at_iteration_limit(self):
        """反復上限では記録した目的関数値が最小の反復を返す"""
        rng = np.random.default_rng(5)
        for _ in range(50):
            d = int(rng.integers(2, 9))
            A = rng.normal(size=(d, d))
            qp = BoxQp(P=sp.csc_matrix(A @ A.T + np.eye(d)), q=rng.normal(size=d) * 3.0,
                       lower=-rng.random(d), upper=rng.random(d))
            solver = BoxQpSolver(SmootherConfig(max_iter=4))
            solver._polish = lambda *args: None
            solution = solver.solve(qp)

            history = solution.objective_history
            assert len(history) == solution.iterations + 1
            assert qp.objective(solution.x) == min(history)
            assert ((solution.x >= qp.lower) & (solution.x <= qp.upper)).all()


    def test_nan_input(self):
        qp = BoxQp(P=sp.identity(2, format="csc"), q=np.array([np.nan, 0.0]),
                   lower=-np.ones(2), upper=np.ones(2))
        with pytest.raises(QpNumericError):
            solve_box_qp(qp)

    def test_inverted_bounds(self):
        qp = BoxQp(P=sp.identity(2, format="csc"), q=np.zeros(2),
                   lower=np.array([0.0, 1.0]), upper=np.array([1.0, 0.0]))
        with pytest.raises(QpNumericError):
            solve_box_qp(qp)

    def test_dimension_mismatch(self):
        qp = BoxQp(P=sp.identity(3, format="csc"), q=np.zeros(2),
                   lower=-np.ones(2), upper=np.ones(2))
        with pytest.raises(QpNumericError):
            solve_box_qp(qp)
