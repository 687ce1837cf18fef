import math

import numpy as np
import pytest

from src.algorithms.gvd import (
    apply_map_delta,
    build_gvd,
    clearance_at,
    gvd_to_frame,
    point_clearance,
    update_gvd,
)
from src.models import (
    CellIndex,
    CellRangeError,
    CellState,
    INF_SQ_DIST,
    MapDelta,
    OccupancyGrid,
    UnknownPolicy,
    cell_to_world,
    is_traversable,
    world_to_cell,
)
from tests.fixtures import random_grid, two_walls_grid


def brute_force_sq_dist(obstacles: np.ndarray) -> np.ndarray:
    oy, ox = np.nonzero(obstacles)
    iy, ix = np.indices(obstacles.shape)
    d = (ix[..., None] - ox) ** 2 + (iy[..., None] - oy) ** 2
    return d.min(axis=-1)


def brute_force_voronoi(obstacles: np.ndarray) -> np.ndarray:
    """セルごとに最近傍障害物の集合を全探索して判定する"""
    height, width = obstacles.shape
    oy, ox = np.nonzero(obstacles)
    nearest = {}
    for y in range(height):
        for x in range(width):
            d = (ox - x) ** 2 + (oy - y) ** 2
            best = d.min()
            nearest[(x, y)] = (int(best), [(int(a), int(b)) for a, b in zip(ox[d == best], oy[d == best])])

    flags = np.zeros(obstacles.shape, dtype=bool)
    for (x, y), (sq_p, n_p) in nearest.items():
        if obstacles[y, x]:
            continue
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                q = (x + dx, y + dy)
                if (dx, dy) == (0, 0) or q not in nearest:
                    continue
                sq_q, n_q = nearest[q]
                for op in n_p:
                    for oq in n_q:
                        if max(abs(op[0] - oq[0]), abs(op[1] - oq[1])) <= 1:
                            continue
                        lhs = (x - oq[0]) ** 2 + (y - oq[1]) ** 2 - sq_p
                        rhs = (q[0] - op[0]) ** 2 + (q[1] - op[1]) ** 2 - sq_q
                        if lhs <= rhs:
                            flags[y, x] = True
    return flags


class TestBuildGvd:
    """GVD構築のテスト"""

    def test_sq_dist_matches_brute_force(self):
        """二乗距離が全探索と完全に一致する"""
        for seed in range(20):
            for density in (0.04, 0.1):
                grid = random_grid(seed, density=density)
                gvd = build_gvd(grid)
                expected = brute_force_sq_dist(grid.blocked_mask())
                assert np.array_equal(gvd.sq_dist, expected)

    def test_distance_is_one_lipschitz(self):
        """隣接セル間の距離の差はセル間の距離を超えない"""
        for seed in range(5):
            d = np.sqrt(build_gvd(random_grid(seed, density=0.05)).sq_dist.astype(float))
            assert (np.abs(np.diff(d, axis=1)) <= 1.0 + 1e-12).all()
            assert (np.abs(np.diff(d, axis=0)) <= 1.0 + 1e-12).all()
            assert (np.abs(d[1:, 1:] - d[:-1, :-1]) <= math.sqrt(2.0) + 1e-12).all()
            assert (np.abs(d[1:, :-1] - d[:-1, 1:]) <= math.sqrt(2.0) + 1e-12).all()

    def test_voronoi_flags_match_brute_force(self):
        for seed in range(3):
            grid = random_grid(seed, width=20, height=16, density=0.08)
            gvd = build_gvd(grid)
            assert np.array_equal(gvd.is_voronoi, brute_force_voronoi(grid.blocked_mask()))

    def test_flags_follow_reflections(self):
        """地図を反転・転置するとボロノイセルも同じように写る"""
        for seed in range(12):
            blocked = random_grid(seed, width=30, height=24).blocked_mask()
            flags = build_gvd(OccupancyGrid.from_occupancy(blocked, 0.1)).is_voronoi
            for transform in (np.fliplr, np.flipud, np.transpose):
                mirrored = build_gvd(OccupancyGrid.from_occupancy(np.ascontiguousarray(transform(blocked)), 0.1))
                assert np.array_equal(mirrored.is_voronoi, transform(flags))

    def test_even_gap_gives_two_rows(self):
        gvd = build_gvd(two_walls_grid(height=12))
        rows = np.flatnonzero(gvd.is_voronoi.any(axis=1))
        assert rows.tolist() == [5, 6]
        assert gvd.is_voronoi[5:7].all()

    def test_nearest_obstacle_is_an_obstacle(self):
        grid = random_grid(7)
        gvd = build_gvd(grid)
        assert gvd.obstacles[gvd.nearest_y, gvd.nearest_x].all()

    def test_two_walls_voronoi_band(self):
        """上下の壁の中央の行だけがボロノイセルになる"""
        gvd = build_gvd(two_walls_grid())
        rows = np.flatnonzero(gvd.is_voronoi.any(axis=1))
        assert rows.tolist() == [5]
        assert gvd.is_voronoi[5].all()

    def test_obstacles_are_never_voronoi(self):
        gvd = build_gvd(random_grid(3))
        assert not (gvd.is_voronoi & gvd.obstacles).any()

    def test_empty_map(self):
        grid = OccupancyGrid(width=12, height=8, resolution=0.1)
        gvd = build_gvd(grid)
        assert (gvd.sq_dist == INF_SQ_DIST).all()
        assert not gvd.is_voronoi.any()
        assert clearance_at(gvd, CellIndex(3, 3)) == float("inf")

    def test_deterministic(self):
        grid = random_grid(11)
        assert build_gvd(grid).same_cells(build_gvd(grid))

    def test_unknown_policy(self):
        grid = two_walls_grid()
        grid.set_state(CellIndex(20, 5), CellState.UNKNOWN)

        as_obstacle = build_gvd(grid, UnknownPolicy.OBSTACLE)
        as_free = build_gvd(grid, UnknownPolicy.FREE)
        assert as_obstacle.sq_dist[5, 20] == 0
        assert as_free.sq_dist[5, 20] == 25

    def test_clearance_at(self):
        gvd = build_gvd(two_walls_grid())
        assert clearance_at(gvd, CellIndex(10, 5)) == pytest.approx(0.5)
        assert clearance_at(gvd, CellIndex(10, 2)) == pytest.approx(0.2)
        assert clearance_at(gvd, CellIndex(10, 0)) == 0.0
        with pytest.raises(CellRangeError):
            clearance_at(gvd, CellIndex(40, 0))

    def test_point_clearance(self):
        """セル中心では clearance_at と一致し、点の移動量以上には変化しない"""
        gvd = build_gvd(random_grid(5))
        rng = np.random.default_rng(5)
        cells = [CellIndex(int(x), int(y)) for x, y in rng.integers(0, 50, size=(40, 2))]
        centres = np.array([cell_to_world(gvd.grid, c) for c in cells])
        expected = np.array([clearance_at(gvd, c) for c in cells])
        assert point_clearance(gvd, centres) == pytest.approx(expected)

        points = rng.uniform(0.0, 5.0, size=(200, 2))
        moved = points + rng.uniform(-0.05, 0.05, size=points.shape)
        change = np.abs(point_clearance(gvd, points) - point_clearance(gvd, moved))
        assert (change <= np.hypot(*(moved - points).T) + 1e-12).all()

    def test_point_clearance_without_obstacles(self):
        gvd = build_gvd(OccupancyGrid(width=12, height=8, resolution=0.1))
        assert np.isinf(point_clearance(gvd, [(0.3, 0.3), (1.0, 0.5)])).all()

    def test_gvd_to_frame(self):
        gvd = build_gvd(two_walls_grid())
        frame = gvd_to_frame(gvd)
        assert list(frame.columns) == ["ix", "iy", "sq_dist", "is_voronoi"]
        assert len(frame) == 40 * 11
        assert frame["is_voronoi"].sum() == 40


class TestUpdateGvd:
    """GVDの差分更新のテスト"""

    def setup_method(self):
        self.grid = random_grid(21, width=40, height=40)
        self.gvd = build_gvd(self.grid)

    def test_update_matches_rebuild(self):
        """ランダムな差分を順に適用しても再構築と一致する"""
        for seed in range(20):
            rng = np.random.default_rng(seed)
            gvd = build_gvd(random_grid(100 + seed, density=0.04))
            for _ in range(30):
                blocked = gvd.obstacles
                cells = rng.integers(0, 50, size=(4, 2))
                occupied = [(int(x), int(y)) for x, y in cells[:2] if not blocked[y, x]]
                freed = [(int(x), int(y)) for x, y in cells[2:] if blocked[y, x]]
                occupied = [c for c in dict.fromkeys(occupied) if c not in freed]
                gvd = update_gvd(gvd, MapDelta(newly_occupied=occupied, newly_freed=list(dict.fromkeys(freed))))

                rebuilt = build_gvd(gvd.grid)
                assert gvd.same_cells(rebuilt)
                assert np.array_equal(gvd.obstacles, rebuilt.obstacles)
                assert gvd.obstacles[gvd.nearest_y, gvd.nearest_x].all()

    def test_single_cell_change_stays_local(self):
        """1セルの変化で計算し直すのは、そのセルを最近傍に持ちうる範囲だけ"""
        gvd = build_gvd(random_grid(8, width=100, height=100))
        rng = np.random.default_rng(3)
        for _ in range(20):
            x, y = (int(v) for v in rng.integers(0, 100, size=2))
            cell = CellIndex(x, y)
            if gvd.obstacles[y, x]:
                delta = MapDelta(newly_freed=[cell])
            else:
                delta = MapDelta(newly_occupied=[cell])
            updated, recomputed = apply_map_delta(gvd, delta)

            reach = math.isqrt(int(max(gvd.sq_dist.max(), updated.sq_dist.max()))) + 1
            ys, xs = np.nonzero(recomputed)
            assert recomputed[y, x]
            assert np.abs(xs - x).max() <= reach
            assert np.abs(ys - y).max() <= reach
            assert recomputed.sum() < recomputed.size // 4
            assert updated.same_cells(build_gvd(updated.grid))
            gvd = updated

    def test_unchanged_cells_are_not_recomputed(self):
        gvd = build_gvd(two_walls_grid(width=60))
        _, recomputed = apply_map_delta(gvd, MapDelta(newly_occupied=[CellIndex(30, 5)]))
        assert recomputed[5, 30]
        assert not recomputed[:, :20].any()
        assert not recomputed[:, 41:].any()

    def test_occupy_then_free_restores(self):
        cell = next(c for c in [CellIndex(x, 20) for x in range(40)] if not self.gvd.obstacles[c.iy, c.ix])
        occupied = update_gvd(self.gvd, MapDelta(newly_occupied=[cell]))
        assert occupied.sq_dist[cell.iy, cell.ix] == 0

        restored = update_gvd(occupied, MapDelta(newly_freed=[cell]))
        assert restored.same_cells(self.gvd)

    def test_input_not_modified(self):
        before = self.gvd.sq_dist.copy()
        cells = self.grid.cells.copy()
        free = np.argwhere(~self.gvd.obstacles)[0]
        update_gvd(self.gvd, MapDelta(newly_occupied=[(int(free[1]), int(free[0]))]))
        assert np.array_equal(self.gvd.sq_dist, before)
        assert np.array_equal(self.grid.cells, cells)

    def test_empty_delta_returns_same_map(self):
        assert update_gvd(self.gvd, MapDelta()) is self.gvd

    def test_out_of_bounds_delta(self):
        with pytest.raises(CellRangeError):
            update_gvd(self.gvd, MapDelta(newly_occupied=[(40, 0)]))

    def test_conflicting_delta(self):
        with pytest.raises(ValueError):
            MapDelta(newly_occupied=[(1, 1)], newly_freed=[(1, 1)])

    def test_removing_last_obstacle(self):
        occupied = np.zeros((10, 10), dtype=bool)
        occupied[4, 4] = True
        gvd = build_gvd(OccupancyGrid.from_occupancy(occupied, 0.1))
        cleared = update_gvd(gvd, MapDelta(newly_freed=[(4, 4)]))
        assert (cleared.sq_dist == INF_SQ_DIST).all()
        assert not cleared.is_voronoi.any()


class TestOccupancyGrid:
    """格子と座標の変換のテスト"""

    def setup_method(self):
        self.grid = OccupancyGrid(width=10, height=5, resolution=0.1, origin=(-1.0, 2.0))

    def test_world_cell_conversion(self):
        assert world_to_cell(self.grid, (-0.95, 2.05)) == CellIndex(0, 0)
        assert world_to_cell(self.grid, (-0.7, 2.2)) == CellIndex(3, 2)
        assert cell_to_world(self.grid, CellIndex(3, 2)) == pytest.approx((-0.65, 2.25))
        assert world_to_cell(self.grid, cell_to_world(self.grid, CellIndex(9, 4))) == CellIndex(9, 4)

    def test_outside(self):
        with pytest.raises(CellRangeError):
            world_to_cell(self.grid, (-1.05, 2.0))
        with pytest.raises(CellRangeError):
            cell_to_world(self.grid, CellIndex(10, 0))

    def test_unknown_policy(self):
        self.grid.set_state(CellIndex(1, 1), CellState.UNKNOWN)
        assert not is_traversable(self.grid, CellIndex(1, 1))
        assert is_traversable(self.grid, CellIndex(1, 1), UnknownPolicy.FREE)
        assert is_traversable(self.grid, CellIndex(2, 1))
