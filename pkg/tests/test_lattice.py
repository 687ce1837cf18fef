import math

import numpy as np
import pytest

from src.algorithms.corridor import build_corridor, full_space_corridor, shortest_voronoi_path
from src.algorithms.field import build_field
from src.algorithms.gvd import build_gvd
from src.algorithms.lattice import (
    DEFAULT_HEURISTIC_SCALE,
    LatticeCostModel,
    build_h2d,
    plan,
    primitive_cost,
    primitive_time,
    snap_cell,
)
from src.algorithms.primitives import generate_primitives
from src.models import (
    CellIndex,
    CellState,
    LatticeState,
    NoPathError,
    OccupancyGrid,
    Pose,
    PreconditionError,
    PrimitiveKind,
    SpeedLimits,
    VoronoiField,
    heading_angle,
)
from tests.fixtures import two_walls_grid, walled_room_grid

RESOLUTION = 0.1
HALF_WIDTH = 0.1


def straight(prims, heading, cells):
    for prim in prims.for_heading(heading):
        if prim.kind == PrimitiveKind.STRAIGHT and max(abs(prim.end_cell[0]), abs(prim.end_cell[1])) == cells:
            return prim
    raise LookupError(f"no {cells}-cell straight for heading {heading}")


def rotation(prims, heading, end_heading):
    return next(p for p in prims.for_heading(heading)
                if p.kind == PrimitiveKind.ROTATE and p.end_heading == end_heading)


class TestPrimitiveCost:
    """プリミティブのコストのテスト"""

    @classmethod
    def setup_class(cls):
        cls.prims = generate_primitives(RESOLUTION, HALF_WIDTH)
        cls.limits = SpeedLimits(v_max=1.0, omega_max=1.0, a_max=1.0)
        cls.grid = OccupancyGrid(width=20, height=20, resolution=RESOLUTION)
        cls.gvd = build_gvd(cls.grid)
        cls.field = build_field(cls.gvd, full_space_corridor(cls.gvd), d_o_min=0.3)

    def test_primitive_time(self):
        assert primitive_time(straight(self.prims, 0, 1), self.limits) == pytest.approx(0.1)
        assert primitive_time(straight(self.prims, 0, 3), SpeedLimits(v_max=1.5)) == pytest.approx(0.2)
        turn = rotation(self.prims, 0, 1)
        assert primitive_time(turn, SpeedLimits(omega_max=0.5)) == pytest.approx(math.atan2(1, 2) / 0.5)

    def test_free_space_cost_is_time(self):
        prim = straight(self.prims, 0, 1)
        cost = primitive_cost(prim, LatticeState(10, 10, 0), self.field, self.gvd, self.limits)
        assert cost == pytest.approx(0.1)

    def test_field_scales_cost(self):
        shape = self.gvd.sq_dist.shape
        field = VoronoiField(
            d_o=np.ones(shape), d_v=np.ones(shape), rho=np.full(shape, 0.125),
            mask=np.ones(shape, dtype=bool), d_o_min=1.0,
        )
        prim = straight(self.prims, 0, 1)
        cost = primitive_cost(prim, LatticeState(10, 10, 0), field, self.gvd, self.limits)
        assert cost == pytest.approx(0.1 * 1.125)

    def test_obstacle_in_swath(self):
        grid = self.grid.copy()
        grid.set_state(CellIndex(12, 10), CellState.OCCUPIED)
        gvd = build_gvd(grid)
        field = build_field(gvd, full_space_corridor(gvd), d_o_min=0.3)
        prim = straight(self.prims, 0, 1)
        assert primitive_cost(prim, LatticeState(10, 10, 0), field, gvd, self.limits) == math.inf
        # heading west stays clear of the obstacle
        west = straight(self.prims, 8, 1)
        assert math.isfinite(primitive_cost(west, LatticeState(10, 10, 8), field, gvd, self.limits))

    def test_cell_outside_corridor(self):
        shape = self.gvd.sq_dist.shape
        mask = np.ones(shape, dtype=bool)
        mask[10, 11] = False
        field = VoronoiField(d_o=np.ones(shape), d_v=np.ones(shape), rho=np.zeros(shape),
                             mask=mask, d_o_min=1.0)
        prim = straight(self.prims, 0, 1)
        assert primitive_cost(prim, LatticeState(10, 10, 0), field, self.gvd, self.limits) == math.inf

    def test_map_border(self):
        prim = straight(self.prims, 0, 3)
        assert primitive_cost(prim, LatticeState(18, 10, 0), self.field, self.gvd, self.limits) == math.inf

    def test_centre_clearance(self):
        gvd = build_gvd(two_walls_grid(width=20))
        field = build_field(gvd, full_space_corridor(gvd), d_o_min=0.3)
        prim = straight(self.prims, 0, 1)
        at = LatticeState(5, 2, 0)
        assert math.isfinite(primitive_cost(prim, at, field, gvd, self.limits))
        # centre cells at 0.2 m from the wall are too close for r_c = 0.3
        assert primitive_cost(prim, at, field, gvd, self.limits, r_c=0.3) == math.inf

    def test_model_matches_single_queries(self):
        gvd = build_gvd(walled_room_grid(width=30, height=20))
        field = build_field(gvd, full_space_corridor(gvd), d_o_min=0.3)
        model = LatticeCostModel(gvd, field, self.prims, self.limits)
        for ih in (0, 3, 10):
            costs = model.heading_costs(ih, 8, 6)
            for prim, cost in zip(self.prims.for_heading(ih), costs):
                single = primitive_cost(prim, LatticeState(8, 6, ih), field, gvd, self.limits, r_c=self.prims.r_c)
                assert single == pytest.approx(cost) or (math.isinf(single) and math.isinf(cost))


    def test_costs_follow_translation(self):
        """周期的な障害物配置では、周期だけずらした状態のコストが一致する"""
        iy, ix = np.indices((60, 60))
        occupied = (ix % 12 < 2) & (iy % 12 < 2)
        gvd = build_gvd(OccupancyGrid.from_occupancy(occupied, RESOLUTION))
        field = build_field(gvd, full_space_corridor(gvd), d_o_min=0.3)
        model = LatticeCostModel(gvd, field, self.prims, self.limits)
        for ih in range(len(self.prims.by_heading())):
            base = model.heading_costs(ih, 18, 18)
            assert np.isfinite(base).any()
            for x, y in ((30, 18), (18, 30), (30, 30)):
                assert np.array_equal(model.heading_costs(ih, x, y), base)


class TestHeuristic:
    """2次元ダイクストラのヒューリスティックのテスト"""

    @classmethod
    def setup_class(cls):
        cls.limits = SpeedLimits(v_max=1.0)
        cls.gvd = build_gvd(OccupancyGrid(width=20, height=20, resolution=RESOLUTION))
        cls.corridor = full_space_corridor(cls.gvd)
        cls.field = build_field(cls.gvd, cls.corridor, d_o_min=0.3)

    def test_free_space_distances(self):
        heuristic = build_h2d(self.gvd, self.corridor, CellIndex(10, 10), self.field, self.limits)
        assert heuristic.at(CellIndex(10, 10)) == 0.0
        assert heuristic.at(CellIndex(15, 10)) == pytest.approx(0.5)
        assert heuristic.at(CellIndex(13, 13)) == pytest.approx(0.3 * math.sqrt(2.0))

    def test_outside_corridor_is_infinite(self):
        gvd = build_gvd(two_walls_grid(width=20))
        heuristic = build_h2d(gvd, full_space_corridor(gvd), CellIndex(5, 5), build_field(
            gvd, full_space_corridor(gvd), d_o_min=0.3), self.limits)
        assert heuristic.at(CellIndex(5, 0)) == math.inf

    def test_goal_outside_corridor(self):
        gvd = build_gvd(two_walls_grid(width=20))
        corridor = full_space_corridor(gvd)
        field = build_field(gvd, corridor, d_o_min=0.3)
        with pytest.raises(PreconditionError):
            build_h2d(gvd, corridor, CellIndex(5, 0), field, self.limits)

    def test_default_scale(self):
        assert DEFAULT_HEURISTIC_SCALE == pytest.approx(math.cos(math.pi / 8.0))

    def test_snap_cell(self):
        mask = ~self.gvd.obstacles
        assert snap_cell(self.gvd, mask, (1.05, 1.05), 0.2, 0.14) == CellIndex(10, 10)
        assert snap_cell(self.gvd, mask, (1.0, 1.0), 0.2, 0.14) in {
            CellIndex(9, 9), CellIndex(10, 9), CellIndex(9, 10), CellIndex(10, 10)}
        assert snap_cell(self.gvd, np.zeros_like(mask), (1.05, 1.05), 0.2, 0.14) is None


class TestLatticePlan:
    """状態格子A*探索のテスト"""

    @classmethod
    def setup_class(cls):
        cls.prims = generate_primitives(RESOLUTION, HALF_WIDTH)
        cls.limits = SpeedLimits(v_max=1.0, omega_max=1.0, a_max=1.0)
        cls.gvd = build_gvd(two_walls_grid(width=40))
        cls.corridor = full_space_corridor(cls.gvd)
        cls.field = build_field(cls.gvd, cls.corridor, d_o_min=2.0 * cls.prims.r_c)

    def run(self, start, goal, corridor=None, field=None):
        return plan(start, goal, self.gvd, corridor or self.corridor, field or self.field,
                    self.prims, self.limits)

    def test_straight_corridor(self):
        """直線通路では直進のみの経路になる"""
        result = self.run(Pose(0.55, 0.55, 0.0), Pose(2.95, 0.55, 0.0))
        assert result.cost == pytest.approx(2.4, abs=1e-9)
        assert all(p.y == pytest.approx(0.55) for p in result.path)
        assert (result.path[0].x, result.path[-1].x) == pytest.approx((0.55, 2.95))
        assert result.states[0] == LatticeState(5, 5, 0)
        assert result.states[-1] == LatticeState(29, 5, 0)
        assert result.expansions > 0
        assert result.graph_size >= result.expansions

    def test_cost_not_below_straight_line_time(self):
        start, goal = Pose(0.55, 0.35, 0.0), Pose(3.15, 0.75, 0.0)
        result = self.run(start, goal)
        assert result.cost >= start.distance_to(goal) / self.limits.v_max - 1e-9

    def test_turn_around(self):
        result = self.run(Pose(0.55, 0.55, 0.0), Pose(2.05, 0.55, math.pi))
        assert result.states[-1].ih == 8
        assert result.path[-1].theta == pytest.approx(heading_angle(8))
        assert result.cost > 1.5

    def test_heuristic_admissible_at_start(self):
        start, goal = Pose(0.55, 0.55, 0.0), Pose(3.45, 0.75, 0.0)
        result = self.run(start, goal)
        heuristic = build_h2d(self.gvd, self.corridor, result.states[-1].cell, self.field, self.limits)
        assert DEFAULT_HEURISTIC_SCALE * heuristic.at(result.states[0].cell) <= result.cost + 1e-9

    def test_start_equals_goal(self):
        result = self.run(Pose(1.05, 0.55, 0.0), Pose(1.05, 0.55, 0.0))
        assert result.cost == 0.0
        assert result.graph_size == 1
        assert len(result.path) == 1

    def test_expansions_stay_in_corridor(self):
        path = shortest_voronoi_path(self.gvd, CellIndex(5, 5), CellIndex(29, 5), self.prims.r_c)
        corridor = build_corridor(self.gvd, path)
        field = build_field(self.gvd, corridor, d_o_min=2.0 * self.prims.r_c)
        result = self.run(Pose(0.55, 0.55, 0.0), Pose(2.95, 0.55, 0.0), corridor, field)
        assert all(corridor.mask[iy, ix] for ix, iy in result.expanded_cells)
        assert result.cost == pytest.approx(2.4, abs=1e-9)

    def test_deterministic(self):
        a = self.run(Pose(0.55, 0.35, 0.0), Pose(3.15, 0.75, 0.0))
        b = self.run(Pose(0.55, 0.35, 0.0), Pose(3.15, 0.75, 0.0))
        assert a.states == b.states
        assert a.cost == b.cost
        assert a.expansions == b.expansions

    def test_walled_off_goal(self):
        gvd = build_gvd(walled_room_grid(width=40, height=12, divider=20))
        corridor = full_space_corridor(gvd)
        field = build_field(gvd, corridor, d_o_min=0.3)
        with pytest.raises(NoPathError):
            plan(Pose(0.55, 0.55, 0.0), Pose(3.05, 0.55, 0.0), gvd, corridor, field, self.prims, self.limits)

    def test_goal_off_the_map(self):
        with pytest.raises(PreconditionError):
            self.run(Pose(0.55, 0.55, 0.0), Pose(5.0, 0.55, 0.0))
