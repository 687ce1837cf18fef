import json
import os
import tempfile
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from src.algorithms.primitives import generate_primitives
from src.data import (
    MapLoader,
    PrimitiveLoader,
    ScenarioLoader,
    ScenarioValidator,
    generate_maze,
    load_map,
    load_primitives,
    maze_layout,
    save_map,
    save_primitives,
)
from src.models import (
    CellState,
    MapFormatError,
    MapStructureError,
    MazeParameterError,
    OccupancyGrid,
    Pose,
    PrimitiveFileError,
    PrimitiveKind,
    ScenarioError,
    SearchMode,
)
from tests.fixtures import small_maze_record, walled_room_grid

META = "resolution: 0.1\n"


def pgm(width, height, pixels, maxval=255):
    return f"P5\n{width} {height}\n{maxval}\n".encode("ascii") + bytes(pixels)


class TestMapLoader:
    """占有格子地図の読み書きのテスト"""

    def setup_method(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.dir = Path(self.temp_dir.name)

    def teardown_method(self):
        self.temp_dir.cleanup()

    def write_map(self, data: bytes, meta: str = META) -> Path:
        image = self.dir / "map.pgm"
        image.write_bytes(data)
        (self.dir / "map.meta").write_text(meta, encoding="utf-8")
        return image

    def test_round_trip(self):
        grid = OccupancyGrid(width=7, height=5, resolution=0.05, origin=(1.0, -2.0))
        grid.cells[0, :] = CellState.OCCUPIED.value
        grid.cells[3, 2] = CellState.UNKNOWN.value
        path = save_map(grid, self.dir / "room.pgm")
        assert path.exists()
        assert (self.dir / "room.meta").exists()
        assert load_map(path) == grid

    def test_load_from_sidecar(self):
        grid = walled_room_grid(width=20, height=10)
        save_map(grid, self.dir / "room.pgm")
        assert load_map(self.dir / "room.meta") == grid

    def test_thresholds(self):
        grid = load_map(self.write_map(pgm(3, 1, [0, 128, 255])))
        assert grid.cells[0].tolist() == [
            CellState.OCCUPIED.value, CellState.UNKNOWN.value, CellState.FREE.value]

    def test_negate(self):
        grid = load_map(self.write_map(pgm(2, 1, [0, 255]), META + "negate: 1\n"))
        assert grid.cells[0].tolist() == [CellState.FREE.value, CellState.OCCUPIED.value]

    def test_top_image_row_is_top_of_map(self):
        grid = load_map(self.write_map(pgm(1, 2, [0, 255])))
        assert grid.cells[1, 0] == CellState.OCCUPIED.value
        assert grid.cells[0, 0] == CellState.FREE.value

    def test_metadata(self):
        meta = MapLoader.parse_metadata("image: a.pgm\nresolution: 0.05\norigin_x: -1.5  # comment\n")
        assert meta["resolution"] == 0.05
        assert meta["origin_x"] == -1.5
        assert meta["image"] == "a.pgm"

    def test_metadata_errors(self):
        with pytest.raises(MapFormatError):
            MapLoader.parse_metadata("origin_x: 0.0\n")
        with pytest.raises(MapFormatError):
            MapLoader.parse_metadata("resolution: fast\n")
        with pytest.raises(MapFormatError) as excinfo:
            MapLoader.parse_metadata("resolution: 0.1\nno separator\n")
        assert excinfo.value.line == 2
        with pytest.raises(MapFormatError):
            MapLoader.parse_metadata("resolution: 0.1\nfree_thresh: 0.6\n")

    def test_empty_file(self):
        with pytest.raises(MapFormatError):
            MapLoader.parse_pgm(b"")

    def test_header_errors(self):
        with pytest.raises(MapFormatError) as excinfo:
            MapLoader.parse_pgm(b"P2\n1 1\n255\n" + bytes([0]))
        assert excinfo.value.line == 1
        with pytest.raises(MapFormatError) as excinfo:
            MapLoader.parse_pgm(b"P5\n# comment\nx 1\n255\n" + bytes([0]))
        assert excinfo.value.line == 3
        with pytest.raises(MapFormatError):
            MapLoader.parse_pgm(b"P5\n1 1\n")

    def test_payload_mismatch(self):
        with pytest.raises(MapStructureError):
            MapLoader.parse_pgm(pgm(3, 2, [0, 0, 0, 0]))

    def test_missing_sidecar(self):
        image = self.dir / "lonely.pgm"
        image.write_bytes(pgm(1, 1, [255]))
        with pytest.raises(FileNotFoundError):
            load_map(image)


class TestPrimitiveLoader:
    """プリミティブファイルの読み書きのテスト"""

    @classmethod
    def setup_class(cls):
        cls.prims = generate_primitives(0.1, 0.1)

    def test_round_trip(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".txt", delete=False, encoding="utf-8") as f:
            temp_path = f.name
        try:
            save_primitives(self.prims, temp_path)
            assert load_primitives(temp_path) == self.prims
        finally:
            os.unlink(temp_path)

    def test_truncated_file(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".txt", delete=False, encoding="utf-8") as f:
            temp_path = f.name
        try:
            save_primitives(self.prims, temp_path)
            text = Path(temp_path).read_text(encoding="utf-8")
            with pytest.raises(PrimitiveFileError):
                PrimitiveLoader.parse(text[: len(text) // 2])
        finally:
            os.unlink(temp_path)

    def test_minimal_block(self):
        """kind と end_cell は姿勢列から推定する"""
        text = "\n".join([
            "version: 1", "resolution: 0.1", "num_headings: 16", "footprint: 0.1", "primitives: 1",
            "primitive", "start_heading: 0", "end_heading: 0", "n: 2",
            "0.0 0.0 0.0", "0.1 0.0 0.0", "swath: 1", "0 0", "end",
        ])
        prims = PrimitiveLoader.parse(text)
        prim = prims.primitives[0]
        assert prim.kind == PrimitiveKind.STRAIGHT
        assert prim.end_cell == (1, 0)
        assert prim.center_cells == [(0, 0)]

    def test_header_errors(self):
        with pytest.raises(PrimitiveFileError):
            PrimitiveLoader.parse("version: 2\n")
        with pytest.raises(PrimitiveFileError):
            PrimitiveLoader.parse("version: 1\nresolution: -0.1\nnum_headings: 16\nfootprint: 0.1\nprimitives: 0\n")
        with pytest.raises(PrimitiveFileError):
            PrimitiveLoader.parse("version: 1\nresolution: 0.1\nnum_headings: 16\nfootprint: 0.1\n"
                                  "primitives: 0\nleftover\n")

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_primitives("no_such_primitives.txt")


class TestScenarioLoader:
    """シナリオファイルの読み込みのテスト"""

    def test_parse_text(self):
        text = "\n".join([
            "# two scenarios",
            "name: first",
            "map: a.pgm",
            "start: 1 2 0",
            "goal: 3 4",
            "---",
            "name: second",
            "maze_width: 60",
            "start: room 0 0",
            "goal: room -1 -1 1.57",
            "use_voronoi_field: false",
        ])
        records = ScenarioLoader.parse_text(text)
        assert len(records) == 2
        assert records[0]["start"] == "1 2 0"
        assert records[1]["maze_width"] == 60
        assert records[1]["use_voronoi_field"] is False

    def test_parse_errors(self):
        with pytest.raises(ScenarioError):
            ScenarioLoader.parse_text("speed: 3\n")
        with pytest.raises(ScenarioError):
            ScenarioLoader.parse_text("name: a\nname: b\n")
        with pytest.raises(ScenarioError):
            ScenarioLoader.parse_text("v_max: fast\n")
        with pytest.raises(ScenarioError):
            ScenarioLoader.parse_text("no separator\n")

    def test_from_dict_errors(self):
        with pytest.raises(ScenarioError):
            ScenarioLoader.from_dict({"name": "x", "map": "a.pgm", "goal": "1 1"})
        with pytest.raises(ScenarioError):
            ScenarioLoader.from_dict({"name": "x", "start": "0 0", "goal": "1 1"})
        with pytest.raises(ScenarioError):
            ScenarioLoader.from_dict({"name": "x", "map": "a.pgm", "start": "0", "goal": "1 1"})
        with pytest.raises(ScenarioError):
            ScenarioLoader.from_dict({"name": "x", "map": "a.pgm", "start": "room 0 0", "goal": "1 1"})
        with pytest.raises(ScenarioError):
            ScenarioLoader.from_dict({"name": "x", "map": "a.pgm", "start": "0 0", "goal": "1 1", "mode": "fast"})

    def test_room_poses(self):
        scenario = ScenarioLoader.from_dict(small_maze_record())
        assert (scenario.start.x, scenario.start.y) == pytest.approx((1.1, 1.1))
        assert (scenario.goal.x, scenario.goal.y) == pytest.approx((4.7, 4.7))
        assert scenario.maze.width == 60
        assert scenario.footprint == 0.2
        assert scenario.r_c == pytest.approx(0.2 * np.sqrt(2.0))
        assert scenario.field_threshold == pytest.approx(2.0 * scenario.r_c)

    def test_load_from_file(self):
        text = "name: local\nmap: maps/a.pgm\nstart: 1 1\ngoal: 2 2 3.14\n"
        with tempfile.NamedTemporaryFile(mode="w", suffix=".txt", delete=False, encoding="utf-8") as f:
            f.write(text)
            temp_path = f.name
        try:
            scenarios = ScenarioLoader.load_from_file(temp_path, defaults={"footprint": 0.3, "v_max": 2.0})
            assert len(scenarios) == 1
            scenario = scenarios[0]
            assert Path(scenario.map_path) == Path(temp_path).parent / "maps" / "a.pgm"
            assert scenario.footprint == 0.3
            assert scenario.limits.v_max == 2.0
            assert scenario.goal.theta == pytest.approx(3.14)
        finally:
            os.unlink(temp_path)

    def test_load_json(self):
        data = {"scenarios": [
            {"name": "a", "map": "/maps/a.pgm", "start": [0, 0, 0], "goal": [1, 1, 0], "mode": "full"},
            {"map": "/maps/b.pgm", "start": "0 0", "goal": "1 1"},
        ]}
        with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False, encoding="utf-8") as f:
            json.dump(data, f)
            temp_path = f.name
        try:
            scenarios = ScenarioLoader.load_from_file(temp_path)
            assert [sc.mode for sc in scenarios] == [SearchMode.FULL_SPACE, SearchMode.CORRIDOR]
            assert scenarios[1].name == f"{Path(temp_path).stem}_2"
        finally:
            os.unlink(temp_path)

    def test_sample_file(self):
        path = Path(__file__).parent.parent / "data" / "sample_scenarios.txt"
        scenarios = ScenarioLoader.load_from_file(path)
        assert [sc.name for sc in scenarios] == [
            "corner_to_corner", "across_the_middle", "corner_to_corner_no_field"]
        assert scenarios[1].local_length == 20.0
        assert scenarios[2].use_voronoi_field is False
        assert ScenarioValidator.validate_scenarios(scenarios) == []

    def test_invalid_json(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False, encoding="utf-8") as f:
            f.write("{not json")
            temp_path = f.name
        try:
            with pytest.raises(ScenarioError):
                ScenarioLoader.load_from_file(temp_path)
        finally:
            os.unlink(temp_path)

    def test_save_to_text(self):
        scenarios = [
            ScenarioLoader.from_dict(small_maze_record(local_length=2.0)),
            ScenarioLoader.from_dict({"name": "room", "map": "/maps/room.pgm", "start": "1 1.5 0",
                                      "goal": "4.5 1.5 3.0", "mode": "full", "d_o_min": 0.5}),
        ]
        with tempfile.NamedTemporaryFile(mode="w", suffix=".txt", delete=False, encoding="utf-8") as f:
            temp_path = f.name
        try:
            ScenarioLoader.save_to_text(scenarios, temp_path)
            loaded = ScenarioLoader.load_from_file(temp_path)
            assert [sc.to_dict() for sc in loaded] == [sc.to_dict() for sc in scenarios]
        finally:
            os.unlink(temp_path)


class TestMazeGenerator:
    """迷路生成のテスト"""

    def test_deterministic(self):
        assert generate_maze(60, 60, 14, seed=1) == generate_maze(60, 60, 14, seed=1)
        assert generate_maze(200, 200, 14, seed=1) != generate_maze(200, 200, 14, seed=2)

    def test_rooms_connected(self):
        grid = generate_maze(200, 200, 14, seed=3)
        free = grid.cells == CellState.FREE.value
        _, count = ndimage.label(free)
        assert count == 1
        assert not free[0].any() and not free[:, 0].any()

    def test_room_centres_are_free(self):
        layout = maze_layout(200, 200, 14)
        grid = generate_maze(200, 200, 14, seed=0)
        assert (layout.rooms_x, layout.rooms_y) == (10, 10)
        for i, j in [(0, 0), (4, 7), (9, 9)]:
            x, y = layout.room_center(i, j)
            ix, iy = int(x / grid.resolution), int(y / grid.resolution)
            assert grid.cells[iy, ix] == CellState.FREE.value

    def test_parameter_errors(self):
        with pytest.raises(MazeParameterError):
            generate_maze(10, 10, 3)
        with pytest.raises(MazeParameterError):
            generate_maze(60, 60, 2)
        with pytest.raises(MazeParameterError):
            generate_maze(60, 60, 40)
        with pytest.raises(MazeParameterError):
            generate_maze(60, 60, 14, loop_fraction=1.5)


class TestScenarioValidator:
    """シナリオ検証のテスト"""

    def setup_method(self):
        self.grid = walled_room_grid(width=60, height=30)
        self.scenario = ScenarioLoader.from_dict(small_maze_record())

    def test_valid_scenario(self):
        assert ScenarioValidator.validate_scenarios([self.scenario]) == []

    def test_duplicate_names(self):
        errors = ScenarioValidator.validate_scenarios([self.scenario, self.scenario.with_mode(SearchMode.FULL_SPACE)])
        assert any("Duplicate" in e for e in errors)

    def test_invalid_values(self):
        self.scenario.footprint = 0.0
        self.scenario.w_r = 0.0
        errors = ScenarioValidator.validate_scenario(self.scenario)
        assert len(errors) == 2

    def test_zero_reference_weight_without_field(self):
        self.scenario.w_r = 0.0
        self.scenario.use_voronoi_field = False
        assert ScenarioValidator.validate_scenario(self.scenario) == []

    def test_missing_map_file(self):
        scenario = ScenarioLoader.from_dict({"name": "x", "map": "/no/such/map.pgm", "start": "1 1", "goal": "2 2"})
        assert len(ScenarioValidator.validate_scenario(scenario)) == 1

    def test_poses_against_map(self):
        self.scenario.start = Pose(0.05, 1.5)
        self.scenario.goal = Pose(9.0, 1.5)
        errors = ScenarioValidator.validate_poses(self.scenario, self.grid)
        assert len(errors) == 2
        assert "blocked" in errors[0]
        assert "outside" in errors[1]

    def test_map_warnings(self):
        assert ScenarioValidator.validate_map(self.grid) == []
        empty = OccupancyGrid(width=5, height=5, resolution=0.1)
        assert any("no obstacle" in w for w in ScenarioValidator.validate_map(empty))
