from .map_loader import MapLoader, load_map, save_map
from .primitive_loader import PrimitiveLoader, load_primitives, save_primitives
from .scenario_loader import ScenarioLoader, default_maze_scenarios
from .maze_generator import MazeLayout, generate_maze, maze_layout
from .validators import ScenarioValidator

__all__ = [
    "MapLoader",
    "load_map",
    "save_map",
    "PrimitiveLoader",
    "load_primitives",
    "save_primitives",
    "ScenarioLoader",
    "default_maze_scenarios",
    "MazeLayout",
    "generate_maze",
    "maze_layout",
    "ScenarioValidator",
]
