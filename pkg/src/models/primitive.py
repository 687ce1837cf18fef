import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple

NUM_HEADINGS = 16

# Direction classes (i, j) with |i|, |j| <= 2, counter-clockwise from east.
HEADING_VECTORS: Tuple[Tuple[int, int], ...] = (
    (1, 0), (2, 1), (1, 1), (1, 2),
    (0, 1), (-1, 2), (-1, 1), (-2, 1),
    (-1, 0), (-2, -1), (-1, -1), (-1, -2),
    (0, -1), (1, -2), (1, -1), (2, -1),
)


def normalize_angle(theta: float) -> float:
    """Wrap to [0, 2*pi)"""
    two_pi = 2.0 * math.pi
    theta = math.fmod(theta, two_pi)
    if theta < 0.0:
        theta += two_pi
    if theta >= two_pi:
        theta -= two_pi
    return theta


def heading_angle(index: int) -> float:
    i, j = HEADING_VECTORS[index % NUM_HEADINGS]
    return normalize_angle(math.atan2(j, i))


def angle_difference(a: float, b: float) -> float:
    """Smallest absolute difference between two angles"""
    d = abs(normalize_angle(a) - normalize_angle(b))
    return min(d, 2.0 * math.pi - d)


def nearest_heading(theta: float) -> int:
    return min(range(NUM_HEADINGS), key=lambda h: (angle_difference(theta, heading_angle(h)), h))


class PrimitiveKind(Enum):
    STRAIGHT = "straight"
    CURVE = "curve"
    ROTATE = "rotate"
    BACKWARD = "backward"


@dataclass
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        self.theta = normalize_angle(self.theta)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.theta)

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass
class MotionPrimitive:
    start_heading: int
    end_heading: int
    poses: List[Pose]
    swath: List[Tuple[int, int]] = field(default_factory=list)
    kind: PrimitiveKind = PrimitiveKind.STRAIGHT
    end_cell: Tuple[int, int] = (0, 0)
    center_cells: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.poses)

    @property
    def length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.poses, self.poses[1:]))

    @property
    def delta_theta(self) -> float:
        return angle_difference(self.poses[-1].theta, self.poses[0].theta)

    @property
    def is_rotation(self) -> bool:
        return self.kind == PrimitiveKind.ROTATE

    def __repr__(self) -> str:
        return (f"MotionPrimitive({self.kind.value}, {self.start_heading}->{self.end_heading}, "
                f"end={self.end_cell}, n={self.n}, swath={len(self.swath)})")


@dataclass
class PrimitiveSet:
    resolution: float
    footprint: float
    primitives: List[MotionPrimitive] = field(default_factory=list)
    headings: int = NUM_HEADINGS

    @property
    def r_c(self) -> float:
        """Circumscribed radius of the square footprint"""
        return self.footprint * math.sqrt(2.0)

    def by_heading(self) -> Dict[int, List[MotionPrimitive]]:
        grouped: Dict[int, List[MotionPrimitive]] = {h: [] for h in range(self.headings)}
        for prim in self.primitives:
            grouped[prim.start_heading].append(prim)
        return grouped

    def for_heading(self, heading: int) -> List[MotionPrimitive]:
        return [p for p in self.primitives if p.start_heading == heading]

    def __len__(self) -> int:
        return len(self.primitives)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrimitiveSet):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.footprint == other.footprint
            and self.headings == other.headings
            and self.primitives == other.primitives
        )


@dataclass
class PrimitiveConfig:
    """Design parameters of the generated primitive set"""
    straight_lengths: Tuple[int, ...] = (1, 3)
    turn_scale: int = 2
    max_curvature: float = 10.0
    # 0 means half the grid resolution
    sample_spacing: float = 0.0
    allow_backward: bool = False

    def __post_init__(self):
        if self.turn_scale < 1:
            raise ValueError("turn_scale must be at least 1")
        if not self.straight_lengths or min(self.straight_lengths) < 1:
            raise ValueError("straight_lengths must be positive cell counts")
        if self.max_curvature <= 0:
            raise ValueError("max_curvature must be positive")
