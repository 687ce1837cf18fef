from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .grid import CellIndex


@dataclass
class VoronoiPath:
    """Grid path L1 + L3 + L2 from the start cell to the goal cell.

    `segments` holds the index of C1 and C2 inside `cells`, so that
    cells[:c1+1] is L1, cells[c1:c2+1] is L3 and cells[c2:] is L2.
    """
    cells: List[CellIndex]
    segments: Tuple[int, int] = (0, 0)

    @property
    def start(self) -> CellIndex:
        return self.cells[0]

    @property
    def goal(self) -> CellIndex:
        return self.cells[-1]

    @property
    def l1(self) -> List[CellIndex]:
        return self.cells[: self.segments[0] + 1]

    @property
    def l3(self) -> List[CellIndex]:
        return self.cells[self.segments[0]: self.segments[1] + 1]

    @property
    def l2(self) -> List[CellIndex]:
        return self.cells[self.segments[1]:]

    def length_cells(self) -> float:
        total = 0.0
        for a, b in zip(self.cells, self.cells[1:]):
            total += np.sqrt(2.0) if (a.ix != b.ix and a.iy != b.iy) else 1.0
        return total

    def __len__(self) -> int:
        return len(self.cells)


@dataclass
class VoronoiCorridor:
    """Boolean [iy, ix] membership mask grown from a VoronoiPath.

    `source` is None for the full-space baseline, where the mask is every
    traversable cell.
    """
    mask: np.ndarray = field(repr=False)
    source: VoronoiPath = None

    @property
    def area_cells(self) -> int:
        return int(np.count_nonzero(self.mask))

    def contains(self, c: CellIndex) -> bool:
        h, w = self.mask.shape
        return 0 <= c.ix < w and 0 <= c.iy < h and bool(self.mask[c.iy, c.ix])

    @property
    def is_full_space(self) -> bool:
        return self.source is None

    def __repr__(self) -> str:
        kind = "full-space" if self.is_full_space else f"path={len(self.source)}"
        return f"VoronoiCorridor(cells={self.area_cells}, {kind})"
