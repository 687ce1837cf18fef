from dataclasses import dataclass, field

import numpy as np


@dataclass
class VoronoiField:
    """Voronoi potential over the corridor.

    `d_o`, `d_v` and `rho` are [iy, ix] arrays. Cells outside the corridor
    hold d_v = inf; rho is 1 on obstacle cells and outside the corridor,
    which only matters for cost queries that graze them.
    """
    d_o: np.ndarray = field(repr=False)
    d_v: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    d_o_min: float = 1.0

    def max_rho(self) -> float:
        if not self.mask.any():
            return 0.0
        return float(self.rho[self.mask].max())

    def __repr__(self) -> str:
        return f"VoronoiField(cells={int(np.count_nonzero(self.mask))}, d_o_min={self.d_o_min:.3f})"
