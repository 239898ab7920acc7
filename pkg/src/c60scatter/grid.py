"""Uniform radial grids.

The Numerov integrator downstream requires uniform spacing, so this is the
single grid type used everywhere.  r_max = 28 bohr is the practical
infinity for every bundled model; 4096 points resolve the sharpest
resonance widths that occur in the default energy window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError

DEFAULT_R_MAX = 28.0
DEFAULT_N_POINTS = 4096


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = i*h on [0, r_max], h = r_max/(n_points-1)."""

    r_max: float = DEFAULT_R_MAX
    n_points: int = DEFAULT_N_POINTS
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.r_max <= 0.0:
            raise GridError(f"r_max must be positive, got {self.r_max}")
        if self.n_points < 16:
            raise GridError(f"n_points must be at least 16, got {self.n_points}")
        pts = np.linspace(0.0, self.r_max, self.n_points)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def h(self) -> float:
        return self.r_max / (self.n_points - 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RadialGrid)
            and self.r_max == other.r_max
            and self.n_points == other.n_points
        )

    def __hash__(self) -> int:
        return hash((self.r_max, self.n_points))

    def index_of(self, r: float) -> int:
        """Nearest grid index to radius r."""
        return int(round(r / self.h))
