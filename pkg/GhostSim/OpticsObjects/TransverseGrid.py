import math
import numpy as np
from dataclasses import dataclass
from functions.errors import InvalidArgumentError


@dataclass(frozen=True)
class TransverseGrid:
    """Uniform 1D transverse sampling; sample i sits at x_min + i*dx."""
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidArgumentError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidArgumentError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise InvalidArgumentError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    def coordinate(self, i: int) -> float:
        return self.x_min + i * self.dx

    @property
    def coordinates(self) -> np.ndarray:
        # computed from the index every time, never accumulated
        return self.x_min + np.arange(self.n_points, dtype=np.float64) * self.dx

    def nearest_index(self, x: float) -> int:
        return int(min(max(round((x - self.x_min) / self.dx), 0), self.n_points - 1))

    def contains(self, x: float) -> bool:
        slack = 1e-9 * self.dx
        return self.x_min - slack <= x <= self.x_max + slack


def make_grid(x_min: float, x_max: float, n_points: int) -> TransverseGrid:
    """
    Build a transverse grid.

    Args:
        x_min (float): First sample coordinate in meters.
        x_max (float): Last sample coordinate in meters.
        n_points (int): Sample count, at least 2.

    Returns:
        TransverseGrid: grid with spacing (x_max - x_min) / (n_points - 1).
    """
    return TransverseGrid(float(x_min), float(x_max), n_points)


def centered_grid(half_width: float, n_points: int, center: float = 0.0) -> TransverseGrid:
    return make_grid(center - half_width, center + half_width, n_points)
