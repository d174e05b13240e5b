import numpy as np
from dataclasses import dataclass, field
from OpticsObjects import as_complex_array
from OpticsObjects.TransverseGrid import TransverseGrid
from functions.errors import ShapeError


@dataclass(eq=False)
class ComplexField:
    grid: TransverseGrid
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitude = as_complex_array(self.amplitude, "amplitude")
        if self.amplitude.shape[0] != self.grid.n_points:
            raise ShapeError(f"amplitude has {self.amplitude.shape[0]} samples, grid has {self.grid.n_points}")

    @classmethod
    def zeros(cls, grid: TransverseGrid) -> "ComplexField":
        return cls(grid, np.zeros(grid.n_points, dtype=np.complex128))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @property
    def total_power(self) -> float:
        return float(np.sum(self.intensity) * self.grid.dx)
