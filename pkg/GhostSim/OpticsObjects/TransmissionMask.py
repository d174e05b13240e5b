import numpy as np
from dataclasses import dataclass, field
from typing import List, Tuple
from OpticsObjects import as_complex_array, logging
from OpticsObjects.TransverseGrid import TransverseGrid
from functions.errors import InvalidArgumentError

MAX_MODULUS = 1 + 1e-12


@dataclass(eq=False)
class TransmissionMask:
    """
    Sampled complex transmission T(x) on a transverse grid.

    features lists the open windows as (center, width) pairs; downstream
    metrics use them for peak matching and baseline neighborhoods.
    """
    grid: TransverseGrid
    t: np.ndarray = field(repr=False)
    features: List[Tuple[float, float]] = field(default_factory=list)
    name: str = "custom"

    def __post_init__(self):
        self.t = as_complex_array(self.t, "t")
        if self.t.shape[0] != self.grid.n_points:
            raise InvalidArgumentError(f"mask has {self.t.shape[0]} samples, grid has {self.grid.n_points}")
        if np.any(np.abs(self.t) > MAX_MODULUS):
            raise InvalidArgumentError("mask transmission modulus exceeds 1")

    @property
    def power_transmission(self) -> np.ndarray:
        return np.abs(self.t) ** 2

    @classmethod
    def from_features(cls, grid: TransverseGrid, features: List[Tuple[float, float]], name: str = "custom") -> "TransmissionMask":
        """Top-hat windows; sample x is open when |x - c| <= w/2 (with a 1e-9*dx slack)."""
        x = grid.coordinates
        slack = 1e-9 * grid.dx
        t = np.zeros(grid.n_points, dtype=np.complex128)
        for center, width in features:
            if not width > 0:
                raise InvalidArgumentError(f"feature width must be positive, got {width}")
            inside = np.abs(x - center) <= 0.5 * width + slack
            if not np.any(inside):
                logging.warning(f"feature at {center} m (width {width} m) covers no sample of the mask grid")
            t[inside] = 1.0
        return cls(grid, t, [(float(c), float(w)) for c, w in features], name)

    @classmethod
    def double_slit(cls, grid: TransverseGrid, width: float, center_separation: float, center: float = 0.0) -> "TransmissionMask":
        if not center_separation > width:
            raise InvalidArgumentError("slit center separation must exceed the slit width")
        half = 0.5 * center_separation
        return cls.from_features(grid, [(center - half, width), (center + half, width)], "double_slit")

    @classmethod
    def pinhole_pair(cls, grid: TransverseGrid, d1: float, d2: float, separation: float, center: float = 0.0) -> "TransmissionMask":
        """Two top-hat windows of widths d1 (left) and d2 (right), separation center to center."""
        if not separation > 0.5 * (d1 + d2):
            raise InvalidArgumentError("pinholes overlap")
        half = 0.5 * separation
        return cls.from_features(grid, [(center - half, d1), (center + half, d2)], "pinhole_pair")

    @classmethod
    def single_slit(cls, grid: TransverseGrid, width: float, center: float = 0.0) -> "TransmissionMask":
        return cls.from_features(grid, [(center, width)], "single_slit")

    @classmethod
    def single_point(cls, grid: TransverseGrid, position: float = 0.0) -> "TransmissionMask":
        """One open sample (the grid sample nearest position)."""
        t = np.zeros(grid.n_points, dtype=np.complex128)
        i = grid.nearest_index(position)
        t[i] = 1.0
        return cls(grid, t, [(grid.coordinate(i), grid.dx)], "single_point")

    @classmethod
    def uniform(cls, grid: TransverseGrid) -> "TransmissionMask":
        return cls(grid, np.ones(grid.n_points, dtype=np.complex128), [], "uniform")

    @classmethod
    def opaque(cls, grid: TransverseGrid) -> "TransmissionMask":
        return cls(grid, np.zeros(grid.n_points, dtype=np.complex128), [], "opaque")
