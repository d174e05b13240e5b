import math
import numpy as np
from dataclasses import dataclass, field
from typing import Optional, Tuple
from scipy.integrate import trapezoid
from OpticsObjects import as_real_array
from OpticsObjects.TransverseGrid import TransverseGrid
from functions.errors import InvalidArgumentError, DegenerateStatisticsError

PROFILES = ("uniform", "gaussian", "sampled")

# a Gaussian profile is integrated over this many 1/e^2 half-widths
GAUSSIAN_SUPPORT = 4.0


@dataclass(eq=False)
class SourceSpec:
    """
    Thermal source: wavelength, 1D intensity profile I_s(x') and coherence time.

    profile selects how half_width / samples are read:
      uniform  - I_s = 1 on [-half_width, half_width]
      gaussian - I_s = exp(-2 x^2 / half_width^2) (1/e^2 half-width)
      sampled  - samples on sample_grid, linearly interpolated, zero outside
    """
    wavelength: float
    profile: str = "uniform"
    half_width: Optional[float] = None
    coherence_time: float = 1e-10
    samples: Optional[np.ndarray] = field(default=None, repr=False)
    sample_grid: Optional[TransverseGrid] = None

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvalidArgumentError(f"wavelength must be positive, got {self.wavelength}")
        if not self.coherence_time > 0:
            raise InvalidArgumentError(f"coherence_time must be positive, got {self.coherence_time}")
        if self.profile not in PROFILES:
            raise InvalidArgumentError(f"unknown source profile '{self.profile}'")
        if self.profile == "sampled":
            if self.samples is None or self.sample_grid is None:
                raise InvalidArgumentError("sampled profile needs samples and sample_grid")
            self.samples = as_real_array(self.samples, "samples")
            if self.samples.shape[0] != self.sample_grid.n_points:
                raise InvalidArgumentError("samples do not match sample_grid")
            if np.any(self.samples < 0) or not np.all(np.isfinite(self.samples)):
                raise InvalidArgumentError("source profile must be finite and non-negative")
        elif self.half_width is None or not self.half_width > 0:
            raise InvalidArgumentError(f"{self.profile} profile needs a positive half_width")

    @classmethod
    def uniform(cls, wavelength: float, half_width: float, coherence_time: float = 1e-10) -> "SourceSpec":
        return cls(wavelength, "uniform", half_width, coherence_time)

    @classmethod
    def gaussian(cls, wavelength: float, half_width: float, coherence_time: float = 1e-10) -> "SourceSpec":
        return cls(wavelength, "gaussian", half_width, coherence_time)

    @classmethod
    def sampled(cls, wavelength: float, grid: TransverseGrid, values, coherence_time: float = 1e-10) -> "SourceSpec":
        return cls(wavelength, "sampled", None, coherence_time, samples=values, sample_grid=grid)

    def intensity(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.profile == "uniform":
            edge = self.half_width * (1 + 1e-12)
            return np.where(np.abs(x) <= edge, 1.0, 0.0)
        if self.profile == "gaussian":
            return np.exp(-2.0 * x ** 2 / self.half_width ** 2)
        return np.interp(x, self.sample_grid.coordinates, self.samples, left=0.0, right=0.0)

    def support(self) -> Tuple[float, float]:
        """Interval outside which I_s is (numerically) zero."""
        if self.profile == "uniform":
            return -self.half_width, self.half_width
        if self.profile == "gaussian":
            return -GAUSSIAN_SUPPORT * self.half_width, GAUSSIAN_SUPPORT * self.half_width
        nonzero = np.flatnonzero(self.samples > 0)
        if nonzero.size == 0:
            return self.sample_grid.x_min, self.sample_grid.x_max
        coords = self.sample_grid.coordinates
        lo = coords[max(nonzero[0] - 1, 0)]
        hi = coords[min(nonzero[-1] + 1, self.sample_grid.n_points - 1)]
        return float(lo), float(hi)

    @property
    def effective_half_width(self) -> float:
        """Half-width a that sets the coherence scale lambda*z/(2a)."""
        if self.profile in ("uniform", "gaussian"):
            return self.half_width
        lo, hi = self.support()
        return 0.5 * (hi - lo)

    def total_intensity(self) -> float:
        if self.profile == "uniform":
            return 2.0 * self.half_width
        if self.profile == "gaussian":
            return self.half_width * math.sqrt(math.pi / 2.0)
        return float(trapezoid(self.samples, dx=self.sample_grid.dx))

    def validate(self) -> None:
        """Raise when the profile integrates to zero (nothing to correlate)."""
        if not self.total_intensity() > 0:
            raise DegenerateStatisticsError("source profile has zero integral")
