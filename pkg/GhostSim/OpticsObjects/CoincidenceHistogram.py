import numpy as np
from dataclasses import dataclass, field
from functions.errors import InvalidArgumentError


@dataclass(eq=False)
class CoincidenceHistogram:
    """
    Start-stop time-difference histogram (TAC + MCA).

    bin_centers are t_stop - t_start in seconds; bins are right-closed,
    (center - bin_width/2, center + bin_width/2].
    """
    bin_width: float
    bin_centers: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    total_starts: int
    total_stops: int
    delay: float = 0.0

    def __post_init__(self):
        self.bin_centers = np.asarray(self.bin_centers, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if not self.bin_width > 0:
            raise InvalidArgumentError("bin_width must be positive")
        if self.bin_centers.shape != self.counts.shape:
            raise InvalidArgumentError("counts and bin_centers differ in length")
        if np.any(self.counts < 0):
            raise InvalidArgumentError("counts must be non-negative")
        if int(self.counts.sum()) > self.total_starts:
            raise InvalidArgumentError("more coincidences than starts")

    @property
    def n_bins(self) -> int:
        return int(self.counts.shape[0])
