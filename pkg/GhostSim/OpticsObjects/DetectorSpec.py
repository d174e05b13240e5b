from dataclasses import dataclass
from functions.errors import InvalidArgumentError


@dataclass(frozen=True)
class DetectorSpec:
    mean_rate: float  # counts per second at unit mean intensity
    jitter_sigma: float = 0.0  # Gaussian timing jitter std, seconds
    dead_time: float = 0.0

    def __post_init__(self):
        if not self.mean_rate > 0:
            raise InvalidArgumentError(f"mean_rate must be positive, got {self.mean_rate}")
        if self.jitter_sigma < 0:
            raise InvalidArgumentError("jitter_sigma must be >= 0")
        if self.dead_time < 0:
            raise InvalidArgumentError("dead_time must be >= 0")
