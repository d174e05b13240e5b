from dataclasses import dataclass
from typing import Optional, Tuple
from OpticsObjects.TransverseGrid import TransverseGrid
from functions.errors import InvalidArgumentError

MAX_SEED = 2 ** 64 - 1


@dataclass
class EnsembleConfig:
    """
    Monte Carlo settings for the imaging estimator.

    bucket_window is the (lo, hi) interval of the object grid integrated by the
    bucket detector. detector_aperture is the full width of the collection window
    around each x2 sample (0 means an ideal point detector). When scan_step is set,
    x2 is reported every scan_step on a detector grid that is scan_step / k fine.
    """
    n_realizations: int
    master_seed: int
    source_grid: TransverseGrid
    object_grid: TransverseGrid
    detector_grid: TransverseGrid
    bucket_window: Tuple[float, float]
    detector_aperture: float = 0.0
    n_batches: int = 16
    threads: int = 1
    scan_step: Optional[float] = None
    block_size: int = 64

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n_realizations < 2:
            raise InvalidArgumentError(f"n_realizations must be >= 2, got {self.n_realizations}")
        if not 0 <= self.master_seed <= MAX_SEED:
            raise InvalidArgumentError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        lo, hi = self.bucket_window
        if not lo < hi:
            raise InvalidArgumentError(f"bucket window ({lo}, {hi}) is empty")
        if not (self.object_grid.contains(lo) and self.object_grid.contains(hi)):
            raise InvalidArgumentError("bucket window must lie within the object grid")
        if self.detector_aperture < 0:
            raise InvalidArgumentError("detector_aperture must be >= 0")
        if self.n_batches < 2:
            raise InvalidArgumentError("n_batches must be >= 2")
        if self.threads < 1:
            raise InvalidArgumentError("threads must be >= 1")
        if self.block_size < 1:
            raise InvalidArgumentError("block_size must be >= 1")
        if self.scan_step is not None:
            self.decimation()

    def decimation(self) -> int:
        """Detector-grid stride between reported x2 samples."""
        if self.scan_step is None:
            return 1
        ratio = self.scan_step / self.detector_grid.dx
        stride = int(round(ratio))
        if stride < 1 or abs(ratio - stride) > 1e-6 * ratio:
            raise InvalidArgumentError(
                f"scan_step {self.scan_step} m is not a multiple of the detector spacing {self.detector_grid.dx} m")
        return stride
