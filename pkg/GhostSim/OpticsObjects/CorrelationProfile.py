import numpy as np
from dataclasses import dataclass, field
from typing import Optional
from OpticsObjects import as_real_array
from functions.errors import ShapeError, InvalidArgumentError

NORMALIZATIONS = ("fluctuation", "raw_g2")
ERROR_METHODS = ("none", "batch_means", "jackknife")


@dataclass(eq=False)
class CorrelationProfile:
    """
    Correlation image over x2.

    normalization "fluctuation" holds delta g2 (background removed);
    "raw_g2" holds 1 + delta g2, comparable to the pointlike model.
    """
    x2: np.ndarray = field(repr=False)
    delta_g2: np.ndarray = field(repr=False)
    std_err: np.ndarray = field(repr=False)
    n_realizations: int = 0
    normalization: str = "fluctuation"
    error_method: str = "none"
    method: str = "analytic"
    z2: Optional[float] = None

    def __post_init__(self):
        self.x2 = as_real_array(self.x2, "x2")
        self.delta_g2 = as_real_array(self.delta_g2, "delta_g2")
        self.std_err = as_real_array(self.std_err, "std_err")
        if not (self.x2.shape == self.delta_g2.shape == self.std_err.shape):
            raise ShapeError("x2, delta_g2 and std_err must share one length")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidArgumentError(f"unknown normalization '{self.normalization}'")
        if self.error_method not in ERROR_METHODS:
            raise InvalidArgumentError(f"unknown error method '{self.error_method}'")

    def __len__(self) -> int:
        return self.x2.shape[0]

    def as_raw_g2(self) -> "CorrelationProfile":
        if self.normalization == "raw_g2":
            return self
        return CorrelationProfile(self.x2, 1.0 + self.delta_g2, self.std_err, self.n_realizations,
                                  "raw_g2", self.error_method, self.method, self.z2)

    def as_fluctuation(self) -> "CorrelationProfile":
        if self.normalization == "fluctuation":
            return self
        return CorrelationProfile(self.x2, self.delta_g2 - 1.0, self.std_err, self.n_realizations,
                                  "fluctuation", self.error_method, self.method, self.z2)
