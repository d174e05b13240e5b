import numpy as np
from dataclasses import dataclass, field
from OpticsObjects import as_real_array
from functions.errors import InvalidArgumentError


@dataclass(eq=False)
class PointlikeObject:
    """Object made of N point features, each with weight |T|^2."""
    feature_positions: np.ndarray = field(repr=False)
    feature_weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.feature_positions = as_real_array(self.feature_positions, "feature_positions")
        self.feature_weights = as_real_array(self.feature_weights, "feature_weights")
        if self.feature_positions.shape != self.feature_weights.shape:
            raise InvalidArgumentError("feature positions and weights differ in length")
        if self.feature_positions.shape[0] < 1:
            raise InvalidArgumentError("a pointlike object needs at least one feature")
        if np.any(self.feature_weights < 0) or not np.any(self.feature_weights > 0):
            raise InvalidArgumentError("feature weights must be non-negative and not all zero")

    @property
    def N(self) -> int:
        return int(self.feature_positions.shape[0])

    @classmethod
    def unit_features(cls, positions) -> "PointlikeObject":
        positions = np.asarray(positions, dtype=np.float64)
        return cls(positions, np.ones_like(positions))
