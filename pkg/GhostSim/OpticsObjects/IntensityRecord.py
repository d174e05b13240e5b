import numpy as np
from dataclasses import dataclass, field
from OpticsObjects import as_real_array
from functions.errors import InvalidArgumentError


@dataclass(eq=False)
class IntensityRecord:
    i1: float  # bucket
    i2: np.ndarray = field(repr=False)  # reference arm, one value per detector sample

    def __post_init__(self):
        self.i1 = float(self.i1)
        self.i2 = as_real_array(self.i2, "i2")
        if self.i1 < 0 or np.any(self.i2 < 0):
            raise InvalidArgumentError("intensities must be non-negative")
