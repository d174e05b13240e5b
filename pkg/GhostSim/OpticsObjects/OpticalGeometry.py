from dataclasses import dataclass
from functions.errors import InvalidArgumentError


@dataclass(frozen=True)
class OpticalGeometry:
    z1: float  # source -> object (bucket arm)
    z2: float  # source -> scanning detector (reference arm)

    def __post_init__(self):
        if not (self.z1 > 0 and self.z2 > 0):
            raise InvalidArgumentError(f"arm distances must be positive, got z1={self.z1}, z2={self.z2}")

    def swapped(self) -> "OpticalGeometry":
        return OpticalGeometry(self.z2, self.z1)
