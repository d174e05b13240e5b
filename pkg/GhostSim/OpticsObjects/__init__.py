import numpy as np
import logManager
from functions.errors import InvalidArgumentError

logging = logManager.logger.get_logger(__name__)


def as_real_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one dimensional, got shape {arr.shape}")
    return arr


def as_complex_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one dimensional, got shape {arr.shape}")
    return arr
