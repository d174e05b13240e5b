"""
Mutual-coherence kernel of a spatially incoherent source seen through two free-space arms:

    K(x1, x2) = integral I_s(x') * conj(h2(x', x2)) * h1(x', x1) dx'
    h_i(x', x) = exp(-i*pi/4) / sqrt(lambda*z_i) * exp[i*pi*(x - x')^2 / (lambda*z_i)]

The constant phases cancel, leaving a real prefactor 1 / (lambda*sqrt(z1*z2)).
The x' integral is evaluated with the trapezoid rule on a step fine enough for
at least 8 samples per pi of phase, halved until the Romberg extrapolation settles.
"""
import math
import numpy as np
import logManager
from typing import Tuple
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec
from functions.errors import InvalidArgumentError

logging = logManager.logger.get_logger(__name__)

SAMPLES_PER_PI = 8
MIN_INTERVALS = 16
MAX_LEVELS = 10
RELATIVE_TOLERANCE = 1e-8

# source nodes handled per matrix product
_NODE_CHUNK = 2048


def _phase_slope_bound(x1s: np.ndarray, x2s: np.ndarray, support: Tuple[float, float],
                       geom: OpticalGeometry, wavelength: float) -> float:
    """Largest |d phase / dx'| over the support; the slope is linear in x', x1 and x2."""
    k = 2.0 * math.pi / wavelength
    best = 0.0
    for xs in support:
        for x1 in (x1s.min(), x1s.max()):
            for x2 in (x2s.min(), x2s.max()):
                slope = k * ((xs - x1) / geom.z1 - (xs - x2) / geom.z2)
                best = max(best, abs(slope))
    return best


def initial_intervals(x1s, x2s, source: SourceSpec, geom: OpticalGeometry) -> int:
    """Trapezoid interval count of the first quadrature level."""
    lo, hi = source.support()
    slope = _phase_slope_bound(np.atleast_1d(x1s), np.atleast_1d(x2s), (lo, hi), geom, source.wavelength)
    if slope == 0.0:
        return MIN_INTERVALS
    step = math.pi / (SAMPLES_PER_PI * slope)
    return max(MIN_INTERVALS, int(math.ceil((hi - lo) / step)))


def _accumulate(x1s: np.ndarray, x2s: np.ndarray, nodes: np.ndarray, weights: np.ndarray,
                source: SourceSpec, geom: OpticalGeometry) -> np.ndarray:
    """sum_l weights_l * I_s(x'_l) * exp(i*phi(x1, x2, x'_l)) for every (x1, x2) pair."""
    wavelength = source.wavelength
    a1 = math.pi / (wavelength * geom.z1)
    a2 = math.pi / (wavelength * geom.z2)
    total = np.zeros((x1s.shape[0], x2s.shape[0]), dtype=np.complex128)
    for lo in range(0, nodes.shape[0], _NODE_CHUNK):
        xs = nodes[lo:lo + _NODE_CHUNK]
        w = weights[lo:lo + _NODE_CHUNK] * source.intensity(xs)
        keep = w != 0
        if not np.any(keep):
            continue
        xs, w = xs[keep], w[keep]
        arm1 = np.exp(1j * a1 * (x1s[:, None] - xs[None, :]) ** 2) * w[None, :]
        arm2 = np.exp(-1j * a2 * (x2s[:, None] - xs[None, :]) ** 2)
        total += arm1 @ arm2.T
    return total


def kernel_scale(source: SourceSpec, geom: OpticalGeometry) -> float:
    """Largest possible |K|: integral of I_s over lambda*sqrt(z1*z2)."""
    return source.total_intensity() / (source.wavelength * math.sqrt(geom.z1 * geom.z2))


def mutual_coherence_matrix(x1s, x2s, source: SourceSpec, geom: OpticalGeometry) -> np.ndarray:
    """
    Kernel K(x1, x2) for every pair of the given coordinates.

    Args:
        x1s: object-arm coordinates in meters.
        x2s: reference-arm coordinates in meters.
        source (SourceSpec): the thermal source.
        geom (OpticalGeometry): arm distances.

    Returns:
        np.ndarray: complex array of shape (len(x1s), len(x2s)).
    """
    x1s = np.atleast_1d(np.asarray(x1s, dtype=np.float64))
    x2s = np.atleast_1d(np.asarray(x2s, dtype=np.float64))
    if x1s.ndim != 1 or x2s.ndim != 1:
        raise InvalidArgumentError("kernel coordinates must be scalars or 1D arrays")
    source.validate()
    lo, hi = source.support()
    prefactor = 1.0 / (source.wavelength * math.sqrt(geom.z1 * geom.z2))
    tolerance = RELATIVE_TOLERANCE * kernel_scale(source, geom)

    intervals = initial_intervals(x1s, x2s, source, geom)
    h = (hi - lo) / intervals
    nodes = lo + np.arange(intervals + 1, dtype=np.float64) * h
    weights = np.full(intervals + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    trapezoid = prefactor * _accumulate(x1s, x2s, nodes, weights, source, geom)
    table = [trapezoid]

    for level in range(1, MAX_LEVELS + 1):
        # new nodes are the midpoints of the previous level
        h *= 0.5
        intervals *= 2
        midpoints = lo + (2 * np.arange(intervals // 2, dtype=np.float64) + 1) * h
        trapezoid = 0.5 * trapezoid + prefactor * _accumulate(
            x1s, x2s, midpoints, np.full(midpoints.shape[0], h), source, geom)
        row = [trapezoid]
        for j in range(1, level + 1):
            factor = 4.0 ** j
            row.append(row[j - 1] + (row[j - 1] - table[j - 1]) / (factor - 1.0))
        change = float(np.max(np.abs(row[-1] - table[-1])))
        logging.debug(f"kernel quadrature level {level}: {intervals} intervals, change {change:.3e}")
        if change < tolerance:
            return row[-1]
        table = row

    logging.warning(f"kernel quadrature stopped at {MAX_LEVELS} levels without reaching "
                    f"{RELATIVE_TOLERANCE:g} of the kernel scale (last change {change:.3e})")
    return table[-1]


def mutual_coherence_kernel(x1: float, x2: float, source: SourceSpec, geom: OpticalGeometry) -> complex:
    """
    Single kernel value K(x1, x2).

    Args:
        x1 (float): object-arm coordinate, meters.
        x2 (float): reference-arm coordinate, meters.
        source (SourceSpec): the thermal source.
        geom (OpticalGeometry): arm distances z1, z2.

    Returns:
        complex: the kernel value.
    """
    return complex(mutual_coherence_matrix([x1], [x2], source, geom)[0, 0])


def kernel_diagonal(source: SourceSpec, z: float) -> float:
    """K(x, x) with both arms at z: the mean intensity, the same at every x."""
    return float(mutual_coherence_matrix([0.0], [0.0], source, OpticalGeometry(z, z))[0, 0].real)
