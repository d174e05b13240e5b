"""Deterministic correlation images: Gaussian-statistics quadrature and the pointlike model."""
import numpy as np
import logManager
from typing import List, Sequence, Tuple
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.PointlikeObject import PointlikeObject
from OpticsObjects.SourceSpec import SourceSpec
from OpticsObjects.TransmissionMask import TransmissionMask
from OpticsObjects.TransverseGrid import TransverseGrid
from functions.coherence import kernel_diagonal, mutual_coherence_matrix
from functions.errors import DegenerateStatisticsError, InvalidArgumentError, UnsupportedProfileError

logging = logManager.logger.get_logger(__name__)


def predicted_speckle_size(source: SourceSpec, z: float) -> float:
    """
    First zero of the sinc kernel, lambda*z / (2a), for a uniform source of half-width a.

    Args:
        source (SourceSpec): must have a uniform profile.
        z (float): distance from the source in meters.

    Returns:
        float: coherence width in meters.
    """
    if source.profile != "uniform":
        raise UnsupportedProfileError(
            f"closed-form speckle size needs a uniform source, got '{source.profile}'; "
            "evaluate mutual_coherence_kernel numerically instead")
    if not z > 0:
        raise InvalidArgumentError(f"distance must be positive, got {z}")
    return source.wavelength * z / (2.0 * source.half_width)


def kernel_width(source: SourceSpec, z: float) -> float:
    """Coherence scale lambda*z/(2a) using the profile's effective half-width."""
    return source.wavelength * z / (2.0 * source.effective_half_width)


def _trapezoid_weights(grid: TransverseGrid) -> np.ndarray:
    weights = np.full(grid.n_points, grid.dx)
    weights[0] = weights[-1] = 0.5 * grid.dx
    return weights


def delta_g2_analytic(mask: TransmissionMask, source: SourceSpec, geom: OpticalGeometry,
                      x2_grid: TransverseGrid) -> CorrelationProfile:
    """
    Correlation image predicted by Gaussian statistics.

        delta_g2(x2) = int |T|^2 |K(x1, x2)|^2 dx1 / ( int |T|^2 K11(x1, x1) dx1 * K22(x2, x2) )

    K11 and K22 are the diagonal kernels with both arms at z1 and at z2.

    Args:
        mask (TransmissionMask): object transmission; its grid sets the x1 quadrature.
        source (SourceSpec): thermal source.
        geom (OpticalGeometry): arm distances.
        x2_grid (TransverseGrid): where the image is evaluated.

    Returns:
        CorrelationProfile: fluctuation-normalized image with zero standard error.
    """
    source.validate()
    limit = source.wavelength * geom.z1 / (4.0 * source.effective_half_width)
    if not mask.grid.dx < limit:
        raise InvalidArgumentError(
            f"mask spacing {mask.grid.dx:.6g} m does not resolve the kernel; it must be below "
            f"lambda*z1/(4a) = {limit:.6g} m")

    weights = _trapezoid_weights(mask.grid) * mask.power_transmission
    open_samples = np.flatnonzero(weights > 0)
    if open_samples.size == 0:
        raise DegenerateStatisticsError("mask transmits nothing; the bucket is always dark")
    x1 = mask.grid.coordinates[open_samples]
    w1 = weights[open_samples]

    x2 = x2_grid.coordinates
    kernel = mutual_coherence_matrix(x1, x2, source, geom)
    numerator = w1 @ (np.abs(kernel) ** 2)
    # equal-arm diagonals do not depend on position
    mean_bucket = float(np.sum(w1)) * kernel_diagonal(source, geom.z1)
    mean_reference = kernel_diagonal(source, geom.z2)
    delta_g2 = numerator / (mean_bucket * mean_reference)
    logging.debug(f"analytic image at z2 = {geom.z2:.6g} m: {x1.size} open samples, {x2.size} x2 samples, "
                  f"peak {delta_g2.max():.6g}")
    return CorrelationProfile(x2, delta_g2, np.zeros_like(delta_g2), 0, "fluctuation", "none", "analytic", geom.z2)


def delta_g2_sweep(mask: TransmissionMask, source: SourceSpec, z1: float, z2_values: Sequence[float],
                   x2_grid: TransverseGrid) -> Tuple[List[CorrelationProfile], np.ndarray]:
    """
    One analytic image per reference-arm distance.

    Returns:
        tuple: the profiles and the (len(z2_values), n_x2) matrix of delta_g2.
    """
    profiles = []
    for z2 in z2_values:
        profiles.append(delta_g2_analytic(mask, source, OpticalGeometry(z1, float(z2)), x2_grid))
        logging.info(f"analytic sweep row z2 = {z2:.6g} m done")
    matrix = np.vstack([p.delta_g2 for p in profiles])
    return profiles, matrix


def g2_pointlike(obj: PointlikeObject, x2, kernel_width: float):
    """
    Pointlike visibility model: N + sum_j w_j * exp(-(x2 - pos_j)^2 / (2 * kernel_width^2)).

    Args:
        obj (PointlikeObject): features and their |T|^2 weights.
        x2: position(s) in meters.
        kernel_width (float): blur of each feature, > 0.

    Returns:
        float or np.ndarray: g2 at x2.
    """
    if not kernel_width > 0:
        raise InvalidArgumentError(f"kernel_width must be positive, got {kernel_width}")
    x2_arr = np.asarray(x2, dtype=np.float64)
    offsets = (x2_arr[..., None] - obj.feature_positions) / kernel_width
    value = obj.N + np.sum(obj.feature_weights * np.exp(-0.5 * offsets ** 2), axis=-1)
    if np.ndim(x2) == 0:
        return float(value)
    return value


def pointlike_visibility(obj: PointlikeObject) -> float:
    """(peak - background) / (peak + background) with the peak at the heaviest feature."""
    peak = obj.N + float(np.max(obj.feature_weights))
    return (peak - obj.N) / (peak + obj.N)
