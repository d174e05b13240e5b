"""
Monte Carlo ghost imaging: thermal source realizations pushed through both arms,
bucket and scanning-detector intensities correlated over the ensemble.
"""
import numpy as np
import logManager
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple
from OpticsObjects.ComplexField import ComplexField
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.EnsembleConfig import EnsembleConfig
from OpticsObjects.IntensityRecord import IntensityRecord
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec
from OpticsObjects.TransmissionMask import TransmissionMask
from OpticsObjects.TransverseGrid import TransverseGrid
from functions import randomStreams
from functions.errors import DegenerateStatisticsError, InvalidArgumentError, ShapeError
from functions.fresnel import apply_mask, fresnel_propagate, propagate_amplitudes
from functions.metrics import outside_features

logging = logManager.logger.get_logger(__name__)


def draw_source_realization(source: SourceSpec, grid: TransverseGrid, realization_index: int,
                            master_seed: int) -> ComplexField:
    """
    One delta-correlated thermal field: sqrt(I_s(x_i)) * g_i with g_i circular complex Gaussian.

    Args:
        source (SourceSpec): intensity profile (a dark profile gives a zero field).
        grid (TransverseGrid): source sampling.
        realization_index (int): position of this realization in the ensemble.
        master_seed (int): ensemble seed.

    Returns:
        ComplexField: the source field; a pure function of (master_seed, realization_index).
    """
    gen = randomStreams.generator(master_seed, randomStreams.SOURCE_FIELD, realization_index)
    deviates = randomStreams.complex_normal(gen, grid.n_points)
    return ComplexField(grid, np.sqrt(source.intensity(grid.coordinates)) * deviates)


def aperture_average(intensity: np.ndarray, grid: TransverseGrid, aperture: float) -> np.ndarray:
    """
    Mean over the samples within aperture/2 of each position (last axis).

    Windows are truncated at the grid edges and divided by the samples they hold.
    """
    half = int(np.floor(0.5 * aperture / grid.dx + 1e-9))
    if half == 0:
        return intensity
    n = intensity.shape[-1]
    padded = np.concatenate([np.zeros(intensity.shape[:-1] + (1,)), np.cumsum(intensity, axis=-1)], axis=-1)
    idx = np.arange(n)
    lo = np.clip(idx - half, 0, n)
    hi = np.clip(idx + half + 1, 0, n)
    return (padded[..., hi] - padded[..., lo]) / (hi - lo)


def _bucket_selector(cfg: EnsembleConfig) -> np.ndarray:
    lo, hi = cfg.bucket_window
    x = cfg.object_grid.coordinates
    slack = 1e-9 * cfg.object_grid.dx
    return (x >= lo - slack) & (x <= hi + slack)


def _check_grids(mask: TransmissionMask, src_grid: TransverseGrid, cfg: EnsembleConfig) -> None:
    if mask.grid != cfg.object_grid:
        raise ShapeError("mask grid must equal the ensemble object grid")
    if src_grid != cfg.source_grid:
        raise ShapeError("source field grid must equal the ensemble source grid")


def simulate_realization(src_field: ComplexField, mask: TransmissionMask, geom: OpticalGeometry,
                         cfg: EnsembleConfig, wavelength: float) -> IntensityRecord:
    """
    Bucket and reference-arm intensities for one source realization.

    Args:
        src_field (ComplexField): source field on cfg.source_grid.
        mask (TransmissionMask): object on cfg.object_grid.
        geom (OpticalGeometry): arm distances.
        cfg (EnsembleConfig): grids, bucket window and detector aperture.
        wavelength (float): meters.

    Returns:
        IntensityRecord: i1 integrates |field|^2 over the bucket window,
        i2 is |field|^2 averaged over the detector aperture at each x2.
    """
    _check_grids(mask, src_field.grid, cfg)
    object_field = apply_mask(fresnel_propagate(src_field, geom.z1, wavelength, cfg.object_grid), mask)
    i1 = float(np.sum(object_field.intensity[_bucket_selector(cfg)]) * cfg.object_grid.dx)
    reference = fresnel_propagate(src_field, geom.z2, wavelength, cfg.detector_grid)
    i2 = aperture_average(reference.intensity, cfg.detector_grid, cfg.detector_aperture)
    return IntensityRecord(i1, i2)


def _simulate_block(indices: Sequence[int], mask: TransmissionMask, source: SourceSpec, geom: OpticalGeometry,
                    cfg: EnsembleConfig, selector: np.ndarray, i1: np.ndarray, i2: np.ndarray) -> None:
    """Fill rows `indices` of the preallocated record arrays."""
    amplitudes = np.vstack([draw_source_realization(source, cfg.source_grid, int(i), cfg.master_seed).amplitude
                            for i in indices])
    wavelength = source.wavelength
    object_field = propagate_amplitudes(amplitudes, cfg.source_grid, geom.z1, wavelength, cfg.object_grid)
    object_field *= mask.t
    bucket = np.sum(np.abs(object_field[:, selector]) ** 2, axis=-1) * cfg.object_grid.dx
    reference = propagate_amplitudes(amplitudes, cfg.source_grid, geom.z2, wavelength, cfg.detector_grid)
    intensity = aperture_average(np.abs(reference) ** 2, cfg.detector_grid, cfg.detector_aperture)
    stride = cfg.decimation()
    i1[indices[0]:indices[-1] + 1] = bucket
    i2[indices[0]:indices[-1] + 1] = intensity[:, ::stride]


def collect_records(mask: TransmissionMask, source: SourceSpec, geom: OpticalGeometry,
                    cfg: EnsembleConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bucket values (n,) and decimated reference intensities (n, n_x2) for the whole ensemble.

    Blocks of realizations run on cfg.threads workers; each realization writes its own row,
    so the arrays do not depend on the worker count or completion order.
    """
    _check_grids(mask, cfg.source_grid, cfg)
    n = cfg.n_realizations
    stride = cfg.decimation()
    n_x2 = len(range(0, cfg.detector_grid.n_points, stride))
    i1 = np.empty(n, dtype=np.float64)
    i2 = np.empty((n, n_x2), dtype=np.float64)
    selector = _bucket_selector(cfg)
    blocks = [range(lo, min(lo + cfg.block_size, n)) for lo in range(0, n, cfg.block_size)]

    if cfg.threads == 1:
        for block in blocks:
            _simulate_block(block, mask, source, geom, cfg, selector, i1, i2)
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_simulate_block, block, mask, source, geom, cfg, selector, i1, i2)
                       for block in blocks]
            for future in futures:
                future.result()
    return i1, i2


def _ratio_estimate(i1: np.ndarray, i2: np.ndarray) -> np.ndarray:
    """cov(i1, i2) / (mean(i1) * mean(i2)), unbiased covariance, two-pass."""
    mean1 = np.mean(i1)
    mean2 = np.mean(i2, axis=0)
    covariance = np.sum((i1 - mean1)[:, None] * (i2 - mean2), axis=0) / (i1.shape[0] - 1)
    return covariance / (mean1 * mean2)


def _batch_means_error(i1: np.ndarray, i2: np.ndarray, n_batches: int) -> np.ndarray:
    estimates = np.vstack([_ratio_estimate(b1, b2) for b1, b2 in
                           zip(np.array_split(i1, n_batches), np.array_split(i2, n_batches))])
    return np.std(estimates, axis=0, ddof=1) / np.sqrt(n_batches)


def _jackknife_error(i1: np.ndarray, i2: np.ndarray) -> np.ndarray:
    n = i1.shape[0]
    keep = ~np.eye(n, dtype=bool)
    estimates = np.vstack([_ratio_estimate(i1[keep[k]], i2[keep[k]]) for k in range(n)])
    spread = estimates - estimates.mean(axis=0)
    return np.sqrt((n - 1) / n * np.sum(spread ** 2, axis=0))


def estimate_delta_g2(i1: np.ndarray, i2: np.ndarray, n_batches: int = 16) -> Tuple[np.ndarray, np.ndarray, str]:
    """Ratio estimator, its standard error and the error method used."""
    n = i1.shape[0]
    if n < 2:
        raise InvalidArgumentError(f"at least two realizations are needed, got {n}")
    if not np.any(i1 > 0):
        raise DegenerateStatisticsError("every bucket value is zero; the object blocks all light")
    if np.any(np.mean(i2, axis=0) <= 0):
        raise DegenerateStatisticsError("reference-arm mean intensity vanishes at some x2")
    values = _ratio_estimate(i1, i2)
    if n >= 2 * n_batches:
        return values, _batch_means_error(i1, i2, n_batches), "batch_means"
    if n < 3:
        return values, np.zeros_like(values), "none"
    return values, _jackknife_error(i1, i2), "jackknife"


def reported_x2(cfg: EnsembleConfig) -> np.ndarray:
    return cfg.detector_grid.coordinates[::cfg.decimation()]


def delta_g2_montecarlo(mask: TransmissionMask, source: SourceSpec, geom: OpticalGeometry, cfg: EnsembleConfig,
                        normalization: str = "fluctuation") -> CorrelationProfile:
    """
    Ensemble estimate of the correlation image.

    Args:
        mask (TransmissionMask): object on cfg.object_grid.
        source (SourceSpec): thermal source.
        geom (OpticalGeometry): arm distances.
        cfg (EnsembleConfig): ensemble size, seed, grids, detectors.
        normalization (str): "fluctuation" for delta g2, "raw_g2" for 1 + delta g2.

    Returns:
        CorrelationProfile: image over the (decimated) detector grid with standard errors.
    """
    cfg.validate()
    source.validate()
    logging.info(f"Monte Carlo image: {cfg.n_realizations} realizations, z1 = {geom.z1:.6g} m, "
                 f"z2 = {geom.z2:.6g} m, {cfg.threads} thread(s)")
    i1, i2 = collect_records(mask, source, geom, cfg)
    values, std_err, error_method = estimate_delta_g2(i1, i2, cfg.n_batches)
    profile = CorrelationProfile(reported_x2(cfg), values, std_err, cfg.n_realizations, "fluctuation",
                                 error_method, "montecarlo", geom.z2)
    if normalization == "raw_g2":
        return profile.as_raw_g2()
    if normalization != "fluctuation":
        raise InvalidArgumentError(f"unknown normalization '{normalization}'")
    return profile


def background_subtract(profile: CorrelationProfile, features: List[Tuple[float, float]],
                        neighborhood: float) -> Tuple[CorrelationProfile, float]:
    """
    Remove the flat background: subtract the median outside the feature neighborhoods.

    Args:
        profile (CorrelationProfile): any image.
        features (list): (center, width) of the object's open windows.
        neighborhood (float): extra margin around each feature, meters.

    Returns:
        tuple: the shifted profile and the subtracted baseline.
    """
    outside = outside_features(profile.x2, features, neighborhood)
    if not np.any(outside):
        raise DegenerateStatisticsError("no samples outside the feature neighborhoods to estimate a baseline")
    baseline = float(np.median(profile.delta_g2[outside]))
    shifted = CorrelationProfile(profile.x2, profile.delta_g2 - baseline, profile.std_err, profile.n_realizations,
                                 profile.normalization, profile.error_method, profile.method, profile.z2)
    return shifted, baseline
