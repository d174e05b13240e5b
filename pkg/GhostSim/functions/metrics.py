"""Observables read off a correlation image: peaks, widths, visibility, second moment."""
import warnings
import numpy as np
import logManager
from typing import List, Sequence, Tuple
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks

logging = logManager.logger.get_logger(__name__)

# peaks lower than this fraction of the profile's range are ignored
MIN_PROMINENCE = 0.1


def outside_features(x: np.ndarray, features: Sequence[Tuple[float, float]], margin: float) -> np.ndarray:
    """Mask of samples farther than margin from every feature window (center, width)."""
    outside = np.ones(x.shape[0], dtype=bool)
    for center, width in features:
        outside &= np.abs(x - center) > 0.5 * width + margin
    return outside


def feature_neighborhoods(features: Sequence[Tuple[float, float]], margin: float) -> List[List[float]]:
    return [[c - 0.5 * w - margin, c + 0.5 * w + margin] for c, w in features]


def baseline_level(x: np.ndarray, y: np.ndarray, features: Sequence[Tuple[float, float]], margin: float) -> float:
    """Median of y outside the feature neighborhoods; the whole profile when there are no features."""
    outside = outside_features(x, features, margin)
    if not np.any(outside):
        logging.warning("no samples outside the feature neighborhoods; baseline taken over the whole profile")
        outside = np.ones_like(outside)
    return float(np.median(y[outside]))


def visibility(x: np.ndarray, raw_g2: np.ndarray, features: Sequence[Tuple[float, float]], margin: float) -> float:
    """(max - baseline) / (max + baseline) of a raw g2 image."""
    baseline = baseline_level(x, raw_g2, features, margin)
    peak = float(np.max(raw_g2))
    return (peak - baseline) / (peak + baseline)


def _half_max_crossings(x: np.ndarray, y: np.ndarray, index: int, level: float) -> Tuple[float, float]:
    """Linear interpolation of where y drops below level on both sides of index."""
    left = float("nan")
    for i in range(index, 0, -1):
        if y[i - 1] < level <= y[i]:
            left = x[i - 1] + (level - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
            break
    right = float("nan")
    for i in range(index, y.shape[0] - 1):
        if y[i + 1] < level <= y[i]:
            right = x[i] + (y[i] - level) * (x[i + 1] - x[i]) / (y[i] - y[i + 1])
            break
    return left, right


def fwhm(x: np.ndarray, y: np.ndarray, index: int, baseline: float = 0.0) -> float:
    """Full width at half maximum above baseline of the peak at index; nan if a side never crosses."""
    level = baseline + 0.5 * (y[index] - baseline)
    left, right = _half_max_crossings(x, y, index, level)
    return right - left


def _gaussian(x, amplitude, center, sigma, offset):
    return amplitude * np.exp(-0.5 * ((x - center) / sigma) ** 2) + offset


def _parabolic_vertex(x: np.ndarray, y: np.ndarray, index: int) -> float:
    if index <= 0 or index >= y.shape[0] - 1:
        return float(x[index])
    y0, y1, y2 = y[index - 1], y[index], y[index + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return float(x[index])
    shift = 0.5 * (y0 - y2) / denom
    return float(x[index] + np.clip(shift, -1.0, 1.0) * (x[1] - x[0]))


def refine_peak(x: np.ndarray, y: np.ndarray, index: int, baseline: float) -> float:
    """
    Sub-sample peak position from a Gaussian fit around the peak.

    The fit window spans one FWHM on each side; the parabolic vertex of the three
    samples around the peak is used when the fit fails or leaves the window.
    """
    width = fwhm(x, y, index, baseline)
    dx = x[1] - x[0]
    if not np.isfinite(width) or width <= 0:
        width = 4.0 * dx
    level = baseline + 0.5 * (y[index] - baseline)
    left, right = _half_max_crossings(x, y, index, level)
    guess = 0.5 * (left + right) if np.isfinite(left) and np.isfinite(right) else x[index]
    lo, hi = guess - width, guess + width
    window = (x >= lo) & (x <= hi)
    if np.count_nonzero(window) >= 5:
        p0 = [y[index] - baseline, guess, max(width / 2.355, dx), baseline]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", OptimizeWarning)
                params, _ = curve_fit(_gaussian, x[window], y[window], p0=p0, maxfev=4000)
            center = float(params[1])
            if lo <= center <= hi and np.isfinite(center):
                return center
        except (RuntimeError, OptimizeWarning, ValueError) as err:
            logging.warning(f"Gaussian peak fit near x = {x[index]:.6g} m failed ({err}); using parabolic vertex")
    return _parabolic_vertex(x, y, index)


def find_image_peaks(x: np.ndarray, y: np.ndarray, min_separation: float, baseline: float = 0.0,
                     max_peaks: int = 2) -> Tuple[List[float], List[float]]:
    """
    The strongest local maxima of an image, sorted by position.

    Args:
        x (np.ndarray): uniform sample positions.
        y (np.ndarray): image values.
        min_separation (float): peaks closer than this are merged (keeps the higher).
        baseline (float): background level for the width measurement.
        max_peaks (int): how many peaks to keep.

    Returns:
        tuple: refined peak positions and their FWHM, both in meters.
    """
    dx = x[1] - x[0]
    distance = max(1, int(round(min_separation / dx)))
    prominence = MIN_PROMINENCE * float(np.ptp(y)) if np.ptp(y) > 0 else None
    indices, props = find_peaks(y, distance=distance, prominence=prominence)
    if indices.size == 0:
        return [], []
    strongest = indices[np.argsort(y[indices])[::-1][:max_peaks]]
    strongest = np.sort(strongest)
    positions = [refine_peak(x, y, int(i), baseline) for i in strongest]
    widths = [fwhm(x, y, int(i), baseline) for i in strongest]
    return positions, widths


def second_moment(x: np.ndarray, y: np.ndarray) -> float:
    """Variance of x weighted by the positive part of y."""
    weights = np.clip(y, 0.0, None)
    total = float(np.sum(weights))
    if total <= 0:
        return float("nan")
    mean = float(np.sum(weights * x)) / total
    return float(np.sum(weights * (x - mean) ** 2)) / total
