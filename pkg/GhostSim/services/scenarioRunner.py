"""
Scenario drivers: size the grids, dispatch to the imaging or HBT machinery
and condense the outcome into a MetricsReport.
"""
import math
import time
import numpy as np
import logManager
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
from configManager.scenarioHandler import ScenarioConfig
from OpticsObjects.CoincidenceHistogram import CoincidenceHistogram
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.DetectorSpec import DetectorSpec
from OpticsObjects.EnsembleConfig import EnsembleConfig
from OpticsObjects.MetricsReport import MetricsReport
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec
from OpticsObjects.TransmissionMask import TransmissionMask
from OpticsObjects.TransverseGrid import TransverseGrid, centered_grid, make_grid
from functions import metrics
from functions.analytic import delta_g2_analytic, kernel_width
from functions.errors import DegenerateStatisticsError, GhostSimError, NotMeasurableError
from services import coincidence
from services.ensemble import aperture_average, background_subtract, delta_g2_montecarlo

logging = logManager.logger.get_logger(__name__)

# grid sizing, in units of the coherence width lambda*z/(2a)
KERNEL_SAMPLES = 4.0
FEATURE_SAMPLES = 8.0
WINDOW_KERNELS = 3.0
BASELINE_BLUR = 6.0
# baseline neighborhoods reach this many blur widths past each feature
NEIGHBORHOOD_BLURS = 2.0


@dataclass(frozen=True)
class GridPlan:
    """Transverse sampling of one imaging scenario."""
    source_grid: TransverseGrid
    object_grid: TransverseGrid
    detector_grid: TransverseGrid
    stride: int = 1

    @property
    def reported_x2(self) -> np.ndarray:
        return self.detector_grid.coordinates[::self.stride]


@dataclass(eq=False)
class ScenarioResult:
    cfg: ScenarioConfig
    profiles: Dict[str, CorrelationProfile] = field(default_factory=dict)
    z2_values: Optional[np.ndarray] = None
    sweeps: Dict[str, np.ndarray] = field(default_factory=dict)
    sweep_profiles: Dict[str, List[CorrelationProfile]] = field(default_factory=dict)
    sweep_metrics: Dict[str, np.ndarray] = field(default_factory=dict)
    background_subtracted: Optional[CorrelationProfile] = None
    histogram: Optional[CoincidenceHistogram] = None
    g2_curve: Optional[np.ndarray] = None
    g2_model: Optional[np.ndarray] = None

    @property
    def primary(self) -> Optional[CorrelationProfile]:
        for key in ("montecarlo", "analytic"):
            if key in self.profiles:
                return self.profiles[key]
        return None


def build_source(cfg: ScenarioConfig) -> SourceSpec:
    if cfg.source_profile == "gaussian":
        return SourceSpec.gaussian(cfg.wavelength, cfg.source_half_width, cfg.coherence_time)
    return SourceSpec.uniform(cfg.wavelength, cfg.source_half_width, cfg.coherence_time)


def mask_features(cfg: ScenarioConfig) -> List[Tuple[float, float]]:
    """Open windows (center, width) the mask constructor will produce."""
    c = cfg.feature_center
    if cfg.mask == "double_slit":
        half = 0.5 * cfg.slit_separation
        return [(c - half, cfg.slit_width), (c + half, cfg.slit_width)]
    if cfg.mask == "pinhole_pair":
        half = 0.5 * cfg.pinhole_separation
        return [(c - half, cfg.pinhole_d1), (c + half, cfg.pinhole_d2)]
    if cfg.mask == "single_slit":
        return [(c, cfg.slit_width)]
    if cfg.mask == "single_point":
        return [(c, 0.0)]
    return []


def build_mask(cfg: ScenarioConfig, grid: TransverseGrid) -> TransmissionMask:
    if cfg.mask == "double_slit":
        return TransmissionMask.double_slit(grid, cfg.slit_width, cfg.slit_separation, cfg.feature_center)
    if cfg.mask == "pinhole_pair":
        return TransmissionMask.pinhole_pair(grid, cfg.pinhole_d1, cfg.pinhole_d2, cfg.pinhole_separation,
                                             cfg.feature_center)
    if cfg.mask == "single_slit":
        return TransmissionMask.single_slit(grid, cfg.slit_width, cfg.feature_center)
    if cfg.mask == "single_point":
        return TransmissionMask.single_point(grid, cfg.feature_center)
    if cfg.mask == "uniform":
        return TransmissionMask.uniform(grid)
    return TransmissionMask.opaque(grid)


def _points_for(span: float, step: float) -> int:
    return max(2, int(math.ceil(span / step - 1e-9)) + 1)


def _union_span(lo_a: float, hi_a: float, lo_b: float, hi_b: float) -> float:
    return max(hi_a, hi_b) - min(lo_a, lo_b)


def _image_half_width(cfg: ScenarioConfig, source: SourceSpec, z2: float) -> float:
    """Half-window holding the blurred image at z2 plus room for a baseline."""
    extent = max([abs(c) + 0.5 * w for c, w in mask_features(cfg)], default=0.0)
    m = z2 / cfg.z1
    blur = max(kernel_width(source, z2), cfg.detector_aperture)
    return extent * max(m, 1.0) + source.effective_half_width * abs(m - 1.0) + BASELINE_BLUR * blur


def plan_grids(cfg: ScenarioConfig, source: SourceSpec) -> GridPlan:
    """
    Choose source, object and detector grids that satisfy the Fresnel sampling
    criterion for both arms, resolve the coherence width and every feature,
    and leave room for a baseline around the image.

    The object window is 4x the full mask extent (half-width 4x the outermost
    feature edge) and at least 6 coherence widths wide. The detector window is
    sized around the image instead: the magnified, defocus-blurred extent plus
    BASELINE_BLUR coherence widths on each side.

    detector_points and x2_half_window override the automatic detector sizing;
    with scan_step the detector is scan_step/k fine and reported every k samples.
    """
    z2_values = cfg.z2_values()
    features = mask_features(cfg)
    kernel1 = kernel_width(source, cfg.z1)

    extent = max([abs(c) + 0.5 * w for c, w in features], default=0.0)
    obj_half = max(4.0 * extent, WINDOW_KERNELS * kernel1)
    if cfg.x2_half_window is not None:
        det_half = cfg.x2_half_window
    else:
        det_half = max(_image_half_width(cfg, source, z2) for z2 in z2_values)
    if cfg.scan_step is not None:
        det_half = math.ceil(det_half / cfg.scan_step - 1e-9) * cfg.scan_step

    s_lo, s_hi = source.support()
    obj_lo, obj_hi = -obj_half, obj_half
    det_lo, det_hi = -det_half, det_half

    # the source grid feeds both arms, so it must meet both sampling limits
    arm1_limit = cfg.wavelength * cfg.z1 / (2.0 * _union_span(s_lo, s_hi, obj_lo, obj_hi))
    arm2_limit = min(cfg.wavelength * z2 / (2.0 * _union_span(s_lo, s_hi, det_lo, det_hi)) for z2 in z2_values)

    widths = [w for _, w in features if w > 0]
    obj_step = min([kernel1 / KERNEL_SAMPLES, arm1_limit] + [w / FEATURE_SAMPLES for w in widths])
    object_grid = centered_grid(obj_half, _points_for(2.0 * obj_half, obj_step))

    det_step = min(min(kernel_width(source, z2) for z2 in z2_values) / KERNEL_SAMPLES, arm2_limit)
    stride = 1
    if cfg.detector_points is not None:
        detector_grid = centered_grid(det_half, cfg.detector_points)
        if cfg.scan_step is not None:
            stride = max(1, int(round(cfg.scan_step / detector_grid.dx)))
    elif cfg.scan_step is not None:
        stride = max(1, int(math.ceil(cfg.scan_step / det_step - 1e-9)))
        detector_grid = centered_grid(det_half, int(round(2.0 * det_half / cfg.scan_step)) * stride + 1)
    else:
        detector_grid = centered_grid(det_half, _points_for(2.0 * det_half, det_step))

    src_step = min(arm1_limit, arm2_limit)
    source_grid = make_grid(s_lo, s_hi, _points_for(s_hi - s_lo, src_step))

    logging.debug(f"grids: source {source_grid.n_points} pts (dx {source_grid.dx:.4g} m), "
                  f"object {object_grid.n_points} pts (dx {object_grid.dx:.4g} m), "
                  f"detector {detector_grid.n_points} pts (dx {detector_grid.dx:.4g} m, stride {stride})")
    return GridPlan(source_grid, object_grid, detector_grid, stride)


def _ensemble_config(cfg: ScenarioConfig, plan: GridPlan, mask: TransmissionMask) -> EnsembleConfig:
    bucket = (mask.grid.x_min, mask.grid.x_max)
    return EnsembleConfig(cfg.n_realizations, cfg.seed, plan.source_grid, plan.object_grid, plan.detector_grid,
                          bucket, cfg.detector_aperture, cfg.n_batches, cfg.threads,
                          cfg.scan_step if plan.stride > 1 else None)


def analytic_image(mask: TransmissionMask, source: SourceSpec, geom: OpticalGeometry, plan: GridPlan,
                   aperture: float) -> CorrelationProfile:
    """Analytic image seen through the same aperture and scan as the Monte Carlo detector."""
    profile = delta_g2_analytic(mask, source, geom, plan.detector_grid)
    # the equal-arm reference mean is flat, so averaging delta g2 equals averaging the covariance
    values = aperture_average(profile.delta_g2, plan.detector_grid, aperture)[::plan.stride]
    return CorrelationProfile(plan.reported_x2, values, np.zeros_like(values), 0, "fluctuation", "none",
                              "analytic", geom.z2)


def _difference(mc: CorrelationProfile, analytic: CorrelationProfile) -> CorrelationProfile:
    return CorrelationProfile(mc.x2, mc.delta_g2 - analytic.delta_g2, mc.std_err, mc.n_realizations,
                              "fluctuation", mc.error_method, "difference", mc.z2)


def _images_at(cfg: ScenarioConfig, z2: float, mask: TransmissionMask, source: SourceSpec,
               plan: GridPlan) -> Dict[str, CorrelationProfile]:
    geom = OpticalGeometry(cfg.z1, z2)
    images: Dict[str, CorrelationProfile] = {}
    if cfg.method in ("montecarlo", "both"):
        images["montecarlo"] = delta_g2_montecarlo(mask, source, geom, _ensemble_config(cfg, plan, mask))
    if cfg.method in ("analytic", "both"):
        images["analytic"] = analytic_image(mask, source, geom, plan, cfg.detector_aperture)
    if cfg.method == "both":
        images["difference"] = _difference(images["montecarlo"], images["analytic"])
    return images


def _blur(cfg: ScenarioConfig, source: SourceSpec, z2: float) -> float:
    return max(kernel_width(source, z2), cfg.detector_aperture)


def _baseline_margin(cfg: ScenarioConfig, source: SourceSpec, z2: float) -> float:
    return NEIGHBORHOOD_BLURS * _blur(cfg, source, z2)


def _min_separation(cfg: ScenarioConfig, source: SourceSpec, z2: float, features: List[Tuple[float, float]]) -> float:
    return max([_blur(cfg, source, z2)] + [w for _, w in features])


def image_metrics(profile: CorrelationProfile, features: List[Tuple[float, float]], margin: float,
                  min_separation: float) -> Dict:
    """Visibility, peaks, widths and the baseline geometry of one image."""
    x = profile.x2
    fluct = profile.as_fluctuation().delta_g2
    raw = profile.as_raw_g2().delta_g2
    baseline = metrics.baseline_level(x, fluct, features, margin)
    positions, widths = metrics.find_image_peaks(x, fluct, min_separation, baseline)
    result = {
        "visibility": metrics.visibility(x, raw, features, margin),
        "peak_positions": positions,
        "fwhm_per_peak": widths,
        "peak_separation": abs(positions[1] - positions[0]) if len(positions) >= 2 else None,
        "baseline_delta_g2": baseline,
        "feature_neighborhoods": metrics.feature_neighborhoods(features, margin),
        "delta_g2_max": float(np.max(fluct)),
        "second_moment": metrics.second_moment(x, fluct),
    }
    if len(positions) >= 2:
        midpoint = 0.5 * (positions[0] + positions[1])
        height = 0.5 * (np.interp(positions[0], x, fluct) + np.interp(positions[1], x, fluct))
        valley = float(np.interp(midpoint, x, fluct))
        result["peak_to_midpoint"] = float(height / valley) if valley > 0 else float("inf")
    return result


def _remove_background(result: ScenarioResult, features: List[Tuple[float, float]], margin: float) -> None:
    try:
        result.background_subtracted, _ = background_subtract(result.primary.as_fluctuation(), features, margin)
    except DegenerateStatisticsError as err:
        logging.warning(f"background not removed: {err}")


def _imaging_report(cfg: ScenarioConfig, result: ScenarioResult, source: SourceSpec, plan: GridPlan,
                    mask: TransmissionMask, focus_z2: float) -> MetricsReport:
    features = mask.features
    margin = _baseline_margin(cfg, source, focus_z2)
    summary = image_metrics(result.primary, features, margin, _min_separation(cfg, source, focus_z2, features))
    report = MetricsReport(cfg.kind, cfg.method, summary.pop("visibility"), summary.pop("peak_positions"),
                           summary.pop("peak_separation"), summary.pop("fwhm_per_peak"))
    report.extras.update(summary)
    report.extras.update({
        "seed": cfg.seed,
        "z1_m": cfg.z1,
        "z2_m": focus_z2,
        "x2_step_m": float(plan.detector_grid.dx * plan.stride),
        "n_x2": int(plan.reported_x2.shape[0]),
        "predicted_speckle_m": kernel_width(source, focus_z2),
        "n_realizations": result.primary.n_realizations,
        "error_method": result.primary.error_method,
        "profile_normalization": "fluctuation",
    })
    if result.background_subtracted is not None:
        # a background-free image has raw g2 = 1 away from the features
        shifted = result.background_subtracted
        report.extras["visibility_background_subtracted"] = metrics.visibility(
            shifted.x2, shifted.as_raw_g2().delta_g2, features, margin)
    if "difference" in result.profiles:
        diff = result.profiles["difference"]
        with np.errstate(divide="ignore", invalid="ignore"):
            pulls = np.abs(diff.delta_g2) / diff.std_err
        report.extras["within_3_sigma_fraction"] = float(np.mean(pulls <= 3.0))
        report.extras["max_abs_difference"] = float(np.max(np.abs(diff.delta_g2)))
    return report


def _run_focused(cfg: ScenarioConfig) -> Tuple[ScenarioResult, MetricsReport]:
    source = build_source(cfg)
    plan = plan_grids(cfg, source)
    mask = build_mask(cfg, plan.object_grid)
    result = ScenarioResult(cfg)
    result.profiles = _images_at(cfg, cfg.reference_distance, mask, source, plan)
    _remove_background(result, mask.features, _baseline_margin(cfg, source, cfg.reference_distance))
    return result, _imaging_report(cfg, result, source, plan, mask, cfg.reference_distance)


def _row_peak_separation(cfg: ScenarioConfig, source: SourceSpec, profile: CorrelationProfile, z2: float,
                         features: List[Tuple[float, float]]) -> float:
    """Distance between the two strongest peaks of one sweep row; nan when fewer than two are found."""
    baseline = metrics.baseline_level(profile.x2, profile.delta_g2, features, _baseline_margin(cfg, source, z2))
    positions, _ = metrics.find_image_peaks(profile.x2, profile.delta_g2, _min_separation(cfg, source, z2, features),
                                            baseline)
    return abs(positions[1] - positions[0]) if len(positions) >= 2 else float("nan")


def _run_sweep(cfg: ScenarioConfig) -> Tuple[ScenarioResult, MetricsReport]:
    source = build_source(cfg)
    plan = plan_grids(cfg, source)
    mask = build_mask(cfg, plan.object_grid)
    z2_values = np.asarray(cfg.z2_values())
    rows: Dict[str, List[CorrelationProfile]] = {}
    for z2 in z2_values:
        try:
            images = _images_at(cfg, float(z2), mask, source, plan)
        except GhostSimError as err:
            raise err.in_context(f"sweep row z2 = {z2:.6g} m") from err
        for key, profile in images.items():
            rows.setdefault(key, []).append(profile)
        logging.info(f"sweep row z2 = {z2:.6g} m done")

    result = ScenarioResult(cfg, z2_values=z2_values)
    result.sweep_profiles = rows
    result.sweeps = {key: np.vstack([p.delta_g2 for p in profiles]) for key, profiles in rows.items()}
    # the exported profile is the row closest to the focused condition z2 = z1
    focus_row = int(np.argmin(np.abs(z2_values - cfg.z1)))
    focus_z2 = float(z2_values[focus_row])
    result.profiles = {key: profiles[focus_row] for key, profiles in rows.items()}
    _remove_background(result, mask.features, _baseline_margin(cfg, source, focus_z2))

    report = _imaging_report(cfg, result, source, plan, mask, focus_z2)
    primary_key = "montecarlo" if "montecarlo" in rows else "analytic"
    primary_rows = rows[primary_key]
    x = plan.reported_x2
    matrix = result.sweeps[primary_key]
    row_maxima = matrix.max(axis=1)
    result.sweep_metrics = {
        "peak_separation_m": np.array([_row_peak_separation(cfg, source, p, float(z2), mask.features)
                                       for p, z2 in zip(primary_rows, z2_values)]),
        "second_moment_m2": np.array([metrics.second_moment(x, row) for row in matrix]),
        "row_max": row_maxima,
    }
    report.extras.update({
        "z2_values_m": z2_values.tolist(),
        "row_maxima": row_maxima.tolist(),
        "second_moments": result.sweep_metrics["second_moment_m2"].tolist(),
        "row_peak_separations": result.sweep_metrics["peak_separation_m"].tolist(),
        "magnification": (z2_values / cfg.z1).tolist(),
        "best_focus_z2_m": float(z2_values[int(np.argmax(row_maxima))]),
    })
    return result, report


def _run_hbt(cfg: ScenarioConfig) -> Tuple[ScenarioResult, MetricsReport]:
    start = DetectorSpec(cfg.start_rate, cfg.jitter_start, cfg.dead_time)
    stop = DetectorSpec(cfg.stop_rate, cfg.jitter_stop, cfg.dead_time)
    histogram = coincidence.simulate_hbt(cfg.coherence_time, cfg.duration, cfg.trace_step, start, stop,
                                         cfg.bin_width, cfg.tac_window, cfg.seed, cfg.tac_delay,
                                         cfg.independent_stop)
    estimate = coincidence.estimate_g2(histogram)
    try:
        tau = coincidence.estimate_coherence_time(histogram)
    except NotMeasurableError as err:
        logging.info(f"coherence time not measurable: {err}")
        tau = None
    jitter = math.hypot(cfg.jitter_start, cfg.jitter_stop)
    model = coincidence.g2_thermal_model(histogram.bin_centers, cfg.coherence_time, jitter)
    if cfg.independent_stop:
        model = np.ones_like(model)

    result = ScenarioResult(cfg, histogram=histogram, g2_curve=estimate.g2_curve, g2_model=model)
    g2_zero = estimate.g2_zero
    report = MetricsReport(cfg.kind, cfg.method, (g2_zero - 1.0) / (g2_zero + 1.0))
    report.extras.update({
        "seed": cfg.seed,
        "g2_zero": g2_zero,
        "g2_zero_stderr": estimate.g2_zero_stderr,
        "contrast": estimate.contrast,
        "coherence_time_estimate_s": tau,
        "coherence_time_measurable": tau is not None,
        "coherence_time_s": cfg.coherence_time,
        "baseline_rate": estimate.baseline,
        "baseline_noise": estimate.baseline_noise,
        "peak_excess": estimate.peak_excess,
        "g2_zero_model": 1.0 if cfg.independent_stop else coincidence.g2_thermal_model(0.0, cfg.coherence_time,
                                                                                       jitter),
        "total_starts": histogram.total_starts,
        "total_stops": histogram.total_stops,
        "coincidences": int(histogram.counts.sum()),
        "bin_width_s": histogram.bin_width,
        "n_bins": histogram.n_bins,
    })
    return result, report


RUNNERS = {"focused_image": _run_focused, "z2_sweep": _run_sweep, "hbt": _run_hbt}


def run_scenario(cfg: ScenarioConfig) -> Tuple[ScenarioResult, MetricsReport]:
    """
    Run one validated scenario.

    Args:
        cfg (ScenarioConfig): what to simulate.

    Returns:
        tuple: (ScenarioResult, MetricsReport). Errors keep their class and gain the
        scenario kind and method in their message.
    """
    logging.info(f"scenario {cfg.kind} ({cfg.method}), seed {cfg.seed}")
    started = time.perf_counter()
    try:
        result, report = RUNNERS[cfg.kind](cfg)
    except GhostSimError as err:
        raise err.in_context(f"{cfg.kind}/{cfg.method}") from err
    report.runtime_seconds = time.perf_counter() - started
    logging.info(f"scenario {cfg.kind} finished in {report.runtime_seconds:.2f} s")
    return result, report
