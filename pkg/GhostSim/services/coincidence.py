"""
Temporal Monte Carlo of an HBT measurement: thermal intensity traces, photon
thinning, detector jitter and dead time, TAC start-stop histogramming and g2(tau).
"""
import math
import numpy as np
import logManager
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple
from scipy.signal import lfilter
from scipy.special import erfc, erfcx
from OpticsObjects.CoincidenceHistogram import CoincidenceHistogram
from OpticsObjects.DetectorSpec import DetectorSpec
from functions import randomStreams
from functions.errors import DegenerateStatisticsError, InvalidArgumentError, NotMeasurableError

logging = logManager.logger.get_logger(__name__)

DEFAULT_CHUNK = 1 << 20
MAX_EMISSION_PROBABILITY = 0.1
MEASURABLE_CONTRAST = 5.0  # peak excess / baseline noise

START_CHANNEL = 0
STOP_CHANNEL = 1


def _check_trace_arguments(tau0: float, duration: float, dt: float) -> int:
    if not (tau0 > 0 and duration > 0 and dt > 0):
        raise InvalidArgumentError("tau0, duration and dt must be positive")
    if dt > tau0 / 10.0 * (1 + 1e-9):
        raise InvalidArgumentError(f"dt = {dt:g} s is too coarse; it must be <= tau0/10 = {tau0 / 10.0:g} s")
    if duration < 100.0 * tau0 * (1 - 1e-9):
        raise InvalidArgumentError(f"duration must cover at least 100 coherence times ({100.0 * tau0:g} s)")
    return int(math.ceil(duration / dt - 1e-9))


def iter_intensity_trace(tau0: float, duration: float, dt: float, seed: int,
                         chunk_size: int = DEFAULT_CHUNK, tag: int = randomStreams.TRACE_NOISE) -> Iterator[np.ndarray]:
    """
    Stream the thermal intensity trace in chunks.

    The field is a complex Ornstein-Uhlenbeck process, E[k] = rho*E[k-1] + sqrt(1 - rho^2)*w[k]
    with rho = exp(-dt/tau0), started from its stationary law; I = |E|^2 has unit mean.
    The concatenated chunks are identical for every chunk_size.
    """
    n_samples = _check_trace_arguments(tau0, duration, dt)
    if chunk_size < 1:
        raise InvalidArgumentError("chunk_size must be >= 1")
    rho = math.exp(-dt / tau0)
    gain = math.sqrt(1.0 - rho * rho)
    init = randomStreams.generator(seed, randomStreams.channel_tag(randomStreams.TRACE_INIT, tag), 0)
    start_field = randomStreams.complex_normal(init, 1)[0]
    state = np.array([rho * start_field], dtype=np.complex128)
    for start in range(0, n_samples, chunk_size):
        count = min(chunk_size, n_samples - start)
        noise = randomStreams.paged_complex_normal(seed, tag, start, count)
        amplitude, state = lfilter([gain], [1.0, -rho], noise, zi=state)
        yield amplitude.real ** 2 + amplitude.imag ** 2


def simulate_intensity_trace(tau0: float, duration: float, dt: float, seed: int) -> np.ndarray:
    """
    Thermal intensity trace with field autocorrelation exp(-|t|/tau0).

    Args:
        tau0 (float): coherence time, seconds.
        duration (float): trace length, at least 100*tau0.
        dt (float): sample spacing, at most tau0/10.
        seed (int): stream seed.

    Returns:
        np.ndarray: non-negative intensities with unit mean.
    """
    return np.concatenate(list(iter_intensity_trace(tau0, duration, dt, seed)))


def _check_emission(dt: float, det: DetectorSpec) -> float:
    probability = det.mean_rate * dt
    if probability >= MAX_EMISSION_PROBABILITY:
        raise InvalidArgumentError(
            f"emission probability per sample {probability:g} >= {MAX_EMISSION_PROBABILITY}; "
            "lower the rate or refine dt")
    return probability


def bernoulli_events(trace: np.ndarray, dt: float, mean_rate: float, seed: int, channel: int,
                     first_sample: int = 0) -> np.ndarray:
    """
    Thinning of one trace chunk: sample k emits with probability mean_rate*I[k]*dt.

    One uniform u per sample decides emission (u < p) and, rescaled as u/p, places
    the event uniformly inside the sample. Times are absolute and sorted.
    """
    probability = np.minimum(mean_rate * dt * trace, 1.0)
    uniforms = randomStreams.paged_uniform(seed, randomStreams.channel_tag(randomStreams.THINNING, channel),
                                           first_sample, trace.shape[0])
    hits = np.flatnonzero(uniforms < probability)
    fraction = uniforms[hits] / probability[hits]
    return (first_sample + hits + fraction) * dt


def apply_jitter(times: np.ndarray, sigma: float, seed: int, channel: int) -> np.ndarray:
    """Gaussian timing jitter, re-sorted. Event k always receives normal deviate k of its stream."""
    if sigma == 0 or times.size == 0:
        return times
    shifts = randomStreams.paged_normal(seed, randomStreams.channel_tag(randomStreams.JITTER, channel), 0, times.size)
    return np.sort(times + sigma * shifts)


def apply_dead_time(times: np.ndarray, dead_time: float) -> np.ndarray:
    """Drop events within dead_time of the previous accepted event (non-paralyzable)."""
    if dead_time == 0 or times.size == 0:
        return times
    accepted = []
    i = 0
    while i < times.size:
        accepted.append(i)
        i = int(np.searchsorted(times, times[i] + dead_time, side="left"))
    return times[np.asarray(accepted, dtype=np.int64)]


def thin_photons(trace: np.ndarray, dt: float, det: DetectorSpec, seed: int, channel: int = START_CHANNEL) -> np.ndarray:
    """
    Photon detections for an intensity trace.

    Args:
        trace (np.ndarray): intensity samples (unit mean for a calibrated rate).
        dt (float): sample spacing, seconds.
        det (DetectorSpec): rate, jitter and dead time.
        seed (int): stream seed.
        channel (int): detector channel; different channels draw independent streams.

    Returns:
        np.ndarray: sorted event times in seconds.
    """
    _check_emission(dt, det)
    trace = np.asarray(trace, dtype=np.float64)
    times = bernoulli_events(trace, dt, det.mean_rate, seed, channel)
    times = apply_jitter(times, det.jitter_sigma, seed, channel)
    return apply_dead_time(times, det.dead_time)


def _check_sorted(times: np.ndarray, name: str) -> None:
    if times.size > 1 and np.any(np.diff(times) < 0):
        raise InvalidArgumentError(f"{name} event times must be sorted")


def start_stop_histogram(starts, stops, bin_width: float, window: float, delay: float = 0.0) -> CoincidenceHistogram:
    """
    Single-stop TAC: each start is paired with the first stop strictly after it.

    Args:
        starts: sorted start times, seconds.
        stops: sorted stop times, seconds.
        bin_width (float): histogram bin, seconds.
        window (float): TAC range; pairs further apart are dropped.
        delay (float): stop cable delay; bin_centers are shifted by -delay.

    Returns:
        CoincidenceHistogram: counts over right-closed bins (k*bin_width, (k+1)*bin_width] - delay.
    """
    starts = np.asarray(starts, dtype=np.float64)
    stops = np.asarray(stops, dtype=np.float64)
    _check_sorted(starts, "start")
    _check_sorted(stops, "stop")
    if not (bin_width > 0 and window > 0):
        raise InvalidArgumentError("bin_width and window must be positive")
    if delay < 0:
        raise InvalidArgumentError("delay must be >= 0")
    n_bins = int(round(window / bin_width))
    if n_bins < 1 or abs(n_bins * bin_width - window) > 1e-9 * window:
        raise InvalidArgumentError("window must be a whole number of bins")

    counts = np.zeros(n_bins, dtype=np.int64)
    delayed = stops + delay
    if starts.size and delayed.size:
        first = np.searchsorted(delayed, starts, side="right")
        paired = first < delayed.size
        gaps = delayed[first[paired]] - starts[paired]
        gaps = gaps[gaps <= window * (1 + 1e-12)]
        bins = np.clip(np.ceil(gaps / bin_width - 1e-9).astype(np.int64) - 1, 0, n_bins - 1)
        counts = np.bincount(bins, minlength=n_bins).astype(np.int64)
    centers = (np.arange(n_bins) + 0.5) * bin_width - delay
    return CoincidenceHistogram(bin_width, centers, counts, int(starts.size), int(stops.size), delay)


@dataclass(eq=False)
class G2Estimate:
    g2_curve: np.ndarray = field(repr=False)
    g2_zero: float
    contrast: float
    g2_zero_stderr: float
    baseline: float
    baseline_noise: float
    peak_excess: float

    def __iter__(self):
        # unpacks as (g2_curve, g2_zero, contrast)
        return iter((self.g2_curve, self.g2_zero, self.contrast))


def _pileup_corrected(h: CoincidenceHistogram) -> Tuple[np.ndarray, np.ndarray]:
    """Probability of a first stop in bin k given none earlier (single-stop TAC correction)."""
    counts = h.counts.astype(np.float64)
    at_risk = h.total_starts - np.concatenate([[0.0], np.cumsum(counts)[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(at_risk > 0, counts / at_risk, 0.0)
    return rate, at_risk


def _baseline_bins(h: CoincidenceHistogram, tau_hint: Optional[float]) -> np.ndarray:
    t = h.bin_centers
    if tau_hint is not None:
        return np.abs(t) > 10.0 * tau_hint
    # the quarter of the delay range farthest from zero delay
    return np.abs(t) >= 0.75 * np.max(np.abs(t))


def _zero_delay_fit(t: np.ndarray, g2: np.ndarray, variance: np.ndarray) -> Tuple[float, float]:
    """Parabola through the three bins nearest t = 0: vertex if it is an interior maximum, else its value at 0."""
    nearest = np.sort(np.argsort(np.abs(t))[:3])
    ts, ys = t[nearest], g2[nearest]
    coeffs = np.polyfit(ts, ys, 2)
    a, b = coeffs[0], coeffs[1]
    target = 0.0
    if a < 0:
        vertex = -b / (2.0 * a)
        if ts[0] <= vertex <= ts[-1] and ys[1] >= max(ys[0], ys[2]):
            target = vertex
    # Lagrange weights of the evaluation point give the propagated Poisson error
    weights = np.array([np.prod([(target - ts[j]) / (ts[i] - ts[j]) for j in range(3) if j != i]) for i in range(3)])
    value = float(weights @ ys)
    stderr = float(math.sqrt(weights ** 2 @ variance[nearest]))
    return value, stderr


def estimate_g2(h: CoincidenceHistogram, tau_hint: Optional[float] = None) -> G2Estimate:
    """
    Normalized second-order correlation from a TAC histogram.

    Args:
        h (CoincidenceHistogram): start-stop counts.
        tau_hint (float, optional): expected coherence time; baseline bins are |t| > 10*tau_hint.
            Without it the outer quarter of the delay range is used.

    Returns:
        G2Estimate: g2 curve, g2 at zero delay (3-bin parabola) and contrast g2(0) - 1.
    """
    baseline_bins = _baseline_bins(h, tau_hint)
    if not np.any(baseline_bins):
        raise InvalidArgumentError("histogram has no baseline bins far from zero delay; widen the window")
    rate, at_risk = _pileup_corrected(h)
    baseline = float(np.mean(rate[baseline_bins]))
    if baseline <= 0:
        raise DegenerateStatisticsError("baseline coincidence rate is zero")
    g2 = rate / baseline
    with np.errstate(divide="ignore", invalid="ignore"):
        variance = np.where(h.counts > 0, g2 ** 2 / np.maximum(h.counts, 1), (1.0 / np.maximum(at_risk, 1.0)) / baseline ** 2)
    g2_zero, stderr = _zero_delay_fit(h.bin_centers, g2, variance)
    noise = float(np.std(g2[baseline_bins], ddof=1)) if np.count_nonzero(baseline_bins) > 1 else float("nan")
    peak_excess = float(g2[int(np.argmin(np.abs(h.bin_centers)))] - 1.0)
    return G2Estimate(g2, g2_zero, g2_zero - 1.0, stderr, baseline, noise, peak_excess)


def estimate_coherence_time(h: CoincidenceHistogram, tau_hint: Optional[float] = None) -> float:
    """
    Coherence time from the width of the bunching peak.

    The excess g2 - 1 of an exponential-field source decays as exp(-2|t|/tau0); its
    half-width at half contrast is tau0*ln(2)/2. The crossing is located on the t > 0
    side with a parabola through the bins around it.

    Returns:
        float: tau0 in seconds.
    """
    estimate = estimate_g2(h, tau_hint)
    noise = estimate.baseline_noise
    if not np.isfinite(noise) or not estimate.peak_excess > MEASURABLE_CONTRAST * noise:
        raise NotMeasurableError(
            f"bunching peak not resolved: excess {estimate.peak_excess:.4g} vs baseline noise {noise:.4g}")
    half = 0.5 * estimate.contrast
    t = h.bin_centers
    excess = estimate.g2_curve - 1.0
    positive = np.flatnonzero(t > 0)
    below = [i for i in positive if excess[i] < half]
    if not below:
        raise NotMeasurableError("bunching peak never falls to half contrast inside the window")
    j = below[0]
    if j == 0 or t[j - 1] <= 0:
        crossing = 0.5 * t[j]
    else:
        crossing = t[j - 1] + (excess[j - 1] - half) * (t[j] - t[j - 1]) / (excess[j - 1] - excess[j])
        if j + 1 < t.size:
            coeffs = np.polyfit(t[j - 1:j + 2], excess[j - 1:j + 2] - half, 2)
            roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-30 and t[j - 1] <= r.real <= t[j]]
            if roots:
                crossing = roots[0]
    return 2.0 * crossing / math.log(2.0)


def simulate_hbt(tau0: float, duration: float, dt: float, start_detector: DetectorSpec, stop_detector: DetectorSpec,
                 bin_width: float, window: float, seed: int, delay: float = 0.0, independent_stop: bool = False,
                 chunk_size: int = DEFAULT_CHUNK) -> CoincidenceHistogram:
    """
    Streamed HBT run: trace chunks are thinned for both detectors, then jitter,
    dead time and the TAC histogram are applied to the whole event lists.

    With independent_stop the stop detector watches a second, independent trace.
    """
    _check_emission(dt, start_detector)
    _check_emission(dt, stop_detector)
    starts, stops = [], []
    shared = iter_intensity_trace(tau0, duration, dt, seed, chunk_size)
    other = iter_intensity_trace(tau0, duration, dt, seed, chunk_size, tag=randomStreams.INDEPENDENT_TRACE) \
        if independent_stop else None
    first_sample = 0
    for chunk in shared:
        stop_chunk = next(other) if other is not None else chunk
        starts.append(bernoulli_events(chunk, dt, start_detector.mean_rate, seed, START_CHANNEL, first_sample))
        stops.append(bernoulli_events(stop_chunk, dt, stop_detector.mean_rate, seed, STOP_CHANNEL, first_sample))
        first_sample += chunk.shape[0]
    start_times = np.concatenate(starts)
    stop_times = np.concatenate(stops)
    start_times = apply_dead_time(apply_jitter(start_times, start_detector.jitter_sigma, seed, START_CHANNEL),
                                  start_detector.dead_time)
    stop_times = apply_dead_time(apply_jitter(stop_times, stop_detector.jitter_sigma, seed, STOP_CHANNEL),
                                 stop_detector.dead_time)
    logging.info(f"HBT run: {first_sample} samples, {start_times.size} starts, {stop_times.size} stops")
    return start_stop_histogram(start_times, stop_times, bin_width, window, delay)


def g2_thermal_model(t, tau0: float, jitter_sigma: float = 0.0):
    """
    Expected g2(t) of polarized thermal light with an exponential field correlation.

    The bunching excess exp(-2|t|/tau0) is convolved with the Gaussian timing
    spread of both detectors (jitter_sigma is their combined standard deviation).

    Args:
        t: delay(s) in seconds.
        tau0 (float): coherence time, > 0.
        jitter_sigma (float): combined jitter, >= 0.

    Returns:
        float or np.ndarray: 1 + excess at t.
    """
    if not tau0 > 0:
        raise InvalidArgumentError(f"tau0 must be positive, got {tau0}")
    if jitter_sigma < 0:
        raise InvalidArgumentError("jitter_sigma must be >= 0")
    t_arr = np.abs(np.asarray(t, dtype=np.float64))
    rate = 2.0 / tau0
    if jitter_sigma == 0:
        value = 1.0 + np.exp(-rate * t_arr)
    else:
        s = jitter_sigma
        gauss = np.exp(-0.5 * (t_arr / s) ** 2)
        excess = np.zeros_like(t_arr)
        for sign in (-1.0, 1.0):
            u = (rate * s * s + sign * t_arr) / (s * math.sqrt(2.0))
            # erfcx keeps exp(u^2) erfc(u) finite for large positive u
            with np.errstate(over="ignore", invalid="ignore"):
                scaled = np.where(u >= 0, gauss * erfcx(np.maximum(u, 0.0)),
                                  np.exp(0.5 * (rate * s) ** 2 + sign * rate * t_arr) * erfc(np.minimum(u, 0.0)))
            excess += 0.5 * scaled
        value = 1.0 + excess
    if np.ndim(t) == 0:
        return float(value)
    return value
