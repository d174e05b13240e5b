"""
Result files. Everything except timing.json and the log is a pure function of
the scenario and seed, so reruns reproduce them byte for byte.

    profile.csv             x2_m, delta_g2, std_err
    profile_analytic.csv    same columns, method = both
    profile_difference.csv  Monte Carlo minus analytic, method = both
    sweep.csv               z2_m, x2_m, delta_g2 (long format), z2 sweeps
    sweep_analytic.csv      analytic sweep, method = both
    profile_z2_NNN.csv      every sweep row of the main method, same columns as profile.csv
    sweep_metrics.csv       z2_m, magnification, peak_separation_m, second_moment_m2, row_max
    profile_background_subtracted.csv
                            main image minus its median outside the feature neighborhoods
    histogram.csv           t_s, counts, g2, g2_model, HBT runs
    metrics.json            MetricsReport without runtime
    timing.json             runtime_seconds
    scenario.yaml           normalized scenario the run used
    profile.svg             line plot of the exported image or g2 curve
"""
import csv
import json
import os
import logManager
import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
from typing import Iterable, List, Optional, Sequence
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.MetricsReport import MetricsReport
from functions.errors import ExportError

logging = logManager.logger.get_logger(__name__)

SVG_HASH_SALT = "ghostsim"
PROFILE_HEADER = ["x2_m", "delta_g2", "std_err"]
SWEEP_HEADER = ["z2_m", "x2_m", "delta_g2"]
HISTOGRAM_HEADER = ["t_s", "counts", "g2", "g2_model"]
SWEEP_METRICS = ["peak_separation_m", "second_moment_m2", "row_max"]
SWEEP_METRICS_HEADER = ["z2_m", "magnification"] + SWEEP_METRICS


def format_float(value: float) -> str:
    """17 significant digits: enough to read back the exact double."""
    return f"{float(value):.17g}"


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as err:
        raise ExportError(err.strerror or str(err), path=path) from err
    logging.debug(f"wrote {path}")


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)
    except OSError as err:
        raise ExportError(err.strerror or str(err), path=path) from err
    logging.debug(f"wrote {path}")


def _profile_rows(profile: CorrelationProfile):
    fluct = profile.as_fluctuation()
    for x, v, e in zip(fluct.x2, fluct.delta_g2, fluct.std_err):
        yield format_float(x), format_float(v), format_float(e)


def _sweep_rows(z2_values, x2, matrix):
    for z2, row in zip(z2_values, matrix):
        for x, v in zip(x2, row):
            yield format_float(z2), format_float(x), format_float(v)


def _sweep_metric_rows(result):
    z1 = result.cfg.z1
    for i, z2 in enumerate(result.z2_values):
        values = [result.sweep_metrics[key][i] for key in SWEEP_METRICS]
        yield [format_float(z2), format_float(z2 / z1)] + [format_float(v) for v in values]


def _histogram_rows(result):
    h = result.histogram
    for t, n, g, m in zip(h.bin_centers, h.counts, result.g2_curve, result.g2_model):
        yield format_float(t), str(int(n)), format_float(g), format_float(m)


def _render_svg(result, path: str) -> None:
    fig = Figure(figsize=(6.4, 4.0))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot(1, 1, 1)
    if result.histogram is not None:
        t_ns = result.histogram.bin_centers * 1e9
        ax.plot(t_ns, result.g2_curve, drawstyle="steps-mid", label="simulated")
        ax.plot(t_ns, result.g2_model, label="thermal model")
        ax.set_xlabel("stop - start delay (ns)")
        ax.set_ylabel("g2")
    else:
        for key, profile in result.profiles.items():
            if key == "difference":
                continue
            ax.plot(profile.x2 * 1e3, profile.as_fluctuation().delta_g2, label=key)
        ax.set_xlabel("x2 (mm)")
        ax.set_ylabel("delta g2")
    ax.legend(loc="upper right")
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as err:
            raise ExportError(err.strerror or str(err), path=path) from err
    logging.debug(f"wrote {path}")


def export_results(result, report: MetricsReport, out_dir: str, svg: bool = True,
                   scenario_text: Optional[str] = None) -> List[str]:
    """
    Write the result files of one run.

    Args:
        result (ScenarioResult): profiles, sweep matrices or HBT histogram; may be empty.
        report (MetricsReport): metrics of the run.
        out_dir (str): created when missing.
        svg (bool): also render profile.svg when there is something to plot.
        scenario_text (str, optional): normalized scenario, kept as scenario.yaml next to the results.

    Returns:
        list: paths written, in writing order.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        raise ExportError(err.strerror or str(err), path=out_dir) from err
    written: List[str] = []

    def target(name: str) -> str:
        path = os.path.join(out_dir, name)
        written.append(path)
        return path

    main_key = "montecarlo" if "montecarlo" in result.profiles else "analytic"
    for key, profile in result.profiles.items():
        name = "profile.csv" if key == main_key else f"profile_{key}.csv"
        _write_csv(target(name), PROFILE_HEADER, _profile_rows(profile))

    if result.z2_values is not None:
        x2 = result.primary.x2
        for key, matrix in result.sweeps.items():
            if key == "difference":
                continue
            name = "sweep.csv" if key == main_key else f"sweep_{key}.csv"
            _write_csv(target(name), SWEEP_HEADER, _sweep_rows(result.z2_values, x2, matrix))
        for i, profile in enumerate(result.sweep_profiles.get(main_key, [])):
            _write_csv(target(f"profile_z2_{i:03d}.csv"), PROFILE_HEADER, _profile_rows(profile))
        if result.sweep_metrics:
            _write_csv(target("sweep_metrics.csv"), SWEEP_METRICS_HEADER, _sweep_metric_rows(result))

    if result.background_subtracted is not None:
        _write_csv(target("profile_background_subtracted.csv"), PROFILE_HEADER,
                   _profile_rows(result.background_subtracted))

    if result.histogram is not None:
        _write_csv(target("histogram.csv"), HISTOGRAM_HEADER, _histogram_rows(result))

    if scenario_text is not None:
        _write_text(target("scenario.yaml"), scenario_text)

    has_results = bool(result.profiles) or result.histogram is not None
    _write_text(target("metrics.json"), json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n")
    if has_results:
        _write_text(target("timing.json"), json.dumps({"runtime_seconds": report.runtime_seconds}, indent=2) + "\n")
    if svg and has_results:
        _render_svg(result, target("profile.svg"))
    logging.info(f"results written to {out_dir} ({len(written)} files)")
    return written
