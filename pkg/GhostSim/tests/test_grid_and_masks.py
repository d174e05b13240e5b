import math
import numpy as np
import pytest
from scipy.integrate import quad
from OpticsObjects.CoincidenceHistogram import CoincidenceHistogram
from OpticsObjects.ComplexField import ComplexField
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.EnsembleConfig import EnsembleConfig
from OpticsObjects.MetricsReport import MetricsReport
from OpticsObjects.PointlikeObject import PointlikeObject
from OpticsObjects.SourceSpec import SourceSpec
from OpticsObjects.TransmissionMask import TransmissionMask
from OpticsObjects.TransverseGrid import centered_grid, make_grid
from functions.errors import DegenerateStatisticsError, InvalidArgumentError, ShapeError


def test_grid_coordinates_are_index_based():
    grid = make_grid(-1e-3, 1e-3, 2001)
    assert grid.dx == pytest.approx(1e-6)
    coords = grid.coordinates
    assert coords[0] == -1e-3
    assert coords[1000] == pytest.approx(0.0, abs=1e-15)
    assert coords[-1] == pytest.approx(1e-3, rel=1e-15)
    assert grid.nearest_index(0.2e-3 + 0.3e-6) == 1200
    assert grid.contains(1e-3) and not grid.contains(1.1e-3)


@pytest.mark.parametrize("x_min, x_max, n", [(0.0, 1.0, 1), (1.0, 0.0, 10), (0.0, math.inf, 10), (0.0, 1.0, 2.5)])
def test_grid_rejects_bad_arguments(x_min, x_max, n):
    with pytest.raises(InvalidArgumentError):
        make_grid(x_min, x_max, n)


def test_double_slit_center_to_center():
    grid = centered_grid(300e-6, 601)  # 1 um spacing
    mask = TransmissionMask.double_slit(grid, 100e-6, 200e-6)
    assert mask.features == [(-100e-6, 100e-6), (100e-6, 100e-6)]
    open_x = grid.coordinates[mask.power_transmission > 0]
    # 101 samples per slit, the 100 um gap between them stays dark
    assert open_x.size == 202
    assert np.all(np.abs(np.abs(open_x) - 100e-6) <= 50e-6 + 1e-12)


def test_double_slit_rejects_overlap():
    grid = centered_grid(300e-6, 601)
    with pytest.raises(InvalidArgumentError):
        TransmissionMask.double_slit(grid, 200e-6, 150e-6)


def test_pinhole_pair_widths():
    grid = centered_grid(4e-3, 8001)
    mask = TransmissionMask.pinhole_pair(grid, 0.77e-3, 0.72e-3, 3.66e-3)
    x = grid.coordinates
    left = np.count_nonzero(mask.power_transmission[x < 0]) * grid.dx
    right = np.count_nonzero(mask.power_transmission[x > 0]) * grid.dx
    assert left == pytest.approx(0.77e-3, abs=2 * grid.dx)
    assert right == pytest.approx(0.72e-3, abs=2 * grid.dx)


def test_single_point_opens_one_sample():
    grid = centered_grid(1e-3, 101)
    mask = TransmissionMask.single_point(grid, 0.305e-3)
    assert np.count_nonzero(mask.t) == 1
    assert mask.features[0][0] == pytest.approx(0.3e-3)
    assert mask.features[0][1] == pytest.approx(grid.dx)


def test_mask_rejects_gain_and_wrong_length():
    grid = centered_grid(1e-3, 11)
    with pytest.raises(InvalidArgumentError):
        TransmissionMask(grid, np.full(11, 1.5))
    with pytest.raises(InvalidArgumentError):
        TransmissionMask(grid, np.ones(10))


def test_field_shape_and_power():
    grid = centered_grid(1e-3, 11)
    with pytest.raises(ShapeError):
        ComplexField(grid, np.ones(12))
    field = ComplexField(grid, np.full(11, 2.0 + 0j))
    assert field.total_power == pytest.approx(4.0 * 11 * grid.dx)


def test_source_profiles():
    uniform = SourceSpec.uniform(693e-9, 1e-3)
    np.testing.assert_array_equal(uniform.intensity([-1e-3, 0.0, 1e-3, 1.001e-3]), [1, 1, 1, 0])
    assert uniform.total_intensity() == pytest.approx(2e-3)

    gaussian = SourceSpec.gaussian(693e-9, 1e-3)
    integral, _ = quad(lambda x: float(gaussian.intensity(x)), -5e-3, 5e-3, points=[0.0], epsabs=0, epsrel=1e-12)
    assert gaussian.total_intensity() == pytest.approx(integral, rel=1e-9)
    assert gaussian.support() == pytest.approx((-4e-3, 4e-3))


def test_sampled_source_is_zero_outside_and_dark_fails_validation():
    grid = make_grid(-1e-3, 1e-3, 5)
    source = SourceSpec.sampled(693e-9, grid, [0.0, 1.0, 2.0, 1.0, 0.0])
    assert float(source.intensity(0.25e-3)) == pytest.approx(1.5)
    assert float(source.intensity(2e-3)) == 0.0
    assert source.support() == pytest.approx((-1e-3, 1e-3))
    dark = SourceSpec.sampled(693e-9, grid, np.zeros(5))
    with pytest.raises(DegenerateStatisticsError):
        dark.validate()


def test_correlation_profile_normalizations():
    profile = CorrelationProfile([0.0, 1.0], [0.1, 0.2], [0.0, 0.0])
    raw = profile.as_raw_g2()
    np.testing.assert_allclose(raw.delta_g2, [1.1, 1.2])
    np.testing.assert_allclose(raw.as_fluctuation().delta_g2, [0.1, 0.2])
    with pytest.raises(ShapeError):
        CorrelationProfile([0.0, 1.0], [0.1], [0.0, 0.0])


def test_ensemble_config_validation():
    source = centered_grid(1e-3, 101)
    obj = centered_grid(1e-3, 101)
    det = centered_grid(1e-3, 201)  # 10 um
    cfg = EnsembleConfig(16, 1, source, obj, det, (-1e-3, 1e-3), scan_step=50e-6)
    assert cfg.decimation() == 5
    with pytest.raises(InvalidArgumentError):
        EnsembleConfig(16, 1, source, obj, det, (-1e-3, 1e-3), scan_step=25e-6)
    with pytest.raises(InvalidArgumentError):
        EnsembleConfig(1, 1, source, obj, det, (-1e-3, 1e-3))
    with pytest.raises(InvalidArgumentError):
        EnsembleConfig(16, 2 ** 64, source, obj, det, (-1e-3, 1e-3))
    with pytest.raises(InvalidArgumentError):
        EnsembleConfig(16, 1, source, obj, det, (-2e-3, 1e-3))


def test_histogram_cannot_hold_more_pairs_than_starts():
    with pytest.raises(InvalidArgumentError):
        CoincidenceHistogram(1e-11, [5e-12, 15e-12], [3, 2], total_starts=4, total_stops=10)
    h = CoincidenceHistogram(1e-11, [5e-12, 15e-12], [1, 2], 10, 10)
    assert h.n_bins == 2
    with pytest.raises(InvalidArgumentError):
        CoincidenceHistogram(1e-11, [5e-12, 15e-12], [1, -1], 10, 10)


def test_pointlike_object_checks():
    obj = PointlikeObject.unit_features([0.0, 1e-3])
    assert obj.N == 2
    with pytest.raises(InvalidArgumentError):
        PointlikeObject([0.0], [0.0])


def test_metrics_report_drops_runtime_and_nan():
    report = MetricsReport("focused_image", "analytic", 0.2, [1.0, 2.0], 1.0, [float("nan"), 0.5],
                           runtime_seconds=12.5, extras={"peak_to_midpoint": float("inf")})
    data = report.to_dict()
    assert "runtime_seconds" not in data
    assert data["fwhm_per_peak"] == [None, 0.5]
    assert data["peak_to_midpoint"] is None
