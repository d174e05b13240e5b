import numpy as np
import pytest
from configManager.scenarioHandler import parse_scenario
from OpticsObjects.CorrelationProfile import CorrelationProfile
from OpticsObjects.EnsembleConfig import EnsembleConfig
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec
from OpticsObjects.TransmissionMask import TransmissionMask
from OpticsObjects.TransverseGrid import centered_grid, make_grid
from functions.errors import DegenerateStatisticsError, InvalidArgumentError, ShapeError
from services.ensemble import (aperture_average, background_subtract, collect_records, delta_g2_montecarlo,
                               draw_source_realization, estimate_delta_g2, simulate_realization)
from services.scenarioRunner import run_scenario

LAMBDA = 693e-9
GEOM = OpticalGeometry(0.2, 0.2)


@pytest.fixture
def small_source():
    return SourceSpec.uniform(LAMBDA, 0.3e-3)


def small_config(threads=1, scan_step=None, n=40, seed=9, n_batches=4):
    source_grid = make_grid(-0.3e-3, 0.3e-3, 41)
    object_grid = centered_grid(0.5e-3, 65)
    detector_grid = centered_grid(0.5e-3, 101)
    return EnsembleConfig(n, seed, source_grid, object_grid, detector_grid, (object_grid.x_min, object_grid.x_max),
                          n_batches=n_batches, threads=threads, scan_step=scan_step, block_size=8)


def test_realizations_depend_only_on_seed_and_index(small_source):
    grid = make_grid(-0.3e-3, 0.3e-3, 41)
    a = draw_source_realization(small_source, grid, 5, 123).amplitude
    b = draw_source_realization(small_source, grid, 5, 123).amplitude
    c = draw_source_realization(small_source, grid, 6, 123).amplitude
    d = draw_source_realization(small_source, grid, 5, 124).amplitude
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


def test_dark_source_gives_a_zero_field():
    grid = make_grid(-1e-3, 1e-3, 5)
    dark = SourceSpec.sampled(LAMBDA, grid, np.zeros(5))
    assert not np.any(draw_source_realization(dark, grid, 0, 1).amplitude)


def test_aperture_average_truncates_at_the_edges():
    grid = make_grid(0.0, 4.0, 5)
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    np.testing.assert_allclose(aperture_average(values, grid, 2.0), [1.5, 2.0, 3.0, 4.0, 4.5])
    np.testing.assert_array_equal(aperture_average(values, grid, 0.5), values)


def test_ratio_estimator_by_hand():
    i1 = np.array([1.0, 2.0, 3.0, 4.0])
    i2 = np.array([[1.0], [3.0], [2.0], [6.0]])
    values, std_err, method = estimate_delta_g2(i1, i2, n_batches=16)
    # cov = 7/3 with the unbiased estimator, means 2.5 and 3
    assert values[0] == pytest.approx(7 / 3 / 7.5)
    assert method == "jackknife"
    assert std_err[0] > 0

    _, std_err, method = estimate_delta_g2(i1, i2, n_batches=2)
    assert method == "batch_means"
    # batch estimates 1/3 and 1/7
    assert std_err[0] == pytest.approx(2 / 21)

    _, std_err, method = estimate_delta_g2(i1[:2], i2[:2])
    assert method == "none"
    assert std_err[0] == 0


def test_degenerate_records_raise():
    with pytest.raises(DegenerateStatisticsError):
        estimate_delta_g2(np.zeros(4), np.ones((4, 3)))
    with pytest.raises(DegenerateStatisticsError):
        estimate_delta_g2(np.ones(4), np.zeros((4, 3)))
    with pytest.raises(InvalidArgumentError):
        estimate_delta_g2(np.ones(1), np.ones((1, 3)))


def test_records_do_not_depend_on_thread_count(small_source):
    mask = TransmissionMask.single_slit(centered_grid(0.5e-3, 65), 200e-6)
    one = collect_records(mask, small_source, GEOM, small_config(threads=1))
    four = collect_records(mask, small_source, GEOM, small_config(threads=4))
    np.testing.assert_array_equal(one[0], four[0])
    np.testing.assert_array_equal(one[1], four[1])


def test_batched_rows_match_a_single_realization(small_source):
    cfg = small_config()
    mask = TransmissionMask.single_slit(cfg.object_grid, 200e-6)
    i1, i2 = collect_records(mask, small_source, GEOM, cfg)
    field = draw_source_realization(small_source, cfg.source_grid, 3, cfg.master_seed)
    record = simulate_realization(field, mask, GEOM, cfg, LAMBDA)
    assert record.i1 == pytest.approx(i1[3], rel=1e-10)
    np.testing.assert_allclose(record.i2, i2[3], rtol=1e-10)


def test_scan_step_decimates_the_reported_samples(small_source):
    cfg = small_config(scan_step=20e-6)
    mask = TransmissionMask.single_slit(cfg.object_grid, 200e-6)
    profile = delta_g2_montecarlo(mask, small_source, GEOM, cfg)
    assert len(profile) == 51
    np.testing.assert_allclose(np.diff(profile.x2), 20e-6)
    assert profile.error_method == "batch_means"
    raw = delta_g2_montecarlo(mask, small_source, GEOM, cfg, normalization="raw_g2")
    np.testing.assert_allclose(raw.delta_g2, profile.delta_g2 + 1.0)


def test_error_bars_shrink_as_one_over_root_n(small_source):
    mask = TransmissionMask.single_slit(centered_grid(0.5e-3, 65), 200e-6)
    # n_batches above n/2 selects the jackknife for both sizes
    small = delta_g2_montecarlo(mask, small_source, GEOM, small_config(n=256, seed=21, n_batches=4096))
    large = delta_g2_montecarlo(mask, small_source, GEOM, small_config(n=1024, seed=22, n_batches=4096))
    assert small.error_method == large.error_method == "jackknife"
    ratio = np.mean(small.std_err) / np.mean(large.std_err)
    assert ratio == pytest.approx(2.0, rel=0.2)


def test_point_source_reaches_the_siegert_value():
    source_grid = make_grid(-1e-6, 1e-6, 3)
    point = SourceSpec.sampled(LAMBDA, source_grid, np.array([0.0, 1.0, 0.0]))
    object_grid = centered_grid(0.5e-3, 65)
    cfg = EnsembleConfig(2000, 5, source_grid, object_grid, centered_grid(0.5e-3, 101),
                         (object_grid.x_min, object_grid.x_max), n_batches=16)
    raw = delta_g2_montecarlo(TransmissionMask.uniform(object_grid), point, GEOM, cfg, normalization="raw_g2")
    # one coherent mode: both arms see the same exponential intensity statistics everywhere
    np.testing.assert_allclose(raw.delta_g2, raw.delta_g2[50], rtol=1e-9)
    assert abs(raw.delta_g2[50] - 2.0) <= 3.0 * raw.std_err[50]
    assert raw.std_err[50] < 0.15


def test_mask_on_a_foreign_grid_is_rejected(small_source):
    cfg = small_config()
    with pytest.raises(ShapeError):
        collect_records(TransmissionMask.uniform(centered_grid(0.5e-3, 64)), small_source, GEOM, cfg)


def test_opaque_object_is_degenerate(small_source):
    cfg = small_config()
    with pytest.raises(DegenerateStatisticsError):
        delta_g2_montecarlo(TransmissionMask.opaque(cfg.object_grid), small_source, GEOM, cfg)


def test_background_subtract_uses_the_median_outside():
    x = np.linspace(-1e-3, 1e-3, 201)
    values = np.where(np.abs(x) <= 0.2e-3, 1.0, 0.05)
    profile = CorrelationProfile(x, values, np.zeros_like(x))
    shifted, baseline = background_subtract(profile, [(0.0, 0.2e-3)], 0.1e-3)
    assert baseline == pytest.approx(0.05)
    np.testing.assert_allclose(shifted.delta_g2[np.abs(x) > 0.2e-3], 0.0, atol=1e-15)
    with pytest.raises(DegenerateStatisticsError):
        background_subtract(profile, [(0.0, 2e-3)], 0.1e-3)


@pytest.mark.slow
def test_montecarlo_agrees_with_the_analytic_image():
    cfg = parse_scenario("""\
kind: focused_image
method: both
seed: 3
wavelength: 693 nm
source_half_width: 6 mm
z1: 300 mm
z2: 300 mm
mask: double_slit
slit_width: 100 um
slit_separation: 200 um
n_realizations: 4096
detector_points: 512
""")
    result, report = run_scenario(cfg)
    assert set(result.profiles) == {"montecarlo", "analytic", "difference"}
    assert report.extras["within_3_sigma_fraction"] >= 0.95
