import numpy as np
import pytest
from OpticsObjects.OpticalGeometry import OpticalGeometry
from OpticsObjects.SourceSpec import SourceSpec
from functions.analytic import predicted_speckle_size
from functions.coherence import (kernel_diagonal, kernel_scale, mutual_coherence_kernel,
                                 mutual_coherence_matrix)


def equal_arm_phase(x1, x2, wavelength, z):
    return np.exp(1j * np.pi * (x1 ** 2 - x2 ** 2) / (wavelength * z))


def test_uniform_source_follows_the_sinc_law(fig2_source, fig2_geometry):
    lam, a, z = fig2_source.wavelength, fig2_source.half_width, fig2_geometry.z1
    x1 = np.array([-0.4e-3, 0.0, 0.25e-3])
    x2 = np.linspace(-2e-3, 2e-3, 41)
    kernel = mutual_coherence_matrix(x1, x2, fig2_source, fig2_geometry)
    q = x1[:, None] - x2[None, :]
    expected = (2 * a / (lam * z)) * np.sinc(2 * a * q / (lam * z)) * equal_arm_phase(x1[:, None], x2[None, :], lam, z)
    scale = kernel_scale(fig2_source, fig2_geometry)
    assert np.max(np.abs(kernel - expected)) <= 1e-6 * scale


def test_first_zero_sits_at_the_speckle_size(fig2_source, fig2_geometry):
    width = predicted_speckle_size(fig2_source, fig2_geometry.z2)
    assert width == pytest.approx(0.705e-3, rel=0.01)
    at_zero = mutual_coherence_kernel(0.0, width, fig2_source, fig2_geometry)
    assert abs(at_zero) <= 1e-6 * kernel_scale(fig2_source, fig2_geometry)


def test_diagonal_is_the_mean_intensity(fig2_source):
    expected = 2 * fig2_source.half_width / (fig2_source.wavelength * 1.7)
    assert kernel_diagonal(fig2_source, 1.7) == pytest.approx(expected, rel=1e-7)


def test_swapping_the_arms_conjugates_the_kernel(fig3_source):
    geom = OpticalGeometry(0.3, 0.25)
    x1 = np.linspace(-0.2e-3, 0.2e-3, 5)
    x2 = np.linspace(-0.3e-3, 0.1e-3, 7)
    forward = mutual_coherence_matrix(x1, x2, fig3_source, geom)
    backward = mutual_coherence_matrix(x2, x1, fig3_source, geom.swapped())
    scale = kernel_scale(fig3_source, geom)
    assert np.max(np.abs(forward - np.conj(backward.T))) <= 1e-12 * scale


def test_gaussian_source_has_a_gaussian_kernel():
    lam, w, z = 693e-9, 1e-3, 1.0
    source = SourceSpec.gaussian(lam, w)
    q = np.linspace(-0.3e-3, 0.3e-3, 13)
    kernel = mutual_coherence_matrix([0.0], q, source, OpticalGeometry(z, z))[0]
    k = 2 * np.pi * q / (lam * z)
    expected = (w * np.sqrt(np.pi / 2) / (lam * z)) * np.exp(-(k * w) ** 2 / 8) * equal_arm_phase(0.0, q, lam, z)
    assert np.max(np.abs(kernel - expected)) <= 1e-6 * np.abs(expected[6])


def test_gaussian_kernel_peaks_at_coincidence():
    source = SourceSpec.gaussian(693e-9, 1e-3)
    x1 = np.array([-0.2e-3, 0.0, 0.15e-3])
    x2 = np.linspace(-0.4e-3, 0.4e-3, 161)
    magnitude = np.abs(mutual_coherence_matrix(x1, x2, source, OpticalGeometry(0.5, 0.5)))
    for row, x in zip(magnitude, x1):
        assert x2[int(np.argmax(row))] == pytest.approx(x, abs=1e-12)
    assert magnitude.max() == pytest.approx(kernel_diagonal(source, 0.5), rel=1e-6)


def test_single_value_matches_the_matrix(fig3_source):
    geom = OpticalGeometry(0.3, 0.3)
    matrix = mutual_coherence_matrix([0.1e-3, 0.2e-3], [-0.05e-3, 0.0], fig3_source, geom)
    value = mutual_coherence_kernel(0.2e-3, -0.05e-3, fig3_source, geom)
    assert abs(value - matrix[1, 0]) <= 1e-7 * kernel_scale(fig3_source, geom)
