import numpy as np
import pytest

from lightgratipy.distributions import (
    DetectorModel,
    VelocityDistribution,
    VerticalProfile,
    detector_kernel,
    distribution_fwhm,
    load_velocity_histogram,
    source_quadrature,
    velocity_quadrature,
    vertical_phi_scales,
)


def test_gaussian_velocity_quadrature():

    dist = VelocityDistribution(v_peak=120.0, fwhm_ratio=0.17)

    nodes, weights = velocity_quadrature(dist, 16)

    assert weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.sum(nodes * weights) == pytest.approx(120.0, rel=1e-12)
    np.testing.assert_allclose(nodes - 120.0, -(nodes[::-1] - 120.0), atol=1e-12)
    assert distribution_fwhm(nodes, weights) == pytest.approx(dist.fwhm, rel=2e-2)
    assert nodes.min() == pytest.approx(120.0 - 2.5 * 20.4 * 15 / 16, rel=1e-12)


def test_single_velocity_node():

    nodes, weights = velocity_quadrature(VelocityDistribution(v_peak=150.0), 1)

    np.testing.assert_array_equal(nodes, [150.0])
    np.testing.assert_array_equal(weights, [1.0])


def test_broad_distribution_is_truncated_at_zero():

    nodes, weights = velocity_quadrature(VelocityDistribution(v_peak=100.0, fwhm_ratio=0.9), 32)

    assert np.all(nodes > 0)
    assert weights.sum() == pytest.approx(1.0)


def test_histogram_velocity_distribution(tmp_path):

    filename = tmp_path / "velocities.txt"
    filename.write_text("# v weight\n-5 1.0\n100 1.0\n120 2.0\n140 1.0\n")

    histogram = load_velocity_histogram(str(filename))
    dist = VelocityDistribution(shape="histogram", histogram=histogram)

    nodes, weights = velocity_quadrature(dist)

    np.testing.assert_array_equal(nodes, [100.0, 120.0, 140.0])
    np.testing.assert_allclose(weights, [0.25, 0.5, 0.25])


def test_histogram_file_errors(tmp_path):

    filename = tmp_path / "bad.txt"
    filename.write_text("100 1.0 3.0\n")

    with pytest.raises(ValueError):
        load_velocity_histogram(str(filename))

    with pytest.raises(ValueError):
        VelocityDistribution(shape="histogram")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"v_peak": 0.0},
        {"fwhm_ratio": 1.5},
        {"shape": "maxwell"},
    ],
)
def test_invalid_velocity_distribution(kwargs):

    with pytest.raises(ValueError):
        VelocityDistribution(**kwargs)


def test_vertical_phi_scales():

    scales, weights = vertical_phi_scales(VerticalProfile(625e-6, 1.3e-3), 16)

    assert weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all((scales > 0) & (scales <= 1))
    assert np.sum(scales * weights) == pytest.approx(0.926, abs=2e-3)


def test_source_quadrature():

    nodes, weights = source_quadrature(7e-6, 8)

    assert np.all(np.abs(nodes) < 3.5e-6)
    np.testing.assert_allclose(nodes, -nodes[::-1], atol=1e-20)
    assert weights.sum() == pytest.approx(1.0)


def test_detector_kernels():

    gaussian = detector_kernel(DetectorModel(width=6e-6), 0.1e-6)
    assert gaussian.size % 2 == 1
    assert gaussian.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(gaussian, gaussian[::-1])
    assert np.argmax(gaussian) == gaussian.size // 2

    tophat = detector_kernel(DetectorModel(width=6e-6, kernel_shape="tophat"), 1e-6)
    np.testing.assert_allclose(tophat, np.full(7, 1 / 7))

    narrow = detector_kernel(DetectorModel(width=0.05e-6), 0.1e-6)
    np.testing.assert_array_equal(narrow, [1.0])


def test_invalid_detector():

    with pytest.raises(ValueError):
        DetectorModel(step=0.0)

    with pytest.raises(ValueError):
        DetectorModel(kernel_shape="lorentz")
