import numpy as np
import pytest

from lightgratipy.grating import (
    ComplexPhase,
    GratingBeam,
    GridSpec,
    channel_transmission,
    compute_phi,
    mean_photon_number,
    poisson_weight,
    raman_nath_diagnostic,
    transmission_channels,
    truncation_order,
)
from lightgratipy.species import get_species


@pytest.mark.parametrize(
    "name, power, re, im",
    [
        ("C60", 1.0, 0.20533, 0.016263),
        ("C70", 9.5, 2.279, 0.3863),
    ],
)
def test_compute_phi(name, power, re, im):

    phi = compute_phi(get_species(name), GratingBeam(power=power), 120.0)

    assert phi.re == pytest.approx(re, rel=1e-3)
    assert phi.im == pytest.approx(im, rel=1e-3)


def test_phi_scales_with_power_and_inverse_velocity():

    species = get_species("C60")
    phi = compute_phi(species, GratingBeam(power=2.0), 60.0)
    reference = compute_phi(species, GratingBeam(power=1.0), 120.0)

    assert phi.re == pytest.approx(4 * reference.re, rel=1e-12)
    assert phi.im == pytest.approx(4 * reference.im, rel=1e-12)


def test_compute_phi_rejects_nonpositive_velocity():

    with pytest.raises(ValueError):
        compute_phi(get_species("C60"), GratingBeam(), 0.0)


def test_mean_photon_number_averages_to_twice_imaginary_phase():

    phi = ComplexPhase(1.3, 0.27)
    grid = GridSpec(1, 1024, 514.5e-9)

    nbar = mean_photon_number(phi, grid.x, 2 * np.pi / grid.wavelength)

    assert np.mean(nbar) == pytest.approx(2 * phi.im, abs=1e-9)
    assert phi.mean_photon_number == pytest.approx(0.54)


def test_poisson_weight():

    assert poisson_weight(0.618, 2) == pytest.approx(0.10293, rel=1e-4)
    assert poisson_weight(0.0, 0) == 1.0
    assert poisson_weight(0.0, 3) == 0.0

    total = sum(poisson_weight(2.5, n) for n in range(60))
    assert total == pytest.approx(1.0, abs=1e-12)

    with pytest.raises(ValueError):
        poisson_weight(-0.1, 1)


def test_truncation_order():

    assert truncation_order(ComplexPhase(2.0, 0.0)) == 0
    assert 1 <= truncation_order(ComplexPhase(2.0, 0.1)) <= 12
    assert truncation_order(ComplexPhase(2.0, 10.0)) == 12


def test_channel_at_antinode():

    phi = ComplexPhase(0.205, 0.0163)
    grid = GridSpec(1, 64, 514.5e-9)

    channel = channel_transmission(phi, 0, grid)
    center = channel.samples[grid.n_samples // 2]

    assert grid.x[grid.n_samples // 2] == pytest.approx(0.0, abs=1e-20)
    assert abs(center) == pytest.approx(np.exp(-0.0326), rel=1e-6)
    assert np.angle(center) == pytest.approx(0.410, rel=1e-6)


def test_channels_conserve_molecule_number():

    phi = ComplexPhase(2.3, 0.4)
    grid = GridSpec(2, 128, 514.5e-9)

    channels = transmission_channels(phi, grid, tail_eps=1e-12)
    total = sum(np.abs(ch.samples) ** 2 for ch in channels)

    np.testing.assert_allclose(total, 1.0, atol=1e-11)


def test_absorbing_channels_vanish_at_nodes():

    phi = ComplexPhase(1.0, 0.5)
    grid = GridSpec(1, 64, 514.5e-9)

    # x = -lambda/4 and +lambda/4
    nodes = [16, 48]
    for n in (1, 2, 3):
        samples = channel_transmission(phi, n, grid).samples
        assert np.all(np.abs(samples[nodes]) < 1e-15)


def test_grid_from_extent():

    grid = GridSpec.from_extent(3 * 514.5e-9, 3 * 256, 514.5e-9)
    assert (grid.periods, grid.samples_per_period) == (3, 256)

    with pytest.raises(ValueError):
        GridSpec.from_extent(2.5 * 514.5e-9, 1000, 514.5e-9)


def test_raman_nath_diagnostic():

    species = get_species("C60")
    beam = GratingBeam()

    diagnostic = raman_nath_diagnostic(species, beam, 120.0, ComplexPhase(2.0, 0.0))

    assert diagnostic.displacement == pytest.approx(1.795e-9, rel=1e-3)
    assert diagnostic.ratio == pytest.approx(0.00698, rel=2e-3)
    assert not diagnostic.warning

    slow = raman_nath_diagnostic(species, beam, 10.0, ComplexPhase(20.0, 0.0))
    assert slow.warning


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_channel_periodicity_and_parity(n):

    phi = ComplexPhase(2.3, 0.4)
    grid = GridSpec(2, 128, 514.5e-9)
    samples = channel_transmission(phi, n, grid).samples

    # one laser wavelength is 128 samples
    np.testing.assert_allclose(np.roll(samples, 128), samples, rtol=0, atol=1e-12)

    half = np.roll(samples, 64)
    if n % 2 == 0:
        np.testing.assert_allclose(half, samples, rtol=0, atol=1e-12)
    else:
        np.testing.assert_allclose(half, -samples, rtol=0, atol=1e-12)

    # x_j -> -x_j is index j -> N - j on the periodic window
    mirrored = samples[(-np.arange(grid.n_samples)) % grid.n_samples]
    np.testing.assert_allclose(mirrored, samples, rtol=0, atol=1e-12)
