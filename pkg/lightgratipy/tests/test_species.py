import numpy as np
import pytest

from lightgratipy.grating import GratingBeam
from lightgratipy.species import (
    ComplexPolarizability,
    MoleculeSpecies,
    absorption_cross_section,
    de_broglie_wavelength,
    get_species,
    polarizability_from_cross_section,
)


K_L = GratingBeam().k_L


@pytest.mark.parametrize(
    "name, sigma_cm2",
    [
        ("C60", 1.2277e-17),
        ("C70", 3.069e-17),
    ],
)
def test_absorption_cross_section(name, sigma_cm2):

    sigma = absorption_cross_section(get_species(name), K_L) * 1e4

    assert sigma == pytest.approx(sigma_cm2, rel=2e-3)


@pytest.mark.parametrize("name", ["C60", "C70"])
def test_cross_section_inverts_to_polarizability(name):

    species = get_species(name)
    sigma = absorption_cross_section(species, K_L)

    alpha_im = polarizability_from_cross_section(sigma, K_L)

    assert alpha_im == pytest.approx(species.polarizability.imag_volume, rel=1e-12)


@pytest.mark.parametrize(
    "name, wavelength",
    [
        ("C60", 4.6184e-12),
        ("C70", 3.9586e-12),
    ],
)
def test_de_broglie_wavelength(name, wavelength):

    assert de_broglie_wavelength(get_species(name), 120.0) == pytest.approx(wavelength, rel=1e-4)


def test_de_broglie_wavelength_on_arrays():

    species = get_species("C60")
    v = np.array([60.0, 120.0, 240.0])

    wavelengths = de_broglie_wavelength(species, v)

    np.testing.assert_allclose(wavelengths * v, 120.0 * de_broglie_wavelength(species, 120.0))


@pytest.mark.parametrize("v", [0.0, -10.0])
def test_de_broglie_wavelength_rejects_nonpositive_velocity(v):

    with pytest.raises(ValueError):
        de_broglie_wavelength(get_species("C60"), v)


def test_species_lookup():

    assert get_species("c70").mass == 840.0

    custom = MoleculeSpecies("C60", 721.0, ComplexPolarizability(100.0, 0.0))
    assert get_species("C60", {"C60": custom}).mass == 721.0

    with pytest.raises(KeyError, match="C60"):
        get_species("C84")


def test_species_validation():

    with pytest.raises(ValueError):
        MoleculeSpecies("X", -1.0, ComplexPolarizability(1.0))

    with pytest.raises(ValueError):
        ComplexPolarizability(100.0, -1.0)
