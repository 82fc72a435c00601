#!/usr/bin/env python

"""Physical constants, unit conversions and the molecule species catalog."""

import math
from dataclasses import dataclass

import numpy as np


######################################################################
######################################################################


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Set of physical constants in SI units.

    Attributes
    ----------
    h : float
        Planck constant (J s).
    c : float
        Speed of light (m/s).
    eps0 : float
        Vacuum permittivity (F/m).
    amu : float
        Atomic mass unit (kg).
    """

    h: float
    c: float
    eps0: float
    amu: float

    @property
    def hbar(self):
        """Reduced Planck constant (J s)."""
        return self.h / (2 * math.pi)


# CODATA 2018
CODATA2018 = PhysicalConstants(
    h=6.62607015e-34,
    c=299792458.0,
    eps0=8.8541878128e-12,
    amu=1.66053906660e-27,
)

ANGSTROM3 = 1e-30


######################################################################
######################################################################


@dataclass(frozen=True)
class ComplexPolarizability:
    """
    Complex polarizability given as polarizability volume alpha / (4 pi eps0).

    Attributes
    ----------
    real_volume : float
        Real part in Angstrom^3.
    imag_volume : float
        Imaginary part in Angstrom^3 (absorption), must be >= 0.
    """

    real_volume: float
    imag_volume: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.real_volume):
            raise ValueError(f"real polarizability volume must be finite, got {self.real_volume}")
        if not (self.imag_volume >= 0 and math.isfinite(self.imag_volume)):
            raise ValueError(
                f"imaginary polarizability volume must be >= 0, got {self.imag_volume}"
            )


@dataclass(frozen=True)
class MoleculeSpecies:
    """
    Diffracted particle.

    Attributes
    ----------
    name : str
        Label, e.g. "C60".
    mass : float
        Mass in amu.
    polarizability : ComplexPolarizability
        Polarizability at the grating wavelength.
    """

    name: str
    mass: float
    polarizability: ComplexPolarizability

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass of {self.name} must be > 0, got {self.mass}")

    @property
    def mass_kg(self):
        return self.mass * CODATA2018.amu


# ground state values at 514 nm
SPECIES_CATALOG = {
    "C60": MoleculeSpecies("C60", 720.0, ComplexPolarizability(101.0, 8.0)),
    "C70": MoleculeSpecies("C70", 840.0, ComplexPolarizability(118.0, 20.0)),
}


def get_species(name, catalog=None):
    """
    Look up a molecule species by name.

    Parameters
    ----------
    name : str
        Species name, case-insensitive.
    catalog : dict, optional
        Additional species (name -> MoleculeSpecies). User entries take
        precedence over the built-in catalog. Default is None.

    Returns
    -------
    species : MoleculeSpecies

    Raises
    ------
    KeyError
        If the name is in neither catalog.
    """

    merged = dict(SPECIES_CATALOG)
    if catalog is not None:
        merged.update(catalog)

    lookup = {key.upper(): value for key, value in merged.items()}

    try:
        return lookup[name.upper()]
    except KeyError:
        raise KeyError(
            f"unknown species {name!r}; available: {', '.join(sorted(merged))}"
        ) from None


######################################################################
######################################################################


def polarizability_si(p, constants=CODATA2018):
    """
    Convert a polarizability volume to SI units.

    Parameters
    ----------
    p : ComplexPolarizability
        Polarizability volume in Angstrom^3.
    constants : PhysicalConstants, optional
        Default is CODATA2018.

    Returns
    -------
    alpha : complex
        Polarizability in C m^2 / V, i.e. 4 pi eps0 times the volume in m^3.
    """

    factor = 4 * math.pi * constants.eps0 * ANGSTROM3

    return complex(p.real_volume * factor, p.imag_volume * factor)


def absorption_cross_section(species, k_L, constants=CODATA2018):
    """
    Absorption cross section sigma = Im(alpha) k_L / eps0.

    Parameters
    ----------
    species : MoleculeSpecies
    k_L : float
        Laser wavenumber in 1/m, must be > 0.

    Returns
    -------
    sigma : float
        Cross section in m^2.
    """

    if not k_L > 0:
        raise ValueError(f"laser wavenumber must be > 0, got {k_L}")

    alpha = polarizability_si(species.polarizability, constants)

    return alpha.imag * k_L / constants.eps0


def polarizability_from_cross_section(sigma, k_L, constants=CODATA2018):
    """
    Imaginary polarizability volume (Angstrom^3) belonging to a cross section.

    Inverse of :func:`absorption_cross_section`.
    """

    if not k_L > 0:
        raise ValueError(f"laser wavenumber must be > 0, got {k_L}")

    alpha_imag = sigma * constants.eps0 / k_L

    return alpha_imag / (4 * math.pi * constants.eps0 * ANGSTROM3)


def de_broglie_wavelength(species, v, constants=CODATA2018):
    """
    Molecular de Broglie wavelength h / (M v).

    Parameters
    ----------
    species : MoleculeSpecies
    v : float or numpy array
        Longitudinal velocity in m/s, must be > 0.

    Returns
    -------
    wavelength : float or numpy array
        de Broglie wavelength in m.
    """

    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError(f"velocity must be > 0, got {v}")

    wavelength = constants.h / (species.mass * constants.amu * v)

    if wavelength.ndim == 0:
        return float(wavelength)

    return wavelength
