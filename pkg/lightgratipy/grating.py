#!/usr/bin/env python

"""
Standing-light-wave grating: complex phase parameter and the transmission
functions of the photon absorption channels.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammainc, gammaln, xlogy

from lightgratipy.species import CODATA2018, polarizability_si


MAX_PHOTON_NUMBER = 12

RAMAN_NATH_WARNING_RATIO = 0.1


######################################################################
######################################################################


@dataclass(frozen=True)
class GridSpec:
    """
    Periodic sampling window centered on the antinode at x = 0.

    Attributes
    ----------
    periods : int
        Number of laser wavelengths covered by the window.
    samples_per_period : int
        Samples per laser wavelength.
    wavelength : float
        Laser wavelength in m.
    """

    periods: int
    samples_per_period: int
    wavelength: float

    def __post_init__(self):
        if int(self.periods) != self.periods or self.periods < 1:
            raise ValueError(
                f"grid must cover a positive integer number of periods, got {self.periods}"
            )
        if int(self.samples_per_period) != self.samples_per_period or self.samples_per_period < 4:
            raise ValueError(
                f"samples_per_period must be an integer >= 4, got {self.samples_per_period}"
            )
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @classmethod
    def from_extent(cls, extent, n_samples, wavelength, rtol=1e-9):
        """
        Build a grid from window extent and total sample count.

        Raises
        ------
        ValueError
            If the extent is not commensurate with the laser wavelength or the
            samples do not divide evenly into periods.
        """

        periods = extent / wavelength
        nearest = round(periods)
        if nearest < 1 or abs(periods - nearest) > rtol * max(1.0, periods):
            raise ValueError(
                f"grid extent {extent} m is not an integer number of periods of {wavelength} m"
            )
        if n_samples % nearest != 0:
            raise ValueError(
                f"{n_samples} samples do not divide into {nearest} periods"
            )

        return cls(int(nearest), n_samples // int(nearest), wavelength)

    @property
    def n_samples(self):
        return self.periods * self.samples_per_period

    @property
    def extent(self):
        return self.periods * self.wavelength

    @property
    def step(self):
        return self.wavelength / self.samples_per_period

    @property
    def x(self):
        return -0.5 * self.extent + np.arange(self.n_samples) * self.step


@dataclass(frozen=True)
class GratingBeam:
    """
    Retro-reflected laser beam forming the standing light wave.

    Attributes
    ----------
    wavelength : float
        Laser wavelength lambda_L in m.
    power : float
        Power of each running wave P0 in W.
    waist_y : float
        Vertical 1/e^2 radius in m.
    waist_z : float
        1/e^2 radius along the molecular beam in m.
    """

    wavelength: float = 514.5e-9
    power: float = 9.5
    waist_y: float = 1.3e-3
    waist_z: float = 50e-6

    def __post_init__(self):
        for name in ("wavelength", "waist_y", "waist_z"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be > 0, got {value}")
        if not (self.power >= 0 and math.isfinite(self.power)):
            raise ValueError(f"power must be >= 0, got {self.power}")

    @property
    def k_L(self):
        return 2 * math.pi / self.wavelength

    @property
    def period(self):
        """Grating period lambda_L / 2."""
        return self.wavelength / 2

    @property
    def omega_L(self):
        return CODATA2018.c * self.k_L

    def field_sign(self, x):
        """Unit phase of the standing-wave field E(x) ~ cos(k_L x)."""
        return np.sign(np.cos(self.k_L * np.asarray(x)))

    def with_power(self, power):
        return replace(self, power=power)


@dataclass(frozen=True)
class ComplexPhase:
    """
    Complex phase parameter Phi of the grating.

    Attributes
    ----------
    re : float
        Dipole phase in rad.
    im : float
        Absorption part; twice its value is the mean absorbed photon number.
    """

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not self.im >= 0:
            raise ValueError(f"imaginary part of the phase must be >= 0, got {self.im}")

    @property
    def mean_photon_number(self):
        """Mean number of absorbed photons averaged over the grating."""
        return 2 * self.im

    @property
    def magnitude(self):
        return abs(complex(self.re, self.im))

    def scaled(self, factor):
        """Both parts scale with the local laser intensity."""
        return ComplexPhase(self.re * factor, self.im * factor)

    def as_complex(self):
        return complex(self.re, self.im)


@dataclass(frozen=True)
class TransmissionChannel:
    """
    Transmission function t_{0->n}(x) of molecules absorbing exactly n photons.

    Attributes
    ----------
    photon_count : int
    samples : numpy.ndarray
        Complex samples on ``grid.x``.
    grid : GridSpec
    """

    photon_count: int
    samples: np.ndarray
    grid: GridSpec

    @property
    def x(self):
        return self.grid.x


@dataclass(frozen=True)
class RamanNathDiagnostic:
    """Transverse displacement inside the grating relative to the grating period."""

    ratio: float
    displacement: float
    warning: bool


######################################################################
######################################################################


def compute_phi(species, beam, v, constants=CODATA2018):
    """
    Complex phase parameter for a passage through the beam center.

    Phi = sqrt(2/pi) P0 alpha / (w_y v hbar c eps0) with the complex
    polarizability alpha.

    Parameters
    ----------
    species : MoleculeSpecies
    beam : GratingBeam
    v : float
        Molecular velocity in m/s.

    Returns
    -------
    phi : ComplexPhase
    """

    if not v > 0:
        raise ValueError(f"velocity must be > 0, got {v}")
    if not beam.waist_y > 0:
        raise ValueError(f"waist_y must be > 0, got {beam.waist_y}")

    alpha = polarizability_si(species.polarizability, constants)

    prefactor = math.sqrt(2 / math.pi) * beam.power / (
        beam.waist_y * v * constants.hbar * constants.c * constants.eps0
    )

    return ComplexPhase(prefactor * alpha.real, prefactor * alpha.imag)


def mean_photon_number(phi, x, k_L):
    """
    Local mean absorbed photon number 4 Im(Phi) cos^2(k_L x).

    Parameters
    ----------
    phi : ComplexPhase
    x : float or numpy array
        Position in m.
    k_L : float
        Laser wavenumber in 1/m.

    Returns
    -------
    nbar : float or numpy array
    """

    return 4 * phi.im * np.cos(k_L * np.asarray(x)) ** 2


def poisson_weight(nbar, n):
    """
    Poisson probability of absorbing n photons at mean nbar.

    Parameters
    ----------
    nbar : float or numpy array
        Mean photon number, >= 0.
    n : int or numpy array
        Photon number, >= 0.

    Returns
    -------
    p : float or numpy array
    """

    nbar = np.asarray(nbar, dtype=float)
    n = np.asarray(n)
    if np.any(nbar < 0) or np.any(n < 0):
        raise ValueError("poisson_weight needs nbar >= 0 and n >= 0")

    # xlogy(0, 0) = 0 keeps p_0(0) = 1
    p = np.exp(xlogy(n, nbar) - nbar - gammaln(n + 1))

    if p.ndim == 0:
        return float(p)

    return p


def channel_transmission(phi, n, grid):
    """
    Sample the transmission function of the n-photon absorption channel.

    t_{0->n}(x) = exp(2i Re(Phi) cos^2(k_L x)) sqrt(p_{nbar(x)}(n)) s(x)^n

    with s(x) the sign of the standing-wave field.

    Parameters
    ----------
    phi : ComplexPhase
    n : int
        Number of absorbed photons.
    grid : GridSpec
        Commensurate sampling window.

    Returns
    -------
    channel : TransmissionChannel
    """

    if int(n) != n or n < 0:
        raise ValueError(f"photon number must be a nonnegative integer, got {n}")
    if not isinstance(grid, GridSpec):
        raise ValueError("channel_transmission needs a commensurate GridSpec")

    n = int(n)
    k_L = 2 * math.pi / grid.wavelength
    x = grid.x

    cos_kx = np.cos(k_L * x)
    dipole = np.exp(2j * phi.re * cos_kx**2)

    nbar = 4 * phi.im * cos_kx**2
    absorption = np.sqrt(poisson_weight(nbar, n)) * np.sign(cos_kx) ** n

    return TransmissionChannel(n, dipole * absorption, grid)


def truncation_order(phi, tail_eps=1e-10, cap=MAX_PHOTON_NUMBER):
    """
    Highest photon number that needs to be followed.

    Parameters
    ----------
    phi : ComplexPhase
    tail_eps : float, optional
        Allowed Poisson tail probability at the antinode. Default is 1e-10.
    cap : int, optional
        Upper bound for the returned order. Default is 12.

    Returns
    -------
    n_max : int
        Smallest N with P(n > N) < tail_eps at nbar = 4 Im(Phi), at most ``cap``.
    """

    if not 0 < tail_eps < 1:
        raise ValueError(f"tail_eps must be in (0, 1), got {tail_eps}")

    nbar_max = 4 * phi.im

    for n_max in range(cap + 1):
        # P(n > N) is the regularized lower incomplete gamma function P(N+1, nbar)
        if nbar_max == 0 or gammainc(n_max + 1, nbar_max) < tail_eps:
            return n_max

    return cap


def transmission_channels(phi, grid, tail_eps=1e-10):
    """
    All absorption channels up to the truncation order.

    Returns
    -------
    channels : list of TransmissionChannel
    """

    n_max = truncation_order(phi, tail_eps)

    return [channel_transmission(phi, n, grid) for n in range(n_max + 1)]


def raman_nath_diagnostic(species, beam, v, phi, constants=CODATA2018):
    """
    Check the thin-grating assumption.

    The transverse displacement acquired while crossing the beam,
    delta = Dp tau / (2 M) with Dp = 2 hbar k_L max(1, |Phi|) and
    tau = 2 w_z / v, must stay much smaller than the grating period.

    Parameters
    ----------
    species : MoleculeSpecies
    beam : GratingBeam
    v : float
        Velocity in m/s.
    phi : ComplexPhase

    Returns
    -------
    diagnostic : RamanNathDiagnostic
    """

    if not v > 0:
        raise ValueError(f"velocity must be > 0, got {v}")

    momentum = 2 * constants.hbar * beam.k_L * max(1.0, phi.magnitude)
    transit_time = 2 * beam.waist_z / v
    displacement = momentum * transit_time / (2 * species.mass * constants.amu)

    ratio = displacement / beam.period
    warning = ratio > RAMAN_NATH_WARNING_RATIO

    if warning:
        print(
            f"... [lightgrat] WARNING: Raman-Nath ratio {ratio:.3f} at v = {v:.1f} m/s; "
            "thin-grating approximation questionable"
        )

    return RamanNathDiagnostic(ratio, displacement, warning)
