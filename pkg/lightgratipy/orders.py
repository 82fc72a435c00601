#!/usr/bin/env python

"""
Diffraction-order spectra: Fourier decomposition of the absorption channels,
incoherent order intensities and the Bessel-function description of the
pure phase grating.
"""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import bisect
from scipy.special import gammaln

from lightgratipy.grating import (
    GridSpec,
    channel_transmission,
    compute_phi,
    mean_photon_number,
    poisson_weight,
    truncation_order,
)


DEFAULT_M_MAX = 20

DEFAULT_SAMPLES_PER_PERIOD = 1024

BESSEL_X_LIMIT = 50.0

# below this the recurrence coefficients 2k/x overflow
BESSEL_SERIES_LIMIT = 1e-3


######################################################################
######################################################################


@dataclass(frozen=True)
class OrderSpectrum:
    """
    Probabilities of transverse momentum transfer m hbar k_L.

    Attributes
    ----------
    m_max : int
        Highest order index.
    intensities : numpy.ndarray
        Intensity of order m stored at index m + m_max.
    per_channel : numpy.ndarray, optional
        Breakdown by photon number, shape (n_channels, 2 m_max + 1).
    """

    m_max: int
    intensities: np.ndarray
    per_channel: np.ndarray = None

    @property
    def orders(self):
        return np.arange(-self.m_max, self.m_max + 1)

    @property
    def total(self):
        return float(self.intensities.sum())

    @property
    def odd_weight(self):
        """Total intensity at odd multiples of hbar k_L."""
        return float(self.intensities[self.orders % 2 == 1].sum())

    def intensity(self, m):
        if abs(m) > self.m_max:
            return 0.0
        return float(self.intensities[m + self.m_max])

    def to_dataframe(self):
        """
        Table of the spectrum.

        Returns
        -------
        table : pandas.DataFrame
            Columns ``m`` (units of hbar k_L), ``intensity`` and, if the
            breakdown is present, ``n<k>`` for every channel.
        """

        table = pd.DataFrame({"m": self.orders, "intensity": self.intensities})

        if self.per_channel is not None:
            for n, row in enumerate(self.per_channel):
                table[f"n{n}"] = row

        return table


######################################################################
######################################################################


def bessel_j_series(m, x, terms=40):
    """
    Power series of the Bessel function of the first kind.

    Accurate for small arguments (|x| < 2); used to cross-check
    :func:`bessel_j`.
    """

    x = np.asarray(x, dtype=float)
    half = 0.5 * x

    total = np.zeros_like(x)
    for k in range(terms):
        log_coeff = -gammaln(k + 1) - gammaln(k + m + 1)
        total = total + (-1) ** k * np.exp(log_coeff) * half ** (2 * k + m)

    return total


def bessel_j(m, x):
    """
    Bessel function of the first kind J_m(x).

    Downward (Miller) recurrence from a starting order far above m and |x|,
    normalized with the identity J_0 + 2 sum_k J_2k = 1.

    Parameters
    ----------
    m : int
        Order, >= 0.
    x : float or numpy array
        Argument, |x| <= 50.

    Returns
    -------
    jm : float or numpy array
    """

    if int(m) != m or m < 0:
        raise ValueError(f"Bessel order must be a nonnegative integer, got {m}")
    m = int(m)

    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > BESSEL_X_LIMIT):
        raise ValueError(f"Bessel argument out of range |x| <= {BESSEL_X_LIMIT}")

    result = np.zeros_like(x)

    tiny = np.abs(x) < BESSEL_SERIES_LIMIT
    result[tiny] = bessel_j_series(m, x[tiny])

    regular = ~tiny
    if np.any(regular):
        ax = np.abs(x[regular])
        scale = max(m, float(ax.max()), 1.0)
        start = int(scale) + 30 + int(math.sqrt(60 * scale))
        start += start % 2

        j_above = np.zeros_like(ax)
        j_here = np.full_like(ax, 1e-30)
        norm = np.zeros_like(ax)
        jm = np.zeros_like(ax)

        for k in range(start, 0, -1):
            j_below = (2 * k / ax) * j_here - j_above
            j_above, j_here = j_here, j_below

            big = np.abs(j_here) > 1e250
            if np.any(big):
                for arr in (j_above, j_here, norm, jm):
                    arr[big] *= 1e-250

            order = k - 1
            if order == m:
                jm = j_here.copy()
            if order > 0 and order % 2 == 0:
                norm += 2 * j_here

        norm += j_here
        values = jm / norm

        # J_m(-x) = (-1)^m J_m(x)
        if m % 2 == 1:
            values = np.where(x[regular] < 0, -values, values)

        result[regular] = values

    if scalar:
        return float(result[0])

    return result


def pure_phase_orders(phi_re, m_max=DEFAULT_M_MAX):
    """
    Order intensities of the non-absorbing grating, I_2j = J_j(Phi)^2.

    Parameters
    ----------
    phi_re : float
        Dipole phase parameter.
    m_max : int, optional
        Highest order in units of hbar k_L. Default is 20.

    Returns
    -------
    spectrum : OrderSpectrum
        Only even slots are populated.
    """

    if m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max}")

    intensities = np.zeros(2 * m_max + 1)
    for m in range(-m_max, m_max + 1):
        if m % 2 == 0:
            intensities[m + m_max] = bessel_j(abs(m) // 2, phi_re) ** 2

    return OrderSpectrum(m_max, intensities)


def fourier_order_amplitudes(channel, m_max=DEFAULT_M_MAX):
    """
    Fourier coefficients c_m = (1/L) int t(x) exp(-i m k_L x) dx.

    Parameters
    ----------
    channel : TransmissionChannel
        Channel sampled on a commensurate window.
    m_max : int, optional
        Highest order in units of hbar k_L. Default is 20.

    Returns
    -------
    amplitudes : numpy.ndarray
        Complex c_m at index m + m_max.
    """

    grid = channel.grid
    if not isinstance(grid, GridSpec):
        raise ValueError("Fourier decomposition needs a commensurate GridSpec")

    periods = grid.periods
    n_samples = grid.n_samples
    if m_max * periods >= n_samples // 2:
        raise ValueError(
            f"m_max = {m_max} is not resolved by {grid.samples_per_period} samples per period"
        )

    spectrum = np.fft.fft(channel.samples) / n_samples

    orders = np.arange(-m_max, m_max + 1)
    index = (orders * periods) % n_samples

    # window starts at -extent/2: exp(i m k_L extent/2) = (-1)^(m periods)
    sign = np.where((orders * periods) % 2 == 0, 1.0, -1.0)

    return sign * spectrum[index]


def channel_order_amplitudes(
    phi,
    m_max=DEFAULT_M_MAX,
    tail_eps=1e-10,
    samples_per_period=DEFAULT_SAMPLES_PER_PERIOD,
    wavelength=514.5e-9,
):
    """
    Fourier amplitudes of all absorption channels over one laser period.

    Returns
    -------
    amplitudes : numpy.ndarray
        Shape (n_max + 1, 2 m_max + 1); row n holds the channel with n
        absorbed photons.
    """

    grid = GridSpec(1, samples_per_period, wavelength)
    n_max = truncation_order(phi, tail_eps)

    rows = [
        fourier_order_amplitudes(channel_transmission(phi, n, grid), m_max)
        for n in range(n_max + 1)
    ]

    return np.array(rows)


def incoherent_order_intensities(
    phi,
    m_max=DEFAULT_M_MAX,
    tail_eps=1e-10,
    samples_per_period=DEFAULT_SAMPLES_PER_PERIOD,
):
    """
    Order intensities summed incoherently over the absorption channels.

    Parameters
    ----------
    phi : ComplexPhase
    m_max : int, optional
        Default is 20.
    tail_eps : float, optional
        Poisson tail allowed by the channel truncation. Default is 1e-10.
    samples_per_period : int, optional
        Default is 1024.

    Returns
    -------
    spectrum : OrderSpectrum
        Includes the per-channel breakdown.
    """

    amplitudes = channel_order_amplitudes(phi, m_max, tail_eps, samples_per_period)
    per_channel = np.abs(amplitudes) ** 2

    return OrderSpectrum(m_max, per_channel.sum(axis=0), per_channel)


def zero_order_null(lower=2.0, upper=3.0, xtol=1e-10):
    """
    Phase at which the undiffracted beam vanishes, J_0(Phi*) = 0.

    Returns
    -------
    phi_star : float
        First root of J_0 (about 2.40483), found by bisection.
    """

    return bisect(lambda x: bessel_j(0, x), lower, upper, xtol=xtol)


def power_for_phase(species, beam, v, phi_re):
    """
    Running-wave power that yields the dipole phase ``phi_re`` at velocity v.

    Phi is linear in P0, so the power follows from one evaluation at 1 W.
    """

    unit = compute_phi(species, beam.with_power(1.0), v)

    return phi_re / unit.re


def absorbed_fraction(
    phi,
    n,
    vertical_scales=None,
    weights=None,
    samples_per_period=DEFAULT_SAMPLES_PER_PERIOD,
):
    """
    Fraction of molecules absorbing exactly n photons.

    The Poisson weight p_{nbar(x)}(n) is averaged uniformly over one grating
    period and, if given, over vertical scales of Phi.

    Parameters
    ----------
    phi : ComplexPhase
        Phase at the beam center.
    n : int
        Photon number.
    vertical_scales : numpy array, optional
        Multipliers of Phi across the molecular beam height. Default is None
        (no vertical averaging).
    weights : numpy array, optional
        Weights of the vertical scales. Default is uniform.

    Returns
    -------
    fraction : float
    """

    if int(n) != n or n < 0:
        raise ValueError(f"photon number must be a nonnegative integer, got {n}")

    if vertical_scales is None:
        vertical_scales = np.ones(1)
    vertical_scales = np.asarray(vertical_scales, dtype=float)

    if weights is None:
        weights = np.full(vertical_scales.shape, 1.0 / vertical_scales.size)
    weights = np.asarray(weights, dtype=float) / np.sum(weights)

    wavelength = 1.0
    k_L = 2 * math.pi / wavelength
    x = GridSpec(1, samples_per_period, wavelength).x

    fraction = 0.0
    for scale, weight in zip(vertical_scales, weights):
        nbar = mean_photon_number(phi.scaled(scale), x, k_L)
        fraction += weight * np.mean(poisson_weight(nbar, int(n)))

    return float(fraction)
