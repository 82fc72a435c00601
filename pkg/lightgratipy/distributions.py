#!/usr/bin/env python

"""
Velocity distribution, vertical beam profile and detector model, turned into
deterministic quadrature nodes and weights.
"""

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd


FWHM_PER_SIGMA = 2 * math.sqrt(2 * math.log(2))

VELOCITY_SPAN_FWHM = 2.5

KERNEL_SPAN_SIGMA = 4.0


######################################################################
######################################################################


@dataclass(frozen=True)
class VelocityDistribution:
    """
    Longitudinal velocity distribution of the detected molecules.

    Attributes
    ----------
    v_peak : float
        Most probable velocity in m/s.
    fwhm_ratio : float
        Relative FWHM spread Dv / v.
    shape : str
        "gaussian" or "histogram".
    histogram : tuple, optional
        Tabulated (v, weight) pairs for the "histogram" shape.
    histogram_file : str, optional
        File the histogram was read from.
    """

    v_peak: float = 120.0
    fwhm_ratio: float = 0.17
    shape: str = "gaussian"
    histogram: tuple = None
    histogram_file: str = None

    def __post_init__(self):
        if not (self.v_peak > 0 and math.isfinite(self.v_peak)):
            raise ValueError(f"v_peak must be > 0, got {self.v_peak}")
        if not 0 < self.fwhm_ratio < 1:
            raise ValueError(f"fwhm_ratio must be in (0, 1), got {self.fwhm_ratio}")
        if self.shape not in ("gaussian", "histogram"):
            raise ValueError(f"unknown velocity shape {self.shape!r}")
        if self.shape == "histogram" and not self.histogram:
            raise ValueError("velocity shape 'histogram' needs tabulated (v, weight) pairs")

    @property
    def fwhm(self):
        return self.fwhm_ratio * self.v_peak


@dataclass(frozen=True)
class VerticalProfile:
    """
    Vertical overlap of molecular beam and laser.

    Attributes
    ----------
    beam_fwhm : float
        FWHM height of the molecular beam in m.
    waist_y : float
        Vertical 1/e^2 radius of the laser in m.
    """

    beam_fwhm: float = 625e-6
    waist_y: float = 1.3e-3

    def __post_init__(self):
        if not self.beam_fwhm > 0:
            raise ValueError(f"beam_fwhm must be > 0, got {self.beam_fwhm}")
        if not self.waist_y > 0:
            raise ValueError(f"waist_y must be > 0, got {self.waist_y}")


@dataclass(frozen=True)
class DetectorModel:
    """
    Scanning detector.

    Attributes
    ----------
    width : float
        Resolution FWHM in m.
    step : float
        Scan step in m.
    kernel_shape : str
        "gaussian" or "tophat".
    """

    width: float = 6e-6
    step: float = 2e-6
    kernel_shape: str = "gaussian"

    def __post_init__(self):
        if not self.width >= 0:
            raise ValueError(f"detector width must be >= 0, got {self.width}")
        if not self.step > 0:
            raise ValueError(f"detector step must be > 0, got {self.step}")
        if self.kernel_shape not in ("gaussian", "tophat"):
            raise ValueError(f"unknown detector kernel {self.kernel_shape!r}")


######################################################################
######################################################################


def load_velocity_histogram(filename):
    """
    Read a tabulated velocity distribution.

    Parameters
    ----------
    filename : str
        Two-column text file: velocity in m/s and relative weight. Lines
        starting with "#" are ignored.

    Returns
    -------
    histogram : tuple
        (v, weight) pairs.
    """

    table = pd.read_csv(
        filename, sep=r"\s+|,", engine="python", comment="#", header=None
    )

    if table.shape[1] != 2 or len(table) == 0:
        raise ValueError(f"{filename}: expected two columns (v, weight)")

    values = table.to_numpy(dtype=float)
    if np.any(values[:, 1] < 0):
        raise ValueError(f"{filename}: negative weights")

    return tuple((float(v), float(w)) for v, w in values)


def velocity_quadrature(dist, n_nodes=16):
    """
    Velocity nodes and weights.

    Parameters
    ----------
    dist : VelocityDistribution
    n_nodes : int, optional
        Number of midpoint nodes over v_peak +- 2.5 FWHM. Ignored for the
        histogram shape, which uses the tabulated velocities. Default is 16.

    Returns
    -------
    nodes : numpy.ndarray
        Velocities in m/s, all > 0.
    weights : numpy.ndarray
        Normalized to unit sum.
    """

    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")

    if dist.shape == "histogram":
        table = np.array(dist.histogram, dtype=float)
        nodes, weights = table[:, 0], table[:, 1]

    elif n_nodes == 1:
        nodes, weights = np.array([dist.v_peak]), np.ones(1)

    else:
        span = 2 * VELOCITY_SPAN_FWHM * dist.fwhm
        offsets = (np.arange(n_nodes) + 0.5) / n_nodes - 0.5
        nodes = dist.v_peak + span * offsets

        sigma = dist.fwhm / FWHM_PER_SIGMA
        weights = np.exp(-0.5 * ((nodes - dist.v_peak) / sigma) ** 2)

    positive = nodes > 0
    nodes, weights = nodes[positive], weights[positive]

    if weights.sum() <= 0:
        raise ValueError("velocity distribution has no weight at v > 0")

    return nodes, weights / weights.sum()


def distribution_fwhm(nodes, weights):
    """Gaussian-equivalent FWHM of a discrete distribution."""

    mean = np.sum(weights * nodes)
    variance = np.sum(weights * (nodes - mean) ** 2)

    return FWHM_PER_SIGMA * math.sqrt(variance)


def vertical_phi_scales(profile, n_nodes=16):
    """
    Scale factors of Phi across the height of the molecular beam.

    Gauss-Hermite nodes y_i sample the Gaussian vertical molecule profile;
    each node sees the laser intensity exp(-2 y_i^2 / w_y^2).

    Parameters
    ----------
    profile : VerticalProfile
    n_nodes : int, optional
        Default is 16.

    Returns
    -------
    scales : numpy.ndarray
    weights : numpy.ndarray
        Normalized to unit sum.
    """

    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")

    # probabilists' Hermite: weight function exp(-t^2 / 2)
    t, weights = np.polynomial.hermite_e.hermegauss(n_nodes)

    sigma_y = profile.beam_fwhm / FWHM_PER_SIGMA
    y = sigma_y * t

    scales = np.exp(-2 * y**2 / profile.waist_y**2)

    return scales, weights / weights.sum()


def source_quadrature(slit_width, n_nodes=16):
    """
    Uniform midpoint nodes across the source slit.

    Returns
    -------
    nodes : numpy.ndarray
        Source positions in m, symmetric about 0.
    weights : numpy.ndarray
    """

    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")

    nodes = slit_width * ((np.arange(n_nodes) + 0.5) / n_nodes - 0.5)

    return nodes, np.full(n_nodes, 1.0 / n_nodes)


def detector_kernel(model, grid_step):
    """
    Discrete detector response.

    Parameters
    ----------
    model : DetectorModel
    grid_step : float
        Spacing of the grid the kernel is applied on, in m.

    Returns
    -------
    kernel : numpy.ndarray
        Odd number of taps, normalized to unit sum. A single tap if the
        width is below the grid step.
    """

    if not grid_step > 0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")

    if model.width < grid_step:
        return np.ones(1)

    if model.kernel_shape == "gaussian":
        sigma = model.width / FWHM_PER_SIGMA
        half = int(math.ceil(KERNEL_SPAN_SIGMA * sigma / grid_step))
        x = grid_step * np.arange(-half, half + 1)
        kernel = np.exp(-0.5 * (x / sigma) ** 2)

    else:
        half = int(math.floor(0.5 * model.width / grid_step + 1e-9))
        kernel = np.ones(2 * half + 1)

    return kernel / kernel.sum()
