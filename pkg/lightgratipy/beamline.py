#!/usr/bin/env python

"""
Beamline: propagation of the molecular waves from the source slit through
collimator and grating to the detector, incoherent ensemble averages and
pattern metrics.
"""

import math
from dataclasses import dataclass, field, replace

import dask
import numpy as np
import xarray as xr
from scipy.signal import correlate, correlation_lags
from scipy.special import fresnel

import lightgratipy.output as output
from lightgratipy.distributions import (
    VerticalProfile,
    detector_kernel,
    source_quadrature,
    velocity_quadrature,
    vertical_phi_scales,
)
from lightgratipy.errors import ConvergenceError, PatternDataError
from lightgratipy.grating import GridSpec, compute_phi, transmission_channels
from lightgratipy.orders import fourier_order_amplitudes, incoherent_order_intensities
from lightgratipy.species import CODATA2018, de_broglie_wavelength


# illuminated grating window beyond the slit, in laser wavelengths
GRATING_MARGIN_PERIODS = 4

# orders whose amplitude stays below this in every channel are skipped
AMPLITUDE_CUTOFF = 1e-13

CONVERGENCE_TOLERANCE = 0.01


######################################################################
######################################################################


@dataclass(frozen=True)
class BeamlineGeometry:
    """
    Collimation and detection geometry.

    Attributes
    ----------
    slit1_width : float
        Source slit width in m.
    slit2_width : float
        Collimation slit width in m; coplanar with the grating.
    L12 : float
        Distance slit 1 to slit 2 in m.
    L2D : float
        Distance grating to detector in m.
    detector_span : float
        Full width of the scanned detector range in m.
    """

    slit1_width: float = 7e-6
    slit2_width: float = 5e-6
    L12: float = 1.13
    L2D: float = 1.2
    detector_span: float = 300e-6

    def __post_init__(self):
        for name in ("slit1_width", "slit2_width", "L12", "detector_span"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be > 0, got {value}")
        if not (self.L2D >= 0 and math.isfinite(self.L2D)):
            raise ValueError(f"L2D must be >= 0, got {self.L2D}")


@dataclass(frozen=True, eq=False)
class DiffractionPattern:
    """
    Detector-plane intensity pattern.

    Attributes
    ----------
    positions : numpy.ndarray
        Detector positions in m.
    intensity : numpy.ndarray
        Nonnegative intensity.
    normalization : str
        "sum" (unit sum), "peak" (maximum 1) or "none".
    mode : str
        "wave" or "orders".
    metadata : dict
        Config digest, Phi per velocity node, detector width, total before
        normalization and convergence indicators.
    """

    positions: np.ndarray
    intensity: np.ndarray
    normalization: str = "sum"
    mode: str = "wave"
    metadata: dict = field(default_factory=dict)

    @property
    def step(self):
        if len(self.positions) < 2:
            raise PatternDataError("pattern needs at least two positions")
        return float(self.positions[1] - self.positions[0])

    def peak_normalized(self):
        peak = self.intensity.max()
        return replace(self, intensity=self.intensity / peak, normalization="peak")

    def to_xarray(self):
        """
        Pattern as labelled array.

        Returns
        -------
        pattern : xarray.DataArray
            Intensity over dim ``position`` (in m), with the metadata and the
            global attributes attached.
        """

        attrs = output.prepare_global_attrs()
        attrs["normalization"] = self.normalization
        attrs["mode"] = self.mode
        for key, value in self.metadata.items():
            if isinstance(value, (int, float, str)):
                attrs[key] = value

        return xr.DataArray(
            self.intensity,
            coords={"position": self.positions},
            dims=["position"],
            name="intensity",
            attrs=attrs,
        )


@dataclass(frozen=True)
class PatternMetrics:
    """Order efficiencies (keyed by order) and visibility of a pattern."""

    efficiencies: dict
    visibility: float


######################################################################
######################################################################


def farfield_peak_positions(species, v, beam, geom, m_max=3, constants=CODATA2018):
    """
    Detector positions of the diffraction orders, x_m = m 2 hbar k_L L2D / (M v).

    Parameters
    ----------
    species : MoleculeSpecies
    v : float
        Velocity in m/s.
    beam : GratingBeam
    geom : BeamlineGeometry
    m_max : int, optional
        Highest order (units of 2 hbar k_L). Default is 3.

    Returns
    -------
    positions : numpy.ndarray
        Positions for m = -m_max .. m_max in m.
    """

    if not v > 0:
        raise ValueError(f"velocity must be > 0, got {v}")

    spacing = 2 * constants.hbar * beam.k_L * geom.L2D / (species.mass_kg * v)

    return spacing * np.arange(-m_max, m_max + 1)


def geometric_envelope(geom, positions, shift=0.0):
    """
    Ray-optics beam profile at the detector.

    Every source point projects slit 2 to a width s2 (L12 + L2D) / L12 and
    every point of slit 2 sees slit 1 under a width s1 L2D / L12; the profile
    is the convolution of both top-hats.

    Parameters
    ----------
    geom : BeamlineGeometry
    positions : numpy.ndarray
        Equidistant detector positions in m.
    shift : float, optional
        Center of the profile in m. Default is 0.

    Returns
    -------
    envelope : numpy.ndarray
        Probability per grid bin (unit area).
    """

    positions = np.asarray(positions, dtype=float)
    step = positions[1] - positions[0] if positions.size > 1 else 1.0

    width_source = geom.slit1_width * geom.L2D / geom.L12
    width_slit = geom.slit2_width * (geom.L12 + geom.L2D) / geom.L12

    x = np.abs(positions - shift)

    if width_source == 0:
        density = np.where(x <= 0.5 * width_slit, 1.0 / width_slit, 0.0)
    else:
        plateau = min(width_source, width_slit)
        density = np.clip(0.5 * (width_source + width_slit) - x, 0.0, plateau)
        density = density / (width_source * width_slit)

    return density * step


def fresnel_propagate(field, x, wavelength_db, L, detector_x, chunk=256):
    """
    Paraxial Fresnel propagation by direct quadrature.

    U(X) = sqrt(k / (2 pi i L)) int field(x) exp(i k (X - x)^2 / (2 L)) dx

    Parameters
    ----------
    field : numpy.ndarray
        Complex field on the equidistant grid ``x``.
    x : numpy.ndarray
        Source-plane positions in m.
    wavelength_db : float
        de Broglie wavelength in m.
    L : float
        Propagation distance in m.
    detector_x : numpy.ndarray
        Output positions in m.
    chunk : int, optional
        Output points per matrix block. Default is 256.

    Returns
    -------
    psi : numpy.ndarray
        Complex field at ``detector_x``.

    Raises
    ------
    ValueError
        For L <= 0 or if the quadratic phase changes by more than pi per
        source sample somewhere on the detector (aliasing).
    """

    if not L > 0:
        raise ValueError(f"propagation distance must be > 0, got {L}")

    field = np.asarray(field, dtype=complex)
    x = np.asarray(x, dtype=float)
    detector_x = np.asarray(detector_x, dtype=float)

    dx = x[1] - x[0]
    k = 2 * math.pi / wavelength_db

    max_separation = max(
        abs(detector_x.max() - x.min()), abs(detector_x.min() - x.max())
    )
    phase_step = k * max_separation * dx / L
    if phase_step > math.pi:
        raise ValueError(
            f"Fresnel kernel undersampled: phase step {phase_step:.2f} rad > pi; "
            "refine the source grid or narrow the detector span"
        )

    prefactor = math.sqrt(k / (2 * math.pi * L)) * np.exp(-0.25j * math.pi) * dx

    psi = np.empty(detector_x.size, dtype=complex)
    for start in range(0, detector_x.size, chunk):
        X = detector_x[start : start + chunk, np.newaxis]
        kernel = np.exp(0.5j * k * (X - x) ** 2 / L)
        psi[start : start + chunk] = prefactor * (kernel @ field)

    return psi


def slit_fresnel_field(source_x, wavelength_db, geom, detector_x):
    """
    Field behind slit 2 for a point source in slit 1, in closed form.

    The cylindrical wave from the source point is clipped by slit 2 and
    propagated over L2D; the aperture integral reduces to Fresnel integrals.
    The field in slit 2 is normalized to unit probability.

    Parameters
    ----------
    source_x : float
        Source position in slit 1 in m.
    wavelength_db : float
        de Broglie wavelength in m.
    geom : BeamlineGeometry
    detector_x : numpy.ndarray
        Detector positions in m (any shape).

    Returns
    -------
    psi : numpy.ndarray
        Complex amplitude (probability density amplitude, 1/sqrt(m)).
    """

    if not geom.L2D > 0:
        raise ValueError(f"L2D must be > 0 for wave propagation, got {geom.L2D}")

    X = np.asarray(detector_x, dtype=float)
    k = 2 * math.pi / wavelength_db
    L1, L2 = geom.L12, geom.L2D
    half = 0.5 * geom.slit2_width

    beta = 0.5 * k * (1 / L1 + 1 / L2)
    center = (source_x / L1 + X / L2) / (1 / L1 + 1 / L2)
    scale = math.sqrt(2 * beta / math.pi)

    s_upper, c_upper = fresnel(scale * (half - center))
    s_lower, c_lower = fresnel(scale * (-half - center))
    aperture = math.sqrt(math.pi / (2 * beta)) * (
        (c_upper - c_lower) + 1j * (s_upper - s_lower)
    )

    prefactor = (
        math.sqrt(k / (2 * math.pi * L2))
        * np.exp(-0.25j * math.pi)
        / math.sqrt(geom.slit2_width)
    )
    phase = np.exp(0.5j * k * (X - source_x) ** 2 / (L1 + L2))

    return prefactor * phase * aperture


def order_basis(source_x, wavelength_db, geom, detector_x, k_L, orders):
    """
    Detector fields of the plane-wave components exp(i m k_L x) behind slit 2.

    A grating component exp(i q x) shifts the slit field by q L2D / k and
    adds the phase q X - q^2 L2D / (2 k).

    Returns
    -------
    basis : numpy.ndarray
        Shape (len(orders), len(detector_x)).
    """

    k = 2 * math.pi / wavelength_db
    q = k_L * np.asarray(orders, dtype=float)[:, np.newaxis]
    X = np.asarray(detector_x, dtype=float)[np.newaxis, :]

    shifted = slit_fresnel_field(source_x, wavelength_db, geom, X - q * geom.L2D / k)

    return shifted * np.exp(1j * (q * X - 0.5 * q**2 * geom.L2D / k))


def point_source_pattern(
    source_x,
    channels,
    geom,
    wavelength_db,
    detector_x,
    method="orders",
    m_max=20,
    amplitudes=None,
):
    """
    Detector intensity of one source point, summed over absorption channels.

    Parameters
    ----------
    source_x : float
        Position in slit 1 in m.
    channels : list of TransmissionChannel
        Channels for the velocity belonging to ``wavelength_db``.
    geom : BeamlineGeometry
    wavelength_db : float
        de Broglie wavelength in m.
    detector_x : numpy.ndarray
        Equidistant detector positions in m.
    method : str, optional
        "orders" decomposes every channel into Fourier orders and uses the
        closed-form slit field; "direct" propagates the sampled field
        behind the grating with :func:`fresnel_propagate`. Default is "orders".
    m_max : int, optional
        Highest Fourier order for the "orders" method. Default is 20.
    amplitudes : numpy.ndarray, optional
        Precomputed Fourier amplitudes for the "orders" method, one row of
        2 m_max + 1 orders per incoherent contribution; rows may carry
        sqrt(weight) factors. ``channels`` then only supply the laser grid.

    Returns
    -------
    intensity : numpy.ndarray
        Probability per detector bin.
    """

    if abs(source_x) > 0.5 * geom.slit1_width * (1 + 1e-12):
        raise ValueError(f"source point {source_x} m lies outside slit 1")

    detector_x = np.asarray(detector_x, dtype=float)
    bin_width = detector_x[1] - detector_x[0]
    grid = channels[0].grid
    k_L = 2 * math.pi / grid.wavelength

    intensity = np.zeros(detector_x.size)

    if method == "orders":
        if amplitudes is None:
            amplitudes = np.array([fourier_order_amplitudes(ch, m_max) for ch in channels])
        orders = np.arange(-m_max, m_max + 1)

        active = np.abs(amplitudes).max(axis=0) > AMPLITUDE_CUTOFF
        basis = order_basis(source_x, wavelength_db, geom, detector_x, k_L, orders[active])

        fields = amplitudes[:, active] @ basis
        intensity += bin_width * np.sum(np.abs(fields) ** 2, axis=0)

    elif method == "direct":
        if grid.step >= grid.wavelength / 8:
            raise ValueError("grating grid must be finer than lambda_L / 8")
        if grid.extent < geom.slit2_width:
            raise ValueError("grating grid does not cover slit 2")

        x = grid.x
        k = 2 * math.pi / wavelength_db
        incident = np.where(
            np.abs(x) <= 0.5 * geom.slit2_width,
            np.exp(0.5j * k * (x - source_x) ** 2 / geom.L12),
            0.0,
        ) / math.sqrt(geom.slit2_width)

        for channel in channels:
            psi = fresnel_propagate(
                incident * channel.samples, x, wavelength_db, geom.L2D, detector_x
            )
            intensity += np.abs(psi) ** 2 * bin_width

    else:
        raise ValueError(f"unknown propagation method {method!r}")

    return intensity


def grating_window_periods(geom, wavelength):
    """Even number of laser periods covering slit 2 plus the margin."""

    periods = math.ceil(geom.slit2_width / wavelength) + GRATING_MARGIN_PERIODS

    return periods + periods % 2


######################################################################
######################################################################


def detector_grids(geom, detector, fine_step):
    """
    Scan grid and the fine computation grid it is a subsample of.

    Returns
    -------
    scan_x : numpy.ndarray
    fine_x : numpy.ndarray
    oversample : int
        Fine points per scan step.
    """

    oversample = max(1, int(round(detector.step / fine_step)))
    half_steps = int(round(0.5 * geom.detector_span / detector.step))

    scan_x = detector.step * np.arange(-half_steps, half_steps + 1)
    fine_x = (detector.step / oversample) * np.arange(
        -half_steps * oversample, half_steps * oversample + 1
    )

    return scan_x, fine_x, oversample


def _detect(fine_intensity, detector, fine_step, oversample):
    """Convolve with the detector response and sample at the scan steps."""

    kernel = detector_kernel(detector, fine_step)
    smoothed = np.convolve(fine_intensity, kernel, mode="same")

    return smoothed[::oversample] * oversample


def _wave_task(source_x, channels, amplitudes, geom, wavelength_db, fine_x, m_max):
    """Fine-grid intensity for one (source, velocity) node, averaged vertically."""

    return point_source_pattern(
        source_x, channels, geom, wavelength_db, fine_x, m_max=m_max, amplitudes=amplitudes
    )


def _run_tasks(tasks, workers):
    if workers > 1:
        return dask.compute(*tasks, scheduler="threads", num_workers=workers)
    return dask.compute(*tasks, scheduler="synchronous")


def _wave_intensity(config, fine_x, v_nodes, v_weights, phis, scales, scale_weights):
    species, beam, geom, quad = config.species, config.beam, config.geometry, config.quadrature

    x_nodes, x_weights = source_quadrature(geom.slit1_width, quad.source_nodes)
    grid = GridSpec(
        grating_window_periods(geom, beam.wavelength), quad.samples_per_period, beam.wavelength
    )

    tasks, task_weights = [], []

    for v, v_weight, phi in zip(v_nodes, v_weights, phis):
        wavelength_db = de_broglie_wavelength(species, v)

        # heights enter incoherently: sqrt(weight) rows of every channel
        rows = []
        for s, s_weight in zip(scales, scale_weights):
            channels = transmission_channels(phi.scaled(s), grid, quad.tail_eps)
            rows.extend(
                math.sqrt(s_weight) * fourier_order_amplitudes(channel, quad.m_max)
                for channel in channels
            )
        amplitudes = np.array(rows)

        for x_s, x_weight in zip(x_nodes, x_weights):
            tasks.append(
                dask.delayed(_wave_task)(
                    x_s, channels, amplitudes, geom, wavelength_db, fine_x, quad.m_max
                )
            )
            task_weights.append(x_weight * v_weight)

    results = _run_tasks(tasks, quad.workers)

    # fixed reduction order keeps results independent of the worker count
    intensity = np.zeros(fine_x.size)
    for weight, result in zip(task_weights, results):
        intensity += weight * result

    return intensity


def _orders_intensity(config, fine_x, v_nodes, v_weights, phis, scales, scale_weights):
    species, beam, geom, quad = config.species, config.beam, config.geometry, config.quadrature

    intensity = np.zeros(fine_x.size)
    for v, v_weight, phi in zip(v_nodes, v_weights, phis):
        spectrum = np.zeros(2 * quad.m_max + 1)
        for s, s_weight in zip(scales, scale_weights):
            spectrum += s_weight * incoherent_order_intensities(
                phi.scaled(s), quad.m_max, quad.tail_eps, quad.samples_per_period
            ).intensities

        # shift per hbar k_L
        spacing = de_broglie_wavelength(species, v) * geom.L2D / beam.wavelength

        for m, weight in zip(range(-quad.m_max, quad.m_max + 1), spectrum):
            if weight > 0:
                intensity += v_weight * weight * geometric_envelope(geom, fine_x, m * spacing)

    return intensity


def ensemble_pattern(config):
    """
    Detector pattern averaged over the full beamline ensemble.

    Incoherent quadrature over source points in slit 1, the velocity
    distribution and the vertical Phi scales; convolution with the detector
    response on a fine grid and resampling to the scan grid.

    Parameters
    ----------
    config : SimulationConfig

    Returns
    -------
    pattern : DiffractionPattern
    """

    species, beam, geom = config.species, config.beam, config.geometry
    detector, quad, run = config.detector, config.quadrature, config.run

    scan_x, fine_x, oversample = detector_grids(geom, detector, quad.fine_step)
    fine_step = fine_x[1] - fine_x[0]

    v_nodes, v_weights = velocity_quadrature(config.velocity, quad.velocity_nodes)
    profile = VerticalProfile(config.vertical.beam_fwhm, beam.waist_y)
    scales, scale_weights = vertical_phi_scales(profile, quad.vertical_nodes)

    phis = [compute_phi(species, beam, v) for v in v_nodes]

    print(
        f"... [lightgrat] {run.mode} mode: {len(v_nodes)} velocities x {len(scales)} heights"
        f" x {quad.source_nodes} source points on {fine_x.size} detector points"
    )

    if run.mode == "wave":
        fine = _wave_intensity(config, fine_x, v_nodes, v_weights, phis, scales, scale_weights)
    elif run.mode == "orders":
        fine = _orders_intensity(config, fine_x, v_nodes, v_weights, phis, scales, scale_weights)
    else:
        raise ValueError(f"unknown mode {run.mode!r}")

    detected = _detect(fine, detector, fine_step, oversample)
    raw_total = float(detected.sum())

    if run.normalization == "peak":
        intensity = detected / detected.max()
    elif run.normalization == "sum":
        intensity = detected / raw_total
    else:
        intensity = detected

    metadata = {
        "config_digest": config.digest,
        "species": species.name,
        "power": beam.power,
        "detector_width": detector.width,
        "raw_total": raw_total,
        "velocity_nodes": [float(v) for v in v_nodes],
        "phi_per_velocity": [[phi.re, phi.im] for phi in phis],
    }

    if quad.check_convergence:
        convergence = quadrature_convergence(config, reference=detected)
        metadata["convergence"] = convergence

        failed = {
            axis: change
            for axis, change in convergence.items()
            if change > CONVERGENCE_TOLERANCE
        }
        if failed:
            message = ", ".join(f"{axis} {change:.2%}" for axis, change in failed.items())
            print(f"... [lightgrat] WARNING: quadrature not converged: {message}")
            if quad.strict_convergence:
                raise ConvergenceError(f"quadrature not converged: {message}")

    return DiffractionPattern(scan_x, intensity, run.normalization, run.mode, metadata)


def quadrature_convergence(config, reference=None):
    """
    Relative RMS change of the unnormalized pattern when doubling each axis.

    Parameters
    ----------
    config : SimulationConfig
    reference : numpy.ndarray, optional
        Unnormalized detected pattern of ``config``; computed if not given.

    Returns
    -------
    changes : dict
        Axis name ("source", "velocity", "vertical", "grid") -> relative RMS
        change.
    """

    quad = replace(config.quadrature, check_convergence=False)
    base_run = replace(config.run, normalization="none")

    def detected(q):
        return ensemble_pattern(replace(config, quadrature=q, run=base_run)).intensity

    if reference is None:
        reference = detected(quad)

    refined = {
        "source": replace(quad, source_nodes=2 * quad.source_nodes),
        "velocity": replace(quad, velocity_nodes=2 * quad.velocity_nodes),
        "vertical": replace(quad, vertical_nodes=2 * quad.vertical_nodes),
        "grid": replace(
            quad, samples_per_period=2 * quad.samples_per_period, fine_step=0.5 * quad.fine_step
        ),
    }

    norm = math.sqrt(np.mean(reference**2))
    changes = {}
    for axis, q in refined.items():
        diff = detected(q) - reference
        changes[axis] = float(math.sqrt(np.mean(diff**2)) / norm)

    return changes


######################################################################
######################################################################


def pattern_metrics(p, spacing):
    """
    Diffraction efficiencies and visibility.

    Parameters
    ----------
    p : DiffractionPattern
    spacing : float
        Expected peak spacing in m; window m spans m spacing +- spacing / 2.

    Returns
    -------
    metrics : PatternMetrics
        ``efficiencies[m]`` is the window integral over the total intensity;
        the visibility is (max - min) / (max + min) for |x| <= 1.5 spacing.
    """

    if not spacing > 0:
        raise ValueError(f"peak spacing must be > 0, got {spacing}")

    width = p.metadata.get("detector_width", 0.0)
    if spacing < width:
        raise ValueError(
            f"peak spacing {spacing:.3g} m below detector width {width:.3g} m: windows overlap"
        )

    x, intensity = p.positions, p.intensity
    total = intensity.sum()

    reach = np.abs(x).max() + 0.5 * p.step
    m_limit = int(math.floor((reach - 0.5 * spacing) / spacing + 1e-9))

    efficiencies = {}
    for m in range(-m_limit, m_limit + 1):
        window = (x >= (m - 0.5) * spacing) & (x < (m + 0.5) * spacing)
        efficiencies[m] = float(intensity[window].sum() / total)

    central = intensity[np.abs(x) <= 1.5 * spacing]
    visibility = float((central.max() - central.min()) / (central.max() + central.min()))

    return PatternMetrics(efficiencies, visibility)


def compare_patterns(a, b):
    """
    Align two patterns and measure their difference.

    Parameters
    ----------
    a, b : DiffractionPattern
        Patterns on grids with the same step.

    Returns
    -------
    shift : float
        Displacement of ``b`` relative to ``a`` in m (integer number of steps
        plus the offset of the grid origins).
    nrmse : float
        RMS difference of the peak-normalized, aligned patterns.
    """

    if a.intensity.size == 0 or b.intensity.size == 0:
        raise PatternDataError("cannot compare empty patterns")
    if a.intensity.max() <= 0 or b.intensity.max() <= 0:
        raise PatternDataError("cannot compare patterns without positive intensity")
    if not math.isclose(a.step, b.step, rel_tol=1e-6):
        raise PatternDataError(f"grid steps differ: {a.step} m vs {b.step} m")

    ia = a.peak_normalized().intensity
    ib = b.peak_normalized().intensity

    corr = correlate(ib, ia, mode="full", method="direct")
    lags = correlation_lags(ib.size, ia.size, mode="full")
    lag = int(lags[np.argmax(corr)])

    shift = lag * a.step + float(b.positions[0] - a.positions[0])

    start = max(0, -lag)
    stop = min(ia.size, ib.size - lag)
    diff = ia[start:stop] - ib[start + lag : stop + lag]

    return shift, float(np.sqrt(np.mean(diff**2)))
