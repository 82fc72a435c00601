#!/usr/bin/env python

"""
Simulation workflows: single runs, power scans, order spectra and pattern
comparison, with their file output.
"""

import os
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
import xarray as xr

import lightgratipy.output as output
from lightgratipy.beamline import (
    DiffractionPattern,
    compare_patterns,
    ensemble_pattern,
    farfield_peak_positions,
    pattern_metrics,
)
from lightgratipy.config import OUTPUT_DIR_ENV
from lightgratipy.distributions import (
    VerticalProfile,
    velocity_quadrature,
    vertical_phi_scales,
)
from lightgratipy.grating import compute_phi, raman_nath_diagnostic, truncation_order
from lightgratipy.orders import absorbed_fraction, incoherent_order_intensities


class attributes:
    """ """

    pass


@dataclass
class RunSummary:
    """
    Scalar results of a run.

    Absorbed fractions are averaged over the velocity and vertical
    quadrature; efficiencies are keyed by order in units of 2 hbar k_L.
    """

    species: str
    power: float
    phi_re: float
    phi_im: float
    mean_photon_number: float
    absorbed_fractions: dict
    order_efficiencies: dict
    visibility: float
    peak_spacing: float
    raman_nath_ratio: float
    raman_nath_warning: bool
    order_spectrum: dict
    config_digest: str
    mode: str
    normalization: str
    convergence: dict = field(default_factory=dict)

    def to_dict(self):
        data = dict(self.__dict__)
        for key in ("absorbed_fractions", "order_efficiencies", "order_spectrum"):
            data[key] = {str(k): v for k, v in data[key].items()}
        return data


@dataclass
class ScanResult:
    """
    Results of a power scan.

    Attributes
    ----------
    patterns : xarray.DataArray
        Intensity over dims (power, position).
    table : pandas.DataFrame
        Long table with columns power_W, position_um, intensity.
    summaries : pandas.DataFrame
        One row per power.
    """

    patterns: xr.DataArray
    table: pd.DataFrame
    summaries: pd.DataFrame


######################################################################
######################################################################


def resolve_output_dir(config, output_dir=None):
    """Explicit argument, then the environment variable, then the config."""

    if output_dir is not None:
        return output_dir

    return os.environ.get(OUTPUT_DIR_ENV, config.run.output_dir)


class GratingSimulation:
    """
    Workflow for one configuration.

    Notes
    -----
    1. the ensemble pattern is computed (``run``)
    2. scalar results are derived from pattern and grating model (``summarize``)
    3. pattern and summary are written (``save``)
    """

    def __init__(self, config):

        self.config = config
        self.lightgrat = attributes()
        self.lightgrat.pattern = None
        self.lightgrat.summary = None

    def run(self):
        """
        Compute the detector pattern.

        Returns
        -------
        pattern : DiffractionPattern
        """

        config = self.config
        print(
            f"... [lightgrat] simulate {config.species.name} at P0 = {config.beam.power:g} W"
            f" ({config.run.mode} mode)"
        )

        self.lightgrat.pattern = ensemble_pattern(config)

        return self.lightgrat.pattern

    def absorbed_fractions(self):
        """Photon-number fractions averaged over velocity and beam height."""

        config = self.config
        v_nodes, v_weights = velocity_quadrature(config.velocity, config.quadrature.velocity_nodes)
        profile = VerticalProfile(config.vertical.beam_fwhm, config.beam.waist_y)
        scales, scale_weights = vertical_phi_scales(profile, config.quadrature.vertical_nodes)

        phis = [compute_phi(config.species, config.beam, v) for v in v_nodes]
        n_max = max(truncation_order(phi, config.quadrature.tail_eps) for phi in phis)

        fractions = {}
        for n in range(n_max + 1):
            fractions[n] = float(
                sum(
                    w * absorbed_fraction(phi, n, scales, scale_weights)
                    for phi, w in zip(phis, v_weights)
                )
            )

        return fractions

    def summarize(self):
        """
        Derive the scalar results.

        Returns
        -------
        summary : RunSummary
        """

        if self.lightgrat.pattern is None:
            raise RuntimeError("... [lightgrat] ERROR: no pattern computed, call run() first")

        config = self.config
        pattern = self.lightgrat.pattern
        quad = config.quadrature
        v_peak = config.velocity.v_peak

        phi = compute_phi(config.species, config.beam, v_peak)
        diagnostic = raman_nath_diagnostic(config.species, config.beam, v_peak, phi)

        peaks = farfield_peak_positions(
            config.species, v_peak, config.beam, config.geometry, m_max=1
        )
        spacing = float(peaks[2] - peaks[1])
        metrics = pattern_metrics(pattern, spacing)

        spectrum = incoherent_order_intensities(
            phi, quad.m_max, quad.tail_eps, quad.samples_per_period
        )

        summary = RunSummary(
            species=config.species.name,
            power=config.beam.power,
            phi_re=phi.re,
            phi_im=phi.im,
            mean_photon_number=phi.mean_photon_number,
            absorbed_fractions=self.absorbed_fractions(),
            order_efficiencies=metrics.efficiencies,
            visibility=metrics.visibility,
            peak_spacing=spacing,
            raman_nath_ratio=diagnostic.ratio,
            raman_nath_warning=diagnostic.warning,
            order_spectrum={
                int(m): float(i) for m, i in zip(spectrum.orders, spectrum.intensities)
            },
            config_digest=config.digest,
            mode=pattern.mode,
            normalization=pattern.normalization,
            convergence=pattern.metadata.get("convergence", {}),
        )

        self.lightgrat.summary = summary

        return summary

    def save(self, output_dir=None):
        """
        Write pattern CSV and summary JSON.

        Parameters
        ----------
        output_dir : str, optional
            Overrides environment variable and config.

        Returns
        -------
        filenames : tuple of str
        """

        if self.lightgrat.summary is None:
            self.summarize()

        run = self.config.run
        output_dir = resolve_output_dir(self.config, output_dir)

        pattern = self.lightgrat.pattern
        pattern_filename = os.path.join(output_dir, run.pattern_file)
        summary_filename = os.path.join(output_dir, run.summary_file)

        output.write_pattern_csv(pattern.positions, pattern.intensity, pattern_filename)

        data = self.lightgrat.summary.to_dict()
        data["raw_total"] = pattern.metadata.get("raw_total")
        data["attrs"] = output.prepare_global_attrs()
        output.write_json(data, summary_filename)

        return pattern_filename, summary_filename


def run_simulate(config, output_dir=None):
    """
    Simulate one configuration and write its pattern and summary.

    Returns
    -------
    pattern : DiffractionPattern
    summary : RunSummary
    """

    sim = GratingSimulation(config)
    sim.run()
    summary = sim.summarize()
    sim.save(output_dir)

    return sim.lightgrat.pattern, summary


def run_power_scan(config, powers, output_dir=None):
    """
    Simulate a series of laser powers.

    Every power gets its own pattern and summary in a subdirectory
    ``power_<P>W``; the combined tables go to ``scan.csv`` and
    ``scan_summary.csv``.

    Parameters
    ----------
    config : SimulationConfig
    powers : list of float
        Laser powers in W, >= 0.

    Returns
    -------
    result : ScanResult
    """

    powers = [float(p) for p in powers]
    if not powers:
        raise ValueError("power scan needs at least one power")
    if any(p < 0 for p in powers):
        raise ValueError(f"powers must be >= 0, got {powers}")

    output_dir = resolve_output_dir(config, output_dir)

    arrays, rows = [], []
    for power in powers:
        sim = GratingSimulation(replace(config, beam=config.beam.with_power(power)))
        pattern = sim.run()
        summary = sim.summarize()
        sim.save(os.path.join(output_dir, f"power_{power:g}W"))

        arrays.append(pattern.to_xarray())

        row = {
            "power_W": power,
            "phi_re": summary.phi_re,
            "phi_im": summary.phi_im,
            "mean_photon_number": summary.mean_photon_number,
            "visibility": summary.visibility,
        }
        for m in (-2, -1, 0, 1, 2):
            row[f"efficiency_{m}"] = summary.order_efficiencies.get(m, np.nan)
        rows.append(row)

    patterns = xr.concat(arrays, dim=pd.Index(powers, name="power"), combine_attrs="drop")
    patterns.attrs = output.prepare_global_attrs()

    table = patterns.to_dataframe().reset_index()
    table = pd.DataFrame(
        {
            "power_W": table["power"],
            "position_um": table["position"] * 1e6,
            "intensity": table["intensity"],
        }
    )
    summaries = pd.DataFrame(rows)

    output.write_table_csv(table, os.path.join(output_dir, "scan.csv"))
    output.write_table_csv(summaries, os.path.join(output_dir, "scan_summary.csv"))

    return ScanResult(patterns, table, summaries)


def run_orders(config, output_dir=None):
    """
    Order spectrum at the peak velocity and averaged over the ensemble.

    Returns
    -------
    table : pandas.DataFrame
        Columns m, intensity (peak velocity, beam center), n<k> channel
        breakdown and ``ensemble`` (velocity- and height-averaged).
    """

    quad = config.quadrature

    phi = compute_phi(config.species, config.beam, config.velocity.v_peak)
    spectrum = incoherent_order_intensities(
        phi, quad.m_max, quad.tail_eps, quad.samples_per_period
    )
    table = spectrum.to_dataframe()

    v_nodes, v_weights = velocity_quadrature(config.velocity, quad.velocity_nodes)
    profile = VerticalProfile(config.vertical.beam_fwhm, config.beam.waist_y)
    scales, scale_weights = vertical_phi_scales(profile, quad.vertical_nodes)

    ensemble = np.zeros(2 * quad.m_max + 1)
    for v, v_weight in zip(v_nodes, v_weights):
        phi_v = compute_phi(config.species, config.beam, v)
        for s, s_weight in zip(scales, scale_weights):
            ensemble += v_weight * s_weight * incoherent_order_intensities(
                phi_v.scaled(s), quad.m_max, quad.tail_eps, quad.samples_per_period
            ).intensities

    table["ensemble"] = ensemble

    filename = os.path.join(resolve_output_dir(config, output_dir), "orders.csv")
    output.write_table_csv(table, filename)

    return table


def run_compare(pattern_csv_a, pattern_csv_b):
    """
    Compare two pattern files.

    Returns
    -------
    report : dict
        ``shift_um`` (displacement of b relative to a) and ``nrmse``.
    """

    patterns = []
    for filename in (pattern_csv_a, pattern_csv_b):
        positions, intensity = output.read_pattern_csv(filename)
        patterns.append(
            DiffractionPattern(positions, intensity, normalization="none", mode="file")
        )

    shift, nrmse = compare_patterns(*patterns)

    print(f"... [lightgrat] shift {shift * 1e6:.3f} um, nrmse {nrmse:.3e}")

    return {"shift_um": shift * 1e6, "nrmse": nrmse}
