#!/usr/bin/env python

"""
Simulation configuration: YAML sections with defaults, strict key checking
and line-numbered error messages.
"""

import hashlib
import math
import os
import re
from dataclasses import dataclass, field

import yaml

from lightgratipy.beamline import BeamlineGeometry
from lightgratipy.distributions import (
    DetectorModel,
    VelocityDistribution,
    VerticalProfile,
    load_velocity_histogram,
)
from lightgratipy.errors import ConfigError
from lightgratipy.grating import GratingBeam
from lightgratipy.species import (
    ComplexPolarizability,
    MoleculeSpecies,
    get_species,
)


OUTPUT_DIR_ENV = "LIGHTGRATIPY_OUTPUT_DIR"

MODES = ("wave", "orders")

NORMALIZATIONS = ("sum", "peak")


######################################################################
######################################################################


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Discretization of the ensemble average.

    Attributes
    ----------
    source_nodes, velocity_nodes, vertical_nodes : int
        Quadrature nodes over slit 1, the velocity distribution and the
        molecular beam height.
    samples_per_period : int
        Grating samples per laser wavelength.
    m_max : int
        Highest diffraction order in units of hbar k_L.
    tail_eps : float
        Poisson tail left out by the channel truncation.
    fine_step : float
        Target step of the fine detector grid in m.
    workers : int
        Threads for the ensemble quadrature.
    check_convergence : bool
        Rerun with every axis doubled and report the change.
    strict_convergence : bool
        Raise instead of warn if the change exceeds 1 %.
    """

    source_nodes: int = 16
    velocity_nodes: int = 16
    vertical_nodes: int = 16
    samples_per_period: int = 1024
    m_max: int = 20
    tail_eps: float = 1e-10
    fine_step: float = 0.1e-6
    workers: int = 1
    check_convergence: bool = False
    strict_convergence: bool = False

    def __post_init__(self):
        for name in ("source_nodes", "velocity_nodes", "vertical_nodes", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.samples_per_period < 8:
            raise ValueError(f"samples_per_period must be >= 8, got {self.samples_per_period}")
        if self.m_max < 0 or 2 * self.m_max >= self.samples_per_period:
            raise ValueError(f"m_max = {self.m_max} not resolved by the grating grid")
        if not 0 < self.tail_eps < 1:
            raise ValueError(f"tail_eps must be in (0, 1), got {self.tail_eps}")
        if not self.fine_step > 0:
            raise ValueError(f"fine_step must be > 0, got {self.fine_step}")


@dataclass(frozen=True)
class RunSettings:
    """Mode, normalization and output file names of a run."""

    mode: str = "wave"
    normalization: str = "sum"
    output_dir: str = "output"
    pattern_file: str = "pattern.csv"
    summary_file: str = "summary.json"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.normalization not in NORMALIZATIONS + ("none",):
            raise ValueError(
                f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}"
            )


@dataclass(frozen=True)
class SimulationConfig:
    species: MoleculeSpecies = field(default_factory=lambda: get_species("C60"))
    beam: GratingBeam = field(default_factory=GratingBeam)
    geometry: BeamlineGeometry = field(default_factory=BeamlineGeometry)
    velocity: VelocityDistribution = field(default_factory=VelocityDistribution)
    vertical: VerticalProfile = field(default_factory=VerticalProfile)
    detector: DetectorModel = field(default_factory=DetectorModel)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    run: RunSettings = field(default_factory=RunSettings)

    @property
    def digest(self):
        """sha256 of the canonical YAML dump."""
        return hashlib.sha256(dump_config(self).encode("utf-8")).hexdigest()


######################################################################
######################################################################


SECTION_KEYS = {
    "species": ("name", "mass", "alpha_re", "alpha_im"),
    "species_catalog": None,
    "grating": ("wavelength", "power", "waist_y", "waist_z"),
    "beamline": ("slit1_width", "slit2_width", "L12", "L2D", "detector_span"),
    "velocity": ("v_peak", "fwhm_ratio", "shape", "histogram_file"),
    "vertical": ("beam_fwhm",),
    "detector": ("width", "step", "kernel_shape"),
    "quadrature": (
        "source_nodes",
        "velocity_nodes",
        "vertical_nodes",
        "samples_per_period",
        "m_max",
        "tail_eps",
        "fine_step",
        "workers",
        "check_convergence",
        "strict_convergence",
    ),
    "run": ("mode", "normalization", "output_dir", "pattern_file", "summary_file"),
}

INT_KEYS = {
    "source_nodes",
    "velocity_nodes",
    "vertical_nodes",
    "samples_per_period",
    "m_max",
    "workers",
}

BOOL_KEYS = {"check_convergence", "strict_convergence"}

STRING_KEYS = {
    "name",
    "shape",
    "histogram_file",
    "kernel_shape",
    "mode",
    "normalization",
    "output_dir",
    "pattern_file",
    "summary_file",
}


# config keys as the validation messages call them
POLARIZABILITY_WORDS = {"alpha_re": "real", "alpha_im": "imaginary"}


def _key_lines(text):
    """Map dotted key paths to their 1-based line numbers."""

    lines = {}

    def walk(node, prefix):
        if not isinstance(node, yaml.MappingNode):
            return
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines[path] = key_node.start_mark.line + 1
            walk(value_node, path)

    walk(yaml.compose(text), "")

    return lines


class _Reader:
    """Typed access to the loaded YAML with key-path and line reporting."""

    def __init__(self, data, lines):
        self.data = data
        self.lines = lines

    def error(self, path, message):
        return ConfigError(path, message, self.lines.get(path))

    def section(self, name):
        value = self.data.get(name, {})
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(name, "section must be a mapping")

        allowed = SECTION_KEYS[name]
        if allowed is not None:
            for key in value:
                if key not in allowed:
                    raise self.error(f"{name}.{key}", "unknown key")

        return value

    def value(self, section, key, default):
        path = f"{section}.{key}"
        raw = self.data.get(section) or {}
        if key not in raw:
            return default
        return self.convert(path, key, raw[key])

    def convert(self, path, key, value):
        if key in BOOL_KEYS:
            if not isinstance(value, bool):
                raise self.error(path, f"expected true or false, got {value!r}")
            return value

        if key in STRING_KEYS:
            if value is None:
                return None
            if not isinstance(value, str):
                raise self.error(path, f"expected a string, got {value!r}")
            return value

        if isinstance(value, bool) or value is None:
            raise self.error(path, f"expected a number, got {value!r}")

        # YAML 1.1 reads exponents without a dot (7e-6) as strings
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise self.error(path, f"expected a number, got {value!r}") from None

        if not math.isfinite(number):
            raise self.error(path, f"expected a finite number, got {value!r}")

        if key in INT_KEYS:
            if number != int(number):
                raise self.error(path, f"expected an integer, got {value!r}")
            return int(number)

        return number

    def build(self, section, factory, words=None, **kwargs):
        """
        Construct a section object; validation errors point at the key the
        message names. ``words`` maps config keys to the word used for them
        in the messages where the two differ.
        """

        try:
            return factory(**kwargs)
        except (ValueError, TypeError) as e:
            message = str(e)
            names = {key: key for key in kwargs}
            names.update(words or {})
            raise self.error(self.culprit(section, message, names), message) from None

    def culprit(self, section, message, names):
        for key, word in names.items():
            path = f"{section}.{key}"
            if path in self.lines and re.search(rf"\b{re.escape(word)}\b", message):
                return path
        return section


def _parse_catalog(reader):
    raw = reader.section("species_catalog")

    catalog = {}
    for name, entry in raw.items():
        path = f"species_catalog.{name}"
        if not isinstance(entry, dict):
            raise reader.error(path, "entry must be a mapping with mass, alpha_re, alpha_im")
        for key in entry:
            if key not in ("mass", "alpha_re", "alpha_im"):
                raise reader.error(f"{path}.{key}", "unknown key")
        for key in ("mass", "alpha_re"):
            if key not in entry:
                raise reader.error(path, f"missing {key}")

        values = {key: reader.convert(f"{path}.{key}", key, entry[key]) for key in entry}
        polarizability = reader.build(
            path,
            ComplexPolarizability,
            words=POLARIZABILITY_WORDS,
            real_volume=values["alpha_re"],
            imag_volume=values.get("alpha_im", 0.0),
        )
        catalog[str(name)] = reader.build(
            path,
            MoleculeSpecies,
            name=str(name),
            mass=values["mass"],
            polarizability=polarizability,
        )

    return catalog


def _parse_species(reader, catalog):
    raw = reader.data.get("species")

    if raw is None:
        name = "C60"
        raw = {}
    elif isinstance(raw, str):
        name = raw
        raw = {}
    else:
        reader.section("species")
        name = reader.value("species", "name", "C60")

    inline = [key for key in ("mass", "alpha_re", "alpha_im") if key in raw]
    if not inline:
        try:
            return get_species(name, catalog)
        except KeyError as e:
            raise reader.error("species", e.args[0]) from None

    for key in ("mass", "alpha_re"):
        if key not in raw:
            raise reader.error("species", f"inline species needs {key}")

    polarizability = reader.build(
        "species",
        ComplexPolarizability,
        words=POLARIZABILITY_WORDS,
        real_volume=reader.value("species", "alpha_re", None),
        imag_volume=reader.value("species", "alpha_im", 0.0),
    )

    return reader.build(
        "species",
        MoleculeSpecies,
        name=name,
        mass=reader.value("species", "mass", None),
        polarizability=polarizability,
    )


def _parse_section(reader, name, factory, defaults, words=None):
    reader.section(name)
    kwargs = {key: reader.value(name, key, default) for key, default in defaults.items()}
    return reader.build(name, factory, words=words, **kwargs)


def _parse_velocity(reader, base_dir):
    reader.section("velocity")
    defaults = VelocityDistribution()

    shape = reader.value("velocity", "shape", defaults.shape)
    histogram_file = reader.value("velocity", "histogram_file", None)

    histogram = None
    if shape == "histogram":
        if histogram_file is None:
            raise reader.error("velocity.shape", "shape 'histogram' needs histogram_file")
        if base_dir is not None and not os.path.isabs(histogram_file):
            histogram_file = os.path.join(base_dir, histogram_file)
        try:
            histogram = load_velocity_histogram(histogram_file)
        except (OSError, ValueError) as e:
            raise reader.error("velocity.histogram_file", str(e)) from None

    return reader.build(
        "velocity",
        VelocityDistribution,
        v_peak=reader.value("velocity", "v_peak", defaults.v_peak),
        fwhm_ratio=reader.value("velocity", "fwhm_ratio", defaults.fwhm_ratio),
        shape=shape,
        histogram=histogram,
        histogram_file=histogram_file,
    )


def _defaults(instance, keys):
    return {key: getattr(instance, key) for key in keys}


def parse_config(text, base_dir=None):
    """
    Parse a YAML configuration.

    Parameters
    ----------
    text : str
        YAML text; empty text gives the default configuration.
    base_dir : str, optional
        Directory relative file names (velocity histogram) refer to.

    Returns
    -------
    config : SimulationConfig

    Raises
    ------
    ConfigError
        For YAML syntax errors, unknown sections or keys and invalid values,
        naming the key path and line.
    """

    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError("<document>", str(getattr(e, "problem", e)), line) from None

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<document>", "top level must be a mapping", 1)

    reader = _Reader(data, lines)

    for name in data:
        if name not in SECTION_KEYS:
            raise reader.error(str(name), "unknown section")

    catalog = _parse_catalog(reader)
    species = _parse_species(reader, catalog)

    beam = _parse_section(
        reader, "grating", GratingBeam, _defaults(GratingBeam(), SECTION_KEYS["grating"])
    )

    geometry = _parse_section(
        reader,
        "beamline",
        BeamlineGeometry,
        _defaults(BeamlineGeometry(), SECTION_KEYS["beamline"]),
    )

    velocity = _parse_velocity(reader, base_dir)

    reader.section("vertical")
    vertical = reader.build(
        "vertical",
        VerticalProfile,
        beam_fwhm=reader.value("vertical", "beam_fwhm", VerticalProfile().beam_fwhm),
        waist_y=beam.waist_y,
    )

    detector = _parse_section(
        reader,
        "detector",
        DetectorModel,
        _defaults(DetectorModel(), SECTION_KEYS["detector"]),
        words={"kernel_shape": "kernel"},
    )

    quadrature = _parse_section(
        reader,
        "quadrature",
        QuadratureSettings,
        _defaults(QuadratureSettings(), SECTION_KEYS["quadrature"]),
    )

    run = _parse_section(reader, "run", RunSettings, _defaults(RunSettings(), SECTION_KEYS["run"]))
    if run.normalization not in NORMALIZATIONS:
        raise reader.error("run.normalization", f"must be one of {NORMALIZATIONS}")

    # L2D = 0 only makes sense for the ray-optics envelope, not for a run
    if not geometry.L2D > 0:
        raise reader.error("beamline.L2D", f"must be > 0 for a simulation, got {geometry.L2D}")

    return SimulationConfig(species, beam, geometry, velocity, vertical, detector, quadrature, run)


def load_config(filename):
    """Read and parse a configuration file."""

    with open(filename) as f:
        text = f.read()

    print(f"... [lightgrat] config loaded from {filename}")

    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(filename)))


def config_to_dict(config):
    """Nested plain-type dictionary with the sections of the YAML file."""

    species = config.species
    polarizability = species.polarizability

    velocity = {
        "v_peak": config.velocity.v_peak,
        "fwhm_ratio": config.velocity.fwhm_ratio,
        "shape": config.velocity.shape,
        "histogram_file": config.velocity.histogram_file,
    }

    return {
        "species": {
            "name": species.name,
            "mass": float(species.mass),
            "alpha_re": float(polarizability.real_volume),
            "alpha_im": float(polarizability.imag_volume),
        },
        "grating": _defaults(config.beam, SECTION_KEYS["grating"]),
        "beamline": _defaults(config.geometry, SECTION_KEYS["beamline"]),
        "velocity": velocity,
        "vertical": {"beam_fwhm": config.vertical.beam_fwhm},
        "detector": _defaults(config.detector, SECTION_KEYS["detector"]),
        "quadrature": _defaults(config.quadrature, SECTION_KEYS["quadrature"]),
        "run": _defaults(config.run, SECTION_KEYS["run"]),
    }


def dump_config(config):
    """
    Serialize a configuration to YAML.

    Species are written inline so that the dump does not depend on a catalog;
    ``parse_config(dump_config(c)) == c``.
    """

    return yaml.safe_dump(config_to_dict(config), sort_keys=False, default_flow_style=False)
