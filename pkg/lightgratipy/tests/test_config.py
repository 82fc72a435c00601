from dataclasses import replace

import pytest

from lightgrat_test import fast_config
from lightgratipy.config import (
    SimulationConfig,
    dump_config,
    load_config,
    parse_config,
)
from lightgratipy.errors import ConfigError


def test_empty_config_gives_defaults():

    config = parse_config("")

    assert config == SimulationConfig()
    assert config.species.name == "C60"
    assert config.beam.power == 9.5
    assert config.geometry.L12 == 1.13
    assert config.quadrature.m_max == 20
    assert config.run.mode == "wave"


def test_sections_and_numeric_strings():

    text = """
species: C70
grating:
  power: 7
  waist_y: 1.2e-3
beamline:
  slit1_width: 7e-6
  L2D: 1.25
velocity:
  v_peak: 140
quadrature:
  source_nodes: 8
  check_convergence: true
run:
  mode: orders
  normalization: peak
"""

    config = parse_config(text)

    assert config.species.name == "C70"
    assert config.beam.power == 7.0
    assert config.geometry.slit1_width == 7e-6
    assert config.geometry.L2D == 1.25
    assert config.velocity.v_peak == 140.0
    assert config.vertical.waist_y == 1.2e-3
    assert config.quadrature.source_nodes == 8
    assert config.quadrature.check_convergence is True
    assert config.run.mode == "orders"


def test_inline_species_and_catalog():

    inline = parse_config("species:\n  name: PFNT\n  mass: 1600\n  alpha_re: 200\n")
    assert inline.species.mass == 1600.0
    assert inline.species.polarizability.imag_volume == 0.0

    text = "species: C84\nspecies_catalog:\n  C84:\n    mass: 1008\n    alpha_re: 140\n    alpha_im: 10\n"
    config = parse_config(text)
    assert config.species.mass == 1008.0
    assert config.species.polarizability.imag_volume == 10.0


@pytest.mark.parametrize(
    "text, key_path, line",
    [
        ("grating:\n  power: 9.5\n  colour: green\n", "grating.colour", 3),
        ("run:\n  mode: wave\nextras:\n  a: 1\n", "extras", 3),
        ("velocity:\n  v_peak: -120\n", "velocity.v_peak", 2),
        ("grating:\n  wavelength: 514.5e-9\n  power: -1\n", "grating.power", 3),
        ("detector:\n  width: 8e-6\n  kernel_shape: lorentz\n", "detector.kernel_shape", 3),
        ("species:\n  name: X\n  mass: 10\n  alpha_re: 1\n  alpha_im: -1\n", "species.alpha_im", 5),
        ("beamline:\n  slit1_width: 7e-6\n  L2D: 0\n", "beamline.L2D", 3),
        ("quadrature:\n  source_nodes: 2.5\n", "quadrature.source_nodes", 2),
        ("quadrature:\n  workers: many\n", "quadrature.workers", 2),
        ("quadrature:\n  check_convergence: 1\n", "quadrature.check_convergence", 2),
        ("species: C99\n", "species", 1),
        ("run:\n  normalization: none\n", "run.normalization", 2),
    ],
)
def test_config_errors_name_key_and_line(text, key_path, line):

    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)

    assert excinfo.value.key_path == key_path
    assert excinfo.value.line == line
    assert f"config line {line}: {key_path}" in str(excinfo.value)


def test_yaml_syntax_error():

    with pytest.raises(ConfigError) as excinfo:
        parse_config("grating:\n  power: [9.5\n")

    assert excinfo.value.line is not None


def test_dump_round_trip():

    config = fast_config(species="C70", power=4.25, mode="orders")
    config = replace(config, run=replace(config.run, normalization="peak", output_dir="results"))

    assert parse_config(dump_config(config)) == config
    assert parse_config(dump_config(parse_config(""))) == parse_config("")


def test_digest():

    config = fast_config()

    assert config.digest == fast_config().digest
    assert config.digest != fast_config(power=9.0).digest
    assert len(config.digest) == 64


def test_load_config_with_histogram(tmp_path):

    (tmp_path / "velocities.csv").write_text("100,1\n120,2\n140,1\n")
    filename = tmp_path / "config.yaml"
    filename.write_text("velocity:\n  shape: histogram\n  histogram_file: velocities.csv\n")

    config = load_config(str(filename))

    assert config.velocity.histogram == ((100.0, 1.0), (120.0, 2.0), (140.0, 1.0))
    assert parse_config(dump_config(config)) == config


def test_missing_histogram_file(tmp_path):

    text = "velocity:\n  shape: histogram\n  histogram_file: missing.txt\n"

    with pytest.raises(ConfigError) as excinfo:
        parse_config(text, base_dir=str(tmp_path))

    assert excinfo.value.key_path == "velocity.histogram_file"
    assert excinfo.value.line == 3
