from dataclasses import replace

import numpy as np
import pytest

import lightgratipy.cli
from lightgrat_test import fast_config, write_config
from lightgratipy.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DATA, EXIT_OK, main, species_table
from lightgratipy.output import write_pattern_csv


def test_constants(capsys):

    assert main(["constants"]) == EXIT_OK

    out = capsys.readouterr().out
    assert "C60" in out
    assert "C70" in out


def test_species_table():

    table = species_table()

    sigma = dict(zip(table["name"], table["sigma_cm2"]))
    assert sigma["C60"] == pytest.approx(1.2e-17, rel=0.05)
    assert sigma["C70"] == pytest.approx(3.1e-17, rel=0.05)


def test_simulate(tmp_path):

    config_file = write_config(fast_config(mode="orders"), tmp_path)
    output_dir = tmp_path / "out"

    assert main(["simulate", config_file, "--output-dir", str(output_dir), "--workers", "2"]) == EXIT_OK

    assert (output_dir / "pattern.csv").exists()
    assert (output_dir / "summary.json").exists()


def test_orders(tmp_path, capsys):

    config_file = write_config(fast_config(), tmp_path)

    assert main(["orders", config_file, "--output-dir", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "orders.csv").exists()
    assert "ensemble" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path):

    config_file = tmp_path / "config.yaml"
    config_file.write_text("grating:\n  power: 9.5\n  colour: green\n")

    assert main(["simulate", str(config_file), "--output-dir", str(tmp_path)]) == EXIT_CONFIG
    assert main(["scan", str(config_file), "--powers", "1"]) == EXIT_CONFIG


def test_invalid_power_exit_code(tmp_path):

    config_file = write_config(fast_config(mode="orders"), tmp_path)

    args = ["scan", config_file, "--output-dir", str(tmp_path), "--powers"]
    assert main(args + ["1", "-2"]) == EXIT_CONFIG
    assert main(args + ["nan"]) == EXIT_CONFIG
    assert main(["simulate", config_file, "--workers", "0"]) == EXIT_CONFIG


def test_convergence_exit_code(tmp_path):

    config = fast_config(
        mode="orders",
        velocity_nodes=1,
        vertical_nodes=1,
        source_nodes=1,
        check_convergence=True,
        strict_convergence=True,
    )
    config_file = write_config(config, tmp_path)

    assert main(["simulate", config_file, "--output-dir", str(tmp_path)]) == EXIT_CONVERGENCE


def test_compare(tmp_path, capsys):

    x = 2e-6 * np.arange(-20, 21)
    write_pattern_csv(x, np.exp(-(x**2) / 50e-12), str(tmp_path / "a.csv"))
    write_pattern_csv(x, np.exp(-((x + 4e-6) ** 2) / 50e-12), str(tmp_path / "b.csv"))

    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == EXIT_OK
    assert "shift_um = -4.000000" in capsys.readouterr().out

    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "missing.csv")]) == EXIT_DATA


def test_zero_grating_distance_exit_code(tmp_path):

    config = fast_config()
    config = replace(config, geometry=replace(config.geometry, L2D=0.0))
    config_file = write_config(config, tmp_path)

    assert main(["simulate", config_file, "--output-dir", str(tmp_path)]) == EXIT_CONFIG


def test_scan_numerical_errors_are_not_config_errors(tmp_path, monkeypatch):

    def failing_scan(config, powers, output_dir=None):
        raise ValueError("Fresnel kernel undersampled")

    monkeypatch.setattr(lightgratipy.cli, "run_power_scan", failing_scan)
    config_file = write_config(fast_config(mode="orders"), tmp_path)

    with pytest.raises(ValueError, match="undersampled"):
        main(["scan", config_file, "--powers", "1", "--output-dir", str(tmp_path)])
