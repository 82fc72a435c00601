#!/usr/bin/env python

"""Command line interface: ``lightgratipy <subcommand> ...``."""

import argparse
import math
import sys
from dataclasses import replace

import pandas as pd

import lightgratipy.starter as starter
from lightgratipy.config import load_config
from lightgratipy.errors import ConfigError, ConvergenceError, PatternDataError
from lightgratipy.grating import GratingBeam
from lightgratipy.simulate import run_compare, run_orders, run_power_scan, run_simulate
from lightgratipy.species import CODATA2018, SPECIES_CATALOG, absorption_cross_section


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_DATA = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lightgratipy",
        description="Matter-wave diffraction at a standing light wave grating",
    )
    parser.add_argument("--version", action="version", version=starter.__version__)

    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_options(p):
        p.add_argument("config", help="Path to YAML configuration")
        p.add_argument("--output-dir", default=None, help="Overrides run.output_dir")
        p.add_argument(
            "--workers", type=int, default=None, help="Threads for the ensemble quadrature"
        )

    add_run_options(sub.add_parser("simulate", help="Compute a detector pattern"))
    add_run_options(sub.add_parser("orders", help="Diffraction-order spectrum only"))

    scan = sub.add_parser("scan", help="Series of laser powers")
    add_run_options(scan)
    scan.add_argument("--powers", type=float, nargs="+", required=True, help="Powers in W")

    compare = sub.add_parser("compare", help="Align and compare two pattern CSV files")
    compare.add_argument("pattern_a")
    compare.add_argument("pattern_b")

    sub.add_parser("constants", help="Print physical constants and species catalog")

    return parser


def _load(args):
    config = load_config(args.config)

    if args.workers is not None:
        try:
            quadrature = replace(config.quadrature, workers=args.workers)
        except ValueError as e:
            raise ConfigError("quadrature.workers", str(e)) from None
        config = replace(config, quadrature=quadrature)

    return config


def species_table(wavelength=GratingBeam().wavelength):
    """Catalog with cross sections at the given laser wavelength."""

    k_L = GratingBeam(wavelength=wavelength).k_L

    rows = []
    for name, species in SPECIES_CATALOG.items():
        rows.append(
            {
                "name": name,
                "mass_amu": species.mass,
                "alpha_re_A3": species.polarizability.real_volume,
                "alpha_im_A3": species.polarizability.imag_volume,
                "sigma_cm2": absorption_cross_section(species, k_L) * 1e4,
            }
        )

    return pd.DataFrame(rows)


def print_constants():
    for name in ("h", "c", "eps0", "amu"):
        print(f"{name:>6s} = {getattr(CODATA2018, name):.12g}")
    print(f"{'hbar':>6s} = {CODATA2018.hbar:.12g}")
    print()
    print(species_table().to_string(index=False))


def dispatch(args):
    if args.command == "simulate":
        run_simulate(_load(args), args.output_dir)

    elif args.command == "orders":
        table = run_orders(_load(args), args.output_dir)
        visible = table[table["intensity"] > 1e-6][["m", "intensity", "ensemble"]]
        print(visible.to_string(index=False))

    elif args.command == "scan":
        config = _load(args)
        if not all(math.isfinite(p) and p >= 0 for p in args.powers):
            raise ConfigError("--powers", f"powers must be finite and >= 0, got {args.powers}")
        run_power_scan(config, args.powers, args.output_dir)

    elif args.command == "compare":
        report = run_compare(args.pattern_a, args.pattern_b)
        print(f"shift_um = {report['shift_um']:.6f}")
        print(f"nrmse = {report['nrmse']:.6e}")

    elif args.command == "constants":
        print_constants()


def main(argv=None):
    """
    Run the command line interface.

    Returns
    -------
    code : int
        0 success, 2 configuration error, 3 convergence failure,
        4 pattern data or IO error.
    """

    args = build_parser().parse_args(argv)

    try:
        dispatch(args)

    except ConfigError as e:
        print(f"... [lightgrat] ERROR: {e}", file=sys.stderr)
        return EXIT_CONFIG

    except ConvergenceError as e:
        print(f"... [lightgrat] ERROR: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE

    except (PatternDataError, OSError) as e:
        print(f"... [lightgrat] ERROR: {e}", file=sys.stderr)
        return EXIT_DATA

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
