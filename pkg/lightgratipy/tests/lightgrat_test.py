#!/usr/bin/env python

from dataclasses import replace

from lightgratipy.config import QuadratureSettings, SimulationConfig, dump_config
from lightgratipy.grating import GratingBeam
from lightgratipy.simulate import GratingSimulation
from lightgratipy.species import ComplexPolarizability, MoleculeSpecies, get_species


FAST_QUADRATURE = QuadratureSettings(
    source_nodes=4,
    velocity_nodes=8,
    vertical_nodes=4,
    samples_per_period=256,
    m_max=20,
    fine_step=0.2e-6,
)


def fast_config(species="C60", power=9.5, mode="wave", **quadrature):
    """Default beamline with a coarse quadrature that runs in seconds."""

    if isinstance(species, str):
        species = get_species(species)

    return SimulationConfig(
        species=species,
        beam=GratingBeam(power=power),
        quadrature=replace(FAST_QUADRATURE, **quadrature),
        run=replace(SimulationConfig().run, mode=mode),
    )


def transparent(name):
    """Species without absorption at the grating wavelength."""

    species = get_species(name)
    polarizability = ComplexPolarizability(species.polarizability.real_volume, 0.0)

    return MoleculeSpecies(species.name, species.mass, polarizability)


def write_config(config, directory, name="config.yaml"):
    filename = directory / name
    filename.write_text(dump_config(config))
    return str(filename)


class GratingSimulationTest(GratingSimulation):
    def __init__(self, *args, **kwargs):

        super().__init__(fast_config(*args, **kwargs))

        print("... [lightgrat] fast test configuration loaded")
