from lightgratipy import beamline, config, distributions, grating, orders, output, simulate, species
