"""Thin-film transmission simulation and neural inverse design.

Pipeline: generate (thickness sequence, transmission spectrum) datasets for
SiO2/TiO2 multilayers with a transfer-matrix solver, train forward networks
(thicknesses -> spectrum) and tandem networks (spectrum -> thicknesses ->
spectrum, forward part frozen), and compare against a genetic-algorithm
baseline.  Everything is seeded and reproducible at desktop scale.
"""

__version__ = "0.1.0"

from .accel import backend_name

__all__ = ["backend_name", "__version__"]
