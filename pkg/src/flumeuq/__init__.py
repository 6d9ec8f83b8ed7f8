"""Desk-scale 2-D SPH wave flume with one-way coupled structural response
and forward uncertainty quantification."""

from . import (errors, flume, forces, io, kernels, manifest, runner, sampling,
               sph, structure, uq, wavemaker)

__version__ = "0.1.0"

__all__ = ["errors", "flume", "forces", "io", "kernels", "manifest", "runner",
           "sampling", "sph", "structure", "uq", "wavemaker", "__version__"]
