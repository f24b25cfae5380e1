"""Dissipative two-band lattice simulator: Liouvillian spectra, winding
topology, steady states and skin-effect observables."""

__version__ = "0.1.0"

from .model import Boundary, Dissipator, LatticeSpec  # noqa: F401
