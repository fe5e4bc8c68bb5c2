"""tileshift: tileability decisions, tiling cocycles, lattice nets and
finitely dependent process samplers on Z^d windows."""

__version__ = "0.1.0"

from . import boxcalc, cocycle, grouplib, netcover, samplers, tilegrid  # noqa: F401
