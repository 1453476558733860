"""Numerical laboratory for the vanishing viscosity limit of symmetric flows.

Plane-parallel channel flow and annular parallel pipe flow reduce to weakly
coupled drift-diffusion systems.  This package solves the viscous and inviscid
systems, assembles explicit boundary-layer correctors from erfc heat kernels
and half-strip drift-diffusion solves, and measures the convergence rates,
vorticity bounds and vortex-sheet formation as the viscosity tends to zero.
"""

__version__ = "0.1.0"
