"""Numerical lab for the radial 2D Schrodinger equation
i u_t + Lap u - |x|^2 u + eps |x|^mu g(u) = 0 with g(u) = u G'(|u|^2).

Modules: nonlin (G families and structural checks), grid (radial mesh and
operators), functionals (mass/energy/action/K/virial/scaling), groundstate
(shooting + Newton stationary solver), evolve (mass-conserving Strang
integrator), lab (experiment harness and CLI protocols).
"""

from .nonlin import NonlinearitySpec, SaturationError, check_conditions
from .grid import RadialGrid, RadialField, build_grid
from .groundstate import ground_state, GroundStateError
from .evolve import EvolveParams

__all__ = [
    "NonlinearitySpec",
    "SaturationError",
    "check_conditions",
    "RadialGrid",
    "RadialField",
    "build_grid",
    "ground_state",
    "GroundStateError",
    "EvolveParams",
]

__version__ = "0.1.0"
