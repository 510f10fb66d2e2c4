"""First-order least-squares finite elements for convection-dominated
diffusion on triangles, with weakly imposed Dirichlet boundary conditions,
a pure-transport specialization, and a verification harness for
convergence rates and condition-number scaling.
"""

from . import assembly, bench, cli, fem, mesh, solver

__version__ = "0.1.0"

__all__ = ["assembly", "bench", "cli", "fem", "mesh", "solver", "__version__"]
