"""wosbench: procedural elliptic-PDE benchmark with a Walk-on-Spheres solver.

Generate boundary-value problems with exact analytic solutions (method of
manufactured solutions), solve them with a Monte Carlo Walk-on-Spheres
estimator at arbitrary sample budgets, and evaluate estimators and
denoisers under a finite-compute protocol.
"""

__version__ = "0.1.0"

from .field import Field
from .geometry import Domain
from .atoms import Atom, Solution
from .manufactured import GenConfig, PdeInstance

__all__ = ["Field", "Domain", "Atom", "Solution", "GenConfig", "PdeInstance", "__version__"]
