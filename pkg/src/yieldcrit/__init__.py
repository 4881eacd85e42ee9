"""Critical yield number of rigid particles in a Bingham fluid, via discrete
total-variation minimisation on a uniform grid."""
from .analysis import QuantizationError, QuantizedSolution, histogram, level_set_components, quantize_three
from .calculus import discrete_tv, signed_divergence, upwind_gradient
from .flow import (FlowSolution, PhysicalScales, buoyancy_number, critical_yield_number, solve_flow,
                   sweep_to_critical)
from .grid import (Disk, DomainMasks, GeometryError, GeometrySpec, Grid, Polygon, Rectangle, Stencil,
                   build_grid, label_components, rasterize)
from .projections import ConstraintMode, project_dual, project_primal
from .solver import SolverConfig, SolverError, YieldSolution, compute_yc, solve

__version__ = "0.1.0"
