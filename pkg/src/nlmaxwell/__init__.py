"""Nonlinear-conductivity Maxwell solvers on a staggered grid.

The full system (eps > 0) is integrated by leapfrog with a pointwise
implicit resolvent for the conductive term; the quasi-static limit (eps = 0)
by explicit nonlinear diffusion of H.  The harness compares the two.
"""
from .conductivity import (
    Constant,
    Material,
    PiecewiseLinear,
    PowerLaw,
    Smoothed,
    Step,
    resolve,
    resolve_array,
    resistivity,
    sigma_eval,
    smooth,
    validate_growth,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyError,
    NlMaxwellError,
    ParameterError,
    SolverError,
    StiffnessError,
    StructuralError,
    UnsupportedShapeError,
)
from .grid import FieldState, StaggeredGrid, curl_E, curl_H, div_H, inner_product, lq_norm
from .harness import mms_study, run_sweep, spacetime_norm
from .solver_full import FullSolverConfig, energy_record, run_full, solution_gap, step_full
from .solver_qs import QsSolverConfig, interface_cells, qs_electric_field, run_qs, step_qs

__version__ = "0.1.0"
