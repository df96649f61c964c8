"""
Relaxations of the model, each proposing a selection and a lower bound.
"""

from .outcome import (
        RelaxationOutcome, RelaxationKind, RelaxationInfeasible, RelaxationNotConverged,
        discretize_topk, discretize)
from .line import line_relaxation, solve_line
from .dual import (
        NearSingularQ, DualVariables, DualAscentParams, LagrangianDual, compute_phi,
        dual_objective, augm_objective, solve_dual, solve_augm)
