"""
Provides the convex QP subsolver for equality-constrained, box-bounded problems.
"""
from .active_set import (
        QpProblem, QpResult, QpStatus, SingularKkt, UnboundedQp, solve_qp, independent_rows)
