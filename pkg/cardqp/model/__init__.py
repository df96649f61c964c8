"""
Provides the domain types of the cardinality-constrained model and their validation.
"""
from .selection import BinarySelection, CardinalityError
from .problem_instance import (
        ProblemInstance, MvSpec, Diagnostic, WeightedSolution, SolutionStatus,
        DimensionMismatch, InvalidBounds, build_from_mv, validate)
from .uef import UefCurve
