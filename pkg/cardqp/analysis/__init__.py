"""
Gap metrics, frontier sweeps and percentage errors.
"""
from .gaps import (
        LengthMismatch, NonpositiveReference, GapRecord, GapReport, ReferenceSolution,
        binary_gap, objective_gap, summarize, compute_gap_report)
from .frontier import (
        OutOfRange, DatasetMissing, FrontierMethod, PointStatus, FrontierPoint, SweepSettings,
        FrontierSweep, percentage_error, sweep_targets, target_seed, solve_target,
        sweep_frontier)
