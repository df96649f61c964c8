"""
Provides the gap metrics between a method's solutions and reference solutions,
:func:`binary_gap` and :func:`objective_gap`, and their aggregation :func:`compute_gap_report`.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence
import numpy as np
from ..model import BinarySelection


class LengthMismatch(ValueError):
    """Raised if two selections have different lengths."""


class NonpositiveReference(ValueError):
    """Raised if a reference objective is not positive."""


def binary_gap(b1: BinarySelection, b2: BinarySelection) -> float:
    """Return ``sum_i |b1_i - b2_i| / 2``."""
    if b1.n != b2.n:
        raise LengthMismatch(f'selections have lengths {b1.n} and {b2.n}')
    return 0.5 * float(np.sum(b1.bits != b2.bits))


def objective_gap(obj: float, obj_ref: float) -> float:
    """Return ``(obj - obj_ref) / obj_ref``; negative if ``obj`` beats the reference."""
    if not obj_ref > 0.:
        raise NonpositiveReference(f'reference objective {obj_ref} is not positive')
    return (obj - obj_ref) / obj_ref


def summarize(values: Sequence[float]) -> Optional[Dict[str, float]]:
    """Mean, median, max and min of ``values``; ``None`` if there are none."""
    if len(values) == 0:
        return None
    values = np.asarray(values, dtype=float)
    return {'mean': float(np.mean(values)), 'median': float(np.median(values)),
            'max': float(np.max(values)), 'min': float(np.min(values))}


@dataclass(frozen=True)
class GapRecord:
    target_return: float
    method: str
    binary_gap: float
    objective_gap: float
    reference_proved: bool

    def to_dict(self) -> dict:
        return {'target_return': self.target_return, 'method': self.method,
                'binary_gap': self.binary_gap, 'objective_gap': self.objective_gap,
                'reference_proved': self.reference_proved}


@dataclass
class GapReport:
    """
    Per-target gap records and, per table (``binary_gap``, ``objective_gap`` and their
    ``*_proved`` variants restricted to proved-optimal references), per-method summaries
    (``None`` where a method has no records).
    """
    records: List[GapRecord] = field(default_factory=list)
    aggregates: Dict[str, Dict[str, Optional[Dict[str, float]]]] = field(default_factory=dict)


@dataclass(frozen=True)
class ReferenceSolution:
    """Reference selection and objective for one target, with its optimality flag."""
    selection: BinarySelection
    objective: float
    proved_optimal: bool


def compute_gap_report(
        solutions: Mapping[str, Mapping[float, Optional[BinarySelection]]],
        objectives: Mapping[str, Mapping[float, float]],
        references: Mapping[float, Optional[ReferenceSolution]],
        ) -> GapReport:
    """
    Compute the gaps of each method's solution against the reference at each target return.

    Targets where the method or the reference has no (feasible) solution are skipped.

    Parameters
    ----------
    solutions : mapping
        ``solutions[method][target_return]`` is the method's selection (or ``None``).
    objectives : mapping
        ``objectives[method][target_return]`` is the method's objective.
    references : mapping
        ``references[target_return]`` is the reference solution (or ``None``).
    """
    records = []
    for method, by_target in solutions.items():
        for target, selection in by_target.items():
            ref = references.get(target)
            obj = objectives[method][target]
            if selection is None or ref is None or not np.isfinite(obj):
                continue
            records.append(GapRecord(
                    target_return=target, method=method,
                    binary_gap=binary_gap(selection, ref.selection),
                    objective_gap=objective_gap(obj, ref.objective),
                    reference_proved=ref.proved_optimal))

    def values(method, metric, proved_only):
        return [getattr(r, metric) for r in records
                if r.method == method and (r.reference_proved or not proved_only)]

    aggregates = {}
    for metric in ('binary_gap', 'objective_gap'):
        for suffix, proved_only in (('', False), ('_proved', True)):
            aggregates[metric + suffix] = {
                    method: summarize(values(method, metric, proved_only)) for method in solutions}
    return GapReport(records=records, aggregates=aggregates)
