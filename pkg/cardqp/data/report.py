"""
Provides :class:`ReportDocument` and its deterministic serialization: :func:`write_report`
(JSON or CSV tables), :func:`read_report` and :func:`save_report`.

Floats are written with 17 significant digits, non-finite floats as ``null`` (empty in CSV),
fields in insertion order, and lines end with ``\\n``.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Union
import csv
import io
import json
import os
import numpy as np


class ReportFormat(Enum):
    JSON = 'json'
    CSV = 'csv'


@dataclass
class ReportDocument:
    """
    Machine-readable result of a command.

    ``frontier``, ``gaps`` and ``solutions`` are lists of flat records; ``aggregates`` maps a
    table name to ``{method: {statistic: value}}`` (``None`` for a method without values).
    """
    metadata: Dict[str, Any] = field(default_factory=dict)
    frontier: List[Dict[str, Any]] = field(default_factory=list)
    gaps: List[Dict[str, Any]] = field(default_factory=list)
    aggregates: Dict[str, Dict[str, Optional[Dict[str, Any]]]] = field(default_factory=dict)
    solutions: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {'metadata': self.metadata, 'frontier': self.frontier, 'gaps': self.gaps,
                'aggregates': self.aggregates, 'solutions': self.solutions}


def format_float(value: float) -> str:
    """17 significant digits; ``null`` for non-finite values."""
    value = float(value)
    return f'{value:.17g}' if np.isfinite(value) else 'null'


def _to_json(value: Any, level: int = 0) -> str:
    # pylint: disable=too-many-return-statements
    pad, inner = '  ' * level, '  ' * (level + 1)
    if value is None:
        return 'null'
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Enum):
        return json.dumps(value.value)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        if not value:
            return '[]'
        return '[\n' + ',\n'.join(inner + _to_json(v, level + 1) for v in value) + f'\n{pad}]'
    if isinstance(value, dict):
        if not value:
            return '{}'
        return '{\n' + ',\n'.join(
                f'{inner}{json.dumps(str(k))}: {_to_json(v, level + 1)}'
                for k, v in value.items()) + f'\n{pad}}}'
    raise TypeError(f'cannot serialize {type(value).__name__}')


def _csv_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        s = format_float(value)
        return '' if s == 'null' else s
    if isinstance(value, (dict, list, tuple, np.ndarray)):
        return _to_json(value).replace('\n', ' ')
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _csv_table(header: List[str], rows: List[List[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows([[_csv_cell(v) for v in row] for row in rows])
    return buffer.getvalue().encode('utf-8')


def _records_table(records: List[Dict[str, Any]]) -> bytes:
    header = list(dict.fromkeys(k for r in records for k in r))
    return _csv_table(header, [[r.get(k) for k in header] for r in records])


def write_report(doc: ReportDocument, format: Union[str, ReportFormat] = ReportFormat.JSON
        ) -> Union[bytes, Dict[str, bytes]]:
    """
    Serialize a report.

    Returns
    -------
    bytes or dict
        For JSON the document bytes; for CSV a dict mapping the file names
        ``metadata.csv``, ``frontier.csv``, ``gaps.csv``, ``aggregates.csv`` and
        ``solutions.csv`` to their bytes (each with a header row).
    """
    # pylint: disable=redefined-builtin
    format = ReportFormat(format)
    if format is ReportFormat.JSON:
        return (_to_json(doc.to_dict()) + '\n').encode('utf-8')
    aggregate_rows = [[table, method, stat, value]
                      for table, methods in doc.aggregates.items()
                      for method, stats in methods.items()
                      for stat, value in (stats or {}).items()]
    return {
        'metadata.csv': _csv_table(['key', 'value'], [[k, v] for k, v in doc.metadata.items()]),
        'frontier.csv': _records_table(doc.frontier),
        'gaps.csv': _records_table(doc.gaps),
        'aggregates.csv': _csv_table(['table', 'method', 'statistic', 'value'], aggregate_rows),
        'solutions.csv': _records_table(doc.solutions),
    }


def read_report(data: Union[bytes, str]) -> ReportDocument:
    """Parse a JSON report written by :func:`write_report`."""
    obj = json.loads(data)
    return ReportDocument(
            metadata=obj.get('metadata', {}), frontier=obj.get('frontier', []),
            gaps=obj.get('gaps', []), aggregates=obj.get('aggregates', {}),
            solutions=obj.get('solutions', []))


def save_report(doc: ReportDocument, path: str,
                format: Union[str, ReportFormat] = ReportFormat.JSON) -> None:
    """
    Write a report to ``path`` (a file for JSON, a directory of tables for CSV).
    """
    # pylint: disable=redefined-builtin
    output = write_report(doc, format)
    if isinstance(output, bytes):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'wb') as f:
            f.write(output)
        return
    os.makedirs(path, exist_ok=True)
    for name, content in output.items():
        with open(os.path.join(path, name), 'wb') as f:
            f.write(content)
