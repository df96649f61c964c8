"""
Provides the readers of the OR-Library portfolio files: :func:`parse_port` (asset statistics
and correlations), :func:`parse_uef` (efficient frontier), :func:`covariance`, and
:func:`load_dataset` bundling them.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Tuple, Union, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import os
import warnings
import numpy as np
from ..model import UefCurve
from ..utils import shift_to_positive_definite

CORRELATION_TOL = 1e-8
SHIFT_EIGENVALUE = 1e-10


class PortFormatError(ValueError):
    """Base class of input format errors, optionally naming the (1-based) line."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f'line {line}: {message}')
        self.line = line


class MalformedLine(PortFormatError):
    pass


class IndexOutOfRange(PortFormatError):
    pass


class DuplicateEntry(PortFormatError):
    pass


class CountMismatch(PortFormatError):
    pass


class EmptyCurve(PortFormatError):
    pass


class NotPsd(ValueError):
    """Raised if a correlation or covariance matrix is not positive-semidefinite."""


@dataclass(frozen=True, eq=False)
class AssetUniverse:
    """Per-asset mean returns and standard deviations with their correlation matrix."""
    mean_returns: np.ndarray
    std_devs: np.ndarray
    correlation: np.ndarray

    def __post_init__(self):
        mean_returns = np.array(self.mean_returns, dtype=float).reshape(-1)
        std_devs = np.array(self.std_devs, dtype=float).reshape(-1)
        correlation = np.array(self.correlation, dtype=float)
        n = mean_returns.shape[0]
        if std_devs.shape != (n,) or correlation.shape != (n, n):
            raise ValueError('inconsistent universe dimensions')
        if np.any(std_devs <= 0.):
            raise ValueError('standard deviations must be positive')
        if not np.allclose(correlation, correlation.T, rtol=0., atol=1e-12):
            raise ValueError('correlation must be symmetric')
        if np.any(np.abs(correlation) > 1. + CORRELATION_TOL):
            raise ValueError('correlation entries must be in [-1, 1]')
        for arr in (mean_returns, std_devs, correlation):
            arr.setflags(write=False)
        object.__setattr__(self, 'mean_returns', mean_returns)
        object.__setattr__(self, 'std_devs', std_devs)
        object.__setattr__(self, 'correlation', correlation)

    @property
    def n(self) -> int:
        return self.mean_returns.shape[0]


def _lines(source: Union[str, Iterable[str]]) -> Iterator[Tuple[int, List[str]]]:
    # yields (1-based line number, fields) of non-blank lines; CRLF is tolerated
    if isinstance(source, str):
        source = source.splitlines()
    for lineno, line in enumerate(source, start=1):
        fields = line.split()
        if fields:
            yield lineno, fields


def _floats(fields: List[str], count: int, lineno: int) -> List[float]:
    if len(fields) != count:
        raise MalformedLine(f'expected {count} fields, got {len(fields)}', lineno)
    try:
        return [float(f) for f in fields]
    except ValueError as e:
        raise MalformedLine(str(e), lineno) from e


def parse_port(source: Union[str, Iterable[str]]) -> AssetUniverse:
    """
    Parse an OR-Library ``port`` file: the asset count ``n``, ``n`` lines
    ``mean_return std_dev`` and lines ``i j correlation`` with 1-based indices covering the
    upper triangle. Missing diagonal entries default to 1 and missing off-diagonal entries to 0,
    each with a warning.

    Parameters
    ----------
    source : str or iterable of str
        File content or an iterable of lines (e.g. an open text file).

    Raises
    ------
    MalformedLine, IndexOutOfRange, DuplicateEntry, CountMismatch
    """
    lines = _lines(source)
    try:
        lineno, fields = next(lines)
    except StopIteration:
        raise CountMismatch('empty input') from None
    if len(fields) != 1 or not fields[0].isdigit() or int(fields[0]) < 1:
        raise MalformedLine('first line must be a positive asset count', lineno)
    n = int(fields[0])

    stats = np.empty((n, 2))
    for i in range(n):
        try:
            lineno, fields = next(lines)
        except StopIteration:
            raise CountMismatch(f'expected {n} asset lines, got {i}') from None
        stats[i] = _floats(fields, 2, lineno)
    if np.any(stats[:, 1] <= 0.):
        raise MalformedLine(f'non-positive standard deviation for asset '
                            f'{int(np.argmax(stats[:, 1] <= 0.)) + 1}')

    correlation = np.full((n, n), np.nan)
    for lineno, fields in lines:
        if len(fields) != 3:
            raise MalformedLine(f'expected 3 fields, got {len(fields)}', lineno)
        try:
            i, j = int(fields[0]), int(fields[1])
            value = float(fields[2])
        except ValueError as e:
            raise MalformedLine(str(e), lineno) from e
        if not (1 <= i <= n and 1 <= j <= n):
            raise IndexOutOfRange(f'index ({i}, {j}) outside [1, {n}]', lineno)
        if abs(value) > 1. + CORRELATION_TOL:
            raise MalformedLine(f'correlation {value} outside [-1, 1]', lineno)
        i, j = i - 1, j - 1
        if not np.isnan(correlation[i, j]):
            raise DuplicateEntry(f'duplicate entry ({i + 1}, {j + 1})', lineno)
        correlation[i, j] = correlation[j, i] = value

    missing_diag = np.flatnonzero(np.isnan(np.diag(correlation)))
    if missing_diag.size:
        warnings.warn(f'{missing_diag.size} diagonal correlation entries missing, using 1')
        correlation[missing_diag, missing_diag] = 1.
    missing = np.isnan(correlation)
    if missing.any():
        warnings.warn(f'{int(missing.sum()) // 2} correlation pairs missing, using 0')
        correlation[missing] = 0.
    return AssetUniverse(mean_returns=stats[:, 0], std_devs=stats[:, 1], correlation=correlation)


def covariance(u: AssetUniverse, return_shift: bool = False
        ) -> Union[np.ndarray, Tuple[np.ndarray, float]]:
    """
    Return ``Q[i, j] = correlation[i, j] * std_devs[i] * std_devs[j]`` (symmetrized). If the
    smallest eigenvalue is in ``(-1e-8, 1e-10]``, the diagonal is shifted so that it becomes
    ``2e-10``.

    Parameters
    ----------
    u : :class:`AssetUniverse`
        The universe.
    return_shift : bool, optional
        If ``True``, also return the applied shift (``0.`` if none). The default is ``False``.

    Raises
    ------
    NotPsd
        If the smallest eigenvalue is below ``-1e-8``.
    """
    Q = u.correlation * np.outer(u.std_devs, u.std_devs)
    Q = 0.5 * (Q + Q.T)
    try:
        Q, shift = shift_to_positive_definite(Q, min_eig=SHIFT_EIGENVALUE, tol=CORRELATION_TOL)
    except ValueError as e:
        raise NotPsd(str(e)) from e
    if shift:
        warnings.warn(f'covariance shifted by {shift:.3e} to be positive-definite')
    return (Q, shift) if return_shift else Q


def parse_uef(source: Union[str, Iterable[str]], swap_columns: bool = False) -> UefCurve:
    """
    Parse a frontier file of ``mean_return variance`` lines (``variance mean_return`` if
    ``swap_columns``). Points are sorted by return; duplicate returns keep the lowest variance,
    with a warning.

    Raises
    ------
    MalformedLine, EmptyCurve
    """
    points = []
    for lineno, fields in _lines(source):
        r, v = _floats(fields, 2, lineno)
        points.append((v, r) if swap_columns else (r, v))
    if not points:
        raise EmptyCurve('frontier file has no points')
    points.sort()
    returns, variances = [], []
    for r, v in points:
        if returns and r == returns[-1]:
            continue  # sorted: the first one has the lowest variance
        returns.append(r)
        variances.append(v)
    if len(returns) < len(points):
        warnings.warn(f'{len(points) - len(returns)} duplicate frontier returns collapsed')
    return UefCurve(returns=returns, variances=variances)


@dataclass(frozen=True, eq=False)
class PortDataset:
    """A universe with its covariance (after the shift policy) and optional frontier."""
    name: str
    universe: AssetUniverse
    Q: np.ndarray
    shift: float
    uef: Optional[UefCurve] = None

    @classmethod
    def from_universe(cls, name: str, universe: AssetUniverse,
                      uef: Optional[UefCurve] = None) -> PortDataset:
        Q, shift = covariance(universe, return_shift=True)
        return cls(name=name, universe=universe, Q=Q, shift=shift, uef=uef)


def load_dataset(path: str, uef_path: Optional[str] = None, swap_columns: bool = False
        ) -> PortDataset:
    """
    Read a port file and (optionally) its frontier file.

    Raises
    ------
    OSError
        If a file cannot be read.
    """
    with open(path, 'r', encoding='ascii') as f:
        universe = parse_port(f)
    uef = None
    if uef_path is not None:
        with open(uef_path, 'r', encoding='ascii') as f:
            uef = parse_uef(f, swap_columns=swap_columns)
    name = os.path.splitext(os.path.basename(path))[0]
    return PortDataset.from_universe(name, universe, uef=uef)
