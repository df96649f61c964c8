"""
General utilities.
"""

from __future__ import annotations  # postponed evaluation, to make ArrayLike look good in docs
from typing import Optional, Tuple, Any
try:
    from numpy.typing import ArrayLike
except ImportError:
    ArrayLike = Any
import os
import socket
import datetime
import numpy as np
import tensorboardX
try:
    import hydra.utils
    HYDRA_AVAILABLE = True
except ImportError:
    HYDRA_AVAILABLE = False

__all__ = [
    'get_original_cwd', 'resolve_path', 'get_summary_writer', 'symmetry_violation',
    'min_eigenvalue', 'shift_to_positive_definite',
]


def get_original_cwd() -> str:
    """
    Return the original current working directory. This is a wrapper for
    :func:`hydra.utils.get_original_cwd()` that also works if not using hydra.
    """
    cwd = None
    if HYDRA_AVAILABLE:
        try:
            cwd = hydra.utils.get_original_cwd()
        except ValueError:  # raised if hydra is not initialized
            pass
    if cwd is None:
        cwd = os.getcwd()
    return cwd

def resolve_path(path: str) -> str:
    """Resolve a (possibly relative) path against :func:`get_original_cwd`."""
    return path if os.path.isabs(path) else os.path.join(get_original_cwd(), path)

def get_summary_writer(
        log_path: Optional[str], comment: str) -> Optional[tensorboardX.SummaryWriter]:
    """
    Return a tensorboard writer logging to a sub-folder of ``log_path`` named after the current
    time, the host name and ``comment``; or ``None`` if ``log_path is None``.
    """
    if log_path is None:
        return None
    return tensorboardX.SummaryWriter(
            logdir=os.path.join(log_path, '_'.join((
                    datetime.datetime.now().strftime('%Y-%m-%dT%H:%M:%S.%fZ'),
                    socket.gethostname(),
                    comment))))

def symmetry_violation(mat: ArrayLike) -> Tuple[float, Tuple[int, int]]:
    """
    Return the largest absolute asymmetry ``|mat[i, j] - mat[j, i]|`` relative to
    ``max(1, max|mat|)``, together with the offending index pair ``(i, j)`` with ``i < j``.
    """
    mat = np.asarray(mat, dtype=float)
    diff = np.abs(np.triu(mat - mat.T, k=1))
    if diff.size == 0:
        return 0., (0, 0)
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    scale = max(1., float(np.max(np.abs(mat))))
    return float(diff[i, j]) / scale, (int(i), int(j))

def min_eigenvalue(mat: ArrayLike) -> float:
    """Return the smallest eigenvalue of the symmetric part of ``mat``."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])

def shift_to_positive_definite(
        mat: ArrayLike, min_eig: float = 1e-10, tol: float = 1e-8) -> Tuple[np.ndarray, float]:
    """
    Symmetrize a matrix and shift its diagonal if the smallest eigenvalue is not larger than
    ``min_eig``.

    Parameters
    ----------
    mat : array-like
        Square matrix.
    min_eig : float, optional
        Eigenvalues up to this value are considered too small; the diagonal is
        shifted so that the smallest eigenvalue becomes ``2 * min_eig``. The default is ``1e-10``.
    tol : float, optional
        Matrices with an eigenvalue below ``-tol`` are not shifted, a :class:`ValueError` is
        raised instead. The default is ``1e-8``.

    Returns
    -------
    mat : ndarray
        The symmetrized (and possibly shifted) matrix.
    shift : float
        The amount added to the diagonal (``0.`` if no shift was needed).
    """
    mat = np.asarray(mat, dtype=float)
    mat = 0.5 * (mat + mat.T)
    eig = min_eigenvalue(mat)
    if eig < -tol:
        raise ValueError(f'matrix is not positive semi-definite, min eigenvalue {eig}')
    shift = 0.
    if eig <= min_eig:
        shift = 2. * min_eig - eig
        mat = mat + shift * np.eye(mat.shape[0])
    return mat, shift
