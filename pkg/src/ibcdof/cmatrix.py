"""Dense complex matrix helpers: stacking, block diagonals, SVD rank."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

DEFAULT_TOL_SCALE = 1e3


class NumericError(ArithmeticError):
    pass


def as_cmatrix(a) -> np.ndarray:
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def stack(*blocks) -> np.ndarray:
    """Vertical concatenation; all blocks must share the column count."""
    mats = [as_cmatrix(b) if np.size(b) else np.asarray(b, dtype=complex) for b in blocks]
    cols = {m.shape[1] for m in mats if m.ndim == 2}
    if len(cols) > 1:
        raise ValueError(f"column mismatch in stack: {sorted(cols)}")
    return np.vstack(mats)


def bdiag(blocks: Sequence) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=complex) for b in blocks])


def singular_values(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc


def numerical_rank(a, tol_scale: float = DEFAULT_TOL_SCALE) -> int:
    """Number of singular values above ``tol_scale * max(m, n) * eps * sigma_max``."""
    a = as_cmatrix(a)
    if a.size == 0:
        return 0
    s = singular_values(a)
    if s[0] == 0.0:
        return 0
    tol = tol_scale * max(a.shape) * np.finfo(float).eps * s[0]
    return int(np.count_nonzero(s > tol))


def rowspan_contained(a, b, tol_scale: float = DEFAULT_TOL_SCALE) -> bool:
    """True when every row of ``a`` lies in the row space of ``b``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] == 0 or not np.any(a):
        return True
    if b.shape[0] == 0:
        return False
    return numerical_rank(np.vstack([b, a]), tol_scale) == numerical_rank(b, tol_scale)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
