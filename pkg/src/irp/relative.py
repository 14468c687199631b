"""Relative encoding, its pseudo-inverse decoding, and conditioning."""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch, SvdFailure
from .spaces import normalize_rows

DEFAULT_CUTOFF = 1e-10


def relative_encode(X_unit, A_unit) -> np.ndarray:
    """Cosine similarity of every sample to every anchor, shape ``(n, k)``.

    Both inputs must already be unit-normalized (see
    :func:`irp.spaces.center_normalize`).
    """
    X_unit = np.asarray(X_unit, dtype=np.float64)
    A_unit = np.asarray(A_unit, dtype=np.float64)
    if X_unit.ndim != 2 or A_unit.ndim != 2 or X_unit.shape[1] != A_unit.shape[1]:
        raise ShapeMismatch(
            f"cannot encode {X_unit.shape} samples against {A_unit.shape} anchors"
        )
    return X_unit @ A_unit.T


def _svd(M):
    try:
        return np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"SVD did not converge on a {M.shape} matrix") from exc


def pseudo_inverse(M, cutoff_ratio=DEFAULT_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``cutoff_ratio * sigma_max`` are treated as zero.
    """
    M = np.asarray(M, dtype=np.float64)
    if not 0 < cutoff_ratio < 1:
        raise ValueError(f"cutoff_ratio must lie in (0, 1), got {cutoff_ratio}")
    if not np.all(np.isfinite(M)):
        raise SvdFailure("matrix has non-finite entries")
    U, s, Vt = _svd(M)
    if s.size == 0 or s[0] == 0:
        return np.zeros(M.shape[::-1])
    keep = s >= cutoff_ratio * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def relative_decode(R, A_unit, cutoff_ratio=DEFAULT_CUTOFF) -> np.ndarray:
    """Map relative rows back to the absolute space spanned by ``A_unit``.

    The raw decode ``R @ pinv(A_unit.T)`` only carries a meaningful direction,
    so every row is re-normalized to unit length.
    """
    R = np.asarray(R, dtype=np.float64)
    A_unit = np.asarray(A_unit, dtype=np.float64)
    if R.ndim != 2 or R.shape[1] != A_unit.shape[0]:
        raise ShapeMismatch(
            f"relative rows have {R.shape[-1]} columns but there are {A_unit.shape[0]} anchors"
        )
    return normalize_rows(R @ pseudo_inverse(A_unit.T, cutoff_ratio))


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"SVD did not converge on a {M.shape} matrix") from exc


def condition_number(A_unit, cutoff_ratio=DEFAULT_CUTOFF) -> float:
    """``sigma_max / sigma_min`` of the anchor matrix; ``inf`` when rank-deficient."""
    A_unit = np.asarray(A_unit, dtype=np.float64)
    if A_unit.ndim != 2 or A_unit.shape[0] < 2:
        raise ShapeMismatch(f"need at least 2 anchor rows, got shape {A_unit.shape}")
    s = singular_values(A_unit)
    if s[0] == 0 or s[-1] < cutoff_ratio * s[0]:
        return float("inf")
    return float(s[0] / s[-1])
