"""Embedding containers and anchor-statistics normalization.

Every latent space is centered on the mean of its anchors and scaled to
unit rows before relative encoding; decoding reverses this with the
*target* anchors' center and mean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpace, InvalidShape, ShapeMismatch, ZeroNormRow

EPS = 1e-12


def as_embeddings(M, name="embeddings") -> np.ndarray:
    """Validate ``M`` as an ``n x d`` float64 embedding matrix (n >= 1, d >= 2)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise InvalidShape(f"{name}: expected a 2-d matrix, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 2:
        raise InvalidShape(f"{name}: need n >= 1 rows and d >= 2 columns, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidShape(f"{name}: contains non-finite entries")
    return M


@dataclass(frozen=True)
class SpaceStats:
    """Anchor-derived center and mean (centered) norm of one latent space."""

    center: np.ndarray
    mean_norm: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(-1)
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "mean_norm", float(self.mean_norm))
        if not np.all(np.isfinite(center)):
            raise DegenerateSpace("center has non-finite entries")
        if not self.mean_norm > 0:
            raise DegenerateSpace(f"mean_norm must be positive, got {self.mean_norm}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]


def compute_stats(raw_anchors) -> SpaceStats:
    A = as_embeddings(raw_anchors, "anchors")
    if A.shape[0] < 2:
        raise InvalidShape(f"need at least 2 anchors, got {A.shape[0]}")
    center = A.mean(axis=0)
    mean_norm = float(np.linalg.norm(A - center, axis=1).mean())
    if mean_norm <= EPS:
        raise DegenerateSpace("all anchors coincide; mean centered norm is zero")
    return SpaceStats(center, mean_norm)


def _check_dim(M, stats):
    if M.shape[1] != stats.dim:
        raise ShapeMismatch(f"matrix has {M.shape[1]} columns, stats expect {stats.dim}")


def normalize_rows(M) -> np.ndarray:
    """Scale each row to unit L2 norm; raises :class:`ZeroNormRow` on empty rows."""
    M = np.asarray(M, dtype=np.float64)
    norms = np.linalg.norm(M, axis=1)
    bad = np.flatnonzero(norms <= EPS)
    if bad.size:
        raise ZeroNormRow(bad[0])
    return M / norms[:, None]


def center_normalize(M, stats: SpaceStats) -> np.ndarray:
    M = as_embeddings(M)
    _check_dim(M, stats)
    return normalize_rows(M - stats.center)


def denormalize(M_unit, stats: SpaceStats) -> np.ndarray:
    M_unit = as_embeddings(M_unit)
    _check_dim(M_unit, stats)
    return M_unit * stats.mean_norm + stats.center


@dataclass(frozen=True)
class NormSummary:
    norms: np.ndarray
    min: float
    max: float
    mean: float
    std: float
    counts: np.ndarray
    edges: np.ndarray

    @property
    def relative_spread(self) -> float:
        return self.std / self.mean if self.mean > 0 else float("inf")

    def is_unimodal(self, slack=2.0) -> bool:
        """True if the histogram rises to one peak and then falls.

        Bumps smaller than ``slack`` Poisson standard deviations of the bin
        they break away from are ignored as sampling noise.
        """
        counts = self.counts.astype(np.float64)
        peak = int(np.argmax(counts))

        def monotone(seq):
            low = seq[0]
            for c in seq[1:]:
                if c > low + slack * np.sqrt(max(low, 1.0)):
                    return False
                low = min(low, c)
            return True

        return monotone(counts[peak:]) and monotone(counts[: peak + 1][::-1])


def row_norms(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    return np.linalg.norm(M, axis=1)


def norm_summary(M, bins=30) -> NormSummary:
    """Row norms plus summary statistics and a ``bins``-bin histogram."""
    norms = row_norms(M)
    counts, edges = np.histogram(norms, bins=bins)
    return NormSummary(
        norms=norms,
        min=float(norms.min()),
        max=float(norms.max()),
        mean=float(norms.mean()),
        std=float(norms.std()),
        counts=counts,
        edges=edges,
    )
