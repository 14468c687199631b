"""Evaluation metrics shared by reports, sweeps and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, ShapeMismatch, ZeroNormRow, ZeroVariance
from .spaces import EPS


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def of(cls, scores):
        scores = np.asarray(scores, dtype=np.float64)
        return cls(float(scores.mean()), float(scores.std()), float(scores.min()), float(scores.max()))


def row_cosines(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ShapeMismatch(f"cannot compare {A.shape} with {B.shape}")
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    bad = np.flatnonzero((na <= EPS) | (nb <= EPS))
    if bad.size:
        raise ZeroNormRow(bad[0])
    return np.einsum("ij,ij->i", A, B) / (na * nb)


def mean_cosine(A, B) -> MetricSummary:
    """Summary of the per-row cosine similarity between ``A`` and ``B``."""
    return MetricSummary.of(row_cosines(A, B))


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"length {x.size} vs {y.size}")
    if x.size < 2:
        raise ZeroVariance("need at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(xc @ xc)
    sy = np.sqrt(yc @ yc)
    if sx <= EPS * max(1.0, np.abs(x).max()) or sy <= EPS * max(1.0, np.abs(y).max()):
        raise ZeroVariance("pearson correlation is undefined for a constant vector")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted).ravel()
    truth = np.asarray(truth).ravel()
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"{predicted.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise LengthMismatch("no labels to score")
    return float(np.mean(predicted == truth))


def safe_pearson(x, y):
    """:func:`pearson`, or ``None`` when a column is constant or non-finite."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        return None
    try:
        return pearson(x, y)
    except ZeroVariance:
        return None
