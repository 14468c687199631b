"""Reproduction harnesses: zero-shot stitching and rescale injection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .anchors import ParallelAnchors
from .classify import Activation, predict, rescale_inject, train_mlp, train_softmax
from .metrics import accuracy, safe_pearson
from .synth import random_orthogonal
from .translator import TranslationConfig, translate

MODES = ("zero-shot", "absolute", "non-stitch")


@dataclass
class StitchRow:
    mode: str
    encoder: int
    head: int
    encoder_dim: int
    head_dim: int
    accuracy: float | None
    similarity: float | None = None
    mean_condition: float | None = None
    mean_anchors: float | None = None


@dataclass
class StitchResult:
    rows: list
    heads: list
    test_indices: np.ndarray

    def cross_pairs(self, mode):
        """Rows of ``mode`` with encoder != head and a defined accuracy."""
        return [r for r in self.rows if r.mode == mode and r.encoder != r.head and r.accuracy is not None]

    def mean_accuracy(self, mode) -> float:
        if mode == "non-stitch":
            rows = [r for r in self.rows if r.mode == mode and r.encoder == r.head]
        else:
            rows = self.cross_pairs(mode)
        return float(np.mean([r.accuracy for r in rows])) if rows else float("nan")

    def mean_similarity(self) -> float:
        return float(np.mean([r.similarity for r in self.cross_pairs("zero-shot")]))


def split_indices(n, anchor_indices, test_fraction=0.25, seed=0):
    """Seeded train/test split; anchors are always kept out of the test set."""
    rng = np.random.default_rng(seed)
    candidates = np.setdiff1d(np.arange(n), anchor_indices)
    n_test = max(1, int(round(test_fraction * n)))
    n_test = min(n_test, candidates.size)
    test = np.sort(rng.choice(candidates, size=n_test, replace=False))
    train = np.setdiff1d(np.arange(n), test)
    return train, test


def train_heads(spaces, labels, train, epochs=300, seed=0):
    return [train_softmax(X[train], labels[train], epochs=epochs, seed=seed) for X in spaces]


def stitch(spaces, labels, anchor_indices, config=None, heads=None, test_fraction=0.25, seed=0, epochs=300):
    """Evaluate every ``(encoder, head)`` pair in the three stitching modes.

    * ``zero-shot``: encoder test rows translated into the head's space.
    * ``absolute``: encoder test rows fed to the head untouched; accuracy is
      ``None`` when the dimensions differ.
    * ``non-stitch``: the head on its own space's test rows.
    """
    config = TranslationConfig() if config is None else config
    labels = np.asarray(labels)
    anchor_indices = np.asarray(anchor_indices)
    train, test = split_indices(len(labels), anchor_indices, test_fraction, seed)
    if heads is None:
        heads = train_heads(spaces, labels, train, epochs, seed)
    anchors = ParallelAnchors({i: X[anchor_indices] for i, X in enumerate(spaces)})
    y_test = labels[test]
    own = [accuracy(predict(h, X[test]), y_test) for h, X in zip(heads, spaces)]

    rows = []
    for i, X in enumerate(spaces):
        for j, head in enumerate(heads):
            Y, report = translate(X[test], anchors, i, j, config, reference=spaces[j][test])
            rows.append(
                StitchRow(
                    "zero-shot", i, j, X.shape[1], spaces[j].shape[1],
                    accuracy(predict(head, Y), y_test),
                    report.reconstruction_similarity,
                    report.mean_condition,
                    report.mean_anchors,
                )
            )
    for i, X in enumerate(spaces):
        for j, head in enumerate(heads):
            compatible = X.shape[1] == spaces[j].shape[1]
            acc = accuracy(predict(head, X[test]), y_test) if compatible else None
            rows.append(StitchRow("absolute", i, j, X.shape[1], spaces[j].shape[1], acc))
    for i, X in enumerate(spaces):
        for j in range(len(heads)):
            rows.append(StitchRow("non-stitch", i, j, X.shape[1], spaces[j].shape[1], own[j]))
    return StitchResult(rows, heads, test)


@dataclass
class StitchSweepCell:
    omega: int
    delta: float
    seed: int
    similarity: float
    accuracy: float
    mean_condition: float
    mean_anchors: float


def stitch_sweep(spaces, labels, anchor_indices, omegas, deltas, seeds=(0,), test_fraction=0.25, epochs=300):
    """Zero-shot stitching over an ``omega x delta x seed`` grid.

    Heads are trained once per seed. Returns ``(cells, correlations)``.
    """
    cells = []
    for seed in seeds:
        heads = None
        for omega in omegas:
            for delta in deltas:
                config = TranslationConfig(omega=omega, delta=delta, master_seed=seed)
                result = stitch(spaces, labels, anchor_indices, config, heads, test_fraction, seed, epochs)
                heads = result.heads
                pairs = result.cross_pairs("zero-shot")
                cells.append(
                    StitchSweepCell(
                        omega, delta, seed,
                        result.mean_similarity(),
                        result.mean_accuracy("zero-shot"),
                        float(np.mean([r.mean_condition for r in pairs])),
                        float(np.mean([r.mean_anchors for r in pairs])),
                    )
                )
    correlations = {
        "similarity_vs_accuracy": safe_pearson([c.similarity for c in cells], [c.accuracy for c in cells]),
        "condition_vs_anchors": safe_pearson([c.mean_condition for c in cells], [c.mean_anchors for c in cells]),
    }
    return cells, correlations


# -- rescale injection ---------------------------------------------------------

def scale_benchmark(n, d=32, num_classes=10, radius=4.0, noise=0.5, seed=0, means_seed=100):
    """Class blobs whose means come in +/- pairs, so the data are centered.

    The class means depend only on ``means_seed``; ``seed`` draws the
    sample, so train and test sets share one geometry.
    """
    half = (num_classes + 1) // 2
    basis = random_orthogonal(half, d, seed=means_seed).T
    means = np.concatenate([basis, -basis])[:num_classes] * radius
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % num_classes
    rng.shuffle(labels)
    return means[labels] + rng.normal(0.0, noise, size=(n, d)), labels


def log_alphas(center, decades=1.0, points=17):
    """``points`` log-spaced factors from ``center / 10**decades`` to ``center * 10**decades``."""
    return center * np.logspace(-decades, decades, points)


@dataclass
class RescaleRow:
    activation: str
    alpha: float
    relative_alpha: float
    accuracy: float


def rescale_sweep(
    X_train,
    y_train,
    X_test,
    y_test,
    activations=tuple(Activation),
    alphas=None,
    epochs=300,
    learning_rate=0.05,
    seed=0,
):
    """Train one MLP per activation and score it under rescale injection.

    ``alphas`` defaults to 17 log-spaced points spanning a decade either
    side of the training mean norm. Returns ``(rows, mean_scale)``.
    """
    mean_scale = float(np.linalg.norm(X_train, axis=1).mean())
    alphas = log_alphas(mean_scale) if alphas is None else np.asarray(alphas, dtype=np.float64)
    rows = []
    for act in activations:
        act = Activation(act)
        model = train_mlp(X_train, y_train, act, epochs=epochs, learning_rate=learning_rate, seed=seed)
        for alpha in alphas:
            acc = accuracy(model.predict(rescale_inject(X_test, alpha))[0], y_test)
            rows.append(RescaleRow(act.value, float(alpha), float(alpha / mean_scale), acc))
    return rows, mean_scale
