"""End-to-end inverse relative projection and parameter sweeps."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .anchors import ParallelAnchors, anchor_completion, make_subspaces, with_conditions
from .errors import ShapeMismatch
from .metrics import accuracy as accuracy_score
from .metrics import mean_cosine, safe_pearson
from .relative import DEFAULT_CUTOFF, relative_decode, relative_encode
from .spaces import as_embeddings, center_normalize, denormalize, normalize_rows

DEFAULT_OMEGA = 8
DEFAULT_DELTA = 0.65


class PruneOn(str, enum.Enum):
    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class TranslationConfig:
    omega: int = DEFAULT_OMEGA
    delta: float = DEFAULT_DELTA
    master_seed: int = 0
    use_completion: bool = False
    cutoff_ratio: float = DEFAULT_CUTOFF
    prune_on: PruneOn = PruneOn.SOURCE

    def __post_init__(self):
        object.__setattr__(self, "prune_on", PruneOn(self.prune_on))
        if int(self.omega) != self.omega or self.omega < 1:
            raise ValueError(f"omega must be a positive integer, got {self.omega}")
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 < self.cutoff_ratio < 1:
            raise ValueError(f"cutoff_ratio must lie in (0, 1), got {self.cutoff_ratio}")


@dataclass
class TranslationReport:
    per_subspace_condition: list
    anchors_after_pruning: list
    output_scale: float
    anchor_residual: float
    reconstruction_similarity: float | None = None
    elapsed: float = 0.0
    subspaces: list = field(default_factory=list, repr=False)

    @property
    def mean_condition(self) -> float:
        return float(np.mean(self.per_subspace_condition))

    @property
    def mean_anchors(self) -> float:
        return float(np.mean(self.anchors_after_pruning))


def anchor_residual(S_x_unit, S_y_unit) -> float:
    """Relative Frobenius gap between the anchor-to-anchor cosine matrices.

    Zero when the two spaces differ by an exact similarity transform; this is
    how far the translation premise is from holding on the given anchors.
    """
    Gx = S_x_unit @ S_x_unit.T
    Gy = S_y_unit @ S_y_unit.T
    return float(np.linalg.norm(Gx - Gy) / np.linalg.norm(Gy))


def reconstruction_similarity(output, reference, target_stats) -> float:
    """Mean cosine between outputs and references, both centered on the target anchors."""
    reference = as_embeddings(reference, "reference")
    if reference.shape != output.shape:
        raise ShapeMismatch(f"reference shape {reference.shape} != output shape {output.shape}")
    return mean_cosine(output - target_stats.center, reference - target_stats.center).mean


def translate(X_raw, anchors: ParallelAnchors, source_id, target_id, config=None, reference=None):
    """Translate raw source-space rows into the target space.

    Returns ``(Y, report)``. The output rows all sit at the target anchors'
    mean norm around the target anchors' center.
    """
    config = TranslationConfig() if config is None else config
    started = time.perf_counter()
    anchors.require(source_id)
    anchors.require(target_id)
    X = as_embeddings(X_raw, "source embeddings")
    src_stats = anchors.stats[source_id]
    tgt_stats = anchors.stats[target_id]
    if X.shape[1] != src_stats.dim:
        raise ShapeMismatch(
            f"source rows have {X.shape[1]} columns, space {source_id!r} has {src_stats.dim}"
        )

    X_unit = center_normalize(X, src_stats)
    A_x = anchors.unit[source_id]
    A_y = anchors.unit[target_id]
    prune_basis = A_x if config.prune_on is PruneOn.SOURCE else A_y
    subspaces = make_subspaces(prune_basis, config.omega, config.delta, config.master_seed)
    subspaces = [
        with_conditions(s, {"source": A_x, "target": A_y}, config.cutoff_ratio) for s in subspaces
    ]

    total = np.zeros((X.shape[0], tgt_stats.dim))
    # fixed summation order keeps the ensemble bit-reproducible
    for sub in subspaces:
        idx = list(sub.indices)
        S_x, S_y = A_x[idx], A_y[idx]
        if config.use_completion:
            T = anchor_completion(S_x, S_y, config.cutoff_ratio)
            total += normalize_rows(X_unit @ T.T)
        else:
            total += relative_decode(relative_encode(X_unit, S_x), S_y, config.cutoff_ratio)
    Y_unit = normalize_rows(total / len(subspaces))
    Y = denormalize(Y_unit, tgt_stats)

    report = TranslationReport(
        per_subspace_condition=[s.condition["target"] for s in subspaces],
        anchors_after_pruning=[len(s) for s in subspaces],
        output_scale=tgt_stats.mean_norm,
        anchor_residual=anchor_residual(A_x, A_y),
        subspaces=subspaces,
    )
    if reference is not None:
        report.reconstruction_similarity = reconstruction_similarity(Y, reference, tgt_stats)
    report.elapsed = time.perf_counter() - started
    return Y, report


@dataclass
class SweepRow:
    omega: int
    delta: float
    seed: int
    report: TranslationReport
    accuracy: float | None = None


@dataclass
class SweepResult:
    rows: list
    correlations: dict

    def __len__(self):
        return len(self.rows)


def sweep(
    X_raw,
    anchors,
    source_id,
    target_id,
    omegas,
    deltas,
    reference=None,
    seeds=(0,),
    classifier=None,
    labels=None,
    use_completion=False,
    cutoff_ratio=DEFAULT_CUTOFF,
    prune_on=PruneOn.SOURCE,
) -> SweepResult:
    """Run :func:`translate` on every ``(omega, delta, seed)`` cell.

    ``classifier`` is any callable mapping target-space rows to labels; with
    ``labels`` it adds a downstream accuracy column. Correlations are
    ``None`` when undefined (constant or infinite columns).
    """
    if not omegas or not deltas or not seeds:
        raise ValueError("omegas, deltas and seeds must all be non-empty")
    rows = []
    for omega in omegas:
        for delta in deltas:
            for seed in seeds:
                config = TranslationConfig(
                    omega=omega,
                    delta=delta,
                    master_seed=seed,
                    use_completion=use_completion,
                    cutoff_ratio=cutoff_ratio,
                    prune_on=prune_on,
                )
                Y, report = translate(X_raw, anchors, source_id, target_id, config, reference)
                acc = None
                if classifier is not None and labels is not None:
                    acc = accuracy_score(classifier(Y), labels)
                rows.append(SweepRow(omega, delta, seed, report, acc))

    correlations = {
        "condition_vs_anchors": safe_pearson(
            [r.report.mean_condition for r in rows], [r.report.mean_anchors for r in rows]
        )
    }
    if reference is not None and rows[0].accuracy is not None:
        correlations["similarity_vs_accuracy"] = safe_pearson(
            [r.report.reconstruction_similarity for r in rows], [r.accuracy for r in rows]
        )
    return SweepResult(rows, correlations)
