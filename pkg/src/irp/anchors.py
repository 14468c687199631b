"""Parallel anchors, farthest-point pruning, subspaces and anchor completion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidShape, MissingSpace, ShapeMismatch
from .relative import DEFAULT_CUTOFF, condition_number, pseudo_inverse
from .spaces import SpaceStats, as_embeddings, center_normalize, compute_stats

MASK64 = (1 << 64) - 1
# splitmix64 increment (golden ratio * 2**64)
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def split_seed(master_seed: int, index: int) -> int:
    """Derive the seed of subspace ``index`` from ``master_seed``.

    Pure integer arithmetic on 64 bits, so the derivation is identical on
    every platform.
    """
    return splitmix64((splitmix64(int(master_seed) & MASK64) + int(index)) & MASK64)


@dataclass(frozen=True)
class ParallelAnchors:
    """Raw anchor matrices of several spaces, row-aligned.

    Row ``i`` of every space encodes the same underlying sample. Spaces may
    have different dimensions.
    """

    spaces: dict
    stats: dict = field(init=False, repr=False)
    unit: dict = field(init=False, repr=False)

    def __post_init__(self):
        spaces = {key: as_embeddings(value, f"anchors[{key!r}]") for key, value in self.spaces.items()}
        if not spaces:
            raise InvalidShape("ParallelAnchors needs at least one space")
        counts = {M.shape[0] for M in spaces.values()}
        if len(counts) != 1:
            raise ShapeMismatch(f"anchor counts differ across spaces: {sorted(counts)}")
        stats = {key: compute_stats(M) for key, M in spaces.items()}
        unit = {key: center_normalize(M, stats[key]) for key, M in spaces.items()}
        for M in (*spaces.values(), *unit.values()):
            M.setflags(write=False)
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "stats", stats)
        object.__setattr__(self, "unit", unit)

    @property
    def k(self) -> int:
        return next(iter(self.spaces.values())).shape[0]

    def __contains__(self, space_id) -> bool:
        return space_id in self.spaces

    def require(self, space_id):
        if space_id not in self.spaces:
            raise MissingSpace(f"no anchors for space {space_id!r}; have {sorted(map(str, self.spaces))}")

    def dim(self, space_id) -> int:
        self.require(space_id)
        return self.spaces[space_id].shape[1]


@dataclass(frozen=True)
class PrunedSubspace:
    indices: tuple
    delta: float
    seed: int
    condition: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)


def dcos(A_unit) -> np.ndarray:
    """Pairwise ``1 - |cos|`` distance between unit rows, clamped to [0, 1]."""
    A_unit = np.asarray(A_unit, dtype=np.float64)
    D = 1.0 - np.abs(A_unit @ A_unit.T)
    np.clip(D, 0.0, 1.0, out=D)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def fps_prune(A_unit, delta, seed, distances=None, start=None) -> PrunedSubspace:
    """Greedy farthest point sampling under :func:`dcos`.

    Starts from a seeded uniform-random anchor, adds the globally farthest
    anchor unconditionally, then keeps adding the candidate with the largest
    minimum distance to the selection until that distance drops to
    ``delta`` or below. Ties go to the lowest index. ``start`` overrides
    the seeded start index.
    """
    if not 0 <= delta < 1:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    D = dcos(A_unit) if distances is None else distances
    k = D.shape[0]
    if k < 2:
        raise InvalidShape(f"need at least 2 anchors to prune, got {k}")
    if start is None:
        start = int(np.random.default_rng(seed).integers(k))
    elif not 0 <= start < k:
        raise IndexError(f"start index {start} out of range for {k} anchors")
    second = int(np.argmax(D[start]))
    if second == start:
        # every other anchor is (anti)parallel to the start and D[start] is all zero
        second = 1 if start == 0 else 0
    selected = [start, second]
    min_dist = np.minimum(D[start], D[second])
    min_dist[selected] = -1.0
    while len(selected) < k:
        best = int(np.argmax(min_dist))
        if min_dist[best] <= delta:
            break
        selected.append(best)
        np.minimum(min_dist, D[best], out=min_dist)
        min_dist[best] = -1.0
    return PrunedSubspace(indices=tuple(selected), delta=float(delta), seed=int(seed))


def make_subspaces(A_unit, omega, delta, master_seed) -> list:
    """``omega`` independent FPS runs seeded by :func:`split_seed`."""
    if omega < 1:
        raise ValueError(f"omega must be >= 1, got {omega}")
    D = dcos(A_unit)
    return [fps_prune(A_unit, delta, split_seed(master_seed, i), distances=D) for i in range(omega)]


def with_conditions(subspace: PrunedSubspace, unit_anchors: dict, cutoff_ratio=DEFAULT_CUTOFF):
    """Return a copy of ``subspace`` with per-space condition numbers cached."""
    idx = list(subspace.indices)
    condition = {key: condition_number(A[idx], cutoff_ratio) for key, A in unit_anchors.items()}
    return PrunedSubspace(subspace.indices, subspace.delta, subspace.seed, condition)


def anchor_completion(S_x_unit, S_y_unit, cutoff_ratio=DEFAULT_CUTOFF) -> np.ndarray:
    """Completed ``d_y x d_x`` transform from one pair of parallel anchor subsets.

    The source canonical basis is relative-encoded with ``S_x`` and decoded
    with ``S_y``; the decoded points become the new target anchors, paired
    with the canonical basis as new source anchors. A unit source row ``x``
    is translated as ``x @ T.T``.
    """
    S_x = np.asarray(S_x_unit, dtype=np.float64)
    S_y = np.asarray(S_y_unit, dtype=np.float64)
    if S_x.shape[0] != S_y.shape[0]:
        raise ShapeMismatch(f"anchor subsets differ in size: {S_x.shape[0]} vs {S_y.shape[0]}")
    identity_rel = np.eye(S_x.shape[1]) @ S_x.T
    new_targets = identity_rel @ pseudo_inverse(S_y.T, cutoff_ratio)
    return pseudo_inverse(new_targets.T, cutoff_ratio).T
