import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irp.anchors import (
    ParallelAnchors,
    anchor_completion,
    dcos,
    fps_prune,
    make_subspaces,
    split_seed,
    splitmix64,
)
from irp.errors import MissingSpace, ShapeMismatch
from irp.relative import condition_number
from irp.spaces import center_normalize, compute_stats
from irp.synth import random_orthogonal

from conftest import unit_rows

R2 = np.sqrt(2) / 2


def reference_fps(A, delta, start):
    """Literal greedy FPS over python lists, independent of the vectorized path."""
    k = len(A)

    def dist(i, j):
        return min(1.0, max(0.0, 1.0 - abs(sum(a * b for a, b in zip(A[i], A[j])))))

    far = max(range(k), key=lambda j: (dist(start, j), -j))
    chosen = [start, far]
    while len(chosen) < k:
        best, best_d = None, -1.0
        for c in range(k):
            if c in chosen:
                continue
            d = min(dist(c, s) for s in chosen)
            if d > best_d:
                best, best_d = c, d
        if best_d <= delta:
            break
        chosen.append(best)
    return chosen


class TestDcos:
    def test_parallel_and_antiparallel(self):
        D = dcos([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]])
        np.testing.assert_allclose(D, 0.0, atol=1e-15)

    def test_orthogonal(self):
        np.testing.assert_allclose(dcos(np.eye(3)), 1.0 - np.eye(3))

    def test_45_degrees(self):
        D = dcos([[1.0, 0.0], [R2, R2]])
        assert D[0, 1] == pytest.approx(1 - R2)
        assert D[0, 1] == pytest.approx(0.29289, abs=1e-5)

    def test_symmetric_bounded(self, rng):
        D = dcos(unit_rows(rng, 30, 5))
        np.testing.assert_array_equal(D, D.T)
        assert D.min() >= 0 and D.max() <= 1
        np.testing.assert_array_equal(np.diag(D), 0.0)


class TestFps:
    def test_hand_example(self):
        A = np.array([[1.0, 0.0], [0.0, 1.0], [R2, R2]])
        assert fps_prune(A, 0.5, seed=0, start=0).indices == (0, 1)

    def test_duplicate_removed_at_zero_delta(self, rng):
        A = unit_rows(rng, 10, 6)
        A = np.vstack([A, A[3]])
        for seed in range(5):
            idx = fps_prune(A, 0.0, seed).indices
            assert len(idx) == 10
            assert not {3, 10} <= set(idx)

    def test_floor_of_two(self):
        assert sorted(fps_prune(np.eye(2), 0.99, seed=1).indices) == [0, 1]

    def test_all_parallel_still_two(self):
        A = np.array([[1.0, 0.0]] * 4)
        assert len(fps_prune(A, 0.3, seed=2)) == 2

    def test_matches_reference(self, rng):
        A = unit_rows(rng, 60, 8)
        for delta in (0.0, 0.5, 0.7, 0.8):
            for start in (0, 17, 59):
                got = fps_prune(A, delta, seed=0, start=start).indices
                assert list(got) == reference_fps(A.tolist(), delta, start)

    def test_selected_pairs_exceed_delta(self, rng):
        A = unit_rows(rng, 120, 10)
        sub = fps_prune(A, 0.6, seed=4)
        D = dcos(A)[np.ix_(sub.indices, sub.indices)]
        # the second point is exempt from the stopping rule
        rest = [i for i in range(len(sub)) if i != 1]
        pairs = D[np.ix_(rest, rest)][~np.eye(len(rest), dtype=bool)]
        assert np.all(pairs > 0.6)
        assert len(set(sub.indices)) == len(sub)

    def test_deterministic(self, rng):
        A = unit_rows(rng, 50, 6)
        assert fps_prune(A, 0.6, 9) == fps_prune(A, 0.6, 9)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            fps_prune(np.eye(2), 1.0, 0)

    def test_pruning_lowers_condition(self):
        # 0.9 is the top of the usual delta grid; see the acceptance suite for 0.8 vs 0.3
        wins = 0
        for seed in range(50):
            A = np.random.default_rng(seed).standard_normal((256, 64))
            U = center_normalize(A, compute_stats(A))
            sub = fps_prune(U, 0.9, seed)
            wins += condition_number(U[list(sub.indices)]) <= condition_number(U)
        assert wins >= 45


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.95))
def test_fps_indices_valid(seed, delta):
    rng = np.random.default_rng(seed)
    A = unit_rows(rng, 25, 4)
    idx = fps_prune(A, delta, seed).indices
    assert 2 <= len(idx) == len(set(idx))
    assert all(0 <= i < 25 for i in idx)


class TestSubspaces:
    def test_omega_one(self, rng):
        A = unit_rows(rng, 40, 6)
        (only,) = make_subspaces(A, 1, 0.5, 11)
        assert only == fps_prune(A, 0.5, split_seed(11, 0))

    def test_deterministic(self, rng):
        A = unit_rows(rng, 40, 6)
        assert make_subspaces(A, 4, 0.5, 3) == make_subspaces(A, 4, 0.5, 3)

    def test_union_covers_each(self, rng):
        A = unit_rows(rng, 256, 32)
        subs = make_subspaces(A, 8, 0.8, 0)
        union = set().union(*(s.indices for s in subs))
        assert all(len(union) >= len(s) for s in subs)
        assert len({s.seed for s in subs}) == 8

    def test_split_seed_constant(self):
        # pinned so seeds stay stable across platforms and releases
        assert split_seed(0, 0) == split_seed(0, 0)
        assert split_seed(0, 0) != split_seed(0, 1)
        assert split_seed(123, 4) == splitmix64((splitmix64(123) + 4) & (2**64 - 1))

    def test_splitmix64_reference_vector(self):
        # first output of the reference splitmix64 generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF


class TestCompletion:
    def test_identity(self):
        np.testing.assert_allclose(anchor_completion(np.eye(4), np.eye(4)), np.eye(4), atol=1e-12)

    def test_orthogonal_oracle(self, rng):
        S_x = unit_rows(rng, 30, 12)
        Q = random_orthogonal(12, seed=5)
        T = anchor_completion(S_x, S_x @ Q)
        x = unit_rows(rng, 10, 12)
        np.testing.assert_allclose(x @ T.T, x @ Q, atol=1e-8)

    def test_shape_with_few_anchors(self, rng):
        T = anchor_completion(unit_rows(rng, 5, 12), unit_rows(rng, 5, 20))
        assert T.shape == (20, 12)

    def test_same_space_reproduces_anchors(self, rng):
        S = unit_rows(rng, 30, 8)
        out = S @ anchor_completion(S, S).T
        cos = np.sum(out * S, axis=1) / np.linalg.norm(out, axis=1)
        assert np.all(cos >= 1 - 1e-8)

    def test_size_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            anchor_completion(unit_rows(rng, 5, 3), unit_rows(rng, 4, 3))


class TestParallelAnchors:
    def test_mixed_dims(self, rng):
        pa = ParallelAnchors({"a": rng.standard_normal((20, 8)), "b": rng.standard_normal((20, 12))})
        assert pa.k == 20 and pa.dim("b") == 12
        np.testing.assert_allclose(np.linalg.norm(pa.unit["b"], axis=1), 1.0)

    def test_count_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            ParallelAnchors({"a": rng.standard_normal((20, 8)), "b": rng.standard_normal((19, 8))})

    def test_missing(self, rng):
        pa = ParallelAnchors({"a": rng.standard_normal((5, 3))})
        with pytest.raises(MissingSpace):
            pa.require("z")
