import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irp.experiments import MODES, log_alphas, scale_benchmark, split_indices, stitch
from irp.synth import generate_family, materialize
from irp.translator import TranslationConfig


class TestSplit:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(5, 200), st.floats(0.05, 0.9), st.integers(0, 1000))
    def test_anchors_never_in_test(self, n, fraction, seed):
        anchors = np.arange(0, n, 3)
        train, test = split_indices(n, anchors, fraction, seed)
        assert not np.intersect1d(test, anchors).size
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(n))

    def test_seeded(self):
        a = split_indices(100, [0, 1], 0.3, seed=4)
        b = split_indices(100, [0, 1], 0.3, seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_log_alphas():
    alphas = log_alphas(5.0, decades=1, points=17)
    assert alphas.size == 17
    assert alphas[0] == pytest.approx(0.5) and alphas[8] == pytest.approx(5.0) and alphas[-1] == pytest.approx(50.0)
    np.testing.assert_allclose(alphas[1:] / alphas[:-1], 10 ** (1 / 8))


def test_scale_benchmark_shares_means_across_seeds():
    X0, y0 = scale_benchmark(4000, d=8, num_classes=4, noise=0.1, seed=0)
    X1, y1 = scale_benchmark(4000, d=8, num_classes=4, noise=0.1, seed=1)
    for c in range(4):
        np.testing.assert_allclose(X0[y0 == c].mean(axis=0), X1[y1 == c].mean(axis=0), atol=0.02)


@pytest.fixture(scope="module")
def result():
    family = generate_family(300, 8, [8, 12, 8], sigma=0.05, num_classes=3, k_anchors=60, seed=1)
    spaces = [materialize(family, i)[0] for i in range(3)]
    return stitch(spaces, family.labels, family.anchor_indices, TranslationConfig(delta=0.3), epochs=50)


class TestStitch:
    def test_table_shape(self, result):
        for mode in MODES:
            assert sum(r.mode == mode for r in result.rows) == 9

    def test_absolute_needs_matching_dims(self, result):
        for r in result.rows:
            if r.mode == "absolute":
                assert (r.accuracy is None) == (r.encoder_dim != r.head_dim)

    def test_non_stitch_rows_repeat_head_accuracy(self, result):
        rows = [r for r in result.rows if r.mode == "non-stitch"]
        for r in rows:
            own = next(o for o in rows if o.encoder == o.head == r.head)
            assert r.accuracy == own.accuracy

    def test_zero_shot_diagonal_is_near_native(self, result):
        for r in result.rows:
            if r.mode == "zero-shot" and r.encoder == r.head:
                assert r.similarity >= 0.999
