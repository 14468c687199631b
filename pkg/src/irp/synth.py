"""Synthetic latent-space families related by known similarity transforms.

Every space of a family is a noisy copy of one ground-truth matrix ``Z``
pushed through an isometric embedding, a global scale and a translation::

    X_i = (Z + eps_i) @ Q_i * s_i + t_i

so relative encodings over parallel anchors agree exactly when the noise is
zero. This is the oracle the translator is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidShape


def random_orthogonal(d_in, d_out=None, seed=0) -> np.ndarray:
    """Random ``d_out x d_in`` matrix with orthonormal columns.

    QR of a Gaussian matrix with the signs of ``R``'s diagonal forced
    positive, which makes the result Haar-distributed and a deterministic
    function of ``seed``.
    """
    d_out = d_in if d_out is None else d_out
    if d_in < 1 or d_out < d_in:
        raise InvalidShape(f"need 1 <= d_in <= d_out, got d_in={d_in}, d_out={d_out}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d_out, d_in))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


@dataclass(frozen=True)
class SyntheticFamily:
    ground_truth: np.ndarray
    maps: tuple          # Q_i, shape (d0, d_i), orthonormal rows
    scales: tuple
    translations: tuple
    noise_sigma: float
    noise_seeds: tuple
    anchor_indices: np.ndarray
    labels: np.ndarray | None = None
    ambient_sigma: float = 0.0

    @property
    def n(self) -> int:
        return self.ground_truth.shape[0]

    @property
    def dims(self) -> tuple:
        return tuple(Q.shape[1] for Q in self.maps)

    def __len__(self):
        return len(self.maps)


def _class_means(num_classes, d0, separation, rng):
    # pairwise distance between class means is exactly `separation`
    if num_classes <= d0:
        basis = random_orthogonal(num_classes, d0, seed=rng.integers(2**63)).T
    else:
        basis = rng.standard_normal((num_classes, d0))
        basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    return basis * (separation / np.sqrt(2.0))


def generate_family(
    n,
    d0,
    space_dims,
    sigma=0.0,
    num_classes=1,
    k_anchors=None,
    seed=0,
    scales=None,
    translation_scale=1.0,
    ambient_sigma=0.0,
    blob_separation=6.0,
) -> SyntheticFamily:
    """Draw a seeded family of ``len(space_dims)`` related spaces.

    With ``num_classes > 1`` the ground truth is a mixture of unit-variance
    Gaussian blobs whose means sit ``blob_separation`` apart; otherwise it
    is isotropic standard normal. ``ambient_sigma`` adds independent
    full-dimensional noise after the embedding so wider spaces are not
    rank-deficient (0 by default).
    """
    space_dims = tuple(int(d) for d in space_dims)
    k_anchors = n if k_anchors is None else int(k_anchors)
    if n < 1 or d0 < 2:
        raise InvalidShape(f"need n >= 1 and d0 >= 2, got n={n}, d0={d0}")
    if not space_dims:
        raise InvalidShape("need at least one space")
    if any(d < d0 for d in space_dims):
        raise InvalidShape(f"every space dimension must be >= d0={d0}, got {space_dims}")
    if not 2 <= k_anchors <= n:
        raise InvalidShape(f"need 2 <= k_anchors <= n, got {k_anchors}")
    if sigma < 0 or ambient_sigma < 0:
        raise InvalidShape("noise levels must be non-negative")
    if num_classes < 1:
        raise InvalidShape("num_classes must be >= 1")

    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, d0))
    labels = None
    if num_classes > 1:
        labels = np.arange(n) % num_classes
        rng.shuffle(labels)
        Z += _class_means(num_classes, d0, blob_separation, rng)[labels]

    maps, trans, noise_seeds = [], [], []
    if scales is None:
        scales = rng.uniform(0.5, 4.0, size=len(space_dims))
    elif len(scales) != len(space_dims):
        raise InvalidShape("need one scale per space")
    for d in space_dims:
        maps.append(random_orthogonal(d0, d, seed=rng.integers(2**63)).T)
        trans.append(rng.standard_normal(d) * translation_scale)
        noise_seeds.append(int(rng.integers(2**63)))
    anchor_indices = np.sort(rng.choice(n, size=k_anchors, replace=False))

    for arr in (Z, anchor_indices, *maps, *trans):
        arr.setflags(write=False)
    if labels is not None:
        labels.setflags(write=False)
    return SyntheticFamily(
        ground_truth=Z,
        maps=tuple(maps),
        scales=tuple(float(s) for s in scales),
        translations=tuple(trans),
        noise_sigma=float(sigma),
        noise_seeds=tuple(noise_seeds),
        anchor_indices=anchor_indices,
        labels=labels,
        ambient_sigma=float(ambient_sigma),
    )


def materialize(family: SyntheticFamily, space_index):
    """Return ``(X, anchors, labels)`` for one space of ``family``."""
    if not 0 <= space_index < len(family):
        raise IndexError(f"family has {len(family)} spaces, asked for {space_index}")
    Q = family.maps[space_index]
    rng = np.random.default_rng(family.noise_seeds[space_index])
    Z = family.ground_truth
    if family.noise_sigma > 0:
        Z = Z + rng.normal(0.0, family.noise_sigma, size=Z.shape)
    X = Z @ Q
    if family.ambient_sigma > 0:
        X = X + rng.normal(0.0, family.ambient_sigma, size=X.shape)
    X = X * family.scales[space_index] + family.translations[space_index]
    return X, X[family.anchor_indices], family.labels
