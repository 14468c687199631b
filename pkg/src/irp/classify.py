"""Small numpy classifiers for stitching and scale-invariance experiments.

Both models are trained by plain full-batch gradient descent on the mean
cross-entropy, so a fixed seed gives bit-identical parameters.

Binary model layout (little-endian)::

    magic    4s   b"IRPH"
    version  u16  1
    kind     u16  0 = softmax head, 1 = MLP
    kind 0:  c u32, d u32, temperature f64, W f64[c*d], b f64[c]
    kind 1:  activation u16 (0 relu, 1 tanh, 2 cosine), d u32, h1 u32, h2 u32,
             W1 f64[h1*d], b1 f64[h1], W2 f64[h2*h1], b2 f64[h2],
             followed by an embedded kind-0 record (without magic/version)
"""

from __future__ import annotations

import enum
import io
import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import FileFormatError, InvalidLabels, ShapeMismatch
from .spaces import normalize_rows

MODEL_MAGIC = b"IRPH"
MODEL_VERSION = 1


class Activation(str, enum.Enum):
    RELU = "relu"
    TANH = "tanh"
    COSINE = "cosine"


_ACT_CODES = [Activation.RELU, Activation.TANH, Activation.COSINE]


def _act(kind, z):
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    if kind is Activation.TANH:
        return np.tanh(z)
    return np.cos(z)


def _act_grad(kind, z):
    if kind is Activation.RELU:
        return (z > 0).astype(np.float64)
    if kind is Activation.TANH:
        return 1.0 - np.tanh(z) ** 2
    return -np.sin(z)


def softmax(logits, temperature=1.0):
    z = np.asarray(logits, dtype=np.float64) / temperature
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check_labels(X, labels, num_classes=None):
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != X.shape[0]:
        raise InvalidLabels(f"need one label per row ({X.shape[0]}), got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise InvalidLabels("labels must be integers")
        labels = labels.astype(np.int64)
    if labels.size and labels.min() < 0:
        raise InvalidLabels("labels must be non-negative")
    c = int(labels.max()) + 1 if num_classes is None else int(num_classes)
    if labels.size and labels.max() >= c:
        raise InvalidLabels(f"label {labels.max()} out of range for {c} classes")
    if X.shape[0] < c:
        raise InvalidLabels(f"need at least as many rows as classes ({X.shape[0]} < {c})")
    return labels, c


def rescale_inject(X, alpha) -> np.ndarray:
    """Set every row of ``X`` to L2 norm ``alpha``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return normalize_rows(X) * alpha


@dataclass(frozen=True)
class SoftmaxHead:
    weights: np.ndarray
    bias: np.ndarray
    temperature: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeMismatch("bias must have one entry per weight row")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    def logits(self, X):
        return np.asarray(X, dtype=np.float64) @ self.weights.T + self.bias

    def __call__(self, X):
        return predict_softmax(self, X)[0]


def predict_softmax(head: SoftmaxHead, X, alpha=None):
    """Return ``(labels, probabilities)``.

    With ``alpha`` each row is first rescaled to norm ``alpha``. Labels come
    from the raw logits (lowest index on ties), so they cannot be disturbed
    by temperature or by softmax underflow.
    """
    X = np.asarray(X, dtype=np.float64)
    if alpha is not None:
        X = rescale_inject(X, alpha)
    logits = head.logits(X)
    return np.argmax(logits, axis=1), softmax(logits, head.temperature)


def _cross_entropy(logits, labels, temperature):
    n = logits.shape[0]
    P = softmax(logits, temperature)
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), labels], 1e-300)))
    P[np.arange(n), labels] -= 1.0
    return loss, P / (n * temperature)


def softmax_loss_and_grad(head: SoftmaxHead, X, labels):
    """Mean cross-entropy and its gradient with respect to ``(W, b)``."""
    X = np.asarray(X, dtype=np.float64)
    loss, G = _cross_entropy(head.logits(X), labels, head.temperature)
    return loss, G.T @ X, G.sum(axis=0)


def train_softmax(
    X, labels, epochs=500, learning_rate=None, seed=0, zero_bias=False, init_scale=0.0, num_classes=None
) -> SoftmaxHead:
    """Fit a linear softmax classifier.

    Weights start at zero unless ``init_scale > 0``, in which case they are
    drawn from a seeded normal distribution with that standard deviation.
    ``learning_rate=None`` picks ``1 / mean(|x|^2)``, which is below the
    inverse curvature bound of the loss whatever the input scale.
    """
    X = np.asarray(X, dtype=np.float64)
    labels, c = _check_labels(X, labels, num_classes)
    if learning_rate is None:
        learning_rate = 1.0 / max(float(np.mean(np.einsum("ij,ij->i", X, X))), 1e-12)
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, init_scale, size=(c, X.shape[1])) if init_scale > 0 else np.zeros((c, X.shape[1]))
    head = SoftmaxHead(W, np.zeros(c))
    for _ in range(epochs):
        _, gW, gb = softmax_loss_and_grad(head, X, labels)
        b = head.bias if zero_bias else head.bias - learning_rate * gb
        head = SoftmaxHead(head.weights - learning_rate * gW, b)
    return head


@dataclass(frozen=True)
class MlpClassifier:
    activation: Activation
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    head: SoftmaxHead

    def _forward(self, X):
        z1 = X @ self.W1.T + self.b1
        h1 = _act(self.activation, z1)
        z2 = h1 @ self.W2.T + self.b2
        h2 = _act(self.activation, z2)
        return z1, h1, z2, h2

    def logits(self, X):
        return self.head.logits(self._forward(np.asarray(X, dtype=np.float64))[3])

    def predict(self, X, alpha=None):
        X = np.asarray(X, dtype=np.float64)
        if alpha is not None:
            X = rescale_inject(X, alpha)
        logits = self.logits(X)
        return np.argmax(logits, axis=1), softmax(logits, self.head.temperature)

    def __call__(self, X):
        return self.predict(X)[0]

    @property
    def params(self):
        return [self.W1, self.b1, self.W2, self.b2, self.head.weights, self.head.bias]

    def with_params(self, params):
        W1, b1, W2, b2, W3, b3 = params
        return replace(self, W1=W1, b1=b1, W2=W2, b2=b2, head=SoftmaxHead(W3, b3, self.head.temperature))


def mlp_loss_and_grad(model: MlpClassifier, X, labels):
    """Mean cross-entropy and gradients in the order of ``model.params``."""
    X = np.asarray(X, dtype=np.float64)
    z1, h1, z2, h2 = model._forward(X)
    loss, G = _cross_entropy(model.head.logits(h2), labels, model.head.temperature)
    d2 = (G @ model.head.weights) * _act_grad(model.activation, z2)
    d1 = (d2 @ model.W2) * _act_grad(model.activation, z1)
    return loss, [d1.T @ X, d1.sum(axis=0), d2.T @ h1, d2.sum(axis=0), G.T @ h2, G.sum(axis=0)]


def init_mlp(d, num_classes, activation=Activation.RELU, hidden=(64, 64), seed=0) -> MlpClassifier:
    activation = Activation(activation)
    h1, h2 = hidden
    if h1 < 1 or h2 < 1:
        raise ValueError("hidden widths must be >= 1")
    rng = np.random.default_rng(seed)
    return MlpClassifier(
        activation,
        rng.normal(0.0, np.sqrt(2.0 / d), size=(h1, d)),
        np.zeros(h1),
        rng.normal(0.0, np.sqrt(2.0 / h1), size=(h2, h1)),
        np.zeros(h2),
        SoftmaxHead(rng.normal(0.0, np.sqrt(1.0 / h2), size=(num_classes, h2)), np.zeros(num_classes)),
    )


def train_mlp(
    X,
    labels,
    activation=Activation.RELU,
    epochs=500,
    learning_rate=0.1,
    seed=0,
    hidden=(64, 64),
    momentum=0.9,
    num_classes=None,
) -> MlpClassifier:
    """Fit a two-hidden-layer MLP (no normalization layers) by full-batch GD with momentum."""
    X = np.asarray(X, dtype=np.float64)
    labels, c = _check_labels(X, labels, num_classes)
    model = init_mlp(X.shape[1], c, activation, hidden, seed)
    params = [p.copy() for p in model.params]
    velocity = [np.zeros_like(p) for p in params]
    for _ in range(epochs):
        _, grads = mlp_loss_and_grad(model, X, labels)
        for p, v, g in zip(params, velocity, grads):
            v *= momentum
            v -= learning_rate * g
            p += v
        model = model.with_params([p.copy() for p in params])
    return model


def predict(model, X, alpha=None):
    """Labels from either model type."""
    if isinstance(model, SoftmaxHead):
        return predict_softmax(model, X, alpha)[0]
    return model.predict(X, alpha)[0]


# -- binary model IO ----------------------------------------------------------

def _write_head(buf, head):
    c, d = head.weights.shape
    buf.write(struct.pack("<IId", c, d, head.temperature))
    buf.write(head.weights.astype("<f8").tobytes())
    buf.write(head.bias.astype("<f8").tobytes())


def _read(buf, fmt):
    size = struct.calcsize(fmt)
    raw = buf.read(size)
    if len(raw) != size:
        raise FileFormatError("truncated model blob")
    return struct.unpack(fmt, raw)


def _read_array(buf, shape):
    count = int(np.prod(shape))
    raw = buf.read(8 * count)
    if len(raw) != 8 * count:
        raise FileFormatError("truncated model blob")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def _read_head(buf):
    c, d, temperature = _read(buf, "<IId")
    return SoftmaxHead(_read_array(buf, (c, d)), _read_array(buf, (c,)), temperature)


def dumps_model(model) -> bytes:
    buf = io.BytesIO()
    if isinstance(model, SoftmaxHead):
        buf.write(struct.pack("<4sHH", MODEL_MAGIC, MODEL_VERSION, 0))
        _write_head(buf, model)
    else:
        h1, d = model.W1.shape
        h2 = model.W2.shape[0]
        buf.write(struct.pack("<4sHH", MODEL_MAGIC, MODEL_VERSION, 1))
        buf.write(struct.pack("<HIII", _ACT_CODES.index(model.activation), d, h1, h2))
        for arr in (model.W1, model.b1, model.W2, model.b2):
            buf.write(arr.astype("<f8").tobytes())
        _write_head(buf, model.head)
    return buf.getvalue()


def loads_model(blob: bytes):
    buf = io.BytesIO(blob)
    magic, version, kind = _read(buf, "<4sHH")
    if magic != MODEL_MAGIC:
        raise FileFormatError(f"bad model magic {magic!r}")
    if version != MODEL_VERSION:
        raise FileFormatError(f"unsupported model version {version}")
    if kind == 0:
        model = _read_head(buf)
    elif kind == 1:
        code, d, h1, h2 = _read(buf, "<HIII")
        if code >= len(_ACT_CODES):
            raise FileFormatError(f"unknown activation code {code}")
        W1 = _read_array(buf, (h1, d))
        b1 = _read_array(buf, (h1,))
        W2 = _read_array(buf, (h2, h1))
        b2 = _read_array(buf, (h2,))
        model = MlpClassifier(_ACT_CODES[code], W1, b1, W2, b2, _read_head(buf))
    else:
        raise FileFormatError(f"unknown model kind {kind}")
    if buf.read(1):
        raise FileFormatError("trailing bytes after model")
    return model


def save_model(model, path):
    with open(path, "wb") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path, "rb") as fh:
        return loads_model(fh.read())
