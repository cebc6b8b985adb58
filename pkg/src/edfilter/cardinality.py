"""Feature-cardinality detector: a two-hidden-layer MLP trained with Adam on
chunk-level examples labeled by the optimal subset cardinality.

The network input is a fixed-length encoding of a count matrix: per-feature
singleton information gain (zero-padded), the normalized class histogram, and
two size summaries. The output is an n_max-way softmax over cardinality
classes (cardinality minus one).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import CvConfig
from .dataset import DataError, FeatureMatrix, chunk
from .info_theory import info_gain

ENCODING_VERSION = "ig-v1"
CLASS_SLOTS = 8
DEFAULT_N_MAX = 32
DEFAULT_HIDDEN = (64, 32)


class ModelFormatError(ValueError):
    """Model file is malformed or incompatible with this encoding."""


@dataclass(frozen=True)
class CardinalityModel:
    weights: list   # [(W1, b1), (W2, b2), (W3, b3)]
    input_dim: int
    n_max: int
    encoding_version: str = ENCODING_VERSION

    def __post_init__(self):
        dim = self.input_dim
        for W, b in self.weights:
            if W.shape[0] != dim or b.shape[0] != W.shape[1]:
                raise ModelFormatError("layer shapes do not chain")
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise ModelFormatError("non-finite weights")
            dim = W.shape[1]
        if dim != self.n_max:
            raise ModelFormatError("output width must equal n_max")


@dataclass(frozen=True)
class TrainingExample:
    input: np.ndarray
    label: int  # optimal cardinality minus one


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    validation_fraction: float = 0.2

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.learning_rate <= 0:
            raise ValueError("epochs, batch_size, and learning_rate must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")


def encode_input(m: FeatureMatrix, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Fixed-length matrix encoding: [singleton IG x n_max, class histogram x 8,
    n_features/n_max, log2(n_rows)/16]."""
    if m.n_features > n_max:
        raise DataError(f"{m.n_features} features exceeds the encoder cap of {n_max}")
    if m.n_classes > CLASS_SLOTS:
        raise DataError(f"{m.n_classes} classes exceeds the {CLASS_SLOTS} histogram slots")
    vec = np.zeros(n_max + CLASS_SLOTS + 2)
    for i in range(m.n_features):
        vec[i] = info_gain(m, (i,))
    hist = np.bincount(m.labels, minlength=CLASS_SLOTS) / m.n_rows
    vec[n_max:n_max + CLASS_SLOTS] = hist[:CLASS_SLOTS]
    vec[n_max + CLASS_SLOTS] = m.n_features / n_max
    vec[n_max + CLASS_SLOTS + 1] = math.log2(m.n_rows) / 16.0
    return vec


def gen_training_data(m: FeatureMatrix, chunk_size: int, seed: int,
                      labeler: str = "auto", cv: CvConfig | None = None,
                      n_max: int = DEFAULT_N_MAX,
                      max_expansions: int | None = 500) -> list:
    """One example per kept chunk, labeled by the optimal subset cardinality.

    ``labeler``: "oracle" (exhaustive, feature count <= 12), "exact"
    (branch-and-bound, budgeted), or "auto" picking by feature count.
    """
    from .search import SearchConfig, brute_force_oracle, exact_search

    cv = cv or CvConfig()
    if labeler == "auto":
        labeler = "oracle" if m.n_features <= 12 else "exact"
    if labeler not in ("oracle", "exact"):
        raise ValueError(f"unknown labeler {labeler!r}")
    examples = []
    for ck in chunk(m, chunk_size, seed):
        counts = np.bincount(ck.labels, minlength=ck.n_classes)
        if counts.min() < cv.k:
            raise DataError(f"chunk too small for {cv.k}-fold cross-validation")
        if labeler == "oracle":
            result = brute_force_oracle(ck, cv=cv)
        else:
            result = exact_search(ck, SearchConfig(cv=cv, max_expansions=max_expansions))
        examples.append(TrainingExample(encode_input(ck, n_max), len(result.indices) - 1))
    return examples


def _relu(z):
    return np.maximum(z, 0.0)


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(weights, X: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for a batch of inputs."""
    (W1, b1), (W2, b2), (W3, b3) = weights
    a1 = _relu(X @ W1 + b1)
    a2 = _relu(a1 @ W2 + b2)
    return _softmax(a2 @ W3 + b3)


def loss_and_grads(weights, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy loss and its gradient w.r.t. every parameter."""
    (W1, b1), (W2, b2), (W3, b3) = weights
    z1 = X @ W1 + b1
    a1 = _relu(z1)
    z2 = a1 @ W2 + b2
    a2 = _relu(z2)
    p = _softmax(a2 @ W3 + b3)
    n = X.shape[0]
    loss = float(-np.log(np.clip(p[np.arange(n), y], 1e-300, None)).mean())
    d3 = p.copy()
    d3[np.arange(n), y] -= 1.0
    d3 /= n
    gW3, gb3 = a2.T @ d3, d3.sum(axis=0)
    d2 = (d3 @ W3.T) * (z2 > 0)
    gW2, gb2 = a1.T @ d2, d2.sum(axis=0)
    d1 = (d2 @ W2.T) * (z1 > 0)
    gW1, gb1 = X.T @ d1, d1.sum(axis=0)
    return loss, [(gW1, gb1), (gW2, gb2), (gW3, gb3)]


def _init_weights(rng, input_dim: int, hidden, output_dim: int):
    dims = [input_dim, *hidden, output_dim]
    weights = []
    for fan_in, fan_out in zip(dims, dims[1:]):
        W = rng.standard_normal((fan_in, fan_out)) * math.sqrt(2.0 / fan_in)
        weights.append((W, np.zeros(fan_out)))
    return weights


def _mean_loss(weights, X, y) -> float:
    p = forward(weights, X)
    return float(-np.log(np.clip(p[np.arange(X.shape[0]), y], 1e-300, None)).mean())


def train(examples, cfg: TrainConfig | None = None, n_max: int = DEFAULT_N_MAX,
          hidden=DEFAULT_HIDDEN, epoch_callback=None) -> CardinalityModel:
    """Adam-trained MLP; returns the epoch-end weights with best validation loss.

    Deterministic given cfg.seed: He-style init, per-epoch shuffling, and the
    train/validation split all draw from the same seeded generator.
    ``epoch_callback(epoch, train_loss, val_loss)`` is invoked after each epoch.
    """
    cfg = cfg or TrainConfig()
    examples = list(examples)
    if len(examples) < 2:
        raise ValueError("need at least two training examples")
    X = np.stack([np.asarray(e.input, dtype=np.float64) for e in examples])
    y = np.array([e.label for e in examples], dtype=np.int64)
    if y.min() < 0 or y.max() >= n_max:
        raise ValueError("label outside [0, n_max)")
    input_dim = X.shape[1]

    rng = np.random.default_rng(cfg.seed)
    weights = _init_weights(rng, input_dim, hidden, n_max)

    perm = rng.permutation(len(examples))
    n_val = min(max(int(round(len(examples) * cfg.validation_fraction)), 1), len(examples) - 1)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    Xt, yt = X[train_idx], y[train_idx]
    Xv, yv = X[val_idx], y[val_idx]

    adam_m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]
    adam_v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in weights]
    step = 0
    best_val = math.inf
    best_weights = [(W.copy(), b.copy()) for W, b in weights]
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(Xt))
        for start in range(0, len(Xt), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, grads = loss_and_grads(weights, Xt[batch], yt[batch])
            if math.isnan(loss):
                raise FloatingPointError("NaN training loss; lower the learning rate")
            step += 1
            bc1 = 1.0 - cfg.beta1 ** step
            bc2 = 1.0 - cfg.beta2 ** step
            for li, ((W, b), (gW, gb)) in enumerate(zip(weights, grads)):
                mW, mb = adam_m[li]
                vW, vb = adam_v[li]
                mW[:] = cfg.beta1 * mW + (1 - cfg.beta1) * gW
                mb[:] = cfg.beta1 * mb + (1 - cfg.beta1) * gb
                vW[:] = cfg.beta2 * vW + (1 - cfg.beta2) * gW ** 2
                vb[:] = cfg.beta2 * vb + (1 - cfg.beta2) * gb ** 2
                W -= cfg.learning_rate * (mW / bc1) / (np.sqrt(vW / bc2) + cfg.eps)
                b -= cfg.learning_rate * (mb / bc1) / (np.sqrt(vb / bc2) + cfg.eps)
        val_loss = _mean_loss(weights, Xv, yv)
        if epoch_callback is not None:
            epoch_callback(epoch, _mean_loss(weights, Xt, yt), val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_weights = [(W.copy(), b.copy()) for W, b in weights]
    return CardinalityModel(best_weights, input_dim, n_max)


def predict_cardinality(model: CardinalityModel, m: FeatureMatrix) -> int:
    """Predicted subset cardinality, clamped to [1, n_features]; ties to smaller."""
    if model.encoding_version != ENCODING_VERSION:
        raise ModelFormatError(
            f"model encoding {model.encoding_version!r} incompatible with {ENCODING_VERSION!r}")
    x = encode_input(m, model.n_max)
    if x.shape[0] != model.input_dim:
        raise ModelFormatError("input dimension mismatch")
    p = forward(model.weights, x[None, :])[0]
    return min(int(np.argmax(p)) + 1, m.n_features)


def save_model(model: CardinalityModel, path) -> None:
    """JSON serialization; floats round-trip bit-exactly via shortest repr."""
    doc = {
        "encoding_version": model.encoding_version,
        "n_max": model.n_max,
        "input_dim": model.input_dim,
        "layers": [
            {
                "rows": int(W.shape[0]),
                "cols": int(W.shape[1]),
                "weights": [float(v) for v in W.ravel()],
                "bias": [float(v) for v in b],
            }
            for W, b in model.weights
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path) -> CardinalityModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: malformed model file ({exc})") from None
    try:
        if doc["encoding_version"] != ENCODING_VERSION:
            raise ModelFormatError(
                f"{path}: encoding version {doc['encoding_version']!r}, expected {ENCODING_VERSION!r}")
        weights = []
        for layer in doc["layers"]:
            W = np.array(layer["weights"], dtype=np.float64).reshape(layer["rows"], layer["cols"])
            b = np.array(layer["bias"], dtype=np.float64)
            weights.append((W, b))
        return CardinalityModel(weights, int(doc["input_dim"]), int(doc["n_max"]),
                                doc["encoding_version"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"{path}: invalid model structure ({exc})") from None
