"""Minimal feed-forward convolutional network with analytic backpropagation.

Layers: valid-padding stride-1 convolution, non-overlapping max-pooling,
dense, inverted dropout, and a final softmax trained with mean cross-entropy.
Everything runs in float64 numpy; training is single-threaded and fully
deterministic given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError, TrainingError

_ACTIVATIONS = ("tanh", "relu", "linear")


def _act(name: str, x: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(x)
    if name == "relu":
        return np.maximum(x, 0.0)
    return x


def _act_grad(name: str, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - out * out
    if name == "relu":
        return (pre > 0.0).astype(np.float64)
    return np.ones_like(pre)


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | maxpool | dense | dropout | softmax
    filters: int | None = None
    kernel: tuple[int, int] | None = None
    activation: str | None = None
    pool: tuple[int, int] | None = None
    units: int | None = None
    rate: float | None = None

    def __post_init__(self):
        if self.kind == "conv":
            if not self.filters or self.filters < 1 or not self.kernel:
                raise ConfigurationError("conv layer needs filters and kernel")
            if self.activation not in _ACTIVATIONS:
                raise ConfigurationError(f"unknown activation {self.activation!r}")
        elif self.kind == "maxpool":
            pool = self.pool or (2, 2)
            if min(pool) < 1:
                raise ConfigurationError("pool size must be positive")
            object.__setattr__(self, "pool", pool)
        elif self.kind == "dense":
            if not self.units or self.units < 1:
                raise ConfigurationError("dense layer needs a positive unit count")
            if self.activation not in _ACTIVATIONS:
                raise ConfigurationError(f"unknown activation {self.activation!r}")
        elif self.kind == "dropout":
            if self.rate is None or not 0.0 <= self.rate < 1.0:
                raise ConfigurationError("dropout rate must lie in [0, 1)")
        elif self.kind == "softmax":
            pass
        else:
            raise ConfigurationError(f"unknown layer kind {self.kind!r}")


# -- functional ops -----------------------------------------------------------

def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """(B, C, H, W) -> contiguous (B, Ho, Wo, C*kh*kw) patch matrix."""
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(2, 3))
    b, c, ho, wo = windows.shape[:4]
    return np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(
        b, ho, wo, c * kh * kw
    )


def conv2d_forward(
    x: np.ndarray, weights: np.ndarray, biases: np.ndarray, activation: str = "linear"
) -> np.ndarray:
    """Valid convolution, stride 1: out[f,i,j] = act(b_f + sum w[f,c,;,;] * patch).

    Accepts a single (C, H, W) example or a (B, C, H, W) batch.
    """
    single = x.ndim == 3
    batch = x[None] if single else x
    f, c, kh, kw = weights.shape
    if batch.shape[1] != c:
        raise ShapeError(f"input channels {batch.shape[1]} != kernel channels {c}")
    if batch.shape[2] < kh or batch.shape[3] < kw:
        raise ShapeError(
            f"kernel {kh}x{kw} larger than input {batch.shape[2]}x{batch.shape[3]}"
        )
    cols = _im2col(batch, kh, kw)
    out = cols @ weights.reshape(f, -1).T + biases
    out = _act(activation, out).transpose(0, 3, 1, 2)
    return out[0] if single else out


def maxpool_forward(
    x: np.ndarray, pool: tuple[int, int] = (2, 2)
) -> tuple[np.ndarray, np.ndarray]:
    """Non-overlapping max pooling; odd trailing rows/columns are dropped.

    Returns the pooled tensor and the flat argmax index per window (kept for
    gradient routing).
    """
    single = x.ndim == 3
    batch = x[None] if single else x
    ph, pw = pool
    b, c, h, w = batch.shape
    ho, wo = h // ph, w // pw
    if ho == 0 or wo == 0:
        raise ShapeError(f"spatial dims {h}x{w} smaller than pool {ph}x{pw}")
    tiles = (
        batch[:, :, : ho * ph, : wo * pw]
        .reshape(b, c, ho, ph, wo, pw)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(b, c, ho, wo, ph * pw)
    )
    arg = tiles.argmax(axis=-1)
    out = np.take_along_axis(tiles, arg[..., None], axis=-1)[..., 0]
    if single:
        return out[0], arg[0]
    return out, arg


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the integer labels."""
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


# -- layer objects -------------------------------------------------------------

class _Layer:
    spec: LayerSpec

    def out_shape(self, in_shape: tuple[int, ...]) -> tuple[int, ...]:
        raise NotImplementedError

    def forward(self, x, training, rng):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def parameters(self) -> list[np.ndarray]:
        return []

    def gradients(self) -> list[np.ndarray]:
        return []


class _Conv(_Layer):
    def __init__(self, spec: LayerSpec, in_shape: tuple[int, ...], rng: np.random.Generator):
        self.spec = spec
        c = in_shape[0]
        kh, kw = spec.kernel
        fan_in = c * kh * kw
        self.weights = rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(spec.filters, c, kh, kw))
        self.biases = np.zeros(spec.filters)
        self._cache = None

    def out_shape(self, in_shape):
        c, h, w = in_shape
        kh, kw = self.spec.kernel
        if c != self.weights.shape[1] or h < kh or w < kw:
            raise ShapeError(f"conv kernel {self.weights.shape} incompatible with input {in_shape}")
        return (self.spec.filters, h - kh + 1, w - kw + 1)

    def forward(self, x, training, rng):
        f = self.spec.filters
        kh, kw = self.spec.kernel
        cols = _im2col(x, kh, kw)
        pre = cols @ self.weights.reshape(f, -1).T + self.biases
        out = _act(self.spec.activation, pre)
        self._cache = (x.shape, cols, pre, out)
        return out.transpose(0, 3, 1, 2)

    def backward(self, dout):
        x_shape, cols, pre, out = self._cache
        f = self.spec.filters
        kh, kw = self.spec.kernel
        dpre = dout.transpose(0, 2, 3, 1) * _act_grad(self.spec.activation, pre, out)
        flat = dpre.reshape(-1, f)
        self._dw = (flat.T @ cols.reshape(-1, cols.shape[-1])).reshape(self.weights.shape)
        self._db = flat.sum(axis=0)
        dcols = dpre @ self.weights.reshape(f, -1)
        b, ho, wo, _ = dpre.shape
        c = x_shape[1]
        dcols = dcols.reshape(b, ho, wo, c, kh, kw)
        dx = np.zeros(x_shape)
        for di in range(kh):
            for dj in range(kw):
                dx[:, :, di : di + ho, dj : dj + wo] += dcols[:, :, :, :, di, dj].transpose(0, 3, 1, 2)
        return dx

    def parameters(self):
        return [self.weights, self.biases]

    def gradients(self):
        return [self._dw, self._db]


class _MaxPool(_Layer):
    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self._cache = None

    def out_shape(self, in_shape):
        c, h, w = in_shape
        ph, pw = self.spec.pool
        if h < ph or w < pw:
            raise ShapeError(f"pool {self.spec.pool} larger than input {in_shape}")
        return (c, h // ph, w // pw)

    def forward(self, x, training, rng):
        out, arg = maxpool_forward(x, self.spec.pool)
        self._cache = (x.shape, arg)
        return out

    def backward(self, dout):
        x_shape, arg = self._cache
        ph, pw = self.spec.pool
        b, c, ho, wo = dout.shape
        tiles = np.zeros((b, c, ho, wo, ph * pw))
        np.put_along_axis(tiles, arg[..., None], dout[..., None], axis=-1)
        dx = np.zeros(x_shape)
        dx[:, :, : ho * ph, : wo * pw] = (
            tiles.reshape(b, c, ho, wo, ph, pw)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(b, c, ho * ph, wo * pw)
        )
        return dx


class _Dense(_Layer):
    """Fully connected layer; flattens anything non-flat on the way in."""

    def __init__(self, spec: LayerSpec, in_shape: tuple[int, ...], rng: np.random.Generator):
        self.spec = spec
        fan_in = int(np.prod(in_shape))
        self.weights = rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(spec.units, fan_in))
        self.biases = np.zeros(spec.units)
        self._cache = None

    def out_shape(self, in_shape):
        if int(np.prod(in_shape)) != self.weights.shape[1]:
            raise ShapeError(
                f"dense expects {self.weights.shape[1]} inputs, got shape {in_shape}"
            )
        return (self.spec.units,)

    def forward(self, x, training, rng):
        shape = x.shape
        flat = x.reshape(len(x), -1)
        pre = flat @ self.weights.T + self.biases
        out = _act(self.spec.activation, pre)
        self._cache = (shape, flat, pre, out)
        return out

    def backward(self, dout):
        shape, flat, pre, out = self._cache
        dpre = dout * _act_grad(self.spec.activation, pre, out)
        self._dw = dpre.T @ flat
        self._db = dpre.sum(axis=0)
        return (dpre @ self.weights).reshape(shape)

    def parameters(self):
        return [self.weights, self.biases]

    def gradients(self):
        return [self._dw, self._db]


class _Dropout(_Layer):
    """Inverted dropout: active only in training, identity at inference."""

    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self._mask = None

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training, rng):
        if not training or self.spec.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ConfigurationError("training forward pass through dropout needs an rng")
        keep = 1.0 - self.spec.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class _Softmax(_Layer):
    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self.probs = None

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ShapeError(f"softmax expects a flat input, got {in_shape}")
        return in_shape

    def forward(self, x, training, rng):
        self.probs = softmax(x)
        return self.probs

    def backward(self, dout):
        # combined with cross-entropy: the incoming dout already equals dlogits
        return dout


def _build_layer(spec: LayerSpec, in_shape, rng) -> _Layer:
    if spec.kind == "conv":
        return _Conv(spec, in_shape, rng)
    if spec.kind == "maxpool":
        return _MaxPool(spec)
    if spec.kind == "dense":
        return _Dense(spec, in_shape, rng)
    if spec.kind == "dropout":
        return _Dropout(spec)
    return _Softmax(spec)


class CnnModel:
    """Ordered layer stack with shape checking at construction time."""

    def __init__(self, input_shape: tuple[int, int, int], specs: Sequence[LayerSpec], seed: int = 0):
        if not specs or specs[-1].kind != "softmax":
            raise ConfigurationError("the final layer must be softmax")
        self.input_shape = tuple(input_shape)
        self.specs = list(specs)
        rng = np.random.default_rng(seed)
        self.layers: list[_Layer] = []
        shape = self.input_shape
        for i, spec in enumerate(specs):
            layer = _build_layer(spec, shape, rng)
            try:
                shape = layer.out_shape(shape)
            except ShapeError as exc:
                raise ShapeError(f"layer {i} ({spec.kind}): {exc}") from None
            self.layers.append(layer)
        self.output_shape = shape

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.gradients()]


def forward(
    model: CnnModel,
    batch: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Class probabilities (batch, classes); rows sum to 1.

    Dropout masks are drawn from `rng` only when training is true.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    if x.shape[1:] != model.input_shape:
        raise ShapeError(f"batch shape {x.shape[1:]} != model input {model.input_shape}")
    for i, layer in enumerate(model.layers):
        try:
            x = layer.forward(x, training, rng)
        except ValueError as exc:
            raise ShapeError(f"layer {i} ({layer.spec.kind}): {exc}") from None
    return x


def backward(
    model: CnnModel,
    batch: np.ndarray,
    labels: np.ndarray,
    rng: np.random.Generator | None = None,
) -> tuple[list[np.ndarray], float]:
    """Mean cross-entropy and its gradients for every trainable tensor.

    Runs a training-mode forward pass (masks drawn from `rng`) and reuses its
    caches; the returned gradient list parallels model.parameters().
    """
    labels = np.asarray(labels, dtype=np.int64)
    probs = forward(model, batch, training=True, rng=rng)
    n_classes = probs.shape[-1]
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= n_classes:
        raise ConfigurationError(f"labels must lie in [0, {n_classes})")
    loss = cross_entropy(probs, labels)
    grad = probs.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    grad /= len(labels)
    for layer in reversed(model.layers):
        grad = layer.backward(grad)
    return model.gradients(), loss


def train_cnn(
    model: CnnModel,
    inputs: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    step_size: float,
    batch_size: int,
    seed: int = 0,
) -> tuple[CnnModel, list[float]]:
    """Plain SGD with seeded per-epoch shuffling; returns per-epoch mean loss."""
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if len(x) == 0:
        raise TrainingError("empty dataset")
    rng = np.random.default_rng(seed)
    trace: list[float] = []
    for epoch in range(epochs):
        perm = rng.permutation(len(x))
        total = 0.0
        for start in range(0, len(perm), batch_size):
            idx = perm[start : start + batch_size]
            grads, loss = backward(model, x[idx], y[idx], rng=rng)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss} at epoch {epoch}")
            total += loss * len(idx)
            for param, grad in zip(model.parameters(), grads):
                param -= step_size * grad
        trace.append(total / len(x))
    return model, trace


def predict(model: CnnModel, inputs: np.ndarray) -> np.ndarray:
    """Inference-mode class probabilities."""
    return forward(model, inputs, training=False)


def accuracy(model: CnnModel, inputs: np.ndarray, labels: np.ndarray) -> float:
    probs = predict(model, inputs)
    return float(np.mean(probs.argmax(axis=1) == np.asarray(labels)))


def build_some_cnn(
    input_shape: tuple[int, int, int],
    num_classes: int = 2,
    activation: str = "tanh",
    seed: int = 0,
) -> CnnModel:
    """The paired-fingerprint classifier stack.

    conv(71, 3x3) -> maxpool 2x2 -> conv(88, 2x2) -> maxpool 2x2 ->
    dropout 0.5 -> dense(26) -> dense(num_classes) -> softmax, with the given
    activation on the conv and inner dense layers.
    """
    c, h, w = input_shape
    if h < 8 or w < 8:
        raise ShapeError(f"input spatial dims must be >= 8, got {h}x{w}")
    specs = [
        LayerSpec("conv", filters=71, kernel=(3, 3), activation=activation),
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("conv", filters=88, kernel=(2, 2), activation=activation),
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("dropout", rate=0.5),
        LayerSpec("dense", units=26, activation=activation),
        LayerSpec("dense", units=num_classes, activation="linear"),
        LayerSpec("softmax"),
    ]
    return CnnModel(input_shape, specs, seed=seed)
