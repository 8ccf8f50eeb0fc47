"""Minimal deterministic trainable classifier.

Dense and 3x3-style convolutional layers with hand-written backprop on
float64 numpy arrays. Every weight tensor carries a binary mask; the
effective weight is always ``weights * mask``, gradients are multiplied
by the mask before SGD updates, and a snapshot of the initial weights is
kept on the network so surviving weights can be rewound to their values
at initialization. Small and slow by design: the point is bitwise
reproducibility and auditability, not throughput.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RngState


class DimensionError(ValueError):
    """Input or snapshot shape does not match the network."""


class TrainingDivergenceError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}"
        )


def _init_uniform(shape: tuple[int, ...], fan_in: int, gen: np.random.Generator):
    bound = 1.0 / np.sqrt(fan_in)
    return gen.uniform(-bound, bound, size=shape)


class Layer:
    """Base layer. Weighted layers carry weights, bias and a binary mask."""

    kind: str = ""
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    mask: np.ndarray | None = None

    @property
    def prunable(self) -> bool:
        return self.weights is not None

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DenseLayer(Layer):
    """Fully connected layer, weights shaped (out, in).

    Input-axis slices (used by structured pruning) are therefore the
    columns of the weight matrix. Accepts any input rank >= 2 and
    flattens trailing dimensions.
    """

    kind = "dense"

    def __init__(self, in_dim: int, out_dim: int, gen: np.random.Generator):
        self.weights = _init_uniform((out_dim, in_dim), in_dim, gen)
        self.bias = _init_uniform((out_dim,), in_dim, gen)
        self.mask = np.ones_like(self.weights)

    def forward(self, x):
        self._in_shape = x.shape
        x = x.reshape(x.shape[0], -1)
        if x.shape[1] != self.weights.shape[1]:
            raise DimensionError(
                f"dense layer expects {self.weights.shape[1]} features, got {x.shape[1]}"
            )
        self._x = x
        return x @ (self.weights * self.mask).T + self.bias

    def backward(self, grad):
        # effective weight is w*mask, so the true weight gradient carries the mask
        self.grad_w = (grad.T @ self._x) * self.mask
        self.grad_b = grad.sum(axis=0)
        return (grad @ (self.weights * self.mask)).reshape(self._in_shape)


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    # (N, C, H, W) -> (N, Ho*Wo, C*k*k) with Ho = H-k+1 (valid windows)
    n, c, h, w = x.shape
    ho, wo = h - k + 1, w - k + 1
    sn, sc, sh, sw = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x, (n, c, ho, wo, k, k), (sn, sc, sh, sw, sh, sw)
    )
    return np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(
        n, ho * wo, c * k * k
    )


def _col2im(grad_cols: np.ndarray, x_shape: tuple[int, ...], k: int) -> np.ndarray:
    n, c, h, w = x_shape
    ho, wo = h - k + 1, w - k + 1
    grad_x = np.zeros(x_shape)
    g6 = grad_cols.reshape(n, ho, wo, c, k, k)
    for di in range(k):
        for dj in range(k):
            grad_x[:, :, di : di + ho, dj : dj + wo] += g6[:, :, :, :, di, dj].transpose(
                0, 3, 1, 2
            )
    return grad_x


class Conv2dLayer(Layer):
    """Valid (no padding) stride-1 cross-correlation, weights (out_ch, in_ch, k, k).

    Input-axis slices are ``weights[:, i, :, :]``, one per input channel.
    """

    kind = "conv2d"

    def __init__(self, in_ch: int, out_ch: int, kernel_size: int, gen: np.random.Generator):
        fan_in = in_ch * kernel_size * kernel_size
        self.weights = _init_uniform((out_ch, in_ch, kernel_size, kernel_size), fan_in, gen)
        self.bias = _init_uniform((out_ch,), fan_in, gen)
        self.mask = np.ones_like(self.weights)
        self.kernel_size = kernel_size
        self.output_channels = out_ch

    def forward(self, x):
        if x.ndim == 3:
            x = x[:, None, :, :]
        k = self.kernel_size
        out_ch, in_ch = self.weights.shape[:2]
        if x.ndim != 4 or x.shape[1] != in_ch:
            raise DimensionError(
                f"conv layer expects (N, {in_ch}, H, W) input, got shape {x.shape}"
            )
        if x.shape[2] < k or x.shape[3] < k:
            raise DimensionError(f"input {x.shape[2]}x{x.shape[3]} smaller than kernel {k}")
        self._x_shape = x.shape
        self._cols = _im2col(x, k)
        w_eff = (self.weights * self.mask).reshape(out_ch, -1)
        out = self._cols @ w_eff.T + self.bias
        n, _, h, w = x.shape
        return out.reshape(n, h - k + 1, w - k + 1, out_ch).transpose(0, 3, 1, 2)

    def backward(self, grad):
        k = self.kernel_size
        out_ch = self.weights.shape[0]
        n = grad.shape[0]
        g2 = grad.transpose(0, 2, 3, 1).reshape(n, -1, out_ch)
        gw = np.einsum("npo,npk->ok", g2, self._cols)
        self.grad_w = gw.reshape(self.weights.shape) * self.mask
        self.grad_b = g2.sum(axis=(0, 1))
        grad_cols = g2 @ (self.weights * self.mask).reshape(out_ch, -1)
        return _col2im(grad_cols, self._x_shape, k)


class MaxPool2x2Layer(Layer):
    """2x2 max pooling, stride 2; odd trailing rows/columns are dropped.

    Within a window, ties route the gradient to the first (row-major)
    maximal element, keeping backward deterministic.
    """

    kind = "maxpool2x2"

    def forward(self, x):
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        x = x[:, :, : 2 * h2, : 2 * w2]
        self._in_shape = (n, c, h, w)
        windows = x.reshape(n, c, h2, 2, w2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
            n, c, h2, w2, 4
        )
        self._argmax = windows.argmax(axis=-1)
        return windows.max(axis=-1)

    def backward(self, grad):
        n, c, h, w = self._in_shape
        h2, w2 = h // 2, w // 2
        routed = np.zeros((n, c, h2, w2, 4))
        np.put_along_axis(routed, self._argmax[..., None], grad[..., None], axis=-1)
        grad_x = np.zeros((n, c, h, w))
        grad_x[:, :, : 2 * h2, : 2 * w2] = (
            routed.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
                n, c, 2 * h2, 2 * w2
            )
        )
        return grad_x


class ReluLayer(Layer):
    kind = "relu"

    def forward(self, x):
        self._active = x > 0
        return np.where(self._active, x, 0.0)

    def backward(self, grad):
        return grad * self._active


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.01
    batch_size: int = 32

    def __post_init__(self):
        if self.epochs < 1 or self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError(f"invalid training config: {self}")


@dataclass
class AugmentConfig:
    """Train-time augmentation toggles.

    Crop pads by `crop_padding` zeros and takes a random window of the
    original size. Horizontal flips change digit semantics, so they are
    off unless explicitly requested.
    """

    crop: bool = False
    crop_padding: int = 2
    flip: bool = False


# Snapshot of all weights/biases, ordered by weighted-layer position.
WeightSnapshot = list[tuple[np.ndarray, np.ndarray]]


@dataclass
class Network:
    layers: list[Layer]
    rng_seed: int
    initial_snapshot: WeightSnapshot = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.initial_snapshot is None:
            self.initial_snapshot = snapshot(self)

    @property
    def weighted_layers(self) -> list[Layer]:
        return [l for l in self.layers if l.prunable]


def forward(net: Network, batch: np.ndarray) -> np.ndarray:
    """Run the network, returning one logit row per example."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 3 and net.layers and net.layers[0].kind != "conv2d":
        x = x.reshape(x.shape[0], -1)
    for layer in net.layers:
        x = layer.forward(x)
    return x


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_gradients(net: Network, batch: np.ndarray, labels: np.ndarray) -> float:
    """Mean softmax cross-entropy; leaves grad_w/grad_b on each weighted layer."""
    logits = forward(net, batch)
    n = logits.shape[0]
    log_probs = _log_softmax(logits)
    loss = -log_probs[np.arange(n), labels].mean()
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    for layer in reversed(net.layers):
        grad = layer.backward(grad)
    return float(loss)


def _augment_batch(x: np.ndarray, aug: AugmentConfig, gen: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    if aug.flip:
        flips = gen.random(n) < 0.5
        x = np.where(flips[:, None, None], x[:, :, ::-1], x)
    if aug.crop:
        p = aug.crop_padding
        h, w = x.shape[1], x.shape[2]
        padded = np.zeros((n, h + 2 * p, w + 2 * p))
        padded[:, p : p + h, p : p + w] = x
        offs = gen.integers(0, 2 * p + 1, size=(n, 2))
        x = np.stack(
            [padded[i, r : r + h, c : c + w] for i, (r, c) in enumerate(offs)]
        )
    return x


def train(net: Network, data, cfg: TrainConfig, rng: RngState,
          augment: AugmentConfig | None = None) -> Network:
    """SGD on softmax cross-entropy, in place.

    Per-epoch shuffling, augmentation and everything else stochastic
    come from `rng`, so equal (net, data, cfg, seed) reproduce bitwise
    identical weights. Gradients are multiplied by the prune masks
    before each update, so masked weights stay exactly zero.
    """
    if len(data.labels) == 0:
        raise ValueError("cannot train on an empty dataset")
    gen = rng.generator
    images = data.images
    labels = np.asarray(data.labels)
    n = len(labels)
    for epoch in range(cfg.epochs):
        order = gen.permutation(n)
        for bstart in range(0, n, cfg.batch_size):
            idx = order[bstart : bstart + cfg.batch_size]
            x = images[idx]
            if augment is not None and (augment.crop or augment.flip):
                x = _augment_batch(x, augment, gen)
            loss = loss_and_gradients(net, x, labels[idx])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(epoch, bstart // cfg.batch_size, loss)
            for layer in net.weighted_layers:
                layer.weights -= cfg.learning_rate * layer.grad_w * layer.mask
                layer.bias -= cfg.learning_rate * layer.grad_b
    return net


def snapshot(net: Network) -> WeightSnapshot:
    return [(l.weights.copy(), l.bias.copy()) for l in net.weighted_layers]


def restore_unmasked(net: Network, snap: WeightSnapshot) -> Network:
    """Set each weight to its snapshot value where mask==1, zero where mask==0."""
    layers = net.weighted_layers
    if len(snap) != len(layers):
        raise DimensionError(
            f"snapshot has {len(snap)} weighted layers, network has {len(layers)}"
        )
    for layer, (w, b) in zip(layers, snap):
        if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
            raise DimensionError(
                f"snapshot shape {w.shape} does not match layer shape {layer.weights.shape}"
            )
        layer.weights = w * layer.mask
        layer.bias = b.copy()
    return net


def evaluate(net: Network, data, batch_size: int = 256) -> np.ndarray:
    """Predicted labels (argmax of logits; ties go to the lowest class index)."""
    preds = []
    for start in range(0, len(data.labels), batch_size):
        logits = forward(net, data.images[start : start + batch_size])
        preds.append(logits.argmax(axis=1))
    return np.concatenate(preds) if preds else np.zeros(0, dtype=int)


def clone(net: Network) -> Network:
    """Deep copy sharing nothing; keeps the original initial snapshot."""
    import copy

    return copy.deepcopy(net)


# ---------------------------------------------------------------------------
# Architectures

def lenet(image_size: int, classes: int, rng: RngState,
          channels: tuple[int, int] = (6, 16),
          dense_dims: tuple[int, int] = (120, 84)) -> Network:
    """Two 3x3 conv-relu-pool blocks, then three dense layers.

    With 28x28 inputs and the default widths this is the reference small
    classifier: conv(6) -> conv(16) -> dense 120 -> 84 -> classes, ReLU
    after every layer except the last.
    """
    gen = rng.generator
    c1, c2 = channels
    layers: list[Layer] = [
        Conv2dLayer(1, c1, 3, gen), ReluLayer(), MaxPool2x2Layer(),
        Conv2dLayer(c1, c2, 3, gen), ReluLayer(), MaxPool2x2Layer(),
    ]
    side = (image_size - 2) // 2
    side = (side - 2) // 2
    if side < 1:
        raise DimensionError(f"image size {image_size} too small for two conv/pool blocks")
    flat = c2 * side * side
    d1, d2 = dense_dims
    layers += [
        DenseLayer(flat, d1, gen), ReluLayer(),
        DenseLayer(d1, d2, gen), ReluLayer(),
        DenseLayer(d2, classes, gen),
    ]
    return Network(layers=layers, rng_seed=rng.seed)


def mlp(input_dim: int, hidden: tuple[int, ...], classes: int, rng: RngState) -> Network:
    gen = rng.generator
    layers: list[Layer] = []
    prev = input_dim
    for width in hidden:
        layers += [DenseLayer(prev, width, gen), ReluLayer()]
        prev = width
    layers.append(DenseLayer(prev, classes, gen))
    return Network(layers=layers, rng_seed=rng.seed)


def build_network(arch: str, image_size: int, classes: int, rng: RngState) -> Network:
    """Build from an architecture name: "lenet", "lenet:c1,c2", or "mlp:h1,h2,..."."""
    name, _, args = arch.partition(":")
    if name == "lenet":
        if args:
            c1, c2 = (int(a) for a in args.split(","))
            return lenet(image_size, classes, rng, channels=(c1, c2))
        return lenet(image_size, classes, rng)
    if name == "mlp":
        hidden = tuple(int(a) for a in args.split(",")) if args else (32,)
        return mlp(image_size * image_size, hidden, classes, rng)
    raise ValueError(f"unknown architecture {arch!r}")
