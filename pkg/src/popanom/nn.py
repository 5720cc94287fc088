"""Dense feed-forward networks with explicit, hand-derived backprop.

The architecture space is deliberately closed: chains of dense layers with
one of four activations, trained under mse or bce loss by sgd or adam.
Gradients are computed per layer rather than by a tape, which keeps the
whole substrate auditable and float64 end to end.  Every stochastic
operation takes an explicit ``numpy.random.Generator`` so identical seeds
give bit-identical results.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DataError, NumericalError
from .serialize import canonical_digest, read_json, write_json

ACTIVATIONS = ("identity", "relu", "sigmoid", "tanh")
LOSS_KINDS = ("mse", "bce")
OPTIMIZERS = ("sgd", "adam")

# Probability clamp applied before the bce log terms.  Keeps the loss and
# its gradient finite for saturated or out-of-range outputs.
BCE_CLAMP = 1e-7

MLP_FORMAT = "mlp"
MLP_FORMAT_VERSION = 1


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "identity":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return expit(z)
    if kind == "tanh":
        return np.tanh(z)
    raise ConfigError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def _activation_slope(kind: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Derivative of the activation w.r.t. its pre-activation z.

    Uses the post-activation ``a`` where that is cheaper.  relu takes
    subgradient 0 at z == 0.
    """
    if kind == "identity":
        return np.ones_like(z)
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "sigmoid":
        return a * (1.0 - a)
    if kind == "tanh":
        return 1.0 - a * a
    raise ConfigError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


class DenseLayer:
    """One affine map plus activation.  ``weights`` has shape (out, in)."""

    def __init__(self, weights, biases, activation: str):
        w = np.array(weights, dtype=np.float64)
        b = np.array(biases, dtype=np.float64)
        if w.ndim != 2:
            raise DataError(f"layer weights must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise DataError(
                f"layer biases have shape {b.shape}, expected ({w.shape[0]},) "
                f"to match the weight rows"
            )
        if activation not in ACTIVATIONS:
            raise ConfigError(
                f"unknown activation {activation!r}; expected one of {ACTIVATIONS}"
            )
        self.weights = w
        self.biases = b
        self.activation = activation

    @property
    def in_size(self) -> int:
        return self.weights.shape[1]

    @property
    def out_size(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.biases.copy(), self.activation)


class Mlp:
    """A chain of DenseLayers with matching widths."""

    def __init__(self, layers: Sequence[DenseLayer]):
        layers = list(layers)
        if not layers:
            raise ConfigError("an Mlp needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].in_size != layers[i - 1].out_size:
                raise DataError(
                    f"layer {i} expects {layers[i].in_size} inputs but layer "
                    f"{i - 1} produces {layers[i - 1].out_size}"
                )
        self.layers = layers

    @property
    def in_size(self) -> int:
        return self.layers[0].in_size

    @property
    def out_size(self) -> int:
        return self.layers[-1].out_size

    @classmethod
    def build(cls, sizes: Sequence[int], activations: Sequence[str],
              rng: np.random.Generator) -> "Mlp":
        """Glorot-uniform initialised network.

        ``sizes`` lists layer widths input-first (len L+1); ``activations``
        names one activation per layer (len L).  Biases start at zero.
        """
        if len(sizes) < 2:
            raise ConfigError("sizes must list at least an input and an output width")
        if len(activations) != len(sizes) - 1:
            raise ConfigError(
                f"{len(sizes) - 1} layers need {len(sizes) - 1} activations, "
                f"got {len(activations)}"
            )
        if any(s < 1 for s in sizes):
            raise ConfigError(f"layer widths must be positive, got {list(sizes)}")
        layers = []
        for fan_in, fan_out, act in zip(sizes, sizes[1:], activations):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
            layers.append(DenseLayer(w, np.zeros(fan_out), act))
        return cls(layers)

    def copy(self) -> "Mlp":
        return Mlp([layer.copy() for layer in self.layers])

    def _check_batch(self, batch) -> np.ndarray:
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2:
            raise DataError(f"batch must be 2-D (rows are samples), got shape {x.shape}")
        if x.shape[1] != self.in_size:
            raise DataError(
                f"batch has {x.shape[1]} columns but the first layer expects "
                f"{self.in_size}"
            )
        return x

    def forward(self, batch) -> np.ndarray:
        a = self._check_batch(batch)
        for layer in self.layers:
            a = _activate(layer.activation, a @ layer.weights.T + layer.biases)
        return a

    def forward_trace(self, batch):
        """Forward pass keeping intermediates for backprop.

        Returns (pres, posts) where posts[0] is the input batch, pres[i]
        the pre-activation of layer i, and posts[i + 1] its output.
        """
        a = self._check_batch(batch)
        pres, posts = [], [a]
        for layer in self.layers:
            z = a @ layer.weights.T + layer.biases
            a = _activate(layer.activation, z)
            pres.append(z)
            posts.append(a)
        return pres, posts

    def backprop(self, pres, posts, upstream):
        """Backpropagate d(loss)/d(output) through a recorded trace.

        Returns (grads, d_input): grads is one (d_weights, d_biases) pair
        per layer, d_input the loss gradient w.r.t. the input batch.  The
        input gradient is what lets a composite network (for instance an
        encoder feeding a frozen discriminator) pass gradients across
        sub-network boundaries.
        """
        g = np.asarray(upstream, dtype=np.float64)
        grads = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            dz = g * _activation_slope(layer.activation, pres[i], posts[i + 1])
            grads[i] = (dz.T @ posts[i], dz.sum(axis=0))
            g = dz @ layer.weights
        return grads, g

    def to_dict(self) -> dict:
        return {
            "format": MLP_FORMAT,
            "version": MLP_FORMAT_VERSION,
            "layers": [
                {
                    "activation": layer.activation,
                    "weights": layer.weights.tolist(),
                    "biases": layer.biases.tolist(),
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Mlp":
        if payload.get("format") != MLP_FORMAT:
            raise DataError(f"not an mlp payload: format={payload.get('format')!r}")
        if payload.get("version") != MLP_FORMAT_VERSION:
            raise DataError(
                f"unsupported mlp format version {payload.get('version')!r}; "
                f"this build reads version {MLP_FORMAT_VERSION}"
            )
        return cls([
            DenseLayer(spec["weights"], spec["biases"], spec["activation"])
            for spec in payload["layers"]
        ])

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def save_mlp(net: Mlp, path) -> None:
    write_json(net.to_dict(), path)


def load_mlp(path) -> Mlp:
    return Mlp.from_dict(read_json(path))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for minibatch training.

    ``batch_size`` may exceed the data set size; the final (or only) batch
    is then partial.  ``learning_rate`` 0 freezes parameters, which is
    useful for ablations.  adam moments follow the standard bias-corrected
    update.
    """

    seed: int = 0
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 100
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not np.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise ConfigError(
                f"learning_rate must be finite and >= 0, got {self.learning_rate!r}"
            )
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(
                f"unknown optimizer {self.optimizer!r}; expected one of {OPTIMIZERS}"
            )
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0):
                raise ConfigError(f"{name} must lie in [0, 1), got {value!r}")
        if not (self.eps > 0.0):
            raise ConfigError(f"eps must be positive, got {self.eps!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown TrainConfig keys: {sorted(unknown)}")
        return cls(**payload)

    def with_learning_rate(self, learning_rate: float) -> "TrainConfig":
        return dataclasses.replace(self, learning_rate=learning_rate)

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


class OptimizerState:
    """Per-network optimizer state: step count plus adam moments."""

    def __init__(self, t: int = 0, m=None, v=None):
        self.t = t
        self.m = m
        self.v = v

    @classmethod
    def for_net(cls, net: Mlp, config: TrainConfig) -> "OptimizerState":
        if config.optimizer == "sgd":
            return cls()
        zeros = lambda layer: (np.zeros_like(layer.weights), np.zeros_like(layer.biases))
        return cls(
            m=[zeros(layer) for layer in net.layers],
            v=[zeros(layer) for layer in net.layers],
        )


def loss_and_grad(kind: str, outputs, targets):
    """Mean loss over all output elements, plus its gradient w.r.t. outputs.

    Both losses reduce by the mean over batch rows and output columns.  For
    bce the outputs are clamped to [BCE_CLAMP, 1 - BCE_CLAMP] before the log
    terms, so out-of-range or saturated outputs stay finite.
    """
    y = np.asarray(outputs, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if y.shape != t.shape:
        raise DataError(f"outputs have shape {y.shape} but targets {t.shape}")
    if y.size == 0:
        raise DataError("cannot evaluate a loss on an empty batch")
    scale = float(y.size)
    if kind == "mse":
        diff = y - t
        return float(np.mean(diff * diff)), (2.0 / scale) * diff
    if kind == "bce":
        p = np.clip(y, BCE_CLAMP, 1.0 - BCE_CLAMP)
        value = float(-np.mean(t * np.log(p) + (1.0 - t) * np.log1p(-p)))
        grad = (p - t) / (p * (1.0 - p) * scale)
        return value, grad
    raise ConfigError(f"unknown loss {kind!r}; expected one of {LOSS_KINDS}")


def forward(net: Mlp, batch) -> np.ndarray:
    """Run a batch (rows are samples) through the network."""
    return net.forward(batch)


def backward(net: Mlp, batch, loss: str, targets):
    """Loss value and parameter gradients for one batch.

    Returns (loss_value, grads) with grads as one (d_weights, d_biases)
    pair per layer, mean-reduced like the loss.
    """
    pres, posts = net.forward_trace(batch)
    value, upstream = loss_and_grad(loss, posts[-1], targets)
    grads, _ = net.backprop(pres, posts, upstream)
    return value, grads


def _check_grads(net: Mlp, grads) -> None:
    if len(grads) != len(net.layers):
        raise DataError(
            f"got gradients for {len(grads)} layers, network has {len(net.layers)}"
        )
    for i, ((dw, db), layer) in enumerate(zip(grads, net.layers)):
        if dw.shape != layer.weights.shape or db.shape != layer.biases.shape:
            raise DataError(
                f"gradient shapes {dw.shape}/{db.shape} do not match layer {i} "
                f"parameters {layer.weights.shape}/{layer.biases.shape}"
            )
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            raise NumericalError(f"non-finite gradient in layer {i}")


def step(net: Mlp, grads, config: TrainConfig, state: OptimizerState):
    """Apply one optimizer step in place.  Returns (net, state).

    Raises NumericalError naming the offending layer if a gradient or a
    resulting parameter is non-finite.
    """
    _check_grads(net, grads)
    state.t += 1
    lr = config.learning_rate
    if config.optimizer == "sgd":
        for (dw, db), layer in zip(grads, net.layers):
            layer.weights -= lr * dw
            layer.biases -= lr * db
    else:
        b1, b2, eps = config.beta1, config.beta2, config.eps
        bias1 = 1.0 - b1 ** state.t
        bias2 = 1.0 - b2 ** state.t
        for i, ((dw, db), layer) in enumerate(zip(grads, net.layers)):
            mw, mb = state.m[i]
            vw, vb = state.v[i]
            mw *= b1
            mw += (1.0 - b1) * dw
            mb *= b1
            mb += (1.0 - b1) * db
            vw *= b2
            vw += (1.0 - b2) * dw * dw
            vb *= b2
            vb += (1.0 - b2) * db * db
            layer.weights -= lr * (mw / bias1) / (np.sqrt(vw / bias2) + eps)
            layer.biases -= lr * (mb / bias1) / (np.sqrt(vb / bias2) + eps)
    for i, layer in enumerate(net.layers):
        if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.biases))):
            raise NumericalError(f"non-finite parameters in layer {i} after optimizer step")
    return net, state
