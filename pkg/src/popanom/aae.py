"""Adversarial autoencoder: learn an invertible gaussianization.

The encoder maps the k-dimensional feature space to an m-dimensional
latent space, the decoder maps back, and a discriminator is trained to
tell encoded data from draws of the N(0, I_m) prior.  Each minibatch
runs three phases: reconstruction (encoder + decoder), discriminator
(prior labelled 1, encoded batch labelled 0), and regularization (the
encoder is updated to make the discriminator emit 1 on encoded data).
After training, the encoder carries the anticipated distribution onto
the prior, which is what makes per-dimension normality testing of new
data meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset, FeatureSchema
from .detect import LatentProjection, ks_critical_value, ks_one_sample_normal
from .errors import ConfigError, DataError, NumericalError
from .nn import (
    LOSS_KINDS,
    Mlp,
    OptimizerState,
    TrainConfig,
    backward,
    loss_and_grad,
    step,
)
from .serialize import canonical_digest, read_json, write_json

BUNDLE_FORMAT = "aae-bundle"
BUNDLE_FORMAT_VERSION = 1

# Gate on gaussianization quality: every latent dimension of the training
# projection must have KS distance below GATE_SLACK times the 1% critical
# value.  The slack absorbs the gap between an adversarially trained
# encoder and an exact normal sample.
GATE_SLACK = 2.0
GATE_SIGNIFICANCE = 0.01

# The adversarial phases default to a fraction of the reconstruction
# rate: at equal rates the discriminator/generator game orbits faster
# than it converges on smooth data.  Discrete data (one-hot blocks) wants
# fractions of 1.0 instead; both are exposed on train_aae.
DISC_LR_FRACTION = 0.5
GEN_LR_FRACTION = 0.25

# Weight-averaging horizon for the shipped networks.  The adversarial
# game settles into a limit cycle around its equilibrium; an exponential
# moving average sits near the cycle's center, which projects closer to
# the prior than any single orbit state.
EMA_DECAY = 0.999

_DEGENERATE_SPREAD = 1e-12


def default_train_config(seed: int = 0) -> TrainConfig:
    """Training defaults: adam(0.9, 0.999, 1e-8), lr 1e-3, batch 128, 100 epochs."""
    return TrainConfig(seed=seed)


@dataclass
class AaeModel:
    """Trained encoder/decoder/discriminator plus everything needed to
    reproduce the featurization that fed them."""

    encoder: Mlp
    decoder: Mlp
    discriminator: Mlp
    latent_dim: int
    recon_loss: str
    feature_schema: FeatureSchema
    train_config: TrainConfig

    def __post_init__(self):
        k = self.feature_schema.expanded_width
        m = self.latent_dim
        if self.recon_loss not in LOSS_KINDS:
            raise ConfigError(
                f"unknown reconstruction loss {self.recon_loss!r}; "
                f"expected one of {LOSS_KINDS}"
            )
        if m < 1:
            raise ConfigError(f"latent_dim must be positive, got {m}")
        if self.encoder.in_size != k or self.encoder.out_size != m:
            raise DataError(
                f"encoder maps {self.encoder.in_size} -> {self.encoder.out_size}, "
                f"expected {k} -> {m}"
            )
        if self.decoder.in_size != m or self.decoder.out_size != k:
            raise DataError(
                f"decoder maps {self.decoder.in_size} -> {self.decoder.out_size}, "
                f"expected {m} -> {k}"
            )
        if self.discriminator.in_size != m or self.discriminator.out_size != 1:
            raise DataError(
                f"discriminator maps {self.discriminator.in_size} -> "
                f"{self.discriminator.out_size}, expected {m} -> 1"
            )

    @property
    def input_dim(self) -> int:
        return self.feature_schema.expanded_width

    def to_dict(self) -> dict:
        return {
            "format": BUNDLE_FORMAT,
            "version": BUNDLE_FORMAT_VERSION,
            "latent_dim": self.latent_dim,
            "recon_loss": self.recon_loss,
            "encoder": self.encoder.to_dict(),
            "decoder": self.decoder.to_dict(),
            "discriminator": self.discriminator.to_dict(),
            "feature_schema": self.feature_schema.to_dict(),
            "train_config": self.train_config.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AaeModel":
        if payload.get("format") != BUNDLE_FORMAT:
            raise DataError(f"not a model bundle: format={payload.get('format')!r}")
        if payload.get("version") != BUNDLE_FORMAT_VERSION:
            raise DataError(
                f"unsupported bundle version {payload.get('version')!r}; "
                f"this build reads version {BUNDLE_FORMAT_VERSION}"
            )
        return cls(
            encoder=Mlp.from_dict(payload["encoder"]),
            decoder=Mlp.from_dict(payload["decoder"]),
            discriminator=Mlp.from_dict(payload["discriminator"]),
            latent_dim=payload["latent_dim"],
            recon_loss=payload["recon_loss"],
            feature_schema=FeatureSchema.from_dict(payload["feature_schema"]),
            train_config=TrainConfig.from_dict(payload["train_config"]),
        )

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def save_bundle(model: AaeModel, path) -> None:
    write_json(model.to_dict(), path)


def load_bundle(path) -> AaeModel:
    return AaeModel.from_dict(read_json(path))


@dataclass
class AaeTrainingLog:
    """Per-epoch loss trail plus the final training-projection KS check.

    ``train_ks`` records, per epoch, the worst (max over latent dims) KS
    distance of the candidate networks' training projection; ``best_epoch``
    is the epoch whose candidate was shipped.  ``final_train_ks`` holds the
    per-dimension KS of the shipped encoder.
    """

    reconstruction: list = field(default_factory=list)
    discriminator: list = field(default_factory=list)
    generator: list = field(default_factory=list)
    train_ks: list = field(default_factory=list)
    best_epoch: int = -1
    final_train_ks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "reconstruction": self.reconstruction,
            "discriminator": self.discriminator,
            "generator": self.generator,
            "train_ks": self.train_ks,
            "best_epoch": self.best_epoch,
            "final_train_ks": self.final_train_ks,
            "warnings": self.warnings,
        }

    def save(self, path) -> None:
        write_json(self.to_dict(), path)


class AaeOptimizerStates:
    """Independent optimizer states for the three training phases.

    The encoder appears twice on purpose: its reconstruction role and its
    generator role keep separate adam moments, as do the decoder and the
    discriminator.
    """

    def __init__(self, model: AaeModel, config: TrainConfig):
        self.encoder_recon = OptimizerState.for_net(model.encoder, config)
        self.decoder_recon = OptimizerState.for_net(model.decoder, config)
        self.discriminator = OptimizerState.for_net(model.discriminator, config)
        self.encoder_gen = OptimizerState.for_net(model.encoder, config)


class AveragedNets:
    """Exponential moving average of all three networks' parameters.

    Averaging the whole triple keeps the shipped encoder/decoder a
    consistent pair; updates happen once per minibatch.
    """

    def __init__(self, model: AaeModel, decay: float):
        if not 0.0 < decay < 1.0:
            raise ConfigError(f"ema decay must be in (0, 1), got {decay}")
        self.decay = decay
        self.encoder = model.encoder.copy()
        self.decoder = model.decoder.copy()
        self.discriminator = model.discriminator.copy()

    def nets(self):
        return self.encoder, self.decoder, self.discriminator

    def update(self, model: AaeModel) -> None:
        keep = self.decay
        blend = 1.0 - keep
        for avg, live in zip(self.nets(),
                             (model.encoder, model.decoder, model.discriminator)):
            for a, b in zip(avg.layers, live.layers):
                a.weights *= keep
                a.weights += blend * b.weights
                a.biases *= keep
                a.biases += blend * b.biases


def build_networks(input_dim: int, latent_dim: int, recon_loss: str,
                   rng: np.random.Generator, hidden: Optional[int] = None,
                   disc_hidden: int = 32):
    """Default architecture.

    Encoder and decoder use two relu hidden layers of width ``hidden``,
    defaulting to max(32, 4 * latent_dim); the encoder head is linear,
    the decoder head linear for mse and sigmoid for bce.  The
    discriminator uses two relu hidden layers of width ``disc_hidden``
    and a sigmoid head; discrete inputs (one-hot blocks) benefit from a
    wider, sharper discriminator than the smooth-data default.  Networks
    are built in encoder, decoder, discriminator order from the supplied
    generator.
    """
    if input_dim < 1:
        raise ConfigError(f"input_dim must be positive, got {input_dim}")
    if latent_dim < 1:
        raise ConfigError(f"latent_dim must be positive, got {latent_dim}")
    if recon_loss not in LOSS_KINDS:
        raise ConfigError(
            f"unknown reconstruction loss {recon_loss!r}; expected one of {LOSS_KINDS}"
        )
    h = max(32, 4 * latent_dim) if hidden is None else hidden
    if h < 1 or disc_hidden < 1:
        raise ConfigError(
            f"hidden widths must be positive, got {h} and {disc_hidden}"
        )
    encoder = Mlp.build([input_dim, h, h, latent_dim],
                        ["relu", "relu", "identity"], rng)
    decoder_head = "sigmoid" if recon_loss == "bce" else "identity"
    decoder = Mlp.build([latent_dim, h, h, input_dim],
                        ["relu", "relu", decoder_head], rng)
    discriminator = Mlp.build([latent_dim, disc_hidden, disc_hidden, 1],
                              ["relu", "relu", "sigmoid"], rng)
    return encoder, decoder, discriminator


def _train_minibatch(model: AaeModel, batch: np.ndarray,
                     states: AaeOptimizerStates, rng: np.random.Generator,
                     recon_config: TrainConfig, disc_config: TrainConfig,
                     gen_config: TrainConfig):
    m = model.latent_dim
    b = batch.shape[0]

    # Phase 1: reconstruction.  Gradients flow from the decoder output
    # back through the latent code into the encoder.
    enc_pres, enc_posts = model.encoder.forward_trace(batch)
    dec_pres, dec_posts = model.decoder.forward_trace(enc_posts[-1])
    recon_value, upstream = loss_and_grad(model.recon_loss, dec_posts[-1], batch)
    dec_grads, d_latent = model.decoder.backprop(dec_pres, dec_posts, upstream)
    enc_grads, _ = model.encoder.backprop(enc_pres, enc_posts, d_latent)
    step(model.decoder, dec_grads, recon_config, states.decoder_recon)
    step(model.encoder, enc_grads, recon_config, states.encoder_recon)

    # Phase 2: discriminator.  Fresh prior draws get label 1, the freshly
    # encoded batch label 0.
    prior = rng.standard_normal((b, m))
    encoded = model.encoder.forward(batch)
    disc_batch = np.vstack([prior, encoded])
    disc_targets = np.vstack([np.ones((b, 1)), np.zeros((b, 1))])
    disc_value, disc_grads = backward(model.discriminator, disc_batch, "bce", disc_targets)
    step(model.discriminator, disc_grads, disc_config, states.discriminator)

    # Phase 3: regularization.  The encoder is pushed to make the frozen
    # discriminator output 1 on encoded data; discriminator gradients are
    # computed only to reach the latent code and are discarded.
    enc_pres, enc_posts = model.encoder.forward_trace(batch)
    disc_pres, disc_posts = model.discriminator.forward_trace(enc_posts[-1])
    gen_value, upstream = loss_and_grad("bce", disc_posts[-1], np.ones((b, 1)))
    _, d_latent = model.discriminator.backprop(disc_pres, disc_posts, upstream)
    enc_grads, _ = model.encoder.backprop(enc_pres, enc_posts, d_latent)
    step(model.encoder, enc_grads, gen_config, states.encoder_gen)

    return recon_value, disc_value, gen_value


def adversarial_epoch(model: AaeModel, features, config: TrainConfig,
                      states: AaeOptimizerStates, rng: np.random.Generator,
                      recon_lr: Optional[float] = None,
                      disc_lr: Optional[float] = None,
                      gen_lr: Optional[float] = None,
                      averaged: Optional[AveragedNets] = None):
    """One shuffled pass over the data, three phases per minibatch.

    Returns mean (reconstruction, discriminator, generator) losses over
    the epoch's minibatches.  The per-phase learning-rate overrides exist
    for ablations such as freezing the discriminator with rate 0.  When
    ``averaged`` is given it is folded toward the live weights after every
    minibatch.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError(f"features must be a nonempty 2-D matrix, got shape {x.shape}")
    recon_config = config if recon_lr is None else config.with_learning_rate(recon_lr)
    disc_config = config if disc_lr is None else config.with_learning_rate(disc_lr)
    gen_config = config if gen_lr is None else config.with_learning_rate(gen_lr)
    order = rng.permutation(x.shape[0])
    totals = np.zeros(3)
    batches = 0
    for start in range(0, x.shape[0], config.batch_size):
        batch = x[order[start:start + config.batch_size]]
        values = _train_minibatch(model, batch, states, rng,
                                  recon_config, disc_config, gen_config)
        if not np.all(np.isfinite(values)):
            raise NumericalError(
                f"non-finite loss in minibatch {batches}: "
                f"recon={values[0]!r} disc={values[1]!r} gen={values[2]!r}"
            )
        if averaged is not None:
            averaged.update(model)
        totals += values
        batches += 1
    return tuple(totals / batches)


def train_aae(train_set: Dataset, latent_dim: int, recon_loss: str = "mse",
              config: Optional[TrainConfig] = None,
              rng: Optional[np.random.Generator] = None,
              disc_lr_fraction: float = DISC_LR_FRACTION,
              gen_lr_fraction: float = GEN_LR_FRACTION,
              anneal: bool = True,
              ema_decay: Optional[float] = EMA_DECAY,
              select_best: bool = True,
              hidden: Optional[int] = None,
              disc_hidden: int = 32):
    """Train an adversarial autoencoder on anticipated data.

    Returns (model, log).  All randomness (init, shuffling, prior draws)
    comes from ``rng``, which defaults to a generator seeded with
    ``config.seed``; identical inputs therefore give bit-identical models.
    bce reconstruction requires features inside [0, 1].

    The adversarial phases run at ``disc_lr_fraction`` and
    ``gen_lr_fraction`` of the reconstruction rate; ``anneal`` applies a
    cosine schedule 0.5 * (1 + cos(pi * epoch / epochs)) to all three
    phases.  With ``ema_decay`` set, candidate networks are an
    exponential moving average of the live weights; ``select_best`` ships
    the epoch whose candidate projection scored the lowest worst-dimension
    KS distance on the training data.  Set ema_decay=None, anneal=False,
    select_best=False for the raw, constant-rate game.  ``hidden`` and
    ``disc_hidden`` size the networks as in build_networks.
    """
    if train_set.n == 0:
        raise DataError("cannot train on an empty dataset")
    if latent_dim < 1:
        raise ConfigError(f"latent_dim must be positive, got {latent_dim}")
    if recon_loss not in LOSS_KINDS:
        raise ConfigError(
            f"unknown reconstruction loss {recon_loss!r}; expected one of {LOSS_KINDS}"
        )
    for label, fraction in (("disc_lr_fraction", disc_lr_fraction),
                            ("gen_lr_fraction", gen_lr_fraction)):
        if not np.isfinite(fraction) or fraction < 0.0:
            raise ConfigError(f"{label} must be finite and >= 0, got {fraction}")
    x = train_set.features
    if recon_loss == "bce" and (x.min() < 0.0 or x.max() > 1.0):
        raise DataError(
            f"bce reconstruction needs features in [0, 1]; data spans "
            f"[{x.min():.6g}, {x.max():.6g}]"
        )
    config = config or default_train_config()
    rng = rng or np.random.default_rng(config.seed)

    encoder, decoder, discriminator = build_networks(
        train_set.width, latent_dim, recon_loss, rng,
        hidden=hidden, disc_hidden=disc_hidden)
    model = AaeModel(
        encoder=encoder,
        decoder=decoder,
        discriminator=discriminator,
        latent_dim=latent_dim,
        recon_loss=recon_loss,
        feature_schema=train_set.schema,
        train_config=config,
    )
    states = AaeOptimizerStates(model, config)
    averaged = None if ema_decay is None else AveragedNets(model, ema_decay)
    log = AaeTrainingLog()
    if float(x.std(axis=0).max()) < _DEGENERATE_SPREAD:
        log.warnings.append(
            "training data is degenerate (every feature is constant); "
            "the latent projection cannot match the prior"
        )
    best_ks = np.inf
    best_nets = None
    for epoch in range(config.epochs):
        scale = (0.5 * (1.0 + float(np.cos(np.pi * epoch / config.epochs)))
                 if anneal else 1.0)
        lr = config.learning_rate * scale
        try:
            recon, disc, gen = adversarial_epoch(
                model, x, config, states, rng,
                recon_lr=lr,
                disc_lr=lr * disc_lr_fraction,
                gen_lr=lr * gen_lr_fraction,
                averaged=averaged,
            )
        except NumericalError as exc:
            raise NumericalError(f"epoch {epoch}: {exc}") from exc
        log.reconstruction.append(recon)
        log.discriminator.append(disc)
        log.generator.append(gen)
        candidate = averaged.encoder if averaged is not None else model.encoder
        z = candidate.forward(x)
        epoch_ks = max(
            ks_one_sample_normal(z[:, j])[0] for j in range(latent_dim)
        )
        log.train_ks.append(epoch_ks)
        if select_best and epoch_ks < best_ks:
            best_ks = epoch_ks
            if averaged is not None:
                best_nets = tuple(net.copy() for net in averaged.nets())
            else:
                best_nets = (model.encoder.copy(), model.decoder.copy(),
                             model.discriminator.copy())
            log.best_epoch = epoch
    if select_best and best_nets is not None:
        model.encoder, model.decoder, model.discriminator = best_nets
    else:
        log.best_epoch = config.epochs - 1
        if averaged is not None:
            model.encoder, model.decoder, model.discriminator = averaged.nets()
    projection = model.encoder.forward(x)
    log.final_train_ks = [
        ks_one_sample_normal(projection[:, j])[0] for j in range(latent_dim)
    ]
    return model, log


def encode(model: AaeModel, data: Dataset) -> LatentProjection:
    """Project a dataset into latent space with the frozen encoder.

    An empty dataset gives an empty projection.  The dataset must carry
    the same feature schema the model was trained with.
    """
    if data.width != model.input_dim:
        raise DataError(
            f"dataset has {data.width} feature columns but the model expects "
            f"{model.input_dim}"
        )
    if data.schema.digest() != model.feature_schema.digest():
        raise DataError(
            f"dataset schema {data.schema.digest()[:12]} does not match the "
            f"model's schema {model.feature_schema.digest()[:12]}"
        )
    return LatentProjection(
        z=model.encoder.forward(data.features) if data.n else
          np.zeros((0, model.latent_dim)),
        source=data.label(),
        model=model.digest()[:12],
    )


def decode(model: AaeModel, z) -> Dataset:
    """Map latent points back to feature space.

    Accepts a LatentProjection or a plain (n, m) array; returns a Dataset
    in the model's feature space with no original records attached.
    """
    points = z.z if isinstance(z, LatentProjection) else np.asarray(z, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != model.latent_dim:
        raise DataError(
            f"latent points have shape {points.shape}, expected "
            f"(n, {model.latent_dim})"
        )
    features = (model.decoder.forward(points) if points.shape[0]
                else np.zeros((0, model.input_dim)))
    return Dataset(features=features, schema=model.feature_schema, records=None)


def gaussianization_gate(projection: LatentProjection,
                         significance: float = GATE_SIGNIFICANCE,
                         slack: float = GATE_SLACK):
    """Check how close a projection is to the N(0, I_m) target.

    Returns (passed, per_dim_ks, threshold) where threshold is
    slack * the asymptotic KS critical value at the given significance.
    """
    per_dim = np.array([
        ks_one_sample_normal(projection.z[:, j])[0] for j in range(projection.dim)
    ])
    threshold = slack * ks_critical_value(projection.n, significance)
    return bool(np.all(per_dim < threshold)), per_dim, threshold
