"""Synthetic data with known ground truth, plus a DNS exfiltration emulator.

Ground-truth mixtures pair an anticipated distribution P0 with an
anomalous component P1 at mixing weight gamma; because both densities
are evaluable, every sampled record carries its exact posterior anomaly
probability, the quantity the ranking stage estimates.  The exfiltration
emulator rewrites the leftmost label of a fraction of domain names with
uniform random characters, which preserves every length statistic while
shifting the character distribution.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import DOMAIN_ALPHABET, Dataset, FeatureSchema, FieldSpec, featurize
from .errors import ConfigError, DataError
from .words import WORDS

# Characters legal inside a domain label: letters, digits, dash.  The dot
# is excluded on purpose: a dot inside the replacement would change the
# label structure the emulator promises to preserve.
LABEL_CHARS = string.ascii_lowercase + string.ascii_uppercase + string.digits + "-"

_TINY = 1e-300


class DiagonalGaussian:
    """Axis-aligned Gaussian over named continuous fields."""

    def __init__(self, names: Sequence[str], mean: Sequence[float],
                 scale: Sequence[float]):
        self.names = tuple(names)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        if not (len(self.names) == self.mean.size == self.scale.size):
            raise ConfigError("names, mean, and scale must have equal lengths")
        if np.any(self.scale <= 0):
            raise ConfigError(f"scales must be positive, got {self.scale.tolist()}")

    def sample_records(self, n: int, rng: np.random.Generator) -> list:
        x = rng.standard_normal((n, self.mean.size)) * self.scale + self.mean
        return _rows_to_records(self.names, x)

    def density_records(self, records: Sequence[dict]) -> np.ndarray:
        x = _records_to_rows(self.names, records)
        t = (x - self.mean) / self.scale
        log_norm = np.sum(np.log(self.scale * math.sqrt(2.0 * math.pi)))
        return np.exp(-0.5 * np.sum(t * t, axis=1) - log_norm)


class ArcGaussian:
    """Noisy circular arc: angle uniform on [lo, hi], radius N(r, s).

    Angle ranges must stay inside (-pi, pi] without wrapping, which the
    bundled fixtures respect.
    """

    def __init__(self, names: Sequence[str], center: Sequence[float],
                 radius: float, radial_scale: float, angle_range):
        self.names = tuple(names)
        if len(self.names) != 2:
            raise ConfigError("an arc lives in exactly two named dimensions")
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.radial_scale = float(radial_scale)
        lo, hi = angle_range
        if not (lo < hi):
            raise ConfigError(f"empty angle range ({lo}, {hi})")
        self.angle_range = (float(lo), float(hi))
        if radius <= 0 or radial_scale <= 0:
            raise ConfigError("radius and radial_scale must be positive")

    def sample_records(self, n: int, rng: np.random.Generator) -> list:
        lo, hi = self.angle_range
        theta = rng.uniform(lo, hi, size=n)
        rho = self.radius + self.radial_scale * rng.standard_normal(n)
        x = np.column_stack([
            self.center[0] + rho * np.cos(theta),
            self.center[1] + rho * np.sin(theta),
        ])
        return _rows_to_records(self.names, x)

    def density_records(self, records: Sequence[dict]) -> np.ndarray:
        # Polar change of variables: f(x) = f_theta(theta) f_rho(rho) / rho.
        x = _records_to_rows(self.names, records) - self.center
        rho = np.sqrt(np.sum(x * x, axis=1))
        theta = np.arctan2(x[:, 1], x[:, 0])
        lo, hi = self.angle_range
        t = (rho - self.radius) / self.radial_scale
        radial = np.exp(-0.5 * t * t) / (self.radial_scale * math.sqrt(2.0 * math.pi))
        density = radial / ((hi - lo) * np.maximum(rho, _TINY))
        density[(theta < lo) | (theta > hi)] = 0.0
        return density


class ComponentMixture:
    """Weighted mixture of components sharing the same field names."""

    def __init__(self, components: Sequence, weights: Sequence[float]):
        if len(components) != len(weights) or not components:
            raise ConfigError("components and weights must be nonempty and equal length")
        weights = np.asarray(weights, dtype=np.float64)
        if np.any(weights <= 0) or not np.isclose(weights.sum(), 1.0):
            raise ConfigError(f"weights must be positive and sum to 1, got {weights.tolist()}")
        names = {c.names for c in components}
        if len(names) != 1:
            raise ConfigError(f"components disagree on field names: {sorted(names)}")
        self.components = list(components)
        self.weights = weights
        self.names = components[0].names

    def sample_records(self, n: int, rng: np.random.Generator) -> list:
        choice = rng.choice(len(self.components), size=n, p=self.weights)
        records: list = [None] * n
        for c, component in enumerate(self.components):
            rows = np.flatnonzero(choice == c)
            if rows.size:
                drawn = component.sample_records(rows.size, rng)
                for row, record in zip(rows, drawn):
                    records[row] = record
        return records

    def density_records(self, records: Sequence[dict]) -> np.ndarray:
        total = np.zeros(len(records))
        for w, component in zip(self.weights, self.components):
            total += w * component.density_records(records)
        return total


class IndependentCategorical:
    """Product of independent categorical fields with explicit pmfs."""

    def __init__(self, fields_: Sequence):
        # fields_: sequence of (name, vocabulary, probabilities)
        if not fields_:
            raise ConfigError("at least one categorical field is required")
        parsed = []
        for name, vocab, probs in fields_:
            vocab = tuple(vocab)
            probs = np.asarray(probs, dtype=np.float64)
            if len(vocab) != probs.size:
                raise ConfigError(f"field {name!r}: vocabulary and pmf lengths differ")
            if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0):
                raise ConfigError(f"field {name!r}: pmf must be nonnegative and sum to 1")
            parsed.append((name, vocab, probs))
        self.fields = parsed
        self.names = tuple(name for name, _, _ in parsed)

    def sample_records(self, n: int, rng: np.random.Generator) -> list:
        columns = {}
        for name, vocab, probs in self.fields:
            draws = rng.choice(len(vocab), size=n, p=probs)
            columns[name] = [vocab[d] for d in draws]
        return [{name: columns[name][i] for name in self.names} for i in range(n)]

    def density_records(self, records: Sequence[dict]) -> np.ndarray:
        out = np.ones(len(records))
        for name, vocab, probs in self.fields:
            lookup = {v: p for v, p in zip(vocab, probs)}
            out *= np.array([lookup.get(str(r[name]), 0.0) for r in records])
        return out


def _rows_to_records(names, x) -> list:
    return [
        {name: float(value) for name, value in zip(names, row)}
        for row in x
    ]


def _records_to_rows(names, records) -> np.ndarray:
    return np.array([[float(r[name]) for name in names] for r in records], dtype=np.float64)


@dataclass
class GroundTruthMixture:
    """Evaluation distribution P' = (1 - gamma) P0 + gamma P1.

    P0 is the anticipated distribution, P1 the anomalous component; both
    must expose ``sample_records`` and ``density_records`` over the same
    fields.  ``schema`` fixes how sampled records featurize.
    """

    p0: object
    p1: object
    gamma: float
    schema: FeatureSchema

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma!r}")
        if tuple(self.p0.names) != tuple(self.p1.names):
            raise ConfigError(
                f"P0 fields {self.p0.names} do not match P1 fields {self.p1.names}"
            )

    def sample_background(self, n: int, rng: np.random.Generator,
                          bucket_key: Optional[str] = None) -> Dataset:
        """Pure P0 draws: the training set for the anticipated distribution."""
        return featurize(self.schema, self.p0.sample_records(n, rng),
                         bucket_key=bucket_key)


@dataclass
class MixtureSample:
    """A sampled evaluation set with its ground truth attached.

    ``true_alpha[i]`` is the exact posterior anomaly probability
    gamma f1 / ((1 - gamma) f0 + gamma f1) of row i; ``labels[i]`` records
    which component actually generated the row.
    """

    dataset: Dataset
    labels: np.ndarray
    true_alpha: np.ndarray


def sample_mixture(mixture: GroundTruthMixture, n: int,
                   rng: np.random.Generator) -> MixtureSample:
    """Draw n evaluation records and their exact anomaly posteriors."""
    if n < 1:
        raise ConfigError(f"sample size must be positive, got {n}")
    labels = rng.random(n) < mixture.gamma
    records: list = [None] * n
    for is_anomalous, component in ((False, mixture.p0), (True, mixture.p1)):
        rows = np.flatnonzero(labels == is_anomalous)
        if rows.size:
            drawn = component.sample_records(rows.size, rng)
            for row, record in zip(rows, drawn):
                records[row] = record
    f0 = mixture.p0.density_records(records)
    f1 = mixture.p1.density_records(records)
    support = (1.0 - mixture.gamma) * f0 + mixture.gamma * f1
    # Every emitted record came from one of the two components, so the
    # mixture density cannot vanish at it.
    assert np.all(support > 0.0), "sampled record fell outside both supports"
    true_alpha = mixture.gamma * f1 / support
    return MixtureSample(
        dataset=featurize(mixture.schema, records),
        labels=labels,
        true_alpha=true_alpha,
    )


def _continuous_schema(names: Sequence[str]) -> FeatureSchema:
    return FeatureSchema(tuple(
        FieldSpec(name=name, kind="continuous") for name in names
    ))


def mixture_gaussian_clusters(gamma: float = 0.1,
                              shift: Sequence[float] = (1.0, 1.0),
                              p1_scale: float = 0.5) -> GroundTruthMixture:
    """2-D Gaussian background with a compact shifted anomalous cluster.

    P0 = N(0, I); P1 = N(shift, p1_scale^2 I).  The default one-sigma
    shift with a tighter cluster is the canonical population anomaly:
    every anomalous sample sits well inside P0's bulk.
    """
    names = ("x0", "x1")
    return GroundTruthMixture(
        p0=DiagonalGaussian(names, (0.0, 0.0), (1.0, 1.0)),
        p1=DiagonalGaussian(names, tuple(shift), (p1_scale, p1_scale)),
        gamma=gamma,
        schema=_continuous_schema(names),
    )


def mixture_separated_cluster(gamma: float = 0.1) -> GroundTruthMixture:
    """2-D Gaussian background with a clearly separated anomalous cluster,
    for exercising ranking where ground truth is nearly 0/1."""
    return mixture_gaussian_clusters(gamma=gamma, shift=(3.0, 3.0), p1_scale=0.5)


def two_moons_background() -> ComponentMixture:
    """Equal-weight pair of interleaved arcs; a bimodal, curved P0 that a
    linear map cannot gaussianize."""
    names = ("x0", "x1")
    upper = ArcGaussian(names, center=(0.0, 0.0), radius=1.0,
                        radial_scale=0.15, angle_range=(0.0, math.pi))
    lower = ArcGaussian(names, center=(1.0, 0.5), radius=1.0,
                        radial_scale=0.15, angle_range=(-math.pi, 0.0))
    return ComponentMixture([upper, lower], [0.5, 0.5])


def mixture_two_arcs(gamma: float = 0.1) -> GroundTruthMixture:
    """Two-moons background contaminated by a third arc between the moons."""
    names = ("x0", "x1")
    anomaly = ArcGaussian(names, center=(0.5, 0.25), radius=0.4,
                          radial_scale=0.1, angle_range=(0.0, math.pi))
    return GroundTruthMixture(
        p0=two_moons_background(),
        p1=anomaly,
        gamma=gamma,
        schema=_continuous_schema(names),
    )


_CAT_VOCABS = (("f0", ("a", "b")),
               ("f1", ("p", "q", "r")),
               ("f2", ("u", "v", "w")))


def categorical_background() -> IndependentCategorical:
    """Three uniform categorical fields (2, 3, 3 values): 8 one-hot columns.

    The 18 equally likely field combinations keep every atom of the
    distribution small enough that a 1-D latent projection can in
    principle track the normal CDF closely (best possible KS distance is
    half the largest atom mass, about 0.028 at this shape).
    """
    return IndependentCategorical([
        (name, vocab, tuple(1.0 / len(vocab) for _ in vocab))
        for name, vocab in _CAT_VOCABS
    ])


def categorical_schema() -> FeatureSchema:
    """Schema matching categorical_background: 8 expanded columns."""
    return FeatureSchema(tuple(
        FieldSpec(name=name, kind="categorical", vocabulary=vocab)
        for name, vocab in _CAT_VOCABS
    ))


def mixture_categorical_shift(gamma: float = 0.1) -> GroundTruthMixture:
    """Uniform categorical background with a frequency-skewed anomaly.

    P1 concentrates on a few field combinations; each anomalous record is
    individually unremarkable, only the frequencies shift.
    """
    p0 = categorical_background()
    p1 = IndependentCategorical([
        ("f0", _CAT_VOCABS[0][1], (0.9, 0.1)),
        ("f1", _CAT_VOCABS[1][1], (0.8, 0.1, 0.1)),
        ("f2", _CAT_VOCABS[2][1], (0.1, 0.1, 0.8)),
    ])
    return GroundTruthMixture(p0=p0, p1=p1, gamma=gamma,
                              schema=categorical_schema())


@dataclass(frozen=True)
class DomainProfile:
    """Shape of generated benign domains.

    ``case_flip_rate`` uppercases each letter independently, mimicking
    the mixed-case queries that resolver 0x20 randomization leaves in
    real traces; without it the uppercase count columns are constant
    zero and carry no training signal.
    """

    tlds: tuple = ("com", "net", "org", "io", "co", "info")
    label_count_weights: tuple = (0.55, 0.35, 0.10)  # 2, 3, 4 labels
    hyphen_rate: float = 0.08
    digit_suffix_rate: float = 0.06
    case_flip_rate: float = 0.02


DEFAULT_PROFILE = DomainProfile()


def generate_domains(n: int, rng: np.random.Generator,
                     profile: DomainProfile = DEFAULT_PROFILE) -> list:
    """Plausible benign domain names from the bundled wordlist.

    2 to 4 labels, wordlist labels with occasional hyphenation, digit
    suffixes, and case flips, common TLD mix.  Deterministic given the
    generator.
    """
    if n < 1:
        raise ConfigError(f"number of domains must be positive, got {n}")
    domains = []
    counts = rng.choice((2, 3, 4), size=n, p=profile.label_count_weights)
    for i in range(n):
        labels = []
        for _ in range(counts[i] - 1):
            word = WORDS[rng.integers(0, len(WORDS))]
            if rng.random() < profile.hyphen_rate:
                word = word + "-" + WORDS[rng.integers(0, len(WORDS))]
            if rng.random() < profile.digit_suffix_rate:
                word = word + str(rng.integers(0, 100))
            labels.append(word)
        labels.append(profile.tlds[rng.integers(0, len(profile.tlds))])
        domains.append(".".join(labels))
    if profile.case_flip_rate > 0.0:
        for i, domain in enumerate(domains):
            flips = rng.random(len(domain)) < profile.case_flip_rate
            domains[i] = "".join(
                ch.upper() if flip and ch.isalpha() else ch
                for ch, flip in zip(domain, flips))
    return domains


@dataclass(frozen=True)
class ExfilConfig:
    """How the exfiltration emulator contaminates a domain list.

    ``contamination`` is the fraction of domains whose leftmost label is
    replaced; 0 is allowed and leaves the input untouched.  The
    replacement ``alphabet`` defaults to the label-legal characters
    (letters, digits, dash): a dot would alter the label structure the
    emulator must preserve.
    """

    contamination: float
    alphabet: str = LABEL_CHARS
    preserve_length: bool = True

    def __post_init__(self):
        if not (0.0 <= self.contamination < 1.0):
            raise ConfigError(
                f"contamination must lie in [0, 1), got {self.contamination!r}"
            )
        if not self.alphabet or len(set(self.alphabet)) != len(self.alphabet):
            raise ConfigError("replacement alphabet must be nonempty without repeats")
        if "." in self.alphabet:
            raise ConfigError("replacement alphabet must not contain the label separator")
        if not self.preserve_length:
            raise ConfigError("length-preserving replacement is the only supported mode")


@dataclass
class ExfilResult:
    """Contaminated domain list with ground-truth labels.

    ``labels[i]`` is True where domain i was rewritten; ``skipped`` counts
    single-label domains that were never eligible.
    """

    domains: list
    labels: np.ndarray
    skipped: int


def emulate_exfiltration(domains: Sequence[str], config: ExfilConfig,
                         rng: np.random.Generator) -> ExfilResult:
    """Rewrite the leftmost label of a random fraction of domains.

    The replacement keeps the exact label length, so record count, every
    domain's total length, label counts, and all suffix labels are
    preserved; only the character distribution inside rewritten labels
    changes.  Single-label domains are skipped and counted.
    """
    domains = list(domains)
    if not domains:
        raise DataError("cannot contaminate an empty domain list")
    eligible = [i for i, d in enumerate(domains) if "." in d and d.split(".", 1)[0]]
    skipped = len(domains) - len(eligible)
    labels = np.zeros(len(domains), dtype=bool)
    target = int(round(config.contamination * len(domains)))
    target = min(target, len(eligible))
    if target > 0:
        chosen = rng.choice(len(eligible), size=target, replace=False)
        alphabet = config.alphabet
        for pick in chosen:
            i = eligible[pick]
            first, rest = domains[i].split(".", 1)
            draws = rng.integers(0, len(alphabet), size=len(first))
            domains[i] = "".join(alphabet[d] for d in draws) + "." + rest
            labels[i] = True
    return ExfilResult(domains=domains, labels=labels, skipped=skipped)


def domain_schema() -> FeatureSchema:
    """Schema for domain records: one charcount field named ``domain``."""
    return FeatureSchema((
        FieldSpec(name="domain", kind="domain_charcount", alphabet=DOMAIN_ALPHABET),
    ))
