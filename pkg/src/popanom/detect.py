"""Population-level anomaly detection on latent projections.

A trained encoder maps anticipated data to N(0, I_m), so each latent
dimension of an evaluation projection is tested against the standard
normal with a one-sample Kolmogorov-Smirnov statistic.  Per-dimension
p-values are combined under a Sidak multiplicity correction; l1/l2
norms are reported as combined scores for ranking data sets against
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, DataError
from .serialize import write_json

NORM_KINDS = ("l1", "l2", "linf")

# Below this the asymptotic Kolmogorov p-value is meaningless.
MIN_DETECT_SAMPLES = 8

# Terms of the Kolmogorov series.  The tail decays like
# exp(-2 j^2 lambda^2), so 25 terms is far past float64 resolution for
# any lambda where the value is nonzero.
_KOLMOGOROV_TERMS = 25


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution.

    P(K > lam) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2), clamped to
    [0, 1].  This is the asymptotic null distribution of sqrt(n) * D.
    """
    if not np.isfinite(lam):
        raise DataError(f"kolmogorov_sf needs a finite argument, got {lam!r}")
    if lam <= 0.0:
        return 1.0
    j = np.arange(1, _KOLMOGOROV_TERMS + 1)
    terms = 2.0 * (-1.0) ** (j - 1) * np.exp(-2.0 * j * j * lam * lam)
    return float(min(1.0, max(0.0, terms.sum())))


def ks_critical_value(n: int, significance: float = 0.01) -> float:
    """Asymptotic two-sided KS critical value c(a) / sqrt(n).

    c(a) = sqrt(-ln(a/2) / 2); at a = 0.01 this is about 1.628.
    """
    if n < 1:
        raise DataError(f"sample size must be positive, got {n}")
    if not (0.0 < significance < 1.0):
        raise ConfigError(f"significance must lie in (0, 1), got {significance!r}")
    return math.sqrt(-math.log(significance / 2.0) / 2.0) / math.sqrt(n)


def ks_one_sample_normal(sample) -> tuple:
    """One-sample KS statistic and p-value of a sample against N(0, 1).

    D is the exact sup-distance of the empirical CDF from the normal CDF,
    computed on the sorted sample as
    max_i max(i/n - Phi(x_(i)), Phi(x_(i)) - (i-1)/n); the p-value is the
    asymptotic Kolmogorov survival function at sqrt(n) * D.
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        raise DataError("cannot run a KS test on an empty sample")
    if not np.all(np.isfinite(x)):
        raise DataError("KS sample contains non-finite values")
    cdf = ndtr(np.sort(x))
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def combine_scores(per_dim, norm_kind: str) -> float:
    """Combine per-dimension KS statistics into one score."""
    values = np.asarray(per_dim, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot combine zero per-dimension scores")
    if norm_kind == "l1":
        return float(np.sum(np.abs(values)))
    if norm_kind == "l2":
        return float(np.sqrt(np.sum(values * values)))
    if norm_kind == "linf":
        return float(np.max(np.abs(values)))
    raise ConfigError(f"unknown norm {norm_kind!r}; expected one of {NORM_KINDS}")


@dataclass
class LatentProjection:
    """Encoded samples in latent space, tagged with their provenance."""

    z: np.ndarray
    source: str = ""
    model: str = ""

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        if self.z.ndim != 2:
            raise DataError(f"projection must be 2-D, got shape {self.z.shape}")
        if not np.all(np.isfinite(self.z)):
            raise DataError("projection contains non-finite values")

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def dim(self) -> int:
        return self.z.shape[1]


@dataclass
class DetectionReport:
    """Outcome of testing one projection for a population anomaly.

    ``verdict`` is True when the minimum per-dimension p-value falls below
    the Sidak-corrected significance 1 - (1-a)^(1/m).  The l1 and l2
    combined statistics have no closed-form null distribution, so their
    verdict conservatively equals the linf verdict.
    """

    n: int
    dim: int
    norm_kind: str
    significance: float
    corrected_alpha: float
    per_dim_ks: tuple
    per_dim_pvalue: tuple
    combined: float
    verdict: bool
    source: str = ""
    model: str = ""

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "norm_kind": self.norm_kind,
            "significance": self.significance,
            "corrected_alpha": self.corrected_alpha,
            "per_dim_ks": list(self.per_dim_ks),
            "per_dim_pvalue": list(self.per_dim_pvalue),
            "combined": self.combined,
            "verdict": self.verdict,
            "source": self.source,
            "model": self.model,
        }

    def save(self, path) -> None:
        write_json(self.to_dict(), path)


def detect(projection: LatentProjection, norm_kind: str = "linf",
           significance: float = 0.01) -> DetectionReport:
    """Test whether a projection deviates from N(0, I_m).

    Each latent dimension gets a one-sample KS test against N(0, 1); the
    verdict applies the Sidak correction for m dimensions.  Requires at
    least MIN_DETECT_SAMPLES rows.
    """
    if norm_kind not in NORM_KINDS:
        raise ConfigError(f"unknown norm {norm_kind!r}; expected one of {NORM_KINDS}")
    if not (0.0 < significance < 1.0):
        raise ConfigError(f"significance must lie in (0, 1), got {significance!r}")
    if projection.n < MIN_DETECT_SAMPLES:
        raise DataError(
            f"projection has {projection.n} rows; the asymptotic KS p-value "
            f"needs at least {MIN_DETECT_SAMPLES}"
        )
    stats = [ks_one_sample_normal(projection.z[:, j]) for j in range(projection.dim)]
    per_dim = tuple(d for d, _ in stats)
    pvalues = tuple(p for _, p in stats)
    corrected = 1.0 - (1.0 - significance) ** (1.0 / projection.dim)
    return DetectionReport(
        n=projection.n,
        dim=projection.dim,
        norm_kind=norm_kind,
        significance=significance,
        corrected_alpha=corrected,
        per_dim_ks=per_dim,
        per_dim_pvalue=pvalues,
        combined=combine_scores(per_dim, norm_kind),
        verdict=bool(min(pvalues) < corrected),
        source=projection.source,
        model=projection.model,
    )


def novelty_matrix(models: Sequence, datasets: Sequence, norm_kind: str = "linf") -> np.ndarray:
    """Combined anomaly score of every dataset under every model.

    Entry (i, j) is the combined KS statistic of dataset j projected
    through model i; a schema or shape mismatch marks the cell NaN rather
    than failing the whole matrix.  Low values along the diagonal of a
    bucket-per-model layout mean each model recognises its own bucket.
    """
    from .aae import encode  # deferred: aae depends on this module

    if not models or not datasets:
        raise DataError("novelty_matrix needs at least one model and one dataset")
    matrix = np.full((len(models), len(datasets)), np.nan)
    for i, model in enumerate(models):
        for j, dataset in enumerate(datasets):
            try:
                matrix[i, j] = detect(encode(model, dataset), norm_kind=norm_kind).combined
            except DataError:
                continue
    return matrix


def write_novelty_csv(matrix: np.ndarray, row_labels: Sequence[str],
                      col_labels: Sequence[str], path) -> None:
    """CSV export with model rows and dataset columns; NaN cells print empty."""
    matrix = np.asarray(matrix)
    if matrix.shape != (len(row_labels), len(col_labels)):
        raise DataError(
            f"matrix shape {matrix.shape} does not match {len(row_labels)} row "
            f"labels and {len(col_labels)} column labels"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("model," + ",".join(col_labels) + "\n")
        for label, row in zip(row_labels, matrix):
            cells = ["" if not np.isfinite(v) else repr(float(v)) for v in row]
            handle.write(label + "," + ",".join(cells) + "\n")
