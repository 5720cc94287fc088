"""KS machinery and population detection against brute-force oracles."""

import numpy as np
import pytest
import scipy.special
import scipy.stats
from scipy.special import ndtr, ndtri

from popanom.detect import (
    MIN_DETECT_SAMPLES,
    LatentProjection,
    combine_scores,
    detect,
    kolmogorov_sf,
    ks_critical_value,
    ks_one_sample_normal,
    novelty_matrix,
    write_novelty_csv,
)
from popanom.errors import ConfigError, DataError


def brute_force_ks(sample):
    """sup |F_n - Phi| evaluated at every jump point from both sides plus
    a coarse grid between them; exact at the jumps, where the sup lives."""
    xs = np.sort(np.asarray(sample, dtype=np.float64))
    n = xs.size
    best = 0.0
    for t in np.concatenate([xs, np.linspace(-8.0, 8.0, 401)]):
        phi = ndtr(t)
        above = np.searchsorted(xs, t, side="right") / n
        below = np.searchsorted(xs, t, side="left") / n
        best = max(best, abs(above - phi), abs(below - phi))
    return best


def test_ks_statistic_matches_brute_force():
    rng = np.random.default_rng(123)
    for trial in range(300):
        n = int(rng.integers(1, 65))
        x = rng.standard_normal(n) * rng.uniform(0.5, 2.0) + rng.uniform(-1, 1)
        if trial % 3 == 0:
            x = np.round(x, 1)  # force ties
        d, _ = ks_one_sample_normal(x)
        assert abs(d - brute_force_ks(x)) < 1e-12, f"trial {trial}"


def test_ks_single_point_oracle():
    # One sample at the median: F_n jumps 0 -> 1 at 0, Phi(0) = 1/2.
    d, p = ks_one_sample_normal([0.0])
    assert d == pytest.approx(0.5, abs=1e-15)
    assert 0.0 <= p <= 1.0


def test_ks_three_point_oracle():
    # Frozen value computed once from the order-statistics formula by hand.
    d, _ = ks_one_sample_normal([-1.0, 0.0, 1.0])
    assert d == pytest.approx(0.1746780794018763, abs=1e-15)


def test_ks_quantile_grid_oracle():
    # Samples at the (i - 1/2)/n normal quantiles: every jump straddles the
    # CDF symmetrically and D = 1/(2n) exactly.
    for n in (4, 10, 25):
        x = ndtri((np.arange(1, n + 1) - 0.5) / n)
        d, _ = ks_one_sample_normal(x)
        assert d == pytest.approx(0.5 / n, abs=1e-12)


def test_ks_matches_scipy():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = rng.standard_normal(int(rng.integers(8, 200)))
        d, _ = ks_one_sample_normal(x)
        ref = scipy.stats.kstest(x, "norm")
        assert d == pytest.approx(ref.statistic, abs=1e-12)


def test_kolmogorov_sf_matches_scipy():
    for lam in np.linspace(0.01, 3.0, 100):
        assert kolmogorov_sf(lam) == pytest.approx(
            scipy.special.kolmogorov(lam), abs=1e-14)
    assert kolmogorov_sf(0.0) == 1.0
    assert kolmogorov_sf(-1.0) == 1.0
    assert kolmogorov_sf(50.0) == 0.0
    with pytest.raises(DataError):
        kolmogorov_sf(float("nan"))


def test_kolmogorov_sf_monotone_and_bounded():
    grid = np.linspace(0.0, 4.0, 200)
    values = [kolmogorov_sf(g) for g in grid]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_critical_value_constant():
    # c(0.01) = sqrt(-ln(0.005)/2) ~ 1.6276.
    assert ks_critical_value(1, 0.01) == pytest.approx(1.6276, abs=5e-4)
    assert ks_critical_value(100, 0.01) == pytest.approx(0.16276, abs=5e-5)
    with pytest.raises(DataError):
        ks_critical_value(0)
    with pytest.raises(ConfigError):
        ks_critical_value(10, 1.5)


def test_null_calibration():
    # Clean N(0,1) samples stay below the 1% critical value nearly always.
    n = 10_000
    threshold = ks_critical_value(n, 0.01)
    below = 0
    for seed in range(100):
        x = np.random.default_rng(seed).standard_normal(n)
        d, _ = ks_one_sample_normal(x)
        below += d < threshold
    assert below >= 97, f"only {below}/100 below the critical value"


def test_ks_rejects_bad_samples():
    with pytest.raises(DataError):
        ks_one_sample_normal([])
    with pytest.raises(DataError):
        ks_one_sample_normal([0.0, float("inf")])


def test_combine_scores_oracle():
    per_dim = [0.1, 0.3, 0.2]
    assert combine_scores(per_dim, "l1") == pytest.approx(0.6)
    assert combine_scores(per_dim, "l2") == pytest.approx(np.sqrt(0.14))
    assert combine_scores(per_dim, "linf") == pytest.approx(0.3)
    with pytest.raises(ConfigError):
        combine_scores(per_dim, "l0")
    with pytest.raises(DataError):
        combine_scores([], "l1")


def test_projection_validation():
    with pytest.raises(DataError):
        LatentProjection(z=np.zeros(3))
    with pytest.raises(DataError):
        LatentProjection(z=[[np.nan, 0.0]])
    p = LatentProjection(z=np.zeros((4, 2)), source="s", model="m")
    assert (p.n, p.dim) == (4, 2)


def test_detect_sidak_correction_oracle():
    rng = np.random.default_rng(0)
    report = detect(LatentProjection(z=rng.standard_normal((100, 2))))
    assert report.corrected_alpha == pytest.approx(1.0 - 0.99 ** 0.5, abs=1e-15)
    assert report.dim == 2 and report.n == 100


def test_detect_fires_on_shift_not_on_clean():
    rng = np.random.default_rng(42)
    clean = rng.standard_normal((2000, 2))
    shifted = clean.copy()
    shifted[:, 0] += 1.0
    assert not detect(LatentProjection(z=clean)).verdict
    report = detect(LatentProjection(z=shifted))
    assert report.verdict
    assert report.per_dim_ks[0] > report.per_dim_ks[1]


def test_detect_shift_grows_statistic():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        base = rng.standard_normal((500, 1))
        d0 = detect(LatentProjection(z=base)).combined
        d1 = detect(LatentProjection(z=base + 1.0)).combined
        assert d1 > d0


def test_detect_needs_minimum_rows():
    z = np.zeros((MIN_DETECT_SAMPLES - 1, 2))
    with pytest.raises(DataError):
        detect(LatentProjection(z=z))
    with pytest.raises(ConfigError):
        detect(LatentProjection(z=np.zeros((10, 2))), norm_kind="sum")
    with pytest.raises(ConfigError):
        detect(LatentProjection(z=np.zeros((10, 2))), significance=0.0)


def test_detect_report_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    report = detect(LatentProjection(z=rng.standard_normal((64, 3)),
                                     source="bucket-a", model="abc123"))
    payload = report.to_dict()
    assert payload["source"] == "bucket-a"
    assert payload["model"] == "abc123"
    assert len(payload["per_dim_ks"]) == 3
    report.save(tmp_path / "report.json")
    import json
    with open(tmp_path / "report.json") as handle:
        assert json.load(handle) == payload


def tiny_model(width, seed):
    from popanom.aae import train_aae
    from popanom.data import matrix_dataset
    from popanom.nn import TrainConfig

    rng = np.random.default_rng(seed)
    data = matrix_dataset(rng.standard_normal((64, width)))
    config = TrainConfig(seed=seed, epochs=2, batch_size=32)
    model, _ = train_aae(data, 2, config=config, rng=rng)
    return model


def test_novelty_matrix_marks_mismatches_nan(tmp_path):
    from popanom.data import matrix_dataset

    rng = np.random.default_rng(5)
    model_a = tiny_model(3, seed=1)
    model_b = tiny_model(4, seed=2)
    data_a = matrix_dataset(rng.standard_normal((50, 3)))
    data_b = matrix_dataset(rng.standard_normal((50, 4)))
    matrix = novelty_matrix([model_a, model_b], [data_a, data_b])
    assert matrix.shape == (2, 2)
    assert np.isfinite(matrix[0, 0]) and np.isfinite(matrix[1, 1])
    assert np.isnan(matrix[0, 1]) and np.isnan(matrix[1, 0])

    path = tmp_path / "matrix.csv"
    write_novelty_csv(matrix, ["model-a", "model-b"], ["set-a", "set-b"], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "model,set-a,set-b"
    assert lines[1].endswith(",")  # NaN prints as an empty cell
    assert lines[1].startswith("model-a," + repr(float(matrix[0, 0])))
    with pytest.raises(DataError):
        write_novelty_csv(matrix, ["only-one"], ["set-a", "set-b"], path)


def test_novelty_matrix_needs_inputs():
    with pytest.raises(DataError):
        novelty_matrix([], [])
