"""Anomaly-probability algebra and discriminator ranking behavior."""

import numpy as np
import pytest

from popanom.aae import train_aae
from popanom.data import matrix_dataset, vector_schema, Dataset
from popanom.errors import ConfigError, DataError
from popanom.nn import TrainConfig
from popanom.rank import (
    MIN_EVAL_SIZE,
    beta_to_alpha,
    default_finetune_config,
    exact_alpha_beta,
    rank,
    write_ranking_csv,
)
from popanom.synth import mixture_separated_cluster, sample_mixture


def test_beta_to_alpha_trivials():
    assert beta_to_alpha(0.5) == 0.0
    assert beta_to_alpha(2.0 / 3.0) == pytest.approx(0.5, abs=1e-12)
    assert beta_to_alpha(1.0 / 3.0) == 0.0  # clamp region
    assert beta_to_alpha(0.999999) == pytest.approx(1.0, abs=1e-5)


def test_beta_to_alpha_rejects_boundary():
    for bad in (0.0, 1.0, -0.5, 1.5, float("nan")):
        with pytest.raises(DataError):
            beta_to_alpha(bad)


def test_beta_to_alpha_monotone():
    grid = np.linspace(0.01, 0.99, 99)
    values = [beta_to_alpha(b) for b in grid]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_exact_alpha_beta_equal_densities():
    # phi = 1: the anomalous mass is exactly the mixing weight.
    for gamma in (0.01, 0.1, 0.5):
        alpha, beta = exact_alpha_beta(gamma, 1.0)
        assert alpha == pytest.approx(gamma, abs=1e-15)
        assert beta == pytest.approx(0.5, abs=1e-15)


def test_exact_alpha_beta_zero_density():
    alpha, beta = exact_alpha_beta(0.2, 0.0)
    assert alpha == 0.0
    assert beta == pytest.approx(0.8 / 1.8, abs=1e-15)


def test_exact_alpha_beta_reference_point():
    alpha, beta = exact_alpha_beta(0.01, 200.0)
    assert alpha == pytest.approx(2.0 / 2.99, abs=1e-15)
    assert beta == pytest.approx(2.99 / 3.99, abs=1e-15)
    # The small-gamma approximation recovers alpha to within 0.004 here.
    assert beta_to_alpha(beta) == pytest.approx(alpha, abs=0.004)


def test_exact_alpha_beta_monotone_in_phi():
    gamma = 0.05
    phis = np.logspace(-2, 2, 30)
    alphas, betas = zip(*(exact_alpha_beta(gamma, p) for p in phis))
    assert all(a < b for a, b in zip(alphas, alphas[1:]))
    assert all(a < b for a, b in zip(betas, betas[1:]))


def test_exact_alpha_beta_rejects_bad_inputs():
    for gamma, phi in ((0.0, 1.0), (1.0, 1.0), (-0.1, 1.0),
                       (0.1, -1.0), (0.1, float("inf"))):
        with pytest.raises(ConfigError):
            exact_alpha_beta(gamma, phi)


def trained_toy_model(seed=0, n=512, epochs=25):
    rng = np.random.default_rng(seed)
    mix = mixture_separated_cluster(gamma=0.2)
    train = mix.sample_background(n, rng)
    config = TrainConfig(seed=seed, epochs=epochs, batch_size=64)
    model, _ = train_aae(train, 2, config=config, rng=rng)
    return model, mix, rng


def test_rank_is_read_only_on_the_model():
    model, mix, rng = trained_toy_model()
    eval_set = mix.sample_background(128, rng)
    enc_before = model.encoder.digest()
    disc_before = model.discriminator.digest()
    rank(model, eval_set, rng=np.random.default_rng(1))
    assert model.encoder.digest() == enc_before
    assert model.discriminator.digest() == disc_before


def test_rank_orders_separated_cluster_above_background():
    model, mix, rng = trained_toy_model()
    sample = sample_mixture(mix, 200, rng)
    run = rank(model, sample.dataset, rng=np.random.default_rng(2))
    beta = np.empty(200)
    for s in run.ranked:
        beta[s.index] = s.beta
    assert beta[sample.labels].mean() > beta[~sample.labels].mean()
    assert 0.0 <= run.accuracy <= 1.0


def test_rank_sorted_by_beta_then_index():
    model, mix, rng = trained_toy_model()
    run = rank(model, mix.sample_background(64, rng),
               rng=np.random.default_rng(3))
    keys = [(-s.beta, s.index) for s in run.ranked]
    assert keys == sorted(keys)
    assert [s.index for s in run.top(5)] == [s.index for s in run.ranked[:5]]
    for s in run.ranked:
        assert 0.0 < s.beta < 1.0
        assert 0.0 <= s.alpha <= 1.0
        assert s.alpha == beta_to_alpha(s.beta)


def test_rank_deterministic_under_seed():
    model, mix, rng = trained_toy_model()
    eval_set = mix.sample_background(100, rng)
    a = rank(model, eval_set, rng=np.random.default_rng(7))
    b = rank(model, eval_set, rng=np.random.default_rng(7))
    c = rank(model, eval_set, rng=np.random.default_rng(8))
    assert [(s.index, s.beta) for s in a.ranked] == \
           [(s.index, s.beta) for s in b.ranked]
    assert [(s.index, s.beta) for s in a.ranked] != \
           [(s.index, s.beta) for s in c.ranked]


def test_rank_cold_start_differs_from_warm():
    model, mix, rng = trained_toy_model()
    eval_set = mix.sample_background(100, rng)
    warm = rank(model, eval_set, rng=np.random.default_rng(5))
    cold = rank(model, eval_set, rng=np.random.default_rng(5), cold_start=True)
    assert [s.beta for s in warm.ranked] != [s.beta for s in cold.ranked]


def test_rank_rejects_small_and_mismatched_sets():
    model, mix, rng = trained_toy_model()
    with pytest.raises(DataError, match=str(MIN_EVAL_SIZE)):
        rank(model, mix.sample_background(MIN_EVAL_SIZE - 1, rng))
    other = matrix_dataset(np.zeros((64, 3)))
    with pytest.raises(DataError):
        rank(model, other)
    # Same width, different schema statistics: still rejected.
    schema = vector_schema(2)
    relabeled = Dataset(features=np.zeros((64, 2)), schema=schema)
    if schema.digest() != model.feature_schema.digest():
        with pytest.raises(DataError):
            rank(model, relabeled)


def test_ranking_csv_carries_display_fields(tmp_path):
    model, mix, rng = trained_toy_model()
    records = [{"host": f"h{i}", "note": str(i)} for i in range(64)]
    base = mix.sample_background(64, rng)
    eval_set = Dataset(features=base.features, schema=base.schema,
                       records=records)
    run = rank(model, eval_set, rng=np.random.default_rng(4))
    path = tmp_path / "ranking.csv"
    write_ranking_csv(run, path, display_fields=["host", "absent"])
    lines = path.read_text().splitlines()
    assert lines[0] == "rank,index,beta,alpha,host,absent"
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[2]) == run.ranked[0].beta  # repr round-trip
    assert first[4] == f"h{run.ranked[0].index}"
    assert first[5] == ""


def test_default_finetune_config():
    config = default_finetune_config()
    assert config.epochs == 30
    assert config.learning_rate == pytest.approx(1e-3)
    assert config.optimizer == "adam"
