"""Network, loss, and optimizer behavior against independent oracles."""

import numpy as np
import pytest

from popanom.errors import ConfigError, DataError, NumericalError
from popanom.nn import (
    BCE_CLAMP,
    DenseLayer,
    Mlp,
    OptimizerState,
    TrainConfig,
    backward,
    load_mlp,
    loss_and_grad,
    save_mlp,
    step,
)


def small_net(rng, sizes=(3, 5, 2), activations=("tanh", "sigmoid")):
    return Mlp.build(sizes, activations, rng)


def finite_difference_grads(net, batch, loss, targets, h=1e-6):
    """Central differences over every parameter, one at a time."""
    grads = []
    for layer in net.layers:
        dw = np.zeros_like(layer.weights)
        db = np.zeros_like(layer.biases)
        for arr, out in ((layer.weights, dw), (layer.biases, db)):
            flat = arr.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up, _ = loss_and_grad(loss, net.forward(batch), targets)
                flat[j] = orig - h
                down, _ = loss_and_grad(loss, net.forward(batch), targets)
                flat[j] = orig
                out.ravel()[j] = (up - down) / (2.0 * h)
        grads.append((dw, db))
    return grads


def relu_safe_batch(net, rng, rows):
    """Draw inputs whose relu pre-activations stay away from the kink,
    where the analytic subgradient and the finite difference disagree."""
    for _ in range(200):
        batch = rng.standard_normal((rows, net.in_size))
        pres, _ = net.forward_trace(batch)
        margins = [
            np.abs(pre).min()
            for pre, layer in zip(pres, net.layers)
            if layer.activation == "relu"
        ]
        if not margins or min(margins) > 1e-3:
            return batch
    raise AssertionError("could not find a kink-free batch")


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    for trial in range(20):
        sizes = [int(rng.integers(2, 5)) for _ in range(3)]
        acts = [str(rng.choice(["identity", "relu", "sigmoid", "tanh"])),
                "identity"]
        net = Mlp.build(sizes, acts, rng)
        batch = relu_safe_batch(net, rng, rows=4)
        targets = rng.standard_normal((4, net.out_size))
        _, analytic = backward(net, batch, "mse", targets)
        numeric = finite_difference_grads(net, batch, "mse", targets)
        for (adw, adb), (ndw, ndb) in zip(analytic, numeric):
            for a, n in ((adw, ndw), (adb, ndb)):
                rel = np.abs(a - n) / np.maximum(np.abs(n), 1e-8)
                assert rel.max() < 1e-4, f"trial {trial}: rel err {rel.max():.2e}"


def test_gradient_matches_finite_differences_bce():
    rng = np.random.default_rng(7)
    net = Mlp.build([3, 4, 2], ["tanh", "sigmoid"], rng)
    batch = rng.standard_normal((5, 3))
    targets = rng.integers(0, 2, (5, 2)).astype(np.float64)
    _, analytic = backward(net, batch, "bce", targets)
    numeric = finite_difference_grads(net, batch, "bce", targets)
    for (adw, adb), (ndw, ndb) in zip(analytic, numeric):
        for a, n in ((adw, ndw), (adb, ndb)):
            rel = np.abs(a - n) / np.maximum(np.abs(n), 1e-8)
            assert rel.max() < 1e-4


def test_backprop_input_gradient():
    # d_input from backprop must match finite differences on the inputs.
    rng = np.random.default_rng(3)
    net = Mlp.build([3, 4, 2], ["tanh", "identity"], rng)
    batch = rng.standard_normal((2, 3))
    targets = rng.standard_normal((2, 2))
    pres, posts = net.forward_trace(batch)
    _, upstream = loss_and_grad("mse", posts[-1], targets)
    _, d_input = net.backprop(pres, posts, upstream)
    h = 1e-6
    for r in range(2):
        for c in range(3):
            bumped = batch.copy()
            bumped[r, c] += h
            up, _ = loss_and_grad("mse", net.forward(bumped), targets)
            bumped[r, c] -= 2 * h
            down, _ = loss_and_grad("mse", net.forward(bumped), targets)
            numeric = (up - down) / (2 * h)
            assert abs(d_input[r, c] - numeric) < 1e-6


def test_mse_loss_oracle():
    value, grad = loss_and_grad("mse", [[1.0, 2.0]], [[0.0, 0.0]])
    assert value == pytest.approx((1.0 + 4.0) / 2.0)
    np.testing.assert_allclose(grad, [[1.0, 2.0]])  # 2 * diff / size


def test_bce_loss_oracle():
    value, grad = loss_and_grad("bce", [[0.5]], [[1.0]])
    assert value == pytest.approx(np.log(2.0))
    assert grad[0, 0] == pytest.approx((0.5 - 1.0) / (0.25 * 1.0))


def test_bce_clamps_saturated_outputs():
    value, grad = loss_and_grad("bce", [[0.0, 1.0]], [[1.0, 0.0]])
    assert np.isfinite(value)
    assert np.all(np.isfinite(grad))
    assert value == pytest.approx(-np.log(BCE_CLAMP), rel=1e-6)


def test_loss_rejects_shape_mismatch_and_empty():
    with pytest.raises(DataError):
        loss_and_grad("mse", [[1.0, 2.0]], [[1.0]])
    with pytest.raises(DataError):
        loss_and_grad("mse", np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(ConfigError):
        loss_and_grad("huber", [[1.0]], [[1.0]])


def test_sgd_step_oracle():
    net = Mlp([DenseLayer(np.array([[1.0]]), np.array([0.5]), "identity")])
    config = TrainConfig(optimizer="sgd", learning_rate=0.1)
    state = OptimizerState.for_net(net, config)
    step(net, [(np.array([[2.0]]), np.array([3.0]))], config, state)
    assert net.layers[0].weights[0, 0] == pytest.approx(1.0 - 0.1 * 2.0)
    assert net.layers[0].biases[0] == pytest.approx(0.5 - 0.1 * 3.0)


def test_adam_first_step_oracle():
    # At t=1 the bias corrections cancel: delta = lr * g / (|g| + eps).
    net = Mlp([DenseLayer(np.array([[1.0]]), np.array([0.0]), "identity")])
    config = TrainConfig(optimizer="adam", learning_rate=1e-3)
    state = OptimizerState.for_net(net, config)
    g = 2.0
    step(net, [(np.array([[g]]), np.array([0.0]))], config, state)
    expected = 1.0 - 1e-3 * g / (abs(g) + config.eps)
    assert net.layers[0].weights[0, 0] == pytest.approx(expected, abs=1e-15)
    assert state.t == 1


def test_zero_gradient_is_fixed_point():
    rng = np.random.default_rng(0)
    for optimizer in ("sgd", "adam"):
        net = small_net(rng)
        config = TrainConfig(optimizer=optimizer)
        state = OptimizerState.for_net(net, config)
        before = [(l.weights.copy(), l.biases.copy()) for l in net.layers]
        zeros = [(np.zeros_like(l.weights), np.zeros_like(l.biases))
                 for l in net.layers]
        step(net, zeros, config, state)
        for (w0, b0), layer in zip(before, net.layers):
            np.testing.assert_array_equal(w0, layer.weights)
            np.testing.assert_array_equal(b0, layer.biases)


def test_zero_learning_rate_freezes_params():
    rng = np.random.default_rng(1)
    net = small_net(rng)
    config = TrainConfig(optimizer="adam", learning_rate=0.0)
    state = OptimizerState.for_net(net, config)
    before = [(l.weights.copy(), l.biases.copy()) for l in net.layers]
    batch = rng.standard_normal((4, 3))
    targets = rng.standard_normal((4, 2))
    _, grads = backward(net, batch, "mse", targets)
    step(net, grads, config, state)
    for (w0, b0), layer in zip(before, net.layers):
        np.testing.assert_array_equal(w0, layer.weights)
        np.testing.assert_array_equal(b0, layer.biases)


def test_training_reduces_loss_on_separable_toy():
    # Fixed linearly separable set; 200 adam steps shrink the loss in at
    # least 99 of 100 seeds.
    x = np.array([[1.0, 1.0], [2.0, 1.5], [1.5, 2.0], [-1.0, -1.0],
                  [-2.0, -1.5], [-1.5, -2.0]])
    y = np.array([[1.0], [1.0], [1.0], [0.0], [0.0], [0.0]])
    config = TrainConfig(optimizer="adam", learning_rate=1e-2)
    wins = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        net = Mlp.build([2, 4, 1], ["tanh", "sigmoid"], rng)
        state = OptimizerState.for_net(net, config)
        start, _ = loss_and_grad("bce", net.forward(x), y)
        for _ in range(200):
            _, grads = backward(net, x, "bce", y)
            step(net, grads, config, state)
        end, _ = loss_and_grad("bce", net.forward(x), y)
        wins += end < start
    assert wins >= 99, f"loss decreased in only {wins}/100 seeds"


def test_serialization_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(9)
    net = Mlp.build([4, 7, 3], ["relu", "sigmoid"], rng)
    clone = Mlp.from_dict(net.to_dict())
    for a, b in zip(net.layers, clone.layers):
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.biases, b.biases)
        assert a.activation == b.activation
    path = tmp_path / "net.json"
    save_mlp(net, path)
    loaded = load_mlp(path)
    assert loaded.digest() == net.digest()
    batch = rng.standard_normal((5, 4))
    np.testing.assert_array_equal(net.forward(batch), loaded.forward(batch))


def test_from_dict_rejects_unknown_version():
    rng = np.random.default_rng(2)
    payload = small_net(rng).to_dict()
    payload["version"] = 99
    with pytest.raises(DataError):
        Mlp.from_dict(payload)


def test_build_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        Mlp.build([3, 4], ["relu", "relu"], rng)  # activation count mismatch
    with pytest.raises(ConfigError):
        Mlp.build([3, 4], ["softplus"], rng)
    with pytest.raises(ConfigError):
        Mlp.build([3], [], rng)
    with pytest.raises(ConfigError):
        Mlp.build([3, 0], ["relu"], rng)


def test_layer_width_chaining_checked():
    # Mis-chained widths surface when loading corrupted bundles: DataError.
    a = DenseLayer(np.zeros((4, 3)), np.zeros(4), "relu")
    b = DenseLayer(np.zeros((2, 5)), np.zeros(2), "identity")
    with pytest.raises(DataError):
        Mlp([a, b])


def test_forward_rejects_wrong_width():
    rng = np.random.default_rng(0)
    net = small_net(rng)
    with pytest.raises(DataError):
        net.forward(np.zeros((2, 4)))
    with pytest.raises(DataError):
        net.forward(np.zeros(3))  # 1-D input


def test_step_rejects_nonfinite_gradients():
    rng = np.random.default_rng(0)
    net = small_net(rng)
    config = TrainConfig()
    state = OptimizerState.for_net(net, config)
    grads = [(np.zeros_like(l.weights), np.zeros_like(l.biases))
             for l in net.layers]
    grads[1][0][0, 0] = np.nan
    with pytest.raises(NumericalError, match="layer 1"):
        step(net, grads, config, state)


def test_step_rejects_shape_mismatch():
    rng = np.random.default_rng(0)
    net = small_net(rng)
    config = TrainConfig()
    state = OptimizerState.for_net(net, config)
    grads = [(np.zeros((1, 1)), np.zeros(1)) for _ in net.layers]
    with pytest.raises(DataError):
        step(net, grads, config, state)


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(seed=-1)
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=-0.1)
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=float("inf"))
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(optimizer="rmsprop")
    with pytest.raises(ConfigError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(eps=0.0)
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"seed": 0, "momentum": 0.9})
    # learning_rate 0 is allowed: it freezes parameters for ablations.
    assert TrainConfig(learning_rate=0.0).learning_rate == 0.0


def test_glorot_init_ranges():
    rng = np.random.default_rng(5)
    net = Mlp.build([10, 20, 5], ["relu", "identity"], rng)
    for layer in net.layers:
        fan_in, fan_out = layer.in_size, layer.out_size
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.abs(layer.weights).max() <= limit
        np.testing.assert_array_equal(layer.biases, np.zeros(fan_out))


def test_identical_seeds_build_identical_nets():
    a = Mlp.build([3, 4, 2], ["relu", "identity"], np.random.default_rng(11))
    b = Mlp.build([3, 4, 2], ["relu", "identity"], np.random.default_rng(11))
    assert a.digest() == b.digest()
