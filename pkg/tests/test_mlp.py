"""MLP forward pass, backpropagation gradients, training, and prediction.

Gradients are checked parameter by parameter against central finite
differences of the loss, the one oracle that needs nothing but repeated
forward passes.
"""

import math

import numpy as np
import pytest

from wavefuse.errors import DataError, NumericError
from wavefuse.mlp import MlpConfig, MlpModel, forward, loss_and_gradients, predict, train

XOR_DATA = [
    (np.array([0.0, 0.0]), np.array([0.0])),
    (np.array([0.0, 1.0]), np.array([1.0])),
    (np.array([1.0, 0.0]), np.array([1.0])),
    (np.array([1.0, 1.0]), np.array([0.0])),
]


def xor_config(seed):
    return MlpConfig(
        layer_sizes=(2, 4, 1),
        learning_rate=0.5,
        momentum=0.9,
        epochs=5000,
        seed=seed,
        target_error=1e-3,
    )


def random_model(sizes, seed):
    rng = np.random.default_rng(seed)
    weights = [rng.normal(size=(sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
    biases = [rng.normal(size=sizes[i + 1]) for i in range(len(sizes) - 1)]
    return MlpModel(config=MlpConfig(layer_sizes=sizes), weights=weights, biases=biases)


def numeric_gradients(model, x, target, h=1e-5):
    """Central finite differences over every weight and bias entry."""
    grads_w = [np.zeros_like(w) for w in model.weights]
    grads_b = [np.zeros_like(b) for b in model.biases]

    def loss():
        out = forward(model, x)[-1]
        return 0.5 * float(np.sum((out - target) ** 2))

    for layer, w in enumerate(model.weights):
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + h
            up = loss()
            w[idx] = orig - h
            down = loss()
            w[idx] = orig
            grads_w[layer][idx] = (up - down) / (2 * h)
    for layer, b in enumerate(model.biases):
        for idx in np.ndindex(b.shape):
            orig = b[idx]
            b[idx] = orig + h
            up = loss()
            b[idx] = orig - h
            down = loss()
            b[idx] = orig
            grads_b[layer][idx] = (up - down) / (2 * h)
    return grads_w, grads_b


def relative_error(a, n):
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)


class TestForward:
    def test_zero_parameters_give_one_half(self):
        model = MlpModel(
            config=MlpConfig(layer_sizes=(3, 4, 2)),
            weights=[np.zeros((4, 3)), np.zeros((2, 4))],
            biases=[np.zeros(4), np.zeros(2)],
        )
        out = forward(model, np.array([0.3, -0.7, 2.0]))[-1]
        np.testing.assert_allclose(out, [0.5, 0.5], atol=1e-15)

    def test_identity_unit_at_zero(self):
        model = MlpModel(
            config=MlpConfig(layer_sizes=(1, 1)),
            weights=[np.array([[1.0]])],
            biases=[np.array([0.0])],
        )
        np.testing.assert_allclose(forward(model, np.array([0.0]))[-1], [0.5], atol=1e-15)

    def test_log_three_gives_three_quarters(self):
        model = MlpModel(
            config=MlpConfig(layer_sizes=(1, 1)),
            weights=[np.array([[1.0]])],
            biases=[np.array([0.0])],
        )
        out = forward(model, np.array([math.log(3.0)]))[-1]
        np.testing.assert_allclose(out, [0.75], atol=1e-12)

    def test_scores_strictly_inside_unit_interval(self):
        model = random_model((4, 6, 3), seed=3)
        rng = np.random.default_rng(4)
        for _ in range(20):
            out = forward(model, rng.normal(size=4) * 10)[-1]
            assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_length_mismatch_rejected(self):
        model = random_model((3, 2), seed=1)
        with pytest.raises(DataError, match="length"):
            forward(model, np.zeros(4))


class TestGradients:
    def test_analytic_matches_central_differences(self):
        model = random_model((3, 5, 2), seed=17)
        rng = np.random.default_rng(18)
        for _ in range(10):
            x = rng.normal(size=3)
            t = rng.uniform(size=2)
            _, grads_w, grads_b = loss_and_gradients(model, x, t)
            num_w, num_b = numeric_gradients(model, x, t)
            for a, n in zip(grads_w + grads_b, num_w + num_b):
                assert relative_error(a, n).max() <= 1e-5

    def test_loss_value_matches_forward(self):
        model = random_model((3, 5, 2), seed=19)
        x, t = np.array([0.1, -0.2, 0.4]), np.array([1.0, 0.0])
        loss, _, _ = loss_and_gradients(model, x, t)
        out = forward(model, x)[-1]
        assert loss == pytest.approx(0.5 * np.sum((out - t) ** 2), abs=1e-15)


class TestTrain:
    def test_xor_learned_with_benchmark_config(self):
        model = train(xor_config(seed=42), XOR_DATA)
        for x, t in XOR_DATA:
            score = forward(model, x)[-1][0]
            assert (score > 0.5) == (t[0] > 0.5)
        assert model.final_error <= 0.05

    def test_trained_xor_predicts_class_one(self):
        model = train(xor_config(seed=42), XOR_DATA)
        score = forward(model, np.array([1.0, 0.0]))[-1][0]
        assert score > 0.5

    def test_zero_error_sample_is_fixed_point(self):
        # reproduce the seeded init, set the target to its own output, and
        # check one epoch of training moves nothing
        x = np.array([0.2, 0.4])
        cfg = MlpConfig(layer_sizes=(2, 3, 1), epochs=1, seed=5, target_error=0.0)
        sizes = cfg.layer_sizes
        rng = np.random.default_rng(5)
        init_w = [rng.uniform(-0.5, 0.5, (sizes[i + 1], sizes[i])) for i in range(2)]
        init_b = [rng.uniform(-0.5, 0.5, sizes[i + 1]) for i in range(2)]
        init = MlpModel(
            config=cfg,
            weights=[w.copy() for w in init_w],
            biases=[b.copy() for b in init_b],
        )
        target = forward(init, x)[-1]
        model = train(cfg, [(x, target)])
        for a, b in zip(model.weights, init_w):
            assert np.abs(a - b).max() <= 1e-12
        for a, b in zip(model.biases, init_b):
            assert np.abs(a - b).max() <= 1e-12

    def test_zero_momentum_equals_plain_gradient_steps(self):
        x, t = np.array([0.3, -0.1]), np.array([0.8])
        cfg = MlpConfig(layer_sizes=(2, 2, 1), learning_rate=0.2, momentum=0.0, epochs=2, seed=9, target_error=0.0)
        trained = train(cfg, [(x, t)])

        rng = np.random.default_rng(9)
        sizes = cfg.layer_sizes
        weights = [rng.uniform(-0.5, 0.5, (sizes[i + 1], sizes[i])) for i in range(2)]
        biases = [rng.uniform(-0.5, 0.5, sizes[i + 1]) for i in range(2)]
        manual = MlpModel(config=cfg, weights=weights, biases=biases)
        for _ in range(2):
            _, gw, gb = loss_and_gradients(manual, x, t)
            for layer in range(2):
                manual.weights[layer] -= cfg.learning_rate * gw[layer]
                manual.biases[layer] -= cfg.learning_rate * gb[layer]
        for a, b in zip(trained.weights, manual.weights):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(trained.biases, manual.biases):
            np.testing.assert_array_equal(a, b)

    def test_bit_reproducible(self):
        a = train(xor_config(seed=7), XOR_DATA)
        b = train(xor_config(seed=7), XOR_DATA)
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
        assert all(np.array_equal(x, y) for x, y in zip(a.biases, b.biases))
        assert a.epochs_run == b.epochs_run and a.final_error == b.final_error

    def test_divergence_raises_numeric_error_with_epoch(self):
        # an absurd learning rate launches the weight toward overflow; the
        # momentum term keeps pushing it over DBL_MAX within a few epochs
        data = [(np.array([10.0]), np.array([0.0]))]
        cfg = MlpConfig(layer_sizes=(1, 1), learning_rate=1e308, momentum=0.9, epochs=50, seed=0, target_error=0.0)
        with np.errstate(over="ignore"), pytest.raises(NumericError, match="epoch"):
            train(cfg, data)

    def test_empty_data_rejected(self):
        with pytest.raises(DataError, match="samples"):
            train(MlpConfig(layer_sizes=(2, 1)), [])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(DataError, match="shape"):
            train(MlpConfig(layer_sizes=(2, 1)), [(np.zeros(3), np.zeros(1))])

    def test_early_stop_on_target_error(self):
        cfg = MlpConfig(layer_sizes=(2, 4, 1), learning_rate=0.5, momentum=0.9, epochs=5000, seed=42, target_error=0.05)
        model = train(cfg, XOR_DATA)
        assert model.epochs_run < 5000
        assert model.final_error <= 0.05


class TestPredict:
    def test_argmax_readout(self):
        model = random_model((2, 3), seed=30)
        cls, scores = predict(model, np.array([0.1, 0.2]))
        assert cls == int(np.argmax(scores))

    def test_tie_breaks_to_lowest_index(self):
        model = MlpModel(
            config=MlpConfig(layer_sizes=(2, 3)),
            weights=[np.zeros((3, 2))],
            biases=[np.zeros(3)],
        )
        cls, scores = predict(model, np.array([1.0, -1.0]))
        np.testing.assert_allclose(scores, [0.5, 0.5, 0.5], atol=1e-15)
        assert cls == 0


class TestConfigValidation:
    def test_too_few_layers(self):
        with pytest.raises(DataError, match="layers"):
            MlpConfig(layer_sizes=(3,))

    def test_bad_momentum(self):
        with pytest.raises(DataError, match="momentum"):
            MlpConfig(layer_sizes=(2, 1), momentum=1.0)

    def test_bad_learning_rate(self):
        with pytest.raises(DataError, match="learning rate"):
            MlpConfig(layer_sizes=(2, 1), learning_rate=0.0)

    def test_parameter_shape_chain_enforced(self):
        with pytest.raises(DataError, match="chain"):
            MlpModel(
                config=MlpConfig(layer_sizes=(2, 2)),
                weights=[np.zeros((3, 2))],
                biases=[np.zeros(3)],
            )
