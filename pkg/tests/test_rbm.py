import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrfdd import rbm
from corrfdd.rbm import Rbm, TrainConfig, cd1_update, hidden_probs, reconstruct, reconstruction_error, sigmoid, train
from corrfdd.signals import normalize, sliding_correlations, window_stack
from corrfdd.simeval import generate_nominal


def random_model(seed, n_visible=4, n_hidden=3, scale=1.0):
    g = np.random.default_rng(seed)
    return Rbm(g.normal(0, scale, (n_hidden, n_visible)), g.normal(0, scale, n_visible), g.normal(0, scale, n_hidden))


def naive_hidden(model, v):
    out = []
    for i in range(model.n_hidden):
        act = model.hidden_bias[i]
        for j in range(model.n_visible):
            act += model.weights[i, j] * v[j]
        out.append(1.0 / (1.0 + math.exp(-act)))
    return out


def naive_visible(model, h):
    out = []
    for j in range(model.n_visible):
        act = model.visible_bias[j]
        for i in range(model.n_hidden):
            act += model.weights[i, j] * h[i]
        out.append(1.0 / (1.0 + math.exp(-act)))
    return out


def exhaustive_joint(model):
    """P(v, h) over every binary configuration, normalized by the explicit Z."""
    configs = [(np.array(v, float), np.array(h, float))
               for v in itertools.product((0, 1), repeat=model.n_visible)
               for h in itertools.product((0, 1), repeat=model.n_hidden)]
    unnorm = np.array([math.exp(-model.energy(v, h)) for v, h in configs])
    return configs, unnorm / unnorm.sum()


# --- sigmoid -------------------------------------------------------------

def test_sigmoid_zero():
    assert sigmoid(0.0) == 0.5


@pytest.mark.parametrize("x", [1.0, 5.0, 30.0])
def test_sigmoid_symmetry(x):
    assert sigmoid(-x) == pytest.approx(1 - sigmoid(x), abs=1e-15)


def test_sigmoid_extremes_without_warnings():
    with np.errstate(over="raise", invalid="raise"):
        assert sigmoid(1000.0) == 1.0
        assert sigmoid(-1000.0) == 0.0


# --- conditionals --------------------------------------------------------

def test_zero_weights_give_bias_sigmoid():
    m = Rbm(np.zeros((3, 2)), [0.3, -0.7], [1.0, -2.0, 0.5])
    np.testing.assert_allclose(hidden_probs(m, [0.4, 0.9]), sigmoid(m.hidden_bias))
    np.testing.assert_allclose(rbm.visible_probs(m, [1, 0, 1]), sigmoid(m.visible_bias))


def test_zero_inputs_give_bias_sigmoid():
    m = random_model(0)
    np.testing.assert_allclose(hidden_probs(m, np.zeros(4)), sigmoid(m.hidden_bias))
    np.testing.assert_allclose(rbm.visible_probs(m, np.zeros(3)), sigmoid(m.visible_bias))


@pytest.mark.parametrize("seed", range(5))
def test_conditionals_match_double_loop(seed):
    m = random_model(seed)
    g = np.random.default_rng(100 + seed)
    v, h = g.random(4), g.random(3)
    np.testing.assert_allclose(hidden_probs(m, v), naive_hidden(m, v), atol=1e-12, rtol=0)
    np.testing.assert_allclose(rbm.visible_probs(m, h), naive_visible(m, h), atol=1e-12, rtol=0)


def test_dimension_mismatch():
    m = random_model(0)
    with pytest.raises(ValueError):
        hidden_probs(m, np.zeros(5))
    with pytest.raises(ValueError):
        rbm.visible_probs(m, np.zeros(4))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_conditionals_strictly_inside_unit_interval(seed):
    m = random_model(seed, scale=3.0)
    v = np.random.default_rng(seed).random(4)
    p = hidden_probs(m, v)
    assert np.all((p > 0) & (p < 1))


def test_batch_conditionals_match_rowwise():
    m = random_model(3)
    vs = np.random.default_rng(0).random((6, 4))
    np.testing.assert_allclose(hidden_probs(m, vs), [hidden_probs(m, v) for v in vs])


# --- energy / partition function -----------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_exhaustive_joint_sums_to_one(seed):
    m = random_model(seed, n_visible=2, n_hidden=2)
    configs, p = exhaustive_joint(m)
    assert len(configs) == 16
    assert abs(p.sum() - 1.0) <= 1e-9


def test_conditional_from_joint_matches_hidden_probs():
    # p(h_i = 1 | v) from the exhaustive joint equals the closed-form sigmoid
    m = random_model(7, n_visible=2, n_hidden=2)
    configs, p = exhaustive_joint(m)
    for v in itertools.product((0, 1), repeat=2):
        sel = [i for i, (cv, _) in enumerate(configs) if tuple(cv) == v]
        pv = sum(p[i] for i in sel)
        for unit in range(2):
            ph = sum(p[i] for i in sel if configs[i][1][unit] == 1) / pv
            assert ph == pytest.approx(hidden_probs(m, np.array(v, float))[unit], abs=1e-12)


# --- CD updates -----------------------------------------------------------

def test_lr_zero_is_identity():
    m = random_model(1)
    out = cd1_update(m, np.random.default_rng(0).random((5, 4)), 0.0, np.random.default_rng(1))
    np.testing.assert_array_equal(out.weights, m.weights)
    np.testing.assert_array_equal(out.visible_bias, m.visible_bias)
    np.testing.assert_array_equal(out.hidden_bias, m.hidden_bias)


def test_update_does_not_mutate_input():
    m = random_model(1)
    before = m.copy()
    cd1_update(m, np.full((3, 4), 0.5), 0.1, np.random.default_rng(0))
    np.testing.assert_array_equal(m.weights, before.weights)


def test_repeated_batch_equals_single_sample():
    # Saturated hidden biases make every hidden sample deterministic, so the
    # random draws cannot differ between the two batches.
    m = random_model(2)
    m = Rbm(m.weights, m.visible_bias, np.array([40.0, -40.0, 40.0]))
    v = np.array([0.2, 0.9, 0.4, 0.7])
    one = cd1_update(m, v[None, :], 0.1, np.random.default_rng(5))
    many = cd1_update(m, np.tile(v, (6, 1)), 0.1, np.random.default_rng(5))
    np.testing.assert_allclose(many.weights, one.weights, atol=1e-15)
    np.testing.assert_allclose(many.visible_bias, one.visible_bias, atol=1e-15)
    np.testing.assert_allclose(many.hidden_bias, one.hidden_bias, atol=1e-15)


def test_update_matches_hand_computed_step():
    m = m0 = Rbm([[0.5, -0.5]], [0.1, 0.2], [40.0])  # the hidden unit is always on
    v0 = np.array([1.0, 0.0])
    out = cd1_update(m, v0[None, :], 0.5, np.random.default_rng(0))
    ph0 = 1 / (1 + math.exp(-(40.0 + 0.5)))
    v1 = np.array([1 / (1 + math.exp(-(0.1 + 0.5))), 1 / (1 + math.exp(-(0.2 - 0.5)))])
    ph1 = 1 / (1 + math.exp(-(40.0 + 0.5 * v1[0] - 0.5 * v1[1])))
    np.testing.assert_allclose(out.weights[0], m0.weights[0] + 0.5 * (ph0 * v0 - ph1 * v1), atol=1e-12)
    np.testing.assert_allclose(out.visible_bias, m0.visible_bias + 0.5 * (v0 - v1), atol=1e-12)
    np.testing.assert_allclose(out.hidden_bias, [40.0 + 0.5 * (ph0 - ph1)], atol=1e-12)


def test_empty_batch_rejected():
    with pytest.raises(ValueError):
        cd1_update(random_model(0), np.zeros((0, 4)), 0.1, np.random.default_rng(0))


def test_many_updates_reduce_point_mass_error():
    data = np.tile([0.9, 0.1, 0.8, 0.2], (20, 1))
    g = np.random.default_rng(0)
    m = rbm.init_model(4, 6, g)
    before = reconstruction_error(m, data)
    for _ in range(300):
        m = cd1_update(m, data, 0.1, g)
    assert reconstruction_error(m, data) < before


# --- training ---------------------------------------------------------------

def point_mass(n=200):
    return np.tile(np.array([0.95, 0.9, 0.85, 0.9, 0.95, 0.9, 0.85, 0.9, 0.95, 0.9]), (n, 1))


def test_point_mass_training_majority_of_seeds():
    data = point_mass()
    passed = 0
    for seed in range(5):
        hist = []
        train(data, TrainConfig(seed=seed), history=hist)
        passed += hist[-1] < 0.5 * hist[0]
    assert passed >= 4


def test_point_mass_reconstruction_close():
    data = point_mass()
    m = train(data, TrainConfig(seed=0))
    assert np.max(np.abs(reconstruct(m, data[0]) - data[0])) < 0.1


def test_training_curve_on_correlation_windows():
    mtx = generate_nominal(2, 3000, seed=5)
    c = sliding_correlations(mtx.values[0], mtx.values[1], 100)
    w = window_stack(c, 10)
    x = normalize(w)
    hist = []
    train(x, TrainConfig(seed=3), history=hist)
    assert len(hist) == 31
    assert hist[30] < hist[0]


def test_training_deterministic():
    data = np.random.default_rng(0).random((50, 10))
    a = train(data, TrainConfig(seed=11, epochs=3))
    b = train(data, TrainConfig(seed=11, epochs=3))
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_one_epoch_differs_from_initialization():
    data = np.random.default_rng(0).random((50, 10))
    cfg = TrainConfig(seed=2, epochs=1)
    init = rbm.init_model(10, cfg.n_hidden, np.random.default_rng(cfg.seed))
    trained = train(data, cfg)
    assert not np.array_equal(init.weights, trained.weights)


def test_empty_training_data():
    with pytest.raises(ValueError):
        train(np.zeros((0, 10)))


@pytest.mark.parametrize("kw", [{"epochs": 0}, {"learning_rate": 0.0}, {"batch_size": -1}, {"seed": -1}])
def test_train_config_validation(kw):
    with pytest.raises(ValueError):
        TrainConfig(**kw)


# --- reconstruction ----------------------------------------------------------

def test_reconstruct_is_mean_field_pass():
    m = random_model(4)
    v = np.random.default_rng(1).random(4)
    np.testing.assert_allclose(reconstruct(m, v, 1), naive_visible(m, naive_hidden(m, v)), atol=1e-12)
    np.testing.assert_array_equal(reconstruct(m, v), reconstruct(m, v))


def test_reconstruct_rejects_zero_steps():
    with pytest.raises(ValueError):
        reconstruct(random_model(0), np.zeros(4), 0)


def test_reconstruction_error_hand_mse():
    m = Rbm.zeros(2, 1)  # reconstructs every input as [0.5, 0.5]
    data = np.array([[1.0, 0.0], [0.5, 0.25]])
    expect = ((0.5 ** 2 + 0.5 ** 2) + (0.0 + 0.25 ** 2)) / 4
    assert reconstruction_error(m, data) == pytest.approx(expect, abs=1e-15)
    assert reconstruction_error(m, data[::-1]) == pytest.approx(expect, abs=1e-15)
    assert reconstruction_error(m, [[0.5, 0.5]]) == 0.0


# --- serialization ------------------------------------------------------------

def test_json_round_trip_exact():
    m = random_model(9, 10, 20)
    back = Rbm.from_dict(json.loads(json.dumps(m.to_dict())))
    np.testing.assert_array_equal(back.weights, m.weights)
    np.testing.assert_array_equal(back.visible_bias, m.visible_bias)
    np.testing.assert_array_equal(back.hidden_bias, m.hidden_bias)
    d = m.to_dict()
    assert d["type"] == "rbm" and d["n_visible"] == 10 and d["n_hidden"] == 20
    assert d["weights"][:10] == list(m.weights[0])


def test_invalid_models():
    with pytest.raises(ValueError):
        Rbm(np.zeros((2, 3)), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        Rbm([[np.nan]], [0.0], [0.0])
    with pytest.raises(ValueError):
        Rbm.from_dict({"type": "gmm"})
