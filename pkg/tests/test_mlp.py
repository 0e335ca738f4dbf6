import numpy as np
import pytest

from cvqelm.errors import InvalidArgument
from cvqelm.mlp import (
    MLPModel,
    TrainingDiverged,
    loss_and_grad,
    mlp_init,
    mlp_param_count,
    mlp_predict,
    mlp_train,
    save_mlp,
)
from cvqelm.readout import accuracy
from cvqelm.verify import mlp_gradient_deviation


@pytest.mark.parametrize("F,H,count", [(16, 2, 37), (16, 10, 181), (10, 10, 121)])
def test_param_counts(F, H, count):
    assert mlp_param_count(F, H) == count
    assert mlp_init(F, H, seed=1).n_params == count


def test_init_deterministic_and_scaled():
    a, b = mlp_init(5, 3, seed=7), mlp_init(5, 3, seed=7)
    assert np.array_equal(a.W1, b.W1) and a.b2 == b.b2
    assert np.abs(a.W1).max() <= 1 / np.sqrt(5)
    assert np.abs(a.w2).max() <= 1 / np.sqrt(3)
    with pytest.raises(InvalidArgument):
        mlp_init(0, 3)


def test_zero_weights_predict_zero():
    m = MLPModel(np.zeros((2, 3)), np.zeros(2), np.zeros(2), 0.0)
    labels, logits = mlp_predict(m, np.ones((4, 3)))
    assert np.all(logits == 0) and np.all(labels == 0)


def test_hand_set_sign_rule(rng):
    m = MLPModel(np.array([[1.0, 0.0]]), np.zeros(1), np.array([1.0]), -1e-9)
    X = rng.normal(size=(50, 2))
    labels, _ = mlp_predict(m, X)
    assert np.array_equal(labels, (X[:, 0] > 1e-9).astype(int))


def test_predict_dimension_mismatch():
    with pytest.raises(InvalidArgument):
        mlp_predict(mlp_init(3, 2), np.zeros((2, 4)))


@pytest.mark.parametrize("activation", ["tanh", "relu"])
def test_gradient_finite_differences(activation):
    assert mlp_gradient_deviation(5, seed=3, activation=activation) < 1e-5


def test_weight_decay_skips_biases(rng):
    m = mlp_init(3, 2, seed=0)
    X, y = rng.normal(size=(6, 3)), rng.integers(0, 2, 6)
    _, g0 = loss_and_grad(m, X, y, 0.0)
    _, g1 = loss_and_grad(m, X, y, 0.5)
    assert np.allclose(g1[0] - g0[0], 0.5 * m.W1)
    assert np.allclose(g1[2] - g0[2], 0.5 * m.w2)
    assert np.array_equal(g1[1], g0[1]) and np.array_equal(g1[3], g0[3])


def test_separable_toy_reaches_full_accuracy(rng):
    X = rng.uniform(-1, 1, size=(200, 2))
    X = X[np.abs(X[:, 0] + X[:, 1]) > 0.2]
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    net, report = mlp_train(mlp_init(2, 2, seed=3), (X, y), (X, y), (1e-4,), epochs=500, patience=50, lr=1e-2)
    assert accuracy(mlp_predict(net, X)[0], y) == 1.0
    assert report.trained and len(report.losses[1e-4]) >= 1


def test_zero_epochs_returns_initial_model(rng):
    net = mlp_init(2, 2, seed=1)
    X, y = rng.normal(size=(10, 2)), np.r_[np.zeros(5), np.ones(5)]
    out, report = mlp_train(net, (X, y), (X, y), epochs=0)
    assert out is net and not report.trained


def test_training_deterministic(rng):
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] > 0).astype(int)
    a, ra = mlp_train(mlp_init(3, 2, seed=5), (X[:200], y[:200]), (X[200:], y[200:]), epochs=30)
    b, rb = mlp_train(mlp_init(3, 2, seed=5), (X[:200], y[:200]), (X[200:], y[200:]), epochs=30)
    for p, q in zip(a.params(), b.params()):
        assert np.array_equal(p, q)
    assert ra.to_dict() == rb.to_dict()


def test_early_stopping_returns_best_checkpoint(rng):
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=300) > 0).astype(int)
    net, report = mlp_train(mlp_init(3, 2, seed=2), (X[:200], y[:200]), (X[200:], y[200:]), epochs=60, patience=5)
    best_seen = max(max(v) for v in report.val_accuracies.values())
    assert report.val_accuracy >= best_seen
    assert accuracy(mlp_predict(net, X[200:])[0], y[200:]) == report.val_accuracy


def test_divergence_restarts_then_fails(rng):
    with np.errstate(over="ignore"):
        X = np.abs(rng.normal(size=(20, 2))) * 1e308
    y = np.r_[np.zeros(10), np.ones(10)]
    with pytest.raises(TrainingDiverged):
        mlp_train(mlp_init(2, 2), (X, y), (X, y), (0.0,), epochs=5)


def test_empty_split_rejected():
    with pytest.raises(InvalidArgument):
        mlp_train(mlp_init(2, 2), (np.zeros((0, 2)), np.zeros(0)), (np.zeros((2, 2)), np.zeros(2)))


def test_json_round_trip(tmp_path, rng):
    import json

    X = rng.normal(size=(40, 3))
    y = (X[:, 0] > 0).astype(int)
    net, report = mlp_train(mlp_init(3, 2, seed=1), (X, y), (X, y), epochs=5)
    save_mlp(net, report, tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    back = MLPModel.from_dict(doc["model"])
    assert np.array_equal(back.logits(X), net.logits(X))
    assert doc["report"]["weight_decay"] == report.weight_decay
