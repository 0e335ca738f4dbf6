"""Single-hidden-layer MLP baseline in plain numpy.

Trained with Adam on L2-regularised binary cross-entropy, early-stopped on
validation accuracy, over a small weight-decay grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from .errors import CVQELMError, InvalidArgument
from .readout import accuracy

DEFAULT_WEIGHT_DECAYS = (1e-4, 1e-3, 1e-2)

_ACTIVATIONS = {
    "relu": (lambda a: np.maximum(a, 0.0), lambda a: (a > 0).astype(float)),
    "tanh": (np.tanh, lambda a: 1.0 - np.tanh(a) ** 2),
}


class TrainingDiverged(CVQELMError, RuntimeError):
    pass


def mlp_param_count(F, H):
    """``F H + H + H + 1 = H (F + 2) + 1``."""
    return H * (F + 2) + 1


@dataclass(eq=False)
class MLPModel:
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise InvalidArgument(f"unknown activation {self.activation!r}")
        H, F = self.W1.shape
        if self.b1.shape != (H,) or self.w2.shape != (H,):
            raise InvalidArgument("inconsistent MLP parameter shapes")
        assert self.n_params == mlp_param_count(F, H)

    @property
    def F(self):
        return self.W1.shape[1]

    @property
    def H(self):
        return self.W1.shape[0]

    @property
    def n_params(self):
        return self.W1.size + self.b1.size + self.w2.size + 1

    def params(self):
        return [self.W1, self.b1, self.w2, np.array([self.b2])]

    def with_params(self, params):
        W1, b1, w2, b2 = params
        return MLPModel(W1.copy(), b1.copy(), w2.copy(), float(b2[0]), self.activation, self.seed)

    def logits(self, X):
        act = _ACTIVATIONS[self.activation][0]
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.F:
            raise InvalidArgument(f"expected (N, {self.F}) inputs, got {X.shape}")
        return act(X @ self.W1.T + self.b1) @ self.w2 + self.b2

    def to_dict(self):
        return {
            "F": self.F,
            "H": self.H,
            "activation": self.activation,
            "seed": self.seed,
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": float(self.b2),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            np.asarray(doc["W1"], dtype=float).reshape(doc["H"], doc["F"]),
            np.asarray(doc["b1"], dtype=float),
            np.asarray(doc["w2"], dtype=float),
            float(doc["b2"]),
            doc["activation"],
            doc["seed"],
        )


def mlp_init(F, H, seed=0, activation="relu"):
    """Fan-in scaled uniform init, ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``."""
    if F < 1 or H < 1:
        raise InvalidArgument("F and H must be positive")
    rng = np.random.default_rng(seed)
    a1 = 1.0 / np.sqrt(F)
    a2 = 1.0 / np.sqrt(H)
    return MLPModel(
        rng.uniform(-a1, a1, (H, F)),
        rng.uniform(-a1, a1, H),
        rng.uniform(-a2, a2, H),
        float(rng.uniform(-a2, a2)),
        activation,
        seed,
    )


def mlp_predict(model, X):
    """Labels (``sigma(logit) > 1/2``, ties to 0) and logits."""
    logits = model.logits(X)
    return (logits > 0).astype(int), logits


def loss_and_grad(model, X, y, weight_decay=0.0):
    """Mean binary cross-entropy plus ``wd/2 (|W1|^2 + |w2|^2)`` and its gradient.

    Biases are not decayed. Gradients follow ``model.params()`` order.
    """
    act, dact = _ACTIVATIONS[model.activation]
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    N = X.shape[0]
    pre = X @ model.W1.T + model.b1
    hid = act(pre)
    z = hid @ model.w2 + model.b2
    loss = -np.mean(y * log_expit(z) + (1.0 - y) * log_expit(-z))
    loss += 0.5 * weight_decay * (np.sum(model.W1**2) + np.sum(model.w2**2))
    dz = (expit(z) - y) / N
    g_w2 = hid.T @ dz + weight_decay * model.w2
    g_b2 = np.array([dz.sum()])
    dpre = np.outer(dz, model.w2) * dact(pre)
    g_W1 = dpre.T @ X + weight_decay * model.W1
    g_b1 = dpre.sum(axis=0)
    return float(loss), [g_W1, g_b1, g_w2, g_b2]


@dataclass
class TrainReport:
    weight_decay: float | None = None
    val_accuracy: float | None = None
    best_epoch: int = 0
    trained: bool = True
    restarts: int = 0
    losses: dict = field(default_factory=dict)
    val_accuracies: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "weight_decay": self.weight_decay,
            "val_accuracy": self.val_accuracy,
            "best_epoch": self.best_epoch,
            "trained": self.trained,
            "restarts": self.restarts,
            "losses": {str(k): v for k, v in self.losses.items()},
            "val_accuracies": {str(k): v for k, v in self.val_accuracies.items()},
        }


def _adam_run(model, X, y, Xv, yv, wd, lr, epochs, patience, batch_size, seed):
    rng = np.random.default_rng([seed, 1])
    np_err = np.seterr(over="ignore", invalid="ignore")
    try:
        return _adam_loop(model, X, y, Xv, yv, wd, lr, epochs, patience, batch_size, rng)
    finally:
        np.seterr(**np_err)


def _adam_loop(model, X, y, Xv, yv, wd, lr, epochs, patience, batch_size, rng):
    params = [p.copy() for p in model.params()]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    b1, b2, eps = 0.9, 0.999, 1e-8
    t = 0
    N = X.shape[0]
    current = model.with_params(params)
    best = (accuracy(mlp_predict(current, Xv)[0], yv), 0, current)
    losses, val_accs = [], []
    stale = 0
    for epoch in range(1, epochs + 1):
        if batch_size is None or batch_size >= N:
            batches = [np.arange(N)]
        else:
            order = rng.permutation(N)
            batches = [order[i : i + batch_size] for i in range(0, N, batch_size)]
        epoch_loss = 0.0
        for idx in batches:
            loss, grads = loss_and_grad(current, X[idx], y[idx], wd)
            if not np.isfinite(loss):
                raise FloatingPointError
            epoch_loss += loss * len(idx) / N
            t += 1
            for k, g in enumerate(grads):
                m[k] = b1 * m[k] + (1 - b1) * g
                v[k] = b2 * v[k] + (1 - b2) * g * g
                mhat = m[k] / (1 - b1**t)
                vhat = v[k] / (1 - b2**t)
                params[k] = params[k] - lr * mhat / (np.sqrt(vhat) + eps)
            if not all(np.isfinite(q).all() for q in params):
                raise FloatingPointError
            current = model.with_params(params)
        losses.append(epoch_loss)
        acc = accuracy(mlp_predict(current, Xv)[0], yv)
        val_accs.append(acc)
        if acc > best[0]:
            best = (acc, epoch, current)
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return best, losses, val_accs


def mlp_train(
    model,
    train,
    val,
    weight_decays=DEFAULT_WEIGHT_DECAYS,
    epochs=500,
    patience=20,
    lr=1e-3,
    batch_size="auto",
):
    """Train from ``model``'s initial weights for every weight decay in the grid.

    ``train`` and ``val`` are ``(X, y)`` pairs of standardized inputs. Returns
    the checkpoint with the best validation accuracy over all epochs and grid
    members (ties go to the earlier one) and a :class:`TrainReport`.
    ``batch_size="auto"`` means mini-batches of 64 up to 10^4 rows, else 256;
    ``None`` trains full batch.
    """
    X, y = (np.asarray(a, dtype=float) for a in train)
    Xv, yv = (np.asarray(a, dtype=float) for a in val)
    if X.shape[0] == 0 or Xv.shape[0] == 0:
        raise InvalidArgument("training and validation splits must be non-empty")
    if epochs == 0:
        return model, TrainReport(trained=False)
    if batch_size == "auto":
        batch_size = 64 if X.shape[0] <= 10_000 else 256
    report = TrainReport()
    chosen = None
    for wd in weight_decays:
        step = lr
        for attempt in range(2):
            try:
                best, losses, val_accs = _adam_run(
                    model, X, y, Xv, yv, wd, step, epochs, patience, batch_size, model.seed
                )
                break
            except FloatingPointError:
                if attempt == 1:
                    raise TrainingDiverged(f"non-finite loss at weight decay {wd}") from None
                report.restarts += 1
                step = lr / 10.0
        report.losses[wd] = losses
        report.val_accuracies[wd] = val_accs
        if chosen is None or best[0] > chosen[0]:
            chosen = (best[0], best[1], best[2], wd)
    acc, epoch, trained, wd = chosen
    report.weight_decay = wd
    report.val_accuracy = acc
    report.best_epoch = epoch
    return trained, report


def save_mlp(model, report, path):
    doc = {"model": model.to_dict(), "report": report.to_dict() if report else None}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
