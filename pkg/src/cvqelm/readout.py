"""Standardisation and the two linear readouts (ridge and logistic).

Design matrix columns are ``[features | inputs | 1]``; the bias weight is
always last.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import expit, log_expit

from .errors import DataError, InvalidArgument

RIDGE = "ridge"
LOGISTIC = "logistic"
DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1)


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray
    constant: np.ndarray

    def to_dict(self):
        return {
            "means": [float(v) for v in self.means],
            "stds": [float(v) for v in self.stds],
            "constant": [bool(v) for v in self.constant],
        }

    @classmethod
    def from_dict(cls, doc):
        means = np.asarray(doc["means"], dtype=float)
        stds = np.asarray(doc["stds"], dtype=float)
        constant = np.asarray(doc.get("constant", [False] * len(means)), dtype=bool)
        return cls(means, stds, constant)


def standardize_fit(X):
    """Column means and standard deviations from the training rows only.

    Zero-variance columns get std 1 and are flagged in ``constant``.
    """
    X = _finite(X, "standardize_fit")
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidArgument("need at least two training rows to standardize")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    constant = ~(stds > 0)
    stds = np.where(constant, 1.0, stds)
    return Standardizer(means, stds, constant)


def standardize_apply(st, X):
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != st.means.shape[0]:
        raise InvalidArgument(f"expected {st.means.shape[0]} columns, got {X.shape[-1]}")
    Z = (X - st.means) / st.stds
    Z[..., st.constant] = 0.0
    return Z


def assemble_design(Phi, X):
    """Stack ``[Phi | X | 1]`` row-wise."""
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if Phi.shape[0] != X.shape[0]:
        raise InvalidArgument(f"row counts differ: {Phi.shape[0]} vs {X.shape[0]}")
    return np.hstack([Phi, X, np.ones((Phi.shape[0], 1))])


def _finite(A, what):
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise DataError(f"non-finite entries passed to {what}")
    return A


def _labels(y, n):
    y = np.asarray(y)
    if y.shape != (n,):
        raise InvalidArgument(f"expected {n} labels, got shape {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise InvalidArgument("labels must be 0 or 1")
    return y.astype(float)


def _penalty(P, lam, penalize_bias):
    pen = np.full(P, float(lam))
    if not penalize_bias:
        pen[-1] = 0.0
    return pen


def ridge_fit(Z, y, lam, penalize_bias=True):
    """Solve ``(Z^T Z + lam I) eta = Z^T T'`` with ``T' = 2y - 1`` by Cholesky."""
    Z = _finite(Z, "ridge_fit")
    y = _labels(y, Z.shape[0])
    if not lam > 0:
        raise InvalidArgument("ridge needs lambda > 0")
    t = 2.0 * y - 1.0
    A = Z.T @ Z
    A[np.diag_indices_from(A)] += _penalty(Z.shape[1], lam, penalize_bias)
    b = Z.T @ t
    try:
        return linalg.cho_solve(linalg.cho_factor(A), b)
    except linalg.LinAlgError:
        # only reachable with an unpenalised bias and a degenerate design
        return linalg.solve(A, b, assume_a="sym")


def ridge_objective(Z, y, eta, lam, penalize_bias=True):
    t = 2.0 * np.asarray(y, dtype=float) - 1.0
    pen = _penalty(Z.shape[1], lam, penalize_bias)
    return float(np.sum((t - Z @ eta) ** 2) + np.sum(pen * eta**2))


def ridge_gradient(Z, y, eta, lam, penalize_bias=True):
    t = 2.0 * np.asarray(y, dtype=float) - 1.0
    pen = _penalty(Z.shape[1], lam, penalize_bias)
    return 2.0 * Z.T @ (Z @ eta - t) + 2.0 * pen * eta


def logistic_objective(Z, y, eta, lam):
    """Regularised log-likelihood (to be maximised)."""
    s = Z @ eta
    ll = np.sum(y * log_expit(s) + (1.0 - y) * log_expit(-s))
    return float(ll - 0.5 * lam * eta @ eta)


def logistic_gradient(Z, y, eta, lam):
    return Z.T @ (y - expit(Z @ eta)) - lam * eta


@dataclass
class LogisticFit:
    weights: np.ndarray
    converged: bool
    n_iter: int
    grad_norm: float
    objective: list = field(default_factory=list)


def logistic_fit(Z, y, lam=1e-3, tol=1e-8, max_iter=100):
    """Damped Newton ascent from zero on the regularised log-likelihood.

    A step is accepted only if it does not lower the objective; otherwise it
    is halved, up to 50 times. Stops when the gradient max-norm drops below
    ``tol``. Non-convergence emits :class:`ConvergenceWarning`.
    """
    Z = _finite(Z, "logistic_fit")
    y = _labels(y, Z.shape[0])
    if lam < 0 or not tol > 0:
        raise InvalidArgument("need lambda >= 0 and tol > 0")
    P = Z.shape[1]
    eta = np.zeros(P)
    obj = logistic_objective(Z, y, eta, lam)
    history = [obj]
    grad = logistic_gradient(Z, y, eta, lam)
    gnorm = float(np.abs(grad).max())
    it = 0
    while gnorm >= tol and it < max_iter:
        it += 1
        p = expit(Z @ eta)
        w = p * (1.0 - p)
        H = (Z * w[:, None]).T @ Z
        H[np.diag_indices_from(H)] += lam
        try:
            step = linalg.solve(H, grad, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            step = linalg.lstsq(H, grad)[0]
        t = 1.0
        for _ in range(50):
            cand = eta + t * step
            cand_obj = logistic_objective(Z, y, cand, lam)
            if cand_obj >= obj:
                break
            t *= 0.5
        else:
            break
        new_grad = logistic_gradient(Z, y, cand, lam)
        if cand_obj == obj and np.abs(new_grad).max() >= gnorm:
            # flat to machine precision and no progress in the gradient
            break
        eta, obj, grad = cand, cand_obj, new_grad
        gnorm = float(np.abs(grad).max())
        history.append(obj)
    converged = gnorm < tol
    if not converged:
        warnings.warn(
            f"logistic readout stopped after {it} iterations with gradient norm {gnorm:.3e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return LogisticFit(eta, converged, it, gnorm, history)


def decision_scores(weights, Z):
    return np.asarray(Z, dtype=float) @ weights


def labels_from_scores(scores):
    """Class 1 iff the score is strictly positive (a zero score maps to 0)."""
    return (np.asarray(scores) > 0).astype(int)


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise InvalidArgument("prediction and truth lengths differ")
    if pred.size == 0:
        raise InvalidArgument("accuracy of an empty set is undefined")
    return float(np.mean(pred == truth))


@dataclass(eq=False)
class ReadoutModel:
    """Trained linear readout over ``[Phi | x | 1]``."""

    kind: str
    lam: float
    scheme: str
    weights: np.ndarray
    standardizer: Standardizer
    F: int
    R: int
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (RIDGE, LOGISTIC):
            raise InvalidArgument(f"unknown readout kind {self.kind!r}")
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.n_params,):
            raise InvalidArgument(
                f"weights have length {self.weights.size}, expected F+R+1={self.n_params}"
            )

    @property
    def n_params(self):
        return self.F + self.R + 1

    def predict(self, Phi, X_std):
        """Scores and labels for feature rows and matching standardized inputs.

        ``sigma(s) > 1/2`` and ``s > 0`` coincide, so both readouts share
        one threshold.
        """
        Phi = np.atleast_2d(Phi)
        X_std = np.atleast_2d(X_std)
        if Phi.shape[1] != self.R or X_std.shape[1] != self.F:
            raise InvalidArgument(
                f"expected R={self.R}, F={self.F}; got {Phi.shape[1]}, {X_std.shape[1]}"
            )
        scores = decision_scores(self.weights, assemble_design(Phi, X_std))
        return scores, labels_from_scores(scores)

    def to_dict(self):
        return {
            "kind": self.kind,
            "lambda": float(self.lam),
            "scheme": self.scheme,
            "weights": [float(w) for w in self.weights],
            "standardizer": self.standardizer.to_dict(),
            "feature_dims": {"F": self.F, "R": self.R},
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            doc["kind"],
            doc["lambda"],
            doc["scheme"],
            np.asarray(doc["weights"], dtype=float),
            Standardizer.from_dict(doc["standardizer"]),
            doc["feature_dims"]["F"],
            doc["feature_dims"]["R"],
            doc.get("info", {}),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def predict(model, Phi_row, x_row):
    """Score and label for a single sample."""
    scores, labels = model.predict(np.atleast_2d(Phi_row), np.atleast_2d(x_row))
    return float(scores[0]), int(labels[0])


def fit_weights(kind, Z, y, lam, penalize_bias=True, tol=1e-8, max_iter=100):
    if kind == RIDGE:
        return ridge_fit(Z, y, lam, penalize_bias), {}
    if kind == LOGISTIC:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            res = logistic_fit(Z, y, lam, tol, max_iter)
        return res.weights, {
            "converged": res.converged,
            "n_iter": res.n_iter,
            "grad_norm": res.grad_norm,
        }
    raise InvalidArgument(f"unknown readout kind {kind!r}")


def select_lambda(kind, Z_train, y_train, Z_val, y_val, grid=DEFAULT_LAMBDA_GRID, **kw):
    """Fit once per grid value and keep the best validation accuracy.

    Ties go to the earlier grid entry.
    """
    if not len(grid):
        raise InvalidArgument("lambda grid is empty")
    best = None
    for lam in grid:
        w, info = fit_weights(kind, Z_train, y_train, lam, **kw)
        acc = accuracy(labels_from_scores(Z_val @ w), y_val)
        if best is None or acc > best[1]:
            best = (lam, acc, w, info)
    lam, acc, w, info = best
    return lam, w, dict(info, val_accuracy=acc)
