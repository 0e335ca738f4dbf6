"""Self-check suite behind ``cvqelm verify``.

Each check measures a deviation against a fixed tolerance. The ``cx``
argument of :func:`verify` lets tests inject a faulty gate constructor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .gaussian import (
    apply,
    beamsplitter_gate,
    compose,
    cx_gate,
    cx_gate_decomposed,
    displacement_gate,
    squeeze_gate,
    vacuum_state,
)
from .mlp import loss_and_grad, mlp_init
from .readout import logistic_fit, logistic_gradient, ridge_fit, ridge_gradient
from .substrate import draw_substrate, forward, homodyne_features, pnr_features


@dataclass
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.deviation) and self.deviation <= self.tolerance)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: deviation {self.deviation:.3e} (tolerance {self.tolerance:.0e})"


def random_gate(rng, M, cx=cx_gate):
    kind = rng.integers(4)
    a, b = rng.choice(M, size=2, replace=False) if M > 1 else (0, 0)
    if kind == 0 or M == 1 and kind >= 2:
        return displacement_gate(M, a, *rng.normal(size=2))
    if kind == 1:
        return squeeze_gate(M, a, rng.uniform(-1, 1))
    if kind == 2:
        return beamsplitter_gate(M, a, b, rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi, np.pi))
    return cx(M, a, b, rng.uniform(-2, 2))


def symplectic_suite(n_compositions=1000, seed=0, cx=cx_gate):
    """Worst symplectic, purity and physicality deviations over random circuits."""
    rng = np.random.default_rng(seed)
    symp = purity = phys = 0.0
    for _ in range(n_compositions):
        M = int(rng.integers(1, 5))
        gates = [random_gate(rng, M, cx) for _ in range(int(rng.integers(1, 6)))]
        g = compose(*gates)
        symp = max(symp, g.symplectic_error())
        st = apply(vacuum_state(M), g, check=False)
        purity = max(purity, abs(st.purity_det() - 1.0))
        phys = max(phys, -st.min_eigenvalue())
    return symp, purity, phys


def cx_decomposition_deviation(n=20, seed=0, cx=cx_gate):
    rng = np.random.default_rng(seed)
    dev = 0.0
    for s in rng.uniform(-3, 3, n):
        a = cx(2, 0, 1, s).symplectic
        b = cx_gate_decomposed(2, 0, 1, s).symplectic
        dev = max(dev, float(np.abs(a - b).max()))
    return dev


def gaussian_features(x, cfg):
    st = forward(x, cfg)
    return np.concatenate([pnr_features(st), homodyne_features(st)])


def oracle_features(x, cfg, D=40):
    om = fock.oracle_moments(fock.simulate_adaptive(x, cfg, D))
    return np.concatenate([om[k] for k in ("n", "var_n", "x", "p", "xx", "pp", "xp")])


def oracle_deviation(n_draws=10, seed=0, D=40, s_max=1.0, c=1.0):
    """Max |Gaussian - Fock| over all PNR and homodyne features at M=2."""
    rng = np.random.default_rng(seed)
    dev = 0.0
    for _ in range(n_draws):
        cfg = draw_substrate(2, s_max, int(rng.integers(2**63)), encoding_scale=c)
        x = rng.uniform(-1, 1, 2)
        dev = max(dev, float(np.abs(gaussian_features(x, cfg) - oracle_features(x, cfg, D)).max()))
    return dev


def ridge_deviation(n_instances=100, seed=0):
    """Scaled gradient at the solution and distance to a least-squares oracle."""
    rng = np.random.default_rng(seed)
    grad_dev = oracle_dev = 0.0
    for _ in range(n_instances):
        N, P = int(rng.integers(5, 60)), int(rng.integers(1, 12))
        Z = rng.normal(size=(N, P))
        y = rng.integers(0, 2, N)
        lam = 10 ** rng.uniform(-3, 1)
        eta = ridge_fit(Z, y, lam)
        t = 2.0 * y - 1.0
        scale = max(1.0, float(np.abs(Z.T @ t).max()))
        grad_dev = max(grad_dev, float(np.abs(ridge_gradient(Z, y, eta, lam)).max()) / scale)
        # augmented least squares [Z; sqrt(lam) I] eta = [t; 0], solved by SVD
        A = np.vstack([Z, np.sqrt(lam) * np.eye(P)])
        ref = np.linalg.lstsq(A, np.concatenate([t, np.zeros(P)]), rcond=None)[0]
        oracle_dev = max(oracle_dev, float(np.abs(eta - ref).max()))
    return grad_dev, oracle_dev


def logistic_fixtures(seed=0):
    """Overlapping-class design matrices with a bias column."""
    rng = np.random.default_rng(seed)
    out = []
    for N, P in ((50, 3), (200, 6), (1000, 10)):
        X = rng.normal(size=(N, P - 1))
        logits = X @ rng.normal(size=P - 1)
        y = (rng.uniform(size=N) < 1 / (1 + np.exp(-logits))).astype(int)
        out.append((np.hstack([X, np.ones((N, 1))]), y))
    return out


def logistic_deviation(lam=1e-3, seed=0):
    """Worst objective decrease between accepted steps and final gradient norm."""
    drop = grad = 0.0
    for Z, y in logistic_fixtures(seed):
        res = logistic_fit(Z, y, lam, tol=1e-8, max_iter=100)
        drop = max(drop, float(-np.min(np.diff(res.objective), initial=0.0)))
        grad = max(grad, float(np.abs(logistic_gradient(Z, y, res.weights, lam)).max()))
    return drop, grad


def mlp_gradient_deviation(n_instances=5, seed=0, h=1e-5, activation="tanh"):
    """Max relative error of analytic gradients against central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n_instances):
        model = mlp_init(4, 3, seed=int(rng.integers(2**32)), activation=activation)
        X = rng.normal(size=(8, 4))
        y = rng.integers(0, 2, 8)
        wd = 1e-2
        _, grads = loss_and_grad(model, X, y, wd)
        params = model.params()
        for p_i, (p, g) in enumerate(zip(params, grads)):
            for idx in np.ndindex(p.shape):
                plus = [q.copy() for q in params]
                minus = [q.copy() for q in params]
                plus[p_i][idx] += h
                minus[p_i][idx] -= h
                fp, _ = loss_and_grad(model.with_params(plus), X, y, wd)
                fm, _ = loss_and_grad(model.with_params(minus), X, y, wd)
                fd = (fp - fm) / (2 * h)
                err = abs(fd - g[idx]) / max(abs(fd), abs(g[idx]), 1e-3)
                worst = max(worst, err)
    return worst


def verify(quick=False, cx=cx_gate):
    """Run every check; returns the list of :class:`Check` results."""
    n_comp = 200 if quick else 1000
    n_draws = 3 if quick else 10
    symp, purity, phys = symplectic_suite(n_comp, cx=cx)
    ridge_grad, ridge_oracle = ridge_deviation(30 if quick else 100)
    drop, lgrad = logistic_deviation()
    checks = [
        Check(f"symplectic form preserved ({n_comp} circuits)", symp, 1e-12),
        Check("purity det(2 cov) = 1", purity, 1e-9),
        Check("physicality eigenvalue bound", phys, 1e-10),
        Check("CX decomposition identity (20 random s)", cx_decomposition_deviation(cx=cx), 1e-10),
        Check(f"Gaussian vs Fock moments, M=2, D=40 ({n_draws} draws)", oracle_deviation(n_draws), 1e-6),
        Check("Gaussian vs Fock moments, M=2, D=60 (cutoff raised)", oracle_deviation(2, seed=1, D=60), 1e-6),
        Check("ridge gradient at solution (scaled)", ridge_grad, 1e-8),
        Check("ridge vs least-squares oracle", ridge_oracle, 1e-9),
        Check("logistic objective never decreases", drop, 0.0),
        Check("logistic final gradient norm", lgrad, 1e-8),
        Check("MLP gradient vs finite differences (relative)", mlp_gradient_deviation(2 if quick else 5), 1e-5),
    ]
    return checks
