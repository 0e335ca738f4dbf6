"""Gaussian states and gates in the covariance-matrix picture.

Quadratures are interleaved, ``(x_1, p_1, ..., x_M, p_M)``, with
``x = (a + a^dag)/sqrt(2)`` so the vacuum covariance is ``I/2``.
A gate is the pair ``(S, d)`` acting on moments as ``r -> S r + d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import InvalidArgument, StateError

SQRT2 = np.sqrt(2.0)

SYMPLECTIC_TOL = 1e-12
PHYSICAL_TOL = 1e-10
PURITY_TOL = 1e-9


def omega(M):
    """Symplectic form for ``M`` modes, 2x2 blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(M), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_modes(M):
    if int(M) != M or M < 1:
        raise InvalidArgument(f"mode count must be a positive integer, got {M!r}")
    return int(M)


def _check_index(M, mode, name="mode"):
    if int(mode) != mode or not 0 <= mode < M:
        raise InvalidArgument(f"{name}={mode!r} out of range for {M} modes")
    return int(mode)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First and second moments of an ``M``-mode Gaussian state."""

    modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        M = _check_modes(self.modes)
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.shape != (2 * M,) or cov.shape != (2 * M, 2 * M):
            raise InvalidArgument(
                f"moment shapes {mean.shape}, {cov.shape} do not match {M} modes"
            )
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise InvalidArgument("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def min_eigenvalue(self):
        """Smallest eigenvalue of ``cov + (i/2) Omega``; negative means unphysical."""
        herm = self.cov + 0.5j * omega(self.modes)
        return float(np.linalg.eigvalsh(herm).min())

    def is_physical(self, tol=PHYSICAL_TOL):
        return self.min_eigenvalue() >= -tol

    def purity_det(self):
        """``det(2 cov)``, equal to 1 for pure states."""
        return float(np.linalg.det(2.0 * self.cov))

    def check_physical(self, tol=PHYSICAL_TOL):
        lam = self.min_eigenvalue()
        if lam < -tol:
            raise StateError(f"uncertainty principle violated (min eigenvalue {lam:.3e})")
        return self


@dataclass(frozen=True, eq=False)
class GateOp:
    """Gaussian unitary as symplectic matrix plus displacement."""

    modes: int
    symplectic: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        M = _check_modes(self.modes)
        S = _frozen(self.symplectic)
        d = _frozen(self.shift)
        if S.shape != (2 * M, 2 * M) or d.shape != (2 * M,):
            raise InvalidArgument(f"gate shapes {S.shape}, {d.shape} do not match {M} modes")
        object.__setattr__(self, "symplectic", S)
        object.__setattr__(self, "shift", d)

    def then(self, other):
        """Gate equivalent to applying ``self`` first and ``other`` second."""
        return compose(self, other)

    def symplectic_error(self):
        """Max-norm of ``S^T Omega S - Omega``."""
        W = omega(self.modes)
        S = self.symplectic
        return float(np.abs(S.T @ W @ S - W).max())

    def is_symplectic(self, tol=SYMPLECTIC_TOL):
        return self.symplectic_error() <= tol


def identity_gate(M):
    M = _check_modes(M)
    return GateOp(M, np.eye(2 * M), np.zeros(2 * M))


def compose(*gates):
    """Compose gates in application order: ``compose(g1, g2)`` applies g1 then g2."""
    if not gates:
        raise InvalidArgument("compose needs at least one gate")
    M = gates[0].modes
    S = np.eye(2 * M)
    d = np.zeros(2 * M)
    for g in gates:
        if g.modes != M:
            raise InvalidArgument(f"cannot compose {g.modes}-mode gate with {M}-mode gate")
        S = g.symplectic @ S
        d = g.symplectic @ d + g.shift
    return GateOp(M, S, d)


def vacuum_state(M):
    M = _check_modes(M)
    return GaussianState(M, np.zeros(2 * M), 0.5 * np.eye(2 * M))


def displacement_gate(M, mode, alpha_re, alpha_im=0.0):
    M = _check_modes(M)
    mode = _check_index(M, mode)
    d = np.zeros(2 * M)
    d[2 * mode] = SQRT2 * alpha_re
    d[2 * mode + 1] = SQRT2 * alpha_im
    return GateOp(M, np.eye(2 * M), d)


def squeeze_gate(M, mode, r):
    """Real squeezing: ``x -> e^{-r} x``, ``p -> e^{r} p`` on ``mode``."""
    M = _check_modes(M)
    mode = _check_index(M, mode)
    S = np.eye(2 * M)
    S[2 * mode, 2 * mode] = np.exp(-r)
    S[2 * mode + 1, 2 * mode + 1] = np.exp(r)
    return GateOp(M, S, np.zeros(2 * M))


def symplectic_from_hamiltonian(G):
    """Heisenberg action of ``exp(-i r^T G r / 2)`` for real symmetric ``G``.

    Moments transform with ``S = expm(Omega G)``.
    """
    G = np.asarray(G, dtype=float)
    return expm(omega(G.shape[0] // 2) @ G)


def beamsplitter_gate(M, mode_a, mode_b, theta, phi=0.0):
    """``exp[theta (e^{i phi} a_a a_b^dag - e^{-i phi} a_a^dag a_b)]``.

    In quadratures the generator is
    ``H = -theta [sin(phi)(x_a x_b + p_a p_b) + cos(phi)(p_a x_b - x_a p_b)]``.
    """
    M = _check_modes(M)
    mode_a = _check_index(M, mode_a, "mode_a")
    mode_b = _check_index(M, mode_b, "mode_b")
    if mode_a == mode_b:
        raise InvalidArgument("beamsplitter needs two distinct modes")
    xa, pa, xb, pb = 2 * mode_a, 2 * mode_a + 1, 2 * mode_b, 2 * mode_b + 1
    G = np.zeros((2 * M, 2 * M))
    for u, v, c in (
        (xa, xb, -theta * np.sin(phi)),
        (pa, pb, -theta * np.sin(phi)),
        (pa, xb, -theta * np.cos(phi)),
        (xa, pb, theta * np.cos(phi)),
    ):
        G[u, v] += c
        G[v, u] += c
    return GateOp(M, symplectic_from_hamiltonian(G), np.zeros(2 * M))


def cx_gate(M, control, target, s):
    """Controlled addition ``exp(-i s x_control p_target)``.

    Heisenberg action: ``x_t -> x_t + s x_c`` and ``p_c -> p_c - s p_t``.
    """
    M = _check_modes(M)
    control = _check_index(M, control, "control")
    target = _check_index(M, target, "target")
    if control == target:
        raise InvalidArgument("CX gate needs distinct control and target")
    S = np.eye(2 * M)
    S[2 * target, 2 * control] = s
    S[2 * control + 1, 2 * target + 1] = -s
    return GateOp(M, S, np.zeros(2 * M))


def cx_decomposition_params(s):
    """Squeezing and beamsplitter angle for the B-S-B form of CX(s).

    ``sinh r = -s/2`` and ``cos 2theta = -tanh r``. Of the two roots for
    theta only the non-positive one reproduces CX with the beamsplitter
    convention above.
    """
    r = float(np.arcsinh(-s / 2.0))
    theta = -0.5 * float(np.arccos(-np.tanh(r)))
    return r, theta


def cx_gate_decomposed(M, control, target, s):
    """CX(s) built as ``B(pi/2 + theta) [S(r) x S(-r)] B(theta)``."""
    M = _check_modes(M)
    control = _check_index(M, control, "control")
    target = _check_index(M, target, "target")
    if control == target:
        raise InvalidArgument("CX gate needs distinct control and target")
    r, theta = cx_decomposition_params(s)
    return compose(
        beamsplitter_gate(M, control, target, theta, 0.0),
        squeeze_gate(M, control, r),
        squeeze_gate(M, target, -r),
        beamsplitter_gate(M, control, target, np.pi / 2 + theta, 0.0),
    )


def apply(state, gate, check=True):
    """Evolve ``state`` by ``gate``: ``mean' = S mean + d``, ``cov' = S cov S^T``."""
    if state.modes != gate.modes:
        raise InvalidArgument(
            f"gate acts on {gate.modes} modes but state has {state.modes}"
        )
    S = gate.symplectic
    cov = S @ state.cov @ S.T
    out = GaussianState(state.modes, S @ state.mean + gate.shift, 0.5 * (cov + cov.T))
    if check:
        out.check_physical()
    return out


def mode_marginal(state, m):
    """Mean 2-vector and 2x2 covariance block of mode ``m``."""
    m = _check_index(state.modes, m)
    sl = slice(2 * m, 2 * m + 2)
    return state.mean[sl].copy(), state.cov[sl, sl].copy()
