"""Brute-force truncated Fock-basis simulator.

Used only to cross-check the covariance-matrix formulas. Every gate is the
exponential of its generator written in ladder operators, truncated to
``D`` levels per mode. Amplitudes are stored as an ``M``-axis tensor, mode 0
on the slowest axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutoffInsufficient, InvalidArgument

TAIL_TOL = 1e-10
MAX_MODES = 3


def ladder_ops(D):
    """Truncated annihilation and creation matrices, ``a[n-1, n] = sqrt(n)``."""
    if int(D) != D or D < 2:
        raise InvalidArgument(f"cutoff must be an integer >= 2, got {D!r}")
    a = np.diag(np.sqrt(np.arange(1, D, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def quadrature_ops(D):
    a, ad = ladder_ops(D)
    x = (a + ad) / np.sqrt(2.0)
    p = 1j * (ad - a) / np.sqrt(2.0)
    return x, p


@dataclass(frozen=True)
class GateSpec:
    """Gate description understood by :func:`gate_unitary`.

    ``kind`` is one of ``displacement`` (params ``alpha_re, alpha_im``),
    ``squeeze`` (``r``), ``beamsplitter`` (``theta, phi``) or ``cx`` (``s``).
    ``wires`` holds one mode index, or two for the two-mode gates
    (control first for ``cx``).
    """

    kind: str
    wires: tuple
    params: tuple


_ARITY = {"displacement": 1, "squeeze": 1, "beamsplitter": 2, "cx": 2}


def _hamiltonian(spec, D):
    """Hermitian ``H`` on the gate's own wires, with ``U = exp(-i H)``."""
    a, ad = ladder_ops(D)
    eye = np.eye(D)
    if spec.kind == "displacement":
        re, im = spec.params
        alpha = complex(re, im)
        # exp(alpha a^dag - alpha* a) = exp(-i H)
        return 1j * (alpha * ad - np.conj(alpha) * a)
    if spec.kind == "squeeze":
        (r,) = spec.params
        return 1j * 0.5 * r * (a @ a - ad @ ad)
    if spec.kind == "beamsplitter":
        theta, phi = spec.params
        a1, a2 = np.kron(a, eye), np.kron(eye, a)
        gen = theta * (np.exp(1j * phi) * a1 @ a2.conj().T - np.exp(-1j * phi) * a1.conj().T @ a2)
        return 1j * gen
    if spec.kind == "cx":
        (s,) = spec.params
        x, p = quadrature_ops(D)
        return s * np.kron(x, p)
    raise InvalidArgument(f"unsupported gate kind {spec.kind!r}")


def _expm_hermitian(H):
    H = 0.5 * (H + H.conj().T)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.conj().T


def _local_unitary(spec, D):
    H = _hamiltonian(spec, D)
    if spec.kind != "beamsplitter":
        return _expm_hermitian(H)
    # the truncated generator conserves n1 + n2, so exponentiate per block
    total = np.add.outer(np.arange(D), np.arange(D)).ravel()
    U = np.zeros_like(H)
    for N in range(2 * D - 1):
        idx = np.flatnonzero(total == N)
        U[np.ix_(idx, idx)] = _expm_hermitian(H[np.ix_(idx, idx)])
    return U


def _validate(spec, M):
    if spec.kind not in _ARITY:
        raise InvalidArgument(f"unsupported gate kind {spec.kind!r}")
    if len(spec.wires) != _ARITY[spec.kind]:
        raise InvalidArgument(f"{spec.kind} acts on {_ARITY[spec.kind]} modes")
    if len(set(spec.wires)) != len(spec.wires):
        raise InvalidArgument("two-mode gate needs distinct wires")
    for w in spec.wires:
        if not 0 <= w < M:
            raise InvalidArgument(f"wire {w} out of range for {M} modes")


def gate_unitary(spec, M, D):
    """Dense ``D^M x D^M`` unitary of ``spec`` embedded in ``M`` modes."""
    _validate(spec, M)
    k = len(spec.wires)
    U = _local_unitary(spec, D).reshape((D,) * (2 * k))
    # build the full operator by acting on the identity tensor
    full = np.eye(D**M, dtype=complex).reshape((D,) * M + (D**M,))
    full = _apply_local(full, U, spec.wires)
    return full.reshape(D**M, D**M)


def _apply_local(psi, U, wires):
    k = len(wires)
    out = np.tensordot(U, psi, axes=(list(range(k, 2 * k)), list(wires)))
    # tensordot puts the gate's output axes first; move them back in place
    return np.moveaxis(out, list(range(k)), list(wires))


@dataclass(frozen=True, eq=False)
class FockState:
    modes: int
    cutoff: int
    amplitudes: np.ndarray

    @property
    def tensor(self):
        return self.amplitudes.reshape((self.cutoff,) * self.modes)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def tail_mass(self):
        """Probability that any mode sits on the top truncated level."""
        prob = np.abs(self.tensor) ** 2
        top = np.zeros_like(prob, dtype=bool)
        for m in range(self.modes):
            idx = [slice(None)] * self.modes
            idx[m] = self.cutoff - 1
            top[tuple(idx)] = True
        return float(prob[top].sum())


def fock_vacuum(M, D):
    if not 1 <= M <= MAX_MODES:
        raise InvalidArgument(f"oracle supports 1..{MAX_MODES} modes, got {M}")
    ladder_ops(D)
    amp = np.zeros(D**M, dtype=complex)
    amp[0] = 1.0
    return FockState(M, D, amp)


def fock_number_state(n, D):
    """Single-mode ``|n>``."""
    amp = np.zeros(D, dtype=complex)
    amp[n] = 1.0
    return FockState(1, D, amp)


def _apply_cx(psi, s, control, target, D):
    # x_c and p_t act on different modes, so exp(-i s x_c p_t) is diagonal in
    # the product of their eigenbases: same truncated operator, no D^2 eigh
    x, p = quadrature_ops(D)
    lam, V = np.linalg.eigh(x)
    mu, W = np.linalg.eigh(p)
    psi = _apply_local(psi, V.conj().T, (control,))
    psi = _apply_local(psi, W.conj().T, (target,))
    shape = [1] * psi.ndim
    shape[control] = D
    phase_c = lam.reshape(shape)
    shape = [1] * psi.ndim
    shape[target] = D
    psi = psi * np.exp(-1j * s * phase_c * mu.reshape(shape))
    psi = _apply_local(psi, V, (control,))
    return _apply_local(psi, W, (target,))


def apply_gates(state, specs):
    """Apply ``specs`` in order, gate by gate on the amplitude tensor."""
    psi = state.tensor.copy()
    D, M = state.cutoff, state.modes
    cache = {}
    for spec in specs:
        _validate(spec, M)
        if spec.kind == "cx":
            psi = _apply_cx(psi, spec.params[0], *spec.wires, D)
            continue
        key = (spec.kind, spec.params)
        if key not in cache:
            cache[key] = _local_unitary(spec, D).reshape((D,) * (2 * len(spec.wires)))
        psi = _apply_local(psi, cache[key], spec.wires)
    return FockState(M, D, psi.reshape(-1))


def substrate_gate_specs(x, config):
    """Displacement encoding followed by the CX ring, as :class:`GateSpec` list."""
    M = config.modes
    x = np.asarray(x, dtype=float)
    if x.shape != (M,):
        raise InvalidArgument(f"input has shape {x.shape}, expected ({M},)")
    specs = [
        GateSpec("displacement", (m,), (float(config.encoding_scale * x[m]), 0.0))
        for m in range(M)
    ]
    if M > 1:
        specs += [
            GateSpec("cx", (m, (m + 1) % M), (float(config.thetas[m]),))
            for m in range(M)
        ]
    return specs


def simulate(x, config, D=40):
    """Fock-basis forward pass of the substrate for input ``x``.

    Raises :class:`CutoffInsufficient` when the tail mass is not below 1e-10.
    """
    if config.modes > MAX_MODES:
        raise InvalidArgument(f"oracle supports at most {MAX_MODES} modes")
    out = apply_gates(fock_vacuum(config.modes, D), substrate_gate_specs(x, config))
    tail = out.tail_mass()
    if tail >= TAIL_TOL:
        raise CutoffInsufficient(tail, D)
    return out


def simulate_adaptive(x, config, D=40, D_max=128):
    """Retry :func:`simulate` with doubled cutoff until the tail is small."""
    while True:
        try:
            return simulate(x, config, D)
        except CutoffInsufficient:
            if D >= D_max:
                raise
            D = min(2 * D, D_max)


def reduced_density(state, m):
    psi = state.tensor
    other = [k for k in range(state.modes) if k != m]
    return np.tensordot(psi, psi.conj(), axes=(other, other))


def oracle_moments(state):
    """Per-mode moments by direct operator expectation in the truncated basis.

    Returns a dict of arrays of length ``M`` keyed by ``n``, ``var_n``, ``x``,
    ``p``, ``xx``, ``pp`` and ``xp`` (the symmetrised ``{x, p}/2``).
    """
    D = state.cutoff
    x, p = quadrature_ops(D)
    n = np.diag(np.arange(D, dtype=float))
    keys = ("n", "var_n", "x", "p", "xx", "pp", "xp")
    out = {k: np.zeros(state.modes) for k in keys}
    for m in range(state.modes):
        rho = reduced_density(state, m)

        def ev(op):
            return float(np.real(np.trace(rho @ op)))

        nbar = ev(n)
        out["n"][m] = nbar
        out["var_n"][m] = ev(n @ n) - nbar**2
        out["x"][m] = ev(x)
        out["p"][m] = ev(p)
        out["xx"][m] = ev(x @ x)
        out["pp"][m] = ev(p @ p)
        out["xp"][m] = 0.5 * ev(x @ p + p @ x)
    return out
