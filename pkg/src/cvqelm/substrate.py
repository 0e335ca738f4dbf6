"""Frozen random CX-ring substrate and its moment feature maps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError, InvalidArgument
from .gaussian import (
    SQRT2,
    apply,
    compose,
    cx_gate,
    displacement_gate,
    identity_gate,
    vacuum_state,
)
from .util import digest


class Scheme(str, Enum):
    PNR = "pnr"
    HOMODYNE = "homodyne"


def feature_dim(M, scheme):
    return 2 * M if Scheme(scheme) is Scheme.PNR else 5 * M


def theta_stream(seed, m):
    """Independent generator for gate ``m``; counter-based so gates never share draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(m)])))


@dataclass(frozen=True, eq=False)
class SubstrateConfig:
    modes: int
    thetas: np.ndarray
    s_max: float
    encoding_scale: float = 1.0
    seed: int = 0
    scheme: Scheme = Scheme.HOMODYNE
    _circuit: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if int(self.modes) != self.modes or self.modes < 1:
            raise InvalidArgument(f"modes must be a positive integer, got {self.modes!r}")
        thetas = np.array(self.thetas, dtype=float)
        thetas.setflags(write=False)
        if thetas.shape != (self.modes,):
            raise InvalidArgument(f"need {self.modes} gate parameters, got {thetas.shape}")
        if self.s_max < 0 or np.any(np.abs(thetas) > self.s_max):
            raise InvalidArgument("gate parameters exceed the sampling range s_max")
        if not self.encoding_scale > 0:
            raise InvalidArgument("encoding_scale must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "modes", int(self.modes))
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def feature_dim(self):
        return feature_dim(self.modes, self.scheme)

    @property
    def circuit(self):
        """The composed CX ring as a single :class:`GateOp` (cached)."""
        if self._circuit is None:
            object.__setattr__(self, "_circuit", substrate_circuit(self))
        return self._circuit

    def to_dict(self):
        return {
            "modes": self.modes,
            "s_max": float(self.s_max),
            "thetas": [float(t) for t in self.thetas],
            "encoding_scale": float(self.encoding_scale),
            "seed": self.seed,
            "scheme": self.scheme.value,
        }

    def digest(self):
        return digest(self.to_dict())


def draw_substrate(M, s_max=1.0, seed=0, scheme=Scheme.HOMODYNE, encoding_scale=1.0):
    """Draw ``theta_m ~ U[-s_max, s_max]`` and freeze them into a config."""
    if int(M) != M or M < 1:
        raise InvalidArgument(f"modes must be a positive integer, got {M!r}")
    if s_max < 0:
        raise InvalidArgument("s_max must be non-negative")
    thetas = np.array(
        [theta_stream(seed, m).uniform(-1.0, 1.0) * s_max for m in range(int(M))]
    )
    return SubstrateConfig(int(M), thetas, float(s_max), encoding_scale, seed, scheme)


def substrate_from_dict(doc):
    """Rebuild a config from its JSON document and check it regenerates."""
    try:
        cfg = SubstrateConfig(
            doc["modes"],
            doc["thetas"],
            doc["s_max"],
            doc["encoding_scale"],
            doc["seed"],
            doc["scheme"],
        )
    except KeyError as exc:
        raise InvalidArgument(f"substrate document missing {exc}") from None
    again = draw_substrate(cfg.modes, cfg.s_max, cfg.seed, cfg.scheme, cfg.encoding_scale)
    if not np.array_equal(again.thetas, cfg.thetas):
        raise InvalidArgument("stored gate parameters do not regenerate from (modes, s_max, seed)")
    return cfg


def save_substrate(cfg, path):
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")


def load_substrate(path):
    with open(path) as fh:
        return substrate_from_dict(json.load(fh))


def encode(x, c=1.0):
    """One real displacement ``alpha_m = c x_m`` per mode."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgument("input must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite input feature")
    M = x.size
    return [displacement_gate(M, m, c * x[m], 0.0) for m in range(M)]


def cx_ring(config):
    """CX gates in application order: control ``m``, target ``(m + 1) mod M``."""
    M = config.modes
    if M == 1:
        return []
    return [cx_gate(M, m, (m + 1) % M, config.thetas[m]) for m in range(M)]


def substrate_circuit(config):
    gates = cx_ring(config)
    return compose(*gates) if gates else identity_gate(config.modes)


def forward(x, config):
    """Output Gaussian state for a single standardized input vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (config.modes,):
        raise InvalidArgument(f"input has shape {x.shape}, expected ({config.modes},)")
    state = vacuum_state(config.modes)
    for g in encode(x, config.encoding_scale) + cx_ring(config):
        state = apply(state, g)
    return state


def _marginal_arrays(means, cov):
    """Per-mode mean columns and covariance entries, vectorised over rows."""
    xbar = means[..., 0::2]
    pbar = means[..., 1::2]
    vxx = np.diag(cov)[0::2]
    vpp = np.diag(cov)[1::2]
    vxp = np.diag(cov, k=1)[0::2]
    return xbar, pbar, vxx, vpp, vxp


def pnr_from_moments(means, cov):
    xbar, pbar, vxx, vpp, vxp = _marginal_arrays(means, cov)
    trV = vxx + vpp
    mu2 = xbar**2 + pbar**2
    nbar = 0.5 * (trV + mu2) - 0.5
    trV2 = vxx**2 + vpp**2 + 2 * vxp**2
    muVmu = vxx * xbar**2 + vpp * pbar**2 + 2 * vxp * xbar * pbar
    var = 0.5 * trV2 + muVmu - 0.25
    return np.concatenate([nbar, var], axis=-1)


def homodyne_from_moments(means, cov):
    xbar, pbar, vxx, vpp, vxp = _marginal_arrays(means, cov)
    return np.concatenate(
        [xbar, pbar, vxx + xbar**2, vpp + pbar**2, vxp + xbar * pbar], axis=-1
    )


def pnr_features(state):
    """``(<n_1>, ..., <n_M>, Var n_1, ..., Var n_M)`` of a Gaussian state."""
    state.check_physical()
    return pnr_from_moments(state.mean, state.cov)


def homodyne_features(state):
    """``(<x>, <p>, <x^2>, <p^2>, <{x,p}>/2)`` blocks, each over all modes."""
    state.check_physical()
    return homodyne_from_moments(state.mean, state.cov)


def features(state, scheme):
    if Scheme(scheme) is Scheme.PNR:
        return pnr_features(state)
    return homodyne_features(state)


def feature_matrix(X, config):
    """Features of every row of ``X``, shape ``(N, R)``.

    The output covariance does not depend on the input, so it is computed
    once; each row only needs its mean pushed through the circuit.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != config.modes:
        raise InvalidArgument(f"expected an (N, {config.modes}) matrix, got {X.shape}")
    bad = ~np.isfinite(X).all(axis=1)
    if bad.any():
        raise DataError(f"non-finite input in row {int(np.flatnonzero(bad)[0])}")
    gate = config.circuit
    S = gate.symplectic
    out_state = apply(vacuum_state(config.modes), gate)
    # encoded means sit on the x quadratures only; einsum keeps each row's
    # arithmetic independent of N so results do not depend on batching
    means = np.einsum("nk,jk->nj", SQRT2 * config.encoding_scale * X, S[:, 0::2]) + gate.shift
    if config.scheme is Scheme.PNR:
        return pnr_from_moments(means, out_state.cov)
    return homodyne_from_moments(means, out_state.cov)
