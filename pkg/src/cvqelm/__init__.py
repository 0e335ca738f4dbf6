"""Photonic quantum extreme learning machines simulated in the Gaussian formalism."""

from .gaussian import (
    GateOp,
    GaussianState,
    apply,
    beamsplitter_gate,
    compose,
    cx_gate,
    cx_gate_decomposed,
    displacement_gate,
    mode_marginal,
    squeeze_gate,
    vacuum_state,
)
from .qelm import QELMClassifier
from .substrate import (
    Scheme,
    SubstrateConfig,
    draw_substrate,
    encode,
    feature_matrix,
    forward,
    homodyne_features,
    pnr_features,
)

__version__ = "0.1.0"
