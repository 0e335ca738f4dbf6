"""End-to-end QELM classifier: standardize, encode, substrate, linear readout."""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgument
from .readout import (
    DEFAULT_LAMBDA_GRID,
    ReadoutModel,
    Standardizer,
    assemble_design,
    select_lambda,
    standardize_apply,
    standardize_fit,
)
from .substrate import Scheme, draw_substrate, feature_matrix


class QELMClassifier:
    """Fixed random photonic feature map with a trained linear readout.

    One mode per input feature. With ``standardize`` off the identity
    standardizer is stored so saved models stay self-describing.
    """

    def __init__(
        self,
        scheme=Scheme.HOMODYNE,
        readout="ridge",
        lambda_grid=DEFAULT_LAMBDA_GRID,
        s_max=1.0,
        encoding_scale=1.0,
        substrate_seed=0,
        standardize=True,
        penalize_bias=True,
    ):
        self.scheme = Scheme(scheme)
        self.readout = readout
        self.lambda_grid = tuple(lambda_grid)
        self.s_max = s_max
        self.encoding_scale = encoding_scale
        self.substrate_seed = substrate_seed
        self.standardize = standardize
        self.penalize_bias = penalize_bias
        self.substrate_ = None
        self.model_ = None

    def _inputs(self, X):
        return standardize_apply(self.model_.standardizer, X)

    def fit(self, X, y, X_val, y_val):
        X = np.asarray(X, dtype=float)
        F = X.shape[1]
        if self.standardize:
            st = standardize_fit(X)
        else:
            st = Standardizer(np.zeros(F), np.ones(F), np.zeros(F, dtype=bool))
        self.substrate_ = draw_substrate(
            F, self.s_max, self.substrate_seed, self.scheme, self.encoding_scale
        )
        Xs = standardize_apply(st, X)
        Xv = standardize_apply(st, X_val)
        Z = assemble_design(feature_matrix(Xs, self.substrate_), Xs)
        Zv = assemble_design(feature_matrix(Xv, self.substrate_), Xv)
        lam, w, info = select_lambda(
            self.readout, Z, y, Zv, y_val, self.lambda_grid, penalize_bias=self.penalize_bias
        )
        self.model_ = ReadoutModel(
            self.readout, lam, self.scheme.value, w, st, F, self.substrate_.feature_dim, info
        )
        return self

    def features(self, X):
        if self.model_ is None:
            raise InvalidArgument("classifier is not fitted")
        Xs = self._inputs(X)
        return feature_matrix(Xs, self.substrate_), Xs

    def decision_function(self, X):
        Phi, Xs = self.features(X)
        return self.model_.predict(Phi, Xs)[0]

    def predict(self, X):
        Phi, Xs = self.features(X)
        return self.model_.predict(Phi, Xs)[1]

    @property
    def n_params(self):
        return self.model_.n_params
