"""Dataset ingestion and reproducible train/validation/test splits."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import erf, sqrt

import numpy as np
import pandas as pd

from .errors import DataError, InvalidArgument, SchemaError
from .util import digest

JETS = "jets"
HIGGS = "higgs"
SYNTHETIC = "synthetic"

# high-level observables of the public hls4ml LHC jet dataset (OpenML 42468)
JET_FEATURES = (
    "zlogz",
    "c1_b0_mmdt",
    "c1_b1_mmdt",
    "c1_b2_mmdt",
    "c2_b1_mmdt",
    "c2_b2_mmdt",
    "d2_b1_mmdt",
    "d2_b2_mmdt",
    "d2_a1_b1_mmdt",
    "d2_a1_b2_mmdt",
    "m2_b1_mmdt",
    "m2_b2_mmdt",
    "n2_b1_mmdt",
    "n2_b2_mmdt",
    "mass_mmdt",
    "multiplicity",
)
JET_CLASSES = ("g", "q", "w", "z", "t")
DEFAULT_JET_LABELS = {"g": 0, "q": 0, "t": 1}

# derived kinematic features of the Higgs ML challenge
HIGGS_FEATURES = (
    "DER_mass_MMC",
    "DER_mass_transverse_met_lep",
    "DER_mass_vis",
    "DER_pt_h",
    "DER_deltar_tau_lep",
    "DER_pt_tot",
    "DER_sum_pt",
    "DER_pt_ratio_lep_tau",
    "DER_met_phi_centrality",
    "DER_lep_eta_centrality",
)
HIGGS_SENTINEL = -999.0

SWEEP_SIZES = (1000, 5000, 10000, 100000)


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple
    source: str
    provenance: dict = field(default_factory=dict)
    missing: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise InvalidArgument(f"bad dataset shapes {X.shape}, {y.shape}")
        if len(self.feature_names) != X.shape[1]:
            raise InvalidArgument("feature_names does not match column count")
        if not np.all(np.isfinite(X)):
            raise DataError("dataset contains non-finite values")
        counts = np.bincount(y, minlength=2)
        if len(counts) > 2 or counts[0] == 0 or counts[1] == 0:
            raise DataError(f"need both classes present, got counts {counts.tolist()}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def F(self):
        return self.X.shape[1]

    def digest(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        h.update(json.dumps(list(self.feature_names)).encode())
        return h.hexdigest()[:16]


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_table(path):
    try:
        return pd.read_csv(path, sep=None, engine="python")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SchemaError(f"cannot parse {path}: {exc}") from None


def _select(df, names, path):
    missing = [c for c in names if c not in df.columns]
    if missing:
        raise SchemaError(f"{path} lacks columns {missing}")
    try:
        return df[list(names)].to_numpy(dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric feature values in {path}: {exc}") from None


def load_jets(path, label_map=None, features=JET_FEATURES, class_column="class"):
    """Delimited hls4ml jet table; keeps rows whose class is in ``label_map``.

    Default mapping is QCD (``g``, ``q``) -> 0 and top (``t``) -> 1.
    """
    label_map = dict(DEFAULT_JET_LABELS if label_map is None else label_map)
    if len(features) != 16:
        raise SchemaError(f"jet task uses 16 features, got {len(features)}")
    df = _read_table(path)
    if class_column not in df.columns:
        raise SchemaError(f"{path} lacks class column {class_column!r}")
    cls = df[class_column].astype(str).str.strip().str.strip("b'\"")
    keep = cls.isin(list(label_map)).to_numpy()
    X = _select(df, features, path)[keep]
    if not np.all(np.isfinite(X)):
        raise DataError(f"non-finite jet features in {path}")
    y = cls[keep].map(label_map).to_numpy(dtype=int)
    if (y == 0).sum() == 0 or (y == 1).sum() == 0:
        raise DataError(f"label map {label_map} leaves an empty class in {path}")
    prov = {"file_sha256": file_sha256(path), "config": digest({"labels": label_map, "features": list(features)})}
    return Dataset(X, y, features, JETS, prov)


def load_higgs(path, features=HIGGS_FEATURES, label_column="Label"):
    """Higgs ML challenge table with ``s`` -> 1 and ``b`` -> 0.

    Sentinel ``-999.0`` entries are recorded in ``missing``; they are filled
    with training medians when the data is split.
    """
    if len(features) != 10:
        raise SchemaError(f"Higgs task uses 10 features, got {len(features)}")
    df = _read_table(path)
    if label_column not in df.columns:
        raise SchemaError(f"{path} lacks label column {label_column!r}")
    X = _select(df, features, path)
    lab = df[label_column].astype(str).str.strip()
    if not lab.isin(["s", "b"]).all():
        raise DataError(f"labels in {path} must be 's' or 'b'")
    y = (lab == "s").to_numpy(dtype=int)
    missing = X == HIGGS_SENTINEL
    if not np.all(np.isfinite(X)):
        raise DataError(f"non-finite Higgs features in {path}")
    prov = {"file_sha256": file_sha256(path), "config": digest({"features": list(features)})}
    return Dataset(X, y, features, HIGGS, prov, missing if missing.any() else None)


def synthetic_gaussians(F, delta, N, seed=0):
    """Two unit-covariance Gaussians with means ``+-(delta/2) e_1``, balanced."""
    if F < 1 or N < 2 or delta < 0:
        raise InvalidArgument("need F >= 1, N >= 2 and delta >= 0")
    rng = np.random.default_rng(seed)
    y = np.zeros(N, dtype=int)
    y[: N // 2] = 1
    rng.shuffle(y)
    X = rng.standard_normal((N, F))
    X[:, 0] += np.where(y == 1, delta / 2.0, -delta / 2.0)
    names = tuple(f"f{i}" for i in range(F))
    prov = {"config": digest({"F": F, "delta": delta, "N": N, "seed": seed})}
    return Dataset(X, y, names, SYNTHETIC, prov)


def bayes_accuracy(delta):
    """Best achievable accuracy for the synthetic task, ``Phi(delta/2)``."""
    return 0.5 * (1.0 + erf(delta / 2.0 / sqrt(2.0)))


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.6, 0.2, 0.2)
    seed: int = 0
    n_train_cap: int | None = None

    def __post_init__(self):
        f = tuple(float(v) for v in self.fractions)
        if len(f) != 3 or min(f) <= 0 or abs(sum(f) - 1.0) > 1e-9:
            raise InvalidArgument(f"split fractions must be three positives summing to 1, got {f}")
        object.__setattr__(self, "fractions", f)


@dataclass(eq=False)
class Split:
    seed: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    imputation: dict = field(default_factory=dict)

    @property
    def train(self):
        return self.X_train, self.y_train

    @property
    def val(self):
        return self.X_val, self.y_val

    @property
    def test(self):
        return self.X_test, self.y_test

    def indices_dict(self):
        return {
            "seed": self.seed,
            "train": self.train_idx.tolist(),
            "val": self.val_idx.tolist(),
            "test": self.test_idx.tolist(),
        }

    def save_indices(self, path):
        with open(path, "w") as fh:
            json.dump(self.indices_dict(), fh)
            fh.write("\n")


def split_sizes(N, fractions):
    n_tr = int(round(fractions[0] * N))
    n_va = int(round(fractions[1] * N))
    n_te = N - n_tr - n_va
    if min(n_tr, n_va, n_te) < 1:
        raise InvalidArgument(f"{N} rows are too few for fractions {fractions}")
    return n_tr, n_va, n_te


def split(dataset, spec=SplitSpec()):
    """Seeded permutation cut into contiguous train/val/test slices.

    A training cap truncates the train slice after the cut, so validation
    and test rows never depend on the cap and smaller training sets are
    prefixes of larger ones.
    """
    n_tr, n_va, _ = split_sizes(dataset.n, spec.fractions)
    perm = np.random.default_rng(spec.seed).permutation(dataset.n)
    train_idx = perm[:n_tr]
    val_idx = perm[n_tr : n_tr + n_va]
    test_idx = perm[n_tr + n_va :]
    X = dataset.X
    imputation = {}
    if dataset.missing is not None:
        X = X.copy()
        imputation = _impute(X, dataset.missing, train_idx, dataset.feature_names)
    if spec.n_train_cap is not None:
        if spec.n_train_cap < 1 or spec.n_train_cap > n_tr:
            raise InvalidArgument(f"training cap {spec.n_train_cap} outside 1..{n_tr}")
        train_idx = train_idx[: spec.n_train_cap]
    y = dataset.y
    return Split(
        spec.seed,
        train_idx,
        val_idx,
        test_idx,
        X[train_idx],
        y[train_idx],
        X[val_idx],
        y[val_idx],
        X[test_idx],
        y[test_idx],
        imputation,
    )


def _impute(X, missing, train_idx, names):
    """Fill missing entries in place with training-row medians."""
    medians = {}
    counts = {}
    for j, name in enumerate(names):
        col_missing = missing[:, j]
        if not col_missing.any():
            continue
        observed = X[train_idx, j][~col_missing[train_idx]]
        med = float(np.median(observed)) if observed.size else 0.0
        X[col_missing, j] = med
        medians[name] = med
        counts[name] = int(col_missing.sum())
    return {"medians": medians, "counts": counts, "total": int(sum(counts.values()))}
