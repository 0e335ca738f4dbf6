"""Experiment runs, sample-size sweeps and result files."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import SplitSpec, split
from .errors import CVQELMError, InvalidArgument
from .mlp import mlp_init, mlp_param_count, mlp_train
from .qelm import QELMClassifier
from .readout import DEFAULT_LAMBDA_GRID, accuracy, standardize_apply, standardize_fit
from .util import derive_seed, digest

log = logging.getLogger(__name__)

QELM_MODELS = {
    "QELM-PNR-ridge": ("pnr", "ridge"),
    "QELM-PNR-logistic": ("pnr", "logistic"),
    "QELM-HOM-ridge": ("homodyne", "ridge"),
    "QELM-HOM-logistic": ("homodyne", "logistic"),
}
MLP_MODELS = {"MLP-H2": 2, "MLP-H10": 10}
MODEL_IDS = tuple(QELM_MODELS) + tuple(MLP_MODELS)

DEFAULT_SIZES = (1000, 5000, 10000)
EXTENDED_SIZES = (1000, 5000, 10000, 100000)
DEFAULT_REPEATS = 10


@dataclass(frozen=True)
class RunConfig:
    """Everything besides data, model, size and seed that affects a run."""

    fractions: tuple = (0.6, 0.2, 0.2)
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    s_max: float = 1.0
    encoding_scale: float = 1.0
    standardize: bool = True
    penalize_bias: bool = True
    freeze_substrate: bool = False
    weight_decays: tuple = (1e-4, 1e-3, 1e-2)
    epochs: int = 500
    patience: int = 20
    lr: float = 1e-3

    def to_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, doc):
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()})

    def digest(self):
        return digest(self.to_dict())


@dataclass
class RunRecord:
    model: str
    n_train: int
    seed: int
    split_seed: int
    test_accuracy: float | None
    val_accuracy: float | None
    hyperparameter: float | None
    n_params: int | None
    substrate_digest: str | None
    config_digest: str
    dataset_digest: str
    wall_time: float = 0.0
    repeat: int | None = None
    error: str | None = None

    def to_dict(self):
        return asdict(self)

    def key(self):
        """Everything but wall time, for determinism comparisons."""
        d = self.to_dict()
        d.pop("wall_time")
        return d


def run_single(dataset, model, n_train, seed, split_seed=None, config=RunConfig(), repeat=None):
    """One deterministic train/evaluate run.

    The split uses ``split_seed`` (defaults to ``seed``) so several models can
    share it; every other random choice derives from ``(seed, model)``.
    """
    if model not in MODEL_IDS:
        raise InvalidArgument(f"unknown model {model!r}; choose from {MODEL_IDS}")
    if n_train is None or n_train < 1:
        raise InvalidArgument("n_train must be a positive integer")
    split_seed = seed if split_seed is None else split_seed
    t0 = time.perf_counter()
    sp = split(dataset, SplitSpec(config.fractions, split_seed, n_train))
    model_seed = derive_seed(seed, model)
    sub_digest = None
    if model in QELM_MODELS:
        scheme, readout = QELM_MODELS[model]
        sub_seed = derive_seed("frozen-substrate") if config.freeze_substrate else model_seed
        clf = QELMClassifier(
            scheme,
            readout,
            config.lambda_grid,
            config.s_max,
            config.encoding_scale,
            sub_seed,
            config.standardize,
            config.penalize_bias,
        ).fit(*sp.train, *sp.val)
        pred = clf.predict(sp.X_test)
        val_acc = clf.model_.info["val_accuracy"]
        hyper = clf.model_.lam
        n_params = clf.n_params
        assert n_params == dataset.F + clf.substrate_.feature_dim + 1
        sub_digest = clf.substrate_.digest()
    else:
        st = standardize_fit(sp.X_train)
        Xtr, Xva, Xte = (standardize_apply(st, a) for a in (sp.X_train, sp.X_val, sp.X_test))
        H = MLP_MODELS[model]
        net = mlp_init(dataset.F, H, model_seed)
        net, report = mlp_train(
            net,
            (Xtr, sp.y_train),
            (Xva, sp.y_val),
            config.weight_decays,
            config.epochs,
            config.patience,
            config.lr,
        )
        pred = (net.logits(Xte) > 0).astype(int)
        val_acc = report.val_accuracy
        hyper = report.weight_decay
        n_params = net.n_params
        assert n_params == mlp_param_count(dataset.F, H)
    return RunRecord(
        model,
        int(n_train),
        int(seed),
        int(split_seed),
        accuracy(pred, sp.y_test),
        None if val_acc is None else float(val_acc),
        None if hyper is None else float(hyper),
        int(n_params),
        sub_digest,
        config.digest(),
        dataset.digest(),
        time.perf_counter() - t0,
        repeat,
    )


@dataclass
class SweepResult:
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def groups(self):
        """Successful records keyed by ``(model, n_train)`` in sorted order."""
        out = {}
        for r in self.records:
            if r.error is None:
                out.setdefault((r.model, r.n_train), []).append(r)
        return {k: out[k] for k in sorted(out, key=lambda k: (_model_rank(k[0]), k[1]))}

    def summary(self):
        """Rows of ``(model, n_train, n_runs, mean, std)``; std needs two runs."""
        rows = []
        for (model, n), recs in self.groups().items():
            acc = np.array([r.test_accuracy for r in recs])
            std = float(np.std(acc, ddof=1)) if acc.size >= 2 else None
            rows.append((model, n, int(acc.size), float(acc.mean()), std))
        return rows

    def stats(self, model, n_train):
        for m, n, k, mean, std in self.summary():
            if m == model and n == n_train:
                return mean, std
        raise KeyError((model, n_train))

    def compare(self, model_a, model_b):
        """Per-size means and stds of two models, for the accuracy/variance claims."""
        sizes = sorted({n for m, n in self.groups() if m == model_a} & {n for m, n in self.groups() if m == model_b})
        rows = []
        for n in sizes:
            ma, sa = self.stats(model_a, n)
            mb, sb = self.stats(model_b, n)
            rows.append(
                {
                    "n_train": n,
                    model_a: {"mean": ma, "std": sa},
                    model_b: {"mean": mb, "std": sb},
                    "mean_higher": ma > mb,
                    "std_not_larger": None if sa is None or sb is None else sa <= sb,
                }
            )
        return rows

    def to_dict(self):
        return {
            "meta": self.meta,
            "records": [r.to_dict() for r in self.records],
            "summary": [
                {"model": m, "n_train": n, "n_runs": k, "mean": mean, "std": std}
                for m, n, k, mean, std in self.summary()
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls([RunRecord(**r) for r in doc["records"]], doc.get("meta", {}))

    def __eq__(self, other):
        return isinstance(other, SweepResult) and self.to_dict() == other.to_dict()


def _model_rank(model):
    return MODEL_IDS.index(model) if model in MODEL_IDS else len(MODEL_IDS)


def _run_job(job):
    dataset, model, n, seed, split_seed, config, repeat = job
    try:
        return run_single(dataset, model, n, seed, split_seed, config, repeat)
    except (CVQELMError, ValueError, FloatingPointError) as exc:
        log.warning("run %s n=%d repeat=%s failed: %s", model, n, repeat, exc)
        return RunRecord(
            model, n, seed, split_seed, None, None, None, None, None,
            config.digest(), dataset.digest(), 0.0, repeat, f"{type(exc).__name__}: {exc}",
        )


def sweep_jobs(dataset, models, sizes, n_repeats, base_seed, config):
    for repeat in range(n_repeats):
        # shared across models and sizes so every model sees the same rows
        split_seed = derive_seed(base_seed, "split", repeat)
        for n in sizes:
            for model in models:
                seed = derive_seed(base_seed, model, n, repeat)
                yield (dataset, model, n, seed, split_seed, config, repeat)


def sweep(dataset, models, sizes, n_repeats=DEFAULT_REPEATS, base_seed=0, config=RunConfig(), workers=1):
    """Every ``(model, size, repeat)`` run; failures are recorded, not raised."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise InvalidArgument("sizes must be ascending")
    if n_repeats < 1:
        raise InvalidArgument("n_repeats must be at least 1")
    for m in models:
        if m not in MODEL_IDS:
            raise InvalidArgument(f"unknown model {m!r}")
    jobs = list(sweep_jobs(dataset, models, sizes, n_repeats, base_seed, config))
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    records.sort(key=lambda r: (_model_rank(r.model), r.n_train, r.repeat))
    meta = {
        "dataset": dataset.source,
        "dataset_digest": dataset.digest(),
        "feature_names": list(dataset.feature_names),
        "provenance": dataset.provenance,
        "models": list(models),
        "sizes": sizes,
        "n_repeats": n_repeats,
        "base_seed": base_seed,
        "config": config.to_dict(),
        "config_digest": config.digest(),
    }
    return SweepResult(records, meta)


def summary_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "n_train", "n_runs", "mean", "std"])
    for m, n, k, mean, std in result.summary():
        w.writerow([m, n, k, repr(mean), "" if std is None else repr(std)])
    return buf.getvalue()


def emit_results(result, out_dir):
    """Write results.json, summary.csv and the two SVG plots into ``out_dir``."""
    from .plots import accuracy_distribution_svg, accuracy_vs_size_svg

    os.makedirs(out_dir, exist_ok=True)
    files = {
        "results.json": json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n",
        "summary.csv": summary_csv(result),
        "accuracy_vs_size.svg": accuracy_vs_size_svg(result),
        "accuracy_distribution.svg": accuracy_distribution_svg(result),
    }
    paths = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        paths.append(path)
    return paths


def load_results(path):
    with open(path) as fh:
        return SweepResult.from_dict(json.load(fh))
