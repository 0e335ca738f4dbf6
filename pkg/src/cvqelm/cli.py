"""Command line interface.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data error.
``CVQELM_DATA_DIR`` points at the directory holding ``jets.csv`` and
``higgs.csv`` when ``--data-path`` is not given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import pandas as pd

from . import data as data_mod
from .errors import DataError, InvalidArgument
from .harness import (
    DEFAULT_REPEATS,
    DEFAULT_SIZES,
    MODEL_IDS,
    RunConfig,
    emit_results,
    load_results,
    sweep,
)
from .mlp import mlp_init, mlp_train, save_mlp
from .qelm import QELMClassifier
from .readout import accuracy, standardize_apply, standardize_fit
from .substrate import Scheme, draw_substrate, feature_matrix, load_substrate, save_substrate

DATA_ENV = "CVQELM_DATA_DIR"
EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("cvqelm")


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _ints(text):
    return tuple(int(v) for v in text.split(","))


def load_dataset(args):
    if args.data == data_mod.SYNTHETIC:
        return data_mod.synthetic_gaussians(args.features, args.delta, args.n_samples, args.data_seed)
    path = args.data_path
    if path is None:
        path = os.path.join(os.environ.get(DATA_ENV, "data"), f"{args.data}.csv")
    if not os.path.exists(path):
        raise DataError(f"dataset file {path} not found (set --data-path or {DATA_ENV})")
    if args.data == data_mod.JETS:
        return data_mod.load_jets(path)
    return data_mod.load_higgs(path)


def _add_data_args(p):
    p.add_argument("--data", choices=[data_mod.JETS, data_mod.HIGGS, data_mod.SYNTHETIC], required=True)
    p.add_argument("--data-path", help=f"CSV file; defaults to ${DATA_ENV}/<data>.csv")
    p.add_argument("--features", type=int, default=2, help="synthetic: feature count")
    p.add_argument("--delta", type=float, default=2.0, help="synthetic: class mean separation")
    p.add_argument("--n-samples", type=int, default=10000, help="synthetic: row count")
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=None, help="cap on training rows")


def _split(args, ds):
    return data_mod.split(ds, data_mod.SplitSpec(seed=args.split_seed, n_train_cap=args.n_train))


def cmd_substrate(args):
    cfg = draw_substrate(args.modes, args.s_max, args.seed, Scheme(args.scheme), args.encoding_scale)
    save_substrate(cfg, args.out)
    print(f"wrote {args.out} (digest {cfg.digest()})")
    return EXIT_OK


def cmd_features(args):
    cfg = load_substrate(args.substrate)
    df = pd.read_csv(args.data)
    X = df.to_numpy(dtype=float)
    if not args.no_standardize:
        X = standardize_apply(standardize_fit(X), X)
    Phi = feature_matrix(X, cfg)
    cols = [f"phi{i}" for i in range(Phi.shape[1])]
    pd.DataFrame(Phi, columns=cols).to_csv(args.out, index=False, float_format="%.17g")
    print(f"wrote {Phi.shape[0]} x {Phi.shape[1]} features to {args.out}")
    return EXIT_OK


def cmd_train(args):
    ds = load_dataset(args)
    sp = _split(args, ds)
    clf = QELMClassifier(
        args.scheme,
        args.readout,
        args.lambda_grid,
        args.s_max,
        args.encoding_scale,
        args.seed,
        not args.no_standardize,
        not args.no_bias_penalty,
    ).fit(*sp.train, *sp.val)
    acc = accuracy(clf.predict(sp.X_test), sp.y_test)
    print(
        f"QELM {args.scheme}/{args.readout}: lambda={clf.model_.lam:g} params={clf.n_params} "
        f"val={clf.model_.info['val_accuracy']:.4f} test={acc:.4f}"
    )
    if args.out:
        clf.model_.info["test_accuracy"] = acc
        clf.model_.save(args.out)
        save_substrate(clf.substrate_, os.path.splitext(args.out)[0] + ".substrate.json")
    return EXIT_OK


def cmd_baseline(args):
    ds = load_dataset(args)
    sp = _split(args, ds)
    st = standardize_fit(sp.X_train)
    Xtr, Xva, Xte = (standardize_apply(st, a) for a in (sp.X_train, sp.X_val, sp.X_test))
    net = mlp_init(ds.F, args.hidden, args.seed)
    net, report = mlp_train(
        net, (Xtr, sp.y_train), (Xva, sp.y_val), args.weight_decays, args.epochs, args.patience, args.lr
    )
    acc = accuracy((net.logits(Xte) > 0).astype(int), sp.y_test)
    print(
        f"MLP H={args.hidden}: params={net.n_params} weight_decay={report.weight_decay} "
        f"val={report.val_accuracy:.4f} test={acc:.4f}"
    )
    if args.out:
        save_mlp(net, report, args.out)
    return EXIT_OK


def cmd_sweep(args):
    ds = load_dataset(args)
    config = RunConfig(
        lambda_grid=args.lambda_grid,
        s_max=args.s_max,
        encoding_scale=args.encoding_scale,
        freeze_substrate=args.freeze_substrate,
        epochs=args.epochs,
        patience=args.patience,
    )
    result = sweep(ds, args.models, args.sizes, args.repeats, args.seed, config, args.workers)
    for path in emit_results(result, args.out):
        print(f"wrote {path}")
    for m, n, k, mean, std in result.summary():
        print(f"{m:18s} n={n:<7d} runs={k:<3d} mean={mean:.4f} std={'-' if std is None else f'{std:.4f}'}")
    failed = [r for r in result.records if r.error]
    if failed:
        print(f"{len(failed)} runs failed; see results.json", file=sys.stderr)
    return EXIT_OK


def cmd_plot(args):
    result = load_results(args.results)
    for path in emit_results(result, args.out):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import verify

    checks = verify(quick=args.quick)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print("all checks passed" if ok else "VERIFICATION FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="cvqelm", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("substrate", help="substrate utilities")
    ssub = s.add_subparsers(dest="action", required=True)
    g = ssub.add_parser("gen", help="draw a random substrate and save it as JSON")
    g.add_argument("--modes", type=int, required=True)
    g.add_argument("--s-max", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scheme", choices=[s.value for s in Scheme], default="homodyne")
    g.add_argument("--encoding-scale", type=float, default=1.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_substrate)

    f = sub.add_parser("features", help="feature matrix for a CSV of inputs")
    f.add_argument("--substrate", required=True)
    f.add_argument("--data", required=True, help="CSV with one numeric column per mode")
    f.add_argument("--out", required=True)
    f.add_argument("--no-standardize", action="store_true")
    f.set_defaults(func=cmd_features)

    t = sub.add_parser("train", help="fit a QELM readout on one split")
    _add_data_args(t)
    t.add_argument("--readout", choices=["ridge", "logistic"], default="ridge")
    t.add_argument("--scheme", choices=[s.value for s in Scheme], default="homodyne")
    t.add_argument("--lambda-grid", type=_floats, default=(1e-4, 1e-3, 1e-2, 1e-1))
    t.add_argument("--s-max", type=float, default=1.0)
    t.add_argument("--encoding-scale", type=float, default=1.0)
    t.add_argument("--seed", type=int, default=0, help="substrate seed")
    t.add_argument("--no-standardize", action="store_true")
    t.add_argument("--no-bias-penalty", action="store_true")
    t.add_argument("--out")
    t.set_defaults(func=cmd_train)

    b = sub.add_parser("baseline", help="classical baselines")
    bsub = b.add_subparsers(dest="kind", required=True)
    m = bsub.add_parser("mlp", help="single-hidden-layer MLP")
    _add_data_args(m)
    m.add_argument("--hidden", type=int, choices=[2, 10], default=2)
    m.add_argument("--weight-decays", type=_floats, default=(1e-4, 1e-3, 1e-2))
    m.add_argument("--epochs", type=int, default=500)
    m.add_argument("--patience", type=int, default=20)
    m.add_argument("--lr", type=float, default=1e-3)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out")
    m.set_defaults(func=cmd_baseline)

    w = sub.add_parser("sweep", help="sample-size sweep over models and repeats")
    _add_data_args(w)
    w.add_argument("--models", type=lambda s: tuple(s.split(",")), default=MODEL_IDS)
    w.add_argument("--sizes", type=_ints, default=DEFAULT_SIZES)
    w.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--lambda-grid", type=_floats, default=(1e-4, 1e-3, 1e-2, 1e-1))
    w.add_argument("--s-max", type=float, default=1.0)
    w.add_argument("--encoding-scale", type=float, default=1.0)
    w.add_argument("--freeze-substrate", action="store_true")
    w.add_argument("--epochs", type=int, default=500)
    w.add_argument("--patience", type=int, default=20)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="re-emit summary and plots from results.json")
    pl.add_argument("--results", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="run the oracle and invariant checks")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgument, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
