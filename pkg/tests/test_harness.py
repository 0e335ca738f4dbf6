import json

import numpy as np
import pytest

from cvqelm.data import bayes_accuracy, synthetic_gaussians
from cvqelm.errors import InvalidArgument
from cvqelm.harness import (
    MODEL_IDS,
    RunConfig,
    SweepResult,
    emit_results,
    load_results,
    run_single,
    summary_csv,
    sweep,
)

FAST = RunConfig(epochs=15, patience=5)


@pytest.fixture(scope="module")
def ds():
    return synthetic_gaussians(3, 1.5, 1500, seed=0)


def test_run_single_bayes_control():
    ds2 = synthetic_gaussians(2, 2.0, 5000, seed=1)
    rec = run_single(ds2, "QELM-HOM-ridge", 2000, seed=3)
    assert abs(rec.test_accuracy - bayes_accuracy(2.0)) < 0.03
    assert rec.n_params == 2 + 10 + 1
    assert rec.substrate_digest and rec.config_digest and rec.dataset_digest


def test_run_single_deterministic(ds):
    for model in ("QELM-PNR-logistic", "MLP-H2"):
        a = run_single(ds, model, 500, seed=4, config=FAST)
        b = run_single(ds, model, 500, seed=4, config=FAST)
        assert a.key() == b.key()


def test_run_single_errors(ds):
    with pytest.raises(InvalidArgument):
        run_single(ds, "QELM-HOM-ridge", 0, seed=1)
    with pytest.raises(InvalidArgument):
        run_single(ds, "SVM", 100, seed=1)
    with pytest.raises(InvalidArgument):
        run_single(ds, "QELM-HOM-ridge", 5000, seed=1)


def test_run_single_param_counts(ds):
    counts = {m: run_single(ds, m, 300, seed=2, config=FAST).n_params for m in MODEL_IDS}
    assert counts["QELM-PNR-ridge"] == 3 + 6 + 1
    assert counts["QELM-HOM-logistic"] == 3 + 15 + 1
    assert counts["MLP-H2"] == 2 * 5 + 1 and counts["MLP-H10"] == 10 * 5 + 1


def test_frozen_substrate_flag(ds):
    cfg = RunConfig(freeze_substrate=True)
    a = run_single(ds, "QELM-HOM-ridge", 300, seed=1, config=cfg)
    b = run_single(ds, "QELM-HOM-ridge", 300, seed=2, config=cfg)
    c = run_single(ds, "QELM-HOM-ridge", 300, seed=2)
    assert a.substrate_digest == b.substrate_digest != c.substrate_digest


def test_sweep_records_and_stats(ds):
    res = sweep(ds, ["QELM-HOM-ridge"], [200], 3, base_seed=1, config=FAST)
    assert len(res.records) == 3
    (row,) = res.summary()
    accs = [r.test_accuracy for r in res.records]
    assert row[2] == 3 and row[3] == pytest.approx(np.mean(accs))
    assert row[4] == pytest.approx(np.std(accs, ddof=1))


def test_sweep_shares_splits_and_isolates_seeds(ds):
    a = sweep(ds, ["QELM-HOM-ridge", "MLP-H2"], [200, 400], 2, base_seed=5, config=FAST)
    b = sweep(ds, ["QELM-HOM-ridge"], [200, 400], 2, base_seed=5, config=FAST)
    split_seeds = {(r.n_train, r.repeat): set() for r in a.records}
    for r in a.records:
        split_seeds[(r.n_train, r.repeat)].add(r.split_seed)
    assert all(len(v) == 1 for v in split_seeds.values())
    assert len({r.split_seed for r in a.records if r.repeat == 0}) == 1
    # dropping the MLP runs leaves the QELM runs untouched
    qa = [r.key() for r in a.records if r.model == "QELM-HOM-ridge"]
    assert qa == [r.key() for r in b.records]


def test_sweep_validation(ds):
    with pytest.raises(InvalidArgument):
        sweep(ds, ["QELM-HOM-ridge"], [400, 200], 1)
    with pytest.raises(InvalidArgument):
        sweep(ds, ["QELM-HOM-ridge"], [200], 0)
    with pytest.raises(InvalidArgument):
        sweep(ds, ["nope"], [200], 1)


def test_sweep_records_failures():
    small = synthetic_gaussians(2, 1.0, 100, seed=0)
    res = sweep(small, ["QELM-HOM-ridge"], [50, 100], 1)
    ok, bad = res.records
    assert ok.error is None and "InvalidArgument" in bad.error
    assert len(res.summary()) == 1


def test_sweep_deterministic_and_parallel_equal(ds):
    kw = dict(models=["QELM-PNR-ridge", "MLP-H2"], sizes=[200], n_repeats=2, base_seed=3, config=FAST)
    a = sweep(ds, **kw)
    b = sweep(ds, **kw)
    c = sweep(ds, workers=2, **kw)
    keys = lambda r: [x.key() for x in r.records]
    assert keys(a) == keys(b) == keys(c)


def test_compare_emits_variance_flags(ds):
    res = sweep(ds, ["QELM-HOM-logistic", "MLP-H2"], [300], 3, base_seed=0, config=FAST)
    (row,) = res.compare("QELM-HOM-logistic", "MLP-H2")
    assert set(row) >= {"n_train", "mean_higher", "std_not_larger"}
    assert isinstance(row["std_not_larger"], bool)


def test_emit_and_round_trip(tmp_path, ds):
    res = sweep(ds, ["QELM-HOM-ridge", "MLP-H2"], [200, 400], 2, base_seed=0, config=FAST)
    paths = emit_results(res, tmp_path / "a")
    names = sorted(p.split("/")[-1] for p in paths)
    assert names == ["accuracy_distribution.svg", "accuracy_vs_size.svg", "results.json", "summary.csv"]
    back = load_results(tmp_path / "a" / "results.json")
    assert back == res
    emit_results(back, tmp_path / "b")
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header, *rows = (tmp_path / "a" / "summary.csv").read_text().splitlines()
    assert header == "model,n_train,n_runs,mean,std" and len(rows) == 4


def test_emit_empty_sweep(tmp_path):
    res = SweepResult([], {})
    emit_results(res, tmp_path)
    assert summary_csv(res) == "model,n_train,n_runs,mean,std\n"
    assert json.loads((tmp_path / "results.json").read_text())["records"] == []
    assert (tmp_path / "accuracy_vs_size.svg").read_text().startswith("<svg")


def test_run_config_round_trip():
    cfg = RunConfig(lambda_grid=(0.1, 1.0), epochs=3)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert cfg.digest() != RunConfig().digest()


def test_jet_format_comparison_pipeline(tmp_path, rng):
    from cvqelm.data import load_jets
    from test_data import write_jets

    classes = rng.choice(["g", "q", "t", "w"], size=900).tolist()
    ds = load_jets(write_jets(tmp_path / "jets.csv", classes, rng))
    res = sweep(ds, ["QELM-HOM-logistic", "MLP-H2"], [100, 200], 2, base_seed=0, config=FAST)
    rows = res.compare("QELM-HOM-logistic", "MLP-H2")
    assert [r["n_train"] for r in rows] == [100, 200]
    assert res.meta["feature_names"][0] == "zlogz" and res.meta["provenance"]["file_sha256"]
