import json

import numpy as np
import pytest

from gvarlearn import io
from gvarlearn.cli import main
from gvarlearn.errors import SimulationError
from gvarlearn.model import TimeSeries
from gvarlearn.simulate import draw_series

from conftest import VAR2_CONTEMPORANEOUS, VAR2_TEMPORAL


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_learn_recovers_fixture(tmp_path, capsys, var2_model):
    data = tmp_path / "var2.csv"
    io.write_csv(data, draw_series(var2_model, 4000, seed=1))
    out = tmp_path / "model.json"
    code, cap = run(capsys, "learn", data, "--max-lag", 5, "--out", out)
    assert code == 0, cap.err
    assert "k_hat" in cap.out
    payload = json.loads(out.read_text())
    assert payload["k"] == 2
    assert {tuple(e) for e in payload["temporal_edges"]} == VAR2_TEMPORAL
    assert {tuple(e) for e in payload["contemporaneous_edges"]} == VAR2_CONTEMPORANEOUS
    for key in ("objective_per_k", "loglik_trajectory", "timings_ms"):
        assert key in payload["diagnostics"]
    assert payload["gamma"] == 0.5


def test_simulate_learn_evaluate(tmp_path, capsys):
    prefix = tmp_path / "sim"
    code, _ = run(capsys, "simulate", "--d", 5, "--k", 1, "--q", 1.5, "--n", 3000, "--seed", 4, "--out", prefix)
    assert code == 0
    model = tmp_path / "m.json"
    code, _ = run(capsys, "learn", f"{prefix}.csv", "--max-lag", 3, "--out", model)
    assert code == 0
    metrics = tmp_path / "metrics.json"
    code, cap = run(capsys, "evaluate", model, f"{prefix}.truth.json", "--json", metrics)
    assert code == 0
    m = json.loads(metrics.read_text())
    assert m["k_estimated"] == m["k_true"] == 1
    assert m["temporal_precision"] >= 0.8 and m["temporal_recall"] >= 0.8
    assert "temporal_recall" in cap.out


def test_evaluate_against_own_truth(tmp_path, capsys):
    prefix = tmp_path / "sim"
    run(capsys, "simulate", "--d", 6, "--seed", 2, "--n", 50, "--out", prefix)
    truth = f"{prefix}.truth.json"
    metrics = tmp_path / "metrics.json"
    code, _ = run(capsys, "evaluate", truth, truth, "--json", metrics)
    assert code == 0
    m = json.loads(metrics.read_text())
    for key in ("temporal_precision", "temporal_recall", "contemporaneous_precision", "contemporaneous_recall"):
        assert m[key] == 1.0


def test_evaluate_test_csv_reports_mse(tmp_path, capsys, var2_model):
    y = draw_series(var2_model, 1024, seed=5).values
    train, test = tmp_path / "train.csv", tmp_path / "test.csv"
    io.write_csv(train, TimeSeries(y[:512]))
    io.write_csv(test, TimeSeries(y[512:]))
    model = tmp_path / "m.json"
    assert run(capsys, "learn", train, "--out", model)[0] == 0
    metrics = tmp_path / "metrics.json"
    code, cap = run(capsys, "evaluate", model, test, "--json", metrics)
    assert code == 0
    m = json.loads(metrics.read_text())
    assert set(m) == {"mse", "n_t", "n_c"}
    # innovation variances are about 1, so a reasonable model lands near 1
    assert 0.8 < m["mse"] < 1.5
    assert "mse" in cap.out


def test_missing_file(tmp_path, capsys):
    out = tmp_path / "model.json"
    code, cap = run(capsys, "learn", tmp_path / "nope.csv", "--out", out)
    assert code == 2
    assert "nope.csv" in cap.err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3,oops\n4,5\n")
    code, cap = run(capsys, "learn", bad)
    assert code == 2
    assert ":3:" in cap.err and "'b'" in cap.err


def test_ragged_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert run(capsys, "learn", bad)[0] == 2


def test_too_short_series(tmp_path, capsys):
    f = tmp_path / "short.csv"
    f.write_text("1,2\n3,4\n5,6\n")
    assert run(capsys, "learn", f, "--max-lag", 5)[0] == 2


def test_constant_column_is_degenerate(tmp_path, capsys):
    rng = np.random.default_rng(0)
    y = rng.standard_normal((200, 3))
    y[:, 1] = 7.0
    f = tmp_path / "const.csv"
    io.write_csv(f, TimeSeries(y, ("a", "flat", "c")))
    out = tmp_path / "m.json"
    code, cap = run(capsys, "learn", f, "--out", out)
    assert code == 3
    assert "flat" in cap.err
    assert not out.exists()


def test_simulate_q_zero(tmp_path, capsys):
    prefix = tmp_path / "z"
    assert run(capsys, "simulate", "--d", 4, "--q", 0, "--n", 20, "--out", prefix)[0] == 0
    truth = json.loads((tmp_path / "z.truth.json").read_text())
    assert truth["temporal_edges"] == [] and truth["contemporaneous_edges"] == []


def test_simulate_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        run(capsys, "simulate", "--d", 5, "--seed", 11, "--n", 100, "--out", tmp_path / name)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.truth.json").read_bytes() == (tmp_path / "b.truth.json").read_bytes()


def test_simulate_shape_contract(tmp_path, capsys):
    prefix = tmp_path / "big"
    assert run(capsys, "simulate", "--d", 20, "--k", 2, "--q", 3, "--n", 800, "--out", prefix)[0] == 0
    series = io.read_csv(f"{prefix}.csv")
    assert series.values.shape == (800, 20)
    truth = json.loads((tmp_path / "big.truth.json").read_text())
    assert truth["d"] == 20 and truth["k"] == 2
    assert np.array(truth["A"]).shape == (2, 20, 20)


def test_simulate_failure_exit_code(tmp_path, capsys, monkeypatch):
    import gvarlearn.cli as cli

    def boom(cfg):
        raise SimulationError("no stable model found")

    monkeypatch.setattr(cli, "random_gvar", boom)
    code, cap = run(capsys, "simulate", "--d", 4, "--out", tmp_path / "x")
    assert code == 4
    assert "no stable model" in cap.err
    assert list(tmp_path.iterdir()) == []


def test_simulate_invalid_config(tmp_path, capsys):
    assert run(capsys, "simulate", "--d", 3, "--q", -1, "--out", tmp_path / "x")[0] == 2


def test_json_round_trip_bit_exact(tmp_path, capsys, var2_model):
    data = tmp_path / "d.csv"
    io.write_csv(data, draw_series(var2_model, 600, seed=3))
    out = tmp_path / "m.json"
    assert run(capsys, "learn", data, "--out", out)[0] == 0
    payload = io.read_json(out)
    model = io.model_from_dict(payload)
    structure = io.structure_from_dict(payload)
    again = io.model_to_dict(structure, model)
    assert again["A"] == payload["A"] and again["Omega"] == payload["Omega"]
    assert io.structure_from_dict(again) == structure
    for a, b in zip(model.lag_matrices, io.model_from_dict(again).lag_matrices):
        assert a.tobytes() == b.tobytes()


def test_learn_is_deterministic(tmp_path, capsys, var2_model):
    data = tmp_path / "d.csv"
    io.write_csv(data, draw_series(var2_model, 400, seed=8))
    outs = []
    for name in ("a.json", "b.json"):
        run(capsys, "learn", data, "--out", tmp_path / name)
        p = json.loads((tmp_path / name).read_text())
        p["diagnostics"].pop("timings_ms")
        outs.append(p)
    assert outs[0] == outs[1]


def test_gamma_zero_denser_on_white_noise(tmp_path, capsys):
    counts = {0.0: [], 0.5: []}
    for seed in range(5):
        f = tmp_path / f"wn{seed}.csv"
        io.write_csv(f, TimeSeries(np.random.default_rng(seed).standard_normal((300, 5))))
        for g in counts:
            out = tmp_path / f"m{seed}_{g}.json"
            assert run(capsys, "learn", f, "--gamma", g, "--max-lag", 2, "--out", out)[0] == 0
            p = json.loads(out.read_text())
            counts[g].append(len(p["temporal_edges"]) + len(p["contemporaneous_edges"]))
    assert sum(counts[0.0]) >= sum(counts[0.5])


def test_detrend_flag_records_preprocessing(tmp_path, capsys):
    rng = np.random.default_rng(2)
    t = np.arange(300)[:, None]
    y = rng.standard_normal((300, 3)) + 0.05 * t
    f = tmp_path / "trend.csv"
    io.write_csv(f, TimeSeries(y))
    out = tmp_path / "m.json"
    assert run(capsys, "learn", f, "--detrend", "--max-lag", 2, "--out", out)[0] == 0
    prep = json.loads(out.read_text())["preprocessing"]
    assert prep["detrend"] and prep["center"]
    np.testing.assert_allclose(prep["slope"], 0.05, atol=0.01)
