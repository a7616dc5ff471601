import csv
import json

import pytest

from zzcompiler.cli import ENV_OUT, arm_options, load_error_matrix, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.fixture
def qv(tmp_path, capsys):
    out = tmp_path / "qv"
    assert run(capsys, "generate", "--n", 4, "--count", 6, "--seed", 3, "--out", out)[0] == 0
    return out


def test_generate_manifest(qv):
    mf = json.loads((qv / "manifest.json").read_text())
    assert mf["kind"] == "circuits" and mf["n"] == 4 and mf["depth"] == 4
    assert [it["id"] for it in mf["items"]] == [f"qv_{i:04d}" for i in range(6)]
    assert all((qv / it["file"]).exists() for it in mf["items"])


def test_full_flow(tmp_path, qv, capsys):
    comp, sim, ana = tmp_path / "comp", tmp_path / "sim", tmp_path / "ana"
    ref = tmp_path / "ref"
    assert run(capsys, "compile", "--in", qv, "--arm", "mirror", "--out", ref)[0] == 0
    code, _ = run(capsys, "compile", "--in", qv, "--arm", "ranked", "--error-matrix", "bad_pairs", "--out", comp)
    assert code == 0
    report = json.loads((comp / "qv_0000.report.json").read_text())
    assert {"theta_total", "zz_count", "theta_by_pair", "assignment", "out_perm"} <= set(report)
    noise = tmp_path / "noise.json"
    noise.write_text(json.dumps({"stochastic": {"channel": "depolarizing", "eps": 0.01}, "seed": 1}))
    code, _ = run(capsys, "simulate", "--in", comp, "--noise", noise, "--shots", 100, "--csv", "--out", sim)
    assert code == 0
    counts = json.loads((sim / "qv_0000.counts.json").read_text())
    assert sum(counts.values()) == 100
    assert (sim / "qv_0000.counts.csv").read_text().startswith("bitstring,count")
    code, cap = run(capsys, "analyze", "--counts", sim, "--ideal", comp, "--reports", "--reference", ref,
                    "--bad-pairs", "bad_pairs", "--out", ana)
    assert code == 0
    agg = json.loads(cap.out)
    assert agg["N"] == 6 and 0 <= agg["mean_h_a"] <= 1
    rows = list(csv.DictReader((ana / "per_circuit.csv").open()))
    assert len(rows) == 6 and rows[0]["offload_category"] in ("none", "already_minimal", "partial", "complete")
    assert (ana / "running_mean.csv").exists() and (ana / "aggregate.csv").exists()


def test_sweep_and_estimate(tmp_path, qv, capsys):
    comp = tmp_path / "comp"
    run(capsys, "compile", "--in", qv, "--arm", "mirror", "--out", comp)
    code, cap = run(capsys, "sweep", "--in", comp, "--channel", "dephasing", "--rates", "0,0.05",
                    "--shots", 50, "--out", tmp_path / "sw")
    assert code == 0 and "dephasing" in cap.out
    rows = list(csv.DictReader((tmp_path / "sw" / "sweep_dephasing.csv").open()))
    assert [float(r["rate"]) for r in rows] == [0, 0.05]
    code, _ = run(capsys, "estimate", "--in", comp, "--measured", 0.75, "--channel", "depolarizing",
                  "--shots", 50, "--out", tmp_path / "est")
    assert code == 0
    doc = json.loads((tmp_path / "est" / "estimate_depolarizing.json").read_text())
    assert doc["eps_hat"] > 0 and doc["shots"] == 50
    # unreachable target is a data error
    code, cap = run(capsys, "estimate", "--in", comp, "--measured", 0.01, "--channel", "depolarizing",
                    "--shots", 20, "--out", tmp_path / "est2")
    assert code == 2 and "error" in cap.err


def test_experiment(tmp_path, capsys):
    cfg = {
        "qv": {"n": 4, "n_circuits": 3, "seed": 2},
        "arms": ["mirror", "ranked"],
        "error_matrix": "bad_pairs",
        "reference_arm": "mirror",
        "shots": 50,
        "noise": {"stochastic": {"channel": "depolarizing", "eps": 0.01}},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, cap = run(capsys, "experiment", "--config", path, "--out", tmp_path / "x")
    assert code == 0 and "ranked:" in cap.out
    mf = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert set(mf["arms"]) == {"mirror", "ranked"}
    assert (tmp_path / "x" / "ranked" / "per_circuit.csv").exists()


def test_env_default_out(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(ENV_OUT, str(tmp_path / "envout"))
    assert run(capsys, "generate", "--n", 2, "--count", 1)[0] == 0
    assert (tmp_path / "envout" / "manifest.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["generate"],
        ["generate", "--n", "4", "--count", "-1"],
        ["sweep", "--in", "x", "--channel", "dephasing", "--rates", "a,b"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 1


def test_data_errors(tmp_path, capsys):
    assert run(capsys, "compile", "--in", tmp_path / "missing", "--out", tmp_path / "o")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_qubits": 2, "gates": [{"kind": "XY", "params": [], "qubits": [0]}]}')
    assert run(capsys, "compile", "--in", bad, "--out", tmp_path / "o")[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "simulate", "--in", bad, "--out", tmp_path / "o")[0] == 2
    assert run(capsys, "compile", "--in", bad, "--arm", "ranked", "--out", tmp_path / "o")[0] == 1


def test_builtin_matrices_and_arms():
    em = load_error_matrix("bad_pairs")
    assert em.n == 4 and em.worst_pairs(2) == [(1, 3), (0, 2)]
    assert load_error_matrix("bad_qubit").n == 5
    assert arm_options("approx").theta_min == pytest.approx(0.10)
    assert arm_options("ranked", em).ranking is em
