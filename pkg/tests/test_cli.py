import json
import subprocess
import sys

import pytest

from repeater_sched.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_experiment_defaults(capsys):
    code, out, _ = run(["experiment", "--seed", "42", "--trials", "20"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["master_seed"] == 42
    assert len(doc["results"]) == 6


def test_experiment_missing_config(capsys):
    code, _, err = run(["experiment", "--config", "missing.json"], capsys)
    assert code == 2 and "missing.json" in err


def test_experiment_zero_trials(capsys):
    code, _, err = run(["experiment", "--trials", "0"], capsys)
    assert code == 1 and "trials" in err


def test_experiment_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["experiment", "--config", str(bad)], capsys)[0] == 1
    bad.write_text('{"trials": 3, "colour": 1}')
    assert run(["experiment", "--config", str(bad)], capsys)[0] == 1


def test_experiment_outputs_and_csv(tmp_path, capsys):
    out, csv_path = tmp_path / "r.json", tmp_path / "r.csv"
    code, stdout, _ = run(["experiment", "--trials", "4", "-o", str(out), "--csv", str(csv_path),
                           "--policies", "PtS,StP", "--utility-kinds", "B"], capsys)
    assert code == 0 and stdout == ""
    doc = json.loads(out.read_text())
    assert [r["policy"] for r in doc["results"]] == ["PtS", "StP"]
    assert csv_path.read_text().splitlines()[0] == "policy,utility,trial,value"


def test_experiment_unwritable_output(tmp_path, capsys):
    code, _, _ = run(["experiment", "--trials", "1", "-o", str(tmp_path / "no" / "dir.json")], capsys)
    assert code == 2


def test_experiment_dump_config_round_trip(tmp_path, capsys):
    code, out, _ = run(["experiment", "--dump-config", "--trials", "7", "--p-swap", "0.5",
                        "--purification", "deterministic", "--seed", "3"], capsys)
    assert code == 0
    cfg = tmp_path / "c.json"
    cfg.write_text(out)
    code, again, _ = run(["experiment", "--dump-config", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(again) == json.loads(out)
    assert json.loads(out)["success"] == {"swap_success_p": 0.5, "purification_stochastic": False}


def test_simulate_zero_slots(capsys):
    code, out, _ = run(["simulate", "--slots", "0"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["reports"] == [] and doc["summary"]["slots"] == 0


def test_simulate_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["simulate", "--slots", "50", "--seed", "5", "--policy", "StP",
                    "--utility-kind", "B", "-o", str(path)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(json.loads(a.read_text())["reports"]) == 50


def test_simulate_bad_probability(capsys):
    code, _, err = run(["simulate", "--p-swap", "1.5"], capsys)
    assert code == 1 and "probability" in err


def test_simulate_config_file_and_dump(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"memories": 2, "policy": "SwapOnly", "seed": 4, "decay": {"slot_duration": 0.01, "decoherence_tau": 2.0}}))
    code, out, _ = run(["simulate", "--config", str(cfg), "--dump-config", "--slots", "9"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["memories"] == 2 and doc["policy"] == "SwapOnly" and doc["horizon_slots"] == 9
    cfg2 = tmp_path / "sim2.json"
    cfg2.write_text(out)
    assert json.loads(run(["simulate", "--config", str(cfg2), "--dump-config"], capsys)[1]) == doc
    cfg.write_text(json.dumps({"memories": 0}))
    assert run(["simulate", "--config", str(cfg)], capsys)[0] == 1


def write_graph(tmp_path, doc):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


@pytest.mark.parametrize("extra", [[], ["--brute-force"]])
def test_match_bipartite_example(tmp_path, capsys, extra):
    g = write_graph(tmp_path, {"nodes": 4, "edges": [[0, 2, 3], [0, 3, 1], [1, 2, 1], [1, 3, 3]]})
    code, out, _ = run(["match", g] + extra, capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["total_weight"] == 6
    assert sorted(map(tuple, doc["matched_edges"])) == [(0, 2), (1, 3)]


def test_match_empty_graph(tmp_path, capsys):
    code, out, _ = run(["match", write_graph(tmp_path, {"nodes": 0, "edges": []})], capsys)
    assert code == 0 and json.loads(out) == {"matched_edges": [], "total_weight": 0.0}


@pytest.mark.parametrize("doc", ["[1, 2", {"nodes": 2, "edges": [[0, 5, 1]]}, {"edges": []}])
def test_match_malformed(tmp_path, capsys, doc):
    assert run(["match", write_graph(tmp_path, doc)], capsys)[0] == 1


def test_match_missing_file(capsys):
    assert run(["match", "nope.json"], capsys)[0] == 2


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["swap", "0.9", "0.8"], 0.74),
        (["distill", "1.0"], 1.0),
        (["distill", "0.25"], -1.0),
        (["purify", "0.8", "0.8"], 0.64 / 0.68),
        (["purify-prob", "0.8", "0.8"], 0.68),
        (["decay", "1.0", "7", str(0.6931471805599453 / 7), "1.0"], 0.625),
    ],
)
def test_eval(capsys, argv, expected):
    code, out, _ = run(["eval"] + argv, capsys)
    assert code == 0
    assert float(out) == pytest.approx(expected, abs=1e-12)


def test_eval_precision(capsys):
    _, out, _ = run(["eval", "purify", "0.8", "0.8"], capsys)
    digits = out.strip().replace(".", "").lstrip("0")
    assert len(digits) >= 12


@pytest.mark.parametrize("argv", [["purify", "0", "1"], ["swap", "0.5"], ["decay", "0.9", "-1", "1", "1"], ["cube", "2"]])
def test_eval_errors(capsys, argv):
    assert run(["eval"] + argv, capsys)[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "repeater_sched", "eval", "swap", "0.9", "0.8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and float(proc.stdout) == pytest.approx(0.74)
