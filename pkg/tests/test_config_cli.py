import json

import pytest

import opplab.statistics as stats_mod
from opplab.cli import main
from opplab.config import ConfigError, validate_config, resolve
from opplab.experiment import run_experiment
from opplab.report import render_report

SAMPLE = {"model": {"preset": "luroth"}, "task": {"kind": "sample", "n": 5, "replications": 2}}
DOMINANCE = {"model": {"preset": "luroth"},
             "task": {"kind": "verify", "lemma": "dominance", "N": 100000, "x_grid": [1.5, 2, 5]}}
THM5 = {"model": {"preset": "luroth"},
        "task": {"kind": "law", "theorem": "thm5", "p": 2, "beta": 1, "n_grid": [100, 1000, 10000],
                 "replications": 40, "eps": [0.1, 0.01]}}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_minimal_config_valid():
    assert validate_config(SAMPLE) is SAMPLE


def test_thm5_small_p_rejected():
    bad = json.loads(json.dumps(THM5))
    bad["task"]["p"] = 0.5
    with pytest.raises(ConfigError) as info:
        validate_config(bad)
    assert ("task/p", "p must be ≥ 2") in info.value.violations


def test_unknown_key_rejected():
    bad = {**SAMPLE, "task": {**SAMPLE["task"], "alpha_hat": 1}}
    with pytest.raises(ConfigError) as info:
        validate_config(bad)
    assert info.value.exit_code == 3 and "alpha_hat" in str(info.value)


def test_exit_codes(tmp_path, capsys):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["sample", "--config", str(bad_json)]) == 2
    bad = json.loads(json.dumps(THM5))
    bad["task"]["p"] = 0.5
    assert main(["law", "--config", _write(tmp_path, bad)]) == 3
    assert "p must be ≥ 2" in capsys.readouterr().err
    assert main(["verify", "--config", _write(tmp_path, SAMPLE)]) == 3
    assert main(["report", str(tmp_path)]) == 3


def test_expand_cli(tmp_path, capsys):
    assert main(["expand", "2/5", "--scheme", "sylvester"]) == 0
    assert capsys.readouterr().out == "3\n15\n"
    cfg = {"task": {"kind": "expand", "x": "2/5", "scheme": "sylvester"}}
    out = tmp_path / "exp"
    assert main(["expand", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    assert (out / "digits.txt").read_text() == "3\n15\n"
    assert "digit" in render_report(out)


def test_sample_csv_layout(tmp_path):
    out, code = run_experiment(resolve(SAMPLE, 1, tmp_path / "s"))
    lines = (out / "results.csv").read_bytes().split(b"\r\n")
    assert code == 0 and lines[0] == b"stream_id,j,B_j,R_j" and len(lines) == 12


def test_dominance_reproducible_and_report(tmp_path):
    hashes = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["verify", "--config", _write(tmp_path, DOMINANCE), "--seed", "7", "--out", str(out)]) == 0
        hashes.append(json.loads((out / "manifest.json").read_text())["files"])
    assert hashes[0] == hashes[1]
    text = render_report(tmp_path / "a")
    header = text.splitlines()[1].split()
    assert header[:4] == ["x", "p_hat", "upper", "margin"] and "verdict: PASS" in text
    assert (tmp_path / "a" / "plots" / "dominance_p_hat.dat").exists()


def test_thm5_law_rows(tmp_path):
    out, code = run_experiment(resolve(THM5, 0, tmp_path / "t5"))
    summary = json.loads((out / "summary.json").read_text())
    assert code == 0 and summary["mode"] == "almost-sure"
    rows = (out / "results.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 6
    assert "p_hat_n(eps = 0.1)" in render_report(out)


def test_threads_do_not_change_bytes(tmp_path, monkeypatch):
    cfg = {"model": {"preset": "luroth"},
           "task": {"kind": "law", "theorem": "thm2", "weights": {"u": 1, "s": 1, "r": 1, "p": 2},
                    "n_grid": [100, 1000], "replications": 60}}
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("OPPLAB_THREADS", threads)
        out, _ = run_experiment(resolve(cfg, 3, tmp_path / threads))
        outs.append((out / "results.csv").read_bytes() + (out / "summary.json").read_bytes())
    assert outs[0] == outs[1]


def test_worker_failure_is_partial(tmp_path, monkeypatch):
    calls = {"n": 0}
    real = stats_mod.sample_batch

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] > 1:
            raise RuntimeError("worker died")
        return real(*args, **kwargs)

    monkeypatch.setattr(stats_mod, "sample_batch", flaky)
    monkeypatch.setenv("OPPLAB_THREADS", "1")
    cfg = {"model": {"preset": "luroth"},
           "task": {"kind": "law", "theorem": "thm2", "weights": {"p": 2}, "n_grid": [50, 100],
                    "replications": 80}}
    out = tmp_path / "p"
    assert main(["law", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["partial"] is True and manifest["exit_code"] == 4
    assert render_report(out).startswith("PARTIAL run")
