import json
import shutil
import subprocess

import pytest

from tw_congest.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line.strip()]


def test_separator_record(capsys):
    code, (rec,) = run(capsys, "separator", "--family", "ktree", "--n", "300", "--k", "2", "--profile", "desk",
                       "--seed", "7")
    assert code == 0
    assert rec["summary"]["balance"] is True
    assert rec["profile"] == "desk" and rec["seed"] == 7
    assert {"instance", "summary", "verdict", "stats"} <= set(rec)


def test_girth_on_cycle(capsys):
    code, (rec,) = run(capsys, "girth", "--undirected", "--family", "cycle", "--n", "20")
    assert code == 0 and rec["summary"]["girth"] == 20


def test_dl_verify(capsys):
    code, (rec,) = run(capsys, "dl", "--verify", "--n", "100", "--k", "3")
    assert code == 0 and rec["verdict"] == "pass"


@pytest.mark.parametrize("cmd", ["td", "walks", "matching"])
def test_other_pipelines_verify(capsys, cmd):
    code, (rec,) = run(capsys, cmd, "--verify", "--n", "30", "--seed", "2")
    assert code == 0 and rec["verdict"] == "pass"


def test_without_verify_no_verdict(capsys):
    code, (rec,) = run(capsys, "td", "--n", "30")
    assert code == 0 and rec["verdict"] == "not-run"


def test_sweep_records_and_determinism(capsys):
    args = ("sweep", "--algorithm", "td", "--ns", "20", "30", "40", "--seed", "5")
    code, recs = run(capsys, *args)
    assert code == 0
    cells = [r for r in recs if r["command"] == "td"]
    assert len(cells) == 3 and [r["seed"] for r in cells] == [5 ^ 0, 5 ^ 1, 5 ^ 2]
    assert len(recs[-1]["aggregate"]) == 3
    _, again = run(capsys, *args)
    assert again == recs


def test_empty_sweep(capsys):
    code, recs = run(capsys, "sweep", "--ns")
    assert code == 0 and recs[-1]["aggregate"] == []


def test_usage_errors(capsys, monkeypatch):
    assert main(["separator", "--n", "0"]) == 2
    assert main(["nosuch"]) == 2
    assert main(["separator", "--profile", "huge"]) == 2
    monkeypatch.setenv("TW_CONGEST_PROFILE", "huge")
    assert main(["separator", "--n", "10"]) == 2
    capsys.readouterr()


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("TW_CONGEST_PROFILE", "paper")
    monkeypatch.setenv("TW_CONGEST_SEED", "9")
    code, (rec,) = run(capsys, "td", "--n", "20")
    assert rec["profile"] == "paper" and rec["seed"] == 9
    code, (rec,) = run(capsys, "td", "--n", "20", "--seed", "3")
    assert rec["seed"] == 3


def test_error_verdict_exits_one(capsys):
    code, (rec,) = run(capsys, "matching", "--family", "cycle", "--n", "7")
    assert code == 1 and rec["verdict"] == "error"
    code, (rec,) = run(capsys, "td", "--n", "200", "--max-rounds", "3")
    assert code == 1 and rec["verdict"] == "error"


def test_out_file_appends(tmp_path, capsys):
    out = tmp_path / "runs.jsonl"
    assert main(["td", "--n", "15", "--out", str(out)]) == 0
    assert main(["td", "--n", "16", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert [json.loads(x)["instance"]["n"] for x in lines] == [15, 16]
    assert capsys.readouterr().out == ""


@pytest.mark.skipif(shutil.which("tw-congest") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["tw-congest", "girth", "--undirected", "--family", "cycle", "--n", "6"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["summary"]["girth"] == 6
