"""Command-line flow: exit codes, artifact layout, provenance checks, and
config/env plumbing.  Uses a deliberately tiny dataset; output quality is
not the point here."""
import json
import os
import subprocess
import sys
from types import SimpleNamespace

import pytest

from soccersum.cli import main

TINY = """\
gen.matches = 10
gen.events_mean = 300
eval.kfold = 5
eval.folds = 1
stage1.epochs = 4
stage1.patience = 4
stage2.epochs = 4
stage2.patience = 4
"""

SMALL_GEN = """\
gen.matches = 2
gen.events_mean = 250
"""


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Run the whole piecewise flow once; individual tests inspect it."""
    root = tmp_path_factory.mktemp("chain")
    cfg = root / "tiny.cfg"
    cfg.write_text(TINY)
    data = root / "data"
    run = root / "run"
    run.mkdir()

    def step(argv):
        rc = main(argv)
        assert rc == 0, "step failed: %s" % argv
    c = ["--config", str(cfg)]
    step(["gen-data", *c, "--out-dir", str(data)])
    step(["train-proposals", *c, "--data", str(data), "--out-dir", str(run)])
    step(["score-events", *c, "--data", str(data),
          "--model", str(run / "mil.ckpt"),
          "--features", str(run / "stage1_features.json"),
          "--out", str(run / "scores.csv")])
    step(["extract-proposals", *c, "--data", str(data),
          "--scores", str(run / "scores.csv"),
          "--model", str(run / "mil.ckpt"),
          "--out", str(run / "proposals.json")])
    step(["train-hma", *c, "--data", str(data),
          "--proposals", str(run / "proposals.json"),
          "--out-dir", str(run)])
    step(["summarize", *c, "--data", str(data),
          "--proposals", str(run / "proposals.json"),
          "--model", str(run / "hma.ckpt"),
          "--out-dir", str(run)])
    return SimpleNamespace(root=root, cfg=cfg, data=data, run=run)


# ---------------------------------------------------------------------------
# exit codes

def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["replay-highlights"])
    assert exc.value.code == 1


def test_missing_required_option_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["gen-data"])
    assert exc.value.code == 1


def test_unknown_config_key_exits_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gen.referees = 3\n")
    rc = main(["gen-data", "--config", str(cfg), "--out-dir", str(tmp_path / "d")])
    assert rc == 1
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_value_exits_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gen.matches = banana\n")
    rc = main(["gen-data", "--config", str(cfg), "--out-dir", str(tmp_path / "d")])
    assert rc == 1


def test_missing_data_dir_exits_two(tmp_path, capsys):
    rc = main(["evaluate", "--data", str(tmp_path / "nowhere"),
               "--out-dir", str(tmp_path / "out")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_module_entrypoint_runs():
    proc = subprocess.run([sys.executable, "-m", "soccersum"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage" in proc.stderr


# ---------------------------------------------------------------------------
# generation

def test_gen_data_deterministic_bytes(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_GEN)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen-data", "--config", str(cfg), "--out-dir", str(a)]) == 0
    assert main(["gen-data", "--config", str(cfg), "--out-dir", str(b)]) == 0
    for rel in ("dataset.json", "events.jsonl", "summaries/m000.json",
                "summaries/m001.json"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_gen_data_honors_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SOCCERSUM_GEN_MATCHES", "2")
    monkeypatch.setenv("SOCCERSUM_GEN_EVENTS_MEAN", "250")
    out = tmp_path / "d"
    assert main(["gen-data", "--out-dir", str(out)]) == 0
    manifest = json.loads((out / "dataset.json").read_text())
    assert len(manifest["matches"]) == 2


# ---------------------------------------------------------------------------
# piecewise chain

def test_chain_artifacts_exist(chain):
    for rel in ("mil.ckpt", "stage1_features.json", "scores.csv",
                "proposals.json", "hma.ckpt", "theta.csv"):
        path = chain.run / rel
        assert path.exists() and path.stat().st_size > 0, rel
    cand_files = sorted(os.listdir(chain.run / "candidates"))
    assert cand_files, "no candidate files written"
    assert all(name.endswith(".json") for name in cand_files)


def test_scores_and_theta_carry_provenance(chain):
    for rel in ("scores.csv", "theta.csv"):
        first = (chain.run / rel).read_text().splitlines()[0]
        assert first.startswith("# config_hash=")
        assert "seed=7" in first


def test_proposals_payload_shape(chain):
    payload = json.loads((chain.run / "proposals.json").read_text())
    assert payload["seed"] == 7
    assert payload["matches"], "no proposals extracted"
    for spans in payload["matches"].values():
        for p in spans:
            assert p["start_index"] <= p["end_index"]
            assert isinstance(p["type"], str)


def test_candidate_payload_shape(chain):
    files = sorted(os.listdir(chain.run / "candidates"))
    payload = json.loads((chain.run / "candidates" / files[0]).read_text())
    assert payload["budget"] > 0
    cands = payload["candidates"]
    assert [c["sample_index"] for c in cands] == list(range(10))
    for c in cands:
        starts = [pick["start_index"] for pick in c["chosen"]]
        assert starts == sorted(starts)


def test_stale_artifacts_are_rejected(chain, capsys):
    rc = main(["score-events", "--config", str(chain.cfg), "--seed", "8",
               "--data", str(chain.data),
               "--model", str(chain.run / "mil.ckpt"),
               "--features", str(chain.run / "stage1_features.json"),
               "--out", str(chain.run / "scores2.csv")])
    assert rc == 2
    assert "provenance mismatch" in capsys.readouterr().err
    assert not (chain.run / "scores2.csv").exists()


def test_evaluate_writes_protocol_results(chain, tmp_path, capsys):
    out = tmp_path / "protocol"
    rc = main(["evaluate", "--config", str(chain.cfg),
               "--data", str(chain.data), "--out-dir", str(out)])
    assert rc == 0
    for rel in ("results/stage1.csv", "results/selection.csv",
                "results/ranking.csv", "results/results.txt"):
        assert (out / rel).exists(), rel
    text = capsys.readouterr().out
    assert "stage" in text.lower() or "selection" in text.lower()
