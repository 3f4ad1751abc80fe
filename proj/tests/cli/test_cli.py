"""End-to-end checks of the forge binary: subcommand wiring, exit codes, and
record/replay determinism through the offline demo backend."""

import json
import os
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest

FORGE = os.environ.get("FORGE_CLI")
DEMO_BACKEND = os.environ.get("FORGE_DEMO_BACKEND")

pytestmark = pytest.mark.skipif(
    not FORGE or not Path(FORGE).exists(), reason="FORGE_CLI not set"
)


def run(*args, cwd=None):
    return subprocess.run([FORGE, *map(str, args)], cwd=cwd, capture_output=True, text=True)


def write_seed_dataset(path: Path, per_category: int = 4) -> None:
    categories = [
        "classification", "open_qa", "summarization", "brainstorming",
        "closed_qa", "creative_writing", "information_extraction",
    ]
    with path.open("w") as f:
        n = 0
        for category in categories:
            for i in range(per_category):
                record = {
                    "id": f"seed-{n:04d}",
                    "scheme": "seed",
                    "category": category,
                    "instruction": f"Seed task {n} about {category}: explain it plainly.",
                }
                f.write(json.dumps(record) + "\n")
                n += 1


def test_stats_and_exit_codes(tmp_path):
    dataset = tmp_path / "ds.jsonl"
    write_seed_dataset(dataset)
    done = run("stats", "--in", dataset)
    assert done.returncode == 0
    stats = json.loads(done.stdout)
    assert stats["total"] == 28
    assert stats["per_category"]["open_qa"] == 4

    missing = run("stats", "--in", tmp_path / "nope.jsonl")
    assert missing.returncode == 1  # usage

    malformed = tmp_path / "bad.jsonl"
    malformed.write_text("not json\n")
    bad = run("stats", "--in", malformed)
    assert bad.returncode == 3  # validation

    no_args = run("gen-lamini")
    assert no_args.returncode == 1


def test_dpo_demo_report(tmp_path):
    report_path = tmp_path / "report.json"
    done = run("dpo-demo", "--prompts", 4, "--responses", 4, "--triples", 300,
               "--epochs", 300, "--learning-rate", 1.0, "--seed", 5,
               "--report", report_path)
    assert done.returncode == 0
    report = json.loads(report_path.read_text())
    assert report["loss_last"] < report["loss_first"]
    assert report["gradient_check_max_rel_error"] < 1e-6
    assert 0.0 <= report["argmax_agreement"] <= 1.0
    assert len(report["loss_trace"]) == 300


def test_judging_chain(tmp_path):
    grades = tmp_path / "grades.jsonl"
    with grades.open("w") as f:
        for q in ("81", "82"):
            for turn in ("first", "second"):
                f.write(json.dumps({"question_id": q, "turn": turn,
                                    "model": "m-alpha", "score": 6.0}) + "\n")
                f.write(json.dumps({"question_id": q, "turn": turn,
                                    "model": "m-beta", "score": 4.0}) + "\n")
    judgments = tmp_path / "judgments.jsonl"
    assert run("pairwise", "--grades", grades, "--judge", "conv",
               "--out", judgments).returncode == 0
    lines = judgments.read_text().splitlines()
    assert len(lines) == 4  # C(2,2 models)=1 per (question, turn)

    agreement_out = tmp_path / "agreement.json"
    done = run("agreement", "--a", judgments, "--b", judgments, "--out", agreement_out)
    assert done.returncode == 0
    report = json.loads(agreement_out.read_text())
    assert report["first"]["S1"]["pct"] == 100.0

    categories = tmp_path / "categories.json"
    categories.write_text(json.dumps({"81": "writing", "82": "math"}))
    mt_out = tmp_path / "mt.json"
    radar = tmp_path / "radar.csv"
    done = run("mtbench-report", "--grades", grades, "--categories", categories,
               "--out", mt_out, "--radar", radar)
    assert done.returncode == 0
    assert "First Turn" in done.stdout
    mt = json.loads(mt_out.read_text())
    assert mt["models"]["m-alpha"]["average"] == 6.0
    assert radar.read_text().startswith("category,model,score")


@pytest.mark.skipif(not DEMO_BACKEND or not Path(DEMO_BACKEND).exists(),
                    reason="FORGE_DEMO_BACKEND not set")
def test_record_replay_through_demo_backend(tmp_path):
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = subprocess.Popen([sys.executable, DEMO_BACKEND, str(port)],
                              stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        deadline = time.time() + 10
        while time.time() < deadline:
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                    break
            except OSError:
                time.sleep(0.05)
        else:
            pytest.fail("demo backend did not come up")

        seeds = tmp_path / "seeds.jsonl"
        write_seed_dataset(seeds)
        cache = tmp_path / "cache.jsonl"
        url = f"http://127.0.0.1:{port}"

        common = ["--seeds", seeds, "--iterations", 4, "--seed", 11, "--cache", cache,
                  "--rps", 0]
        recorded = run("gen-lamini", "--out", tmp_path / "a.jsonl", "--mode", "record",
                       "--backend-url", url, *common)
        assert recorded.returncode == 0, recorded.stderr
        replayed = run("gen-lamini", "--out", tmp_path / "b.jsonl", "--mode", "replay", *common)
        assert replayed.returncode == 0, replayed.stderr
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

        # prompts that were never recorded are replay misses: the run fails
        # loudly with the backend exit code
        miss = run("gen-lamini", "--out", tmp_path / "c.jsonl", "--mode", "replay",
                   "--seeds", seeds, "--iterations", 6, "--seed", 99, "--cache", cache)
        assert miss.returncode == 2
        assert "replay miss" in miss.stderr
    finally:
        server.terminate()
        server.wait(timeout=10)
