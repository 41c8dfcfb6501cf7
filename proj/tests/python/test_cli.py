import json
import os
import subprocess

import pytest

from conftest import DATA

CLI = os.environ.get("CLAUSEWISE_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="CLAUSEWISE_CLI is not set")
GOLDEN = str(DATA / "corpus" / "golden.jsonl")


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, timeout=120)


def test_explain():
    r = run("explain", "SELECT name FROM singer WHERE age > 30", "--db", "concert_singer")
    assert r.returncode == 0, r.stderr
    assert "Keep the records where the age is greater than 30" in r.stdout
    r = run("explain", "SELECT name FROM singer", "--db", "concert_singer", "--json")
    assert json.loads(r.stdout)["steps"][1]["text"] == "Return the name"


def test_explain_bad_sql_exits_1():
    r = run("explain", "SELECT FROM", "--db", "concert_singer")
    assert r.returncode == 1
    assert r.stderr and not r.stdout


def test_edit_paths():
    sql = "SELECT name FROM singer WHERE age > 30"
    r = run("edit", sql, "2", "Keep the records where the age is greater than 40", "--db", "concert_singer")
    assert r.returncode == 0, r.stderr
    assert "SELECT name FROM singer WHERE age > 40" in r.stdout
    assert "path=direct" in r.stdout
    r = run("edit", sql, "9", "x", "--db", "concert_singer")
    assert r.returncode == 1
    r = run("edit", sql, "2", "Paint the fence", "--db", "concert_singer")
    assert r.returncode == 3


def test_simulate_json():
    r = run("simulate", GOLDEN, "--json", "--seed", "1")
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert report["total"] > 50
    assert report["exact_match_after"] == 1.0


def test_simulate_missing_corpus():
    assert run("simulate", "/nonexistent.jsonl").returncode == 1


def test_gen_corpus_counts(tmp_path, golden):
    clause_steps = sum(sum(1 for t in item["explanation"] if not t.startswith("Start the") and " of them" not in t
                           and "but not in the second query" not in t) for item in golden)
    out = tmp_path / "pairs.jsonl"
    r = run("gen-corpus", GOLDEN, "--out", str(out), "--paraphrases", "2", "--seed", "5")
    assert r.returncode == 0, r.stderr
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == 3 * clause_steps
    assert set(lines[0]) == {"explanation", "clause_sql", "db_id", "clause_kind"}
    again = tmp_path / "again.jsonl"
    run("gen-corpus", GOLDEN, "--out", str(again), "--paraphrases", "2", "--seed", "5")
    assert again.read_text() == out.read_text()
    plain = tmp_path / "plain.jsonl"
    run("gen-corpus", GOLDEN, "--out", str(plain), "--paraphrase", "off")
    assert len(plain.read_text().splitlines()) == clause_steps
