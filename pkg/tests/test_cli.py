import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from bitextmine.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
ORACLE = ["--provider", "oracle", "--dim", "256", "--provider-seed", "5", "--noise-sigma", "0.01"]


@pytest.fixture
def oracle_pair(tmp_path):
    src, tgt = tmp_path / "oracle.src", tmp_path / "oracle.tgt"
    shutil.copy(FIXTURES / "oracle.src", src)
    shutil.copy(FIXTURES / "oracle.tgt", tgt)
    return src, tgt


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_prepare(tmp_path, capsys):
    docs = tmp_path / "docs"
    docs.mkdir()
    (docs / "a.txt").write_text(
        "The rains came early this year in the valley. Short one. "
        "Farmers planted maize and beans along the river banks.",
        encoding="utf-8",
    )
    out = tmp_path / "clean.txt"
    code, stdout, _ = run(["prepare", docs, out, "--lang", "en"], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["n_raw"] == 3 and report["n_kept"] == 2 and report["n_dropped_short"] == 1
    assert out.read_text(encoding="utf-8").count("\n") == 2


def test_prepare_missing_input(tmp_path, capsys):
    code, _, err = run(["prepare", tmp_path / "nope", tmp_path / "out.txt"], capsys)
    assert code == 2 and "nope" in err


def test_prepare_bad_range(tmp_path, capsys):
    code, _, _ = run(["prepare", tmp_path, tmp_path / "o.txt", "--min-words", "9", "--max-words", "3"], capsys)
    assert code == 1


def test_usage_errors_exit_one(capsys):
    assert run(["align"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1


def test_embed_hash_mock(oracle_pair, tmp_path, capsys):
    cache = tmp_path / "e.cache"
    code, out, _ = run(["embed", *oracle_pair, "--cache", cache, "--dim", "32"], capsys)
    assert code == 0 and json.loads(out)["n_requested"] == 200
    code, out, _ = run(["embed", *oracle_pair, "--cache", cache, "--dim", "32"], capsys)
    assert json.loads(out)["n_requested"] == 0 and json.loads(out)["n_calls"] == 0


def test_remote_without_credential(oracle_pair, tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("NO_SUCH_KEY_VAR", raising=False)
    argv = ["embed", oracle_pair[0], "--cache", tmp_path / "c", "--provider", "remote",
            "--endpoint", "http://127.0.0.1:9/embed", "--api-key-env", "NO_SUCH_KEY_VAR"]
    code, _, err = run(argv, capsys)
    assert code == 3 and "NO_SUCH_KEY_VAR" in err


def test_corrupt_cache(oracle_pair, tmp_path, capsys):
    cache = tmp_path / "c"
    cache.write_text("deadbeef\t4\tAAAA", encoding="ascii")
    code, _, err = run(["embed", oracle_pair[0], "--cache", cache], capsys)
    assert code == 4 and f"{cache}:1:" in err


def test_evaluate_oracle_fixture(oracle_pair, tmp_path, capsys):
    code, out, _ = run(["evaluate", *oracle_pair, "--cache", tmp_path / "c", *ORACLE], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["f1"] == 1.0 and report["n_sents"] == 100


def test_evaluate_line_mismatch(oracle_pair, tmp_path, capsys):
    short = tmp_path / "short.tgt"
    short.write_text("".join(oracle_pair[1].read_text(encoding="utf-8").splitlines(True)[:99]), encoding="utf-8")
    code, _, err = run(["evaluate", oracle_pair[0], short, "--cache", tmp_path / "c", *ORACLE], capsys)
    assert code == 4 and "100" in err and "99" in err


def test_align_stats_sample_report(oracle_pair, tmp_path, capsys):
    cache, tsv = tmp_path / "c", tmp_path / "a.tsv"
    code, _, _ = run(["align", *oracle_pair, "--cache", cache, "--out", tsv, *ORACLE, "--method", "csls"], capsys)
    assert code == 0
    lines = tsv.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "#method=csls k=10 beta=30.0 threshold=none" and len(lines) == 101
    assert all(ln.split("\t")[0] == ln.split("\t")[1] for ln in lines[1:])

    code, out, _ = run(["evaluate", *oracle_pair, "--pred", tsv], capsys)
    assert code == 0 and json.loads(out)["f1"] == 1.0

    code, out, _ = run(["stats", tsv], capsys)
    assert code == 0 and json.loads(out)["unique_tgt_frac"] == 1.0

    ann = tmp_path / "ann.tsv"
    code, _, _ = run(["sample", tsv, "-k", "10", "--out", ann], capsys)
    assert code == 0
    body = ann.read_text(encoding="utf-8").splitlines()
    assert len(body) == 11
    ann.write_text("\n".join([body[0]] + [ln + "4" for ln in body[1:]]) + "\n", encoding="utf-8")
    code, out, _ = run(["report", ann], capsys)
    assert code == 0 and json.loads(out)["fractions"]["4"] == 1.0


def test_align_is_reproducible(oracle_pair, tmp_path, capsys):
    outs = []
    for n, extra in enumerate([["--block-size", "1"], ["--block-size", "4096", "--threads", "4"]]):
        path = tmp_path / f"a{n}.tsv"
        run(["align", *oracle_pair, "--cache", tmp_path / f"c{n}", "--out", path, *ORACLE, *extra], capsys)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_stats_on_empty_alignment(tmp_path, capsys):
    empty = tmp_path / "e.tsv"
    empty.write_text("#method=nn k=10 beta=30.0 threshold=0.99\n", encoding="utf-8")
    assert run(["stats", empty], capsys)[0] == 4


def test_flags_override_config(oracle_pair, tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"align": {"method": "invnn"}, "cache_path": str(tmp_path / "c")}), encoding="utf-8")
    out = tmp_path / "a.tsv"
    run(["align", *oracle_pair, "--config", cfg, "--out", out, *ORACLE, "--method", "invsoftmax"], capsys)
    assert out.read_text(encoding="utf-8").startswith("#method=invsoftmax ")
    run(["align", *oracle_pair, "--config", cfg, "--out", out, *ORACLE], capsys)
    assert out.read_text(encoding="utf-8").startswith("#method=invnn ")


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bitextmine", "stats", str(tmp_path / "missing.tsv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
