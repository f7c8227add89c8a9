from __future__ import annotations

import csv
import hashlib
import json

import pytest

from primediff.checkpoint import load_tracer, save_tracer
from primediff.cli import main
from primediff.diffcount import ChampionTracer
from primediff.errors import ConfigurationError


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_champions_final_row(tmp_path):
    assert main(["champions", "--max", "1e5", "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "trace.csv")
    assert rows[0] == ["x", "max_count", "champions"]
    assert rows[1] == ["3", "1", "1"] and rows[2] == ["5", "1", "1;2;3"]
    assert rows[-1] == ["99991", "4203", "2310"]


def test_rerun_is_byte_identical(tmp_path):
    for sub in ("a", "b"):
        out = str(tmp_path / sub)
        assert main(["diffs", "--x", "5000", "--out-dir", out]) == 0
        assert main(["gaps", "--max", "5000", "--out-dir", out]) == 0
        assert main(["hl", "--x", "3000", "--out-dir", out]) == 0
        assert main(["figures", "--which", "4,8", "--max", "3000", "--x-list", "2e3,3e3",
                     "--out-dir", out]) == 0
    for name in ("diffs.csv", "gaps.csv", "model.csv", "fig4.csv", "fig8.csv"):
        assert sha(tmp_path / "a" / name) == sha(tmp_path / "b" / name)


def test_checkpoint_resume(tmp_path):
    full = tmp_path / "full.csv"
    part = tmp_path / "part.csv"
    ck = tmp_path / "run.ck"
    assert main(["champions", "--max", "1e4", "--out", str(full)]) == 0
    assert main(["champions", "--max", "1e4", "--out", str(part), "--checkpoint", str(ck),
                 "--checkpoint-every", "100", "--stop-at", "4000"]) == 0
    assert sha(part) != sha(full)
    with open(part, "ab") as fh:  # junk past the checkpoint offset is discarded on resume
        fh.write(b"garbage\n")
    assert main(["champions", "--max", "1e4", "--out", str(part), "--checkpoint", str(ck)]) == 0
    assert sha(part) == sha(full)


def test_checkpoint_roundtrip(small_table, tmp_path):
    tr = ChampionTracer(small_table, 5000)
    tr.advance(2000)
    save_tracer(tr, tmp_path / "c", 7, 99)
    back, rows, offset = load_tracer(tmp_path / "c", small_table)
    assert (rows, offset, back.x, back.champions, back.max_count) == (7, 99, tr.x, tr.champions, tr.max_count)
    assert back.advance() == tr.advance()
    raw = (tmp_path / "c").read_bytes()
    assert raw[:5] == b"PDCK\x01"
    (tmp_path / "c").write_bytes(raw[:4] + b"\x09" + raw[5:])
    with pytest.raises(ConfigurationError):
        load_tracer(tmp_path / "c", small_table)


def test_checkpoint_for_other_max(tmp_path):
    ck = tmp_path / "ck"
    main(["champions", "--max", "3000", "--out-dir", str(tmp_path), "--checkpoint", str(ck)])
    assert main(["champions", "--max", "4000", "--out-dir", str(tmp_path), "--checkpoint", str(ck)]) == 2


def test_verify(tmp_path):
    assert main(["verify", "--max", "1000", "--out-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert {r["name"] for r in report} == {"primorial", "envelope", "lemma4", "lemma5", "factors"}
    assert all(set(r) == {"name", "pass", "details", "worst_case"} for r in report)

    cfg = tmp_path / "strict.toml"
    cfg.write_text("lemma4_C = 0.5\n")
    assert main(["verify", "--max", "1000", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "report.json").read_text())
    assert [r["pass"] for r in report if r["name"] == "lemma4"] == [False]


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("no_such_key = 1\n")
    assert main(["verify", "--max", "1000", "--config", str(bad)]) == 2
    bad.write_text("x_max = = 3\n")
    assert main(["verify", "--config", str(bad)]) == 2
    assert main(["champions", "--max", "2", "--out-dir", str(tmp_path)]) == 2
    assert main(["singular", "--d", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["diffs", "--x", "abc"])
    assert exc.value.code == 2


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PRIMEDIFF_OUT_DIR", str(tmp_path))
    assert main(["transitions", "--max", "2000"]) == 0
    rows = read_csv(tmp_path / "table.csv")
    assert rows[0] == ["primorial", "first_x", "last_x", "open_ended"]
    assert ["6", "17", "179", "0"] in rows and ["210", "1423", "1999", "1"] in rows


def test_json_commands(capsys):
    assert main(["singular", "--d", "30"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["exact_ratio_num"], out["exact_ratio_den"]) == (16, 3)
    assert {"d", "value", "c2", "exact_ratio_num", "exact_ratio_den"} <= set(out)
    assert main(["primorials", "--max-k", "6"]) == 0
    assert [p["value"] for p in json.loads(capsys.readouterr().out)] == [2, 6, 30, 210, 2310, 30030]
    assert main(["mertens", "--y", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["product"] == pytest.approx(4.375)


def test_sieve_command(tmp_path):
    assert main(["sieve", "--bound", "100", "--text", "p.txt", "--out", "p.bin",
                 "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "p.txt").read_text().split()) == 25
    assert (tmp_path / "p.bin").stat().st_size == 8 * 26


def test_hl_single_and_stats(tmp_path):
    assert main(["hl", "--x", "1000", "--d", "2", "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "model.csv")
    assert rows[0] == ["d", "G", "G_model", "E", "H"] and rows[1][:2] == ["2", "35"]
    assert main(["hl-stats", "--x-list", "1e4", "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "stats.csv")
    assert rows[0] == ["x", "pi", "mu", "nu", "nu_over_pi2"] and rows[1][:2] == ["9973", "1229"]


def test_figures(tmp_path):
    out = str(tmp_path)
    assert main(["figures", "--which", "1,2,3,6,7", "--x", "5000", "--out-dir", out]) == 0
    assert read_csv(tmp_path / "fig1.csv")[0] == ["d", "N"]
    assert read_csv(tmp_path / "fig3.csv")[0] == ["d", "G", "is_champion"]
    assert read_csv(tmp_path / "fig6.csv")[0] == ["d", "G_model", "I"]
    assert main(["figures", "--which", "4,5,9", "--max", "2000", "--pair", "6,30",
                 "--x-list", "2000", "--out-dir", out]) == 0
    assert read_csv(tmp_path / "fig4.csv")[0] == ["x", "champions", "lower_env", "upper_env"]
    fig5 = read_csv(tmp_path / "fig5.csv")
    assert fig5[1][0] == "131" and fig5[-1][0] == "179"
    assert read_csv(tmp_path / "fig9.csv")[0] == ["x", "nu_over_pi2"]
    # the default 210 -> 2310 window needs a longer sweep: explicit capability error
    assert main(["figures", "--which", "5", "--max", "2000", "--out-dir", out]) == 2
