import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from sail.cli import build_parser, main, resolve_settings
from sail.reasoner import event_block

TEST = str(FIXTURES / "tests" / "abc_font_then_article.json")
FOX = str(FIXTURES / "apps" / "fox_news.json")
SUITE = str(FIXTURES / "suite.json")


def migrate_args(out, *extra, planner="sail"):
    return ["migrate", "--source", TEST, "--app", FOX, "--planner", planner, "--reasoner", "heuristic",
            "--out", str(out), *extra]


def test_migrate_success(tmp_path, capsys):
    assert main(migrate_args(tmp_path / "o")) == 0
    doc = json.loads((tmp_path / "o" / "trace.json").read_text())
    assert doc["outcome"] == "goal_reached"
    assert "goal_reached" in capsys.readouterr().out


def test_migrate_matcher_fails(tmp_path):
    assert main(migrate_args(tmp_path / "o", planner="matcher")) == 1


def test_missing_app_is_usage_error(tmp_path, capsys):
    code = main(["migrate", "--source", TEST, "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2 and err.startswith("usage: sail migrate") and "--app" in err


def test_unknown_flag_rejected(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(migrate_args(tmp_path, "--warp-speed"))
    assert info.value.code == 2


def test_bad_documents_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "x"}')
    assert main(["migrate", "--source", str(bad), "--app", FOX, "--out", str(tmp_path / "o")]) == 2
    assert main(["migrate", "--source", TEST, "--app", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == 2


def test_transcript_replay_round_trip(tmp_path):
    assert main(migrate_args(tmp_path / "first")) == 0
    transcript = tmp_path / "first" / "transcript.jsonl"
    args = ["migrate", "--source", TEST, "--app", FOX, "--reasoner", "replay", "--transcript",
            str(transcript), "--out", str(tmp_path / "again")]
    assert main(args) == 0
    first = json.loads((tmp_path / "first" / "trace.json").read_text())
    again = json.loads((tmp_path / "again" / "trace.json").read_text())
    assert first["events"] == again["events"]


def test_unreachable_remote_is_infrastructure_error(tmp_path):
    args = migrate_args(tmp_path / "o")
    args[args.index("heuristic")] = "remote"
    assert main(args + ["--url", "http://127.0.0.1:9"]) == 3


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "sail.toml"
    cfg.write_text('max-steps = 1\nurl = "http://from-file"\n[migrate]\nplanner = "target"\n')
    monkeypatch.setenv("SAIL_REASONER_URL", "http://from-env")
    parser = build_parser()
    base = ["migrate", "--source", TEST, "--app", FOX, "--out", "o", "--config", str(cfg)]
    s = resolve_settings(parser.parse_args(base))
    assert (s["max_steps"], s["planner"], s["url"], s["tau"]) == (1, "target", "http://from-env", 0.4)
    s = resolve_settings(parser.parse_args(base + ["--max-steps", "9", "--url", "http://from-flag"]))
    assert (s["max_steps"], s["url"]) == (9, "http://from-flag")


def test_config_file_drives_migration(tmp_path):
    cfg = tmp_path / "sail.toml"
    cfg.write_text("max_steps = 1\n")
    assert main(migrate_args(tmp_path / "o", "--config", str(cfg))) == 1
    assert main(migrate_args(tmp_path / "o", "--config", str(cfg), "--max-steps", "25")) == 0


@pytest.mark.parametrize("text", ["warp = 9\n", "max_steps = [\n"])
def test_bad_config_exit_2(tmp_path, text):
    cfg = tmp_path / "sail.toml"
    cfg.write_text(text)
    assert main(migrate_args(tmp_path / "o", "--config", str(cfg))) == 2


def test_bench_reports(tmp_path, capsys):
    assert main(["bench", "--suite", SUITE, "--planners", "sail,matcher", "--reasoners", "heuristic",
                 "--out", str(tmp_path / "b")]) == 0
    md = (tmp_path / "b" / "report.md").read_text().split("\n\n")[0].splitlines()
    assert md[0] == "| approach | overall SR | 1-to-1 SR | non-1-to-1 SR |"
    assert [line.split("|")[1].strip() for line in md[2:]] == ["sail/heuristic", "matcher"]
    assert "sail/heuristic" in capsys.readouterr().out


def test_bench_jobs_byte_identical(tmp_path):
    for jobs in ("1", "8"):
        assert main(["bench", "--suite", SUITE, "--planners", "sail,trace,target,matcher",
                     "--reasoners", "heuristic", "--out", str(tmp_path / jobs), "--jobs", jobs]) == 0
    assert (tmp_path / "1" / "report.json").read_bytes() == (tmp_path / "8" / "report.json").read_bytes()


def test_bench_errors(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text('{"pairs": []}')
    assert main(["bench", "--suite", str(empty), "--out", str(tmp_path / "o")]) == 2
    assert main(["bench", "--suite", SUITE, "--planners", "warp", "--out", str(tmp_path / "o")]) == 2
    assert main(["bench", "--suite", SUITE, "--jobs", "0", "--out", str(tmp_path / "o")]) == 2


def test_match_eval(tmp_path):
    assert main(["match-eval", "--dataset", str(FIXTURES / "match" / "dataset.json"), "--scorer", "lexical",
                 "--out", str(tmp_path / "m")]) == 0
    report = json.loads((tmp_path / "m" / "report.json").read_text())
    assert set(report) == {"n", "top1", "mrr"} and report["n"] == 14 and report["mrr"] is not None
    assert (tmp_path / "m" / "breakdown.md").read_text().count("\n") == 16


def test_match_eval_single_perfect_query(tmp_path):
    data = tmp_path / "one.json"
    data.write_text(json.dumps({"queries": [{
        "source": {"action": "click", "target": {"text": "Save"}},
        "candidates": [{"action": "click", "target": {"text": "Save"}, "bounds": "[0,0][10,10]"},
                       {"action": "click", "target": {"text": "Cancel"}, "bounds": "[20,0][30,10]"}],
        "truth_bounds": "[0,0][10,10]"}]}))
    for scorer in ("lexical", "reasoner"):
        assert main(["match-eval", "--dataset", str(data), "--scorer", scorer, "--out", str(tmp_path / scorer)]) == 0
        assert json.loads((tmp_path / scorer / "report.json").read_text())["top1"] == 1.0


def test_match_eval_malformed(tmp_path):
    data = tmp_path / "bad.json"
    data.write_text('{"queries": [{"source": {}}]}')
    assert main(["match-eval", "--dataset", str(data), "--out", str(tmp_path / "m")]) == 2


def test_parse(capsys):
    path = FIXTURES / "dumps" / "abc_news__home.xml"
    assert main(["parse", "--dump", str(path)]) == 0
    out = capsys.readouterr().out
    assert "activity: com.abc.news.HomeActivity" in out and "elements: 5" in out
    assert main(["parse", "--dump", str(path), "--events"]) == 0
    listing = capsys.readouterr().out
    expected = event_block(["click 'Menu'", "click 'Read article: Markets rally'", "press back"])
    assert listing.rstrip().endswith(expected)


def test_parse_bad_bounds(capsys):
    assert main(["parse", "--dump", str(FIXTURES / "dumps" / "malformed" / "bad_bounds_syntax.xml")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_outputs_stay_under_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(migrate_args("out")) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["out"]


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "sail", "--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "migrate" in done.stdout
