"""``sail`` command line: migrate, bench, match-eval, parse.

Exit codes: 0 success, 1 migration failed, 2 configuration or input error,
3 infrastructure error (reasoner backend, simulator).

Settings resolve as flags, then environment (``SAIL_REASONER_URL``,
``SAIL_REASONER_API_KEY``, ``SAIL_REASONER_MODEL``), then a TOML file given
with ``--config`` whose keys mirror the long flag names, then defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import (
    ConfigError, EmptyQuerySet, EmptySuite, MalformedDump, PartitionError, ReasonerError, SailError,
    SchemaError,
)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_INFRA = 0, 1, 2, 3

ENV = {"url": "SAIL_REASONER_URL", "api_key": "SAIL_REASONER_API_KEY", "model": "SAIL_REASONER_MODEL"}

DEFAULTS: dict[str, dict[str, Any]] = {
    "migrate": {"planner": "sail", "reasoner": "heuristic", "max_steps": 25, "tau": 0.4,
                "theta_skill": 0.2, "theta_done": 0.5},
    "bench": {"planners": "sail,matcher", "reasoners": "heuristic", "jobs": 1, "max_steps": 25,
              "tau": 0.4, "theta_skill": 0.2, "theta_done": 0.5},
    "match-eval": {"scorer": "lexical", "reasoner": "heuristic"},
    "parse": {"events": False},
}
REQUIRED = {
    "migrate": ("source", "app", "out"),
    "bench": ("suite", "out"),
    "match-eval": ("dataset", "out"),
    "parse": ("dump",),
}


class UsageError(ConfigError):
    pass


SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


def _reasoner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--url", help="chat-completion base URL for the remote reasoner")
    p.add_argument("--model", help="model name for the remote reasoner")
    p.add_argument("--api-key", dest="api_key", help="bearer token for the remote reasoner")


def _planner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", dest="max_steps", type=int, help="event budget per migration")
    p.add_argument("--tau", type=float, help="similarity threshold of the matcher baseline")
    p.add_argument("--theta-skill", dest="theta_skill", type=float,
                   help="minimum relevance for the heuristic to retrieve a skill")
    p.add_argument("--theta-done", dest="theta_done", type=float,
                   help="score at which the heuristic counts a step as done")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sail", description="Skill-adaptive UI test migration.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    m = sub.add_parser("migrate", help="migrate one source test onto a simulated app")
    m.add_argument("--source", help="source test case (JSON)")
    m.add_argument("--app", help="target app document (JSON)")
    m.add_argument("--planner", choices=("sail", "trace", "target", "matcher"))
    m.add_argument("--reasoner", choices=("heuristic", "replay", "remote"))
    m.add_argument("--out", help="report directory")
    m.add_argument("--transcript", help="recorded transcript for the replay reasoner")
    m.add_argument("--hierarchy", help="goal/skill decomposition (defaults to <source>.hierarchy.json)")
    _planner_flags(m)
    _reasoner_flags(m)

    b = sub.add_parser("bench", help="run a suite of migration pairs")
    b.add_argument("--suite", help="suite manifest (JSON)")
    b.add_argument("--planners", help="comma-separated planner names")
    b.add_argument("--reasoners", help="comma-separated reasoner names")
    b.add_argument("--out", help="report directory")
    b.add_argument("--jobs", type=int)
    _planner_flags(b)
    _reasoner_flags(b)

    e = sub.add_parser("match-eval", help="score event matching on a query dataset")
    e.add_argument("--dataset", help="match dataset (JSON)")
    e.add_argument("--scorer", choices=("lexical", "reasoner"))
    e.add_argument("--reasoner", choices=("heuristic", "replay", "remote"))
    e.add_argument("--transcript", help="recorded transcript for the replay reasoner")
    e.add_argument("--out", help="report directory")
    _reasoner_flags(e)

    d = sub.add_parser("parse", help="parse a hierarchy dump")
    d.add_argument("--dump", help="hierarchy XML file")
    d.add_argument("--events", action="store_true", default=None,
                   help="list extracted events as prompts number them")

    for name, p in (("migrate", m), ("bench", b), ("match-eval", e), ("parse", d)):
        p.add_argument("--config", help="TOML file with defaults for these flags")
        SUBPARSERS[name] = p
    return parser


def _read_config(path: str | None, command: str) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None
    # a [command] table overrides top-level keys
    section = data.get(command, {})
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    if isinstance(section, dict):
        merged.update(section)
    return {k.replace("-", "_"): v for k, v in merged.items()}


def resolve_settings(args: argparse.Namespace, environ=os.environ) -> dict:
    """Merge flags > environment > config file > defaults."""
    command = args.command
    settings = dict(DEFAULTS[command])
    file_values = _read_config(args.config, command)
    known = set(vars(args)) - {"command", "config"}
    unknown = set(file_values) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in config: {', '.join(sorted(unknown))}")
    settings.update(file_values)
    for key, var in ENV.items():
        if key in known and environ.get(var):
            settings[key] = environ[var]
    for key in known:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    missing = [k for k in REQUIRED[command] if not settings.get(k)]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return settings


def _planner_config(s: dict):
    from .planner import PlannerConfig

    try:
        return PlannerConfig(max_steps=int(s["max_steps"]), tau=float(s["tau"]),
                             theta_skill=float(s["theta_skill"]), theta_done=float(s["theta_done"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _reasoner(s: dict, name: str):
    from .reasoner import make_reasoner

    return make_reasoner(name, transcript=s.get("transcript"), url=s.get("url"), model=s.get("model"),
                         api_key=s.get("api_key"), skill_threshold=float(s.get("theta_skill", 0.2)),
                         done_threshold=float(s.get("theta_done", 0.5)))


def _path(value: str, what: str) -> Path:
    p = Path(value)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {value}")
    return p


def cmd_migrate(s: dict) -> int:
    from .planner import ERROR, GOAL_REACHED, migrate
    from .sim import load_app_file, reset
    from .testcase import hierarchy_path_for, load_hierarchy, load_test_case

    source_path = _path(s["source"], "source test")
    source = load_test_case(source_path)
    app = load_app_file(_path(s["app"], "app document"))
    hierarchy = None
    side = Path(s["hierarchy"]) if s.get("hierarchy") else hierarchy_path_for(source_path)
    if s.get("hierarchy") or side.exists():
        hierarchy = load_hierarchy(_path(str(side), "hierarchy"), source)
    cfg = _planner_config(s)
    if s.get("transcript") and s["reasoner"] != "replay":
        raise ConfigError("--transcript only applies to --reasoner replay")
    reasoner = None if s["planner"] == "matcher" else _reasoner(s, s["reasoner"])
    session = reset(app)
    trace = migrate(s["planner"], source, session, reasoner, cfg, hierarchy=hierarchy)
    trace.save_report_dir(s["out"])
    sys.stdout.write(trace.summary())
    if trace.outcome == GOAL_REACHED:
        return EXIT_OK
    if trace.outcome == ERROR:
        return EXIT_INFRA
    return EXIT_FAILED


def _names(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def cmd_bench(s: dict) -> int:
    from .bench import run_suite

    suite = _path(s["suite"], "suite manifest")
    jobs = int(s["jobs"])
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    report = run_suite(suite, _names(s["planners"]), _names(s["reasoners"]), _planner_config(s), jobs=jobs,
                       reasoner_options={k: s[k] for k in ("url", "model", "api_key") if s.get(k)})
    report.write(s["out"])
    sys.stdout.write(report.to_markdown().split("\n\n")[0] + "\n")
    return EXIT_OK


def cmd_match_eval(s: dict) -> int:
    from .matcher import evaluate_picks, evaluate_ranking, load_match_dataset

    queries = load_match_dataset(_path(s["dataset"], "dataset"))
    if s["scorer"] == "lexical":
        report = evaluate_ranking(queries)
    else:
        reasoner = _reasoner(s, s["reasoner"])
        report = evaluate_picks(queries, reasoner)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_doc(), indent=2) + "\n", encoding="utf-8")
    lines = ["| query | source | best candidate | score | rank of truth |", "|---|---|---|---|---|"]
    for row in report.rows:
        score = "" if row["score"] is None else f"{row['score']:.3f}"
        rank = "-" if row["rank"] is None else str(row["rank"])
        lines.append(f"| {row['query']} | {row['source']} | {row['best']} | {score} | {rank} |")
    (out / "breakdown.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    sys.stdout.write(json.dumps(report.to_doc()) + "\n")
    return EXIT_OK


def cmd_parse(s: dict) -> int:
    from .reasoner import event_block
    from .ui_model import describe_event, extract_events, parse_hierarchy

    path = _path(s["dump"], "dump")
    screen = parse_hierarchy(path.read_text(encoding="utf-8"))
    events = extract_events(screen)
    print(f"activity: {screen.activity}")
    print(f"elements: {len(screen.elements)}")
    print(f"interactable: {sum(1 for e in screen.elements if e.interactable)}")
    print(f"digest: {screen.raw_digest}")
    if s.get("events"):
        print(event_block([describe_event(e, screen) for e in events]))
    return EXIT_OK


COMMANDS = {"migrate": cmd_migrate, "bench": cmd_bench, "match-eval": cmd_match_eval, "parse": cmd_parse}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)   # argparse itself exits 2 on bad usage
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](settings)
    except UsageError as exc:
        sys.stderr.write(SUBPARSERS[args.command].format_usage())
        sys.stderr.write(f"sail {args.command}: error: {exc}\n")
        return EXIT_CONFIG
    except (ConfigError, SchemaError, MalformedDump, PartitionError, EmptySuite, EmptyQuerySet) as exc:
        sys.stderr.write(f"sail {args.command}: error: {exc}\n")
        return EXIT_CONFIG
    except (ReasonerError, SailError) as exc:
        sys.stderr.write(f"sail {args.command}: infrastructure error: {type(exc).__name__}: {exc}\n")
        return EXIT_INFRA
    except OSError as exc:
        sys.stderr.write(f"sail {args.command}: I/O error: {exc}\n")
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
