"""Functional oracles, Success Rate, precision/recall, and the suite runner."""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from ._docs import check_keys, expect, read_doc
from .errors import ConfigError, EmptySuite, OracleMismatch, SailError, SchemaError
from .planner import (
    BUDGET_EXHAUSTED, ERROR, PLANNERS, Classification, MigrationTrace, PerformedEvent, PlannerConfig,
    TruthEvent, classify_trace, migrate,
)
from .reasoner import make_reasoner
from .sim import SimApp, load_app, reset
from .testcase import hierarchy_path_for, load_hierarchy, load_test_case
from .text import parse_description
from .ui_model import Action, Bounds, center_in_bounds

CHECK_KINDS = ("state_equals", "visited_screen", "final_screen", "event_performed", "ordered", "max_events")
MAPPINGS = ("1to1", "non1to1")
TAXONOMY = ("extra", "missing", "reversed", "plain")


# ------------------------------------------------------------------ oracles

@dataclass(frozen=True)
class EventPattern:
    """Matches performed events by action, label regex, typed-value regex, or location."""

    action: Action | None = None
    label: str | None = None
    value: str | None = None
    bounds: Bounds | None = None

    def matches(self, e: PerformedEvent) -> bool:
        if self.action is not None and e.event.action is not self.action:
            return False
        if self.label is not None:
            got = parse_description(e.description).label
            if got is None or not re.fullmatch(self.label, got):
                return False
        if self.value is not None and not re.fullmatch(self.value, e.event.value or ""):
            return False
        if self.bounds is not None and (e.bounds is None or not center_in_bounds(e.bounds, self.bounds)):
            return False
        return True

    def __str__(self) -> str:
        parts = [self.action.value if self.action else "any"]
        if self.label is not None:
            parts.append(f"label={self.label!r}")
        if self.value is not None:
            parts.append(f"value={self.value!r}")
        if self.bounds is not None:
            parts.append(f"at {self.bounds}")
        return " ".join(parts)


def _first(trace: MigrationTrace, pattern: EventPattern) -> int | None:
    return next((i for i, e in enumerate(trace.events) if pattern.matches(e)), None)


@dataclass(frozen=True)
class OracleCheck:
    kind: str
    var: str | None = None
    value: Any = None
    screen: str | None = None
    event: EventPattern | None = None
    before: EventPattern | None = None
    after: EventPattern | None = None
    n: int | None = None

    def holds(self, trace: MigrationTrace, final_state: dict) -> bool:
        if self.kind == "state_equals":
            variables = final_state.get("variables", {})
            return self.var in variables and variables[self.var] == self.value \
                and type(variables[self.var]) is type(self.value)
        if self.kind == "visited_screen":
            return self.screen in trace.screens
        if self.kind == "final_screen":
            final = final_state.get("screen", trace.screens[-1] if trace.screens else None)
            return final == self.screen
        if self.kind == "event_performed":
            return _first(trace, self.event) is not None
        if self.kind == "ordered":
            a, b = _first(trace, self.before), _first(trace, self.after)
            return a is not None and b is not None and a < b
        return len(trace.events) <= self.n

    def __str__(self) -> str:
        if self.kind == "state_equals":
            return f"state_equals({self.var}, {self.value!r})"
        if self.kind in ("visited_screen", "final_screen"):
            return f"{self.kind}({self.screen})"
        if self.kind == "event_performed":
            return f"event_performed({self.event})"
        if self.kind == "ordered":
            return f"ordered({self.before} before {self.after})"
        return f"max_events({self.n})"


@dataclass(frozen=True)
class Oracle:
    test_id: str
    checks: tuple[OracleCheck, ...]
    truth_events: tuple[TruthEvent, ...] = ()

    def __post_init__(self):
        if not self.checks:
            raise SchemaError("checks", "an oracle needs at least one check")

    def validate(self, app: SimApp) -> None:
        for c in self.checks:
            if c.var is not None and c.var not in app.variables:
                raise OracleMismatch(f"{c}: app {app.id!r} has no variable {c.var!r}")
            if c.screen is not None and c.screen not in app.screens:
                raise OracleMismatch(f"{c}: app {app.id!r} has no screen {c.screen!r}")


def _pattern(obj: Any, path: str) -> EventPattern:
    check_keys(obj, path, (), ("action", "label", "value", "bounds"))
    try:
        action = Action(obj["action"]) if "action" in obj else None
        for key in ("label", "value"):
            if key in obj:
                re.compile(expect(obj[key], str, f"{path}.{key}", "a regex string"))
        bounds = Bounds.parse(obj["bounds"]) if "bounds" in obj else None
    except (ValueError, re.error) as exc:
        raise SchemaError(path, str(exc)) from None
    return EventPattern(action, obj.get("label"), obj.get("value"), bounds)


def _check(obj: Any, path: str) -> OracleCheck:
    kind = check_keys(obj, path, ("kind",), ("var", "value", "screen", "event", "before", "after", "n"))["kind"]
    needs = {
        "state_equals": ("var", "value"), "visited_screen": ("screen",), "final_screen": ("screen",),
        "event_performed": ("event",), "ordered": ("before", "after"), "max_events": ("n",),
    }
    if kind not in needs:
        raise SchemaError(f"{path}.kind", f"unknown check {kind!r}; expected one of {', '.join(CHECK_KINDS)}")
    check_keys(obj, path, ("kind", *needs[kind]))
    if kind == "state_equals":
        expect(obj["var"], str, f"{path}.var", "a string")
        expect(obj["value"], (str, int, bool), f"{path}.value", "a string, integer or boolean")
        return OracleCheck(kind, var=obj["var"], value=obj["value"])
    if kind in ("visited_screen", "final_screen"):
        return OracleCheck(kind, screen=expect(obj["screen"], str, f"{path}.screen", "a screen id"))
    if kind == "event_performed":
        return OracleCheck(kind, event=_pattern(obj["event"], f"{path}.event"))
    if kind == "ordered":
        return OracleCheck(kind, before=_pattern(obj["before"], f"{path}.before"),
                           after=_pattern(obj["after"], f"{path}.after"))
    n = expect(obj["n"], int, f"{path}.n", "an integer")
    if n < 0:
        raise SchemaError(f"{path}.n", "must be non-negative")
    return OracleCheck(kind, n=n)


def load_oracle(doc: Any) -> Oracle:
    obj = read_doc(doc)
    check_keys(obj, "$", ("test_id", "checks"), ("truth_events",))
    checks = expect(obj["checks"], list, "$.checks", "an array")
    if not checks:
        raise SchemaError("$.checks", "an oracle needs at least one check")
    truth = []
    for i, t in enumerate(expect(obj.get("truth_events", []), list, "$.truth_events", "an array")):
        path = f"$.truth_events[{i}]"
        check_keys(t, path, ("action",), ("bounds",))
        try:
            truth.append(TruthEvent(Action(t["action"]), Bounds.parse(t["bounds"]) if "bounds" in t else None))
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from None
    return Oracle(expect(obj["test_id"], str, "$.test_id", "a string"),
                  tuple(_check(c, f"$.checks[{i}]") for i, c in enumerate(checks)), tuple(truth))


@dataclass(frozen=True)
class Verdict:
    passed: bool
    failed_check: str | None = None

    def __str__(self) -> str:
        return "pass" if self.passed else f"fail({self.failed_check})"


def judge(oracle: Oracle, trace: MigrationTrace, final_state: dict | None = None,
          app: SimApp | None = None) -> Verdict:
    """Pass iff the trace finished normally and every check holds.

    Budget exhaustion and infrastructure errors fail outright. With ``app``,
    the oracle is first checked against the app's variables and screens.
    """
    if app is not None:
        oracle.validate(app)
    if trace.outcome in (BUDGET_EXHAUSTED, ERROR):
        return Verdict(False, f"outcome {trace.outcome}")
    state = trace.final_state if final_state is None else final_state
    for check in oracle.checks:
        if not check.holds(trace, state):
            return Verdict(False, str(check))
    return Verdict(True)


def success_rate(verdicts: Iterable[Verdict | bool]) -> float:
    flags = [v.passed if isinstance(v, Verdict) else bool(v) for v in verdicts]
    if not flags:
        raise EmptySuite("no verdicts")
    return sum(flags) / len(flags)


def precision_recall(counts: Classification | tuple[int, int, int]) -> tuple[float, float, float]:
    """(precision, recall, F1) from TP/FP/FN counts; any 0/0 is taken as 0."""
    tp, fp, fn = (counts.tp, counts.fp, counts.fn) if isinstance(counts, Classification) else counts
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


# -------------------------------------------------------------------- suites

@dataclass(frozen=True)
class SuitePair:
    id: str
    source_test: Path
    target_app: Path
    oracle: Path
    mapping: str
    taxonomy: str


def load_suite(manifest: str | Path) -> list[SuitePair]:
    manifest = Path(manifest)
    try:
        obj = read_doc(manifest)
    except OSError as exc:
        raise ConfigError(f"cannot read suite manifest: {exc}") from None
    check_keys(obj, "$", ("pairs",))
    pairs = []
    for i, p in enumerate(expect(obj["pairs"], list, "$.pairs", "an array")):
        path = f"$.pairs[{i}]"
        check_keys(p, path, ("source_test", "target_app", "oracle", "mapping", "taxonomy"), ("id",))
        if p["mapping"] not in MAPPINGS:
            raise SchemaError(f"{path}.mapping", f"expected one of {MAPPINGS}")
        if p["taxonomy"] not in TAXONOMY:
            raise SchemaError(f"{path}.taxonomy", f"expected one of {TAXONOMY}")
        files = {k: (manifest.parent / expect(p[k], str, f"{path}.{k}", "a path")).resolve()
                 for k in ("source_test", "target_app", "oracle")}
        pid = p.get("id") or f"{files['source_test'].stem}->{files['target_app'].stem}"
        pairs.append(SuitePair(pid, files["source_test"], files["target_app"], files["oracle"],
                               p["mapping"], p["taxonomy"]))
    if not pairs:
        raise EmptySuite(f"{manifest} lists no pairs")
    ids = [p.id for p in pairs]
    if len(set(ids)) != len(ids):
        raise SchemaError("$.pairs", "pair ids must be unique")
    return pairs


def approach_name(planner: str, reasoner: str | None) -> str:
    return "matcher" if planner == "matcher" else f"{planner}/{reasoner}"


@dataclass
class PairResult:
    approach: str
    pair: SuitePair
    outcome: str
    verdict: Verdict
    events: int
    detail: str | None = None
    prf: tuple[float, float, float] | None = None
    trace: MigrationTrace | None = field(default=None, repr=False, compare=False)

    def to_doc(self) -> dict:
        doc = {"approach": self.approach, "pair": self.pair.id, "mapping": self.pair.mapping,
               "taxonomy": self.pair.taxonomy, "outcome": self.outcome, "passed": self.verdict.passed,
               "failed_check": self.verdict.failed_check, "events": self.events, "detail": self.detail}
        if self.prf is not None:
            doc["precision"], doc["recall"], doc["f1"] = (round(x, 6) for x in self.prf)
        return doc


def run_pair(pair: SuitePair, planner: str, reasoner_name: str | None, cfg: PlannerConfig,
             reasoner_factory: Callable[[str], Any]) -> PairResult:
    approach = approach_name(planner, reasoner_name)
    try:
        app = load_app(pair.target_app)
        source = load_test_case(pair.source_test)
        oracle = load_oracle(pair.oracle)
        oracle.validate(app)
        side = hierarchy_path_for(pair.source_test)
        hierarchy = load_hierarchy(side, source) if side.exists() else None
        reasoner = reasoner_factory(reasoner_name) if planner != "matcher" else None
        session = reset(app)
        trace = migrate(planner, source, session, reasoner, cfg, hierarchy=hierarchy)
        verdict = judge(oracle, trace, session.snapshot())
        prf = precision_recall(classify_trace(trace, oracle.truth_events)) if oracle.truth_events else None
        return PairResult(approach, pair, trace.outcome, verdict, len(trace.events), trace.detail, prf, trace)
    except (SailError, OSError) as exc:
        detail = f"{type(exc).__name__}: {exc}"
        return PairResult(approach, pair, ERROR, Verdict(False, "setup"), 0, detail)


def _sr(rows: Sequence[PairResult]) -> float | None:
    return success_rate(r.verdict for r in rows) if rows else None


@dataclass
class SuiteReport:
    results: list[PairResult]
    approaches: list[str]

    def rows_for(self, approach: str, mapping: str | None = None) -> list[PairResult]:
        return [r for r in self.results if r.approach == approach
                and (mapping is None or r.pair.mapping == mapping)]

    def sr(self, approach: str, mapping: str | None = None) -> float | None:
        return _sr(self.rows_for(approach, mapping))

    def summary(self) -> list[dict]:
        out = []
        for a in self.approaches:
            fails = {"extra": 0, "missing": 0, "reversed": 0, "other": 0}
            for r in self.rows_for(a):
                if not r.verdict.passed:
                    fails[r.pair.taxonomy if r.pair.taxonomy in fails else "other"] += 1
            out.append({"approach": a, "pairs": len(self.rows_for(a)), "overall_sr": self.sr(a),
                        "one_to_one_sr": self.sr(a, "1to1"), "non_one_to_one_sr": self.sr(a, "non1to1"),
                        "failures_by_taxonomy": fails})
        return out

    def to_doc(self) -> dict:
        return {"summary": self.summary(), "rows": [r.to_doc() for r in self.results]}

    def to_markdown(self) -> str:
        def pct(x):
            return "n/a" if x is None else f"{100 * x:.1f}"

        lines = ["| approach | overall SR | 1-to-1 SR | non-1-to-1 SR |", "|---|---|---|---|"]
        for s in self.summary():
            lines.append(f"| {s['approach']} | {pct(s['overall_sr'])} | {pct(s['one_to_one_sr'])} "
                         f"| {pct(s['non_one_to_one_sr'])} |")
        lines += ["", "| approach | pair | mapping | taxonomy | outcome | verdict |", "|---|---|---|---|---|---|"]
        for r in self.results:
            lines.append(f"| {r.approach} | {r.pair.id} | {r.pair.mapping} | {r.pair.taxonomy} "
                         f"| {r.outcome} | {r.verdict} |")
        return "\n".join(lines) + "\n"

    def write(self, out: str | Path, traces: bool = True) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.to_doc(), indent=2) + "\n", encoding="utf-8")
        (out / "report.md").write_text(self.to_markdown(), encoding="utf-8")
        if traces:
            for r in self.results:
                if r.trace is not None:
                    safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", f"{r.approach}__{r.pair.id}")
                    r.trace.save_report_dir(out / "traces" / safe)
        return out


def run_suite(manifest: str | Path, planners: Sequence[str], reasoners: Sequence[str],
              cfg: PlannerConfig | None = None, *, jobs: int = 1,
              reasoner_options: dict | None = None) -> SuiteReport:
    """Run every (planner, reasoner, pair) combination and collect verdicts.

    Configuration problems (unknown planner or reasoner, replay requested,
    unreadable manifest) raise before any migration runs. Results are ordered
    by planner, reasoner and manifest position whatever ``jobs`` is.
    """
    cfg = cfg or PlannerConfig()
    for p in planners:
        if p not in PLANNERS:
            raise ConfigError(f"unknown planner {p!r}; choose from {', '.join(PLANNERS)}")
    for r in reasoners:
        if r == "replay":
            raise ConfigError("the replay reasoner has no per-pair transcripts; use it with migrate")
        if r not in ("heuristic", "remote"):
            raise ConfigError(f"unknown reasoner {r!r}")
    if not planners:
        raise ConfigError("no planners given")
    if any(p != "matcher" for p in planners) and not reasoners:
        raise ConfigError("no reasoners given")
    pairs = load_suite(manifest)
    opts = dict(reasoner_options or {})
    opts.setdefault("skill_threshold", cfg.theta_skill)
    opts.setdefault("done_threshold", cfg.theta_done)

    def factory(name):
        return make_reasoner(name, **opts)

    combos, approaches = [], []
    for p in planners:
        for r in ([None] if p == "matcher" else reasoners):
            name = approach_name(p, r)
            if name in approaches:
                continue
            approaches.append(name)
            combos += [(pair, p, r) for pair in pairs]
    if jobs <= 1:
        results = [run_pair(pair, p, r, cfg, factory) for pair, p, r in combos]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: run_pair(c[0], c[1], c[2], cfg, factory), combos))
    return SuiteReport(results, approaches)
