"""Migration planners: the skill-adaptive loop, its two ablations, and the
sequential similarity-matching baseline, plus trace bookkeeping."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import SailError
from .matcher import lexical_similarity
from .reasoner import (
    DecisionContext, DecisionKind, DecisionRequest, HistoryItem, SkillView, Transcript,
)
from .testcase import HierarchicalTestCase, Skill, TestCase, build_hierarchy
from .ui_model import (
    Action, Bounds, UiEvent, UiScreen, center_in_bounds, describe_event, extract_events,
)

PLANNERS = ("sail", "trace", "target", "matcher")

GOAL_REACHED = "goal_reached"
BUDGET_EXHAUSTED = "budget_exhausted"
INCOMPLETE = "incomplete"     # matcher only: some source steps found no match
ERROR = "error"


@dataclass(frozen=True)
class PlannerConfig:
    max_steps: int = 25
    tau: float = 0.4
    theta_skill: float = 0.2
    theta_done: float = 0.5
    history_window: int = 10

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        for name in ("tau", "theta_skill", "theta_done"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.history_window < 1:
            raise ValueError("history_window must be at least 1")


class SkillDatabase:
    """Remaining and finished skills; a skill can be retired exactly once."""

    def __init__(self, skills: Sequence[Skill]):
        self.remaining: list[Skill] = list(skills)
        self.finished: list[Skill] = []

    def finish(self, skill: Skill) -> None:
        if skill not in self.remaining:
            raise ValueError(f"skill {skill.name!r} is not remaining")
        self.remaining.remove(skill)
        self.finished.append(skill)


@dataclass
class PerformedEvent:
    event: UiEvent
    description: str
    bounds: Bounds | None
    outcome: dict
    skill: str | None = None

    def to_doc(self) -> dict:
        doc = {"description": self.description, "event": self.event.to_doc(),
               "bounds": None if self.bounds is None else str(self.bounds),
               "outcome": self.outcome}
        if self.skill is not None:
            doc["skill"] = self.skill
        return doc


@dataclass
class MigrationTrace:
    test_id: str
    planner: str
    events: list[PerformedEvent] = field(default_factory=list)
    screens: list[str] = field(default_factory=list)     # screen ids, initial included
    digests: list[str] = field(default_factory=list)
    activities: list[str] = field(default_factory=list)
    goal: str | None = None
    skills: list[dict] = field(default_factory=list)
    skill_log: dict[str, list[int]] = field(default_factory=dict)
    finished_skills: list[str] = field(default_factory=list)
    skipped_steps: list[int] = field(default_factory=list)
    outcome: str = ERROR
    detail: str | None = None
    flags: list[str] = field(default_factory=list)
    final_state: dict = field(default_factory=dict)
    transcript: Transcript = field(default_factory=Transcript)

    @property
    def succeeded(self) -> bool:
        return self.outcome == GOAL_REACHED

    def descriptions(self) -> list[str]:
        return [e.description for e in self.events]

    def to_doc(self) -> dict:
        return {
            "test_id": self.test_id,
            "planner": self.planner,
            "outcome": self.outcome,
            "detail": self.detail,
            "flags": list(self.flags),
            "goal": self.goal,
            "skills": self.skills,
            "events": [e.to_doc() for e in self.events],
            "screens": list(self.screens),
            "digests": list(self.digests),
            "activities": list(self.activities),
            "skill_log": self.skill_log,
            "finished_skills": list(self.finished_skills),
            "skipped_steps": list(self.skipped_steps),
            "final_state": self.final_state,
        }

    def summary(self) -> str:
        lines = [f"test {self.test_id} via {self.planner}: {self.outcome}"
                 + (f" ({self.detail})" if self.detail else "")]
        if self.goal:
            lines.append(f"goal: {self.goal}")
        for i, e in enumerate(self.events, start=1):
            tag = f" [{e.skill}]" if e.skill else ""
            lines.append(f"{i:3d}. {e.description}{tag} -> {e.outcome.get('kind')}")
        if self.finished_skills:
            lines.append("skills finished: " + ", ".join(self.finished_skills))
        if self.skipped_steps:
            lines.append("source steps without a match: " + ", ".join(map(str, self.skipped_steps)))
        if self.flags:
            lines.append("flags: " + ", ".join(self.flags))
        return "\n".join(lines) + "\n"

    def save_report_dir(self, out: str | Path) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.json").write_text(json.dumps(self.to_doc(), indent=2, ensure_ascii=False) + "\n",
                                        encoding="utf-8")
        self.transcript.save(out / "transcript.jsonl")
        (out / "summary.txt").write_text(self.summary(), encoding="utf-8")
        return out


# ------------------------------------------------------------------ session

class _Run:
    """Shared plumbing for one migration: observation, decisions, actions."""

    def __init__(self, planner: str, source: TestCase, driver, reasoner, cfg: PlannerConfig,
                 enrich: Callable[[UiScreen], UiScreen] | None):
        self.source = source
        self.source_desc = tuple(source.descriptions())
        self.driver = driver
        self.reasoner = reasoner
        self.cfg = cfg
        self.enrich = enrich
        self.trace = MigrationTrace(source.id, planner)
        if reasoner is not None:
            self.trace.transcript = reasoner.transcript
        self.history: list[HistoryItem] = []
        self.screen: UiScreen | None = None
        self.events: list[UiEvent] = []
        self.descs: tuple[str, ...] = ()

    @property
    def spent(self) -> bool:
        return len(self.trace.events) >= self.cfg.max_steps

    def observe(self) -> None:
        screen = self.driver.dump_hierarchy()
        if self.enrich is not None:
            screen = self.enrich(screen)
        self.screen = screen
        self.events = extract_events(screen)
        self.descs = tuple(describe_event(e, screen) for e in self.events)
        self.trace.screens.append(getattr(self.driver, "current_screen_id", screen.activity))
        self.trace.digests.append(screen.raw_digest)
        self.trace.activities.append(screen.activity)

    def ask(self, kind: DecisionKind, **context):
        context.setdefault("history", tuple(self.history))
        if self.screen is not None:
            context.setdefault("activity", self.screen.activity)
            context.setdefault("screen", self.screen.raw_digest)
        return self.reasoner.decide(DecisionRequest(kind, DecisionContext(**context))).value

    def bind(self, event: UiEvent, description: str, skill: SkillView | None,
             goal: str | None) -> UiEvent:
        if event.action is Action.INPUT and event.value is None:
            value = self.ask(DecisionKind.INPUT_TEXT, target=description, skill=skill,
                             goal=goal, source=self.source_desc)
            return UiEvent(event.action, event.target, value)
        if event.action is Action.SWIPE and event.direction is None:
            direction = self.ask(DecisionKind.SWIPE_DIRECTION, target=description, skill=skill,
                                 goal=goal, source=self.source_desc)
            return UiEvent(event.action, event.target, direction=direction)
        return event

    def perform(self, event: UiEvent, skill: str | None = None) -> None:
        screen = self.screen
        description = describe_event(event, screen)
        bounds = None
        if event.target is not None:
            bounds = screen.elements[screen.resolve(event.target)].bounds
        outcome = self.driver.perform(event)
        self.trace.events.append(PerformedEvent(event, description, bounds, outcome.to_doc(), skill))
        self.history.append(HistoryItem(description, screen.raw_digest, screen.activity, skill))
        if skill is not None:
            self.trace.skill_log.setdefault(skill, []).append(len(self.trace.events) - 1)
        self.observe()

    def finish(self, outcome: str, detail: str | None = None) -> MigrationTrace:
        self.trace.outcome = outcome
        self.trace.detail = detail
        if outcome == GOAL_REACHED and not self.trace.events:
            self.trace.flags.append("zero_event_success")
        snap = getattr(self.driver, "snapshot", None)
        if callable(snap):
            self.trace.final_state = snap()
        return self.trace


def _guarded(body):
    """Turn infrastructure failures into an ``error`` outcome on the trace."""

    def run(run_: _Run, *args) -> MigrationTrace:
        try:
            if run_.screen is None:
                run_.observe()
            return body(run_, *args)
        except SailError as exc:
            return run_.finish(ERROR, f"{type(exc).__name__}: {exc}")

    return run


def _skill_view(skill: Skill, source_desc: Sequence[str]) -> SkillView:
    return SkillView(skill.name, skill.description, tuple(source_desc[skill.lo:skill.hi]),
                     skill.lo, skill.hi)


@_guarded
def _sail_loop(run: _Run, hierarchy: HierarchicalTestCase | None) -> MigrationTrace:
    goal = run.ask(DecisionKind.CONCLUDE_GOAL, source=run.source_desc)
    run.trace.goal = goal
    authored = None
    if hierarchy is not None:
        authored = tuple(_skill_view(s, run.source_desc) for s in hierarchy.skills)
    parts = run.ask(DecisionKind.DIVIDE_SKILLS, source=run.source_desc, goal=goal, authored=authored)
    tree = build_hierarchy(run.source, goal, [Skill(p.name, p.description, (p.lo, p.hi)) for p in parts])
    db = SkillDatabase(tree.skills)
    run.trace.skills = [{"name": s.name, "description": s.description, "range": [s.lo, s.hi]}
                        for s in tree.skills]

    while True:
        remaining = tuple(_skill_view(s, run.source_desc) for s in db.remaining)
        if run.ask(DecisionKind.GOAL_FINISHED, goal=goal, skills=remaining):
            return run.finish(GOAL_REACHED)
        if run.spent:
            return run.finish(BUDGET_EXHAUSTED)
        k = run.ask(DecisionKind.RETRIEVE_SKILL, goal=goal, skills=remaining, events=run.descs)
        skill = db.remaining[k] if k is not None else None
        view = remaining[k] if k is not None else None
        # with no applicable skill, fall back to selecting against the goal alone
        i = run.ask(DecisionKind.SELECT_EVENT, goal=goal, skill=view, events=run.descs)
        event = run.bind(run.events[i], run.descs[i], view, goal)
        run.perform(event, skill.name if skill else None)
        if view is not None and run.ask(DecisionKind.SKILL_FINISHED, goal=goal, skill=view):
            db.finish(skill)
            run.trace.finished_skills.append(skill.name)


def migrate_sail(source: TestCase, driver, reasoner, cfg: PlannerConfig | None = None, *,
                 hierarchy: HierarchicalTestCase | None = None,
                 enrich: Callable[[UiScreen], UiScreen] | None = None) -> MigrationTrace:
    """Skill-adaptive migration of ``source`` onto the app behind ``driver``.

    Concludes a goal, divides the source into skills (guided by ``hierarchy``
    when one was authored), then repeatedly retrieves the skill that the
    current screen can advance, selects an event for it, performs it, and
    retires the skill once the reasoner judges it finished. Stops when the
    reasoner reports the goal reached or after ``cfg.max_steps`` events.
    """
    return _sail_loop(_Run("sail", source, driver, reasoner, cfg or PlannerConfig(), enrich), hierarchy)


@_guarded
def _trace_loop(run: _Run) -> MigrationTrace:
    while True:
        if run.ask(DecisionKind.GOAL_FINISHED, source=run.source_desc, events=run.descs):
            return run.finish(GOAL_REACHED)
        if run.spent:
            return run.finish(BUDGET_EXHAUSTED)
        i = run.ask(DecisionKind.SELECT_EVENT, source=run.source_desc, events=run.descs)
        run.perform(run.bind(run.events[i], run.descs[i], None, None))


def migrate_trace_ablation(source: TestCase, driver, reasoner, cfg: PlannerConfig | None = None, *,
                           enrich=None) -> MigrationTrace:
    """Select events against the whole source test, without goal or skills."""
    return _trace_loop(_Run("trace", source, driver, reasoner, cfg or PlannerConfig(), enrich))


@_guarded
def _target_loop(run: _Run) -> MigrationTrace:
    goal = run.ask(DecisionKind.CONCLUDE_GOAL, source=run.source_desc)
    run.trace.goal = goal
    while True:
        if run.ask(DecisionKind.GOAL_FINISHED, goal=goal, events=run.descs):
            return run.finish(GOAL_REACHED)
        if run.spent:
            return run.finish(BUDGET_EXHAUSTED)
        i = run.ask(DecisionKind.SELECT_EVENT, goal=goal, events=run.descs)
        run.perform(run.bind(run.events[i], run.descs[i], None, goal))


def migrate_target_ablation(source: TestCase, driver, reasoner, cfg: PlannerConfig | None = None, *,
                            enrich=None) -> MigrationTrace:
    """Conclude the goal, then select events against the goal alone."""
    return _target_loop(_Run("target", source, driver, reasoner, cfg or PlannerConfig(), enrich))


@_guarded
def _matcher_loop(run: _Run, scorer) -> MigrationTrace:
    for k, step in enumerate(run.source.steps):
        if run.spent:
            return run.finish(BUDGET_EXHAUSTED)
        wanted = run.source_desc[k]
        scores = [scorer(wanted, d) for d in run.descs]
        best = max(range(len(scores)), key=lambda i: (scores[i], -i))
        if scores[best] < run.cfg.tau:
            run.trace.skipped_steps.append(k)
            continue
        event = run.events[best]
        if event.action is Action.INPUT:
            event = UiEvent(event.action, event.target, step.event.value or "")
        elif event.action is Action.SWIPE:
            event = UiEvent(event.action, event.target, direction=step.event.direction or "up")
        run.perform(event)
    return run.finish(INCOMPLETE if run.trace.skipped_steps else GOAL_REACHED)


def migrate_matcher(source: TestCase, driver, scorer=lexical_similarity,
                    cfg: PlannerConfig | None = None, *, enrich=None) -> MigrationTrace:
    """Sequential baseline: map each source step to the most similar event
    on the current screen, or skip it when nothing reaches ``cfg.tau``.
    No exploration and no goal reasoning."""
    return _matcher_loop(_Run("matcher", source, driver, None, cfg or PlannerConfig(), enrich), scorer)


def migrate(planner: str, source: TestCase, driver, reasoner=None, cfg: PlannerConfig | None = None,
            *, hierarchy: HierarchicalTestCase | None = None, scorer=lexical_similarity,
            enrich=None) -> MigrationTrace:
    if planner == "sail":
        return migrate_sail(source, driver, reasoner, cfg, hierarchy=hierarchy, enrich=enrich)
    if planner == "trace":
        return migrate_trace_ablation(source, driver, reasoner, cfg, enrich=enrich)
    if planner == "target":
        return migrate_target_ablation(source, driver, reasoner, cfg, enrich=enrich)
    if planner == "matcher":
        return migrate_matcher(source, driver, scorer, cfg, enrich=enrich)
    raise ValueError(f"unknown planner {planner!r}; choose from {', '.join(PLANNERS)}")


def replay_steps(source: TestCase, driver, cfg: PlannerConfig | None = None) -> MigrationTrace:
    """Perform the source steps verbatim; useful to check a fixture is solvable."""
    run = _Run("script", source, driver, None, cfg or PlannerConfig(), None)
    run.observe()
    for step in source.steps:
        if run.spent:
            return run.finish(BUDGET_EXHAUSTED)
        event = step.event
        if event.target is not None and not run.screen.find(event.target):
            return run.finish(ERROR, f"step target not on screen: {step.description}")
        run.perform(event)
    return run.finish(GOAL_REACHED)


# ------------------------------------------------------------ classification

class StepClass(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    FN = "FN"


@dataclass(frozen=True)
class TruthEvent:
    action: Action
    bounds: Bounds | None = None


def classify_step(action: Action, bounds: Bounds | None, truth: TruthEvent) -> bool:
    """Whether one performed event matches one ground-truth event."""
    if Action(action) is not truth.action:
        return False
    if truth.bounds is None or bounds is None:
        return truth.bounds is None and bounds is None
    return center_in_bounds(bounds, truth.bounds)


@dataclass(frozen=True)
class Classification:
    performed: tuple[StepClass, ...]     # TP or FP per performed event
    missed: tuple[int, ...]              # indices of unmatched truth events (FN)

    @property
    def tp(self) -> int:
        return sum(1 for c in self.performed if c is StepClass.TP)

    @property
    def fp(self) -> int:
        return sum(1 for c in self.performed if c is StepClass.FP)

    @property
    def fn(self) -> int:
        return len(self.missed)


def classify_trace(trace: MigrationTrace, truth: Sequence[TruthEvent]) -> Classification:
    """Greedy one-to-one matching of performed events against ground truth in order."""
    used = [False] * len(truth)
    labels = []
    for e in trace.events:
        hit = next((j for j, t in enumerate(truth)
                    if not used[j] and classify_step(e.event.action, e.bounds, t)), None)
        if hit is None:
            labels.append(StepClass.FP)
        else:
            used[hit] = True
            labels.append(StepClass.TP)
    return Classification(tuple(labels), tuple(j for j, u in enumerate(used) if not u))
