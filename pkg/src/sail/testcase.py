"""Source test cases and their goal / skill / event decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ._docs import check_keys, dumps_canonical, expect, read_doc
from .errors import PartitionError, SchemaError
from .ui_model import DIRECTIONS, Action, ElementRef, UiEvent, describe_event

_TARGET_KEYS = ("resource_id", "text", "content_desc", "class_role", "index")


@dataclass(frozen=True)
class TestStep:
    __test__ = False  # keep pytest from collecting this

    event: UiEvent
    screen_hint: str | None = None
    note: str | None = None

    @property
    def description(self) -> str:
        return describe_event(self.event)


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    id: str
    source_app: str
    steps: tuple[TestStep, ...]
    oracle: str | None = None

    def __post_init__(self):
        if not self.steps:
            raise SchemaError("steps", "a test case needs at least one step")

    def descriptions(self) -> list[str]:
        return [s.description for s in self.steps]


@dataclass(frozen=True)
class Skill:
    name: str
    description: str
    step_range: tuple[int, int]

    @property
    def lo(self) -> int:
        return self.step_range[0]

    @property
    def hi(self) -> int:
        return self.step_range[1]


@dataclass(frozen=True)
class HierarchicalTestCase:
    goal: str
    skills: tuple[Skill, ...]
    base: TestCase = field(repr=False)


def _load_target(obj: Any, path: str) -> ElementRef:
    check_keys(obj, path, (), _TARGET_KEYS)
    for key in _TARGET_KEYS[:-1]:
        if key in obj:
            expect(obj[key], str, f"{path}.{key}", "a string")
    if "index" in obj:
        expect(obj["index"], int, f"{path}.index", "an integer")
    try:
        return ElementRef(**obj)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def _load_step(obj: Any, path: str) -> TestStep:
    check_keys(obj, path, ("action",), ("target", "value", "direction", "note"))
    action = obj["action"]
    if action not in {a.value for a in Action}:
        raise SchemaError(f"{path}.action", f"unknown action {action!r}")
    target = _load_target(obj["target"], f"{path}.target") if "target" in obj else None
    value = obj.get("value")
    if value is not None:
        expect(value, str, f"{path}.value", "a string")
    direction = obj.get("direction")
    if direction is not None and direction not in DIRECTIONS:
        raise SchemaError(f"{path}.direction", f"expected one of {DIRECTIONS}")
    if action == "input" and value is None:
        raise SchemaError(f"{path}.value", "input steps need a value")
    note = obj.get("note")
    if note is not None:
        expect(note, str, f"{path}.note", "a string")
    try:
        event = UiEvent(Action(action), target, value, direction)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None
    return TestStep(event, note=note)


def load_test_case(doc: Any) -> TestCase:
    """Build a :class:`TestCase` from JSON text, a path, or a parsed dict.

    Unknown and duplicate fields are rejected with a :class:`SchemaError`
    naming the offending path.
    """
    obj = read_doc(doc)
    check_keys(obj, "$", ("id", "source_app", "steps"), ("oracle",))
    expect(obj["id"], str, "$.id", "a string")
    expect(obj["source_app"], str, "$.source_app", "a string")
    steps = expect(obj["steps"], list, "$.steps", "an array")
    if not steps:
        raise SchemaError("steps", "a test case needs at least one step")
    oracle = obj.get("oracle")
    if oracle is not None:
        expect(oracle, str, "$.oracle", "a string")
    return TestCase(
        obj["id"], obj["source_app"],
        tuple(_load_step(s, f"$.steps[{i}]") for i, s in enumerate(steps)),
        oracle,
    )


def test_case_to_doc(tc: TestCase) -> dict:
    steps = []
    for step in tc.steps:
        doc = step.event.to_doc()
        if step.note is not None:
            doc["note"] = step.note
        steps.append(doc)
    out: dict = {"id": tc.id, "source_app": tc.source_app, "steps": steps}
    if tc.oracle is not None:
        out["oracle"] = tc.oracle
    return out


def save_test_case(tc: TestCase) -> str:
    return dumps_canonical(test_case_to_doc(tc))


def build_hierarchy(tc: TestCase, goal: str, skills: list[Skill]) -> HierarchicalTestCase:
    """Check that ``skills`` partition the steps in order, then build the tree."""
    if not goal or not goal.strip():
        raise SchemaError("goal", "goal must be non-empty")
    if not skills:
        raise PartitionError("gap", 0)
    n = len(tc.steps)
    expected = 0
    for skill in skills:
        lo, hi = skill.step_range
        if lo < 0 or hi > n or lo >= hi:
            raise PartitionError("out-of-range", lo if (lo < 0 or lo >= hi) else hi, skill.name)
        if lo > expected:
            raise PartitionError("gap", expected, skill.name)
        if lo < expected:
            raise PartitionError("overlap", lo, skill.name)
        expected = hi
    if expected < n:
        raise PartitionError("gap", expected)
    return HierarchicalTestCase(goal, tuple(skills), tc)


def skill_events(h: HierarchicalTestCase, s: Skill) -> list[TestStep]:
    return list(h.base.steps[s.lo:s.hi])


def load_hierarchy(doc: Any, tc: TestCase) -> HierarchicalTestCase:
    obj = read_doc(doc)
    check_keys(obj, "$", ("goal", "skills"))
    expect(obj["goal"], str, "$.goal", "a string")
    skills = []
    for i, s in enumerate(expect(obj["skills"], list, "$.skills", "an array")):
        path = f"$.skills[{i}]"
        check_keys(s, path, ("name", "description", "range"))
        rng = s["range"]
        if (not isinstance(rng, list) or len(rng) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in rng)):
            raise SchemaError(f"{path}.range", "expected [lo, hi]")
        skills.append(Skill(expect(s["name"], str, f"{path}.name", "a string"),
                            expect(s["description"], str, f"{path}.description", "a string"),
                            (rng[0], rng[1])))
    return build_hierarchy(tc, obj["goal"], skills)


def hierarchy_to_doc(h: HierarchicalTestCase) -> dict:
    return {
        "goal": h.goal,
        "skills": [{"name": s.name, "description": s.description, "range": list(s.step_range)}
                   for s in h.skills],
    }


def save_hierarchy(h: HierarchicalTestCase) -> str:
    return dumps_canonical(hierarchy_to_doc(h))


def hierarchy_path_for(test_path: Path) -> Path:
    """Where a test case's persisted decomposition lives, if it has one."""
    return test_path.with_name(test_path.stem + ".hierarchy.json")
