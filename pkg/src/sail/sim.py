"""Declarative simulated apps and the driver sessions that run them.

An app is a set of screen templates, typed state variables and transition
rules. A session renders the current template with the variable valuation,
round-trips it through the dump dialect, and answers events by firing the one
rule that matches.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from ._docs import check_keys, expect, read_doc
from .errors import MalformedDump, NondeterministicApp, SchemaError
from .ui_model import (
    DIRECTIONS, Action, Bounds, ElementRef, UiElement, UiEvent, UiScreen, parse_hierarchy,
    serialize_hierarchy,
)

_PLACEHOLDER = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")
_GUARD_TERM = re.compile(
    r"""^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(==|!=)\s*("[^"]*"|'[^']*'|[^\s"'=!&|]+)\s*$""")

# which element flag an action needs
_NEEDS = {Action.CLICK: "clickable", Action.LONG_CLICK: "long_clickable",
          Action.INPUT: "editable", Action.SWIPE: "scrollable"}

Value = str | int | bool


@dataclass(frozen=True)
class GuardTerm:
    var: str
    op: str
    value: Value

    def holds(self, valuation: Mapping[str, Value]) -> bool:
        equal = valuation[self.var] == self.value
        return equal if self.op == "==" else not equal

    def __str__(self) -> str:
        return f"{self.var}{self.op}{_literal_text(self.value)}"


def _literal_text(v: Value) -> str:
    return json.dumps(v) if isinstance(v, bool) else str(v)


def _literal(text: str) -> Value:
    if text in ("true", "false"):
        return text == "true"
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    return text


def parse_guard(text: str) -> tuple[GuardTerm, ...]:
    terms = []
    for part in text.split("&&"):
        m = _GUARD_TERM.match(part)
        if not m:
            raise ValueError(f"bad guard term {part.strip()!r}")
        terms.append(GuardTerm(m[1], m[2], _literal(m[3])))
    return tuple(terms)


def guards_disjoint(a: tuple[GuardTerm, ...], b: tuple[GuardTerm, ...]) -> bool:
    """True when no valuation satisfies both conjunctions (decided per variable)."""
    for x in a:
        for y in b:
            if x.var != y.var:
                continue
            if x.op == "==" and y.op == "==" and x.value != y.value:
                return True
            if x.op != y.op and x.value == y.value:
                return True
    return False


@dataclass(frozen=True)
class EventMatcher:
    action: Action
    target: ElementRef | None = None
    value: str | None = None         # regex, full match against the typed text
    direction: str | None = None


@dataclass(frozen=True)
class TransitionRule:
    source: str
    on: EventMatcher
    to: str
    guard: tuple[GuardTerm, ...] = ()
    effects: tuple[tuple[str, Value], ...] = ()
    number: int = 0

    def describe(self) -> str:
        bits = [f"#{self.number} {self.source}->{self.to} on {self.on.action.value}"]
        if self.on.target is not None:
            bits.append(json.dumps(self.on.target.to_doc(), sort_keys=True))
        if self.guard:
            bits.append("if " + " && ".join(map(str, self.guard)))
        return " ".join(bits)


@dataclass(frozen=True)
class SimApp:
    id: str
    screens: Mapping[str, UiScreen]
    initial: str
    variables: Mapping[str, Value]
    transitions: tuple[TransitionRule, ...]
    parents: Mapping[str, str] = field(default_factory=dict)

    def rules_from(self, screen_id: str) -> list[TransitionRule]:
        return [r for r in self.transitions if r.source == screen_id]


@dataclass(frozen=True)
class TransitionOutcome:
    kind: str                 # transitioned | no_op | rejected
    to: str | None = None
    reason: str | None = None
    rule: int | None = None

    @classmethod
    def transitioned(cls, to: str, rule: int | None = None) -> "TransitionOutcome":
        return cls("transitioned", to=to, rule=rule)

    @classmethod
    def no_op(cls) -> "TransitionOutcome":
        return cls("no_op")

    @classmethod
    def rejected(cls, reason: str) -> "TransitionOutcome":
        return cls("rejected", reason=reason)

    def to_doc(self) -> dict:
        return {k: v for k, v in (("kind", self.kind), ("to", self.to), ("reason", self.reason))
                if v is not None}


# ----------------------------------------------------------------- rendering

def _substitute(text: str | None, valuation: Mapping[str, Value]) -> str | None:
    if text is None or "${" not in text:
        return text
    return _PLACEHOLDER.sub(lambda m: _literal_text(valuation[m[1]]), text)


def _has_placeholders(el: UiElement) -> bool:
    return any("${" in (n.text or "") or "${" in (n.content_desc or "") for n in el.iter())


def render_screen(template: UiScreen, valuation: Mapping[str, Value]) -> UiScreen:
    if not _has_placeholders(template.root):
        return template

    def visit(el: UiElement) -> UiElement:
        return replace(el, text=_substitute(el.text, valuation),
                       content_desc=_substitute(el.content_desc, valuation),
                       children=tuple(visit(c) for c in el.children))

    return UiScreen(template.activity, visit(template.root))


# ------------------------------------------------------------------- loading

_NODE_BOOLS = ("clickable", "long_clickable", "scrollable", "editable", "enabled")


def _inline_node(obj: Any, path: str) -> UiElement:
    check_keys(obj, path, ("bounds",), ("class", "resource_id", "text", "content_desc",
                                         "vision_desc", "children", *_NODE_BOOLS))
    try:
        bounds = Bounds.parse(expect(obj["bounds"], str, f"{path}.bounds", "a bounds string"))
    except ValueError as exc:
        raise SchemaError(f"{path}.bounds", str(exc)) from None
    kw = {}
    for key in ("resource_id", "text", "content_desc", "vision_desc"):
        if key in obj:
            kw[key] = expect(obj[key], str, f"{path}.{key}", "a string")
    for key in _NODE_BOOLS:
        if key in obj:
            kw[key] = expect(obj[key], bool, f"{path}.{key}", "a boolean")
    # authored trees are enabled unless they say otherwise
    kw.setdefault("enabled", True)
    kids = expect(obj.get("children", []), list, f"{path}.children", "an array")
    return UiElement(
        class_role=expect(obj.get("class", "android.view.View"), str, f"{path}.class", "a string"),
        bounds=bounds,
        children=tuple(_inline_node(c, f"{path}.children[{i}]") for i, c in enumerate(kids)),
        **kw,
    )


def _load_screen(sid: str, obj: Any, path: str) -> tuple[UiScreen, str | None]:
    if isinstance(obj, str):
        obj = {"xml": obj}
    check_keys(obj, path, (), ("xml", "root", "activity", "parent"))
    if ("xml" in obj) == ("root" in obj):
        raise SchemaError(path, "give exactly one of xml or root")
    parent = obj.get("parent")
    if parent is not None:
        expect(parent, str, f"{path}.parent", "a screen id")
    if "xml" in obj:
        try:
            screen = parse_hierarchy(expect(obj["xml"], str, f"{path}.xml", "a string"))
        except MalformedDump as exc:
            raise SchemaError(f"{path}.xml", str(exc)) from None
        if "activity" in obj:
            screen = UiScreen(expect(obj["activity"], str, f"{path}.activity", "a string"), screen.root)
    else:
        activity = expect(obj.get("activity", sid), str, f"{path}.activity", "a string")
        screen = UiScreen(activity, _inline_node(obj["root"], f"{path}.root"))
    return screen, parent


def _load_target(obj: Any, path: str) -> ElementRef:
    check_keys(obj, path, (), ("resource_id", "text", "content_desc", "class_role", "bounds", "index"))
    try:
        return ElementRef.from_doc(obj)
    except (ValueError, TypeError) as exc:
        raise SchemaError(path, str(exc)) from None


def _load_rule(obj: Any, n: int, app_vars: Mapping[str, Value]) -> TransitionRule:
    path = f"$.transitions[{n}]"
    check_keys(obj, path, ("from", "on", "to"), ("guard", "effects"))
    on = check_keys(obj["on"], f"{path}.on", ("action",), ("target", "value", "direction"))
    try:
        action = Action(on["action"])
    except ValueError:
        raise SchemaError(f"{path}.on.action", f"unknown action {on['action']!r}") from None
    target = _load_target(on["target"], f"{path}.on.target") if "target" in on else None
    if action in (Action.CLICK, Action.LONG_CLICK, Action.INPUT) and target is None:
        raise SchemaError(f"{path}.on.target", f"{action.value} rules need a target")
    if action is Action.BACK and target is not None:
        raise SchemaError(f"{path}.on.target", "back rules take no target")
    value = on.get("value")
    if value is not None:
        if action is not Action.INPUT:
            raise SchemaError(f"{path}.on.value", "only input rules match a value")
        try:
            re.compile(expect(value, str, f"{path}.on.value", "a regex string"))
        except re.error as exc:
            raise SchemaError(f"{path}.on.value", f"bad regex: {exc}") from None
    direction = on.get("direction")
    if direction is not None and (action is not Action.SWIPE or direction not in DIRECTIONS):
        raise SchemaError(f"{path}.on.direction", "direction applies to swipe rules: up/down/left/right")
    guard: tuple[GuardTerm, ...] = ()
    if "guard" in obj:
        try:
            guard = parse_guard(expect(obj["guard"], str, f"{path}.guard", "a string"))
        except ValueError as exc:
            raise SchemaError(f"{path}.guard", str(exc)) from None
        for term in guard:
            if term.var not in app_vars:
                raise SchemaError(f"{path}.guard", f"unknown variable {term.var!r}")
    effects = []
    for var, val in expect(obj.get("effects", {}), dict, f"{path}.effects", "an object").items():
        if var not in app_vars:
            raise SchemaError(f"{path}.effects.{var}", "unknown variable")
        expect(val, (str, int, bool), f"{path}.effects.{var}", "a string, integer or boolean")
        if type(val) is not type(app_vars[var]) and not isinstance(val, str):
            raise SchemaError(f"{path}.effects.{var}", "type differs from the declared variable")
        effects.append((var, val))
    return TransitionRule(
        expect(obj["from"], str, f"{path}.from", "a screen id"),
        EventMatcher(action, target, value, direction),
        expect(obj["to"], str, f"{path}.to", "a screen id"),
        guard, tuple(effects), n,
    )


def _overlap(app: SimApp, a: TransitionRule, b: TransitionRule) -> bool:
    if a.source != b.source or a.on.action != b.on.action:
        return False
    if guards_disjoint(a.guard, b.guard):
        return False
    if a.on.direction and b.on.direction and a.on.direction != b.on.direction:
        return False
    if a.on.value is not None and b.on.value is not None and a.on.value != b.on.value:
        return False  # distinct patterns are taken to be disjoint
    if a.on.target is None or b.on.target is None:
        return True
    screen = render_screen(app.screens[a.source], app.variables)
    return bool(set(screen.find(a.on.target)) & set(screen.find(b.on.target)))


def load_app(doc: Any) -> SimApp:
    """Validate an app document and build a :class:`SimApp`.

    Raises :class:`SchemaError` for structural problems (unknown screens,
    variables, unresolvable rule targets) and :class:`NondeterministicApp`
    when two rules could fire on the same event.
    """
    obj = read_doc(doc)
    check_keys(obj, "$", ("id", "initial", "screens"), ("variables", "transitions"))
    app_id = expect(obj["id"], str, "$.id", "a string")
    variables = dict(expect(obj.get("variables", {}), dict, "$.variables", "an object"))
    for name, val in variables.items():
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise SchemaError(f"$.variables.{name}", "bad variable name")
        expect(val, (str, int, bool), f"$.variables.{name}", "a string, integer or boolean")
    screens, parents = {}, {}
    raw_screens = expect(obj["screens"], dict, "$.screens", "an object")
    if not raw_screens:
        raise SchemaError("$.screens", "an app needs at least one screen")
    for sid, sdoc in raw_screens.items():
        screens[sid], parent = _load_screen(sid, sdoc, f"$.screens.{sid}")
        if parent is not None:
            parents[sid] = parent
        for el in screens[sid].root.iter():
            for text in (el.text, el.content_desc):
                for var in _PLACEHOLDER.findall(text or ""):
                    if var not in variables:
                        raise SchemaError(f"$.screens.{sid}", f"placeholder for unknown variable {var!r}")
    initial = expect(obj["initial"], str, "$.initial", "a screen id")
    if initial not in screens:
        raise SchemaError("$.initial", f"unknown screen {initial!r}")
    for sid, parent in parents.items():
        if parent not in screens:
            raise SchemaError(f"$.screens.{sid}.parent", f"unknown screen {parent!r}")
    rules = tuple(_load_rule(r, n, variables)
                  for n, r in enumerate(expect(obj.get("transitions", []), list,
                                                "$.transitions", "an array")))
    app = SimApp(app_id, screens, initial, variables, rules, parents)
    for r in rules:
        for end, key in ((r.source, "from"), (r.to, "to")):
            if end not in screens:
                raise SchemaError(f"$.transitions[{r.number}].{key}", f"unknown screen {end!r}")
        if r.on.target is not None:
            rendered = render_screen(screens[r.source], variables)
            if not rendered.find(r.on.target):
                raise SchemaError(f"$.transitions[{r.number}].on.target",
                                  f"matches nothing on screen {r.source!r}")
    for i, a in enumerate(rules):
        for b in rules[i + 1:]:
            if _overlap(app, a, b):
                raise NondeterministicApp(a.number, b.number, a.source)
    return app


def load_app_file(path: str | Path) -> SimApp:
    return load_app(Path(path))


# ------------------------------------------------------------------ sessions

class DriverSession:
    """One run of an app: current screen, valuation and interaction count."""

    def __init__(self, app: SimApp):
        self.app = app
        self.current_screen_id = app.initial
        self.valuation: dict[str, Value] = dict(app.variables)
        self.interactions = 0

    def dump_hierarchy(self) -> UiScreen:
        rendered = render_screen(self.app.screens[self.current_screen_id], self.valuation)
        return parse_hierarchy(serialize_hierarchy(rendered))

    def _rule_matches(self, rule: TransitionRule, event: UiEvent, screen: UiScreen,
                      target_index: int | None) -> bool:
        on = rule.on
        if on.action != event.action:
            return False
        if on.target is not None:
            if target_index is None or target_index not in screen.find(on.target):
                return False
        if on.value is not None and not re.fullmatch(on.value, event.value or ""):
            return False
        if on.direction is not None and on.direction != event.direction:
            return False
        return all(t.holds(self.valuation) for t in rule.guard)

    def _effect(self, value: Value, event: UiEvent) -> Value:
        if not isinstance(value, str):
            return value
        text = value.replace("${value}", event.value or "")
        return _PLACEHOLDER.sub(lambda m: _literal_text(self.valuation[m[1]]), text)

    def perform(self, event: UiEvent) -> TransitionOutcome:
        self.interactions += 1
        screen = self.dump_hierarchy()
        target_index = None
        if event.target is not None:
            hits = screen.find(event.target)
            if not hits:
                return TransitionOutcome.rejected("target not found")
            target_index = hits[0]
            el = screen.elements[target_index]
            need = _NEEDS.get(event.action)
            if not el.enabled or (need and not getattr(el, need)):
                return TransitionOutcome.rejected("target not interactable")
        fired = [r for r in self.app.rules_from(self.current_screen_id)
                 if self._rule_matches(r, event, screen, target_index)]
        if len(fired) > 1:
            raise NondeterministicApp(fired[0].number, fired[1].number, self.current_screen_id)
        if fired:
            rule = fired[0]
            updates = {var: self._effect(val, event) for var, val in rule.effects}
            self.valuation.update(updates)
            self.current_screen_id = rule.to
            return TransitionOutcome.transitioned(rule.to, rule.number)
        if event.action is Action.BACK and self.current_screen_id in self.app.parents:
            self.current_screen_id = self.app.parents[self.current_screen_id]
            return TransitionOutcome.transitioned(self.current_screen_id)
        return TransitionOutcome.no_op()

    def snapshot(self) -> dict:
        return {"screen": self.current_screen_id, "variables": dict(self.valuation),
                "interactions": self.interactions}


def reset(app: SimApp) -> DriverSession:
    return DriverSession(app)


def dump_hierarchy(session: DriverSession) -> UiScreen:
    return session.dump_hierarchy()


def perform(session: DriverSession, event: UiEvent) -> TransitionOutcome:
    return session.perform(event)


__all__ = [
    "DriverSession", "EventMatcher", "GuardTerm", "SimApp", "TransitionOutcome", "TransitionRule",
    "dump_hierarchy", "guards_disjoint", "load_app", "load_app_file", "parse_guard", "perform",
    "render_screen", "reset",
]
