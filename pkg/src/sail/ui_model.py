"""UI hierarchy model: parsing dumps, extracting candidate events, geometry.

The dump dialect is uiautomator-style XML::

    <hierarchy activity="...">
      <node class=".." resource-id=".." text=".." content-desc=".."
            bounds="[x1,y1][x2,y2]" clickable="true" .../>
    </hierarchy>

Unknown attributes are ignored and missing booleans read as ``false``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterator
from xml.parsers import expat

from .errors import MalformedDump, UnresolvedTarget

_BOUNDS_RE = re.compile(r"^\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]$")

BOOL_ATTRS = ("clickable", "long-clickable", "scrollable", "editable", "enabled")


@dataclass(frozen=True, order=True)
class Bounds:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if min(self.x1, self.y1, self.x2, self.y2) < 0:
            raise ValueError(f"negative coordinate in {self}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"inverted extent in {self}")

    @classmethod
    def parse(cls, text: str) -> "Bounds":
        m = _BOUNDS_RE.match(text.strip())
        if not m:
            raise ValueError(f"bad bounds syntax {text!r}")
        return cls(*(int(g) for g in m.groups()))

    def __str__(self) -> str:
        return f"[{self.x1},{self.y1}][{self.x2},{self.y2}]"

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def center(self) -> tuple[int, int]:
        # coordinates are non-negative, so floor division truncates toward zero
        return (self.x1 + self.x2) // 2, (self.y1 + self.y2) // 2

    def contains_point(self, x: int, y: int) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def contains(self, other: "Bounds") -> bool:
        return (self.x1 <= other.x1 and self.y1 <= other.y1
                and other.x2 <= self.x2 and other.y2 <= self.y2)


def center_in_bounds(candidate: Bounds, truth: Bounds) -> bool:
    """True iff the center of ``candidate`` lies in ``truth`` (edges included)."""
    return truth.contains_point(*candidate.center)


def _tail(name: str | None) -> str | None:
    if not name:
        return None
    return re.split(r"[/.]", name)[-1] or name


@dataclass(frozen=True)
class UiElement:
    class_role: str
    bounds: Bounds
    resource_id: str | None = None
    text: str | None = None
    content_desc: str | None = None
    clickable: bool = False
    long_clickable: bool = False
    scrollable: bool = False
    editable: bool = False
    enabled: bool = False
    children: tuple["UiElement", ...] = ()
    vision_desc: str | None = None

    @property
    def interactable(self) -> bool:
        return self.enabled and (self.clickable or self.long_clickable
                                 or self.editable or self.scrollable)

    @property
    def has_description(self) -> bool:
        return bool(self.text or self.content_desc)

    def iter(self) -> Iterator["UiElement"]:
        """Pre-order traversal, self first."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class ElementRef:
    """A locator for one element on a screen.

    Every populated matcher must agree. ``index`` picks among the matches in
    document order.
    """

    resource_id: str | None = None
    text: str | None = None
    content_desc: str | None = None
    class_role: str | None = None
    bounds: Bounds | None = None
    index: int | None = None

    def __post_init__(self):
        if not any((self.resource_id, self.text, self.content_desc, self.class_role, self.bounds)):
            raise ValueError("ElementRef needs at least one matcher")
        if self.index is not None and self.index < 0:
            raise ValueError("ElementRef.index must be non-negative")

    def matches(self, el: UiElement, aggregate: str | None = None) -> bool:
        if self.resource_id is not None:
            rid = el.resource_id or ""
            if rid != self.resource_id and _tail(rid) != self.resource_id:
                return False
        if self.text is not None:
            own = el.text if el.text else aggregate
            if (own or "").strip() != self.text.strip():
                return False
        if self.content_desc is not None and (el.content_desc or "") != self.content_desc:
            return False
        if self.class_role is not None:
            if el.class_role != self.class_role and _tail(el.class_role) != self.class_role:
                return False
        if self.bounds is not None and el.bounds != self.bounds:
            return False
        return True

    def to_doc(self) -> dict:
        doc = {}
        for key in ("resource_id", "text", "content_desc", "class_role"):
            value = getattr(self, key)
            if value is not None:
                doc[key] = value
        if self.bounds is not None:
            doc["bounds"] = str(self.bounds)
        if self.index is not None:
            doc["index"] = self.index
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "ElementRef":
        bounds = doc.get("bounds")
        return cls(
            resource_id=doc.get("resource_id"),
            text=doc.get("text"),
            content_desc=doc.get("content_desc"),
            class_role=doc.get("class_role"),
            bounds=Bounds.parse(bounds) if bounds else None,
            index=doc.get("index"),
        )


class Action(str, enum.Enum):
    CLICK = "click"
    LONG_CLICK = "long_click"
    INPUT = "input"
    SWIPE = "swipe"
    BACK = "back"

    def __str__(self) -> str:
        return self.value


DIRECTIONS = ("up", "down", "left", "right")


@dataclass(frozen=True)
class UiEvent:
    action: Action
    target: ElementRef | None = None
    value: str | None = None
    direction: str | None = None

    def __post_init__(self):
        action = Action(self.action)
        object.__setattr__(self, "action", action)
        if action in (Action.CLICK, Action.LONG_CLICK, Action.INPUT) and self.target is None:
            raise ValueError(f"{action} needs a target")
        if action is Action.BACK and self.target is not None:
            raise ValueError("back takes no target")
        if self.value is not None and action is not Action.INPUT:
            raise ValueError("only input events carry a value")
        if self.direction is not None:
            if action is not Action.SWIPE:
                raise ValueError("only swipe events carry a direction")
            if self.direction not in DIRECTIONS:
                raise ValueError(f"bad swipe direction {self.direction!r}")

    @classmethod
    def back(cls) -> "UiEvent":
        return cls(Action.BACK)

    def to_doc(self) -> dict:
        doc: dict = {"action": self.action.value}
        if self.target is not None:
            doc["target"] = self.target.to_doc()
        if self.value is not None:
            doc["value"] = self.value
        if self.direction is not None:
            doc["direction"] = self.direction
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "UiEvent":
        target = doc.get("target")
        return cls(
            Action(doc["action"]),
            ElementRef.from_doc(target) if target else None,
            doc.get("value"),
            doc.get("direction"),
        )


@dataclass(frozen=True)
class UiScreen:
    activity: str
    root: UiElement
    raw_digest: str = ""

    def __post_init__(self):
        if not self.activity:
            raise ValueError("activity must be non-empty")
        if not self.raw_digest:
            digest = hashlib.sha256(serialize_hierarchy(self).encode("utf-8")).hexdigest()[:16]
            object.__setattr__(self, "raw_digest", digest)

    @cached_property
    def elements(self) -> list[UiElement]:
        return list(self.root.iter())

    @cached_property
    def aggregates(self) -> dict[int, str]:
        """Text borrowed by interactable elements from bare descendants."""
        out: dict[int, str] = {}
        for i, owner in enumerate(self.elements):
            if not owner.interactable:
                continue
            parts: list[str] = []
            stack = list(reversed(owner.children))
            while stack:
                node = stack.pop()
                if node.interactable:
                    continue
                if owner.bounds.contains(node.bounds):
                    for piece in (node.text, node.content_desc):
                        if piece and piece not in parts:
                            parts.append(piece)
                stack.extend(reversed(node.children))
            if parts:
                out[i] = " ".join(parts)
        return out

    def find(self, ref: ElementRef) -> list[int]:
        """Pre-order indices of elements matching ``ref``."""
        hits = [i for i, el in enumerate(self.elements)
                if ref.matches(el, self.aggregates.get(i))]
        if ref.index is not None:
            return [hits[ref.index]] if ref.index < len(hits) else []
        return hits

    def resolve(self, ref: ElementRef) -> int:
        hits = self.find(ref)
        if not hits:
            raise UnresolvedTarget(f"nothing on {self.activity} matches {ref.to_doc()}")
        return hits[0]

    def label(self, i: int) -> str:
        return element_label(self.elements[i], self.aggregates.get(i))


def element_label(el: UiElement, aggregate: str | None = None) -> str:
    """Best human-readable descriptor for an element."""
    for candidate in (el.text, aggregate, el.content_desc, el.vision_desc,
                      _tail(el.resource_id), _tail(el.class_role)):
        if candidate:
            return candidate.strip()
    return el.class_role


# ---------------------------------------------------------------- parsing

def _parse_bool(value: str, name: str, line: int, col: int) -> bool:
    low = value.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise MalformedDump(f"attribute {name}={value!r} is not a boolean", line, col)


def parse_hierarchy(xml_text: str) -> UiScreen:
    """Parse a dump into a :class:`UiScreen`.

    Raises :class:`MalformedDump` with the offending line and column for bad
    XML, bad bounds, inverted or negative extents, and dumps without nodes.
    """
    parser = expat.ParserCreate()
    state = {"activity": None, "seen_root": False, "line": 1}
    root_lines: list[int] = []
    stack: list[dict] = []
    roots: list[UiElement] = []

    def start(tag, attrs):
        line, col = parser.CurrentLineNumber, parser.CurrentColumnNumber + 1
        if not state["seen_root"]:
            if tag != "hierarchy":
                raise MalformedDump(f"root element must be <hierarchy>, got <{tag}>", line, col)
            state["seen_root"] = True
            state["line"] = line
            state["activity"] = attrs.get("activity") or "unknown"
            return
        if tag != "node":
            raise MalformedDump(f"unexpected element <{tag}>", line, col)
        if not stack:
            root_lines.append(line)
        raw = attrs.get("bounds")
        if raw is None:
            raise MalformedDump("node without bounds", line, col)
        try:
            bounds = Bounds.parse(raw)
        except ValueError as exc:
            raise MalformedDump(str(exc), line, col) from None
        flags = {name: _parse_bool(attrs[name], name, line, col) if name in attrs else False
                 for name in BOOL_ATTRS}
        stack.append({
            "class_role": attrs.get("class") or "android.view.View",
            "bounds": bounds,
            "resource_id": attrs.get("resource-id") or None,
            "text": attrs.get("text") or None,
            "content_desc": attrs.get("content-desc") or None,
            "vision_desc": attrs.get("vision-desc") or None,
            "clickable": flags["clickable"],
            "long_clickable": flags["long-clickable"],
            "scrollable": flags["scrollable"],
            "editable": flags["editable"],
            "enabled": flags["enabled"],
            "children": [],
        })

    def end(tag):
        if tag != "node":
            return
        spec = stack.pop()
        spec["children"] = tuple(spec["children"])
        el = UiElement(**spec)
        if stack:
            stack[-1]["children"].append(el)
        else:
            roots.append(el)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(xml_text, True)
    except expat.ExpatError as exc:
        raise MalformedDump(expat.errors.messages[exc.code], exc.lineno, exc.offset + 1) from None
    if not roots:
        raise MalformedDump("hierarchy has no root node", state["line"], 1)
    if len(roots) > 1:
        raise MalformedDump("hierarchy has more than one root node", root_lines[1], 1)
    return UiScreen(state["activity"], roots[0])


def _attr(value: str) -> str:
    return (value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;").replace("\n", "&#10;").replace("\t", "&#9;"))


def _write_node(el: UiElement, depth: int, out: list[str]) -> None:
    parts = [f'class="{_attr(el.class_role)}"']
    for name, value in (("resource-id", el.resource_id), ("text", el.text),
                        ("content-desc", el.content_desc), ("vision-desc", el.vision_desc)):
        if value is not None:
            parts.append(f'{name}="{_attr(value)}"')
    parts.append(f'bounds="{el.bounds}"')
    for name in BOOL_ATTRS:
        flag = getattr(el, name.replace("-", "_"))
        parts.append(f'{name}="{"true" if flag else "false"}"')
    pad = "  " * depth
    if el.children:
        out.append(f"{pad}<node {' '.join(parts)}>")
        for child in el.children:
            _write_node(child, depth + 1, out)
        out.append(f"{pad}</node>")
    else:
        out.append(f"{pad}<node {' '.join(parts)}/>")


def serialize_hierarchy(screen: UiScreen) -> str:
    """Canonical dump text; ``parse_hierarchy`` inverts it exactly."""
    out = [f'<hierarchy activity="{_attr(screen.activity)}">']
    _write_node(screen.root, 1, out)
    out.append("</hierarchy>")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------- extraction

def _ref_for(screen: UiScreen, i: int) -> ElementRef:
    el = screen.elements[i]
    ref = ElementRef(resource_id=el.resource_id, class_role=el.class_role, bounds=el.bounds)
    hits = screen.find(ref)
    return replace(ref, index=hits.index(i))


def extract_events(screen: UiScreen) -> list[UiEvent]:
    """Candidate events in document order, followed by a single ``back``.

    Bare labels nested inside an interactable element are folded into that
    element's description instead of producing events of their own.
    """
    events: list[UiEvent] = []
    for i, el in enumerate(screen.elements):
        if not el.interactable:
            continue
        ref = _ref_for(screen, i)
        if el.clickable:
            events.append(UiEvent(Action.CLICK, ref))
        if el.long_clickable:
            events.append(UiEvent(Action.LONG_CLICK, ref))
        if el.editable:
            events.append(UiEvent(Action.INPUT, ref))
        if el.scrollable:
            events.append(UiEvent(Action.SWIPE, ref))
    events.append(UiEvent.back())
    return events


def element_hash(e: UiElement) -> str:
    """Structural fingerprint: class, id, size, and the multiset of subtree text."""
    texts = sorted(node.text for node in e.iter() if node.text)
    key = [e.class_role, e.resource_id or "", e.bounds.width, e.bounds.height, texts]
    return hashlib.sha256(json.dumps(key, ensure_ascii=False).encode("utf-8")).hexdigest()


def _ref_label(ref: ElementRef) -> str:
    for candidate in (ref.text, ref.content_desc, _tail(ref.resource_id), _tail(ref.class_role)):
        if candidate:
            return candidate
    return str(ref.bounds)


def render_event(action: Action, label: str | None, value: str | None = None,
                 direction: str | None = None) -> str:
    action = Action(action)
    if action is Action.BACK:
        return "press back"
    if action is Action.CLICK:
        return f"click '{label}'"
    if action is Action.LONG_CLICK:
        return f"long click '{label}'"
    if action is Action.INPUT:
        if value is None:
            return f"type into '{label}'"
        return f"type '{value}' into '{label}'"
    words = ["swipe"]
    if direction:
        words.append(direction)
    if label is not None:
        words.append(f"on '{label}'")
    return " ".join(words)


def event_label(e: UiEvent, screen: UiScreen | None = None) -> str | None:
    if e.target is None:
        return None
    if screen is None:
        return _ref_label(e.target)
    return screen.label(screen.resolve(e.target))


def describe_event(e: UiEvent, screen: UiScreen | None = None) -> str:
    """One-line natural-language rendering of an event.

    With a screen, the target is resolved there and labelled from the live
    element; without one, the locator fields themselves are used (this is how
    source-test steps are described).
    """
    return render_event(e.action, event_label(e, screen), e.value, e.direction)


__all__ = [
    "Action", "Bounds", "DIRECTIONS", "ElementRef", "UiElement", "UiEvent", "UiScreen",
    "center_in_bounds", "describe_event", "element_hash", "element_label", "event_label",
    "extract_events", "parse_hierarchy", "render_event", "serialize_hierarchy",
]
