"""Decision requests, replies, transcripts, and the backend base class."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..errors import FixtureExhausted, UnparseableReply


class DecisionKind(str, enum.Enum):
    CONCLUDE_GOAL = "conclude_goal"
    DIVIDE_SKILLS = "divide_skills"
    RETRIEVE_SKILL = "retrieve_skill"
    SELECT_EVENT = "select_event"
    SKILL_FINISHED = "skill_finished"
    GOAL_FINISHED = "goal_finished"
    SWIPE_DIRECTION = "swipe_direction"
    INPUT_TEXT = "input_text"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SkillView:
    """A skill as the reasoner sees it: name, summary and described steps."""

    name: str
    description: str
    steps: tuple[str, ...] = ()
    lo: int = 0
    hi: int = 0


@dataclass(frozen=True)
class HistoryItem:
    description: str
    screen: str = ""
    activity: str = ""
    skill: str | None = None


@dataclass(frozen=True)
class DecisionContext:
    goal: str | None = None
    skills: tuple[SkillView, ...] | None = None     # remaining skills
    skill: SkillView | None = None                  # skill being imitated
    events: tuple[str, ...] | None = None           # described available events
    history: tuple[HistoryItem, ...] = ()
    activity: str | None = None
    screen: str | None = None                       # digest of the current screen
    source: tuple[str, ...] | None = None           # described source steps
    authored: tuple[SkillView, ...] | None = None   # persisted decomposition, if any
    target: str | None = None                       # event being parameterised

    def to_doc(self) -> dict:
        return {k: v for k, v in asdict(self).items()
                if v is not None and not (k == "history" and not v)}

    @classmethod
    def from_doc(cls, doc: dict) -> "DecisionContext":
        def skills(items):
            return None if items is None else tuple(_skill(s) for s in items)

        def _skill(s):
            return SkillView(s["name"], s["description"], tuple(s.get("steps", ())),
                             s.get("lo", 0), s.get("hi", 0))

        return cls(
            goal=doc.get("goal"),
            skills=skills(doc.get("skills")),
            skill=_skill(doc["skill"]) if doc.get("skill") else None,
            events=tuple(doc["events"]) if "events" in doc else None,
            history=tuple(HistoryItem(**h) for h in doc.get("history", ())),
            activity=doc.get("activity"),
            screen=doc.get("screen"),
            source=tuple(doc["source"]) if "source" in doc else None,
            authored=skills(doc.get("authored")),
            target=doc.get("target"),
        )


# Which context fields each kind needs. A tuple inside the tuple means
# "at least one of these".
REQUIRED_CONTEXT: dict[DecisionKind, tuple] = {
    DecisionKind.CONCLUDE_GOAL: ("source",),
    DecisionKind.DIVIDE_SKILLS: ("source", "goal"),
    DecisionKind.RETRIEVE_SKILL: ("skills", "events"),
    DecisionKind.SELECT_EVENT: ("events", ("skill", "goal", "source")),
    DecisionKind.SKILL_FINISHED: ("skill",),
    DecisionKind.GOAL_FINISHED: (("skills", "goal", "source"),),
    DecisionKind.SWIPE_DIRECTION: ("target",),
    DecisionKind.INPUT_TEXT: ("target",),
}


@dataclass(frozen=True)
class DecisionRequest:
    kind: DecisionKind
    context: DecisionContext = field(default_factory=DecisionContext)

    def __post_init__(self):
        object.__setattr__(self, "kind", DecisionKind(self.kind))

    def validate(self) -> None:
        for need in REQUIRED_CONTEXT[self.kind]:
            options = need if isinstance(need, tuple) else (need,)
            if all(getattr(self.context, name) is None for name in options):
                raise ValueError(f"{self.kind} request needs context field(s) {' or '.join(options)}")
        if self.kind is DecisionKind.SELECT_EVENT and not self.context.events:
            raise ValueError("select_event needs at least one event")


@dataclass(frozen=True)
class DecisionReply:
    """Parsed answer. ``value`` depends on the kind.

    goal text (str), partition (tuple of SkillView), skill index (int or None),
    event index (int, 0-based), finished flag (bool), direction (str), text (str).
    """

    kind: DecisionKind
    value: Any

    def to_doc(self) -> Any:
        if self.kind is DecisionKind.DIVIDE_SKILLS:
            return [{"name": s.name, "description": s.description, "range": [s.lo, s.hi]}
                    for s in self.value]
        return self.value


@dataclass
class TranscriptRecord:
    request: DecisionRequest
    prompt: str
    raw: str
    reply: DecisionReply | None
    latency_ms: float = 0.0
    tokens: dict | None = None
    error: str | None = None

    def to_doc(self) -> dict:
        return {
            "kind": self.request.kind.value,
            "context": self.request.context.to_doc(),
            "prompt": self.prompt,
            "raw": self.raw,
            "reply": None if self.reply is None else self.reply.to_doc(),
            "error": self.error,
            "latency_ms": round(self.latency_ms, 3),
            "tokens": self.tokens,
        }


class Transcript:
    """Append-only log of every reasoner call made in one session."""

    def __init__(self, records: Iterable[TranscriptRecord] = ()):
        self._records: list[TranscriptRecord] = list(records)

    def append(self, record: TranscriptRecord) -> None:
        self._records.append(record)

    def __iter__(self):
        return iter(tuple(self._records))

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def kinds(self) -> list[str]:
        return [r.request.kind.value for r in self._records]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_doc(), ensure_ascii=False) + "\n" for r in self._records)

    def save(self, path: Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


def load_transcript_records(path_or_text) -> list[dict]:
    """Read line-delimited transcript records (path or raw text)."""
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text
                                          and Path(path_or_text).exists()):
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    return [json.loads(line) for line in text.splitlines() if line.strip()]


REFORMAT_SUFFIX = "Answer with the required format only."


class Reasoner:
    """Base class for decision backends.

    Subclasses implement :meth:`_complete`, returning raw reply text. Parsing,
    range checking, the single reformat retry and transcript bookkeeping
    happen here so every backend behaves the same way.
    """

    name = "base"
    max_retries = 1

    def __init__(self):
        self.transcript = Transcript()

    def _complete(self, request: DecisionRequest, prompt: str) -> tuple[str, dict | None]:
        raise NotImplementedError

    def decide(self, request: DecisionRequest) -> DecisionReply:
        from .prompts import check_reply, parse_reply, render_prompt

        request.validate()
        prompt = render_prompt(request)
        last_error: UnparseableReply | None = None
        for attempt in range(1 + self.max_retries):
            if attempt:
                prompt = f"{prompt}\n{REFORMAT_SUFFIX}"
            start = time.perf_counter()
            try:
                raw, tokens = self._complete(request, prompt)
            except FixtureExhausted:
                if last_error is not None:
                    raise last_error
                raise
            latency = (time.perf_counter() - start) * 1000.0
            try:
                reply = parse_reply(request.kind, raw)
                check_reply(request, reply)
            except UnparseableReply as exc:
                self.transcript.append(TranscriptRecord(request, prompt, raw, None, latency, tokens, str(exc)))
                last_error = exc
                continue
            self.transcript.append(TranscriptRecord(request, prompt, raw, reply, latency, tokens))
            return reply
        assert last_error is not None
        raise last_error
