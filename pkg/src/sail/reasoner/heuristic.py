"""Deterministic token-overlap backend.

It reads the same described events an LLM would see and answers through the
same reply grammar, so its transcripts replay like any other backend's.

Scoring: an event and a source step score 0 unless they share an action.
Otherwise the score is the share of the step's label tokens that also occur
in the event's label (``back`` against ``back`` scores 1). A step is *done*
once some performed event scores at least ``done_threshold`` against it. The
*key step* of a step list is its last step that is not ``back``; it stands in
for the effect the list is meant to achieve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from ..text import parse_description, token_set
from .base import DecisionKind, DecisionRequest, HistoryItem, Reasoner, SkillView


@lru_cache(maxsize=65536)
def score(event: str, step: str) -> float:
    """Overlap of ``event`` with ``step``, both given as described events."""
    e, s = parse_description(event), parse_description(step)
    if not e.action or e.action != s.action:
        return 0.0
    if s.action == "back":
        return 1.0
    wanted = token_set(s.label or "")
    if not wanted:
        return 1.0
    return len(token_set(e.label or "") & wanted) / len(wanted)


def _is_back(desc: str) -> bool:
    return parse_description(desc).action == "back"


def key_step(steps: Sequence[str]) -> int:
    for i in range(len(steps) - 1, -1, -1):
        if not _is_back(steps[i]):
            return i
    return len(steps) - 1


@dataclass
class HeuristicReasoner(Reasoner):
    skill_threshold: float = 0.2
    done_threshold: float = 0.5

    name = "heuristic"
    max_retries = 0

    def __post_init__(self):
        Reasoner.__init__(self)

    # -- helpers ---------------------------------------------------------

    def _done(self, step: str, history: Sequence[HistoryItem]) -> bool:
        return any(score(h.description, step) >= self.done_threshold for h in history)

    def _undone(self, steps: Sequence[str], history) -> list[str]:
        return [s for s in steps if not _is_back(s) and not self._done(s, history)]

    def _finished(self, steps: Sequence[str], history) -> bool:
        if not steps:
            return True
        return self._done(steps[key_step(steps)], history)

    @staticmethod
    def _tries(ctx, event: str) -> int:
        """How often an event like this one was performed on this very screen."""
        # typed values differ between offer and history, so compare action and label
        e = parse_description(event)
        return sum(1 for h in ctx.history
                   if h.screen == ctx.screen and (d := parse_description(h.description)).action == e.action
                   and d.label == e.label)

    def _tried(self, ctx, event: str) -> bool:
        return self._tries(ctx, event) > 0

    def _explore(self, ctx) -> int:
        """Nothing relevant on screen: take the least-tried event, backing out on ties."""
        return min(range(len(ctx.events)),
                   key=lambda i: (self._tries(ctx, ctx.events[i]), not _is_back(ctx.events[i]), i))

    def _fresh(self, ctx) -> list[int]:
        return [i for i, e in enumerate(ctx.events) if not _is_back(e) and not self._tried(ctx, e)]

    def _select_ordered(self, ctx, steps: Sequence[str]) -> int:
        fresh = self._fresh(ctx)
        for step in self._undone(steps, ctx.history):
            best, best_i = 0.0, None
            for i in fresh:
                sc = score(ctx.events[i], step)
                if sc > best:
                    best, best_i = sc, i
            if best_i is not None:
                return best_i
        return self._explore(ctx)

    def _goal_phrases(self, goal: str) -> list[str]:
        return [p.strip() for p in goal.split(";") if p.strip()]

    def _select_unordered(self, ctx, steps: Sequence[str]) -> int:
        undone = self._undone(steps, ctx.history)
        best, best_i = 0.0, None
        for i in self._fresh(ctx):
            sc = max((score(ctx.events[i], s) for s in undone), default=0.0)
            if sc > best:
                best, best_i = sc, i
        return best_i if best_i is not None else self._explore(ctx)

    # -- decision rules ----------------------------------------------------

    def conclude_goal(self, ctx) -> str:
        return "; ".join(ctx.source)

    def divide_skills(self, ctx) -> str:
        if ctx.authored:
            skills = [(s.name, s.description, s.lo, s.hi) for s in ctx.authored]
        else:
            # a run of back presses opens a new skill
            cuts = [0] + [i for i in range(1, len(ctx.source))
                          if _is_back(ctx.source[i]) and not _is_back(ctx.source[i - 1])]
            bounds = list(zip(cuts, cuts[1:] + [len(ctx.source)]))
            skills = []
            for lo, hi in bounds:
                steps = ctx.source[lo:hi]
                label = parse_description(steps[key_step(steps)]).label or steps[key_step(steps)]
                taken = sum(1 for name, *_ in skills if name == label or name.startswith(label + " #"))
                skills.append((f"{label} #{taken + 1}" if taken else label, "; ".join(steps), lo, hi))
        return "\n".join(f"SKILL {name}: {lo + 1}-{hi} | {desc}" for name, desc, lo, hi in skills)

    def retrieve_skill(self, ctx) -> str:
        events = [e for e in ctx.events if not _is_back(e)]
        best, best_k = -1.0, None
        for k, skill in enumerate(ctx.skills):
            if self._finished(skill.steps, ctx.history):
                # already achieved; retrieve it so it can be confirmed and retired
                sc = 1.0
            else:
                sc = max((score(e, s) for s in self._undone(skill.steps, ctx.history)
                          for e in events), default=0.0)
            if sc > best:
                best, best_k = sc, k
        if best_k is None or best < self.skill_threshold:
            return "NONE"
        return str(best_k + 1)

    def select_event(self, ctx) -> str:
        if ctx.skill is not None:
            i = self._select_ordered(ctx, ctx.skill.steps)
        elif ctx.source is not None:
            i = self._select_ordered(ctx, ctx.source)
        else:
            i = self._select_unordered(ctx, self._goal_phrases(ctx.goal))
        return str(i + 1)

    def skill_finished(self, ctx) -> str:
        return "YES" if self._finished(ctx.skill.steps, ctx.history) else "NO"

    def goal_finished(self, ctx) -> str:
        if ctx.skills is not None:
            done = not ctx.skills
        elif ctx.source is not None:
            done = self._finished(ctx.source, ctx.history)
        else:
            phrases = self._goal_phrases(ctx.goal)
            done = self._finished(phrases, ctx.history)
            if done and ctx.events:
                visible = [e for e in ctx.events if not _is_back(e)]
                pending = self._undone(phrases, ctx.history)
                done = not any(score(e, p) > 0 for e in visible for p in pending)
        return "YES" if done else "NO"

    def _source_like(self, ctx, action: str) -> list[str]:
        pool = ctx.skill.steps if ctx.skill is not None else (ctx.source or ())
        if ctx.source:
            pool = tuple(pool) + tuple(s for s in ctx.source if s not in pool)
        return [s for s in pool if parse_description(s).action == action]

    def input_text(self, ctx) -> str:
        steps = self._source_like(ctx, "input")
        best = max(steps, key=lambda s: score(ctx.target, s), default=None)
        value = parse_description(best).value if best else None
        return value if value else "test"

    def swipe_direction(self, ctx) -> str:
        steps = self._source_like(ctx, "swipe")
        best = max(steps, key=lambda s: score(ctx.target, s), default=None)
        direction = parse_description(best).direction if best else None
        return direction or "up"

    def _complete(self, request: DecisionRequest, prompt: str) -> tuple[str, dict | None]:
        handler = getattr(self, request.kind.value)
        return handler(request.context), None


__all__ = ["HeuristicReasoner", "key_step", "score", "SkillView", "DecisionKind"]
