"""Prompt rendering and reply parsing.

Prompts are plain text assembled from fixed slots, in this order: a role
preamble, the goal, the skill being imitated with its source events, the
numbered available events, a tail of the history, and an answer-format line
specific to the decision kind. Events are numbered from 1.
"""

from __future__ import annotations

import re

from ..errors import UnparseableReply
from ..ui_model import DIRECTIONS
from .base import DecisionKind, DecisionReply, DecisionRequest, SkillView

PREAMBLE = ("You are an expert mobile app tester. You are migrating a UI test case "
            "written for a source app onto a different target app that offers the "
            "same functionality.")

HISTORY_WINDOW = 10

INSTRUCTIONS = {
    DecisionKind.CONCLUDE_GOAL: "State the objective of the source test in one sentence.",
    DecisionKind.DIVIDE_SKILLS: (
        "Divide the source test into consecutive skills that together cover every step.\n"
        "Answer with one line per skill in the form: SKILL <name>: <first step>-<last step>"),
    DecisionKind.RETRIEVE_SKILL: (
        "Which remaining skill can be advanced on the current screen? "
        "Answer with the skill number, or NONE if no skill applies."),
    DecisionKind.SELECT_EVENT: "Which event should be performed next? Answer with exactly one number.",
    DecisionKind.SKILL_FINISHED: "Has the current skill been completed? Answer YES or NO.",
    DecisionKind.GOAL_FINISHED: "Has the goal of the test been reached? Answer YES or NO.",
    DecisionKind.SWIPE_DIRECTION: "Which direction should the swipe go? Answer with one of up, down, left, right.",
    DecisionKind.INPUT_TEXT: "What text should be typed? Answer with the text only.",
}


def number_lines(items) -> list[str]:
    return [f"{i}. {item}" for i, item in enumerate(items, start=1)]


def event_block(events) -> str:
    """The numbered event list exactly as it appears inside prompts."""
    return "\n".join(["Available events:", *number_lines(events)])


def _skill_block(skill: SkillView) -> str:
    head = f"Current skill: {skill.name}"
    if skill.description and skill.description != skill.name:
        head += f" ({skill.description})"
    return "\n".join([head, "Source events of this skill:", *number_lines(skill.steps)])


def render_prompt(req: DecisionRequest) -> str:
    ctx = req.context
    blocks = [PREAMBLE]
    if ctx.goal:
        blocks.append(f"Goal: {ctx.goal}")
    if ctx.skill is not None:
        blocks.append(_skill_block(ctx.skill))
    if ctx.source is not None and req.kind in (
            DecisionKind.CONCLUDE_GOAL, DecisionKind.DIVIDE_SKILLS,
            DecisionKind.SELECT_EVENT, DecisionKind.GOAL_FINISHED,
            DecisionKind.INPUT_TEXT, DecisionKind.SWIPE_DIRECTION) and ctx.skill is None:
        blocks.append("\n".join(["Source test:", *number_lines(ctx.source)]))
    if ctx.authored and req.kind is DecisionKind.DIVIDE_SKILLS:
        lines = [f"{s.name}: steps {s.lo + 1}-{s.hi}" for s in ctx.authored]
        blocks.append("\n".join(["Reference decomposition:", *lines]))
    if ctx.skills is not None and req.kind in (DecisionKind.RETRIEVE_SKILL, DecisionKind.GOAL_FINISHED):
        lines = [f"{s.name}: {'; '.join(s.steps) or s.description}" for s in ctx.skills]
        blocks.append("\n".join(["Remaining skills:", *number_lines(lines)] if lines
                                else ["Remaining skills: none"]))
    if ctx.activity:
        blocks.append(f"Current activity: {ctx.activity}")
    if ctx.events is not None and req.kind not in (DecisionKind.CONCLUDE_GOAL, DecisionKind.DIVIDE_SKILLS):
        blocks.append(event_block(ctx.events))
    if ctx.history or req.kind in (DecisionKind.SKILL_FINISHED, DecisionKind.GOAL_FINISHED):
        tail = ctx.history[-HISTORY_WINDOW:]
        head = "Performed events"
        if len(ctx.history) > len(tail):
            head += f" (last {len(tail)} of {len(ctx.history)})"
        blocks.append("\n".join([f"{head}:", *number_lines(h.description for h in tail)])
                      if tail else f"{head}: none")
    if ctx.target:
        blocks.append(f"Event to perform: {ctx.target}")
    blocks.append(INSTRUCTIONS[req.kind])
    return "\n\n".join(blocks)


# ----------------------------------------------------------------- parsing

_INT = re.compile(r"(?<![\w.-])(\d+)(?![\w])")
_YESNO = re.compile(r"\b(yes|no)\b", re.I)
_NONE = re.compile(r"\bnone\b", re.I)
_DIRECTION = re.compile(r"\b(" + "|".join(DIRECTIONS) + r")\b", re.I)
_SKILL = re.compile(r"^\s*SKILL\s+(.+?)\s*:\s*(\d+)\s*-\s*(\d+)\s*(?:\|\s*(.*?))?\s*$", re.I)


def parse_reply(kind, raw: str) -> DecisionReply:
    """Turn raw model text into a typed reply, or raise UnparseableReply."""
    kind = DecisionKind(kind)
    text = (raw or "").strip()
    if kind in (DecisionKind.SKILL_FINISHED, DecisionKind.GOAL_FINISHED):
        m = _YESNO.search(text)
        if not m:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, m.group(1).lower() == "yes")
    if kind is DecisionKind.SELECT_EVENT:
        m = _INT.search(text)
        if not m or int(m.group(1)) < 1:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, int(m.group(1)) - 1)
    if kind is DecisionKind.RETRIEVE_SKILL:
        m, n = _INT.search(text), _NONE.search(text)
        if n and (not m or n.start() < m.start()):
            return DecisionReply(kind, None)
        if not m or int(m.group(1)) < 1:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, int(m.group(1)) - 1)
    if kind is DecisionKind.DIVIDE_SKILLS:
        skills = []
        for line in text.splitlines():
            m = _SKILL.match(line)
            if m:
                lo, hi = int(m.group(2)), int(m.group(3))
                if lo < 1 or hi < lo:
                    raise UnparseableReply(raw, kind.value)
                name = m.group(1).strip()
                skills.append(SkillView(name, (m.group(4) or name).strip(), (), lo - 1, hi))
        if not skills:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, tuple(skills))
    if kind is DecisionKind.SWIPE_DIRECTION:
        m = _DIRECTION.search(text)
        if not m:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, m.group(1).lower())
    if kind is DecisionKind.CONCLUDE_GOAL:
        text = re.sub(r"^goal\s*:\s*", "", text, flags=re.I).strip()
        if not text:
            raise UnparseableReply(raw, kind.value)
        return DecisionReply(kind, text)
    # input text: strip one layer of matching quotes
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        text = text[1:-1]
    if not text:
        raise UnparseableReply(raw, kind.value)
    return DecisionReply(kind, text)


def check_reply(req: DecisionRequest, reply: DecisionReply) -> None:
    """Range checks that need the request (indices within what was offered)."""
    ctx = req.context
    if req.kind is DecisionKind.SELECT_EVENT and not 0 <= reply.value < len(ctx.events or ()):
        raise UnparseableReply(str(reply.value + 1), "select_event (out of range)")
    if req.kind is DecisionKind.RETRIEVE_SKILL and reply.value is not None \
            and not 0 <= reply.value < len(ctx.skills or ()):
        raise UnparseableReply(str(reply.value + 1), "retrieve_skill (out of range)")
    if req.kind is DecisionKind.DIVIDE_SKILLS and ctx.source is not None:
        if any(s.hi > len(ctx.source) for s in reply.value):
            raise UnparseableReply("step beyond the end of the test", "divide_skills")
