"""Decision backends and their shared request/reply types."""

from __future__ import annotations

from ..errors import ConfigError
from .base import (
    REFORMAT_SUFFIX, DecisionContext, DecisionKind, DecisionReply, DecisionRequest,
    HistoryItem, Reasoner, SkillView, Transcript, TranscriptRecord, load_transcript_records,
)
from .heuristic import HeuristicReasoner
from .prompts import event_block, parse_reply, render_prompt
from .remote import RemoteReasoner
from .replay import ReplayReasoner
from .vision import DescriptionCache, FixtureProvider, describe_element_visual, enrich_screen

REASONERS = ("heuristic", "replay", "remote")


def make_reasoner(name: str, *, transcript=None, url=None, model=None, api_key=None,
                  skill_threshold: float = 0.2, done_threshold: float = 0.5) -> Reasoner:
    """Fresh backend instance; each migration session should get its own."""
    if name == "heuristic":
        return HeuristicReasoner(skill_threshold, done_threshold)
    if name == "replay":
        if transcript is None:
            raise ConfigError("the replay reasoner needs a transcript file")
        if isinstance(transcript, (list, tuple)):
            return ReplayReasoner(transcript)
        return ReplayReasoner.from_file(transcript)
    if name == "remote":
        return RemoteReasoner(url, model, api_key)
    raise ConfigError(f"unknown reasoner {name!r}; choose from {', '.join(REASONERS)}")


__all__ = [
    "REASONERS", "REFORMAT_SUFFIX", "DecisionContext", "DecisionKind",
    "DecisionReply", "DecisionRequest", "DescriptionCache", "FixtureProvider", "HeuristicReasoner",
    "HistoryItem", "Reasoner", "RemoteReasoner", "ReplayReasoner", "SkillView", "Transcript",
    "TranscriptRecord", "describe_element_visual", "enrich_screen", "event_block",
    "load_transcript_records", "make_reasoner", "parse_reply", "render_prompt",
]
