"""Similarity-based event matching and the ranking metrics used to score it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from ._docs import check_keys, expect, read_doc
from .errors import EmptyQuerySet, SchemaError
from .ui_model import Bounds, UiEvent, center_in_bounds, describe_event
from .text import token_set

Scorer = Callable[[str, str], float]


def lexical_similarity(a: str, b: str) -> float:
    """Jaccard similarity of the two descriptions' token sets."""
    ta, tb = token_set(a), token_set(b)
    if not ta and not tb:
        return 1.0
    return len(ta & tb) / len(ta | tb)


@dataclass(frozen=True)
class Candidate:
    event: UiEvent
    description: str

    @property
    def bounds(self) -> Bounds | None:
        return self.event.target.bounds if self.event.target else None


@dataclass(frozen=True)
class MatchQuery:
    source_event: UiEvent
    source_description: str
    candidates: tuple[Candidate, ...]
    truth_bounds: Bounds | None = None

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("a match query needs at least one candidate")


@dataclass(frozen=True)
class RankedResult:
    scores: tuple[float, ...]
    order: tuple[int, ...]
    rank_of_truth: int | None = None


@dataclass(frozen=True)
class MatchReport:
    query_count: int
    top1: float
    mrr: float | None = None
    rows: list[dict] = field(default_factory=list, compare=False)

    def to_doc(self) -> dict:
        return {"n": self.query_count, "top1": self.top1, "mrr": self.mrr}


def truth_rank(candidates: Sequence[Candidate], order: Sequence[int], truth: Bounds | None) -> int | None:
    if truth is None:
        return None
    for position, i in enumerate(order, start=1):
        b = candidates[i].bounds
        if b is not None and center_in_bounds(b, truth):
            return position
    return None


def rank(query: MatchQuery, scorer: Scorer = lexical_similarity) -> RankedResult:
    scores = tuple(float(scorer(query.source_description, c.description)) for c in query.candidates)
    order = tuple(sorted(range(len(scores)), key=lambda i: (-scores[i], i)))
    return RankedResult(scores, order, truth_rank(query.candidates, order, query.truth_bounds))


def _check_ranks(ranks: Sequence[int | None]) -> None:
    if len(ranks) == 0:
        raise EmptyQuerySet("no queries")
    for r in ranks:
        if r is not None and r < 1:
            raise ValueError(f"ranks are 1-based, got {r}")


def mrr(ranks: Sequence[int | None]) -> float:
    """Mean reciprocal rank; an absent rank (truth never found) contributes 0."""
    _check_ranks(ranks)
    return sum(1.0 / r for r in ranks if r is not None) / len(ranks)


def top1(ranks: Sequence[int | None]) -> float:
    _check_ranks(ranks)
    return sum(1 for r in ranks if r == 1) / len(ranks)


def reasoner_pick(query: MatchQuery, reasoner) -> int:
    """Ask a reasoner to choose one candidate for the source event."""
    from .reasoner import DecisionContext, DecisionKind, DecisionRequest, SkillView

    ctx = DecisionContext(
        skill=SkillView("match", query.source_description, (query.source_description,), 0, 1),
        events=tuple(c.description for c in query.candidates),
    )
    return reasoner.decide(DecisionRequest(DecisionKind.SELECT_EVENT, ctx)).value


# ------------------------------------------------------------------ datasets

def _event_doc(obj: Any, path: str, with_bounds: bool) -> Candidate:
    optional = ("target", "value", "direction", "bounds")
    check_keys(obj, path, ("action",), optional)
    target = dict(obj.get("target") or {})
    if "bounds" in obj:
        if "bounds" in target:
            raise SchemaError(f"{path}.bounds", "bounds given twice")
        target["bounds"] = obj["bounds"]
    if with_bounds and "bounds" not in target:
        raise SchemaError(f"{path}.bounds", "candidate needs bounds")
    doc = {"action": obj["action"]}
    if target:
        doc["target"] = target
    for key in ("value", "direction"):
        if key in obj:
            doc[key] = obj[key]
    try:
        event = UiEvent.from_doc(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError(path, str(exc)) from None
    return Candidate(event, describe_event(event))


def load_match_dataset(doc: Any) -> list[MatchQuery]:
    """Parse ``{"queries": [{"source", "candidates", "truth_bounds"}]}``."""
    obj = read_doc(doc)
    check_keys(obj, "$", ("queries",))
    queries = []
    for i, q in enumerate(expect(obj["queries"], list, "$.queries", "an array")):
        path = f"$.queries[{i}]"
        check_keys(q, path, ("source", "candidates"), ("truth_bounds",))
        src = _event_doc(q["source"], f"{path}.source", with_bounds=False)
        cands = expect(q["candidates"], list, f"{path}.candidates", "an array")
        if not cands:
            raise SchemaError(f"{path}.candidates", "at least one candidate required")
        truth = None
        if "truth_bounds" in q:
            try:
                truth = Bounds.parse(expect(q["truth_bounds"], str, f"{path}.truth_bounds", "a string"))
            except ValueError as exc:
                raise SchemaError(f"{path}.truth_bounds", str(exc)) from None
        queries.append(MatchQuery(
            src.event, src.description,
            tuple(_event_doc(c, f"{path}.candidates[{j}]", True) for j, c in enumerate(cands)),
            truth,
        ))
    if not queries:
        raise EmptyQuerySet("dataset has no queries")
    return queries


def evaluate_ranking(queries: Sequence[MatchQuery], scorer: Scorer = lexical_similarity) -> MatchReport:
    ranks, rows = [], []
    for i, q in enumerate(queries):
        res = rank(q, scorer)
        ranks.append(res.rank_of_truth)
        rows.append({"query": i, "source": q.source_description,
                     "best": q.candidates[res.order[0]].description,
                     "score": res.scores[res.order[0]], "rank": res.rank_of_truth})
    return MatchReport(len(queries), top1(ranks), mrr(ranks), rows)


def evaluate_picks(queries: Sequence[MatchQuery], reasoner) -> MatchReport:
    """Top-1 of reasoner choices, judged by the center-in-bounds rule."""
    ranks, rows = [], []
    for i, q in enumerate(queries):
        choice = reasoner_pick(q, reasoner)
        b = q.candidates[choice].bounds
        hit = q.truth_bounds is not None and b is not None and center_in_bounds(b, q.truth_bounds)
        ranks.append(1 if hit else None)
        rows.append({"query": i, "source": q.source_description,
                     "best": q.candidates[choice].description, "score": None,
                     "rank": 1 if hit else None})
    return MatchReport(len(queries), top1(ranks), None, rows)
