import random
import re

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from sail.errors import EmptyQuerySet, SchemaError, UnparseableReply
from sail.matcher import (
    Candidate, MatchQuery, evaluate_ranking, lexical_similarity, load_match_dataset, mrr, rank,
    reasoner_pick, top1,
)
from sail.reasoner import HeuristicReasoner, ReplayReasoner
from sail.ui_model import Action, Bounds, ElementRef, UiEvent

STOP = {"the", "a", "an", "to", "of", "on", "in", "and", "or"}


def oracle_tokens(text):
    return {t for t in re.findall(r"[a-z0-9]+", text.lower()) if t not in STOP}


def oracle_jaccard(a, b):
    ta, tb = oracle_tokens(a), oracle_tokens(b)
    return 1.0 if not ta | tb else len(ta & tb) / len(ta | tb)


def oracle_mrr(ranks):
    total = 0.0
    for r in ranks:
        total += 0.0 if r is None else 1.0 / r
    return total / len(ranks)


def oracle_top1(ranks):
    hits = 0
    for r in ranks:
        if r == 1:
            hits += 1
    return hits / len(ranks)


def test_similarity_examples():
    assert lexical_similarity("click 'Settings'", "click 'Settings'") == 1.0
    assert lexical_similarity("click 'Settings'", "type 'hello' into 'search'") == 0.0
    assert lexical_similarity("click 'font size'", "click 'text size'") == 0.5
    assert lexical_similarity("", "") == 1.0
    assert lexical_similarity("the a of", "") == 1.0


def test_stopwords_ignored():
    assert lexical_similarity("click on the Menu", "click Menu") == 1.0


def cand(label, bounds):
    e = UiEvent(Action.CLICK, ElementRef(text=label, bounds=Bounds.parse(bounds)))
    return Candidate(e, f"click '{label}'")


def query(labels, truth=None):
    src = UiEvent(Action.CLICK, ElementRef(text="x"))
    cands = tuple(cand(l, f"[0,{i * 100}][100,{i * 100 + 90}]") for i, l in enumerate(labels))
    return MatchQuery(src, "click 'x'", cands, Bounds.parse(truth) if truth else None)


def test_rank_ties_by_index():
    table = {"click 'a'": 0.2, "click 'b'": 0.9, "click 'c'": 0.9}
    res = rank(query(["a", "b", "c"]), lambda s, c: table[c])
    assert res.order == (1, 2, 0)
    assert res.scores == (0.2, 0.9, 0.9)


def test_rank_of_truth():
    q = query(["a", "b", "c"], truth="[0,200][100,290]")
    table = {"click 'a'": 0.1, "click 'b'": 0.2, "click 'c'": 0.9}
    assert rank(q, lambda s, c: table[c]).rank_of_truth == 1
    assert rank(query(["a", "b", "c"], truth="[500,500][600,600]")).rank_of_truth is None


@pytest.mark.parametrize("ranks, expected", [
    ([1, 2, 4], 1.75 / 3), ([1, 1, 1], 1.0), ([1, None], 0.5),
])
def test_mrr_cases(ranks, expected):
    assert mrr(ranks) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("ranks, expected", [([1, 3, 1], 2 / 3), ([1, 1], 1.0), ([2, 2], 0.0)])
def test_top1_cases(ranks, expected):
    assert top1(ranks) == pytest.approx(expected, abs=1e-12)


def test_empty_rank_lists():
    with pytest.raises(EmptyQuerySet):
        mrr([])
    with pytest.raises(EmptyQuerySet):
        top1([])


def test_metrics_against_brute_force():
    rng = random.Random(1234)
    for _ in range(1000):
        ranks = [rng.choice([None] + list(range(1, 21))) for _ in range(rng.randint(1, 50))]
        assert abs(mrr(ranks) - oracle_mrr(ranks)) <= 1e-12
        assert abs(top1(ranks) - oracle_top1(ranks)) <= 1e-12


rank_lists = st.lists(st.one_of(st.none(), st.integers(1, 20)), min_size=1, max_size=50)


@given(rank_lists)
def test_top1_never_exceeds_mrr(ranks):
    assert 0.0 <= top1(ranks) <= mrr(ranks) <= 1.0


words = st.sampled_from(["menu", "settings", "font", "size", "large", "open", "news", "back", "save"])
labels = st.lists(st.lists(words, min_size=1, max_size=3).map(" ".join), min_size=1, max_size=8)


@given(labels, st.sampled_from([lambda x: 3 * x + 1, lambda x: x ** 3, lambda x: 2 ** x]))
def test_rank_invariant_under_monotone_transform(names, f):
    q = query(names)
    base = rank(q)
    moved = rank(q, lambda a, b: f(lexical_similarity(a, b)))
    assert moved.order == base.order


@given(st.text(max_size=30), st.text(max_size=30))
def test_similarity_symmetric_and_bounded(a, b):
    s = lexical_similarity(a, b)
    assert s == lexical_similarity(b, a)
    assert 0.0 <= s <= 1.0
    assert s == pytest.approx(oracle_jaccard(a, b))


def test_bundled_dataset_metrics():
    queries = load_match_dataset(FIXTURES / "match" / "dataset.json")
    report = evaluate_ranking(queries)
    # independent recomputation: Jaccard ranking + center-in-box truth check
    ranks = []
    for q in queries:
        scores = [oracle_jaccard(q.source_description, c.description) for c in q.candidates]
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        r = None
        for pos, i in enumerate(order, 1):
            b, t = q.candidates[i].bounds, q.truth_bounds
            cx, cy = (b.x1 + b.x2) // 2, (b.y1 + b.y2) // 2
            if t.x1 <= cx <= t.x2 and t.y1 <= cy <= t.y2:
                r = pos
                break
        ranks.append(r)
    assert report.query_count == 14
    assert report.top1 == pytest.approx(oracle_top1(ranks), abs=1e-12)
    assert report.mrr == pytest.approx(oracle_mrr(ranks), abs=1e-12)
    # frozen from the recomputation above
    assert report.top1 == pytest.approx(11 / 14, abs=1e-12)
    assert report.mrr == pytest.approx(12.5 / 14, abs=1e-12)


def test_dataset_schema_errors():
    with pytest.raises(SchemaError):
        load_match_dataset({"queries": [{"source": {"action": "click", "target": {"text": "a"}},
                                         "candidates": [{"action": "click", "target": {"text": "b"}}]}]})
    with pytest.raises(EmptyQuerySet):
        load_match_dataset({"queries": []})


def test_reasoner_pick_heuristic():
    src = UiEvent(Action.CLICK, ElementRef(text="Font size"))
    q = MatchQuery(src, "click 'Font size'",
                   (cand("Font size", "[0,0][10,10]"), cand("Wallpaper", "[0,20][10,30]"),
                    cand("Sound", "[0,40][10,50]")))
    assert reasoner_pick(q, HeuristicReasoner()) == 0


def test_reasoner_pick_replay():
    q = query(["a", "b", "c"])
    # the reply names the prompt's 1-based number; the pick is a 0-based candidate index
    assert reasoner_pick(q, ReplayReasoner(["2"])) == 1
    with pytest.raises(UnparseableReply):
        reasoner_pick(q, ReplayReasoner(["none of them", "still none"]))
