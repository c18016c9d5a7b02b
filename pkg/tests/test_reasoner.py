import threading
import time

import httpx
import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES, dump, node
from stub_server import serve
from sail.errors import (
    BackendUnavailable, ConfigError, FixtureExhausted, ProviderUnavailable, ReplayMismatch,
    UnparseableReply,
)
from sail.reasoner import (
    REFORMAT_SUFFIX, DecisionContext, DecisionKind, DecisionRequest, DescriptionCache,
    FixtureProvider, HeuristicReasoner, HistoryItem, RemoteReasoner, ReplayReasoner, SkillView,
    describe_element_visual, enrich_screen, event_block, make_reasoner, parse_reply, render_prompt,
)
from sail.reasoner.heuristic import key_step, score
from sail.ui_model import describe_event, element_hash, extract_events, parse_hierarchy

K = DecisionKind
EVENTS = ("click 'Wallpaper'", "click 'Font size'", "click 'Sound'", "press back")
FONT = SkillView("Setting Font", "enlarge the font", ("click 'Settings'", "click 'Font size'", "click 'Large'"))


def request(kind, **ctx):
    return DecisionRequest(kind, DecisionContext(**ctx))


def history(*descs):
    return tuple(HistoryItem(d, "s") for d in descs)


# ------------------------------------------------------------------ prompts

def test_select_prompt_structure():
    req = request(K.SELECT_EVENT, goal="enlarge font", skill=FONT, events=EVENTS,
                  history=history("click 'Settings'"))
    text = render_prompt(req)
    assert "Answer with exactly one number." in text
    assert "1. click 'Wallpaper'\n2. click 'Font size'" in text
    slots = ["expert mobile app tester", "Goal: enlarge font", "Current skill: Setting Font",
             "Available events:", "Performed events:", "Answer with exactly one number."]
    positions = [text.index(s) for s in slots]
    assert positions == sorted(positions)
    assert render_prompt(req) == text


def test_skill_finished_prompt_ending():
    text = render_prompt(request(K.SKILL_FINISHED, skill=FONT))
    assert text.endswith("Answer YES or NO.")


def test_conclude_goal_embeds_steps():
    text = render_prompt(request(K.CONCLUDE_GOAL, source=("click 'Menu'", "click 'Settings'")))
    assert "1. click 'Menu'" in text and "2. click 'Settings'" in text


def test_history_window():
    hist = history(*[f"click 'Item {i}'" for i in range(15)])
    text = render_prompt(request(K.SELECT_EVENT, skill=FONT, events=EVENTS, history=hist))
    assert "last 10 of 15" in text
    assert "click 'Item 4'" not in text and "click 'Item 5'" in text and "click 'Item 14'" in text


def test_event_block_matches_prompt_listing():
    assert event_block(EVENTS) in render_prompt(request(K.SELECT_EVENT, goal="g", events=EVENTS))


# ------------------------------------------------------------------ parsing

@pytest.mark.parametrize("kind, raw, value", [
    (K.SKILL_FINISHED, "Yes, the font was enlarged.", True),
    (K.GOAL_FINISHED, "no. Not yet", False),
    (K.SELECT_EVENT, "I choose option 2 because it opens the font", 1),
    (K.SELECT_EVENT, "3", 2),
    (K.RETRIEVE_SKILL, "NONE", None),
    (K.RETRIEVE_SKILL, "Skill 1 applies", 0),
    (K.SWIPE_DIRECTION, "Swipe Down please", "down"),
    (K.INPUT_TEXT, "'hello world'", "hello world"),
    (K.CONCLUDE_GOAL, "Goal: enlarge the font", "enlarge the font"),
])
def test_parse_reply(kind, raw, value):
    assert parse_reply(kind, raw).value == value


def test_parse_partition():
    reply = parse_reply(K.DIVIDE_SKILLS, "Here:\nSKILL Setting Font: 1-4\nSKILL Open News: 5-7 | read one")
    got = [(s.name, s.lo, s.hi, s.description) for s in reply.value]
    assert got == [("Setting Font", 0, 4, "Setting Font"), ("Open News", 4, 7, "read one")]


@pytest.mark.parametrize("kind, raw", [
    (K.SELECT_EVENT, "none of these"),
    (K.SELECT_EVENT, "option 0"),
    (K.SKILL_FINISHED, "maybe"),
    (K.DIVIDE_SKILLS, "one skill"),
    (K.SWIPE_DIRECTION, "sideways"),
    (K.INPUT_TEXT, "  "),
])
def test_parse_reply_rejects(kind, raw):
    with pytest.raises(UnparseableReply) as info:
        parse_reply(kind, raw)
    assert info.value.raw == raw


# ------------------------------------------------------------- heuristic

def test_score_rules():
    assert score("click 'Font size'", "click 'Font size'") == 1.0
    assert score("click 'Text size'", "click 'Font size'") == 0.5
    assert score("long click 'Font size'", "click 'Font size'") == 0.0
    assert score("press back", "press back") == 1.0
    assert score("click 'Menu'", "press back") == 0.0


def test_key_step_skips_trailing_back():
    assert key_step(["click 'a'", "click 'b'", "press back", "press back"]) == 1
    assert key_step(["press back"]) == 0


def test_heuristic_select_event():
    r = HeuristicReasoner()
    skill = SkillView("font", "", ("click 'Font size'",))
    assert r.decide(request(K.SELECT_EVENT, skill=skill, events=EVENTS[:3])).value == 1


def test_heuristic_select_follows_first_unfinished_step():
    r = HeuristicReasoner()
    events = ("click 'Large'", "click 'Font size'", "press back")
    got = r.decide(request(K.SELECT_EVENT, skill=FONT, events=events,
                           history=history("click 'Settings'"))).value
    assert got == 1


def test_heuristic_goal_finished_base_case():
    r = HeuristicReasoner()
    assert r.decide(request(K.GOAL_FINISHED, goal="g", skills=())).value is True
    assert r.decide(request(K.GOAL_FINISHED, goal="g", skills=(FONT,))).value is False


def test_heuristic_skill_finished_uses_key_step():
    r = HeuristicReasoner()
    assert r.decide(request(K.SKILL_FINISHED, skill=FONT, history=history("click 'Font size'"))).value is False
    assert r.decide(request(K.SKILL_FINISHED, skill=FONT, history=history("click 'Large'"))).value is True


def test_heuristic_retrieve():
    r = HeuristicReasoner()
    news = SkillView("Open News", "", ("click 'Read article'",))
    ctx = dict(goal="g", skills=(FONT, news))
    assert r.decide(request(K.RETRIEVE_SKILL, events=("click 'Read article: Storm'", "press back"), **ctx)).value == 1
    assert r.decide(request(K.RETRIEVE_SKILL, events=("click 'Font size'", "click 'Read article'"), **ctx)).value == 0
    assert r.decide(request(K.RETRIEVE_SKILL, events=("click 'Login'", "press back"), **ctx)).value is None


def test_heuristic_divide_and_conclude():
    r = HeuristicReasoner()
    src = ("click 'Menu'", "click 'Large'", "press back", "click 'Story'")
    assert r.decide(request(K.CONCLUDE_GOAL, source=src)).value == "; ".join(src)
    parts = r.decide(request(K.DIVIDE_SKILLS, source=src, goal="g")).value
    assert [(p.lo, p.hi) for p in parts] == [(0, 2), (2, 4)]


def test_heuristic_divide_keeps_skill_names_distinct():
    src = ("click 'Menu'", "press back", "click 'Menu'", "press back", "click 'Menu'")
    parts = HeuristicReasoner().decide(request(K.DIVIDE_SKILLS, source=src, goal="g")).value
    assert [p.name for p in parts] == ["Menu", "Menu #2", "Menu #3"]


def test_heuristic_parameters_from_source():
    r = HeuristicReasoner()
    src = ("type 'Milk' into 'Title'", "swipe down on 'Feed'")
    assert r.decide(request(K.INPUT_TEXT, target="type into 'Title'", source=src)).value == "Milk"
    assert r.decide(request(K.SWIPE_DIRECTION, target="swipe on 'List'", source=src)).value == "down"
    assert r.decide(request(K.INPUT_TEXT, target="type into 'x'", source=("click 'a'",))).value == "test"


descs = st.lists(st.sampled_from(["click 'Menu'", "click 'Font size'", "click 'Large'", "press back",
                                  "type into 'Title'", "swipe on 'List'", "long click 'Song'"]),
                 min_size=1, max_size=6)


@given(descs, descs, descs)
def test_heuristic_deterministic_and_in_range(events, steps, hist):
    skill = SkillView("s", "", tuple(steps))
    req = request(K.SELECT_EVENT, skill=skill, events=tuple(events), history=history(*hist))
    a, b = HeuristicReasoner().decide(req), HeuristicReasoner().decide(req)
    assert a == b and 0 <= a.value < len(events)


# -------------------------------------------------------- retry and replay

def test_reformat_retry_then_success():
    r = ReplayReasoner(["I am not sure", "3"])
    assert r.decide(request(K.SELECT_EVENT, goal="g", events=EVENTS)).value == 2
    assert len(r.transcript) == 2
    assert r.transcript[0].reply is None and r.transcript[0].error
    assert r.transcript[1].prompt.endswith(REFORMAT_SUFFIX)


def test_out_of_range_index_is_retried_once():
    r = ReplayReasoner(["9", "12"])
    with pytest.raises(UnparseableReply):
        r.decide(request(K.SELECT_EVENT, goal="g", events=EVENTS))
    assert len(r.transcript) == 2


def test_retry_with_exhausted_fixture_reports_parse_error():
    r = ReplayReasoner(["garbage"])
    with pytest.raises(UnparseableReply):
        r.decide(request(K.SELECT_EVENT, goal="g", events=EVENTS))


def test_replay_exhausted():
    with pytest.raises(FixtureExhausted):
        ReplayReasoner([]).decide(request(K.GOAL_FINISHED, goal="g"))


def test_replay_kind_mismatch():
    r = ReplayReasoner([{"kind": "skill_finished", "raw": "YES"}])
    with pytest.raises(ReplayMismatch):
        r.decide(request(K.GOAL_FINISHED, goal="g"))


def test_replay_reproduces_heuristic_transcript(tmp_path):
    h = HeuristicReasoner()
    reqs = [request(K.SELECT_EVENT, skill=FONT, events=EVENTS),
            request(K.SKILL_FINISHED, skill=FONT, history=history("click 'Large'")),
            request(K.GOAL_FINISHED, goal="g", skills=())]
    first = [h.decide(q) for q in reqs]
    path = tmp_path / "t.jsonl"
    h.transcript.save(path)
    replay = make_reasoner("replay", transcript=str(path))
    assert [replay.decide(q) for q in reqs] == first
    assert replay.remaining == 0
    assert replay.transcript.to_jsonl().count("\n") == 3


def test_make_reasoner_errors():
    with pytest.raises(ConfigError):
        make_reasoner("oracle")
    with pytest.raises(ConfigError):
        make_reasoner("replay")


# ------------------------------------------------------------------ remote

def test_remote_wire_protocol():
    with serve(lambda prompt: "2") as (url, state):
        r = RemoteReasoner(url, "tiny-model", "secret", backoff=0)
        assert r.decide(request(K.SELECT_EVENT, goal="g", events=EVENTS)).value == 1
    sent = state.requests[0]
    assert sent["path"] == "/v1/chat/completions"
    assert sent["headers"]["Authorization"] == "Bearer secret"
    body = sent["body"]
    assert body["model"] == "tiny-model" and body["temperature"] == 0
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert body["messages"][0]["content"].startswith("You are an expert")
    assert r.transcript[0].tokens["completion_tokens"] == 1


def test_remote_retries_transient_failures():
    with serve(lambda prompt: "YES", failures=[503, 429]) as (url, state):
        r = RemoteReasoner(url, "m", None, backoff=0)
        assert r.decide(request(K.GOAL_FINISHED, goal="g")).value is True
    assert len(state.requests) == 3
    assert "Authorization" not in state.requests[0]["headers"]


def test_remote_gives_up():
    with serve(lambda prompt: "YES", failures=[503, 503, 503]) as (url, _):
        with pytest.raises(BackendUnavailable):
            RemoteReasoner(url, "m", None, backoff=0).decide(request(K.GOAL_FINISHED, goal="g"))
    with serve(lambda prompt: "YES", failures=[400]) as (url, state):
        with pytest.raises(BackendUnavailable):
            RemoteReasoner(url, "m", None, backoff=0).decide(request(K.GOAL_FINISHED, goal="g"))
        assert len(state.requests) == 1


def test_remote_unreachable():
    r = RemoteReasoner("http://127.0.0.1:9", "m", None, attempts=2, backoff=0, timeout=2)
    with pytest.raises(BackendUnavailable):
        r.decide(request(K.GOAL_FINISHED, goal="g"))


def test_remote_config(monkeypatch):
    monkeypatch.delenv("SAIL_REASONER_URL", raising=False)
    with pytest.raises(ConfigError):
        RemoteReasoner()
    monkeypatch.setenv("SAIL_REASONER_URL", "http://example.invalid/")
    monkeypatch.setenv("SAIL_REASONER_MODEL", "env-model")
    monkeypatch.setenv("SAIL_REASONER_API_KEY", "k")
    r = RemoteReasoner()
    assert (r.base_url, r.model, r.api_key) == ("http://example.invalid", "env-model", "k")


def test_remote_bad_payload():
    transport = httpx.MockTransport(lambda req: httpx.Response(200, json={"choices": []}))
    r = RemoteReasoner("http://stub", "m", None, client=httpx.Client(transport=transport))
    with pytest.raises(BackendUnavailable):
        r.decide(request(K.GOAL_FINISHED, goal="g"))


# ------------------------------------------------------------------ vision

ICONS = parse_hierarchy((FIXTURES / "dumps" / "icon_only.xml").read_text())


def test_visual_description_cached():
    share = ICONS.elements[1]
    provider = FixtureProvider({element_hash(share): "share icon"})
    cache = DescriptionCache()
    assert describe_element_visual(share, provider, cache) == "share icon"
    assert describe_element_visual(share, provider, cache) == "share icon"
    assert provider.calls == {element_hash(share): 1}


def test_visual_description_requires_textless_element():
    el = parse_hierarchy(dump(node("Send", clickable="true"))).elements[0]
    with pytest.raises(ValueError):
        describe_element_visual(el, FixtureProvider({}, "x"), DescriptionCache())


def test_provider_failure_leaves_cache_untouched():
    el = ICONS.elements[2]
    cache = DescriptionCache()
    with pytest.raises(ProviderUnavailable):
        describe_element_visual(el, FixtureProvider({}), cache)
    assert element_hash(el) not in cache and len(cache) == 0
    assert describe_element_visual(el, FixtureProvider({}, "star icon"), cache) == "star icon"


def test_provider_exceptions_wrapped():
    def broken(element):
        raise RuntimeError("boom")
    with pytest.raises(ProviderUnavailable):
        describe_element_visual(ICONS.elements[2], broken, DescriptionCache())


def test_cache_concurrent_single_call():
    calls = {}
    lock = threading.Lock()

    def slow(element):
        with lock:
            calls[element_hash(element)] = calls.get(element_hash(element), 0) + 1
        time.sleep(0.02)
        return "icon"

    cache = DescriptionCache()
    targets = [ICONS.elements[1], ICONS.elements[2]] * 16
    barrier = threading.Barrier(8)

    def work(k):
        barrier.wait()
        for el in targets[k::8]:
            describe_element_visual(el, slow, cache)

    threads = [threading.Thread(target=work, args=(k,)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert calls and max(calls.values()) == 1 and len(calls) == 2


def test_enrich_screen_labels_icons():
    provider = FixtureProvider({element_hash(ICONS.elements[1]): "share icon"}, "unknown icon")
    enriched = enrich_screen(ICONS, provider, DescriptionCache())
    got = [describe_event(e, enriched) for e in extract_events(enriched)]
    assert got == ["click 'share icon'", "click 'unknown icon'", "press back"]
