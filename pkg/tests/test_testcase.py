import json

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from sail.errors import PartitionError, SchemaError
from sail.testcase import (
    Skill, build_hierarchy, hierarchy_path_for, load_hierarchy, load_test_case, save_hierarchy,
    save_test_case, skill_events,
)
from sail.ui_model import Action


def clicks(n):
    return {"id": "t", "source_app": "app",
            "steps": [{"action": "click", "target": {"text": f"Step {i}"}} for i in range(n)]}


def test_three_click_document():
    tc = load_test_case(clicks(3))
    assert len(tc.steps) == 3
    assert all(s.event.action is Action.CLICK for s in tc.steps)
    assert tc.descriptions() == ["click 'Step 0'", "click 'Step 1'", "click 'Step 2'"]


def test_empty_steps_rejected():
    with pytest.raises(SchemaError) as info:
        load_test_case({"id": "t", "source_app": "a", "steps": []})
    assert "steps" in str(info.value)


def test_duplicate_field_rejected():
    with pytest.raises(SchemaError):
        load_test_case('{"id": "t", "id": "u", "source_app": "a", "steps": [{"action": "back"}]}')


@pytest.mark.parametrize("doc, where", [
    ({"id": "t", "source_app": "a", "steps": [{"action": "back"}], "extra": 1}, "extra"),
    ({"id": "t", "source_app": "a", "steps": [{"action": "click", "target": {"txt": "x"}}]}, "steps[0]"),
    ({"id": "t", "source_app": "a", "steps": [{"action": "fly"}]}, "steps[0]"),
    ({"id": "t", "source_app": "a", "steps": [{"action": "swipe", "direction": "sideways"}]}, "steps[0]"),
])
def test_schema_errors_name_the_path(doc, where):
    with pytest.raises(SchemaError) as info:
        load_test_case(doc)
    assert where in str(info.value)


def test_valid_partitions():
    tc = load_test_case(clicks(5))
    h = build_hierarchy(tc, "goal", [Skill("a", "", (0, 2)), Skill("b", "", (2, 5))])
    assert [s.name for s in h.skills] == ["a", "b"]
    one = build_hierarchy(tc, "goal", [Skill("all", "", (0, 5))])
    assert skill_events(one, one.skills[0]) == list(tc.steps)


@pytest.mark.parametrize("ranges, kind, position", [
    ([(0, 2), (3, 5)], "gap", 2),
    ([(0, 3), (2, 5)], "overlap", 2),
    ([(0, 2), (2, 6)], "out-of-range", 6),
    ([(0, 2), (2, 4)], "gap", 4),
    ([(0, 0), (0, 5)], "out-of-range", 0),
])
def test_partition_errors(ranges, kind, position):
    tc = load_test_case(clicks(5))
    with pytest.raises(PartitionError) as info:
        build_hierarchy(tc, "g", [Skill(str(i), "", r) for i, r in enumerate(ranges)])
    assert (info.value.kind, info.value.position) == (kind, position)


def test_empty_goal_rejected():
    with pytest.raises(SchemaError):
        build_hierarchy(load_test_case(clicks(1)), " ", [Skill("a", "", (0, 1))])


def test_skill_slices():
    tc = load_test_case(clicks(4))
    h = build_hierarchy(tc, "g", [Skill("a", "", (0, 1)), Skill("b", "", (1, 3)), Skill("c", "", (3, 4))])
    assert skill_events(h, h.skills[1]) == [tc.steps[1], tc.steps[2]]
    assert skill_events(h, h.skills[0]) == [tc.steps[0]]


def test_fixture_tests_round_trip_byte_identical():
    for path in sorted((FIXTURES / "tests").glob("*.json")):
        if path.name.endswith(".hierarchy.json"):
            continue
        text = path.read_text()
        tc = load_test_case(text)
        assert save_test_case(tc) == text, path.name
        assert load_test_case(save_test_case(tc)) == tc


def test_persisted_hierarchy():
    path = FIXTURES / "tests" / "abc_font_then_article.json"
    tc = load_test_case(path)
    side = hierarchy_path_for(path)
    h = load_hierarchy(side, tc)
    assert [s.name for s in h.skills] == ["Setting Font", "Open News"]
    assert [s.step_range for s in h.skills] == [(0, 4), (4, 7)]
    assert save_hierarchy(h) == side.read_text()


def test_hierarchy_bad_range_shape():
    tc = load_test_case(clicks(2))
    with pytest.raises(SchemaError):
        load_hierarchy({"goal": "g", "skills": [{"name": "a", "description": "", "range": [0]}]}, tc)


@st.composite
def partitions(draw):
    n = draw(st.integers(1, 30))
    cuts = sorted(draw(st.sets(st.integers(1, n - 1), max_size=n - 1))) if n > 1 else []
    bounds = list(zip([0] + cuts, cuts + [n]))
    return n, bounds


@given(partitions())
def test_partition_properties(case):
    n, bounds = case
    tc = load_test_case(clicks(n))
    h = build_hierarchy(tc, "g", [Skill(f"s{i}", "", b) for i, b in enumerate(bounds)])
    assert sum(s.hi - s.lo for s in h.skills) == n
    assert [step for s in h.skills for step in skill_events(h, s)] == list(tc.steps)
    doc = json.loads(save_hierarchy(h))
    assert load_hierarchy(doc, tc) == h


@given(partitions(), st.data())
def test_broken_partitions_rejected(case, data):
    n, bounds = case
    i = data.draw(st.integers(0, len(bounds) - 1))
    lo, hi = bounds[i]
    # shrink one skill from the right, leaving a hole (or an empty range)
    broken = bounds[:i] + [(lo, hi - 1)] + bounds[i + 1:]
    tc = load_test_case(clicks(n))
    with pytest.raises(PartitionError):
        build_hierarchy(tc, "g", [Skill(f"s{k}", "", b) for k, b in enumerate(broken)])
