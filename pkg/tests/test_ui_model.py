import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES, dump, node
from sail.errors import MalformedDump, UnresolvedTarget
from sail.ui_model import (
    Action, Bounds, ElementRef, UiEvent, center_in_bounds, describe_event, element_hash,
    extract_events, parse_hierarchy, serialize_hierarchy,
)

DUMPS = sorted(p for p in (FIXTURES / "dumps").glob("*.xml"))


def test_single_clickable_node():
    screen = parse_hierarchy(dump(node("Settings", clickable="true", enabled="true")))
    assert len(screen.elements) == 1
    el = screen.elements[0]
    assert el.clickable and el.text == "Settings" and el.bounds == Bounds(0, 0, 100, 50)
    assert el.resource_id is None and el.content_desc is None


def test_missing_booleans_default_false_and_activity_defaults():
    screen = parse_hierarchy("<hierarchy>" + node("x") + "</hierarchy>")
    el = screen.elements[0]
    assert screen.activity == "unknown"
    assert not any((el.clickable, el.long_clickable, el.scrollable, el.editable, el.enabled))


def test_unknown_attributes_ignored():
    screen = parse_hierarchy(dump(node("x", package="com.x", checked="true")))
    assert screen.elements[0].text == "x"


@pytest.mark.parametrize("text", ["<hierarchy/>", '<hierarchy activity="a"></hierarchy>'])
def test_empty_root_rejected(text):
    with pytest.raises(MalformedDump):
        parse_hierarchy(text)


def test_inverted_bounds_rejected_with_position():
    with pytest.raises(MalformedDump) as info:
        parse_hierarchy(dump(node("x", bounds="[30,10][10,10]")))
    assert info.value.line == 1 and info.value.column is not None


def test_malformed_corpus_lines():
    import json
    folder = FIXTURES / "dumps" / "malformed"
    expected = json.loads((folder / "expected_lines.json").read_text())
    assert len(expected) >= 10
    for name, line in expected.items():
        with pytest.raises(MalformedDump) as info:
            parse_hierarchy((folder / name).read_text())
        assert info.value.line == line, name


def test_extract_single_button():
    screen = parse_hierarchy(dump(node("Save", clickable="true", enabled="true")))
    events = extract_events(screen)
    assert [e.action for e in events] == [Action.CLICK, Action.BACK]
    assert describe_event(events[0], screen) == "click 'Save'"


def test_container_absorbs_bare_label():
    label = node("Font size", cls="android.widget.TextView", bounds="[10,10][90,40]")
    screen = parse_hierarchy(dump(node(None, cls="android.widget.LinearLayout", clickable="true",
                                       enabled="true", children=label)))
    events = extract_events(screen)
    assert len(events) == 2
    assert "Font size" in describe_event(events[0], screen)


def test_label_outside_container_bounds_not_absorbed():
    label = node("Far away", cls="android.widget.TextView", bounds="[200,200][300,300]")
    screen = parse_hierarchy(dump(node(None, cls="android.widget.LinearLayout", clickable="true",
                                       enabled="true", children=label)))
    assert "Far away" not in describe_event(extract_events(screen)[0], screen)


def test_no_interactables_yields_back_only():
    screen = parse_hierarchy(dump(node("label", cls="android.widget.TextView", enabled="true")))
    assert extract_events(screen) == [UiEvent.back()]


def test_disabled_elements_yield_no_events():
    screen = parse_hierarchy(dump(node("Off", clickable="true", enabled="false")))
    assert extract_events(screen) == [UiEvent.back()]


def test_all_action_kinds_in_document_order():
    screen = parse_hierarchy(dump(
        node(None, cls="android.widget.ScrollView", bounds="[0,0][500,500]", scrollable="true",
             enabled="true", children=node("Row", bounds="[0,0][500,100]", clickable="true",
                                           long_clickable="true", enabled="true")),
        node(None, cls="android.widget.EditText", bounds="[0,600][500,700]", editable="true",
             enabled="true"),
    ))
    actions = [e.action for e in extract_events(screen)]
    assert actions == [Action.SWIPE, Action.CLICK, Action.LONG_CLICK, Action.INPUT, Action.BACK]


def test_element_hash_properties():
    a = parse_hierarchy(dump(node("Share", clickable="true"))).elements[0]
    b = parse_hierarchy(dump(node("Send", clickable="true"))).elements[0]
    moved = parse_hierarchy(dump(node("Share", bounds="[300,300][400,350]", clickable="true"))).elements[0]
    assert element_hash(a) == element_hash(a)
    assert element_hash(a) != element_hash(b)
    assert element_hash(a) == element_hash(moved)
    int(element_hash(a), 16)


def test_element_hash_no_collisions_in_corpus():
    seen = {}
    for path in DUMPS:
        screen = parse_hierarchy(path.read_text())
        for el in screen.elements:
            h = element_hash(el)
            # structurally identical elements may share a hash; anything else may not
            key = (el.class_role, el.resource_id, el.bounds.width, el.bounds.height,
                   tuple(sorted(n.text for n in el.iter() if n.text)))
            assert seen.setdefault(h, key) == key


@pytest.mark.parametrize("cand, expected", [
    (Bounds(10, 10, 30, 30), True),
    (Bounds(90, 40, 110, 60), True),
    (Bounds(200, 200, 220, 220), False),
])
def test_center_in_bounds_cases(cand, expected):
    assert center_in_bounds(cand, Bounds(0, 0, 100, 100)) is expected


def test_center_rounds_toward_zero():
    # center (50, 50) from [0,0][101,101]; truth ending at 50 still contains it
    assert center_in_bounds(Bounds(0, 0, 101, 101), Bounds(0, 0, 50, 50))


def test_describe_templates():
    screen = parse_hierarchy(dump(
        node("Sign in", clickable="true", enabled="true"),
        node(None, cls="android.widget.EditText", bounds="[0,60][100,90]", editable="true",
             enabled="true", **{"resource-id": "com.app:id/search_box"}),
    ))
    assert describe_event(UiEvent(Action.CLICK, ElementRef(text="Sign in")), screen) == "click 'Sign in'"
    assert describe_event(UiEvent.back(), screen) == "press back"
    typed = UiEvent(Action.INPUT, ElementRef(resource_id="search_box"), "hello")
    assert describe_event(typed, screen) == "type 'hello' into 'search_box'"
    with pytest.raises(UnresolvedTarget):
        describe_event(UiEvent(Action.CLICK, ElementRef(text="Nope")), screen)


def test_description_priority():
    screen = parse_hierarchy(dump(
        node("T", clickable="true", enabled="true", content_desc="C"),
        node(None, bounds="[0,60][100,90]", clickable="true", enabled="true", content_desc="C"),
        node(None, bounds="[0,100][100,130]", clickable="true", enabled="true",
             **{"resource-id": "com.app:id/go"}),
        node(None, bounds="[0,140][100,170]", clickable="true", enabled="true"),
    ))
    got = [describe_event(e, screen) for e in extract_events(screen)[:4]]
    assert got == ["click 'T'", "click 'C'", "click 'go'", "click 'Button'"]


@pytest.mark.parametrize("path", DUMPS, ids=lambda p: p.name)
def test_round_trip_idempotent(path):
    first = parse_hierarchy(path.read_text())
    again = parse_hierarchy(serialize_hierarchy(first))
    assert again == first
    assert serialize_hierarchy(again) == serialize_hierarchy(first)


def test_extracted_inputs_target_editable_elements():
    for path in DUMPS:
        screen = parse_hierarchy(path.read_text())
        for e in extract_events(screen):
            if e.action is Action.INPUT:
                assert screen.elements[screen.resolve(e.target)].editable


coord = st.integers(0, 2000)


@st.composite
def boxes(draw):
    x1, x2 = sorted((draw(coord), draw(coord)))
    y1, y2 = sorted((draw(coord), draw(coord)))
    return Bounds(x1, y1, x2, y2)


@given(boxes())
def test_box_contains_own_center(b):
    assert center_in_bounds(b, b)


@given(boxes(), boxes(), st.integers(0, 500), st.integers(0, 500))
def test_center_translation_invariance(cand, truth, dx, dy):
    # even shifts keep the truncated midpoint aligned with the shifted box
    dx, dy = 2 * dx, 2 * dy
    move = lambda b: Bounds(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy)
    assert center_in_bounds(cand, truth) == center_in_bounds(move(cand), move(truth))


@given(boxes())
def test_bounds_text_round_trip(b):
    assert Bounds.parse(str(b)) == b
    assert str(b) == f"[{b.x1},{b.y1}][{b.x2},{b.y2}]"


texts = st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=12)


@given(st.lists(st.tuples(texts, st.booleans(), st.booleans()), min_size=1, max_size=6))
def test_round_trip_generated(rows):
    nodes = []
    for i, (text, click, editable) in enumerate(rows):
        nodes.append((text, click, editable, f"[0,{i * 10}][100,{i * 10 + 9}]"))
    from sail.ui_model import UiElement, UiScreen
    kids = tuple(UiElement("android.widget.TextView", Bounds.parse(b), text=t or None, clickable=c,
                           editable=e, enabled=True) for t, c, e, b in nodes)
    screen = UiScreen("gen.Activity", UiElement("android.widget.FrameLayout", Bounds(0, 0, 100, 100),
                                                 children=kids, enabled=True))
    reparsed = parse_hierarchy(serialize_hierarchy(screen))
    assert reparsed.root == screen.root
