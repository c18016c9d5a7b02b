"""Regenerate the bundled fixtures under src/sail/fixtures.

Every migration pair carries a reference solution on the target app. The
solution is replayed here to prove the pair is solvable, and the bounds of
its events become the oracle's ground-truth events.

Run from the repository root:  python3 tools/build_fixtures.py
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from sail.planner import replay_steps
from sail.sim import load_app, render_screen, reset
from sail.testcase import load_test_case
from sail.ui_model import extract_events, serialize_hierarchy

OUT = Path(__file__).resolve().parents[1] / "src" / "sail" / "fixtures"

W, H = 1080, 1920


# ------------------------------------------------------------ screen helpers

def _row(i: int) -> str:
    top = 200 + 160 * i
    return f"[40,{top}][1040,{top + 120}]"


def button(text, rid=None, **flags):
    node = {"class": "android.widget.Button", "text": text, "clickable": True}
    if rid:
        node["resource_id"] = rid
    node.update(flags)
    return node


def card(label, rid=None):
    """Clickable container whose caption lives in a bare child label."""
    node = {"class": "android.widget.LinearLayout", "clickable": True,
            "children": [{"class": "android.widget.TextView", "text": label}]}
    if rid:
        node["resource_id"] = rid
    return node


def field_(label, rid, shown=None):
    node = {"class": "android.widget.EditText", "content_desc": label, "resource_id": rid,
            "editable": True, "clickable": True}
    if shown:
        node["text"] = shown
    return node


def label(text):
    return {"class": "android.widget.TextView", "text": text}


def icon(rid, desc=None):
    node = {"class": "android.widget.ImageButton", "resource_id": rid, "clickable": True}
    if desc:
        node["content_desc"] = desc
    return node


def feed(rid, rows):
    return {"class": "androidx.recyclerview.widget.RecyclerView", "resource_id": rid,
            "scrollable": True, "rows": rows}


def _place(node, i):
    node = dict(node)
    rows = node.pop("rows", None)
    if rows is not None:
        top = 200 + 160 * i
        node["bounds"] = f"[0,{top}][{W},{top + 160 * len(rows)}]"
        node["children"] = [dict(r, bounds=_row(i + k)) for k, r in enumerate(rows)]
        return node, i + len(rows)
    node["bounds"] = _row(i)
    if "children" in node:
        node["children"] = [dict(c, bounds=_row(i)) for c in node["children"]]
    return node, i + 1


def screen(activity, *items, parent=None, title=None):
    kids, i = [], 0
    if title:
        kids.append({"class": "android.widget.TextView", "text": title, "bounds": f"[40,40][1040,160]"})
    for item in items:
        node, i = _place(item, i)
        kids.append(node)
    doc = {"activity": activity,
           "root": {"class": "android.widget.FrameLayout", "bounds": f"[0,0][{W},{H}]", "children": kids}}
    if parent:
        doc["parent"] = parent
    return doc


def as_xml(doc):
    """Same screen given as a dump string instead of an inline tree."""
    from sail.sim import _inline_node
    from sail.ui_model import UiScreen

    scr = UiScreen(doc["activity"], _inline_node(doc["root"], "$"))
    out = {"xml": serialize_hierarchy(scr)}
    if "parent" in doc:
        out["parent"] = doc["parent"]
    return out


def click(text, frm, to, **extra):
    rule = {"from": frm, "on": {"action": "click", "target": {"text": text}}, "to": to}
    rule.update(extra)
    return rule


def step(action, text=None, **kw):
    s = {"action": action}
    if text is not None:
        s["target"] = kw.pop("target", None) or {"text": text}
    s.update(kw)
    return s


def test(tid, app, *steps):
    return {"id": tid, "source_app": app, "steps": list(steps)}


# ------------------------------------------------------- news-reader apps

def abc_news():
    screens = {
        "home": screen("com.abc.news.HomeActivity", button("Menu", "menu_button"),
                       card("Read article: Markets rally", "story_1"), title="ABC News"),
        "menu": screen("com.abc.news.MenuActivity", button("Settings"), button("Bookmarks"),
                       parent="home"),
        "settings": screen("com.abc.news.SettingsActivity", card("Font size", "font_row"),
                           label("Current font: ${font_size}"), parent="menu"),
        "font_dialog": screen("com.abc.news.FontDialog", button("Small"), button("Large"),
                              parent="settings"),
        "article": screen("com.abc.news.ArticleActivity", label("Markets rally on rate news"),
                          icon("share_button"), parent="home"),
    }
    return {
        "id": "abc_news", "initial": "home", "variables": {"font_size": "small"},
        "screens": {k: as_xml(v) for k, v in screens.items()},
        "transitions": [
            click("Menu", "home", "menu"),
            click("Read article: Markets rally", "home", "article"),
            click("Settings", "menu", "settings"),
            click("Font size", "settings", "font_dialog"),
            click("Small", "font_dialog", "settings", effects={"font_size": "small"}),
            click("Large", "font_dialog", "settings", effects={"font_size": "large"}),
        ],
    }


ABC_TEST = test("abc_font_then_article", "abc_news",
                step("click", "Menu"), step("click", "Settings"), step("click", "Font size"),
                step("click", "Large"), step("back"), step("back"),
                step("click", "Read article: Markets rally"))

ABC_HIERARCHY = {
    "goal": "Enlarge the font, then open a news article",
    "skills": [
        {"name": "Setting Font", "description": "open settings and choose the large font", "range": [0, 4]},
        {"name": "Open News", "description": "return home and open an article", "range": [4, 7]},
    ],
}


def smart_news():
    return {
        "id": "smart_news", "initial": "home", "variables": {"font_size": "small"},
        "screens": {
            "home": screen("jp.smartnews.HomeActivity", button("Settings"), button("Top stories"),
                           title="SmartNews"),
            "settings": screen("jp.smartnews.SettingsActivity", card("Font size"),
                               label("Now: ${font_size}"), parent="home"),
            "font_dialog": screen("jp.smartnews.FontDialog", button("Small"), button("Large"),
                                  parent="settings"),
            "top_stories": screen("jp.smartnews.ChannelActivity",
                                  card("Read article: Markets rally"), card("Read article: Rain expected"),
                                  parent="home"),
            "article": screen("jp.smartnews.ArticleActivity", label("Markets rally"), parent="top_stories"),
        },
        "transitions": [
            click("Settings", "home", "settings"),
            click("Top stories", "home", "top_stories"),
            click("Font size", "settings", "font_dialog"),
            click("Small", "font_dialog", "settings", effects={"font_size": "small"}),
            click("Large", "font_dialog", "settings", effects={"font_size": "large"}),
            click("Read article: Markets rally", "top_stories", "article"),
            click("Read article: Rain expected", "top_stories", "article"),
        ],
    }


def fox_news():
    return {
        "id": "fox_news", "initial": "home", "variables": {"font_size": "small"},
        "screens": {
            "home": screen("com.foxnews.HomeActivity", button("Sections"),
                           card("Read article: Storm hits coast"), title="Fox News"),
            "sections": screen("com.foxnews.SectionsActivity", button("World"), button("Weather"),
                               parent="home"),
            "article": screen("com.foxnews.ArticleActivity", label("Storm hits coast"),
                              button("Font size", "font_button"), label("Text: ${font_size}"),
                              parent="home"),
            "font_dialog": screen("com.foxnews.FontDialog", button("Small"), button("Large"),
                                  parent="article"),
        },
        "transitions": [
            click("Sections", "home", "sections"),
            click("Read article: Storm hits coast", "home", "article"),
            click("Font size", "article", "font_dialog"),
            click("Small", "font_dialog", "article", effects={"font_size": "small"}),
            click("Large", "font_dialog", "article", effects={"font_size": "large"}),
        ],
    }


def font_oracle(tid, final, solution_steps):
    return tid, [{"kind": "state_equals", "var": "font_size", "value": "large"},
                 {"kind": "final_screen", "screen": final}], solution_steps


# ------------------------------------------------------------ plain (1-to-1)

def expedia_booking():
    app = {
        "id": "booking", "initial": "home", "variables": {"destination": ""},
        "screens": {
            "home": screen("com.booking.HomeActivity", button("Stays"), button("Flights"), title="Booking"),
            "search": screen("com.booking.SearchActivity", field_("Destination", "dest_input", "${destination}"),
                             button("Search"), parent="home"),
            "results": screen("com.booking.ResultsActivity", card("Hotel Lumiere Paris"),
                              card("Hotel du Nord"), parent="search"),
            "details": screen("com.booking.HotelActivity", label("Hotel Lumiere Paris"),
                              button("Reserve"), parent="results"),
        },
        "transitions": [
            click("Stays", "home", "search"),
            {"from": "search", "on": {"action": "input", "target": {"resource_id": "dest_input"}},
             "to": "search", "effects": {"destination": "${value}"}},
            click("Search", "search", "results", guard='destination!=""'),
            click("Hotel Lumiere Paris", "results", "details"),
        ],
    }
    src = test("expedia_hotel_search", "expedia",
               step("click", "Stays"),
               step("input", target={"resource_id": "location_field", "content_desc": "Destination"},
                    text="", value="Paris"),
               step("click", "Search"), step("click", "Hotel Lumiere Paris"))
    solution = [step("click", "Stays"),
                step("input", target={"resource_id": "dest_input"}, text="", value="Paris"),
                step("click", "Search"), step("click", "Hotel Lumiere Paris")]
    checks = [{"kind": "state_equals", "var": "destination", "value": "Paris"},
              {"kind": "final_screen", "screen": "details"}]
    return app, src, checks, solution


def notes_pair():
    app = {
        "id": "keep_notes", "initial": "list", "variables": {"draft": "", "saved": ""},
        "screens": {
            "list": screen("com.keep.NotesActivity", button("New note", "fab"), card("Groceries"),
                           title="Notes"),
            "editor": screen("com.keep.EditorActivity", field_("Title", "title_input", "${draft}"),
                             button("Save"), parent="list"),
        },
        "transitions": [
            click("New note", "list", "editor"),
            {"from": "editor", "on": {"action": "input", "target": {"resource_id": "title_input"}},
             "to": "editor", "effects": {"draft": "${value}"}},
            click("Save", "editor", "list", effects={"saved": "${draft}"}),
        ],
    }
    src = test("notes_add_title", "simple_notes", step("click", "New note"),
               step("input", target={"content_desc": "Title"}, text="", value="Milk"),
               step("click", "Save"))
    solution = [step("click", "New note"),
                step("input", target={"resource_id": "title_input"}, text="", value="Milk"),
                step("click", "Save")]
    checks = [{"kind": "state_equals", "var": "saved", "value": "Milk"},
              {"kind": "final_screen", "screen": "list"}]
    return app, src, checks, solution


def alarm_pair():
    app = {
        "id": "clock", "initial": "home", "variables": {"alarms": 0},
        "screens": {
            "home": screen("com.clock.MainActivity", button("Alarm"), button("Timer"), title="Clock"),
            "alarms": screen("com.clock.AlarmActivity", button("Add alarm"), label("${alarms} alarms"),
                             parent="home"),
            "editor": screen("com.clock.AlarmEditor", button("7:00 AM"), button("Save alarm"),
                             parent="alarms"),
        },
        "transitions": [
            click("Alarm", "home", "alarms"),
            click("Add alarm", "alarms", "editor"),
            click("Save alarm", "editor", "alarms", effects={"alarms": 1}),
        ],
    }
    src = test("clock_add_alarm", "alarm_clock", step("click", "Alarm"), step("click", "Add alarm"),
               step("click", "Save"))
    solution = [step("click", "Alarm"), step("click", "Add alarm"), step("click", "Save alarm")]
    checks = [{"kind": "state_equals", "var": "alarms", "value": 1},
              {"kind": "visited_screen", "screen": "editor"}]
    return app, src, checks, solution


def playlist_delete_pair():
    app = {
        "id": "music_player", "initial": "home", "variables": {"deleted": False},
        "screens": {
            "home": screen("com.music.HomeActivity", button("Library"), button("Radio"), title="Music"),
            "library": screen("com.music.LibraryActivity", button("Playlists"), button("Albums"),
                              parent="home"),
            "playlists": screen("com.music.PlaylistsActivity",
                                button("Road trip", long_clickable=True), button("Focus"),
                                parent="library"),
            "context": screen("com.music.PlaylistMenu", button("Rename"), button("Delete playlist"),
                              parent="playlists"),
        },
        "transitions": [
            click("Library", "home", "library"),
            click("Playlists", "library", "playlists"),
            {"from": "playlists", "on": {"action": "long_click", "target": {"text": "Road trip"}},
             "to": "context"},
            click("Delete playlist", "context", "playlists", effects={"deleted": True}),
        ],
    }
    src = test("music_delete_playlist", "music_app", step("click", "Library"), step("click", "Playlists"),
               step("long_click", "Road trip"), step("click", "Delete"))
    solution = [step("click", "Library"), step("click", "Playlists"), step("long_click", "Road trip"),
                step("click", "Delete playlist")]
    checks = [{"kind": "state_equals", "var": "deleted", "value": True},
              {"kind": "event_performed", "event": {"action": "long_click", "label": "Road trip"}}]
    return app, src, checks, solution


def signup_pair():
    # the submit button sits above the consent checkbox, so order matters
    app = {
        "id": "signup_form", "initial": "form", "variables": {"agreed": False, "registered": False},
        "screens": {
            "form": screen("com.acme.SignupActivity", button("Create account"), button("Agree to terms"),
                           label("Terms accepted: ${agreed}"), title="Sign up"),
            "welcome": screen("com.acme.WelcomeActivity", label("Welcome aboard"), parent="form"),
        },
        "transitions": [
            click("Agree to terms", "form", "form", effects={"agreed": True}),
            click("Create account", "form", "welcome", guard="agreed==true", effects={"registered": True}),
        ],
    }
    src = test("signup_accept_terms", "acme_web", step("click", "Agree to terms"),
               step("click", "Create account"))
    solution = [step("click", "Agree to terms"), step("click", "Create account")]
    checks = [{"kind": "state_equals", "var": "registered", "value": True},
              {"kind": "final_screen", "screen": "welcome"}]
    return app, src, checks, solution


def feed_pair():
    app = {
        "id": "daily_feed", "initial": "feed", "variables": {"page": 1},
        "screens": {
            "feed": screen("com.daily.FeedActivity",
                           feed("feed", [button("Story one"), button("Story two")]), title="Daily"),
            "more": screen("com.daily.FeedActivity", button("Older stories"), label("Page ${page}"),
                           parent="feed"),
            "archive": screen("com.daily.ArchiveActivity", label("Archive"), parent="more"),
        },
        "transitions": [
            {"from": "feed", "on": {"action": "swipe", "target": {"resource_id": "feed"}, "direction": "up"},
             "to": "more", "effects": {"page": 2}},
            click("Older stories", "more", "archive"),
        ],
    }
    src = test("feed_scroll_archive", "news_feed",
               step("swipe", target={"resource_id": "feed"}, text="", direction="up"),
               step("click", "Older stories"))
    solution = [step("swipe", target={"resource_id": "feed"}, text="", direction="up"),
                step("click", "Older stories")]
    checks = [{"kind": "final_screen", "screen": "archive"},
              {"kind": "state_equals", "var": "page", "value": 2}]
    return app, src, checks, solution


def synonym_pair():
    # same structure, different vocabulary: beyond a purely lexical reasoner
    app = {
        "id": "reader_c", "initial": "home", "variables": {"theme": "light"},
        "screens": {
            "home": screen("com.readerc.HomeActivity", button("Library"), button("Settings"), title="Reader C"),
            "library": screen("com.readerc.LibraryActivity", card("Moby Dick"), parent="home"),
            "settings": screen("com.readerc.SettingsActivity", button("Dark mode"), button("Font"),
                               label("Theme ${theme}"), parent="home"),
        },
        "transitions": [
            click("Library", "home", "library"),
            click("Settings", "home", "settings"),
            click("Dark mode", "settings", "settings", effects={"theme": "dark"}),
        ],
    }
    src = test("reader_night_theme", "reader_d", step("click", "Preferences"), step("click", "Night theme"))
    solution = [step("click", "Settings"), step("click", "Dark mode")]
    checks = [{"kind": "state_equals", "var": "theme", "value": "dark"}]
    return app, src, checks, solution


# -------------------------------------------------- extra event in the source

def tutorial_pair():
    app = {
        "id": "shop_b", "initial": "home", "variables": {"ordered": False},
        "screens": {
            "home": screen("com.shopb.HomeActivity", button("Tutorial"), button("Cart"), title="Shop"),
            "tutorial": screen("com.shopb.TutorialActivity", button("Next tip"), parent="home"),
            "cart": screen("com.shopb.CartActivity", label("2 items"), button("Checkout"), parent="home"),
            "done": screen("com.shopb.DoneActivity", label("Order placed"), parent="home"),
        },
        "transitions": [
            click("Tutorial", "home", "tutorial"),
            click("Next tip", "tutorial", "tutorial"),
            click("Cart", "home", "cart"),
            click("Checkout", "cart", "done", effects={"ordered": True}),
        ],
    }
    src = test("shop_checkout_skip_tutorial", "shop_a", step("click", "Skip tutorial"),
               step("click", "Cart"), step("click", "Checkout"))
    solution = [step("click", "Cart"), step("click", "Checkout")]
    checks = [{"kind": "state_equals", "var": "ordered", "value": True},
              {"kind": "final_screen", "screen": "done"}]
    return app, src, checks, solution


def cookies_pair():
    app = {
        "id": "portal_b", "initial": "home", "variables": {"user": ""},
        "screens": {
            "home": screen("com.portal.HomeActivity", button("Cookies settings"), button("Sign in"),
                           title="Portal"),
            "cookies": screen("com.portal.CookieActivity", button("Save preferences"), parent="home"),
            "login": screen("com.portal.LoginActivity", field_("Username", "user_input"),
                            button("Continue"), parent="home"),
            "account": screen("com.portal.AccountActivity", label("Hello ${user}"), parent="home"),
        },
        "transitions": [
            click("Cookies settings", "home", "cookies"),
            click("Save preferences", "cookies", "home"),
            click("Sign in", "home", "login"),
            {"from": "login", "on": {"action": "input", "target": {"resource_id": "user_input"}},
             "to": "login", "effects": {"user": "${value}"}},
            click("Continue", "login", "account", guard='user!=""'),
        ],
    }
    src = test("portal_sign_in", "portal_a", step("click", "Accept cookies"), step("click", "Sign in"),
               step("input", target={"content_desc": "Username"}, text="", value="alice"),
               step("click", "Continue"))
    solution = [step("click", "Sign in"),
                step("input", target={"resource_id": "user_input"}, text="", value="alice"),
                step("click", "Continue")]
    checks = [{"kind": "state_equals", "var": "user", "value": "alice"},
              {"kind": "final_screen", "screen": "account"}]
    return app, src, checks, solution


def rate_app_pair():
    app = {
        "id": "reader_b", "initial": "home", "variables": {"theme": "light"},
        "screens": {
            "home": screen("com.reader.HomeActivity", button("Menu"), button("Settings"), title="Reader"),
            "menu": screen("com.reader.MenuActivity", button("Help"), button("About"), parent="home"),
            "settings": screen("com.reader.SettingsActivity", button("Dark mode"), label("Theme ${theme}"),
                               parent="home"),
        },
        "transitions": [
            click("Menu", "home", "menu"),
            click("Settings", "home", "settings"),
            click("Dark mode", "settings", "settings", guard="theme==light", effects={"theme": "dark"}),
            click("Dark mode", "settings", "settings", guard="theme==dark", effects={"theme": "light"}),
        ],
    }
    src = test("reader_dark_mode", "reader_a", step("click", "Menu"), step("click", "Rate this app"),
               step("click", "Settings"), step("click", "Dark mode"))
    solution = [step("click", "Settings"), step("click", "Dark mode")]
    checks = [{"kind": "state_equals", "var": "theme", "value": "dark"},
              {"kind": "final_screen", "screen": "settings"}]
    return app, src, checks, solution


# ------------------------------------------------ missing event in the source

def sections_pair():
    app = {
        "id": "daily_times", "initial": "home", "variables": {},
        "screens": {
            "home": screen("com.times.HomeActivity", button("Search"), button("Sections"), title="Times"),
            "search": screen("com.times.SearchActivity", field_("Search", "query"), parent="home"),
            "sections": screen("com.times.SectionsActivity", button("Sports"), button("World news"),
                               parent="home"),
            "world": screen("com.times.ListActivity", card("Read article: Election results"),
                            parent="sections"),
            "article": screen("com.times.ArticleActivity", label("Election results"), parent="world"),
        },
        "transitions": [
            click("Search", "home", "search"),
            click("Sections", "home", "sections"),
            click("World news", "sections", "world"),
            click("Read article: Election results", "world", "article"),
        ],
    }
    src = test("times_world_article", "news_a", step("click", "World news"),
               step("click", "Read article: Election results"))
    solution = [step("click", "Sections"), step("click", "World news"),
                step("click", "Read article: Election results")]
    checks = [{"kind": "final_screen", "screen": "article"},
              {"kind": "visited_screen", "screen": "world"}]
    return app, src, checks, solution


def compose_pair():
    app = {
        "id": "chat_b", "initial": "home", "variables": {"draft": "", "sent": ""},
        "screens": {
            "home": screen("com.chatb.HomeActivity", button("Contacts"), button("Chats"), title="Chat"),
            "contacts": screen("com.chatb.ContactsActivity", card("Ann"), card("Ben"), parent="home"),
            "chats": screen("com.chatb.ChatsActivity", button("Compose"), parent="home"),
            "compose": screen("com.chatb.ComposeActivity", field_("Message", "msg_input", "${draft}"),
                              button("Send"), parent="chats"),
        },
        "transitions": [
            click("Contacts", "home", "contacts"),
            click("Chats", "home", "chats"),
            click("Compose", "chats", "compose"),
            {"from": "compose", "on": {"action": "input", "target": {"resource_id": "msg_input"}},
             "to": "compose", "effects": {"draft": "${value}"}},
            click("Send", "compose", "chats", guard='draft!=""', effects={"sent": "${draft}"}),
        ],
    }
    src = test("chat_send_message", "chat_a", step("click", "Compose"),
               step("input", target={"content_desc": "Message"}, text="", value="Hello"),
               step("click", "Send"))
    solution = [step("click", "Chats"), step("click", "Compose"),
                step("input", target={"resource_id": "msg_input"}, text="", value="Hello"),
                step("click", "Send")]
    checks = [{"kind": "state_equals", "var": "sent", "value": "Hello"},
              {"kind": "ordered", "before": {"action": "input", "value": "Hello"},
               "after": {"action": "click", "label": "Send"}}]
    return app, src, checks, solution


def notifications_pair():
    app = {
        "id": "settings_b", "initial": "home", "variables": {"muted": False},
        "screens": {
            "home": screen("com.setb.HomeActivity", button("Settings"), title="Phone"),
            "settings": screen("com.setb.SettingsActivity", button("Display"), button("Advanced"),
                               parent="home"),
            "display": screen("com.setb.DisplayActivity", button("Brightness"), parent="settings"),
            "advanced": screen("com.setb.AdvancedActivity", button("Notifications"), parent="settings"),
            "notifications": screen("com.setb.NotifActivity", button("Mute all"),
                                    label("Muted: ${muted}"), parent="advanced"),
        },
        "transitions": [
            click("Settings", "home", "settings"),
            click("Display", "settings", "display"),
            click("Advanced", "settings", "advanced"),
            click("Notifications", "advanced", "notifications"),
            click("Mute all", "notifications", "notifications", effects={"muted": True}),
        ],
    }
    src = test("phone_mute_notifications", "phone_a", step("click", "Settings"),
               step("click", "Notifications"), step("click", "Mute all"))
    solution = [step("click", "Settings"), step("click", "Advanced"), step("click", "Notifications"),
                step("click", "Mute all")]
    checks = [{"kind": "state_equals", "var": "muted", "value": True},
              {"kind": "max_events", "n": 15}]
    return app, src, checks, solution


# ----------------------------------------------------------- reversed order

def currency_pair():
    app = {
        "id": "shop_c", "initial": "home", "variables": {"currency": "USD"},
        "screens": {
            "home": screen("com.shopc.HomeActivity", button("Deals"), button("Open cart"), title="Shop C"),
            "deals": screen("com.shopc.DealsActivity", card("Lamp 20% off"), parent="home"),
            "cart": screen("com.shopc.CartActivity", label("Total in ${currency}"), button("Currency"),
                           parent="home"),
            "currency": screen("com.shopc.CurrencyDialog", button("USD"), button("EUR"), parent="cart"),
        },
        "transitions": [
            click("Deals", "home", "deals"),
            click("Open cart", "home", "cart"),
            click("Currency", "cart", "currency"),
            click("USD", "currency", "cart", effects={"currency": "USD"}),
            click("EUR", "currency", "cart", effects={"currency": "EUR"}),
        ],
    }
    src = test("shop_currency_then_cart", "shop_d", step("click", "Settings"), step("click", "Currency"),
               step("click", "EUR"), step("back"), step("back"), step("click", "Open cart"))
    solution = [step("click", "Open cart"), step("click", "Currency"), step("click", "EUR")]
    checks = [{"kind": "state_equals", "var": "currency", "value": "EUR"},
              {"kind": "final_screen", "screen": "cart"}]
    return app, src, checks, solution


def playlist_pair():
    app = {
        "id": "tunes", "initial": "home", "variables": {"draft": "", "playlist": ""},
        "screens": {
            "home": screen("com.tunes.HomeActivity", button("Browse"), button("Now playing"), title="Tunes"),
            "browse": screen("com.tunes.BrowseActivity", card("Charts"), parent="home"),
            "player": screen("com.tunes.PlayerActivity", label("Song title"),
                             button("Add to new playlist"), label("In: ${playlist}"), parent="home"),
            "dialog": screen("com.tunes.NewPlaylistDialog", field_("Playlist name", "name_input", "${draft}"),
                             button("Create"), parent="player"),
        },
        "transitions": [
            click("Browse", "home", "browse"),
            click("Now playing", "home", "player"),
            click("Add to new playlist", "player", "dialog"),
            {"from": "dialog", "on": {"action": "input", "target": {"resource_id": "name_input"}},
             "to": "dialog", "effects": {"draft": "${value}"}},
            click("Create", "dialog", "player", guard='draft!=""', effects={"playlist": "${draft}"}),
        ],
    }
    src = test("music_playlist_then_play", "music_b", step("click", "Playlists"),
               step("click", "Create playlist"),
               step("input", target={"content_desc": "Playlist name"}, text="", value="Gym"),
               step("click", "Create"), step("back"), step("back"), step("click", "Now playing"))
    solution = [step("click", "Now playing"), step("click", "Add to new playlist"),
                step("input", target={"resource_id": "name_input"}, text="", value="Gym"),
                step("click", "Create")]
    checks = [{"kind": "state_equals", "var": "playlist", "value": "Gym"},
              {"kind": "final_screen", "screen": "player"}]
    return app, src, checks, solution


# ------------------------------------------------- the URL-ordering example

def browser_app():
    return {
        "id": "browser", "initial": "tab", "variables": {"history": ""},
        "screens": {
            "tab": screen("org.browser.TabActivity", field_("Address bar", "url_bar"), button("Go"),
                          label("Visited: ${history}"), title="Browser"),
        },
        "transitions": [
            {"from": "tab", "on": {"action": "input", "target": {"resource_id": "url_bar"}, "value": ".+"},
             "to": "tab", "effects": {"history": "${history} ${value}"}},
        ],
    }


URL_TRUTH_TEST = test("open_two_pages", "browser",
                      step("input", target={"resource_id": "url_bar"}, text="", value="a.example.com"),
                      step("input", target={"resource_id": "url_bar"}, text="", value="b.example.com"))
URL_WRONG_ORDER = test("open_two_pages_swapped", "browser",
                       step("input", target={"resource_id": "url_bar"}, text="", value="b.example.com"),
                       step("input", target={"resource_id": "url_bar"}, text="", value="a.example.com"))
URL_CHECKS = [{"kind": "ordered",
               "before": {"action": "input", "value": "a\\.example\\.com"},
               "after": {"action": "input", "value": "b\\.example\\.com"}}]


# ------------------------------------------------------------------- dumps

HAND_DUMPS = {
    "settings_real.xml": """<?xml version="1.0" encoding="UTF-8"?>
<hierarchy rotation="0" activity="com.android.settings.Settings">
  <node index="0" class="android.widget.FrameLayout" package="com.android.settings" bounds="[0,0][1080,1920]" enabled="true">
    <node index="0" class="android.widget.LinearLayout" resource-id="com.android.settings:id/dashboard_tile" bounds="[0,210][1080,378]" clickable="true" enabled="true" focusable="true">
      <node index="0" class="android.widget.TextView" resource-id="android:id/title" text="Display" bounds="[189,231][380,288]" enabled="true"/>
      <node index="1" class="android.widget.TextView" resource-id="android:id/summary" text="Wallpaper, sleep, font size" bounds="[189,288][650,336]" enabled="true"/>
    </node>
    <node index="1" class="android.widget.ImageButton" resource-id="com.android.settings:id/search_action" bounds="[944,63][1080,189]" clickable="true" long-clickable="true" enabled="true"/>
    <node index="2" class="android.widget.ScrollView" resource-id="com.android.settings:id/main_content" bounds="[0,378][1080,1920]" scrollable="true" enabled="true">
      <node index="0" class="android.widget.Switch" text="Wi-Fi" bounds="[30,400][1050,520]" clickable="true" enabled="true"/>
      <node index="1" class="android.widget.Button" text="Disabled thing" bounds="[30,540][1050,660]" clickable="true" enabled="false"/>
      <node index="2" class="android.widget.EditText" content-desc="Search settings" bounds="[30,680][1050,800]" clickable="true" editable="true" enabled="true"/>
      <node index="3" class="android.view.View" text="Overflowing label" bounds="[0,1800][1080,2000]" enabled="true"/>
    </node>
  </node>
</hierarchy>
""",
    "icon_only.xml": """<hierarchy activity="com.example.Gallery">
  <node class="android.widget.FrameLayout" bounds="[0,0][720,1280]" enabled="true">
    <node class="android.widget.ImageButton" resource-id="com.example:id/share" bounds="[600,40][700,140]" clickable="true" enabled="true"/>
    <node class="android.widget.ImageButton" bounds="[480,40][580,140]" clickable="true" enabled="true"/>
    <node class="android.widget.ImageView" content-desc="Photo of a beach" bounds="[0,160][720,1100]" enabled="true"/>
  </node>
</hierarchy>
""",
    "no_activity.xml": """<hierarchy>
  <node class="android.widget.TextView" text="Loading &amp; waiting" bounds="[0,0][10,10]" enabled="true"/>
</hierarchy>
""",
}

MALFORMED = {
    "unclosed_node.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"[0,0][1,1]\">\n</hierarchy>\n", 3),
    "bad_bounds_syntax.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"0,0,10,10\"/>\n</hierarchy>\n", 2),
    "inverted_bounds.xml": ("<hierarchy activity=\"a\">\n\n  <node class=\"x\" bounds=\"[30,10][10,10]\"/>\n</hierarchy>\n", 3),
    "negative_bounds.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"[-5,0][10,10]\"/>\n</hierarchy>\n", 2),
    "missing_bounds.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\"/>\n</hierarchy>\n", 2),
    "empty_hierarchy.xml": ("<hierarchy/>\n", 1),
    "bad_boolean.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"[0,0][1,1]\" clickable=\"yes\"/>\n</hierarchy>\n", 2),
    "wrong_root.xml": ("<screen>\n  <node class=\"x\" bounds=\"[0,0][1,1]\"/>\n</screen>\n", 1),
    "two_roots.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"[0,0][1,1]\"/>\n  <node class=\"y\" bounds=\"[0,0][1,1]\"/>\n</hierarchy>\n", 3),
    "not_xml.xml": ("this is not a dump\n", 1),
    "stray_tag.xml": ("<hierarchy activity=\"a\">\n  <node class=\"x\" bounds=\"[0,0][1,1]\">\n    <div/>\n  </node>\n</hierarchy>\n", 3),
}


# ------------------------------------------------------------------ writing

def _write(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(doc, str):
        path.write_text(doc, encoding="utf-8")
    else:
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _fix_steps(steps):
    """Drop the helper's empty ``text`` placeholder for explicit targets."""
    return [{k: v for k, v in s.items() if k != "text"} for s in steps]


def _truth_events(app_doc, solution, tid):
    app = load_app(app_doc)
    case = load_test_case({"id": tid, "source_app": app.id, "steps": _fix_steps(solution)})
    trace = replay_steps(case, reset(app))
    if trace.outcome != "goal_reached":
        raise SystemExit(f"reference solution for {tid} failed: {trace.detail}")
    return [{"action": e.event.action.value, **({"bounds": str(e.bounds)} if e.bounds else {})}
            for e in trace.events], trace


def main() -> None:
    if OUT.exists():
        shutil.rmtree(OUT)
    apps, pairs = {}, []

    def add_pair(pid, src, app_doc, checks, solution, mapping, taxonomy, hierarchy=None):
        apps[app_doc["id"]] = app_doc
        src = dict(src, steps=_fix_steps(src["steps"]))
        _write(OUT / "tests" / f"{src['id']}.json", src)
        if hierarchy:
            _write(OUT / "tests" / f"{src['id']}.hierarchy.json", hierarchy)
        truth, trace = _truth_events(app_doc, solution, pid)
        from sail.bench import judge, load_oracle
        oracle = {"test_id": src["id"], "checks": checks, "truth_events": truth}
        verdict = judge(load_oracle(oracle), trace, trace.final_state, load_app(app_doc))
        if not verdict.passed:
            raise SystemExit(f"reference solution for {pid} fails its oracle: {verdict.failed_check}")
        _write(OUT / "oracles" / f"{pid}.json", oracle)
        pairs.append({"id": pid, "source_test": f"tests/{src['id']}.json",
                      "target_app": f"apps/{app_doc['id']}.json", "oracle": f"oracles/{pid}.json",
                      "mapping": mapping, "taxonomy": taxonomy})

    abc = abc_news()
    apps["abc_news"] = abc
    abc_solution = ABC_TEST["steps"]
    add_pair("abc_to_smart", ABC_TEST, smart_news(),
             [{"kind": "state_equals", "var": "font_size", "value": "large"},
              {"kind": "final_screen", "screen": "article"}],
             [step("click", "Settings"), step("click", "Font size"), step("click", "Large"), step("back"),
              step("click", "Top stories"), step("click", "Read article: Markets rally")],
             "non1to1", "missing", ABC_HIERARCHY)
    add_pair("abc_to_fox", ABC_TEST, fox_news(),
             [{"kind": "state_equals", "var": "font_size", "value": "large"},
              {"kind": "final_screen", "screen": "article"}],
             [step("click", "Read article: Storm hits coast"), step("click", "Font size"),
              step("click", "Large")],
             "non1to1", "reversed", ABC_HIERARCHY)
    # identity pair: the source test on its own app
    _truth_events(abc, abc_solution, "abc_identity")

    for pid, maker in (("expedia_to_booking", expedia_booking), ("notes", notes_pair),
                       ("clock", alarm_pair), ("music_delete", playlist_delete_pair),
                       ("signup", signup_pair), ("feed", feed_pair), ("reader_synonyms", synonym_pair)):
        app, src, checks, sol = maker()
        add_pair(pid, src, app, checks, sol, "1to1", "plain")
    for pid, maker in (("shop_tutorial", tutorial_pair), ("portal_cookies", cookies_pair),
                       ("reader_rate", rate_app_pair)):
        app, src, checks, sol = maker()
        add_pair(pid, src, app, checks, sol, "non1to1", "extra")
    for pid, maker in (("times_sections", sections_pair), ("chat_compose", compose_pair),
                       ("phone_notifications", notifications_pair)):
        app, src, checks, sol = maker()
        add_pair(pid, src, app, checks, sol, "non1to1", "missing")
    for pid, maker in (("shop_currency", currency_pair), ("tunes_playlist", playlist_pair)):
        app, src, checks, sol = maker()
        add_pair(pid, src, app, checks, sol, "non1to1", "reversed")

    for aid, doc in apps.items():
        _write(OUT / "apps" / f"{aid}.json", doc)
    _write(OUT / "suite.json", {"pairs": pairs})
    _write(OUT / "suite_news.json", {"pairs": [p for p in pairs if p["id"].startswith("abc_")]})
    _write(OUT / "suite_single.json", {"pairs": [pairs[1]]})

    # URL-ordering counterexample
    browser = browser_app()
    truth, _ = _truth_events(browser, URL_TRUTH_TEST["steps"], "url")
    cx = OUT / "counterexample"
    _write(cx / "browser.json", browser)
    _write(cx / "open_two_pages.json", dict(URL_TRUTH_TEST, steps=_fix_steps(URL_TRUTH_TEST["steps"])))
    _write(cx / "swapped_trace_steps.json", dict(URL_WRONG_ORDER, steps=_fix_steps(URL_WRONG_ORDER["steps"])))
    _write(cx / "oracle.json", {"test_id": "open_two_pages", "checks": URL_CHECKS, "truth_events": truth})

    # dumps: every rendered app screen plus hand-written ones
    for aid, doc in sorted({**apps, "browser": browser}.items()):
        app = load_app(doc)
        for sid, template in app.screens.items():
            text = serialize_hierarchy(render_screen(template, app.variables))
            _write(OUT / "dumps" / f"{aid}__{sid}.xml", text)
    for name, text in HAND_DUMPS.items():
        _write(OUT / "dumps" / name, text)
    expected = {}
    for name, (text, line) in MALFORMED.items():
        _write(OUT / "dumps" / "malformed" / name, text)
        expected[name] = line
    _write(OUT / "dumps" / "malformed" / "expected_lines.json", expected)

    _write(OUT / "match" / "dataset.json", build_match_dataset(apps))
    print(f"wrote {len(pairs)} pairs, {len(apps)} apps to {OUT}")


def build_match_dataset(apps):
    """One query per (source step, target screen) from the 1-to-1 and news-reader pairs."""
    cases = [
        ("smart_news", "home", step("click", "Menu"), "Settings"),
        ("smart_news", "settings", step("click", "Font size"), "Font size"),
        ("smart_news", "font_dialog", step("click", "Large"), "Large"),
        ("fox_news", "home", step("click", "Read article: Markets rally"), "Read article: Storm hits coast"),
        ("fox_news", "article", step("click", "Font size"), "Font size"),
        ("booking", "home", step("click", "Stays"), "Stays"),
        ("booking", "search", step("click", "Search"), "Search"),
        ("booking", "results", step("click", "Hotel Lumiere Paris"), "Hotel Lumiere Paris"),
        ("keep_notes", "list", step("click", "New note"), "New note"),
        ("clock", "editor", step("click", "Save"), "Save alarm"),
        ("music_player", "context", step("click", "Delete"), "Delete playlist"),
        ("shop_b", "home", step("click", "Skip tutorial"), "Cart"),
        ("reader_b", "home", step("click", "Preferences"), "Settings"),
        ("chat_b", "home", step("click", "Compose"), "Chats"),
    ]
    queries = []
    for aid, sid, src, truth_text in cases:
        app = load_app(apps[aid])
        scr = render_screen(app.screens[sid], app.variables)
        cands, truth = [], None
        for ev in extract_events(scr):
            doc = {"action": ev.action.value}
            if ev.target is not None:
                i = scr.resolve(ev.target)
                el = scr.elements[i]
                tgt = {k: v for k, v in (("text", scr.label(i)), ("resource_id", el.resource_id),
                                         ("class_role", el.class_role)) if v}
                doc["target"] = tgt
                doc["bounds"] = str(el.bounds)
                if scr.label(i) == truth_text:
                    truth = str(el.bounds)
            else:
                continue  # back has no element to locate
            cands.append(doc)
        queries.append({"source": src, "candidates": cands, "truth_bounds": truth})
    return {"queries": queries}


if __name__ == "__main__":
    main()
