"""Migrate the 'change font, then open an article' news test onto an app
where the font setting lives inside the article view.

The sequential matcher follows the source order and never finds the font
control; the skill-adaptive planner opens the article first and then sets
the font.

    python3 walkthroughs/reordered_skills.py
"""

from importlib.resources import files

from sail.bench import judge, load_oracle
from sail.planner import migrate
from sail.reasoner import HeuristicReasoner
from sail.sim import load_app, reset
from sail.testcase import hierarchy_path_for, load_hierarchy, load_test_case

FIX = files("sail") / "fixtures"
source_path = FIX / "tests" / "abc_font_then_article.json"
source = load_test_case(source_path)
hierarchy = load_hierarchy(hierarchy_path_for(source_path), source)

print("source test:")
for step in source.descriptions():
    print("   ", step)
print("authored skills:", [s.name for s in hierarchy.skills])

for target in ("smart_news", "fox_news"):
    oracle = load_oracle(FIX / "oracles" / f"abc_to_{target.split('_')[0]}.json")
    for planner in ("matcher", "sail"):
        session = reset(load_app(FIX / "apps" / f"{target}.json"))
        reasoner = None if planner == "matcher" else HeuristicReasoner()
        trace = migrate(planner, source, session, reasoner, hierarchy=hierarchy)
        verdict = judge(oracle, trace, session.snapshot())
        print(f"\n== {planner} on {target}: {trace.outcome}, oracle {verdict}")
        print(trace.summary(), end="")
