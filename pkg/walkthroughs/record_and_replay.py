"""Record every reasoner decision of a migration, save it as JSONL, and
replay it offline: the replayed run performs the same events.

    python3 walkthroughs/record_and_replay.py [out_dir]
"""

import json
import sys
import tempfile
from importlib.resources import files
from pathlib import Path

from sail.planner import migrate_sail
from sail.reasoner import HeuristicReasoner, ReplayReasoner
from sail.sim import load_app, reset
from sail.testcase import hierarchy_path_for, load_hierarchy, load_test_case

FIX = files("sail") / "fixtures"
source_path = FIX / "tests" / "abc_font_then_article.json"
source = load_test_case(source_path)
hierarchy = load_hierarchy(hierarchy_path_for(source_path), source)
app = load_app(FIX / "apps" / "fox_news.json")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
recorded = migrate_sail(source, reset(app), HeuristicReasoner(), hierarchy=hierarchy)
recorded.save_report_dir(out)
print(f"recorded {len(recorded.transcript.kinds())} decisions into {out / 'transcript.jsonl'}")

lines = (out / "transcript.jsonl").read_text().splitlines()
replayed = migrate_sail(source, reset(app), ReplayReasoner([json.loads(x) for x in lines]),
                        hierarchy=hierarchy)
print("recorded:", recorded.descriptions())
print("replayed:", replayed.descriptions())
print("identical:", [e.to_doc() for e in recorded.events] == [e.to_doc() for e in replayed.events])
