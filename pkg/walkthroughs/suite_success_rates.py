"""Run every planner over the bundled suite and print Success Rate split by
whether source and target events map one-to-one.

    python3 walkthroughs/suite_success_rates.py [jobs]
"""

import sys
from importlib.resources import files

from sail.bench import run_suite

jobs = int(sys.argv[1]) if len(sys.argv) > 1 else 4
report = run_suite(files("sail") / "fixtures" / "suite.json",
                   ["sail", "target", "trace", "matcher"], ["heuristic"], jobs=jobs)
print(report.to_markdown())

failing = sorted({r.pair.id for r in report.results if not r.verdict.passed and r.approach == "sail/heuristic"})
print("pairs the skill-adaptive planner still fails:", ", ".join(failing) or "none")
