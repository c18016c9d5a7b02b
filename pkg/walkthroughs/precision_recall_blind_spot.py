"""Two URL inputs performed in swapped order hit exactly the ground-truth
widgets, so step-level precision and recall are perfect, yet the browser ends
up on the wrong page and the functional oracle fails.

    python3 walkthroughs/precision_recall_blind_spot.py
"""

from importlib.resources import files

from sail.bench import classify_trace, judge, load_oracle, precision_recall
from sail.planner import replay_steps
from sail.sim import load_app, reset
from sail.testcase import load_test_case

CX = files("sail") / "fixtures" / "counterexample"
session = reset(load_app(CX / "browser.json"))
trace = replay_steps(load_test_case(CX / "swapped_trace_steps.json"), session)
oracle = load_oracle(CX / "oracle.json")

print(trace.summary(), end="")
counts = classify_trace(trace, oracle.truth_events)
p, r, f1 = precision_recall(counts)
print(f"TP={counts.tp} FP={counts.fp} FN={counts.fn}  precision={p} recall={r} F1={f1}")
print("functional oracle:", judge(oracle, trace, session.snapshot()))
print("final state:", session.snapshot()["variables"])
