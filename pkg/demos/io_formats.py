"""File formats: PNML nets with weight annotations, XES and CSV logs.

Run:  python demos/io_formats.py
"""

import tempfile
from pathlib import Path

from swnopt import (
    EventLog,
    LabeledPetriNet,
    StochasticWorkflowNet,
    log_language,
    parse_csv,
    parse_pnml,
    parse_xes,
    validate_workflow,
    write_pnml,
)
from swnopt.logs import write_csv, write_xes

net = LabeledPetriNet(
    places=("source", "mid", "sink"),
    transitions=("first", "skip", "second"),
    flow={
        ("source", "first"): 1,
        ("first", "mid"): 1,
        ("source", "skip"): 1,
        ("skip", "mid"): 1,
        ("mid", "second"): 1,
        ("second", "sink"): 1,
    },
    labeling={"first": "prepare", "skip": None, "second": "ship"},
    initial_marking={"source": 1},
)
wn = validate_workflow(net, "source", "sink")
swn = StochasticWorkflowNet(wn, {"first": 0.75, "skip": 0.25, "second": 1.0})

# weights ride inside each <transition> as
#   <toolspecific tool="stochastic-weights" version="1"><weight>0.75</weight></toolspecific>
pnml = write_pnml(swn)
print(pnml.decode()[:600], "...\n")

parsed = parse_pnml(pnml)
print("round trip weights:", parsed.weights)
print("inferred source/sink:", parsed.source, parsed.sink)

# logs: XES (trace/event with concept:name) and CSV (case, activity[, timestamp])
log = EventLog({("prepare", "ship"): 3, ("ship",): 1})
print("\nCSV form:\n" + write_csv(log))
assert parse_csv(write_csv(log), "case", "activity").entries == log.entries
assert parse_xes(write_xes(log)).entries == log.entries
print("stochastic language:", {("".join(t) or "<empty>"): p for t, p in log_language(log).probs.items()})

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "net.pnml"
    path.write_bytes(pnml)
    print("\nwrote", path)
    # equivalent conversions through the command line:
    #   swnopt convert --in log.csv --out log.xes
    #   swnopt convert --in net.pnml --out canonical.pnml
