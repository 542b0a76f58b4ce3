"""
Rule-triggered protection and batching
======================================

A rule only fires once its prefix has been typed, so in immediate mode the
prefix itself reaches the keylogger.  Holding keystrokes in a small batch
lets the rule fire before any of them are released.
"""

from keyguard.report import format_ratio
from keyguard.scenario import parse_scenario
from keyguard.simulation import run

base = {
    "fields": [{"id": "notes", "input_class": "plain"}],
    "rules": [{"id": "card", "prefix": "abc", "total_length": 8}],
    "key_hex": b"Key".hex(),
    "adversary": "collude",
    "trace": [{"field": "notes", "text": "abcde123"}],
}

for batching in ("off", "count:1", "count:2", "count:4", "time:40"):
    r = run(parse_scenario({**base, "batching": batching}))
    seen = "".join(e.observed.char for e in r.captured.entries)
    print(f"{batching:8s} logger saw {seen!r:12s} exposed {format_ratio(r.leakage.overall)}")
