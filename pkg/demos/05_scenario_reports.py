"""
Scenario files and reports
==========================

Scenarios live in YAML.  The same report the command line prints can be
built in code, and the machine form is byte-stable across runs.
"""

from pathlib import Path

from keyguard.cli import run_scenario
from keyguard.report import emit_report

here = Path(__file__).parent / "scenarios"
for path in sorted(here.glob("*.yaml")):
    report, code = run_scenario(path, paired_baseline=True)
    print(emit_report(report, "text").decode())

a = emit_report(run_scenario(here / "login.yaml")[0], "machine")
b = emit_report(run_scenario(here / "login.yaml")[0], "machine")
print("machine reports identical:", a == b)
