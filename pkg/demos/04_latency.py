"""
What the hooks cost
===================

Hooked and unhooked runs are interleaved and timed per dispatch.  The
figure that matters is the added mean per keystroke.
"""

from pathlib import Path

from keyguard.analysis import run_latency_bench
from keyguard.scenario import load_scenario

s = load_scenario(Path(__file__).parent / "scenarios" / "typing_session.yaml")
stats = run_latency_bench(s, 20)
for point, lat in stats.points.items():
    print(
        f"{point.value:18s} hooked {lat.hooked.mean_us:7.2f} us (p95 {lat.hooked.p95_us:7.2f}) "
        f"baseline {lat.baseline.mean_us:7.2f} us"
    )
print(f"added per keystroke: {stats.added_per_keystroke_us:.2f} us")
