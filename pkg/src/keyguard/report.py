"""Run reports and their text / machine (JSON) renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from keyguard.analysis import FieldLeakage, LatencyStats, LeakageReport, PassthroughDiff
from keyguard.simulation import AuditRecord, HookFault, RunArtifacts
from keyguard.scenario import Scenario

AUDIT_EXCERPT_ROWS = 20


@dataclass
class RunReport:
    scenario: dict[str, Any]
    leakage: LeakageReport | None
    audit: list[AuditRecord] = field(default_factory=list)
    passthrough: PassthroughDiff | None = None
    latency: LatencyStats | None = None
    editor: dict[str, str] = field(default_factory=dict)
    faults: list[HookFault] = field(default_factory=list)
    keystream_used: int = 0

    @classmethod
    def from_run(
        cls,
        scenario: Scenario,
        run: RunArtifacts,
        passthrough: PassthroughDiff | None = None,
        latency: LatencyStats | None = None,
    ) -> "RunReport":
        info = {
            "name": scenario.name,
            "digest": scenario.digest(),
            "adversary": scenario.adversary.value,
            "keyguard_enabled": scenario.keyguard_enabled,
            "batching": str(scenario.batching),
            "key_events": scenario.key_steps,
        }
        return cls(
            scenario=info,
            leakage=run.leakage,
            audit=run.audit,
            passthrough=passthrough,
            latency=latency,
            editor=dict(sorted(run.editor_texts.items())),
            faults=run.faults,
            keystream_used=run.keystream_used,
        )

    def to_dict(self) -> dict[str, Any]:
        scenario = dict(self.scenario)
        scenario["editor"] = self.editor
        scenario["keystream_used"] = self.keystream_used
        scenario["faults"] = [
            {"seq": f.seq, "field": f.field_id, "error": f.error, "message": f.message} for f in self.faults
        ]
        return {
            "scenario": scenario,
            "leakage": _leakage_dict(self.leakage),
            "passthrough": _passthrough_dict(self.passthrough),
            "latency": _latency_dict(self.latency),
            "audit": [_audit_dict(a) for a in self.audit],
        }


def _field_dict(f: FieldLeakage) -> dict[str, Any]:
    return {
        "sensitive_chars": f.sensitive_chars,
        "exposed_plaintext": f.exposed_plaintext,
        "exposure_ratio": f.exposure_ratio,
        "empty_denominator": f.empty_denominator,
        "nonsensitive_captured": f.nonsensitive_captured,
    }


def _leakage_dict(leak: LeakageReport | None):
    if leak is None:
        return None
    return {
        "channel": leak.channel.value,
        "exfiltrated": leak.exfiltrated,
        "overall": _field_dict(leak.overall),
        "fields": {fid: _field_dict(f) for fid, f in leak.per_field.items()},
    }


def _passthrough_dict(diff: PassthroughDiff | None):
    if diff is None:
        return None
    return {
        "empty": diff.empty,
        "log_bytes_equal": diff.log_bytes_equal,
        "log_diffs": [{"index": i, "hooked": a, "baseline": b} for i, a, b in diff.log_diffs],
        "editor_diffs": [{"field": f, "hooked": a, "baseline": b} for f, a, b in diff.editor_diffs],
    }


def _latency_dict(stats: LatencyStats | None):
    if stats is None:
        return None
    points = {}
    for point, lat in stats.points.items():
        points[point.value] = {
            side: {"n": s.n, "mean_us": s.mean_us, "p95_us": s.p95_us, "max_us": s.max_us}
            for side, s in (("hooked", lat.hooked), ("baseline", lat.baseline))
        }
        points[point.value]["added_mean_us"] = lat.added_mean_us
    return {
        "repetitions": stats.repetitions,
        "events_per_run": stats.events_per_run,
        "points": points,
        "added_per_keystroke_us": stats.added_per_keystroke_us,
    }


def _audit_dict(a: AuditRecord) -> dict[str, Any]:
    return {
        "seq": a.seq,
        "field": a.field_id,
        "plaintext": a.plaintext.name,
        "ime_saw": a.ime_saw.name if a.ime_saw is not None else None,
        "sensitive": a.sensitive,
        "reason": a.reason.value if a.reason else None,
        "encrypted": a.encrypted,
    }


def format_ratio(f: FieldLeakage) -> str:
    if f.empty_denominator:
        return "0/0 (n/a)"
    return f"{f.exposed_plaintext}/{f.sensitive_chars} ({100 * f.exposure_ratio:.1f}%)"


def _text(report: RunReport) -> str:
    s = report.scenario
    lines = [
        f"scenario {s.get('name') or '(unnamed)'}  digest {s['digest'][:16]}",
        f"adversary {s['adversary']}  keyguard {'on' if s['keyguard_enabled'] else 'off'}  "
        f"batching {s['batching']}  key events {s['key_events']}",
    ]
    leak = report.leakage
    if leak is not None:
        where = "exfiltrated" if leak.exfiltrated else "on device only"
        lines += ["", f"leakage over channel {leak.channel.value} ({where})"]
        lines.append(f"  {'field':<16} {'exposed':<18} {'non-sensitive captured'}")
        for fid, f in leak.per_field.items():
            lines.append(f"  {fid:<16} {format_ratio(f):<18} {f.nonsensitive_captured}")
        lines.append(f"  {'overall':<16} {format_ratio(leak.overall):<18} {leak.overall.nonsensitive_captured}")
    if report.editor:
        lines += ["", "editor"]
        lines += [f"  {fid:<16} {text!r}" for fid, text in report.editor.items()]
    if report.passthrough is not None:
        p = report.passthrough
        verdict = "identical" if p.empty else f"{len(p.log_diffs)} log lines, {len(p.editor_diffs)} fields differ"
        lines += ["", f"paired baseline: {verdict}"]
    if report.latency is not None:
        lines += ["", f"latency ({report.latency.repetitions} reps x {report.latency.events_per_run} events)"]
        for point, lat in report.latency.points.items():
            lines.append(
                f"  {point.value:<18} hooked {lat.hooked.mean_us:8.2f} us (p95 {lat.hooked.p95_us:.2f})  "
                f"baseline {lat.baseline.mean_us:8.2f} us (p95 {lat.baseline.p95_us:.2f})  "
                f"n={lat.hooked.n}"
            )
        lines.append(f"  added per keystroke {report.latency.added_per_keystroke_us:.2f} us")
    for fault in report.faults:
        lines.append(f"FAULT seq {fault.seq} [{fault.field_id}] {fault.error}: {fault.message}")
    if report.audit:
        lines += ["", f"audit (first {min(AUDIT_EXCERPT_ROWS, len(report.audit))} of {len(report.audit)})"]
        for a in report.audit[:AUDIT_EXCERPT_ROWS]:
            saw = a.ime_saw.name if a.ime_saw is not None else "-"
            flag = a.reason.value if a.reason else "-"
            lines.append(f"  {a.seq:>5} {a.field_id:<12} {a.plaintext.name!r:>12} -> {saw!r:<12} {flag}")
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, fmt: str = "machine") -> bytes:
    if fmt == "machine":
        return (json.dumps(report.to_dict(), indent=2) + "\n").encode("utf-8")
    if fmt == "text":
        return _text(report).encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
