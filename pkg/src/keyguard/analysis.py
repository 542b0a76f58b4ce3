"""Leakage accounting against ground truth, passthrough comparison, latency stats."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from keyguard.adversary import CapturedData, Channel
from keyguard.defense import Reason
from keyguard.errors import RunMismatch, TraceMismatch, TraceTooShort
from keyguard.hooks import HookPoint
from keyguard.inputs import FieldContext, InputClass, KeyCode, KeyEvent
from keyguard.rules import RuleMatcher


@dataclass(frozen=True)
class TruthEntry:
    seq: int
    field_id: str
    plaintext: KeyCode
    sensitive: bool
    reason: Reason | None


class GroundTruth:
    """What the user actually typed, and which characters were secret.

    Built from the trace and configuration only. A rule-matched secret
    includes its prefix: the prefix characters are flagged when the match
    completes, even though they were typed before anyone could know.
    """

    def __init__(self, rules=()):
        self._matcher = RuleMatcher(rules)
        self._entries: dict[int, TruthEntry] = {}
        self._typed: dict[str, list[str]] = {}

    def observe(self, event: KeyEvent, ctx: FieldContext) -> None:
        key = event.key
        update = self._matcher.feed(event.field_id, key, event.seq)
        reason = None
        if key.is_printable:
            if ctx.input_class is InputClass.PASSWORD:
                reason = Reason.PASSWORD_CONTEXT
            elif ctx.user_marked:
                reason = Reason.USER_MARKED
            elif update.covered:
                reason = Reason.RULE_MATCH
        self._entries[event.seq] = TruthEntry(event.seq, event.field_id, key, reason is not None, reason)
        for _rule_id, seqs in update.confirmed:
            for s in seqs:
                if not self._entries[s].sensitive:
                    prev = self._entries[s]
                    self._entries[s] = TruthEntry(s, prev.field_id, prev.plaintext, True, Reason.RULE_MATCH)

        typed = self._typed.setdefault(event.field_id, [])
        if key == KeyCode.BACKSPACE:
            if typed:
                typed.pop()
        elif key.is_printable:
            typed.append(key.char)

    def add_field(self, field_id: str) -> None:
        self._typed.setdefault(field_id, [])

    def __getitem__(self, seq: int) -> TruthEntry:
        return self._entries[seq]

    def __contains__(self, seq: int) -> bool:
        return seq in self._entries

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self) -> list[TruthEntry]:
        return [self._entries[s] for s in sorted(self._entries)]

    def final_text(self) -> dict[str, str]:
        return {fid: "".join(chars) for fid, chars in self._typed.items()}


@dataclass(frozen=True)
class FieldLeakage:
    sensitive_chars: int
    exposed_plaintext: int
    nonsensitive_captured: int

    @property
    def exposure_ratio(self) -> float:
        return self.exposed_plaintext / self.sensitive_chars if self.sensitive_chars else 0.0

    @property
    def empty_denominator(self) -> bool:
        return self.sensitive_chars == 0

    @property
    def fraction(self) -> Fraction | None:
        return Fraction(self.exposed_plaintext, self.sensitive_chars) if self.sensitive_chars else None


@dataclass(frozen=True)
class LeakageReport:
    channel: Channel
    exfiltrated: bool
    per_field: dict[str, FieldLeakage]
    overall: FieldLeakage

    @property
    def exposure_ratio(self) -> float:
        return self.overall.exposure_ratio

    @property
    def exposed_plaintext(self) -> int:
        return self.overall.exposed_plaintext

    @property
    def sensitive_chars(self) -> int:
        return self.overall.sensitive_chars


def compute_leakage(truth: GroundTruth, captured: CapturedData) -> LeakageReport:
    """Count captured characters that equal the plaintext at the same seq.

    Only positions inside sensitive spans count as exposure; captures of
    non-sensitive keys are tallied separately.
    """
    sensitive: dict[str, int] = {}
    exposed: dict[str, int] = {}
    nonsensitive: dict[str, int] = {}
    for entry in truth.entries:
        sensitive.setdefault(entry.field_id, 0)
        exposed.setdefault(entry.field_id, 0)
        nonsensitive.setdefault(entry.field_id, 0)
        if entry.sensitive:
            sensitive[entry.field_id] += 1

    for cap in captured.entries:
        if cap.seq not in truth or truth[cap.seq].field_id != cap.field_id:
            raise RunMismatch(f"captured seq {cap.seq} in {cap.field_id!r} is not in the ground truth")
        t = truth[cap.seq]
        if t.sensitive:
            if cap.observed == t.plaintext:
                exposed[t.field_id] += 1
        else:
            nonsensitive[t.field_id] += 1

    per_field = {
        fid: FieldLeakage(sensitive[fid], exposed[fid], nonsensitive[fid]) for fid in sorted(sensitive)
    }
    overall = FieldLeakage(
        sum(sensitive.values()), sum(exposed.values()), sum(nonsensitive.values())
    )
    return LeakageReport(captured.channel, captured.exfiltrated, per_field, overall)


@dataclass(frozen=True)
class PassthroughDiff:
    log_diffs: tuple[tuple[int, str | None, str | None], ...] = ()
    editor_diffs: tuple[tuple[str, str | None, str | None], ...] = ()
    log_bytes_equal: bool = True

    @property
    def empty(self) -> bool:
        return self.log_bytes_equal and not self.log_diffs and not self.editor_diffs


def compare_passthrough(run_a, run_b) -> PassthroughDiff:
    """Diff the keylogger logs and final editor texts of two runs of one trace.

    ``run_a`` and ``run_b`` are :class:`keyguard.simulation.RunArtifacts`.
    """
    if run_a.trace_digest != run_b.trace_digest or run_a.adversary is not run_b.adversary:
        raise TraceMismatch("runs did not replay the same trace against the same adversary")
    a_lines = run_a.log_bytes.decode().split("\n")[:-1]
    b_lines = run_b.log_bytes.decode().split("\n")[:-1]
    log_diffs = []
    for i in range(max(len(a_lines), len(b_lines))):
        a = a_lines[i] if i < len(a_lines) else None
        b = b_lines[i] if i < len(b_lines) else None
        if a != b:
            log_diffs.append((i, a, b))
    editor_diffs = []
    for fid in sorted(set(run_a.editor_texts) | set(run_b.editor_texts)):
        a, b = run_a.editor_texts.get(fid), run_b.editor_texts.get(fid)
        if a != b:
            editor_diffs.append((fid, a, b))
    return PassthroughDiff(tuple(log_diffs), tuple(editor_diffs), run_a.log_bytes == run_b.log_bytes)


@dataclass(frozen=True)
class TimingSummary:
    n: int
    mean_us: float
    p95_us: float
    max_us: float

    @classmethod
    def from_ns(cls, samples) -> "TimingSummary":
        arr = np.asarray(samples, dtype=np.float64) / 1000.0
        return cls(int(arr.size), float(arr.mean()), float(np.percentile(arr, 95)), float(arr.max()))


@dataclass(frozen=True)
class PointLatency:
    hooked: TimingSummary
    baseline: TimingSummary

    @property
    def added_mean_us(self) -> float:
        return self.hooked.mean_us - self.baseline.mean_us


@dataclass(frozen=True)
class LatencyStats:
    repetitions: int
    events_per_run: int
    points: dict[HookPoint, PointLatency] = field(default_factory=dict)

    @property
    def added_per_keystroke_us(self) -> float:
        """Mean extra time per keystroke summed over both dispatch points."""
        return sum(p.added_mean_us for p in self.points.values())


def latency_stats(
    hooked: Mapping[HookPoint, list[int]], baseline: Mapping[HookPoint, list[int]], repetitions: int, events: int
) -> LatencyStats:
    points = {
        point: PointLatency(TimingSummary.from_ns(hooked[point]), TimingSummary.from_ns(baseline[point]))
        for point in HookPoint
    }
    return LatencyStats(repetitions, events, points)


MIN_BENCH_EVENTS = 60


def run_latency_bench(scenario, repetitions: int) -> LatencyStats:
    """Time both dispatch points with KeyGuard installed and with an empty registry.

    Hooked and baseline runs replay the identical trace and are interleaved
    so drift on the host affects both alike. One warmup pair is discarded.
    """
    from keyguard.simulation import run

    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    events = scenario.key_steps
    if events < MIN_BENCH_EVENTS:
        raise TraceTooShort(f"trace has {events} key events, need at least {MIN_BENCH_EVENTS}")
    hooked_scn = scenario.with_keyguard(True)
    base_scn = scenario.with_keyguard(False)
    run(hooked_scn, timings={})
    run(base_scn, timings={})
    hooked: dict[HookPoint, list[int]] = {}
    baseline: dict[HookPoint, list[int]] = {}
    for _ in range(repetitions):
        run(hooked_scn, timings=hooked)
        run(base_scn, timings=baseline)
    return latency_stats(hooked, baseline, repetitions, events)
