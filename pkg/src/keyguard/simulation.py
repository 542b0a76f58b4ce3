"""Replays a scenario through editor, hooks, IME and adversary."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

from keyguard.adversary import CHANNEL_FOR_KIND, AdversaryWorld, CapturedData, ImeKind, adversary_collect
from keyguard.analysis import GroundTruth, LeakageReport, compute_leakage
from keyguard.defense import KeyGuard, KeyGuardConfig, Reason, contexts_from, mark_field
from keyguard.errors import DesyncDetected, UnknownField
from keyguard.hooks import HookPoint, HookRegistration, HookRegistry
from keyguard.inputs import EditorState, FieldContext, KeyCode, KeyDispatch, KeyEvent, VirtualClock
from keyguard.scenario import DEFAULT_KEY_INTERVAL_MS, KeyStep, MarkStep, Scenario, TickStep


@dataclass(frozen=True)
class HookFault:
    seq: int
    field_id: str
    error: str
    message: str


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    field_id: str
    plaintext: KeyCode
    ime_saw: KeyCode | None
    sensitive: bool
    reason: Reason | None
    encrypted: bool


@dataclass
class RunArtifacts:
    trace_digest: str
    adversary: ImeKind
    log_bytes: bytes
    editor_texts: dict[str, str]
    truth: GroundTruth
    captured: CapturedData
    leakage: LeakageReport
    audit: list[AuditRecord]
    faults: list[HookFault]
    keystream_used: int
    halted: bool = False

    @property
    def desync(self) -> bool:
        return any(f.error == DesyncDetected.__name__ for f in self.faults)


class Simulation:
    """One run: owns the editor, the IME world, the hook registry and KeyGuard."""

    def __init__(
        self,
        fields: Iterable[FieldContext],
        adversary: ImeKind,
        config: KeyGuardConfig | None = None,
        extra_hooks: Iterable[HookRegistration] = (),
        key_interval_ms: int = DEFAULT_KEY_INTERVAL_MS,
        timings: dict[HookPoint, list[int]] | None = None,
    ):
        self.contexts = contexts_from({f.field_id: f for f in fields})
        self.editor = EditorState()
        self.truth = GroundTruth(config.rules if config is not None else ())
        for fid in self.contexts:
            self.editor.add_field(fid)
            self.truth.add_field(fid)
        self.world = AdversaryWorld.build(adversary)
        self.registry = HookRegistry()
        self.keyguard = None
        if config is not None and config.enabled:
            self.keyguard = KeyGuard(config, self.contexts)
            self.keyguard.install(self.registry)
        for reg in extra_hooks:
            self.registry.register(reg)
        self.clock = VirtualClock()
        self.key_interval_ms = key_interval_ms
        self.timings = timings
        self.faults: list[HookFault] = []
        self.halted = False
        self._next_seq = 0
        self._ime_saw: dict[int, KeyCode] = {}
        self._events: list[KeyEvent] = []

    @property
    def ime(self):
        return self.world.ime

    # Trace steps

    def key(self, field_id: str, key: KeyCode) -> None:
        if self.halted:
            return
        if field_id not in self.contexts:
            raise UnknownField(field_id)
        event = KeyEvent(field_id, self._next_seq, key, self.clock.now)
        self._next_seq += 1
        self._events.append(event)
        self.truth.observe(event, self.contexts[field_id])
        released = self.keyguard.arrive(event) if self.keyguard else [event]
        self._forward(released)
        self.clock.advance(self.key_interval_ms)

    def type_text(self, field_id: str, text: str) -> None:
        for ch in text:
            self.key(field_id, KeyCode.of(ch))

    def mark(self, field_id: str, marked: bool) -> None:
        if field_id not in self.contexts:
            self.editor.add_field(field_id)
            self.truth.add_field(field_id)
        mark_field(self.contexts, field_id, marked)

    def tick(self, ms: int) -> None:
        self.clock.advance(ms)
        if self.keyguard and not self.halted:
            self._forward(self.keyguard.tick(self.clock.now))

    def finish(self) -> None:
        if self.keyguard and not self.halted:
            self._forward(self.keyguard.drain())

    # Pipeline

    def _forward(self, events: list[KeyEvent]) -> None:
        for event in events:
            if self.halted:
                return
            self._process(event)

    def _dispatch(self, point: HookPoint, args, base):
        if self.timings is None:
            return self.registry.dispatch(point, args, base, self)
        start = time.perf_counter_ns()
        try:
            return self.registry.dispatch(point, args, base, self)
        finally:
            self.timings.setdefault(point, []).append(time.perf_counter_ns() - start)

    def _process(self, event: KeyEvent) -> None:
        args = KeyDispatch.from_event(event)
        try:
            try:
                action = self._dispatch(HookPoint.ON_KEY, args, self.ime.on_key)
            finally:
                self._ime_saw[event.seq] = args.primary_code
            upd = self.editor.apply(event.field_id, action)
            self._dispatch(HookPoint.ON_UPDATE_SELECTION, upd, self.ime.on_update_selection)
        except DesyncDetected as exc:
            self.faults.append(HookFault(event.seq, event.field_id, type(exc).__name__, str(exc)))
            self.halted = True
        except Exception as exc:
            self.faults.append(HookFault(event.seq, event.field_id, type(exc).__name__, str(exc)))

    # Results

    def audit_trail(self) -> list[AuditRecord]:
        rows = []
        for ev in self._events:
            t = self.truth[ev.seq]
            saw = self._ime_saw.get(ev.seq)
            decision = self.keyguard.decisions.get(ev.seq) if self.keyguard else None
            encrypted = decision is not None and decision.sensitive and ev.key.is_printable
            rows.append(AuditRecord(ev.seq, ev.field_id, ev.key, saw, t.sensitive, t.reason, encrypted))
            if self.halted and ev.seq == self.faults[-1].seq:
                break
        return rows

    def artifacts(self, trace_digest: str = "") -> RunArtifacts:
        captured = adversary_collect(self.world, CHANNEL_FOR_KIND[self.ime.kind])
        return RunArtifacts(
            trace_digest=trace_digest,
            adversary=self.ime.kind,
            log_bytes=self.ime.log.to_bytes(),
            editor_texts=self.editor.texts(),
            truth=self.truth,
            captured=captured,
            leakage=compute_leakage(self.truth, captured),
            audit=self.audit_trail(),
            faults=list(self.faults),
            keystream_used=self.keyguard.session.keystream_used if self.keyguard else 0,
            halted=self.halted,
        )


def build_simulation(
    scenario: Scenario,
    extra_hooks: Iterable[HookRegistration] = (),
    timings: dict[HookPoint, list[int]] | None = None,
) -> Simulation:
    config = scenario.config if scenario.keyguard_enabled else None
    return Simulation(
        scenario.fields,
        scenario.adversary,
        config,
        extra_hooks=extra_hooks,
        key_interval_ms=scenario.key_interval_ms,
        timings=timings,
    )


def replay(sim: Simulation, scenario: Scenario) -> Simulation:
    for step in scenario.trace:
        if sim.halted:
            break
        if isinstance(step, KeyStep):
            sim.key(step.field, step.key)
        elif isinstance(step, MarkStep):
            sim.mark(step.field, step.value)
        elif isinstance(step, TickStep):
            sim.tick(step.ms)
    sim.finish()
    return sim


def run(
    scenario: Scenario,
    extra_hooks: Iterable[HookRegistration] = (),
    timings: dict[HookPoint, list[int]] | None = None,
) -> RunArtifacts:
    """Replay ``scenario`` once and gather everything the analysis needs."""
    sim = replay(build_simulation(scenario, extra_hooks, timings), scenario)
    return sim.artifacts(scenario.digest())
