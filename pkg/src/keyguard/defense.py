"""The KeyGuard defense: classify each keystroke, encrypt the sensitive ones
before the IME sees them, and restore the plaintext in the editor afterwards.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Union

from keyguard.cipher import Direction, Rc4, ring_map
from keyguard.errors import DesyncDetected, SeqNotFound
from keyguard.hooks import HookParam, HookPoint, HookRegistration, HookRegistry, Phase
from keyguard.inputs import (
    EditorState,
    FieldContext,
    InputClass,
    KeyCode,
    KeyDispatch,
    KeyEvent,
    SelectionUpdate,
)
from keyguard.rules import Rule, RuleMatcher

ENCRYPT_HOOK_ID = "keyguard.encrypt"
DECRYPT_HOOK_ID = "keyguard.decrypt"


class Reason(enum.Enum):
    PASSWORD_CONTEXT = "PasswordContext"
    USER_MARKED = "UserMarked"
    RULE_MATCH = "RuleMatch"


@dataclass(frozen=True)
class SensitivityDecision:
    sensitive: bool
    reason: Reason | None = None


NOT_SENSITIVE = SensitivityDecision(False)


class BatchKind(enum.Enum):
    OFF = "off"
    COUNT = "count"
    TIME = "time"


@dataclass(frozen=True)
class Batching:
    kind: BatchKind = BatchKind.OFF
    size: int = 0

    def __post_init__(self):
        if self.kind is not BatchKind.OFF and self.size < 1:
            raise ValueError("batching window must be at least 1")

    @classmethod
    def off(cls) -> "Batching":
        return cls()

    @classmethod
    def count(cls, n: int) -> "Batching":
        return cls(BatchKind.COUNT, n)

    @classmethod
    def time(cls, ms: int) -> "Batching":
        return cls(BatchKind.TIME, ms)

    @classmethod
    def parse(cls, text: str) -> "Batching":
        """Parse ``off``, ``count:N`` or ``time:N`` (``time:Nms`` also accepted)."""
        text = text.strip().lower()
        if text == "off":
            return cls.off()
        m = re.fullmatch(r"(count|time):(\d+)(ms)?", text)
        if not m or (m.group(3) and m.group(1) != "time"):
            raise ValueError(f"bad batching spec {text!r}")
        return cls(BatchKind(m.group(1)), int(m.group(2)))

    def __str__(self):
        return "off" if self.kind is BatchKind.OFF else f"{self.kind.value}:{self.size}"


@dataclass(frozen=True)
class KeyGuardConfig:
    enabled: bool = True
    rules: tuple[Rule, ...] = ()
    key: bytes = b""
    batching: Batching = Batching()

    def __post_init__(self):
        if self.enabled and not self.key:
            raise ValueError("an enabled KeyGuard needs a non-empty key")
        ids = [r.rule_id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise ValueError("rule ids must be unique")


def _decide(ctx: FieldContext, key: KeyCode, rule_hit: bool) -> SensitivityDecision:
    if not key.is_printable:
        return NOT_SENSITIVE
    if ctx.input_class is InputClass.PASSWORD:
        return SensitivityDecision(True, Reason.PASSWORD_CONTEXT)
    if ctx.user_marked:
        return SensitivityDecision(True, Reason.USER_MARKED)
    if rule_hit:
        return SensitivityDecision(True, Reason.RULE_MATCH)
    return NOT_SENSITIVE


def classify(config: KeyGuardConfig, ctx: FieldContext, state: RuleMatcher, key: KeyCode) -> SensitivityDecision:
    """Feed ``key`` to the rule matcher and decide whether it must be encrypted."""
    update = state.feed(ctx.field_id, key)
    return _decide(ctx, key, update.covered)


@dataclass(frozen=True)
class PendingDecrypt:
    seq: int
    ks: int
    plaintext: KeyCode


class CipherSession:
    """One RC4 stream per run plus the per-field queue of characters to restore."""

    def __init__(self, key: bytes):
        self.key = bytes(key)
        self.rc4 = Rc4(self.key)
        self.pending: dict[str, deque[PendingDecrypt]] = {}

    @property
    def keystream_used(self) -> int:
        return self.rc4.consumed

    def encrypt(self, field_id: str, seq: int, plaintext: KeyCode) -> KeyCode:
        ks = self.rc4.next_byte()
        self.pending.setdefault(field_id, deque()).append(PendingDecrypt(seq, ks, plaintext))
        return ring_map(plaintext, ks, Direction.ENCRYPT)

    def pending_count(self) -> int:
        return sum(len(q) for q in self.pending.values())


def keyguard_before_on_key(
    session: CipherSession,
    config: KeyGuardConfig,
    ctx: FieldContext,
    state: RuleMatcher,
    args: KeyDispatch,
    decision: SensitivityDecision | None = None,
) -> SensitivityDecision:
    """Encrypt ``args`` in place when the key is sensitive.

    ``decision`` is supplied when classification already happened upstream
    (batched mode); otherwise the key is classified here.
    """
    if decision is None:
        decision = classify(config, ctx, state, args.primary_code)
    if decision.sensitive and args.primary_code.is_printable:
        args.rewrite(session.encrypt(args.field_id, args.seq, args.primary_code))
    return decision


def keyguard_after_on_update_selection(session: CipherSession, editor: EditorState, upd: SelectionUpdate) -> None:
    queue = session.pending.get(upd.field_id)
    if not queue:
        return
    head = queue.popleft()
    try:
        shown = KeyCode.of(editor.char_at_seq(upd.field_id, head.seq))
    except SeqNotFound:
        raise DesyncDetected(f"seq {head.seq} vanished from {upd.field_id!r} before decryption") from None
    restored = ring_map(shown, head.ks, Direction.DECRYPT)
    if restored != head.plaintext:
        raise DesyncDetected(
            f"seq {head.seq} in {upd.field_id!r}: display {shown.name!r} decrypts to "
            f"{restored.name!r}, expected the recorded plaintext"
        )
    editor.replace_at(upd.field_id, head.seq, restored)


@dataclass(frozen=True)
class Arrival:
    event: KeyEvent


@dataclass(frozen=True)
class Tick:
    now: int


BatchInput = Union[Arrival, Tick]


@dataclass
class BatchBuffer:
    """Holds keystrokes back so rule matching can look ahead before the IME sees them.

    ``rule_hits`` maps each released seq to whether rule matching marks it
    sensitive. A batch in which some rule prefix was completed is encrypted
    wholesale for that field, prefix characters included.
    """

    window: Batching
    held: list[KeyEvent] = field(default_factory=list)
    deadline: int | None = None
    rule_hits: dict[int, bool] = field(default_factory=dict)
    _covered: dict[int, bool] = field(default_factory=dict, repr=False)
    _confirmed_fields: set[str] = field(default_factory=set, repr=False)

    def flush(self) -> list[KeyEvent]:
        out, self.held = self.held, []
        for ev in out:
            wholesale = ev.field_id in self._confirmed_fields and ev.key.is_printable
            self.rule_hits[ev.seq] = self._covered.pop(ev.seq) or wholesale
        self._confirmed_fields.clear()
        self.deadline = None
        return out


def batch_step(batcher: BatchBuffer, config: KeyGuardConfig, state: RuleMatcher, item: BatchInput) -> list[KeyEvent]:
    window = batcher.window
    if window.kind is BatchKind.OFF:
        raise ValueError("batch_step requires a batching window")
    released: list[KeyEvent] = []
    if isinstance(item, Tick):
        if batcher.deadline is not None and item.now >= batcher.deadline:
            released += batcher.flush()
        return released

    ev = item.event
    if window.kind is BatchKind.TIME and batcher.deadline is not None and ev.t >= batcher.deadline:
        released += batcher.flush()
    update = state.feed(ev.field_id, ev.key, ev.seq)
    batcher._covered[ev.seq] = update.covered
    if update.confirmed:
        batcher._confirmed_fields.add(ev.field_id)
    batcher.held.append(ev)
    if window.kind is BatchKind.TIME and batcher.deadline is None:
        batcher.deadline = ev.t + window.size
    if window.kind is BatchKind.COUNT and len(batcher.held) >= window.size:
        released += batcher.flush()
    return released


def mark_field(contexts: dict[str, FieldContext], field_id: str, marked: bool) -> FieldContext:
    """Set the user's sensitivity mark on a field, creating a plain-text context if needed."""
    ctx = contexts.get(field_id)
    if ctx is None:
        ctx = contexts[field_id] = FieldContext(field_id, InputClass.PLAIN)
    ctx.user_marked = bool(marked)
    return ctx


class KeyGuard:
    """Wires classification, the cipher session and batching into hooks."""

    def __init__(self, config: KeyGuardConfig, contexts: dict[str, FieldContext] | None = None):
        self.config = config
        self.contexts = contexts if contexts is not None else {}
        self.matcher = RuleMatcher(config.rules)
        self.session = CipherSession(config.key)
        self.batcher = None if config.batching.kind is BatchKind.OFF else BatchBuffer(config.batching)
        self.decisions: dict[int, SensitivityDecision] = {}
        self._arrival_ctx: dict[int, FieldContext] = {}

    def context(self, field_id: str) -> FieldContext:
        ctx = self.contexts.get(field_id)
        if ctx is None:
            ctx = self.contexts[field_id] = FieldContext(field_id)
        return ctx

    def mark_field(self, field_id: str, marked: bool) -> None:
        mark_field(self.contexts, field_id, marked)

    def install(self, registry: HookRegistry) -> None:
        registry.register(HookRegistration(ENCRYPT_HOOK_ID, HookPoint.ON_KEY, Phase.BEFORE, self.before_on_key))
        registry.register(
            HookRegistration(DECRYPT_HOOK_ID, HookPoint.ON_UPDATE_SELECTION, Phase.AFTER, self.after_on_update_selection)
        )

    # Batching front end. Without a window every arrival is released at once.

    def arrive(self, event: KeyEvent) -> list[KeyEvent]:
        if self.batcher is None:
            return [event]
        ctx = self.context(event.field_id)
        self._arrival_ctx[event.seq] = FieldContext(ctx.field_id, ctx.input_class, ctx.user_marked)
        return batch_step(self.batcher, self.config, self.matcher, Arrival(event))

    def tick(self, now: int) -> list[KeyEvent]:
        if self.batcher is None:
            return []
        return batch_step(self.batcher, self.config, self.matcher, Tick(now))

    def drain(self) -> list[KeyEvent]:
        return [] if self.batcher is None else self.batcher.flush()

    # Hooks

    def before_on_key(self, param: HookParam) -> None:
        args: KeyDispatch = param.args
        if self.batcher is not None:
            ctx = self._arrival_ctx.pop(args.seq)
            rule_hit = self.batcher.rule_hits.pop(args.seq)
            decision = _decide(ctx, args.primary_code, rule_hit)
        else:
            ctx = self.context(args.field_id)
            decision = None
        decision = keyguard_before_on_key(self.session, self.config, ctx, self.matcher, args, decision)
        self.decisions[args.seq] = decision

    def after_on_update_selection(self, param: HookParam) -> None:
        keyguard_after_on_update_selection(self.session, param.context.editor, param.args)


def contexts_from(fields: Mapping[str, FieldContext]) -> dict[str, FieldContext]:
    """Deep-copy field contexts so two runs never share mutable marks."""
    return {fid: FieldContext(c.field_id, c.input_class, c.user_marked) for fid, c in fields.items()}
