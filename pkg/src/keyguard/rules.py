"""Streaming prefix rules: once ``prefix`` is typed, the next characters are secret."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from keyguard.inputs import KeyCode


@dataclass(frozen=True)
class Rule:
    rule_id: str
    prefix: str
    total_length: int

    def __post_init__(self):
        if not self.prefix:
            raise ValueError(f"rule {self.rule_id!r}: prefix must be non-empty")
        for ch in self.prefix:
            if not KeyCode.of(ch).is_printable:
                raise ValueError(f"rule {self.rule_id!r}: prefix must be printable")
        if self.total_length <= len(self.prefix):
            raise ValueError(
                f"rule {self.rule_id!r}: total_length {self.total_length} leaves nothing "
                f"to encrypt after prefix {self.prefix!r}"
            )

    @property
    def tail_length(self) -> int:
        return self.total_length - len(self.prefix)


@dataclass(frozen=True)
class Scanning:
    pass


@dataclass(frozen=True)
class Armed:
    remaining: int


@dataclass(frozen=True)
class MatchUpdate:
    covered: bool
    covering: tuple[str, ...] = ()
    # (rule_id, tags of the prefix characters) for every prefix completed by this key
    confirmed: tuple[tuple[str, tuple[Hashable, ...]], ...] = ()


@dataclass
class _FieldMatch:
    buffer: list[str] = field(default_factory=list)
    tags: list[Hashable] = field(default_factory=list)
    spans: dict[str, list[int]] = field(default_factory=dict)
    history: list[dict[str, list[int]]] = field(default_factory=list)


class RuleMatcher:
    """Per-field matcher over the trusted plaintext the user typed.

    A rule arms whenever its prefix becomes a suffix of the field's buffer,
    including inside an already armed span; each arming counts down on its
    own. BACKSPACE restores the state from before the deleted character.
    """

    def __init__(self, rules=()):
        self.rules: tuple[Rule, ...] = tuple(rules)
        self._fields: dict[str, _FieldMatch] = {}

    def _field(self, field_id: str) -> _FieldMatch:
        fm = self._fields.get(field_id)
        if fm is None:
            fm = self._fields[field_id] = _FieldMatch(spans={r.rule_id: [] for r in self.rules})
        return fm

    def feed(self, field_id: str, key: KeyCode, tag: Hashable = None) -> MatchUpdate:
        fm = self._field(field_id)
        if key == KeyCode.BACKSPACE:
            if fm.buffer:
                fm.buffer.pop()
                fm.tags.pop()
                fm.spans = fm.history.pop()
            return MatchUpdate(False)
        if not key.is_printable:
            return MatchUpdate(False)

        fm.history.append({rid: list(spans) for rid, spans in fm.spans.items()})
        covering = tuple(rid for rid, spans in fm.spans.items() if spans)
        for rid, spans in fm.spans.items():
            fm.spans[rid] = [r - 1 for r in spans if r > 1]
        fm.buffer.append(key.char)
        fm.tags.append(tag)

        confirmed = []
        for rule in self.rules:
            n = len(rule.prefix)
            if len(fm.buffer) >= n and "".join(fm.buffer[-n:]) == rule.prefix:
                fm.spans[rule.rule_id].append(rule.tail_length)
                confirmed.append((rule.rule_id, tuple(fm.tags[-n:])))
        return MatchUpdate(bool(covering), covering, tuple(confirmed))

    def status(self, field_id: str, rule_id: str) -> Scanning | Armed:
        spans = self._field(field_id).spans[rule_id]
        return Armed(max(spans)) if spans else Scanning()

    def buffer(self, field_id: str) -> str:
        return "".join(self._field(field_id).buffer)

    def sensitive_now(self, field_id: str) -> bool:
        """Whether the next printable typed into ``field_id`` would be covered."""
        return any(self._field(field_id).spans.values())


def rule_feed(state: RuleMatcher, field_id: str, key: KeyCode) -> MatchUpdate:
    return state.feed(field_id, key)
