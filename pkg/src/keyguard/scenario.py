"""Scenario files: fields, rules, key, adversary and the keystroke trace.

Scenarios are YAML (JSON is valid YAML, so either works)::

    fields:
      - {id: pw, input_class: password}
      - {id: notes, input_class: plain, marked: false}
    rules:
      - {id: card, prefix: abc, total_length: 8}
    key_hex: "4b6579"
    keyguard_enabled: true
    batching: "count:4"        # off | count:N | time:N
    adversary: collude         # direct | local | collude
    trace:
      - {field: pw, key: k}
      - {field: pw, key: BACKSPACE}
      - {field: notes, touch: [7.5, 1.5]}
      - {field: notes, text: "abcde123"}
      - {mark: notes, value: true}
      - {tick: 50}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Union

import yaml

from keyguard.adversary import ImeKind
from keyguard.defense import Batching, KeyGuardConfig
from keyguard.errors import NoKeyAtPoint, ScenarioError
from keyguard.inputs import DEFAULT_LAYOUT, FieldContext, InputClass, KeyCode, KeyboardLayout, touch_to_keycode
from keyguard.rules import Rule

DEFAULT_KEY_INTERVAL_MS = 10

_INPUT_CLASSES = {
    "password": InputClass.PASSWORD,
    "passwordtext": InputClass.PASSWORD,
    "plain": InputClass.PLAIN,
    "plaintext": InputClass.PLAIN,
}


@dataclass(frozen=True)
class KeyStep:
    field: str
    key: KeyCode
    touch: tuple[float, float] | None = None


@dataclass(frozen=True)
class MarkStep:
    field: str
    value: bool


@dataclass(frozen=True)
class TickStep:
    ms: int


Step = Union[KeyStep, MarkStep, TickStep]


@dataclass(frozen=True)
class Scenario:
    fields: tuple[FieldContext, ...]
    trace: tuple[Step, ...]
    adversary: ImeKind = ImeKind.LOCAL_LOGGER
    rules: tuple[Rule, ...] = ()
    key: bytes = b""
    keyguard_enabled: bool = True
    batching: Batching = Batching()
    key_interval_ms: int = DEFAULT_KEY_INTERVAL_MS
    name: str = ""

    @property
    def config(self) -> KeyGuardConfig:
        return KeyGuardConfig(self.keyguard_enabled, self.rules, self.key, self.batching)

    @property
    def key_steps(self) -> int:
        return sum(isinstance(s, KeyStep) for s in self.trace)

    def with_keyguard(self, enabled: bool) -> "Scenario":
        return replace(self, keyguard_enabled=enabled)

    def to_dict(self) -> dict[str, Any]:
        """Canonical plain-data form; round-trips through :func:`parse_scenario`."""
        trace = []
        for step in self.trace:
            if isinstance(step, KeyStep):
                if step.touch is not None:
                    trace.append({"field": step.field, "touch": list(step.touch)})
                else:
                    trace.append({"field": step.field, "key": step.key.name})
            elif isinstance(step, MarkStep):
                trace.append({"mark": step.field, "value": step.value})
            else:
                trace.append({"tick": step.ms})
        return {
            "name": self.name,
            "fields": [
                {"id": f.field_id, "input_class": f.input_class.value, "marked": f.user_marked}
                for f in self.fields
            ],
            "rules": [{"id": r.rule_id, "prefix": r.prefix, "total_length": r.total_length} for r in self.rules],
            "key_hex": self.key.hex(),
            "keyguard_enabled": self.keyguard_enabled,
            "batching": str(self.batching),
            "adversary": self.adversary.value,
            "key_interval_ms": self.key_interval_ms,
            "trace": trace,
        }

    def digest(self) -> str:
        """SHA-256 over the canonical form, minus the KeyGuard on/off switch.

        Leaving the switch out lets a paired baseline run share the digest
        of the run it is compared with.
        """
        data = self.to_dict()
        del data["keyguard_enabled"]
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _fail(msg: str) -> ScenarioError:
    return ScenarioError(msg)


def _field_id(value: Any, where: str) -> str:
    if not isinstance(value, (str, int)) or isinstance(value, bool):
        raise _fail(f"{where}: field id must be a string")
    fid = str(value)
    if not fid or "\n" in fid or "\r" in fid:
        raise _fail(f"{where}: field id must be a non-empty single-line string")
    return fid


def _key_name(value: Any, where: str) -> KeyCode:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise _fail(f"{where}: key must be a character or BACKSPACE/ENTER")
    try:
        return KeyCode.from_name(str(value))
    except ValueError as exc:
        raise _fail(f"{where}: {exc}") from None


def _batching(value: Any) -> Batching:
    if value is None or value is False:
        return Batching.off()
    if not isinstance(value, str):
        raise _fail(f"batching must be off, count:N or time:N, got {value!r}")
    try:
        return Batching.parse(value)
    except ValueError as exc:
        raise _fail(str(exc)) from None


def parse_scenario(data: Any, layout: KeyboardLayout = DEFAULT_LAYOUT) -> Scenario:
    """Validate plain data (as loaded from YAML/JSON) into a :class:`Scenario`."""
    if not isinstance(data, dict):
        raise _fail("scenario must be a mapping")
    known = {"name", "fields", "rules", "key_hex", "keyguard_enabled", "batching", "adversary", "key_interval_ms", "trace"}
    unknown = set(data) - known
    if unknown:
        raise _fail(f"unknown scenario keys: {sorted(unknown)}")

    fields: dict[str, FieldContext] = {}
    for i, spec in enumerate(data.get("fields") or []):
        if not isinstance(spec, dict) or "id" not in spec:
            raise _fail(f"fields[{i}]: expected a mapping with an id")
        fid = _field_id(spec["id"], f"fields[{i}]")
        if fid in fields:
            raise _fail(f"fields[{i}]: duplicate field id {fid!r}")
        cls_name = str(spec.get("input_class", "plain")).lower()
        if cls_name not in _INPUT_CLASSES:
            raise _fail(f"fields[{i}]: unknown input_class {spec.get('input_class')!r}")
        marked = spec.get("marked", False)
        if not isinstance(marked, bool):
            raise _fail(f"fields[{i}]: marked must be a boolean")
        fields[fid] = FieldContext(fid, _INPUT_CLASSES[cls_name], marked)

    rules = []
    for i, spec in enumerate(data.get("rules") or []):
        if not isinstance(spec, dict):
            raise _fail(f"rules[{i}]: expected a mapping")
        try:
            total = spec["total_length"]
            if isinstance(total, bool) or not isinstance(total, int):
                raise ValueError("total_length must be an integer")
            rules.append(Rule(str(spec.get("id", f"rule{i}")), str(spec["prefix"]), total))
        except (KeyError, ValueError) as exc:
            raise _fail(f"rules[{i}]: {exc}") from None
    if len({r.rule_id for r in rules}) != len(rules):
        raise _fail("rule ids must be unique")

    enabled = data.get("keyguard_enabled", True)
    if not isinstance(enabled, bool):
        raise _fail("keyguard_enabled must be a boolean")
    key_hex = data.get("key_hex", "")
    if not isinstance(key_hex, str):
        raise _fail("key_hex must be a hex string")
    try:
        key = bytes.fromhex(key_hex)
    except ValueError:
        raise _fail(f"key_hex is not valid hex: {key_hex!r}") from None
    if len(key) > 256 or (enabled and not key):
        raise _fail("key_hex must decode to 1..256 bytes")

    try:
        adversary = ImeKind(str(data.get("adversary", "local")).lower())
    except ValueError:
        raise _fail(f"unknown adversary {data.get('adversary')!r}") from None

    interval = data.get("key_interval_ms", DEFAULT_KEY_INTERVAL_MS)
    if isinstance(interval, bool) or not isinstance(interval, int) or interval < 0:
        raise _fail("key_interval_ms must be a non-negative integer")

    trace: list[Step] = []
    declared = set(fields)
    for i, step in enumerate(data.get("trace") or []):
        where = f"trace[{i}]"
        if not isinstance(step, dict):
            raise _fail(f"{where}: expected a mapping")
        if "tick" in step:
            ms = step["tick"]
            if isinstance(ms, bool) or not isinstance(ms, int) or ms < 0:
                raise _fail(f"{where}: tick must be a non-negative integer")
            trace.append(TickStep(ms))
        elif "mark" in step:
            fid = _field_id(step["mark"], where)
            value = step.get("value", True)
            if not isinstance(value, bool):
                raise _fail(f"{where}: mark value must be a boolean")
            declared.add(fid)
            trace.append(MarkStep(fid, value))
        elif "field" in step:
            fid = _field_id(step["field"], where)
            if fid not in declared:
                raise _fail(f"{where}: field {fid!r} is not declared")
            if "key" in step:
                trace.append(KeyStep(fid, _key_name(step["key"], where)))
            elif "touch" in step:
                pt = step["touch"]
                if not isinstance(pt, (list, tuple)) or len(pt) != 2:
                    raise _fail(f"{where}: touch must be [x, y]")
                try:
                    x, y = float(pt[0]), float(pt[1])
                    trace.append(KeyStep(fid, touch_to_keycode(layout, x, y), (x, y)))
                except (TypeError, ValueError, NoKeyAtPoint) as exc:
                    raise _fail(f"{where}: {exc}") from None
            elif "text" in step:
                text = step["text"]
                if not isinstance(text, str):
                    raise _fail(f"{where}: text must be a string")
                trace.extend(KeyStep(fid, _key_name(ch, where)) for ch in text)
            else:
                raise _fail(f"{where}: key step needs one of key, touch or text")
        else:
            raise _fail(f"{where}: unrecognised step {step!r}")

    return Scenario(
        fields=tuple(fields.values()),
        trace=tuple(trace),
        adversary=adversary,
        rules=tuple(rules),
        key=key,
        keyguard_enabled=enabled,
        batching=_batching(data.get("batching")),
        key_interval_ms=interval,
        name=str(data.get("name", "")),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    return parse_scenario(data)
