"""Simulated input stack: key codes, fields, the editor and the virtual clock.

Everything here sits upstream (touch -> keycode) or downstream (committed
text in the app) of the IME. Nothing in this module knows about hooks or
encryption.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

from keyguard.errors import NoKeyAtPoint, SeqNotFound, UnknownField

PRINTABLE_MIN = 32
PRINTABLE_MAX = 126
PRINTABLE_COUNT = PRINTABLE_MAX - PRINTABLE_MIN + 1

# Android's Keyboard.KEYCODE_DELETE and the newline code the sample IME sends.
_BACKSPACE_CODE = -5
_ENTER_CODE = 10
_CONTROL_NAMES = {_BACKSPACE_CODE: "BACKSPACE", _ENTER_CODE: "ENTER"}


@dataclass(frozen=True, order=True)
class KeyCode:
    """A printable code point in 32..126, or one of the two control keys."""

    code: int

    BACKSPACE = None  # type: KeyCode
    ENTER = None  # type: KeyCode

    def __post_init__(self):
        if not (PRINTABLE_MIN <= self.code <= PRINTABLE_MAX or self.code in _CONTROL_NAMES):
            raise ValueError(f"not a valid key code: {self.code}")

    @classmethod
    def of(cls, char: str) -> "KeyCode":
        if len(char) != 1:
            raise ValueError(f"expected a single character, got {char!r}")
        return cls(ord(char))

    @classmethod
    def from_name(cls, name: str) -> "KeyCode":
        """Parse a trace key name: a single printable character or a control name."""
        if name == "BACKSPACE":
            return cls.BACKSPACE
        if name == "ENTER":
            return cls.ENTER
        return cls.of(name)

    @property
    def is_printable(self) -> bool:
        return self.code >= PRINTABLE_MIN

    @property
    def char(self) -> str:
        if not self.is_printable:
            raise ValueError(f"{self.name} has no character")
        return chr(self.code)

    @property
    def name(self) -> str:
        return _CONTROL_NAMES.get(self.code) or chr(self.code)

    def __repr__(self):
        return f"KeyCode({self.name!r})"


KeyCode.BACKSPACE = KeyCode(_BACKSPACE_CODE)
KeyCode.ENTER = KeyCode(_ENTER_CODE)


@dataclass(frozen=True)
class KeyEvent:
    field_id: str
    seq: int
    key: KeyCode
    t: int = 0


@dataclass
class KeyDispatch:
    """Arguments of the IME's onKey(primaryCode, keyCodes) call; hooks mutate it."""

    primary_code: KeyCode
    key_codes: list[KeyCode]
    field_id: str
    seq: int

    @classmethod
    def from_event(cls, event: KeyEvent) -> "KeyDispatch":
        return cls(event.key, [event.key], event.field_id, event.seq)

    def rewrite(self, code: KeyCode) -> None:
        """Replace the primary code and the first candidate together."""
        self.primary_code = code
        self.key_codes[0] = code


class InputClass(enum.Enum):
    PASSWORD = "PasswordText"
    PLAIN = "PlainText"


@dataclass
class FieldContext:
    field_id: str
    input_class: InputClass = InputClass.PLAIN
    user_marked: bool = False


@dataclass(frozen=True)
class SelectionUpdate:
    """The six indices passed to onUpdateSelection, tagged with the field."""

    field_id: str
    old_sel_start: int
    old_sel_end: int
    new_sel_start: int
    new_sel_end: int
    candidates_start: int = -1
    candidates_end: int = -1


@dataclass(frozen=True)
class CommitChar:
    key: KeyCode
    seq: int


@dataclass(frozen=True)
class Backspace:
    pass


@dataclass(frozen=True)
class Enter:
    pass


CommitAction = Union[CommitChar, Backspace, Enter]


@dataclass
class EditorState:
    """Text buffers of the underlying app, one per field.

    Each buffer position carries the seq of the key event that committed it,
    which is how the decrypting hook finds the character to restore.
    """

    buffers: dict[str, list[str]] = field(default_factory=dict)
    cursors: dict[str, int] = field(default_factory=dict)
    _seqs: dict[str, list[int]] = field(default_factory=dict, repr=False)

    def add_field(self, field_id: str) -> None:
        if field_id not in self.buffers:
            self.buffers[field_id] = []
            self.cursors[field_id] = 0
            self._seqs[field_id] = []

    def text(self, field_id: str) -> str:
        self._require(field_id)
        return "".join(self.buffers[field_id])

    def texts(self) -> dict[str, str]:
        return {fid: "".join(buf) for fid, buf in self.buffers.items()}

    def committed_seqs(self, field_id: str) -> list[tuple[int, int]]:
        self._require(field_id)
        return list(enumerate(self._seqs[field_id]))

    def apply(self, field_id: str, action: CommitAction) -> SelectionUpdate:
        self._require(field_id)
        buf, seqs = self.buffers[field_id], self._seqs[field_id]
        old = self.cursors[field_id]
        new = old
        if isinstance(action, CommitChar):
            buf.insert(old, action.key.char)
            seqs.insert(old, action.seq)
            new = old + 1
        elif isinstance(action, Backspace):
            if old > 0:
                del buf[old - 1]
                del seqs[old - 1]
                new = old - 1
        elif not isinstance(action, Enter):
            raise TypeError(f"unknown editor action: {action!r}")
        self.cursors[field_id] = new
        return SelectionUpdate(field_id, old, old, new, new)

    def char_at_seq(self, field_id: str, seq: int) -> str:
        self._require(field_id)
        return self.buffers[field_id][self._position(field_id, seq)]

    def replace_at(self, field_id: str, seq: int, replacement: KeyCode) -> None:
        self._require(field_id)
        pos = self._position(field_id, seq)
        self.buffers[field_id][pos] = replacement.char

    def _position(self, field_id: str, seq: int) -> int:
        try:
            return self._seqs[field_id].index(seq)
        except ValueError:
            raise SeqNotFound(f"no committed character with seq {seq} in {field_id!r}") from None

    def _require(self, field_id: str) -> None:
        if field_id not in self.buffers:
            raise UnknownField(field_id)


def editor_apply(editor: EditorState, field_id: str, action: CommitAction) -> SelectionUpdate:
    return editor.apply(field_id, action)


def editor_replace_at(editor: EditorState, field_id: str, seq: int, replacement: KeyCode) -> None:
    editor.replace_at(field_id, seq, replacement)


@dataclass(frozen=True)
class KeyboardLayout:
    rows: tuple[str, ...] = ("qwertyuiop", "asdfghjkl", "zxcvbnm")

    def __post_init__(self):
        chars = "".join(self.rows)
        if len(set(chars)) != len(chars):
            raise ValueError("layout characters must be distinct")
        for ch in chars:
            KeyCode.of(ch)

    def cell_of(self, char: str) -> tuple[int, int]:
        """(col, row) of the unit cell holding ``char``."""
        for row, keys in enumerate(self.rows):
            col = keys.find(char)
            if col >= 0:
                return col, row
        raise KeyError(char)


DEFAULT_LAYOUT = KeyboardLayout()


def touch_to_keycode(layout: KeyboardLayout, x: float, y: float) -> KeyCode:
    """Map a touch point to the key whose half-open unit cell contains it."""
    if not (math.isfinite(x) and math.isfinite(y)) or x < 0 or y < 0:
        raise NoKeyAtPoint(f"no key at ({x}, {y})")
    row, col = int(math.floor(y)), int(math.floor(x))
    if row >= len(layout.rows) or col >= len(layout.rows[row]):
        raise NoKeyAtPoint(f"no key at ({x}, {y})")
    return KeyCode.of(layout.rows[row][col])


class VirtualClock:
    """Millisecond clock that only moves when the trace says so."""

    def __init__(self):
        self.now = 0

    def advance(self, ms: int) -> int:
        if ms < 0:
            raise ValueError("virtual time cannot run backwards")
        self.now += ms
        return self.now
