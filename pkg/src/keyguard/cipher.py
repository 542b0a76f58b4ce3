"""RC4 keystream and the printable-ring mapping used to encrypt key codes."""

from __future__ import annotations

import enum

from keyguard.errors import EmptyKey, KeyTooLong, NotPrintable
from keyguard.inputs import PRINTABLE_COUNT, PRINTABLE_MIN, KeyCode


class Rc4:
    """RC4 generator state: permutation ``S`` and indices ``i``, ``j``."""

    def __init__(self, key: bytes):
        key = bytes(key)
        if not key:
            raise EmptyKey("RC4 key must be at least one byte")
        if len(key) > 256:
            raise KeyTooLong(f"RC4 key is {len(key)} bytes, maximum is 256")
        s = list(range(256))
        j = 0
        for i in range(256):
            j = (j + s[i] + key[i % len(key)]) & 0xFF
            s[i], s[j] = s[j], s[i]
        self.S = s
        self.i = 0
        self.j = 0
        self.consumed = 0

    def next_byte(self) -> int:
        s = self.S
        self.i = i = (self.i + 1) & 0xFF
        self.j = j = (self.j + s[i]) & 0xFF
        s[i], s[j] = s[j], s[i]
        self.consumed += 1
        return s[(s[i] + s[j]) & 0xFF]

    def keystream(self, n: int) -> bytes:
        return bytes(self.next_byte() for _ in range(n))


def rc4_keystream(key: bytes, n: int) -> bytes:
    if n < 0:
        raise ValueError("n must be non-negative")
    return Rc4(key).keystream(n)


class Direction(enum.Enum):
    ENCRYPT = 1
    DECRYPT = -1


def ring_map(c: KeyCode, ks: int, direction: Direction) -> KeyCode:
    """Shift a printable code by ``ks`` positions around the 95-symbol ring."""
    if not c.is_printable:
        raise NotPrintable(f"{c.name} is not a printable key")
    offset = (c.code - PRINTABLE_MIN + direction.value * ks) % PRINTABLE_COUNT
    return KeyCode(PRINTABLE_MIN + offset)
