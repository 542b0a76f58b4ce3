"""
How a single keystroke is disguised
===================================

Typing ``k`` into a password field.  The hook shifts the key code by the
first RC4 byte (mod 95) before the keyboard sees it, then shifts the
displayed character back once it reaches the text box.
"""

from keyguard.cipher import Direction, rc4_keystream, ring_map
from keyguard.inputs import KeyCode
from keyguard.scenario import parse_scenario
from keyguard.simulation import run

key = b"fig4ct"  # first keystream byte 196, a shift of 6
ks = rc4_keystream(key, 1)[0]
print("first keystream byte", ks, "-> shift", ks % 95)

k = KeyCode.of("k")
enc = ring_map(k, ks, Direction.ENCRYPT)
print("k ->", enc.char, "->", ring_map(enc, ks, Direction.DECRYPT).char)

# the same thing through the whole pipeline
s = parse_scenario(
    {
        "fields": [{"id": "pw", "input_class": "password"}],
        "key_hex": key.hex(),
        "adversary": "local",
        "trace": [{"field": "pw", "key": "k"}],
    }
)
r = run(s)
print("keylogger file:", r.log_bytes)
print("text box:", r.editor_texts)
