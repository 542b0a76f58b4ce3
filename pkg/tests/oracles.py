"""Reference implementations kept independent of the package under test."""

PRINTABLE = "".join(chr(c) for c in range(32, 127))


def rc4_reference(key: bytes, n: int) -> list[int]:
    """Textbook KSA then PRGA, one explicit step at a time."""
    state = list(range(256))
    j = 0
    for i in range(256):
        j = (j + state[i] + key[i % len(key)]) % 256
        tmp = state[i]
        state[i] = state[j]
        state[j] = tmp
    out = []
    i = j = 0
    for _ in range(n):
        i = (i + 1) % 256
        j = (j + state[i]) % 256
        tmp = state[i]
        state[i] = state[j]
        state[j] = tmp
        out.append(state[(state[i] + state[j]) % 256])
    return out


def rotate_encrypt(ch: str, ks: int) -> str:
    """Step forward ``ks`` places through the printable alphabet, one place at a time."""
    idx = PRINTABLE.index(ch)
    for _ in range(ks):
        idx += 1
        if idx == len(PRINTABLE):
            idx = 0
    return PRINTABLE[idx]


def typed_text(keys) -> str:
    """Final text of a field after a sequence of key names, with append-only editing."""
    out = ""
    for k in keys:
        if k == "BACKSPACE":
            out = out[:-1]
        elif k != "ENTER":
            out += k
    return out
