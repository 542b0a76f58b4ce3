"""Keylogger IMEs for the three threat models and the stores they leak into.

* ``DIRECT_EXFIL``: every observed key goes straight to a remote server.
* ``LOCAL_LOGGER``: keys are appended to a file on the device and kept there.
* ``COLLUSION_LOGGER``: same file, but its path is announced to a second app
  that reads it and ships it out.

The IME sees only what arrives at ``on_key`` and the selection indices; it
has no way to read the editor buffer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from keyguard.errors import ChannelMismatch
from keyguard.inputs import (
    Backspace,
    CommitAction,
    CommitChar,
    Enter,
    KeyCode,
    KeyDispatch,
    SelectionUpdate,
)

DEFAULT_LOG_PATH = "/sdcard/Android/data/ime.sample/cache/keys.log"


class ImeKind(enum.Enum):
    DIRECT_EXFIL = "direct"
    LOCAL_LOGGER = "local"
    COLLUSION_LOGGER = "collude"


class Channel(enum.Enum):
    DIRECT = "Direct"
    COLLUDE = "Collude"
    LOCAL_ONLY = "LocalOnly"


CHANNEL_FOR_KIND = {
    ImeKind.DIRECT_EXFIL: Channel.DIRECT,
    ImeKind.LOCAL_LOGGER: Channel.LOCAL_ONLY,
    ImeKind.COLLUSION_LOGGER: Channel.COLLUDE,
}


@dataclass(frozen=True)
class LogEntry:
    seq: int
    field_id: str
    observed: KeyCode

    def to_line(self) -> str:
        return f"{self.seq},{self.field_id},{self.observed.code}\n"

    @classmethod
    def from_line(cls, line: str) -> "LogEntry":
        seq, rest = line.rstrip("\n").split(",", 1)
        field_id, code = rest.rsplit(",", 1)
        return cls(int(seq), field_id, KeyCode(int(code)))


def serialize_log(entries) -> bytes:
    return "".join(e.to_line() for e in entries).encode("utf-8")


def parse_log(data: bytes) -> list[LogEntry]:
    lines = data.decode("utf-8").split("\n")
    return [LogEntry.from_line(line) for line in lines if line]


class KeyloggerLog:
    """Append-only record of what the IME observed."""

    def __init__(self):
        self._entries: list[LogEntry] = []

    def append(self, entry: LogEntry) -> None:
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[LogEntry, ...]:
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def to_bytes(self) -> bytes:
        return serialize_log(self._entries)


@dataclass
class ExfilServer:
    received: list[LogEntry] = field(default_factory=list)

    def receive(self, entry: LogEntry) -> None:
        self.received.append(entry)


@dataclass
class SharedFileStore:
    files: dict[str, bytes] = field(default_factory=dict)

    def append(self, path: str, data: bytes) -> None:
        self.files[path] = self.files.get(path, b"") + data

    def write(self, path: str, data: bytes) -> None:
        self.files[path] = bytes(data)

    def read(self, path: str) -> bytes:
        return self.files.get(path, b"")


@dataclass
class ColludingApp:
    store: SharedFileStore
    known_path: str | None = None

    def notify(self, path: str) -> None:
        self.known_path = path

    def harvest(self) -> list[LogEntry]:
        if self.known_path is None:
            return []
        return parse_log(self.store.read(self.known_path))


class KeyloggerIme:
    """A commit-and-log keyboard with no suggestions or autocorrect."""

    def __init__(
        self,
        kind: ImeKind,
        server: ExfilServer | None = None,
        store: SharedFileStore | None = None,
        log_path: str = DEFAULT_LOG_PATH,
    ):
        self.kind = kind
        self.server = server if server is not None else ExfilServer()
        self.store = store if store is not None else SharedFileStore()
        self.log_path = log_path
        self.log = KeyloggerLog()
        self.update_count = 0
        self.telemetry: list[tuple[int, int, int, int, int, int]] = []

    def on_key(self, dispatch: KeyDispatch) -> CommitAction:
        code = dispatch.primary_code
        entry = LogEntry(dispatch.seq, dispatch.field_id, code)
        self.log.append(entry)
        if self.kind is ImeKind.DIRECT_EXFIL:
            self.server.receive(entry)
        else:
            self.store.append(self.log_path, entry.to_line().encode("utf-8"))
        if code == KeyCode.BACKSPACE:
            return Backspace()
        if code == KeyCode.ENTER:
            return Enter()
        return CommitChar(code, dispatch.seq)

    def on_update_selection(self, upd: SelectionUpdate) -> None:
        self.update_count += 1
        self.telemetry.append(
            (
                upd.old_sel_start,
                upd.old_sel_end,
                upd.new_sel_start,
                upd.new_sel_end,
                upd.candidates_start,
                upd.candidates_end,
            )
        )


def ime_on_key(ime: KeyloggerIme, dispatch: KeyDispatch) -> CommitAction:
    return ime.on_key(dispatch)


def ime_on_update_selection(ime: KeyloggerIme, upd: SelectionUpdate) -> None:
    ime.on_update_selection(upd)


@dataclass
class AdversaryWorld:
    """The keylogger plus everything it can leak into."""

    ime: KeyloggerIme
    server: ExfilServer
    store: SharedFileStore
    colluder: ColludingApp

    @classmethod
    def build(cls, kind: ImeKind, log_path: str = DEFAULT_LOG_PATH) -> "AdversaryWorld":
        server, store = ExfilServer(), SharedFileStore()
        ime = KeyloggerIme(kind, server, store, log_path)
        colluder = ColludingApp(store)
        if kind is ImeKind.COLLUSION_LOGGER:
            colluder.notify(log_path)
        return cls(ime, server, store, colluder)


@dataclass(frozen=True)
class CapturedData:
    channel: Channel
    entries: tuple[LogEntry, ...]
    exfiltrated: bool

    def __len__(self):
        return len(self.entries)


def adversary_collect(world: AdversaryWorld, channel: Channel) -> CapturedData:
    """Gather what the adversary holds at the end of a run over ``channel``."""
    expected = CHANNEL_FOR_KIND[world.ime.kind]
    if channel is not expected:
        raise ChannelMismatch(f"{world.ime.kind.value} IME cannot leak over {channel.value}")
    if channel is Channel.DIRECT:
        return CapturedData(channel, tuple(world.server.received), True)
    if channel is Channel.COLLUDE:
        return CapturedData(channel, tuple(world.colluder.harvest()), True)
    on_device = parse_log(world.store.read(world.ime.log_path))
    return CapturedData(channel, tuple(on_device), False)
