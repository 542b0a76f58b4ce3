import pytest
from hypothesis import given
from hypothesis import strategies as st

from keyguard.adversary import (
    AdversaryWorld,
    Channel,
    ImeKind,
    LogEntry,
    adversary_collect,
    ime_on_key,
    ime_on_update_selection,
    parse_log,
    serialize_log,
)
from keyguard.errors import ChannelMismatch
from keyguard.inputs import Backspace, CommitChar, Enter, KeyCode, KeyDispatch, KeyEvent, SelectionUpdate


def dispatch_for(ch, seq=0, field="pw"):
    key = KeyCode.from_name(ch)
    return KeyDispatch.from_event(KeyEvent(field, seq, key))


def test_local_logger_writes_file_line():
    world = AdversaryWorld.build(ImeKind.LOCAL_LOGGER)
    action = ime_on_key(world.ime, dispatch_for("q", seq=3))
    assert action == CommitChar(KeyCode.of("q"), 3)
    assert world.ime.log.entries == (LogEntry(3, "pw", KeyCode.of("q")),)
    assert world.store.read(world.ime.log_path) == b"3,pw,113\n"
    assert world.server.received == []


def test_direct_exfil_pushes_to_server():
    world = AdversaryWorld.build(ImeKind.DIRECT_EXFIL)
    ime_on_key(world.ime, dispatch_for("a"))
    assert len(world.server.received) == 1
    assert world.store.files == {}


@pytest.mark.parametrize("kind", list(ImeKind))
def test_controls_pass_through(kind):
    world = AdversaryWorld.build(kind)
    assert ime_on_key(world.ime, dispatch_for("BACKSPACE")) == Backspace()
    assert ime_on_key(world.ime, dispatch_for("ENTER", seq=1)) == Enter()
    assert [e.observed for e in world.ime.log.entries] == [KeyCode.BACKSPACE, KeyCode.ENTER]


def test_update_counter_and_telemetry():
    world = AdversaryWorld.build(ImeKind.LOCAL_LOGGER)
    ime_on_update_selection(world.ime, SelectionUpdate("pw", 0, 0, 1, 1))
    ime_on_update_selection(world.ime, SelectionUpdate("pw", 1, 1, 2, 2))
    assert world.ime.update_count == 2
    assert world.ime.telemetry == [(0, 0, 1, 1, -1, -1), (1, 1, 2, 2, -1, -1)]


def test_collude_channel_matches_file():
    world = AdversaryWorld.build(ImeKind.COLLUSION_LOGGER)
    for i, ch in enumerate("abc"):
        ime_on_key(world.ime, dispatch_for(ch, seq=i))
    cap = adversary_collect(world, Channel.COLLUDE)
    assert cap.exfiltrated
    assert cap.entries == world.ime.log.entries
    assert world.colluder.known_path == world.ime.log_path


def test_local_only_is_not_exfiltrated():
    world = AdversaryWorld.build(ImeKind.LOCAL_LOGGER)
    ime_on_key(world.ime, dispatch_for("x"))
    cap = adversary_collect(world, Channel.LOCAL_ONLY)
    assert not cap.exfiltrated and len(cap) == 1
    # a local logger never tells anyone where its file is
    assert world.colluder.harvest() == []


def test_channel_mismatch():
    world = AdversaryWorld.build(ImeKind.DIRECT_EXFIL)
    with pytest.raises(ChannelMismatch):
        adversary_collect(world, Channel.COLLUDE)


@pytest.mark.parametrize("kind", list(ImeKind))
def test_empty_run(kind):
    from keyguard.adversary import CHANNEL_FOR_KIND

    world = AdversaryWorld.build(kind)
    assert len(adversary_collect(world, CHANNEL_FOR_KIND[kind])) == 0


codes = st.one_of(st.integers(32, 126), st.sampled_from([KeyCode.BACKSPACE.code, KeyCode.ENTER.code]))
field_ids = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"), min_size=1, max_size=8)


@given(st.lists(st.tuples(st.integers(0, 10**6), field_ids, codes), max_size=30))
def test_log_roundtrip(rows):
    entries = [LogEntry(s, f, KeyCode(c)) for s, f, c in rows]
    assert parse_log(serialize_log(entries)) == entries
