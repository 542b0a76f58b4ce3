import pytest
from hypothesis import given
from hypothesis import strategies as st

from keyguard.errors import NoKeyAtPoint, SeqNotFound, UnknownField
from keyguard.inputs import (
    DEFAULT_LAYOUT,
    Backspace,
    CommitChar,
    EditorState,
    Enter,
    KeyCode,
    KeyDispatch,
    KeyEvent,
    KeyboardLayout,
    SelectionUpdate,
    VirtualClock,
    editor_apply,
    editor_replace_at,
    touch_to_keycode,
)


def test_printable_range_is_exactly_95():
    valid = [c for c in range(-10, 200) if _valid(c)]
    printable = [c for c in valid if KeyCode(c).is_printable]
    assert printable == list(range(32, 127))
    assert {KeyCode(c) for c in valid if not KeyCode(c).is_printable} == {KeyCode.BACKSPACE, KeyCode.ENTER}


def _valid(code):
    try:
        KeyCode(code)
        return True
    except ValueError:
        return False


def test_keycode_names_roundtrip():
    assert KeyCode.from_name("BACKSPACE") == KeyCode.BACKSPACE
    assert KeyCode.from_name("ENTER").name == "ENTER"
    assert KeyCode.from_name("k").char == "k"
    with pytest.raises(ValueError):
        KeyCode.BACKSPACE.char
    with pytest.raises(ValueError):
        KeyCode.of("é")


def test_dispatch_rewrite_keeps_candidates_coherent():
    d = KeyDispatch.from_event(KeyEvent("pw", 0, KeyCode.of("k")))
    assert d.key_codes[0] == d.primary_code
    d.rewrite(KeyCode.of("q"))
    assert d.primary_code == d.key_codes[0] == KeyCode.of("q")


class TestTouch:
    def test_first_cell(self):
        assert touch_to_keycode(DEFAULT_LAYOUT, 0.5, 0.5) == KeyCode.of("q")

    def test_row_one_index_seven(self):
        # "asdfghjkl"[7]
        assert touch_to_keycode(DEFAULT_LAYOUT, 7.5, 1.5) == KeyCode.of("k")

    @pytest.mark.parametrize("x,y", [(12.0, 0.5), (-0.1, 0.5), (0.5, 3.0), (9.5, 1.5), (7.0, 2.0)])
    def test_outside(self, x, y):
        with pytest.raises(NoKeyAtPoint):
            touch_to_keycode(DEFAULT_LAYOUT, x, y)

    def test_half_open_bounds(self):
        assert touch_to_keycode(DEFAULT_LAYOUT, 1.0, 0.0) == KeyCode.of("w")
        assert touch_to_keycode(DEFAULT_LAYOUT, 0.0, 1.0) == KeyCode.of("a")

    @given(st.floats(0, 10, exclude_max=True), st.floats(0, 3, exclude_max=True))
    def test_cell_contains_point(self, x, y):
        try:
            key = touch_to_keycode(DEFAULT_LAYOUT, x, y)
        except NoKeyAtPoint:
            return
        col, row = DEFAULT_LAYOUT.cell_of(key.char)
        assert col <= x < col + 1 and row <= y < row + 1

    def test_layout_rejects_duplicates(self):
        with pytest.raises(ValueError):
            KeyboardLayout(("abc", "cde"))


class TestEditor:
    def make(self):
        ed = EditorState()
        ed.add_field("f")
        return ed

    def test_commit_on_empty(self):
        ed = self.make()
        upd = editor_apply(ed, "f", CommitChar(KeyCode.of("a"), 0))
        assert ed.text("f") == "a"
        assert upd == SelectionUpdate("f", 0, 0, 1, 1, -1, -1)

    def test_backspace(self):
        ed = self.make()
        ed.apply("f", CommitChar(KeyCode.of("a"), 0))
        ed.apply("f", CommitChar(KeyCode.of("b"), 1))
        upd = ed.apply("f", Backspace())
        assert ed.text("f") == "a"
        assert upd.new_sel_start == 1
        assert ed.committed_seqs("f") == [(0, 0)]

    def test_backspace_on_empty(self):
        ed = self.make()
        upd = ed.apply("f", Backspace())
        assert ed.text("f") == ""
        assert (upd.new_sel_start, upd.new_sel_end) == (upd.old_sel_start, upd.old_sel_end)

    def test_enter_leaves_text(self):
        ed = self.make()
        ed.apply("f", CommitChar(KeyCode.of("a"), 0))
        upd = ed.apply("f", Enter())
        assert ed.text("f") == "a" and upd.new_sel_start == upd.old_sel_start == 1

    def test_unknown_field(self):
        with pytest.raises(UnknownField):
            self.make().apply("nope", Enter())

    def test_replace_at(self):
        ed = self.make()
        for i, ch in enumerate("abX"):
            ed.apply("f", CommitChar(KeyCode.of(ch), i))
        editor_replace_at(ed, "f", 2, KeyCode.of("c"))
        assert ed.text("f") == "abc"
        assert ed.cursors["f"] == 3
        editor_replace_at(ed, "f", 1, KeyCode.of("b"))
        assert ed.text("f") == "abc"
        with pytest.raises(SeqNotFound):
            ed.replace_at("f", 99, KeyCode.of("z"))

    @given(st.lists(st.one_of(st.sampled_from("xyz"), st.just("BS")), max_size=40))
    def test_length_and_seq_positions(self, actions):
        ed = self.make()
        commits = backspaces = 0
        expected = []
        for seq, a in enumerate(actions):
            if a == "BS":
                if ed.cursors["f"] > 0:
                    backspaces += 1
                    expected.pop()
                ed.apply("f", Backspace())
            else:
                commits += 1
                expected.append((a, seq))
                ed.apply("f", CommitChar(KeyCode.of(a), seq))
        assert len(ed.text("f")) == commits - backspaces
        for pos, seq in ed.committed_seqs("f"):
            assert (ed.text("f")[pos], seq) == expected[pos]

    def test_deterministic(self):
        updates = []
        for _ in range(2):
            ed = self.make()
            seq_updates = [ed.apply("f", CommitChar(KeyCode.of(c), i)) for i, c in enumerate("hello")]
            seq_updates.append(ed.apply("f", Backspace()))
            updates.append((ed.text("f"), seq_updates))
        assert updates[0] == updates[1]


def test_virtual_clock():
    clock = VirtualClock()
    assert clock.now == 0
    clock.advance(10)
    clock.advance(0)
    assert clock.now == 10
    with pytest.raises(ValueError):
        clock.advance(-1)
