import pytest

from sctk.errors import FormatError
from sctk.fsm import (
    Fsm,
    FsmError,
    fsm_from_doc,
    fsm_from_text,
    fsm_to_doc,
    fsm_to_text,
    load_fsm,
    load_fsm_text,
    save_fsm,
    save_fsm_text,
)


def toggle_machine():
    rows = {
        ("s0", "a"): ("x", "s1"),
        ("s0", "b"): ("x", "s0"),
        ("s1", "a"): ("y", "s0"),
        ("s1", "b"): ("y", "s1"),
    }
    return Fsm.make(("s0", "s1"), "s0", ("a", "b"), ("x", "y"), rows)


def test_step_and_run():
    m = toggle_machine()
    assert m.step("s0", "a") == ("x", "s1")
    outputs, end = m.run(["a", "a", "b"])
    assert outputs == ("x", "y", "x")
    assert end == "s0"
    assert m.state_after(["a"]) == "s1"


def test_validation_rejects_incomplete_and_duplicates():
    with pytest.raises(FsmError, match="incomplete"):
        Fsm.make(("s0",), "s0", ("a", "b"), ("x",), {("s0", "a"): ("x", "s0")})
    with pytest.raises(FsmError, match="nondeterministic"):
        Fsm(("s0",), "s0", ("a",), ("x",), (("s0", "a", "x", "s0"), ("s0", "a", "x", "s0")))
    with pytest.raises(FsmError, match="undeclared output"):
        Fsm.make(("s0",), "s0", ("a",), ("x",), {("s0", "a"): ("q", "s0")})
    with pytest.raises(FsmError, match="initial state"):
        Fsm.make(("s0",), "s1", ("a",), ("x",), {("s0", "a"): ("x", "s0")})


def test_rows_are_normalized_to_canonical_order():
    rows = [("s1", "b", "y", "s1"), ("s0", "a", "x", "s1"), ("s1", "a", "y", "s0"), ("s0", "b", "x", "s0")]
    m = Fsm.make(("s0", "s1"), "s0", ("a", "b"), ("x", "y"), rows)
    assert m == toggle_machine()


def test_json_round_trip(tmp_path):
    m = toggle_machine()
    doc = fsm_to_doc(m, {"sfsm_hash": "h"})
    loaded, meta = fsm_from_doc(doc)
    assert loaded == m and meta == {"sfsm_hash": "h"}
    path = tmp_path / "m.json"
    save_fsm(path, m, {"sfsm_hash": "h"})
    loaded, meta = load_fsm(path)
    assert loaded == m and meta == {"sfsm_hash": "h"}


def test_text_round_trip(tmp_path):
    m = toggle_machine()
    text = fsm_to_text(m)
    assert text.splitlines()[0] == "@initial s0"
    assert "s0 a x s1" in text
    assert fsm_from_text(text) == m
    path = tmp_path / "m.fsm"
    save_fsm_text(path, m)
    assert load_fsm_text(path) == m


def test_text_parse_errors():
    with pytest.raises(FormatError, match="missing @initial"):
        fsm_from_text("s0 a x s0\n")
    with pytest.raises(FormatError, match="line 2"):
        fsm_from_text("@initial s0\ns0 a x\n")
    with pytest.raises(FormatError, match="unknown header"):
        fsm_from_text("@initial s0\n@bogus 1\n")


def test_reachable_states_orders_breadth_first():
    rows = {
        ("s0", "a"): ("x", "s2"),
        ("s0", "b"): ("x", "s0"),
        ("s1", "a"): ("x", "s0"),  # unreachable
        ("s1", "b"): ("x", "s1"),
        ("s2", "a"): ("y", "s0"),
        ("s2", "b"): ("y", "s2"),
    }
    m = Fsm.make(("s0", "s1", "s2"), "s0", ("a", "b"), ("x", "y"), rows)
    assert m.reachable_states() == ("s0", "s2")


def test_workcell_fsm_text_round_trip(workcell):
    assert fsm_from_text(fsm_to_text(workcell.fsm)) == workcell.fsm
