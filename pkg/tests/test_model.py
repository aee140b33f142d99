import pytest
from hypothesis import given
from hypothesis import strategies as st

from sctk.model import (
    InterfaceError,
    InterfaceSpec,
    Sort,
    Valuation,
    VarDecl,
    domain_size,
    interface_bytes,
    interface_from_doc,
    interface_to_doc,
    iter_valuations,
    load_interface,
    save_interface,
)

from conftest import TINY_DOC


def test_interface_doc_round_trip(tiny_iface):
    assert interface_from_doc(interface_to_doc(tiny_iface)) == tiny_iface


def test_interface_file_round_trip(tiny_iface, tmp_path):
    path = tmp_path / "iface.json"
    save_interface(path, tiny_iface)
    assert load_interface(path) == tiny_iface
    # canonical bytes are stable
    assert path.read_bytes() == interface_bytes(tiny_iface)


def test_factor_sort_requires_phases():
    doc = {
        "sorts": [
            {"name": "bad_phase", "values": ["0", "a"]},  # no mitigated phase
            {"name": "ab", "values": ["a", "b"]},
        ],
        "vars": [
            {"name": "x", "sort": "ab", "kind": "I"},
            {"name": "o", "sort": "ab", "kind": "O"},
            {"name": "f", "sort": "bad_phase", "kind": "F"},
        ],
    }
    with pytest.raises(InterfaceError, match="lacks required phase"):
        interface_from_doc(doc)


def test_duplicate_variable_names_rejected():
    doc = {
        "sorts": [{"name": "ab", "values": ["a", "b"]}, {"name": "phase", "values": ["0", "a", "m"]}],
        "vars": [
            {"name": "x", "sort": "ab", "kind": "I"},
            {"name": "x", "sort": "ab", "kind": "O"},
            {"name": "f", "sort": "phase", "kind": "F"},
        ],
    }
    with pytest.raises(InterfaceError, match="duplicate variable"):
        interface_from_doc(doc)


@pytest.mark.parametrize("kind", ["I", "O", "F"])
def test_each_kind_required(kind):
    doc = {k: [dict(d) for d in v] for k, v in TINY_DOC.items()}
    doc["vars"] = [v for v in doc["vars"] if v["kind"] != kind]
    with pytest.raises(InterfaceError, match="declares no"):
        interface_from_doc(doc)


def test_unknown_kind_and_bad_sort():
    with pytest.raises(InterfaceError, match="unknown kind"):
        VarDecl("x", Sort("s", ("a",)), "Q")
    with pytest.raises(InterfaceError, match="duplicate values"):
        Sort("s", ("a", "a"))
    with pytest.raises(InterfaceError, match="no values"):
        Sort("s", ())


def test_valuation_equality_ignores_insertion_order():
    v1 = Valuation.of({"x": "a", "y": "0"})
    v2 = Valuation.of({"y": "0", "x": "a"})
    assert v1 == v2
    assert hash(v1) == hash(v2)
    assert v1["x"] == "a"
    assert dict(v1) == {"x": "a", "y": "0"}


def test_valuation_restrict():
    v = Valuation.of({"x": "a", "y": "0", "z": "q"})
    assert v.restrict({"x", "z"}) == Valuation.of({"x": "a", "z": "q"})
    assert v.restrict([]) == Valuation.of({})


@given(
    bindings=st.dictionaries(st.sampled_from("abcdef"), st.sampled_from(["0", "1"]), max_size=6),
    xs=st.sets(st.sampled_from("abcdefgh")),
    ys=st.sets(st.sampled_from("abcdefgh")),
)
def test_restriction_composes(bindings, xs, ys):
    v = Valuation.of(bindings)
    assert v.restrict(xs).restrict(ys) == v.restrict(xs & ys)


def test_iter_valuations_canonical_order(tiny_iface):
    vals = list(iter_valuations(tiny_iface.inputs))
    expected = [
        {"x": "a", "y": "0"},
        {"x": "a", "y": "1"},
        {"x": "b", "y": "0"},
        {"x": "b", "y": "1"},
    ]
    assert vals == [Valuation.of(e) for e in expected]
    assert domain_size(tiny_iface.inputs) == 4


def test_check_valuation_messages(tiny_iface):
    with pytest.raises(InterfaceError, match="missing"):
        tiny_iface.check_valuation(Valuation.of({"x": "a"}), ("x", "y"))
    with pytest.raises(InterfaceError, match="unexpected"):
        tiny_iface.check_valuation(Valuation.of({"x": "a", "y": "0", "f": "0"}), ("x", "y"))
    with pytest.raises(InterfaceError, match="not in sort"):
        tiny_iface.check_valuation(Valuation.of({"x": "zz", "y": "0"}), ("x", "y"))


def test_derived_variable_sets(tiny_iface):
    assert tiny_iface.names("I") == ("x", "y")
    assert tiny_iface.names("O") == ("act",)
    assert tiny_iface.names("F") == ("f",)
    assert isinstance(tiny_iface, InterfaceSpec)
