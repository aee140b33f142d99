"""Shared fixtures: a tiny two-variable interface, a hand-checkable two-factor
policy, and the fully derived workcell artifact chain (session-scoped, it is
used by many modules)."""

from __future__ import annotations

from types import SimpleNamespace

import pytest

from sctk.abstraction import abstract_to_fsm, complete_with_idle, extract_classes, minimize
from sctk.gcl import generate_code
from sctk.harness import Wrapper
from sctk.model import interface_from_doc
from sctk.policy import derive_reference, load_policy
from sctk.testgen import generate_h
from sctk.workcell import workcell_policy_doc

TINY_DOC = {
    "sorts": [
        {"name": "ab", "values": ["a", "b"]},
        {"name": "num", "values": ["0", "1"]},
        {"name": "onoff", "values": ["off", "on"]},
        {"name": "phase", "values": ["0", "a", "m"]},
    ],
    "vars": [
        {"name": "x", "sort": "ab", "kind": "I"},
        {"name": "y", "sort": "num", "kind": "I"},
        {"name": "act", "sort": "onoff", "kind": "O"},
        {"name": "f", "sort": "phase", "kind": "F"},
    ],
}


@pytest.fixture
def tiny_iface():
    return interface_from_doc(TINY_DOC)


TWO_FACTOR_DOC = {
    "sorts": [
        {"name": "level", "values": ["lo", "hi"]},
        {"name": "onoff", "values": ["off", "on"]},
        {"name": "phase", "values": ["0", "a", "m"]},
    ],
    "vars": [
        {"name": "x", "sort": "level", "kind": "I"},
        {"name": "act", "sort": "onoff", "kind": "O"},
        {"name": "FA", "sort": "phase", "kind": "F"},
        {"name": "FB", "sort": "phase", "kind": "F"},
    ],
}


def _tf_state(x, act, fa, fb):
    return {"x": x, "act": act, "FA": fa, "FB": fb}


def two_factor_policy_doc():
    """Six controller transitions over two factors; small enough to map by hand."""
    transitions = [
        {"source": _tf_state("hi", "off", "0", "0"), "target": _tf_state("hi", "on", "a", "0"),
         "action": "detect_fa", "prob": 1, "owner": "C"},
        {"source": _tf_state("hi", "on", "a", "0"), "target": _tf_state("hi", "on", "m", "0"),
         "action": "mitigate_fa", "prob": 1, "owner": "C"},
        {"source": _tf_state("lo", "on", "a", "0"), "target": _tf_state("lo", "on", "m", "0"),
         "action": "mitigate_fa", "prob": 1, "owner": "C"},
        {"source": _tf_state("lo", "on", "m", "0"), "target": _tf_state("lo", "off", "0", "0"),
         "action": "resume_fa", "prob": 1, "owner": "C"},
        {"source": _tf_state("hi", "on", "m", "0"), "target": _tf_state("hi", "on", "m", "a"),
         "action": "detect_fb", "prob": 1, "owner": "C"},
        {"source": _tf_state("hi", "on", "m", "a"), "target": _tf_state("hi", "on", "m", "m"),
         "action": "mitigate_fb", "prob": 1, "owner": "C"},
    ]
    return {
        "interface": TWO_FACTOR_DOC,
        "initial": _tf_state("lo", "off", "0", "0"),
        "transitions": transitions,
    }


#: the six reference transitions the policy above must map to, one for one
TWO_FACTOR_EXPECTED = [
    ("0", "x=hi", {"act": "on"}, "FAa"),
    ("FAa", "x=hi", {"act": "on"}, "FAm"),
    ("FAa", "x=lo", {"act": "on"}, "FAm"),
    ("FAm", "x=lo", {"act": "off"}, "0"),
    ("FAm", "x=hi", {"act": "on"}, "FAmFBa"),
    ("FAmFBa", "x=hi", {"act": "on"}, "FAmFBm"),
]


@pytest.fixture
def two_factor():
    doc = two_factor_policy_doc()
    transitions, initial, iface = load_policy(doc)
    return SimpleNamespace(doc=doc, transitions=transitions, initial=initial, iface=iface)


@pytest.fixture(scope="session")
def workcell():
    """The complete derived artifact chain for the workcell example."""
    doc = workcell_policy_doc()
    transitions, initial, iface = load_policy(doc)
    reference = derive_reference(transitions, initial, iface)
    classes = extract_classes(reference, iface)
    completed = complete_with_idle(reference, classes)
    machine = minimize(abstract_to_fsm(completed, classes, iface))
    suite = generate_h(machine, len(machine.states))
    program = generate_code(completed, iface)
    wrapper = Wrapper.for_reference(classes, completed, iface)
    return SimpleNamespace(
        doc=doc,
        policy_transitions=transitions,
        initial=initial,
        iface=iface,
        reference=reference,
        classes=classes,
        completed=completed,
        fsm=machine,
        suite=suite,
        program=program,
        wrapper=wrapper,
    )


@pytest.fixture
def robot_iface():
    """Interface shaped like the running robotics example's monitored/controlled sets."""
    return interface_from_doc(
        {
            "sorts": [
                {"name": "rloc_t", "values": ["atTable", "atWeldSpot"]},
                {"name": "range_t", "values": ["near", "far"]},
                {"name": "safmod_t", "values": ["normal", "stopped"]},
                {"name": "notif_t", "values": ["off", "on"]},
                {"name": "phase", "values": ["0", "a", "m"]},
            ],
            "vars": [
                {"name": "rloc", "sort": "rloc_t", "kind": "I"},
                {"name": "rngDet", "sort": "range_t", "kind": "I"},
                {"name": "safmod", "sort": "safmod_t", "kind": "O"},
                {"name": "notif", "sort": "notif_t", "kind": "O"},
                {"name": "HS", "sort": "phase", "kind": "F"},
            ],
        }
    )
