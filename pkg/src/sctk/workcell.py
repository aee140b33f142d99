"""Built-in example: safety supervision of a collaborative welding workcell.

An operator shares a cell with a welding robot.  Three risk factors track
hazardous situations through their inactive/active/mitigated life-cycle:

* HS  -- operator at the welding spot while the welder is powered,
* HC  -- operator and robot close together at the welding spot,
* HRW -- operator and robot both on the workbench.

The supervisor observes operator position, robot position and welder power,
and reacts by switching the safety mode and the notification channel.  The
policy emitted here is the already-resolved controller fragment, i.e. a
deterministic reaction for every (risk state, observation) pair.
"""

from __future__ import annotations

from .model import InterfaceSpec, Valuation, interface_from_doc, iter_valuations
from .policy import risk_state_name

INTERFACE_DOC = {
    "sorts": [
        {"name": "hloc_t", "values": ["away", "bench", "weldspot"]},
        {"name": "rloc_t", "values": ["bench", "weldspot"]},
        {"name": "welder_t", "values": ["off", "on"]},
        {"name": "safmod_t", "values": ["normal", "slow", "stopped"]},
        {"name": "notif_t", "values": ["off", "warn", "alarm"]},
        {"name": "phase_t", "values": ["0", "a", "m"]},
    ],
    "vars": [
        {"name": "hloc", "sort": "hloc_t", "kind": "I"},
        {"name": "rloc", "sort": "rloc_t", "kind": "I"},
        {"name": "wact", "sort": "welder_t", "kind": "I"},
        {"name": "safmod", "sort": "safmod_t", "kind": "O"},
        {"name": "notif", "sort": "notif_t", "kind": "O"},
        {"name": "HS", "sort": "phase_t", "kind": "F"},
        {"name": "HC", "sort": "phase_t", "kind": "F"},
        {"name": "HRW", "sort": "phase_t", "kind": "F"},
    ],
}

FACTORS = ("HS", "HC", "HRW")

INITIAL_INPUTS = {"hloc": "away", "rloc": "bench", "wact": "off"}


def workcell_interface() -> InterfaceSpec:
    return interface_from_doc(INTERFACE_DOC)


def hazard_present(factor: str, inputs) -> bool:
    if factor == "HS":
        return inputs["hloc"] == "weldspot" and inputs["wact"] == "on"
    if factor == "HC":
        return inputs["hloc"] == "weldspot" and inputs["rloc"] == "weldspot"
    if factor == "HRW":
        return inputs["hloc"] == "bench" and inputs["rloc"] == "bench"
    raise ValueError(f"unknown factor {factor!r}")


def next_phase(phase: str, hazard: bool, inputs) -> str:
    if phase == "0":
        return "a" if hazard else "0"
    if phase == "a":
        # newly detected events are mitigated in the very next control step
        return "m"
    # resumption only once the hazard is gone and the operator has left the cell
    if not hazard and inputs["hloc"] == "away":
        return "0"
    return "m"


def control_outputs(phases) -> dict[str, str]:
    active = any(phases[f] == "a" for f in FACTORS)
    mitigated = any(phases[f] == "m" for f in FACTORS)
    if active:
        return {"safmod": "stopped", "notif": "alarm"}
    if mitigated:
        return {"safmod": "slow", "notif": "warn"}
    return {"safmod": "normal", "notif": "off"}


def control_step(phases: dict[str, str], inputs) -> tuple[dict[str, str], dict[str, str]]:
    """The supervisor's reaction: (next phases, outputs)."""
    nxt = {f: next_phase(phases[f], hazard_present(f, inputs), inputs) for f in FACTORS}
    return nxt, control_outputs(nxt)


def reachable_risk_states(iface: InterfaceSpec) -> list[dict[str, str]]:
    start = {f: "0" for f in FACTORS}
    seen = {tuple(sorted(start.items()))}
    order = [start]
    frontier = [start]
    while frontier:
        nxt_frontier = []
        for phases in frontier:
            for inputs in iter_valuations(iface.inputs):
                nxt, _ = control_step(phases, inputs)
                key = tuple(sorted(nxt.items()))
                if key not in seen:
                    seen.add(key)
                    order.append(nxt)
                    nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return order


def workcell_policy_doc() -> dict:
    """The controller fragment of the resolved workcell model, as a policy document."""
    iface = workcell_interface()
    transitions = []

    def full_state(inputs: Valuation, outputs: dict[str, str], phases: dict[str, str]) -> dict:
        state = dict(inputs.as_dict())
        state.update(outputs)
        state.update(phases)
        return state

    for phases in reachable_risk_states(iface):
        held = control_outputs(phases)
        for inputs in iter_valuations(iface.inputs):
            nxt_phases, nxt_outputs = control_step(phases, inputs)
            if nxt_phases == phases:
                # the supervisor's idle steps are not part of the controller
                # fragment; input completion happens downstream
                continue
            src_name = risk_state_name(Valuation.of(phases), iface)
            tgt_name = risk_state_name(Valuation.of(nxt_phases), iface)
            transitions.append(
                {
                    "source": full_state(inputs, held, phases),
                    "target": full_state(inputs, nxt_outputs, nxt_phases),
                    "action": f"c_{src_name}_{tgt_name}",
                    "prob": 1,
                    "owner": "C",
                }
            )

    # a few environment moves from the initial state, for loader coverage;
    # derivation ignores them
    initial_phases = {f: "0" for f in FACTORS}
    initial = full_state(Valuation.of(INITIAL_INPUTS), control_outputs(initial_phases), initial_phases)
    env_moves = [
        {"hloc": "bench", "rloc": "bench", "wact": "off"},
        {"hloc": "weldspot", "rloc": "bench", "wact": "on"},
        {"hloc": "weldspot", "rloc": "weldspot", "wact": "off"},
        {"hloc": "away", "rloc": "weldspot", "wact": "on"},
    ]
    for idx, move in enumerate(env_moves):
        target = dict(initial)
        target.update(move)
        transitions.append(
            {
                "source": dict(initial),
                "target": target,
                "action": f"e_move{idx}",
                "prob": 0.25,
                "owner": "E",
            }
        )

    return {"interface": INTERFACE_DOC, "initial": initial, "transitions": transitions}
