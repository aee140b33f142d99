"""Policy import: translate a synthesized controller fragment into the symbolic test reference.

The policy file is the controller part of a resolved (deterministic)
stochastic-model transition relation.  Each controller transition becomes
one symbolic FSM transition: the source's monitored restriction turns into
a total-conjunction guard, the target's controlled/factor restrictions into
the output and successor risk state.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .artifacts import canonical_bytes, load_json, write_bytes
from .errors import ToolchainError
from .guards import (
    IDLE,
    GuardExpr,
    canonical_print,
    conjunction_of,
    eval_guard,
    parse_guard,
)
from .model import (
    InterfaceSpec,
    Valuation,
    interface_from_doc,
    iter_valuations,
    load_interface,
)

OWNER_CONTROLLER = "C"
OWNER_ENVIRONMENT = "E"


class PolicyError(ToolchainError):
    pass


class DeterminismError(PolicyError):
    """Two controller transitions agree on risk state and inputs but disagree on the update."""


@dataclass(frozen=True)
class PolicyTransition:
    source: Valuation
    target: Valuation
    action: str
    prob: float
    owner: str


@dataclass(frozen=True)
class SfsmTransition:
    src: str
    guard: GuardExpr
    output: object  # Valuation over the controlled variables, or IDLE
    tgt: str


@dataclass(frozen=True)
class Sfsm:
    """Deterministic symbolic FSM over risk states with guarded transitions."""

    states: tuple[str, ...]
    initial: str
    transitions: tuple[SfsmTransition, ...]

    def __post_init__(self):
        if self.initial not in self.states:
            raise PolicyError(f"initial state {self.initial!r} not among states")
        state_set = set(self.states)
        for t in self.transitions:
            if t.src not in state_set or t.tgt not in state_set:
                raise PolicyError(f"transition references undeclared state: {t.src!r} -> {t.tgt!r}")


def risk_state_name(factor_valuation: Valuation, iface: InterfaceSpec) -> str:
    """Print a factor valuation as a phase string, e.g. {HS: m} -> 'HSm'.

    Inactive factors (phase '0') are omitted; the all-inactive state prints
    as '0'.
    """
    parts = []
    for f in iface.factors:
        phase = factor_valuation[f.name]
        if phase != "0":
            parts.append(f"{f.name}{phase}")
    return "".join(parts) or "0"


# ---------------------------------------------------------------------------
# Policy file loading


def load_policy(source, iface: InterfaceSpec | None = None):
    """Load a policy file; returns (transitions, initial valuation, interface).

    `source` is a path or an already-parsed document.  The interface is
    taken from the explicit argument if given, otherwise from the file's
    inline "interface" object or relative path.
    """
    base_dir = None
    if isinstance(source, (str, Path)):
        base_dir = Path(source).parent
        doc = load_json(source)
    else:
        doc = source

    if iface is None:
        ref = doc.get("interface")
        if ref is None:
            raise PolicyError("policy file carries no interface and none was supplied")
        if isinstance(ref, dict):
            iface = interface_from_doc(ref)
        elif isinstance(ref, str):
            if base_dir is None:
                raise PolicyError("interface given as a path, but the policy was not loaded from a file")
            iface = load_interface(base_dir / ref)
        else:
            raise PolicyError(f"bad interface reference: {ref!r}")

    all_names = iface.names()
    try:
        initial_doc = doc["initial"]
        transition_docs = doc["transitions"]
    except KeyError as exc:
        raise PolicyError(f"policy file lacks required field {exc}") from None
    if not isinstance(initial_doc, dict) or not isinstance(transition_docs, list):
        raise PolicyError("policy fields have wrong types: 'initial' object, 'transitions' array")

    initial = Valuation.of(initial_doc)
    iface.check_valuation(initial, all_names, where="initial state")

    transitions = []
    for idx, td in enumerate(transition_docs):
        where = f"transitions[{idx}]"
        try:
            src_doc, tgt_doc = td["source"], td["target"]
            action, prob, owner = td["action"], td["prob"], td["owner"]
        except (KeyError, TypeError):
            raise PolicyError(f"{where}: malformed transition entry") from None
        if owner not in (OWNER_CONTROLLER, OWNER_ENVIRONMENT):
            raise PolicyError(f"{where}: owner must be 'C' or 'E', got {owner!r}")
        if not isinstance(prob, (int, float)) or not (0 < prob <= 1):
            raise PolicyError(f"{where}: prob must be in (0,1], got {prob!r}")
        if owner == OWNER_CONTROLLER and prob != 1:
            raise PolicyError(f"{where}: controller transition with prob {prob!r} != 1")
        source_val = Valuation.of(src_doc)
        target_val = Valuation.of(tgt_doc)
        iface.check_valuation(source_val, all_names, where=f"{where}.source")
        iface.check_valuation(target_val, all_names, where=f"{where}.target")
        transitions.append(PolicyTransition(source_val, target_val, action, float(prob), owner))

    if not any(t.owner == OWNER_CONTROLLER for t in transitions):
        raise PolicyError("no controller transitions")
    return transitions, initial, iface


# ---------------------------------------------------------------------------
# Reference derivation


def derive_reference(transitions, initial: Valuation, iface: InterfaceSpec) -> Sfsm:
    """Translate controller transitions into the symbolic test reference.

    Per distinct controller-transition class: src = source risk state, guard =
    total conjunction over the source's monitored values, output = the
    *target's* controlled restriction, tgt = target risk state.  Duplicates
    collapse; conflicting updates for the same (risk state, inputs) raise
    DeterminismError.
    """
    f_names = iface.names("F")
    i_names = iface.names("I")
    o_names = iface.names("O")

    names_seen: dict[str, Valuation] = {}

    def state_name(fv: Valuation) -> str:
        name = risk_state_name(fv, iface)
        prior = names_seen.get(name)
        if prior is not None and prior != fv:
            raise PolicyError(
                f"risk state name collision: {name!r} for both {prior!r} and {fv!r}"
            )
        names_seen[name] = fv
        return name

    seen: dict[tuple[str, str], tuple[Valuation, str, int]] = {}
    for idx, t in enumerate(transitions):
        if t.owner != OWNER_CONTROLLER:
            continue
        src_name = state_name(t.source.restrict(f_names))
        tgt_name = state_name(t.target.restrict(f_names))
        guard = conjunction_of(t.source.restrict(i_names), iface)
        output = t.target.restrict(o_names)
        key = (src_name, canonical_print(guard))
        update = (output, tgt_name)
        if key in seen:
            prev_output, prev_tgt, prev_idx = seen[key]
            if (prev_output, prev_tgt) != update:
                raise DeterminismError(
                    f"transitions[{prev_idx}] and transitions[{idx}] share risk state "
                    f"{src_name!r} and inputs {key[1]!r} but disagree on the update"
                )
        else:
            seen[key] = (output, tgt_name, idx)

    initial_name = state_name(initial.restrict(f_names))
    occurring = set(names_seen)

    states = []
    for fv in iter_valuations(iface.factors):
        name = risk_state_name(fv, iface)
        if name in occurring and name not in states:
            states.append(name)
    state_index = {s: i for i, s in enumerate(states)}

    sfsm_transitions = []
    for (src_name, guard_str), (output, tgt_name, _) in seen.items():
        sfsm_transitions.append(
            SfsmTransition(src_name, parse_guard(guard_str, iface), output, tgt_name)
        )
    sfsm_transitions.sort(key=lambda t: (state_index[t.src], canonical_print(t.guard)))

    return Sfsm(tuple(states), initial_name, tuple(sfsm_transitions))


# ---------------------------------------------------------------------------
# Reference simulation


def _outgoing(r: Sfsm) -> dict:
    # memoized on the (immutable) reference; hashing the whole Sfsm per call
    # would dominate simulation time
    table = getattr(r, "_outgoing_cache", None)
    if table is None:
        table = {s: [] for s in r.states}
        for t in r.transitions:
            table[t.src].append(t)
        object.__setattr__(r, "_outgoing_cache", table)
    return table


def step_reference(r: Sfsm, state: str, input_val: Valuation):
    """One reference step: fire the unique enabled transition, or idle in place."""
    enabled = [t for t in _outgoing(r)[state] if eval_guard(t.guard, input_val)]
    if not enabled:
        return IDLE, state
    if len(enabled) > 1:
        raise DeterminismError(
            f"state {state!r}: {len(enabled)} transitions enabled on {input_val!r}"
        )
    t = enabled[0]
    return t.output, t.tgt


# ---------------------------------------------------------------------------
# Reference file format


def sfsm_to_doc(r: Sfsm, iface: InterfaceSpec, meta: dict | None = None) -> dict:
    o_names = [v.name for v in iface.outputs]
    transitions = []
    for t in r.transitions:
        if t.output is IDLE:
            raise PolicyError("idle-completed references are in-memory only; refusing to serialize IDLE")
        transitions.append(
            {
                "src": t.src,
                "guard": canonical_print(t.guard),
                "output": {n: t.output[n] for n in o_names},
                "tgt": t.tgt,
            }
        )
    doc = {"states": list(r.states), "initial": r.initial, "transitions": transitions}
    if meta:
        doc["meta"] = meta
    return doc


def sfsm_bytes(r: Sfsm, iface: InterfaceSpec, meta: dict | None = None) -> bytes:
    return canonical_bytes(sfsm_to_doc(r, iface, meta))


def save_sfsm(path, r: Sfsm, iface: InterfaceSpec, meta: dict | None = None) -> None:
    write_bytes(path, sfsm_bytes(r, iface, meta))


def sfsm_from_doc(doc: dict, iface: InterfaceSpec):
    try:
        states = tuple(doc["states"])
        initial = doc["initial"]
        transition_docs = doc["transitions"]
    except (KeyError, TypeError):
        raise PolicyError("reference document needs 'states', 'initial', 'transitions'") from None
    if len(set(states)) != len(states):
        raise PolicyError("duplicate state names in reference")
    state_index = {s: i for i, s in enumerate(states)}
    o_names = iface.names("O")

    transitions = []
    guards_per_state: dict[str, set[str]] = {}
    for idx, td in enumerate(transition_docs):
        where = f"transitions[{idx}]"
        try:
            src, guard_str, output_doc, tgt = td["src"], td["guard"], td["output"], td["tgt"]
        except (KeyError, TypeError):
            raise PolicyError(f"{where}: malformed transition entry") from None
        if src not in state_index or tgt not in state_index:
            raise PolicyError(f"{where}: undeclared state {src!r} or {tgt!r}")
        guard = parse_guard(guard_str, iface)
        gstr = canonical_print(guard)
        per_state = guards_per_state.setdefault(src, set())
        if gstr in per_state:
            raise PolicyError(f"{where}: duplicate guard {gstr!r} at state {src!r} (nondeterministic)")
        per_state.add(gstr)
        output = Valuation.of(output_doc)
        iface.check_valuation(output, o_names, where=f"{where}.output")
        transitions.append(SfsmTransition(src, guard, output, tgt))

    transitions.sort(key=lambda t: (state_index[t.src], canonical_print(t.guard)))
    r = Sfsm(states, initial, tuple(transitions))
    return r, doc.get("meta", {})


def load_sfsm(path, iface: InterfaceSpec):
    return sfsm_from_doc(load_json(path), iface)
