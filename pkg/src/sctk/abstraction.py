"""Input equivalence classes and the finite-state abstraction of the reference.

Guard strings double as class identifiers.  The abstraction uses class ids
as the input alphabet and printed output valuations (plus the reserved idle
symbol) as the output alphabet; minimization makes it the canonical
reference machine for test generation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ToolchainError
from .fsm import Fsm
from .guards import (
    IDLE,
    IDLE_SYMBOL,
    GuardExpr,
    canonical_print,
    eval_guard,
    print_output,
)
from .model import InterfaceSpec, Valuation, iter_valuations
from .policy import Sfsm, SfsmTransition


class ClassOverlapError(ToolchainError):
    def __init__(self, guard_a: str, guard_b: str, witness: Valuation):
        super().__init__(
            f"guards {guard_a!r} and {guard_b!r} overlap; witness {witness!r}"
        )
        self.guards = (guard_a, guard_b)
        self.witness = witness


class UnsatisfiableGuardError(ToolchainError):
    pass


@dataclass(frozen=True)
class InputClass:
    id: str  # canonical guard string
    guard: GuardExpr
    representative: Valuation  # lexicographically smallest satisfying input valuation


@dataclass(frozen=True)
class ClassAlphabet:
    classes: tuple[InputClass, ...]

    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.classes)

    def by_id(self, class_id: str) -> InputClass:
        for c in self.classes:
            if c.id == class_id:
                return c
        raise ToolchainError(f"unknown input class {class_id!r}")


def extract_classes(r: Sfsm, iface: InterfaceSpec) -> ClassAlphabet:
    """One class per distinct guard string of `r`, verified mutually exclusive.

    A single enumeration pass over all input valuations both finds each
    class's representative (first satisfying valuation in canonical order)
    and proves global pairwise disjointness.
    """
    guards: dict[str, GuardExpr] = {}
    for t in r.transitions:
        guards.setdefault(canonical_print(t.guard), t.guard)

    first_hit: dict[str, tuple[int, Valuation]] = {}
    for idx, val in enumerate(iter_valuations(iface.inputs)):
        hits = [gid for gid, g in guards.items() if eval_guard(g, val)]
        if len(hits) > 1:
            raise ClassOverlapError(hits[0], hits[1], val)
        if hits and hits[0] not in first_hit:
            first_hit[hits[0]] = (idx, val)

    unsat = [gid for gid in guards if gid not in first_hit]
    if unsat:
        raise UnsatisfiableGuardError(f"unsatisfiable guard(s): {unsat}")

    ordered = sorted(guards, key=lambda gid: first_hit[gid][0])
    classes = tuple(InputClass(gid, guards[gid], first_hit[gid][1]) for gid in ordered)
    return ClassAlphabet(classes)


def count_unclassified(classes: ClassAlphabet, iface: InterfaceSpec) -> int:
    """Input valuations satisfying no class; these stimuli are excluded from testing."""
    count = 0
    for val in iter_valuations(iface.inputs):
        if not any(eval_guard(c.guard, val) for c in classes.classes):
            count += 1
    return count


def complete_with_idle(r: Sfsm, classes: ClassAlphabet) -> Sfsm:
    """Add idle self-loops so every (state, class) pair has exactly one transition."""
    present: dict[str, set[str]] = {s: set() for s in r.states}
    for t in r.transitions:
        present[t.src].add(canonical_print(t.guard))

    added = []
    for state in r.states:
        for c in classes.classes:
            if c.id not in present[state]:
                added.append(SfsmTransition(state, c.guard, IDLE, state))

    state_index = {s: i for i, s in enumerate(r.states)}
    transitions = sorted(
        list(r.transitions) + added,
        key=lambda t: (state_index[t.src], canonical_print(t.guard)),
    )
    return Sfsm(r.states, r.initial, tuple(transitions))


def abstract_to_fsm(r: Sfsm, classes: ClassAlphabet, iface: InterfaceSpec) -> Fsm:
    """Abstract the idle-completed reference to a concrete FSM over class ids."""
    rows = {}
    for t in r.transitions:
        gid = canonical_print(t.guard)
        symbol = IDLE_SYMBOL if t.output is IDLE else print_output(t.output, iface)
        key = (t.src, gid)
        if key in rows:
            raise ToolchainError(f"reference has two transitions for {key!r}")
        rows[key] = (symbol, t.tgt)

    ids = classes.ids()
    missing = [(s, gid) for s in r.states for gid in ids if (s, gid) not in rows]
    if missing:
        raise ToolchainError(
            f"reference is not input-complete over the class alphabet, e.g. {missing[0]!r}"
        )
    outputs = sorted({out for out, _ in rows.values()} | {IDLE_SYMBOL})
    return Fsm.make(r.states, r.initial, ids, outputs, rows)


def minimize(m: Fsm) -> Fsm:
    """Language-preserving minimization by partition refinement.

    Unreachable states are dropped first.  Merged blocks are named after
    their lexicographically smallest member, which keeps artifacts stable.
    """
    reach = m.reachable_states()

    def signature(state, block_of):
        return tuple(block_of[m.step(state, i)[1]] for i in m.inputs)

    # initial partition: group by full output row
    blocks: list[list[str]] = []
    row_to_block: dict[tuple, int] = {}
    block_of: dict[str, int] = {}
    for s in reach:
        row = tuple(m.step(s, i)[0] for i in m.inputs)
        if row not in row_to_block:
            row_to_block[row] = len(blocks)
            blocks.append([])
        block_of[s] = row_to_block[row]
        blocks[row_to_block[row]].append(s)

    while True:
        new_blocks: list[list[str]] = []
        new_block_of: dict[str, int] = {}
        for block in blocks:
            split: dict[tuple, int] = {}
            for s in block:
                sig = signature(s, block_of)
                if sig not in split:
                    split[sig] = len(new_blocks)
                    new_blocks.append([])
                new_block_of[s] = split[sig]
                new_blocks[split[sig]].append(s)
        if len(new_blocks) == len(blocks):
            break
        blocks, block_of = new_blocks, new_block_of

    rep_of_block = [min(block) for block in blocks]
    original_pos = {s: i for i, s in enumerate(m.states)}
    order = sorted(range(len(blocks)), key=lambda b: original_pos[rep_of_block[b]])
    new_states = tuple(rep_of_block[b] for b in order)

    rows = {}
    for b in order:
        rep = rep_of_block[b]
        for i in m.inputs:
            out, tgt = m.step(rep, i)
            rows[(rep, i)] = (out, rep_of_block[block_of[tgt]])
    occurring = {out for out, _ in rows.values()}
    outputs = tuple(o for o in m.outputs if o in occurring)
    initial = rep_of_block[block_of[m.initial]]
    return Fsm.make(new_states, initial, m.inputs, outputs, rows)
