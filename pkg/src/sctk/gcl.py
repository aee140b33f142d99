"""Guarded-command supervisor programs: generation, step semantics, static analysis.

The target is a neutral guarded-command language with one flat command per
reference transition::

    [action] state=<S> & <guard> -> <v1>=<c1>, <v2>=<c2> ; next=<S'>
    [action] state=<S> & <guard> -> IDLE ; next=<S>

A step evaluates the commands of the current state and fires the unique
enabled one; if none is enabled the supervisor idles in place.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from random import Random

from .artifacts import write_bytes
from .errors import FormatError, ParameterError, ToolchainError
from .guards import (
    IDLE,
    GuardExpr,
    UnboundVariableError,
    canonical_print,
    conjunction_pairs,
    eval_guard,
    parse_guard,
)
from .model import InterfaceSpec, Valuation
from .policy import Sfsm


class GclParseError(FormatError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CommandConflictError(ToolchainError):
    """More than one command enabled for the same state and input."""


@dataclass(frozen=True)
class GuardedCommand:
    action: str
    state_test: str
    guard: GuardExpr
    outputs: object  # Valuation over the controlled variables, or IDLE
    next_state: str


@dataclass(frozen=True)
class GclProgram:
    iface: InterfaceSpec
    iface_ref: str
    initial_state: str
    commands: tuple[GuardedCommand, ...]
    source_hash: str | None = None

    def states(self) -> tuple[str, ...]:
        seen = [self.initial_state]
        for c in self.commands:
            for s in (c.state_test, c.next_state):
                if s not in seen:
                    seen.append(s)
        return tuple(sorted(seen))


def generate_code(
    r: Sfsm,
    iface: InterfaceSpec,
    iface_ref: str = "-",
    source_hash: str | None = None,
) -> GclProgram:
    """Translate the idle-completed reference into a supervisor program.

    One command per transition; the action name is derived from the source
    and target risk states; commands are ordered lexicographically by
    (state test, class id).
    """
    commands = []
    for t in r.transitions:
        commands.append(
            GuardedCommand(
                action=f"si_{t.src}_{t.tgt}",
                state_test=t.src,
                guard=t.guard,
                outputs=t.output,
                next_state=t.tgt,
            )
        )
    commands.sort(key=lambda c: (c.state_test, canonical_print(c.guard)))
    return GclProgram(iface, iface_ref, r.initial, tuple(commands), source_hash)


# ---------------------------------------------------------------------------
# Step semantics


def _step_table(p: GclProgram):
    """Per-state command list with precomputed conjunction fast paths.

    Memoized on the (immutable) program instance; an lru_cache would re-hash
    the whole program on every step.
    """
    cached = getattr(p, "_step_cache", None)
    if cached is None:
        table: dict[str, list] = {}
        for c in p.commands:
            table.setdefault(c.state_test, []).append((c, conjunction_pairs(c.guard)))
        input_names = frozenset(v.name for v in p.iface.inputs)
        cached = (table, input_names)
        object.__setattr__(p, "_step_cache", cached)
    return cached


def step(p: GclProgram, current: str, input_val: Valuation):
    """One control step; returns (outputs-or-IDLE, next state).

    An input enabling no command leaves the state unchanged with IDLE
    outputs; two enabled commands are an internal consistency violation and
    raise rather than being resolved silently.
    """
    table, input_names = _step_table(p)
    bound = input_val._map  # hot path; Valuation is immutable
    missing = input_names - bound.keys()
    if missing:
        raise UnboundVariableError(f"input does not bind monitored variable(s) {sorted(missing)}")
    enabled = []
    for c, pairs in table.get(current, ()):
        if pairs is not None:
            for var, want in pairs:
                if bound[var] != want:
                    break
            else:
                enabled.append(c)
        elif eval_guard(c.guard, input_val):
            enabled.append(c)
    if not enabled:
        return IDLE, current
    if len(enabled) > 1:
        raise CommandConflictError(
            f"state {current!r}: commands {[c.action for c in enabled]} all enabled"
        )
    c = enabled[0]
    return c.outputs, c.next_state


# ---------------------------------------------------------------------------
# Serialization

_CMD_RE = re.compile(
    r"\[(?P<action>[A-Za-z_][A-Za-z0-9_]*)\] "
    r"state=(?P<state>[A-Za-z0-9_]+) & (?P<guard>\S+) -> "
    r"(?P<outs>IDLE|[A-Za-z0-9_]+=[A-Za-z0-9_]+(?:, [A-Za-z0-9_]+=[A-Za-z0-9_]+)*)"
    r" ; next=(?P<next>[A-Za-z0-9_]+)\Z"
)


def _render_command(c: GuardedCommand, iface: InterfaceSpec) -> str:
    if c.outputs is IDLE:
        outs = "IDLE"
    else:
        outs = ", ".join(f"{v.name}={c.outputs[v.name]}" for v in iface.outputs)
    return f"[{c.action}] state={c.state_test} & {canonical_print(c.guard)} -> {outs} ; next={c.next_state}"


def serialize_program(p: GclProgram) -> str:
    lines = [f"@interface {p.iface_ref}", f"@initial {p.initial_state}"]
    if p.source_hash is not None:
        lines.append(f"@source-hash {p.source_hash}")
    lines.extend(_render_command(c, p.iface) for c in p.commands)
    return "\n".join(lines) + "\n"


def save_program(path, p: GclProgram) -> None:
    write_bytes(path, serialize_program(p).encode("utf-8"))


def parse_program(text: str, iface: InterfaceSpec) -> GclProgram:
    """Parse the GCL text format.  The @interface header is provenance only;
    the interface itself must be supplied."""
    iface_ref = "-"
    initial = None
    source_hash = None
    commands = []
    o_names = iface.names("O")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        if line.startswith("@interface "):
            iface_ref = line.split(maxsplit=1)[1]
            continue
        if line.startswith("@initial "):
            initial = line.split(maxsplit=1)[1]
            continue
        if line.startswith("@source-hash "):
            source_hash = line.split(maxsplit=1)[1]
            continue
        if line.startswith("@"):
            raise GclParseError(f"unknown header {line.split()[0]!r}", lineno)
        mth = _CMD_RE.match(line)
        if not mth:
            raise GclParseError(f"malformed command {line!r}", lineno)
        guard = parse_guard(mth.group("guard"), iface)
        outs_text = mth.group("outs")
        if outs_text == "IDLE":
            outputs = IDLE
        else:
            pairs = [item.split("=", 1) for item in outs_text.split(", ")]
            outputs = Valuation.of(pairs)
            iface.check_valuation(outputs, o_names, where=f"line {lineno} outputs")
        commands.append(
            GuardedCommand(mth.group("action"), mth.group("state"), guard, outputs, mth.group("next"))
        )
    if initial is None:
        raise GclParseError("missing @initial header", 1)
    return GclProgram(iface, iface_ref, initial, tuple(commands), source_hash)


def load_program(path, iface: InterfaceSpec) -> GclProgram:
    return parse_program(Path(path).read_text(encoding="utf-8"), iface)


# ---------------------------------------------------------------------------
# Static analysis


@dataclass(frozen=True)
class StaticAnalysisReport:
    guards_match: bool
    guard_diff: tuple[str, ...]
    states_match: bool
    state_diff: tuple[str, ...]
    state_count_m: int
    flat_structure_ok: bool

    @property
    def passed(self) -> bool:
        return self.guards_match and self.states_match and self.flat_structure_ok


def _multiset_diff(code: Counter, ref: Counter, label: str) -> list[str]:
    diff = []
    for key in sorted(set(code) | set(ref), key=repr):
        if code[key] != ref[key]:
            diff.append(f"{label} {key!r}: code has {code[key]}, reference has {ref[key]}")
    return diff


def analyze(p: GclProgram, r: Sfsm) -> StaticAnalysisReport:
    """Static code/reference conformance checks.

    Compares (i) the multiset of full guard conditions -- the risk-state test
    conjoined with the input guard -- against the reference transitions,
    (ii) the multiset of state-identifier occurrences, and (iii) the flat
    one-command-per-line structure of the serialization.
    """
    code_guards = Counter((c.state_test, canonical_print(c.guard)) for c in p.commands)
    ref_guards = Counter((t.src, canonical_print(t.guard)) for t in r.transitions)
    guard_diff = _multiset_diff(code_guards, ref_guards, "guard")

    code_states = Counter([p.initial_state])
    for c in p.commands:
        code_states.update([c.state_test, c.next_state])
    ref_states = Counter([r.initial])
    for t in r.transitions:
        ref_states.update([t.src, t.tgt])
    state_diff = _multiset_diff(code_states, ref_states, "state")

    lines = serialize_program(p).splitlines()
    body = [ln for ln in lines if not ln.startswith("@")]
    flat_ok = len(body) == len(p.commands) and all(_CMD_RE.match(ln) for ln in body)

    return StaticAnalysisReport(
        guards_match=not guard_diff,
        guard_diff=tuple(guard_diff),
        states_match=not state_diff,
        state_diff=tuple(state_diff),
        state_count_m=len(set(code_states)),
        flat_structure_ok=flat_ok,
    )


# ---------------------------------------------------------------------------
# Deliberate fault injection (for rejection experiments)

MUTATION_KINDS = ("output", "transfer", "add-state")


def _occurring_outputs(p: GclProgram) -> list:
    seen = []
    for c in p.commands:
        if c.outputs not in seen:
            seen.append(c.outputs)
    return seen


def mutate_program(p: GclProgram, kind: str, seed: int) -> GclProgram:
    """Emit a deliberately faulted copy of `p`; deterministic in `seed`."""
    rng = Random(seed)
    commands = list(p.commands)
    states = list(p.states())

    if kind == "output":
        idx = rng.randrange(len(commands))
        c = commands[idx]
        choices = [o for o in _occurring_outputs(p) if o != c.outputs]
        if not choices:
            raise ParameterError("program has a single output valuation; cannot inject an output fault")
        new_out = choices[rng.randrange(len(choices))]
        commands[idx] = GuardedCommand(c.action, c.state_test, c.guard, new_out, c.next_state)
    elif kind == "transfer":
        if len(states) < 2:
            raise ParameterError("transfer fault needs at least two states")
        idx = rng.randrange(len(commands))
        c = commands[idx]
        others = [s for s in states if s != c.next_state]
        new_next = others[rng.randrange(len(others))]
        commands[idx] = GuardedCommand(c.action, c.state_test, c.guard, c.outputs, new_next)
    elif kind == "add-state":
        template = states[rng.randrange(len(states))]
        fresh = template + "_x"
        while fresh in states:
            fresh += "x"
        cloned = [
            GuardedCommand(c.action, fresh, c.guard, c.outputs, c.next_state)
            for c in commands
            if c.state_test == template
        ]
        # fault one cloned output so the extra state is behaviorally visible
        outs = _occurring_outputs(p)
        k = rng.randrange(len(cloned))
        alt = [o for o in outs if o != cloned[k].outputs]
        if alt:
            c = cloned[k]
            cloned[k] = GuardedCommand(c.action, c.state_test, c.guard, alt[rng.randrange(len(alt))], c.next_state)
        into = [i for i, c in enumerate(commands) if c.next_state == template]
        if into:
            i = into[rng.randrange(len(into))]
            c = commands[i]
            commands[i] = GuardedCommand(c.action, c.state_test, c.guard, c.outputs, fresh)
        commands.extend(cloned)
    else:
        raise ParameterError(f"unknown mutation kind {kind!r}; expected one of {MUTATION_KINDS}")

    commands.sort(key=lambda c: (c.state_test, canonical_print(c.guard)))
    return GclProgram(p.iface, p.iface_ref, p.initial_state, tuple(commands), p.source_hash)
