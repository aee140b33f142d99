"""Concrete deterministic, input-complete FSMs over finite symbol alphabets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .artifacts import canonical_bytes, load_json, write_bytes
from .errors import FormatError, ToolchainError


class FsmError(ToolchainError):
    pass


@dataclass(frozen=True)
class Fsm:
    """Mealy-style machine: total transition function (state, input) -> (output, state).

    Rows are kept in canonical order (state position, then input position);
    use `Fsm.make` to normalize arbitrary row order.
    """

    states: tuple[str, ...]
    initial: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    transitions: tuple[tuple[str, str, str, str], ...]  # (src, input, output, tgt)

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise FsmError("duplicate state names")
        if self.initial not in self.states:
            raise FsmError(f"initial state {self.initial!r} not among states")
        state_set, input_set, output_set = set(self.states), set(self.inputs), set(self.outputs)
        table = {}
        for src, inp, out, tgt in self.transitions:
            if src not in state_set or tgt not in state_set:
                raise FsmError(f"transition uses undeclared state: {src!r} -> {tgt!r}")
            if inp not in input_set:
                raise FsmError(f"transition uses undeclared input {inp!r}")
            if out not in output_set:
                raise FsmError(f"transition uses undeclared output {out!r}")
            if (src, inp) in table:
                raise FsmError(f"nondeterministic: duplicate row for ({src!r}, {inp!r})")
            table[(src, inp)] = (out, tgt)
        missing = [(s, i) for s in self.states for i in self.inputs if (s, i) not in table]
        if missing:
            raise FsmError(f"incomplete transition function, e.g. missing {missing[0]!r}")
        object.__setattr__(self, "_table", table)

    @staticmethod
    def make(
        states: Sequence[str],
        initial: str,
        inputs: Sequence[str],
        outputs: Sequence[str],
        rows: Iterable[tuple[str, str, str, str]] | Mapping[tuple[str, str], tuple[str, str]],
    ) -> "Fsm":
        if isinstance(rows, Mapping):
            rows = [(s, i, o, t) for (s, i), (o, t) in rows.items()]
        state_pos = {s: k for k, s in enumerate(states)}
        input_pos = {i: k for k, i in enumerate(inputs)}
        try:
            ordered = sorted(rows, key=lambda r: (state_pos[r[0]], input_pos[r[1]]))
        except KeyError as exc:
            raise FsmError(f"row references undeclared symbol {exc}") from None
        return Fsm(tuple(states), initial, tuple(inputs), tuple(outputs), tuple(ordered))

    def step(self, state: str, symbol: str) -> tuple[str, str]:
        try:
            return self._table[(state, symbol)]
        except KeyError:
            raise FsmError(f"no transition for ({state!r}, {symbol!r})") from None

    def run(self, symbols: Sequence[str], start: str | None = None) -> tuple[tuple[str, ...], str]:
        """Feed a symbol sequence; returns (outputs, end state)."""
        state = self.initial if start is None else start
        outputs = []
        for sym in symbols:
            out, state = self.step(state, sym)
            outputs.append(out)
        return tuple(outputs), state

    def state_after(self, symbols: Sequence[str], start: str | None = None) -> str:
        return self.run(symbols, start)[1]

    def reachable_states(self) -> tuple[str, ...]:
        """States reachable from the initial state, in breadth-first canonical order."""
        seen = [self.initial]
        seen_set = {self.initial}
        frontier = [self.initial]
        while frontier:
            nxt = []
            for s in frontier:
                for i in self.inputs:
                    _, t = self.step(s, i)
                    if t not in seen_set:
                        seen_set.add(t)
                        seen.append(t)
                        nxt.append(t)
            frontier = nxt
        return tuple(seen)


# ---------------------------------------------------------------------------
# JSON format


def fsm_to_doc(m: Fsm, meta: dict | None = None) -> dict:
    doc = {
        "states": list(m.states),
        "initial": m.initial,
        "inputs": list(m.inputs),
        "outputs": list(m.outputs),
        "transitions": [
            {"src": s, "in": i, "out": o, "tgt": t} for s, i, o, t in m.transitions
        ],
    }
    if meta:
        doc["meta"] = meta
    return doc


def fsm_from_doc(doc: dict):
    try:
        rows = [(td["src"], td["in"], td["out"], td["tgt"]) for td in doc["transitions"]]
        m = Fsm.make(doc["states"], doc["initial"], doc["inputs"], doc["outputs"], rows)
    except (KeyError, TypeError):
        raise FormatError("malformed FSM document") from None
    return m, doc.get("meta", {})


def fsm_bytes(m: Fsm, meta: dict | None = None) -> bytes:
    return canonical_bytes(fsm_to_doc(m, meta))


def save_fsm(path, m: Fsm, meta: dict | None = None) -> None:
    write_bytes(path, fsm_bytes(m, meta))


def load_fsm(path):
    return fsm_from_doc(load_json(path))


# ---------------------------------------------------------------------------
# Plain-text format: header lines, then one "src in out tgt" line per transition


def fsm_to_text(m: Fsm) -> str:
    lines = [
        f"@initial {m.initial}",
        "@inputs " + " ".join(m.inputs),
        "@outputs " + " ".join(m.outputs),
    ]
    lines += [f"{s} {i} {o} {t}" for s, i, o, t in m.transitions]
    return "\n".join(lines) + "\n"


def fsm_from_text(text: str) -> Fsm:
    initial = None
    inputs: list[str] = []
    outputs: list[str] = []
    rows: list[tuple[str, str, str, str]] = []
    states: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("@initial "):
            initial = line.split(maxsplit=1)[1]
        elif line.startswith("@inputs "):
            inputs = line.split()[1:]
        elif line.startswith("@outputs "):
            outputs = line.split()[1:]
        elif line.startswith("@"):
            raise FormatError(f"line {lineno}: unknown header {line.split()[0]!r}")
        else:
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"line {lineno}: expected 'src in out tgt', got {line!r}")
            rows.append(tuple(parts))
            for s in (parts[0], parts[3]):
                if s not in states:
                    states.append(s)
    if initial is None:
        raise FormatError("missing @initial header")
    # Every state of a complete machine occurs as a source, so first-occurrence
    # order of sources reproduces the emitted state order.
    src_order = []
    for r in rows:
        if r[0] not in src_order:
            src_order.append(r[0])
    ordered_states = src_order + [s for s in states if s not in src_order]
    return Fsm.make(ordered_states, initial, inputs, outputs, rows)


def save_fsm_text(path, m: Fsm) -> None:
    write_bytes(path, fsm_to_text(m).encode("utf-8"))


def load_fsm_text(path):
    return fsm_from_text(Path(path).read_text(encoding="utf-8"))
