"""Test harness: suite execution against supervisor programs, logging, oracles.

The wrapper carries the two alphabet mappings: gamma concretizes a class id
to its representative input valuation, omega abstracts an observed output
valuation back to an output symbol.  A PASS verdict therefore means every
observed abstract I/O trace is in the language of the reference machine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from random import Random

from .abstraction import ClassAlphabet
from .artifacts import sha256_hex, write_bytes
from .errors import FormatError, ParameterError
from .fsm import Fsm
from .gcl import GclProgram, step
from .guards import IDLE, IDLE_SYMBOL, print_output
from .model import InterfaceSpec, Valuation
from .policy import Sfsm
from .testgen import TestSuite, suite_bytes


@dataclass(frozen=True)
class Wrapper:
    """Bijections between abstract symbols and concrete valuations."""

    gamma: dict  # class id -> representative input valuation
    omega: dict  # output valuation (or IDLE) -> output symbol
    iface: InterfaceSpec

    @staticmethod
    def for_reference(classes: ClassAlphabet, r: Sfsm, iface: InterfaceSpec) -> "Wrapper":
        gamma = {c.id: c.representative for c in classes.classes}
        omega = {IDLE: IDLE_SYMBOL}
        for t in r.transitions:
            if t.output is not IDLE:
                omega[t.output] = print_output(t.output, iface)
        return Wrapper(gamma, omega, iface)

    def abstract_output(self, out) -> str:
        """Map an observed output to its symbol.

        Valuations outside the reference's occurring range still render to a
        printable symbol; being outside the reference output alphabet, they
        fail the comparison, which is the required diagnosis.
        """
        if out is IDLE:
            return IDLE_SYMBOL
        known = self.omega.get(out)
        if known is not None:
            return known
        return print_output(out, self.iface)


@dataclass(frozen=True)
class Verdict:
    passed: bool
    failed_step: int | None  # earliest mismatching step of the case

    def __str__(self):
        return "PASS" if self.passed else f"FAIL(step {self.failed_step})"


@dataclass(frozen=True)
class LogEntry:
    case_idx: int
    step_idx: int
    input_symbol: str
    input_valuation: Valuation
    observed_output_valuation: object  # Valuation or IDLE
    observed_symbol: str
    expected_symbol: str
    step_verdict: bool


@dataclass(frozen=True)
class ExecutionLog:
    entries: tuple[LogEntry, ...]
    case_verdicts: tuple[Verdict, ...]
    suite_hash: str


def run_suite(
    suite: TestSuite,
    sut: GclProgram,
    ref_fsm: Fsm,
    wrapper: Wrapper,
    suite_hash: str | None = None,
):
    """Execute every case against the supervisor program; returns (verdicts, log).

    The program is reset to its initial state before each case.  Expected
    symbols come from running the reference machine on the same input
    sequence; a case passes iff every step matches.
    """
    if suite_hash is None:
        suite_hash = sha256_hex(suite_bytes(suite))
    missing = [sym for sym in suite.alphabet if sym not in wrapper.gamma]
    if missing:
        raise ParameterError(f"wrapper lacks input mapping for symbol(s) {missing}")

    entries = []
    verdicts = []
    for case_idx, case in enumerate(suite.cases):
        state = sut.initial_state
        ref_state = ref_fsm.initial
        failed_step = None
        for step_idx, symbol in enumerate(case):
            concrete = wrapper.gamma[symbol]
            observed, state = step(sut, state, concrete)
            observed_symbol = wrapper.abstract_output(observed)
            expected_symbol, ref_state = ref_fsm.step(ref_state, symbol)
            ok = observed_symbol == expected_symbol
            if not ok and failed_step is None:
                failed_step = step_idx
            entries.append(
                LogEntry(
                    case_idx,
                    step_idx,
                    symbol,
                    concrete,
                    observed,
                    observed_symbol,
                    expected_symbol,
                    ok,
                )
            )
        verdicts.append(Verdict(failed_step is None, failed_step))

    log = ExecutionLog(tuple(entries), tuple(verdicts), suite_hash)
    return tuple(verdicts), log


# ---------------------------------------------------------------------------
# Log file format (JSON lines; final line is the summary object)


def log_lines(log: ExecutionLog, program_hash: str | None = None) -> list[str]:
    lines = []
    for e in log.entries:
        observed = None if e.observed_output_valuation is IDLE else e.observed_output_valuation.as_dict()
        lines.append(
            json.dumps(
                {
                    "case_idx": e.case_idx,
                    "step_idx": e.step_idx,
                    "input_symbol": e.input_symbol,
                    "input_valuation": e.input_valuation.as_dict(),
                    "observed_output_valuation": observed,
                    "observed_symbol": e.observed_symbol,
                    "expected_symbol": e.expected_symbol,
                    "step_verdict": e.step_verdict,
                },
                ensure_ascii=False,
            )
        )
    passed = sum(1 for v in log.case_verdicts if v.passed)
    summary = {
        "cases": len(log.case_verdicts),
        "passed": passed,
        "failed": len(log.case_verdicts) - passed,
        "suite_hash": log.suite_hash,
    }
    if program_hash is not None:
        summary["program_hash"] = program_hash
    lines.append(json.dumps(summary, ensure_ascii=False))
    return lines


def log_bytes(log: ExecutionLog, program_hash: str | None = None) -> bytes:
    return ("\n".join(log_lines(log, program_hash)) + "\n").encode("utf-8")


def save_log(path, log: ExecutionLog, program_hash: str | None = None) -> None:
    write_bytes(path, log_bytes(log, program_hash))


def _verdicts_from_entries(entries) -> tuple[Verdict, ...]:
    by_case: dict[int, list[LogEntry]] = {}
    for e in entries:
        by_case.setdefault(e.case_idx, []).append(e)
    verdicts = []
    for case_idx in sorted(by_case):
        failed = [e.step_idx for e in by_case[case_idx] if not e.step_verdict]
        verdicts.append(Verdict(not failed, min(failed) if failed else None))
    return tuple(verdicts)


def load_log(path):
    """Read a log file; returns (ExecutionLog, summary dict)."""
    raw_lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not raw_lines:
        raise FormatError(f"{path}: empty log file")
    try:
        docs = [json.loads(ln) for ln in raw_lines if ln.strip()]
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: bad log line: {exc}") from None
    summary = docs[-1]
    if "cases" not in summary:
        raise FormatError(f"{path}: final line is not a summary object")
    entries = []
    for doc in docs[:-1]:
        try:
            observed_doc = doc["observed_output_valuation"]
            observed = IDLE if observed_doc is None else Valuation.of(observed_doc)
            entries.append(
                LogEntry(
                    int(doc["case_idx"]),
                    int(doc["step_idx"]),
                    doc["input_symbol"],
                    Valuation.of(doc["input_valuation"]),
                    observed,
                    doc["observed_symbol"],
                    doc["expected_symbol"],
                    bool(doc["step_verdict"]),
                )
            )
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}: malformed log entry {doc!r}") from None
    log = ExecutionLog(tuple(entries), _verdicts_from_entries(entries), summary["suite_hash"])
    return log, summary


# ---------------------------------------------------------------------------
# Equivalence oracle


def fsm_equivalent(a: Fsm, b: Fsm):
    """Product-machine search for an output mismatch.

    Returns None if the machines are observationally equivalent, else the
    shortest (breadth-first) counterexample input sequence.
    """
    if set(a.inputs) != set(b.inputs):
        raise ParameterError("input alphabets differ")
    start = (a.initial, b.initial)
    queue = [(start, ())]
    visited = {start}
    while queue:
        nxt = []
        for (sa, sb), seq in queue:
            for sym in a.inputs:
                oa, ta = a.step(sa, sym)
                ob, tb = b.step(sb, sym)
                if oa != ob:
                    return seq + (sym,)
                pair = (ta, tb)
                if pair not in visited:
                    visited.add(pair)
                    nxt.append((pair, seq + (sym,)))
        queue = nxt
    return None


# ---------------------------------------------------------------------------
# FSM-level fault injection


FSM_MUTATION_KINDS = ("output", "transfer", "add-state")


def mutate(ref: Fsm, kind: str, seed: int, m: int | None = None) -> Fsm:
    """Deterministic single-fault mutant of `ref` with at most m states.

    `m` defaults to the reference state count, in which case add-state
    mutations are rejected for exceeding the fault domain.
    """
    rng = Random(seed)
    n = len(ref.states)
    bound = n if m is None else m
    rows = {(s, i): ref.step(s, i) for s in ref.states for i in ref.inputs}

    if kind == "output":
        s = ref.states[rng.randrange(n)]
        i = ref.inputs[rng.randrange(len(ref.inputs))]
        out, tgt = rows[(s, i)]
        choices = [o for o in ref.outputs if o != out]
        new_out = choices[rng.randrange(len(choices))] if choices else "__fault__"
        outputs = ref.outputs if new_out in ref.outputs else ref.outputs + ("__fault__",)
        rows[(s, i)] = (new_out, tgt)
        return Fsm.make(ref.states, ref.initial, ref.inputs, outputs, rows)

    if kind == "transfer":
        if n < 2:
            raise ParameterError("transfer fault needs at least two states")
        s = ref.states[rng.randrange(n)]
        i = ref.inputs[rng.randrange(len(ref.inputs))]
        out, tgt = rows[(s, i)]
        others = [t for t in ref.states if t != tgt]
        rows[(s, i)] = (out, others[rng.randrange(len(others))])
        return Fsm.make(ref.states, ref.initial, ref.inputs, ref.outputs, rows)

    if kind == "add-state":
        if n + 1 > bound:
            raise ParameterError(f"add-state mutant would exceed the fault bound m={bound}")
        template = ref.states[rng.randrange(n)]
        fresh = template + "_x"
        while fresh in ref.states:
            fresh += "x"
        for i in ref.inputs:
            rows[(fresh, i)] = rows[(template, i)]
        # make the clone observably different, then redirect one edge into it
        i = ref.inputs[rng.randrange(len(ref.inputs))]
        out, tgt = rows[(fresh, i)]
        choices = [o for o in ref.outputs if o != out]
        new_out = choices[rng.randrange(len(choices))] if choices else "__fault__"
        outputs = ref.outputs if new_out in ref.outputs else ref.outputs + ("__fault__",)
        rows[(fresh, i)] = (new_out, tgt)
        entries = [(s2, i2) for s2 in ref.states for i2 in ref.inputs]
        s2, i2 = entries[rng.randrange(len(entries))]
        out2, _ = rows[(s2, i2)]
        rows[(s2, i2)] = (out2, fresh)
        return Fsm.make(ref.states + (fresh,), ref.initial, ref.inputs, outputs, rows)

    raise ParameterError(f"unknown mutation kind {kind!r}; expected one of {FSM_MUTATION_KINDS}")


# ---------------------------------------------------------------------------
# Program abstraction (for the PASS-iff-equivalence desk check)


def abstract_program(p: GclProgram, classes: ClassAlphabet) -> Fsm:
    """Drive the program through every (state, class) pair and record the table."""
    states = p.states()
    gamma = {c.id: c.representative for c in classes.classes}
    rows = {}
    outputs = set()
    for s in states:
        for c in classes.classes:
            out, tgt = step(p, s, gamma[c.id])
            symbol = IDLE_SYMBOL if out is IDLE else print_output(out, p.iface)
            rows[(s, c.id)] = (symbol, tgt)
            outputs.add(symbol)
    return Fsm.make(states, p.initial_state, classes.ids(), sorted(outputs), rows)
