"""Independent suite and execution-log validators.

These exist so that a PASS verdict does not rest on the correctness of the
generator or the harness: each validator re-derives what it checks directly
from the artifacts.  Nothing here may call into testgen's or the harness's
computation paths; only the plain data types are shared.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .abstraction import ClassAlphabet
from .errors import ParameterError
from .fsm import Fsm
from .testgen import TestSuite


@dataclass(frozen=True)
class Violation:
    clause: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[Violation, ...]

    @staticmethod
    def ok() -> "ValidationReport":
        return ValidationReport(True, ())

    @staticmethod
    def fail(clause: str, message: str) -> "ValidationReport":
        return ValidationReport(False, (Violation(clause, message),))


# ---------------------------------------------------------------------------
# Suite validator


def validate_h(suite: TestSuite, m_ref: Fsm) -> ValidationReport:
    """Check the sufficient completeness condition on the suite's prefix closure T:

    (a) T contains a state cover V of the reference;
    (b) V.S^{<=m-n+1} is a subset of T;
    (c) every pair in V u V.S^{<=m-n+1} reaching distinct states has a common
        suffix in T distinguishing those states.

    Returns pass, or the first violated clause with a witness.
    """
    if tuple(suite.alphabet) != tuple(m_ref.inputs):
        raise ParameterError("suite alphabet differs from the reference input alphabet")
    n = len(m_ref.states)
    if suite.meta.n != n:
        raise ParameterError(f"suite meta n={suite.meta.n} but reference has {n} states")
    m = suite.meta.m

    pos = {sym: k for k, sym in enumerate(suite.alphabet)}

    def seq_key(seq):
        return (len(seq), tuple(pos[s] for s in seq))

    closure = set()
    for case in suite.cases:
        for k in range(len(case) + 1):
            closure.add(case[:k])

    # destination of every closed sequence, computed by walking the table
    dest = {(): m_ref.initial}
    for seq in sorted(closure, key=len):
        if seq:
            dest[seq] = m_ref.step(dest[seq[:-1]], seq[-1])[1]

    # (a) state cover: smallest sequence in T reaching each state
    cover: dict[str, tuple] = {}
    for seq in sorted(closure, key=seq_key):
        state = dest[seq]
        if state not in cover:
            cover[state] = seq
    for state in m_ref.states:
        if state not in cover:
            return ValidationReport.fail("a", f"no sequence in the closure reaches state {state!r}")

    # (b) traversal set containment
    tails = [()]
    for length in range(1, m - n + 2):
        tails.extend(product(suite.alphabet, repeat=length))
    for state in m_ref.states:
        v = cover[state]
        for tail in tails:
            if v + tail not in closure:
                return ValidationReport.fail(
                    "b", f"traversal sequence {list(v + tail)!r} missing from the closure"
                )

    # (c) pairwise distinguishability within the closure
    union = sorted({cover[s] + tail for s in m_ref.states for tail in tails}, key=seq_key)

    suffixes: dict[tuple, set] = {seq: set() for seq in union}
    for t in closure:
        for alpha in union:
            if t[: len(alpha)] == alpha:
                suffixes[alpha].add(t[len(alpha):])

    outs_memo: dict[tuple[str, tuple], tuple] = {}

    def outputs_from(state, gamma):
        key = (state, gamma)
        if key not in outs_memo:
            outs_memo[key] = m_ref.run(gamma, start=state)[0]
        return outs_memo[key]

    for i in range(len(union)):
        for j in range(i + 1, len(union)):
            alpha, beta = union[i], union[j]
            sa, sb = dest[alpha], dest[beta]
            if sa == sb:
                continue
            common = suffixes[alpha] & suffixes[beta]
            if not any(outputs_from(sa, g) != outputs_from(sb, g) for g in common):
                return ValidationReport.fail(
                    "c",
                    f"pair {list(alpha)!r}, {list(beta)!r} reaches distinct states "
                    f"{sa!r}, {sb!r} but no common suffix in the closure distinguishes them",
                )
    return ValidationReport.ok()


# ---------------------------------------------------------------------------
# Execution log validator


def validate_log(log, suite: TestSuite, classes: ClassAlphabet) -> ValidationReport:
    """Check that an execution log faithfully reflects the suite:

    (a) every case appears exactly once, in order;
    (b) per case, logged step indices and input symbols match the case exactly;
    (c) every logged input valuation equals the class representative of its symbol;
    (d) every step verdict is consistent with expected vs observed symbols.
    """
    gamma = {c.id: c.representative for c in classes.classes}
    violations: list[Violation] = []

    logged_case_order: list[int] = []
    for e in log.entries:
        if not logged_case_order or logged_case_order[-1] != e.case_idx:
            logged_case_order.append(e.case_idx)
    expected_order = [i for i, case in enumerate(suite.cases) if case]
    if logged_case_order != expected_order:
        missing = [i for i in expected_order if i not in logged_case_order]
        extra = [i for i in logged_case_order if i not in expected_order]
        dupes = [i for i in set(logged_case_order) if logged_case_order.count(i) > 1]
        detail = []
        if missing:
            detail.append(f"missing case(s) {missing}")
        if extra:
            detail.append(f"unknown case(s) {extra}")
        if dupes:
            detail.append(f"split/duplicated case(s) {sorted(dupes)}")
        if not detail:
            detail.append(f"case order {logged_case_order} != {expected_order}")
        violations.append(Violation("a", "; ".join(detail)))

    by_case: dict[int, list] = {}
    for e in log.entries:
        by_case.setdefault(e.case_idx, []).append(e)

    for case_idx, case in enumerate(suite.cases):
        entries = by_case.get(case_idx)
        if entries is None:
            continue  # already reported under (a)
        step_idxs = [e.step_idx for e in entries]
        if step_idxs != list(range(len(case))):
            violations.append(
                Violation("b", f"case {case_idx}: step indices {step_idxs} != 0..{len(case) - 1}")
            )
        symbols = [e.input_symbol for e in entries]
        if symbols != list(case):
            violations.append(
                Violation("b", f"case {case_idx}: logged inputs {symbols} != case {list(case)}")
            )

    for e in log.entries:
        rep = gamma.get(e.input_symbol)
        if rep is None:
            violations.append(
                Violation("c", f"case {e.case_idx} step {e.step_idx}: unknown input symbol {e.input_symbol!r}")
            )
        elif e.input_valuation != rep:
            violations.append(
                Violation(
                    "c",
                    f"case {e.case_idx} step {e.step_idx}: logged valuation is not the "
                    f"representative of {e.input_symbol!r}",
                )
            )
        if e.step_verdict != (e.expected_symbol == e.observed_symbol):
            violations.append(
                Violation("d", f"case {e.case_idx} step {e.step_idx}: verdict inconsistent with symbols")
            )

    if violations:
        return ValidationReport(False, tuple(violations))
    return ValidationReport.ok()
