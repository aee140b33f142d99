"""Acceptance criteria for the toolchain, one test per criterion.

Each test prints a single PASS/FAIL line (run with `pytest -s` to see them
on passing runs) and then asserts.  Oracles are independent of the code
paths they judge: equivalence is decided by the product machine, suite
verdicts by direct table replay, minimality by pair marking.
"""

from __future__ import annotations

import dataclasses
import time
from itertools import product
from pathlib import Path
from random import Random
from statistics import mean, median

import pytest

from sctk.artifacts import canonical_bytes, write_bytes
from sctk.experiments import mutation_experiment, random_minimal_fsm
from sctk.fsm import Fsm
from sctk.gcl import GclProgram, analyze, step
from sctk.guards import And, Atom
from sctk.harness import fsm_equivalent, run_suite
from sctk.abstraction import minimize
from sctk.pipeline import PipelineConfig, run_pipeline
from sctk.testgen import TestSuite, generate_h, generate_w, suite_size
from sctk.validators import validate_h, validate_log
from sctk.workcell import workcell_policy_doc

SEED = 20260810


def _criterion(tag: str, ok: bool, detail: str) -> None:
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def sample_references():
    """Twenty random minimal references with both generated suites (m = n)."""
    rng = Random(SEED)
    bundle = []
    for _ in range(20):
        n, k = rng.randint(2, 6), rng.randint(2, 4)
        ref = random_minimal_fsm(n, k, 2, rng)
        bundle.append((ref, generate_h(ref, n), generate_w(ref, n)))
    return bundle


# ---------------------------------------------------------------------------
# 1. Completeness surrogate


def test_c1_mutation_completeness(sample_references):
    started = time.time()
    rng = Random(SEED + 1)
    total = distinct = equivalent = 0
    survivors = false_kills = 0
    for ref, h_suite, _ in sample_references:
        outcome = mutation_experiment(ref, h_suite, 10_000, Random(rng.randrange(2**31)))
        total += outcome.sampled
        distinct += outcome.distinct
        equivalent += outcome.equivalent
        survivors += len(outcome.survivors)
        false_kills += len(outcome.false_kills)
    elapsed = time.time() - started
    ok = survivors == 0 and false_kills == 0 and elapsed < 300
    _criterion(
        "C1 completeness",
        ok,
        f"{len(sample_references)} refs, {total} sampled mutants ({distinct} distinct, "
        f"{equivalent} equivalent), score 100%: {survivors} survivors, "
        f"{false_kills} false kills, {elapsed:.1f}s",
    )
    assert survivors == 0, "a non-equivalent mutant passed the complete suite"
    assert false_kills == 0, "an equivalent mutant was rejected"
    assert elapsed < 300


# ---------------------------------------------------------------------------
# 2. Soundness surrogate


def test_c2_self_conformance(workcell):
    verdicts, log = run_suite(workcell.suite, workcell.program, workcell.fsm, workcell.wrapper)
    failures = [i for i, v in enumerate(verdicts) if not v.passed]
    _criterion(
        "C2 self-conformance",
        not failures,
        f"workcell program vs own suite: {len(verdicts)} cases, {len(failures)} failures",
    )
    assert failures == []
    assert all(e.step_verdict for e in log.entries)


# ---------------------------------------------------------------------------
# 3. H vs W size claim


def test_c3_h_versus_w_size(sample_references):
    ratios = []
    wins = 0
    for ref, h_suite, w_suite in sample_references:
        h_size, w_size = suite_size(h_suite), suite_size(w_suite)
        ratios.append(h_size / w_size)
        if h_size <= w_size:
            wins += 1
    fraction = wins / len(sample_references)
    ok = fraction >= 0.9
    _criterion(
        "C3 H-vs-W size",
        ok,
        f"H <= W on {wins}/{len(sample_references)} refs ({fraction:.0%}); ratio "
        f"min={min(ratios):.2f} median={median(ratios):.2f} mean={mean(ratios):.2f} "
        f"max={max(ratios):.2f}",
    )
    assert fraction >= 0.9


# ---------------------------------------------------------------------------
# 4. Suite validator efficacy


def test_c4_suite_validator(sample_references):
    for ref, h_suite, w_suite in sample_references:
        assert validate_h(h_suite, ref).passed
        assert validate_h(w_suite, ref).passed
    deletions = detected = 0
    for ref, h_suite, _ in sample_references:
        if len(ref.states) < 2:
            continue
        for idx in range(len(h_suite.cases)):
            pruned = TestSuite(
                h_suite.alphabet,
                h_suite.cases[:idx] + h_suite.cases[idx + 1:],
                h_suite.meta,
            )
            deletions += 1
            if not validate_h(pruned, ref).passed:
                detected += 1
    rate = detected / deletions
    ok = rate >= 0.95
    _criterion(
        "C4 suite validator",
        ok,
        f"all generated suites pass; {detected}/{deletions} single-case deletions flagged "
        f"({rate:.1%}), residue {deletions - detected} (redundant cases may pass legitimately)",
    )
    assert rate >= 0.95


# ---------------------------------------------------------------------------
# 5. Log validator efficacy


def _tamper_delete_case(log, rng, suite):
    victim = rng.randrange(len(suite.cases))
    entries = tuple(e for e in log.entries if e.case_idx != victim)
    return dataclasses.replace(log, entries=entries)


def _tamper_substitute_input(log, rng, suite):
    entries = list(log.entries)
    idx = rng.randrange(len(entries))
    alternatives = [s for s in suite.alphabet if s != entries[idx].input_symbol]
    entries[idx] = dataclasses.replace(entries[idx], input_symbol=rng.choice(alternatives))
    return dataclasses.replace(log, entries=tuple(entries))


def _tamper_reorder_steps(log, rng, suite):
    entries = list(log.entries)
    starts = [
        i for i in range(len(entries) - 1)
        if entries[i].case_idx == entries[i + 1].case_idx
    ]
    i = rng.choice(starts)
    entries[i], entries[i + 1] = entries[i + 1], entries[i]
    return dataclasses.replace(log, entries=tuple(entries))


def test_c5_log_validator(workcell):
    _, log = run_suite(workcell.suite, workcell.program, workcell.fsm, workcell.wrapper)
    assert validate_log(log, workcell.suite, workcell.classes).passed
    rng = Random(SEED + 5)
    tampers = (_tamper_delete_case, _tamper_substitute_input, _tamper_reorder_steps)
    trials = detected = 0
    for k in range(1002):
        tamper = tampers[k % len(tampers)]
        tampered = tamper(log, rng, workcell.suite)
        trials += 1
        if not validate_log(tampered, workcell.suite, workcell.classes).passed:
            detected += 1
    ok = detected == trials
    _criterion(
        "C5 log validator",
        ok,
        f"{detected}/{trials} single-entry tamperings detected "
        f"(case deletion / input substitution / step reordering)",
    )
    assert detected == trials


# ---------------------------------------------------------------------------
# 6. Static analysis


def _guard_atoms(guard):
    if isinstance(guard, Atom):
        return [guard]
    assert isinstance(guard, And)
    return list(guard.children)


def _rebuild_guard(atoms):
    return atoms[0] if len(atoms) == 1 else And(tuple(atoms))


def _single_token_edits(program: GclProgram):
    """Every command token position edited once; guard values exhaust their sort."""
    states = list(program.states())
    iface = program.iface
    input_names = [v.name for v in iface.inputs]

    def other_state(s):
        return states[(states.index(s) + 1) % len(states)]

    for idx, cmd in enumerate(program.commands):
        yield f"cmd{idx}.state_test", _replace_command(program, idx, state_test=other_state(cmd.state_test))
        yield f"cmd{idx}.next_state", _replace_command(program, idx, next_state=other_state(cmd.next_state))
        atoms = _guard_atoms(cmd.guard)
        for a_idx, atom in enumerate(atoms):
            decl = iface.var(atom.var)
            for value in decl.sort.values:
                if value == atom.value:
                    continue
                edited = atoms.copy()
                edited[a_idx] = Atom(atom.var, value)
                yield (
                    f"cmd{idx}.atom{a_idx}.value={value}",
                    _replace_command(program, idx, guard=_rebuild_guard(edited)),
                )
            next_var = input_names[(input_names.index(atom.var) + 1) % len(input_names)]
            edited = atoms.copy()
            edited[a_idx] = Atom(next_var, atom.value)
            yield (
                f"cmd{idx}.atom{a_idx}.var={next_var}",
                _replace_command(program, idx, guard=_rebuild_guard(edited)),
            )
    yield "initial", dataclasses.replace(program, initial_state=other_state(program.initial_state))


def _replace_command(program: GclProgram, idx: int, **fields) -> GclProgram:
    commands = list(program.commands)
    commands[idx] = dataclasses.replace(commands[idx], **fields)
    return dataclasses.replace(program, commands=tuple(commands))


def test_c6_static_analysis(workcell, two_factor):
    from sctk.abstraction import complete_with_idle, extract_classes
    from sctk.gcl import generate_code
    from sctk.policy import derive_reference

    # analyze passes on generated programs
    generated = [(workcell.program, workcell.completed)]
    tf_ref = derive_reference(two_factor.transitions, two_factor.initial, two_factor.iface)
    tf_classes = extract_classes(tf_ref, two_factor.iface)
    tf_completed = complete_with_idle(tf_ref, tf_classes)
    generated.append((generate_code(tf_completed, two_factor.iface), tf_completed))
    for program, reference in generated:
        assert analyze(program, reference).passed

    edits = detected = 0
    missed = []
    for label, edited in _single_token_edits(workcell.program):
        edits += 1
        if not analyze(edited, workcell.completed).passed:
            detected += 1
        else:
            missed.append(label)
    ok = detected == edits
    _criterion(
        "C6 static analysis",
        ok,
        f"generated programs pass; {detected}/{edits} single-token guard/state edits detected"
        + (f"; missed: {missed[:5]}" if missed else ""),
    )
    assert missed == []


# ---------------------------------------------------------------------------
# 7. Commuting diagram


def test_c7_commuting_diagram(workcell):
    """Exhaustive replay of all abstract input sequences of length <= 5."""
    mismatches = 0
    nodes = 0
    gamma = workcell.wrapper.gamma
    stack = [((), workcell.fsm.initial, workcell.program.initial_state)]
    while stack:
        seq, fsm_state, prog_state = stack.pop()
        for symbol in workcell.fsm.inputs:
            nodes += 1
            expected, fsm_next = workcell.fsm.step(fsm_state, symbol)
            observed, prog_next = step(workcell.program, prog_state, gamma[symbol])
            if workcell.wrapper.abstract_output(observed) != expected:
                mismatches += 1
            if len(seq) < 4:
                stack.append((seq + (symbol,), fsm_next, prog_next))
    ok = mismatches == 0
    _criterion(
        "C7 commuting diagram",
        ok,
        f"replayed every sequence of length <= 5 over {len(workcell.fsm.inputs)} classes "
        f"({nodes} steps), {mismatches} mismatches",
    )
    assert mismatches == 0


# ---------------------------------------------------------------------------
# 8. Minimization and equivalence


def _random_machine(n, k, rng):
    states = tuple(f"s{i}" for i in range(n))
    inputs = tuple(f"i{j}" for j in range(k))
    rows = {
        (s, i): (("x", "y")[rng.randrange(2)], states[rng.randrange(n)])
        for s in states
        for i in inputs
    }
    return Fsm.make(states, states[0], inputs, ("x", "y"), rows)


def _exhaustive_difference(a, b, max_len):
    for length in range(1, max_len + 1):
        for seq in product(a.inputs, repeat=length):
            if a.run(seq)[0] != b.run(seq)[0]:
                return True
    return False


def test_c8_minimization_and_equivalence():
    rng = Random(SEED + 8)
    preserved = 0
    for _ in range(100):
        m = _random_machine(rng.randint(2, 8), rng.randint(2, 3), rng)
        if fsm_equivalent(m, minimize(m)) is None:
            preserved += 1

    agreement = True
    pairs = 0
    for _ in range(30):
        n = rng.randint(2, 5)
        a = _random_machine(n, 2, rng)
        b = _random_machine(n, 2, rng) if rng.random() < 0.7 else minimize(a)
        pairs += 1
        ce_ab = fsm_equivalent(a, b)
        ce_ba = fsm_equivalent(b, a)
        if (ce_ab is None) != (ce_ba is None):
            agreement = False
        if fsm_equivalent(a, a) is not None:
            agreement = False
        bound = 2 * max(len(a.states), len(b.states))
        if (ce_ab is not None) != _exhaustive_difference(a, b, bound):
            agreement = False
        if ce_ab is not None and a.run(ce_ab)[0] == b.run(ce_ab)[0]:
            agreement = False
    ok = preserved == 100 and agreement
    _criterion(
        "C8 minimize/equivalence",
        ok,
        f"minimize preserved language on {preserved}/100 machines; oracle symmetric, "
        f"reflexive, and matching exhaustive trace comparison on {pairs} pairs",
    )
    assert preserved == 100
    assert agreement


# ---------------------------------------------------------------------------
# 9. Determinism


def test_c9_pipeline_determinism(tmp_path):
    policy_path = tmp_path / "workcell-policy.json"
    write_bytes(policy_path, canonical_bytes(workcell_policy_doc()))
    digests = []
    for name in ("first", "second"):
        cfg = PipelineConfig.build(None, str(tmp_path / name), policy=str(policy_path))
        code, _ = run_pipeline(cfg)
        assert code == 0
        digests.append(
            {
                key: Path(getattr(cfg, key)).read_bytes()
                for key in ("interface", "sfsm", "fsm", "suite", "concrete", "program", "log", "report")
            }
        )
    identical = digests[0] == digests[1]
    _criterion(
        "C9 determinism",
        identical,
        f"two end-to-end runs produced byte-identical artifact trees "
        f"({len(digests[0])} artifacts compared)",
    )
    assert identical
