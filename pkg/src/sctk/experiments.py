"""Randomized experiments backing the empirical completeness and size claims.

Everything here is deterministic in the supplied seed; sampling never touches
the global RNG.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .abstraction import minimize
from .fsm import Fsm
from .harness import fsm_equivalent, mutate
from .testgen import TestSuite, generate_h, generate_w, suite_size


def random_minimal_fsm(n: int, k: int, n_outputs: int, rng: Random) -> Fsm:
    """A random reachable, minimal, deterministic, complete machine.

    Rejection-sampled: draw random tables until one is minimal with all n
    states reachable.  For the small n and k used in the experiments almost
    every draw succeeds.
    """
    states = tuple(f"s{i}" for i in range(n))
    inputs = tuple(f"i{j}" for j in range(k))
    palette = [f"o{j}" for j in range(n_outputs)]
    while True:
        rows = {}
        used = set()
        for s in states:
            for i in inputs:
                out = palette[rng.randrange(n_outputs)]
                tgt = states[rng.randrange(n)]
                rows[(s, i)] = (out, tgt)
                used.add(out)
        m = Fsm.make(states, states[0], inputs, tuple(sorted(used)), rows)
        if len(m.reachable_states()) == n and len(minimize(m).states) == n:
            return m


@dataclass(frozen=True)
class MutationOutcome:
    sampled: int
    distinct: int
    equivalent: int  # distinct mutants equivalent to the reference (must pass)
    killed: int  # distinct non-equivalent mutants failing at least one case
    survivors: tuple  # distinct non-equivalent mutants passing the whole suite
    false_kills: tuple  # distinct equivalent mutants failing some case

    @property
    def score(self) -> float:
        non_equivalent = self.distinct - self.equivalent
        return 1.0 if non_equivalent == 0 else self.killed / non_equivalent


def suite_kills(suite: TestSuite, expected: list[tuple[str, ...]], mutant: Fsm) -> bool:
    """True if some case's outputs on the mutant differ from the reference's."""
    for case, exp in zip(suite.cases, expected):
        state = mutant.initial
        for sym, want in zip(case, exp):
            out, state = mutant.step(state, sym)
            if out != want:
                return True
    return False


def expected_outputs(suite: TestSuite, ref: Fsm) -> list[tuple[str, ...]]:
    return [ref.run(case)[0] for case in suite.cases]


def mutation_experiment(
    ref: Fsm,
    suite: TestSuite,
    samples: int,
    rng: Random,
    kinds: tuple[str, ...] = ("output", "transfer"),
) -> MutationOutcome:
    """Sample mutants, decide kill vs pass, and cross-check against the equivalence oracle.

    A sound suite kills exactly the non-equivalent mutants; any disagreement
    is reported (`survivors`, `false_kills`) rather than hidden.
    """
    expected = expected_outputs(suite, ref)
    usable_kinds = tuple(k for k in kinds if not (k == "transfer" and len(ref.states) < 2))
    decided: dict[tuple, tuple[bool, bool]] = {}
    survivors = []
    false_kills = []
    equivalent = 0
    killed = 0
    for _ in range(samples):
        kind = usable_kinds[rng.randrange(len(usable_kinds))]
        mutant = mutate(ref, kind, seed=rng.randrange(2**31))
        key = mutant.transitions
        if key not in decided:
            is_killed = suite_kills(suite, expected, mutant)
            is_equivalent = fsm_equivalent(ref, mutant) is None
            decided[key] = (is_killed, is_equivalent)
            if is_equivalent:
                equivalent += 1
                if is_killed:
                    false_kills.append(mutant)
            elif is_killed:
                killed += 1
            else:
                survivors.append(mutant)
    return MutationOutcome(
        sampled=samples,
        distinct=len(decided),
        equivalent=equivalent,
        killed=killed,
        survivors=tuple(survivors),
        false_kills=tuple(false_kills),
    )


@dataclass(frozen=True)
class SizeSample:
    n: int
    k: int
    h_cases: int
    h_symbols: int
    w_cases: int
    w_symbols: int

    @property
    def ratio(self) -> float:
        return self.h_symbols / self.w_symbols


def size_comparison(num_refs: int, seed: int, n_range=(2, 6), k_range=(2, 4), n_outputs=2):
    """H vs W suite sizes over random minimal references with m = n."""
    rng = Random(seed)
    samples = []
    refs = []
    for _ in range(num_refs):
        n = rng.randint(*n_range)
        k = rng.randint(*k_range)
        ref = random_minimal_fsm(n, k, n_outputs, rng)
        h = generate_h(ref, n)
        w = generate_w(ref, n)
        samples.append(
            SizeSample(n, k, len(h.cases), suite_size(h), len(w.cases), suite_size(w))
        )
        refs.append(ref)
    return samples, refs
