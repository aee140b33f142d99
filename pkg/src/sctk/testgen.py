"""Complete FSM test suite generation.

Two strategies over a minimal deterministic complete reference machine with
n states and fault-domain bound m >= n:

* H strategy: start from the traversal set V.S^{<=m-n+1} (V a breadth-first
  state cover) and, pair by pair, append a shortest distinguishing suffix
  only where the suite does not already distinguish the reached states.
* W strategy (baseline): the classical product V.S^{<=m-n+1}.W with a full
  characterization set W appended everywhere.

Both accept every implementation FSM over the same input alphabet with at
most m states that is observationally equivalent to the reference, and
reject every non-equivalent one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .abstraction import ClassAlphabet
from .artifacts import canonical_bytes, load_json, sha256_hex, write_bytes
from .errors import FormatError, ParameterError, ToolchainError
from .fsm import Fsm, fsm_bytes
from .model import Valuation


@dataclass(frozen=True)
class SuiteMeta:
    method: str  # "H" | "W"
    m: int
    n: int
    reference_hash: str


@dataclass(frozen=True)
class TestSuite:
    __test__ = False  # domain type, not a pytest class

    alphabet: tuple[str, ...]
    cases: tuple[tuple[str, ...], ...]
    meta: SuiteMeta


@dataclass(frozen=True)
class ConcreteSuite:
    cases: tuple[tuple[Valuation, ...], ...]


def suite_size(suite: TestSuite) -> int:
    """Total number of input symbols across stored cases."""
    return sum(len(c) for c in suite.cases)


# ---------------------------------------------------------------------------
# Shared machinery


class _Trie:
    """Prefix tree over symbol sequences; the node set is the prefix closure."""

    def __init__(self):
        self.root: dict = {}

    def insert(self, seq):
        node = self.root
        for sym in seq:
            node = node.setdefault(sym, {})

    def node(self, seq):
        node = self.root
        for sym in seq:
            node = node.get(sym)
            if node is None:
                return None
        return node

    def maximal_sequences(self):
        """Leaf paths = stored sequences after prefix reduction."""
        out = []

        def walk(node, prefix):
            if not node:
                out.append(tuple(prefix))
                return
            for sym, child in node.items():
                prefix.append(sym)
                walk(child, prefix)
                prefix.pop()

        walk(self.root, [])
        return out


def _access_sequences(m_ref: Fsm) -> list[tuple[str, tuple[str, ...]]]:
    """Breadth-first state cover: (state, shortest access sequence) in discovery order.

    Inputs are explored in canonical order, so each access sequence is the
    lexicographically smallest among the shortest.
    """
    cover = [(m_ref.initial, ())]
    seen = {m_ref.initial}
    frontier = [(m_ref.initial, ())]
    while frontier:
        nxt = []
        for state, seq in frontier:
            for sym in m_ref.inputs:
                _, tgt = m_ref.step(state, sym)
                if tgt not in seen:
                    seen.add(tgt)
                    entry = (tgt, seq + (sym,))
                    cover.append(entry)
                    nxt.append(entry)
        frontier = nxt
    if len(cover) != len(m_ref.states):
        unreachable = sorted(set(m_ref.states) - seen)
        raise ParameterError(f"reference has unreachable states {unreachable}")
    return cover


def _tails(inputs: tuple[str, ...], max_len: int) -> list[tuple[str, ...]]:
    tails: list[tuple[str, ...]] = [()]
    for length in range(1, max_len + 1):
        tails.extend(product(inputs, repeat=length))
    return tails


def _distinguishing_suffixes(m_ref: Fsm) -> dict[tuple[str, str], tuple[str, ...]]:
    """Shortest (ties: lexicographically smallest) distinguishing sequence per state pair."""
    table: dict[tuple[str, str], tuple[str, ...]] = {}
    states = m_ref.states
    for a_idx in range(len(states)):
        for b_idx in range(a_idx + 1, len(states)):
            pair = (states[a_idx], states[b_idx])
            table[pair] = _bfs_distinguish(m_ref, *pair)
    return table


def _bfs_distinguish(m_ref: Fsm, s1: str, s2: str) -> tuple[str, ...]:
    queue = [(s1, s2, ())]
    visited = {(s1, s2)}
    while queue:
        nxt = []
        for a, b, seq in queue:
            for sym in m_ref.inputs:
                oa, ta = m_ref.step(a, sym)
                ob, tb = m_ref.step(b, sym)
                if oa != ob:
                    return seq + (sym,)
                if ta != tb and (ta, tb) not in visited:
                    visited.add((ta, tb))
                    nxt.append((ta, tb, seq + (sym,)))
        queue = nxt
    raise ToolchainError(f"states {s1!r} and {s2!r} are not distinguishable; reference not minimal")


def _pair_suffix(table, s1: str, s2: str) -> tuple[str, ...]:
    return table[(s1, s2)] if (s1, s2) in table else table[(s2, s1)]


def _already_distinguished(trie: _Trie, m_ref: Fsm, alpha, beta, sa: str, sb: str) -> bool:
    """True if some common suffix of alpha/beta in the closure tells sa from sb."""
    na, nb = trie.node(alpha), trie.node(beta)
    stack = [(na, nb, sa, sb)]
    while stack:
        na, nb, sa, sb = stack.pop()
        for sym in na.keys() & nb.keys():
            oa, ta = m_ref.step(sa, sym)
            ob, tb = m_ref.step(sb, sym)
            if oa != ob:
                return True
            if ta != tb:
                stack.append((na[sym], nb[sym], ta, tb))
    return False


def _reference_hash(m_ref: Fsm) -> str:
    return sha256_hex(fsm_bytes(m_ref))


def _finalize(trie: _Trie, m_ref: Fsm, method: str, m: int, reference_hash: str | None) -> TestSuite:
    pos = {sym: k for k, sym in enumerate(m_ref.inputs)}
    cases = sorted(trie.maximal_sequences(), key=lambda c: tuple(pos[s] for s in c))
    meta = SuiteMeta(method, m, len(m_ref.states), reference_hash or _reference_hash(m_ref))
    return TestSuite(m_ref.inputs, tuple(cases), meta)


# ---------------------------------------------------------------------------
# Generators


def generate_h(m_ref: Fsm, m: int, reference_hash: str | None = None) -> TestSuite:
    """H-strategy suite for fault domain "deterministic complete FSM with <= m states"."""
    n = len(m_ref.states)
    if m < n:
        raise ParameterError(f"fault bound m={m} below reference state count n={n}")

    cover = _access_sequences(m_ref)
    tails = _tails(m_ref.inputs, m - n + 1)
    pos = {sym: k for k, sym in enumerate(m_ref.inputs)}

    traversal: list[tuple[str, ...]] = []
    seen = set()
    for _, access in cover:
        for tail in tails:
            seq = access + tail
            if seq not in seen:
                seen.add(seq)
                traversal.append(seq)

    trie = _Trie()
    for seq in traversal:
        trie.insert(seq)

    suffix_table = _distinguishing_suffixes(m_ref)
    ordered = sorted(traversal, key=lambda c: (len(c), tuple(pos[s] for s in c)))
    dest = {seq: m_ref.state_after(seq) for seq in ordered}

    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            alpha, beta = ordered[i], ordered[j]
            sa, sb = dest[alpha], dest[beta]
            if sa == sb:
                continue
            if _already_distinguished(trie, m_ref, alpha, beta, sa, sb):
                continue
            gamma = _pair_suffix(suffix_table, sa, sb)
            trie.insert(alpha + gamma)
            trie.insert(beta + gamma)

    return _finalize(trie, m_ref, "H", m, reference_hash)


def generate_w(m_ref: Fsm, m: int, reference_hash: str | None = None) -> TestSuite:
    """Classical W-strategy suite: state cover . S^{<=m-n+1} . characterization set."""
    n = len(m_ref.states)
    if m < n:
        raise ParameterError(f"fault bound m={m} below reference state count n={n}")

    cover = _access_sequences(m_ref)
    tails = _tails(m_ref.inputs, m - n + 1)
    pos = {sym: k for k, sym in enumerate(m_ref.inputs)}

    suffix_table = _distinguishing_suffixes(m_ref)
    if suffix_table:
        char_set = sorted(set(suffix_table.values()), key=lambda c: (len(c), tuple(pos[s] for s in c)))
    else:
        char_set = [()]  # single-state machine: degenerate characterization set

    trie = _Trie()
    for _, access in cover:
        for tail in tails:
            for w in char_set:
                trie.insert(access + tail + w)
    return _finalize(trie, m_ref, "W", m, reference_hash)


# ---------------------------------------------------------------------------
# Concretization


def concretize(suite: TestSuite, classes: ClassAlphabet) -> ConcreteSuite:
    """Replace each class id by its representative input valuation, case for case."""
    gamma = {c.id: c.representative for c in classes.classes}
    cases = []
    for case in suite.cases:
        concrete = []
        for sym in case:
            if sym not in gamma:
                raise ToolchainError(f"no input class for suite symbol {sym!r}")
            concrete.append(gamma[sym])
        cases.append(tuple(concrete))
    return ConcreteSuite(tuple(cases))


# ---------------------------------------------------------------------------
# Suite file formats


def suite_to_doc(suite: TestSuite) -> dict:
    return {
        "meta": {
            "method": suite.meta.method,
            "m": suite.meta.m,
            "n": suite.meta.n,
            "reference_hash": suite.meta.reference_hash,
        },
        "alphabet": list(suite.alphabet),
        "cases": [list(c) for c in suite.cases],
    }


def suite_from_doc(doc: dict) -> TestSuite:
    try:
        meta = SuiteMeta(
            doc["meta"]["method"],
            int(doc["meta"]["m"]),
            int(doc["meta"]["n"]),
            doc["meta"]["reference_hash"],
        )
        alphabet = tuple(doc["alphabet"])
        cases = tuple(tuple(c) for c in doc["cases"])
    except (KeyError, TypeError, ValueError):
        raise FormatError("malformed test suite document") from None
    if not (meta.m >= meta.n >= 1):
        raise FormatError(f"suite meta must satisfy m >= n >= 1, got m={meta.m}, n={meta.n}")
    symbols = set(alphabet)
    for case in cases:
        for sym in case:
            if sym not in symbols:
                raise FormatError(f"case uses symbol {sym!r} not in alphabet")
    case_set = set(cases)
    if len(case_set) != len(cases):
        raise FormatError("duplicate test cases")
    for case in cases:
        for k in range(len(case)):
            if case[:k] in case_set:
                raise FormatError(f"case {case!r} has a stored proper prefix; suite not prefix-reduced")
    return TestSuite(alphabet, cases, meta)


def suite_bytes(suite: TestSuite) -> bytes:
    return canonical_bytes(suite_to_doc(suite))


def save_suite(path, suite: TestSuite) -> None:
    write_bytes(path, suite_bytes(suite))


def load_suite(path) -> TestSuite:
    return suite_from_doc(load_json(path))


def concrete_to_doc(concrete: ConcreteSuite, suite: TestSuite) -> dict:
    return {
        "meta": suite_to_doc(suite)["meta"],
        "alphabet": list(suite.alphabet),
        "cases": [[v.as_dict() for v in case] for case in concrete.cases],
    }


def concrete_bytes(concrete: ConcreteSuite, suite: TestSuite) -> bytes:
    return canonical_bytes(concrete_to_doc(concrete, suite))


def save_concrete(path, concrete: ConcreteSuite, suite: TestSuite) -> None:
    write_bytes(path, concrete_bytes(concrete, suite))


def load_concrete(path) -> ConcreteSuite:
    doc = load_json(Path(path))
    try:
        cases = tuple(tuple(Valuation.of(v) for v in case) for case in doc["cases"])
    except (KeyError, TypeError):
        raise FormatError("malformed concrete suite document") from None
    return ConcreteSuite(cases)
