"""Boolean guard expressions over equality atoms on monitored variables.

Grammar (whitespace ignored)::

    disj := conj ('|' conj)*
    conj := atom ('&' atom)*
    atom := ident '=' value | '!' atom | '(' disj ')'

'&' binds tighter than '|'.  Guard strings double as input-equivalence-class
identifiers, so canonical printing must be deterministic and stable under
re-parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import ToolchainError
from .model import InterfaceSpec, Valuation, iter_valuations

#: Reserved output symbol for "no output change" transitions.
IDLE_SYMBOL = "__idle__"


class _IdleType:
    """Singleton marker for the idle (no output change) result."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "IDLE"


IDLE = _IdleType()


class GuardParseError(ToolchainError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnboundVariableError(ToolchainError):
    pass


@dataclass(frozen=True)
class Atom:
    var: str
    value: str


@dataclass(frozen=True)
class Not:
    child: "GuardExpr"


@dataclass(frozen=True)
class And:
    children: tuple["GuardExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    children: tuple["GuardExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two operands")


GuardExpr = Union[Atom, Not, And, Or]

_WORD = re.compile(r"[A-Za-z0-9_]+")
_OPS = "&|!()="


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        mth = _WORD.match(text, i)
        if not mth:
            raise GuardParseError(f"unexpected character {ch!r}", i)
        tokens.append(("word", mth.group(), i))
        i = mth.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], iface: InterfaceSpec):
        self.tokens = tokens
        self.iface = iface
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> GuardExpr:
        expr = self.disj()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise GuardParseError(f"unexpected trailing input {text!r}", pos)
        return expr

    def disj(self) -> GuardExpr:
        parts = [self.conj()]
        while self.peek()[0] == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> GuardExpr:
        parts = [self.atom()]
        while self.peek()[0] == "&":
            self.take()
            parts.append(self.atom())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def atom(self) -> GuardExpr:
        kind, text, pos = self.peek()
        if kind == "!":
            self.take()
            return Not(self.atom())
        if kind == "(":
            self.take()
            expr = self.disj()
            kind, _, pos = self.peek()
            if kind != ")":
                raise GuardParseError("expected ')'", pos)
            self.take()
            return expr
        if kind == "word":
            self.take()
            k2, _, pos2 = self.peek()
            if k2 != "=":
                raise GuardParseError("expected '=' after variable name", pos2)
            self.take()
            k3, value, pos3 = self.peek()
            if k3 != "word":
                raise GuardParseError("expected a value after '='", pos3)
            self.take()
            decl = self.iface.var_or_none(text)
            if decl is None:
                raise GuardParseError(f"unknown variable {text!r}", pos)
            if decl.kind != "I":
                raise GuardParseError(f"variable {text!r} is not monitored", pos)
            if value not in decl.sort.values:
                raise GuardParseError(
                    f"value {value!r} not in sort {decl.sort.name!r} of variable {text!r}", pos3
                )
            return Atom(text, value)
        raise GuardParseError(f"expected an atom, found {text!r}" if text else "expected an atom", pos)


def parse_guard(text: str, iface: InterfaceSpec) -> GuardExpr:
    """Parse a guard expression, validating variables and values against `iface`."""
    return _Parser(_tokenize(text), iface).parse()


def canonical_print(g: GuardExpr) -> str:
    """Deterministic guard rendering: no whitespace, minimal structure-preserving parens."""
    if isinstance(g, Atom):
        return f"{g.var}={g.value}"
    if isinstance(g, Not):
        inner = canonical_print(g.child)
        if isinstance(g.child, (Atom, Not)):
            return "!" + inner
        return "!(" + inner + ")"
    if isinstance(g, And):
        return "&".join(_conj_operand(c) for c in g.children)
    if isinstance(g, Or):
        return "|".join(_disj_operand(c) for c in g.children)
    raise TypeError(f"not a guard expression: {g!r}")


def _conj_operand(c: GuardExpr) -> str:
    s = canonical_print(c)
    return f"({s})" if isinstance(c, (And, Or)) else s


def _disj_operand(c: GuardExpr) -> str:
    s = canonical_print(c)
    return f"({s})" if isinstance(c, Or) else s


def eval_guard(g: GuardExpr, s: Valuation) -> bool:
    """Standard boolean semantics; Atom(v=c) holds iff s(v) = c.

    Deliberately does not short-circuit so an unbound variable is always
    reported, wherever it occurs in the expression.
    """
    if isinstance(g, Atom):
        try:
            return s[g.var] == g.value
        except KeyError:
            raise UnboundVariableError(f"variable {g.var!r} not bound in {s!r}") from None
    if isinstance(g, Not):
        return not eval_guard(g.child, s)
    if isinstance(g, And):
        result = True
        for c in g.children:
            if not eval_guard(c, s):
                result = False
        return result
    if isinstance(g, Or):
        result = False
        for c in g.children:
            if eval_guard(c, s):
                result = True
        return result
    raise TypeError(f"not a guard expression: {g!r}")


def conjunction_pairs(g: GuardExpr) -> tuple[tuple[str, str], ...] | None:
    """Flatten a pure conjunction of equality atoms to (var, value) pairs.

    Returns None for any other guard shape; used by interpreters as a fast
    path with semantics identical to eval_guard on well-bound valuations.
    """
    if isinstance(g, Atom):
        return ((g.var, g.value),)
    if isinstance(g, And):
        pairs: list[tuple[str, str]] = []
        for c in g.children:
            sub = conjunction_pairs(c)
            if sub is None:
                return None
            pairs.extend(sub)
        return tuple(pairs)
    return None


def guard_variables(g: GuardExpr) -> set[str]:
    if isinstance(g, Atom):
        return {g.var}
    if isinstance(g, Not):
        return guard_variables(g.child)
    if isinstance(g, (And, Or)):
        vars_ = set()
        for c in g.children:
            vars_ |= guard_variables(c)
        return vars_
    raise TypeError(f"not a guard expression: {g!r}")


def satisfying_valuations(g: GuardExpr, iface: InterfaceSpec) -> list[Valuation]:
    """All input valuations satisfying `g`, in canonical enumeration order.

    Empty iff `g` is unsatisfiable over the monitored variables.
    """
    input_names = set(iface.names("I"))
    stray = guard_variables(g) - input_names
    if stray:
        raise ToolchainError(f"guard references non-monitored variable(s) {sorted(stray)}")
    return [v for v in iter_valuations(iface.inputs) if eval_guard(g, v)]


def conjunction_of(val: Valuation, iface: InterfaceSpec) -> GuardExpr:
    """Total conjunction Atom(v=val(v)) over the monitored variables, declaration order."""
    atoms = [Atom(v.name, val[v.name]) for v in iface.inputs]
    if not atoms:
        raise ToolchainError("interface has no monitored variables")
    return atoms[0] if len(atoms) == 1 else And(tuple(atoms))


def print_output(o: Valuation, iface: InterfaceSpec) -> str:
    """Render an output valuation as the FSM output symbol, 'v=val' atoms joined by '&'."""
    names = [v.name for v in iface.outputs]
    if set(o.keys()) != set(names):
        raise ToolchainError("output valuation must bind exactly the controlled variables")
    return "&".join(f"{n}={o[n]}" for n in names)
