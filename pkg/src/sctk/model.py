"""Domain model: finite sorts, variable declarations, valuations.

States, inputs and outputs are all valuations over subsets of the declared
variables.  Canonical order is declaration order for variables and listing
order for sort values; every tie-break in the toolchain derives from it.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .artifacts import canonical_bytes, load_json, write_bytes
from .errors import ToolchainError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
#: Sort values additionally admit a leading digit so that the conventional
#: inactive risk phase can be spelled "0".
VALUE_RE = re.compile(r"[A-Za-z0-9_]+\Z")

KIND_MONITORED = "I"
KIND_CONTROLLED = "O"
KIND_FACTOR = "F"
KINDS = (KIND_MONITORED, KIND_CONTROLLED, KIND_FACTOR)

#: Minimum life-cycle phases every risk-factor sort must provide:
#: inactive, active, mitigated.
FACTOR_PHASES = ("0", "a", "m")


class InterfaceError(ToolchainError):
    pass


@dataclass(frozen=True)
class Sort:
    """A named, ordered enumeration of values."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise InterfaceError(f"sort name {self.name!r} is not an identifier")
        if not self.values:
            raise InterfaceError(f"sort {self.name!r} has no values")
        for v in self.values:
            if not VALUE_RE.match(v):
                raise InterfaceError(f"sort {self.name!r}: bad value token {v!r}")
        if len(set(self.values)) != len(self.values):
            raise InterfaceError(f"sort {self.name!r} has duplicate values")


@dataclass(frozen=True)
class VarDecl:
    """A variable with its sort and role: monitored (I), controlled (O) or risk factor (F)."""

    name: str
    sort: Sort
    kind: str

    def __post_init__(self):
        if not IDENT_RE.match(self.name):
            raise InterfaceError(f"variable name {self.name!r} is not an identifier")
        if self.kind not in KINDS:
            raise InterfaceError(f"variable {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == KIND_FACTOR:
            missing = [p for p in FACTOR_PHASES if p not in self.sort.values]
            if missing:
                raise InterfaceError(
                    f"factor variable {self.name!r}: sort {self.sort.name!r} "
                    f"lacks required phase(s) {missing}"
                )


@dataclass(frozen=True)
class Valuation(Mapping):
    """Immutable finite map from variable names to value names.

    Bindings are stored name-sorted, so equality and hashing coincide with
    map equality regardless of construction order.
    """

    bindings: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "_map", dict(self.bindings))

    @staticmethod
    def of(mapping: Mapping[str, str] | Iterable[tuple[str, str]]) -> "Valuation":
        items = dict(mapping).items()
        return Valuation(tuple(sorted(items)))

    def __getitem__(self, key: str) -> str:
        return self._map[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def restrict(self, names: Iterable[str]) -> "Valuation":
        """Keep exactly the bindings whose names are in `names`."""
        keep = set(names)
        return Valuation(tuple((k, v) for k, v in self.bindings if k in keep))

    def as_dict(self) -> dict[str, str]:
        return dict(self.bindings)

    def __repr__(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.bindings)
        return f"Valuation({inner})"


@dataclass(frozen=True)
class InterfaceSpec:
    """The syntactic interface: all sorts and variables of the supervised system."""

    sorts: tuple[Sort, ...]
    vars: tuple[VarDecl, ...]

    def __post_init__(self):
        if len({s.name for s in self.sorts}) != len(self.sorts):
            raise InterfaceError("duplicate sort names")
        if len({v.name for v in self.vars}) != len(self.vars):
            raise InterfaceError("duplicate variable names")
        sort_set = set(self.sorts)
        for v in self.vars:
            if v.sort not in sort_set:
                raise InterfaceError(f"variable {v.name!r} references undeclared sort {v.sort.name!r}")
        for kind, label in ((KIND_MONITORED, "monitored"), (KIND_CONTROLLED, "controlled"), (KIND_FACTOR, "factor")):
            if not any(v.kind == kind for v in self.vars):
                raise InterfaceError(f"interface declares no {label} variable")
        object.__setattr__(self, "_by_name", {v.name: v for v in self.vars})

    @property
    def inputs(self) -> tuple[VarDecl, ...]:
        return tuple(v for v in self.vars if v.kind == KIND_MONITORED)

    @property
    def outputs(self) -> tuple[VarDecl, ...]:
        return tuple(v for v in self.vars if v.kind == KIND_CONTROLLED)

    @property
    def factors(self) -> tuple[VarDecl, ...]:
        return tuple(v for v in self.vars if v.kind == KIND_FACTOR)

    def var(self, name: str) -> VarDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise InterfaceError(f"unknown variable {name!r}") from None

    def var_or_none(self, name: str) -> VarDecl | None:
        return self._by_name.get(name)

    def names(self, kind: str | None = None) -> tuple[str, ...]:
        if kind is None:
            return tuple(v.name for v in self.vars)
        return tuple(v.name for v in self.vars if v.kind == kind)

    def check_valuation(self, val: Valuation, names: Sequence[str] | None = None, where: str = "valuation") -> None:
        """Require `val` to bind exactly `names` (default: all variables) with legal values."""
        expected = tuple(names) if names is not None else self.names()
        got = set(val.keys())
        missing = [n for n in expected if n not in got]
        extra = sorted(got - set(expected))
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing {missing}")
            if extra:
                parts.append(f"unexpected {extra}")
            raise InterfaceError(f"{where}: {'; '.join(parts)}")
        for n in expected:
            decl = self.var(n)
            if val[n] not in decl.sort.values:
                raise InterfaceError(
                    f"{where}: value {val[n]!r} not in sort {decl.sort.name!r} of variable {n!r}"
                )


def iter_valuations(var_decls: Sequence[VarDecl]) -> Iterator[Valuation]:
    """Enumerate all valuations over `var_decls` in canonical order.

    Canonical order is lexicographic by declaration order of the variables,
    then by sort value order; the first variable is the most significant.
    """
    names = [v.name for v in var_decls]
    for combo in product(*(v.sort.values for v in var_decls)):
        yield Valuation.of(zip(names, combo))


def domain_size(var_decls: Sequence[VarDecl]) -> int:
    size = 1
    for v in var_decls:
        size *= len(v.sort.values)
    return size


# ---------------------------------------------------------------------------
# Interface file format


def interface_to_doc(iface: InterfaceSpec) -> dict:
    return {
        "sorts": [{"name": s.name, "values": list(s.values)} for s in iface.sorts],
        "vars": [{"name": v.name, "sort": v.sort.name, "kind": v.kind} for v in iface.vars],
    }


def interface_from_doc(doc: dict) -> InterfaceSpec:
    try:
        sort_docs = doc["sorts"]
        var_docs = doc["vars"]
    except (KeyError, TypeError):
        raise InterfaceError("interface document needs 'sorts' and 'vars'") from None
    sorts = []
    for sd in sort_docs:
        try:
            sorts.append(Sort(sd["name"], tuple(sd["values"])))
        except (KeyError, TypeError):
            raise InterfaceError(f"malformed sort entry: {sd!r}") from None
    by_name = {s.name: s for s in sorts}
    decls = []
    for vd in var_docs:
        try:
            name, sort_name, kind = vd["name"], vd["sort"], vd["kind"]
        except (KeyError, TypeError):
            raise InterfaceError(f"malformed variable entry: {vd!r}") from None
        if sort_name not in by_name:
            raise InterfaceError(f"variable {name!r} references unknown sort {sort_name!r}")
        decls.append(VarDecl(name, by_name[sort_name], kind))
    return InterfaceSpec(tuple(sorts), tuple(decls))


def interface_bytes(iface: InterfaceSpec) -> bytes:
    return canonical_bytes(interface_to_doc(iface))


def save_interface(path, iface: InterfaceSpec) -> None:
    write_bytes(path, interface_bytes(iface))


def load_interface(path) -> InterfaceSpec:
    return interface_from_doc(load_json(Path(path)))
