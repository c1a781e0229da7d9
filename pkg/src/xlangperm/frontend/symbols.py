from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .ast import Language, MethodDecl, SourceUnit, TypeDecl, TypeKind


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"

    def __bool__(self):
        return False


UNKNOWN = _Unknown()


class DuplicateType(Exception):
    def __init__(self, fqn: str, first: str, second: str):
        self.fqn = fqn
        super().__init__(f"type {fqn} declared in both {first} and {second}")


@dataclass(frozen=True)
class MethodRef:
    owner: Optional[str]
    name: str
    arity: int

    def __str__(self) -> str:
        if self.owner is None:
            return f"{self.name}/{self.arity}"
        return f"{self.owner}.{self.name}/{self.arity}"

    @property
    def sort_key(self) -> Tuple[str, str, int]:
        return (self.owner or "", self.name, self.arity)

    @classmethod
    def of(cls, m: MethodDecl) -> "MethodRef":
        return cls(m.owner, m.name, m.arity)

    @classmethod
    def parse(cls, text: str) -> "MethodRef":
        """Inverse of ``str()``: ``pkg.Class.method/arity``."""
        head, _, arity = text.rpartition("/")
        if not head or not arity.isdigit():
            raise ValueError(f"bad method reference {text!r}")
        owner, _, name = head.rpartition(".")
        return cls(owner or None, name, int(arity))


@dataclass
class SymbolTable:
    types: Dict[str, TypeDecl] = field(default_factory=dict)
    methods: Dict[Tuple[Optional[str], str, int], MethodDecl] = field(default_factory=dict)
    hierarchy: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    type_units: Dict[str, SourceUnit] = field(default_factory=dict)
    method_units: Dict[Tuple[Optional[str], str, int], SourceUnit] = field(default_factory=dict)
    _by_simple: Dict[str, List[str]] = field(default_factory=dict, repr=False)
    _children: Dict[str, List[str]] = field(default_factory=dict, repr=False)

    # -- lookups ----------------------------------------------------------------

    def lookup(self, owner: Optional[str], name: str, arity: int):
        return self.methods.get((owner, name, arity), UNKNOWN)

    def method(self, ref: MethodRef):
        return self.methods.get((ref.owner, ref.name, ref.arity), UNKNOWN)

    def unit_of(self, ref: MethodRef) -> Optional[SourceUnit]:
        return self.method_units.get((ref.owner, ref.name, ref.arity))

    def language_of(self, ref: MethodRef) -> Optional[Language]:
        unit = self.unit_of(ref)
        return unit.language if unit is not None else None

    def resolve_type(self, name: str, context: str = "", language: Optional[Language] = None):
        """Resolve a written type name to a fully qualified one.

        ``context`` is the fqn of the enclosing type or package. Candidates in
        the innermost enclosing scope win, then the same language, then a
        unique corpus-wide match; anything else is UNKNOWN.
        """
        if not name:
            return UNKNOWN
        base = name.rstrip("*&").replace("[]", "").replace("::", ".")
        if base in self.types:
            return base
        head, _, rest = base.partition(".")
        candidates = self._by_simple.get(head, [])
        if not candidates:
            return UNKNOWN
        resolved = self._pick(candidates, context, language)
        if resolved is UNKNOWN:
            return UNKNOWN
        if rest:
            full = f"{resolved}.{rest}"
            return full if full in self.types else UNKNOWN
        return resolved

    def _pick(self, candidates: List[str], context: str, language: Optional[Language]):
        if len(candidates) == 1:
            return candidates[0]
        scope = context
        while scope:
            local = [c for c in candidates if c.rpartition(".")[0] == scope]
            if len(local) == 1:
                return local[0]
            scope = scope.rpartition(".")[0]
        if language is not None:
            same = [c for c in candidates if self.type_units[c].language is language]
            if len(same) == 1:
                return same[0]
        return UNKNOWN

    def ancestors(self, fqn: str) -> List[str]:
        """All transitive supertypes, nearest first, without duplicates."""
        out: List[str] = []
        frontier = list(self.hierarchy.get(fqn, ()))
        while frontier:
            t = frontier.pop(0)
            if t in out or t == fqn:
                continue
            out.append(t)
            frontier.extend(self.hierarchy.get(t, ()))
        return out

    def descendants(self, fqn: str) -> List[str]:
        out: List[str] = []
        frontier = list(self._children.get(fqn, ()))
        while frontier:
            t = frontier.pop(0)
            if t in out or t == fqn:
                continue
            out.append(t)
            frontier.extend(self._children.get(t, ()))
        return sorted(out)

    def is_subtype(self, child: str, parent: str) -> bool:
        return child == parent or parent in self.ancestors(child)

    def find_in_hierarchy(self, owner: str, name: str, arity: int):
        """``owner``'s own method or the nearest inherited one."""
        for t in [owner] + self.ancestors(owner):
            m = self.methods.get((t, name, arity))
            if m is not None:
                return m
        return UNKNOWN

    def methods_named(self, name: str, arity: Optional[int] = None) -> List[MethodDecl]:
        return [
            m for (o, n, a), m in sorted(self.methods.items(), key=lambda kv: (kv[0][0] or "", kv[0][1], kv[0][2]))
            if n == name and (arity is None or a == arity)
        ]

    def iter_methods(self) -> Iterator[MethodDecl]:
        for key in sorted(self.methods, key=lambda k: (k[0] or "", k[1], k[2])):
            yield self.methods[key]

    def kind_of(self, fqn: str) -> Optional[TypeKind]:
        t = self.types.get(fqn)
        return t.kind if t is not None else None


def build_symbol_table(units: Iterable[SourceUnit]) -> SymbolTable:
    table = SymbolTable()
    units = sorted(units, key=lambda u: u.path)
    for unit in units:
        for t in unit.all_types():
            if t.fqn in table.types:
                raise DuplicateType(t.fqn, table.type_units[t.fqn].path, unit.path)
            table.types[t.fqn] = t
            table.type_units[t.fqn] = unit
            table._by_simple.setdefault(t.name, []).append(t.fqn)
            for m in t.methods:
                key = (m.owner, m.name, m.arity)
                table.methods[key] = m
                table.method_units[key] = unit
    # free functions and out-of-line definitions whose class lives elsewhere
    for unit in units:
        for m in unit.free_functions:
            key = (m.owner, m.name, m.arity)
            existing = table.methods.get(key)
            if existing is not None and existing.body is not None and m.body is None:
                continue
            if existing is not None and m.owner is not None:
                m = dataclasses.replace(m, visibility=existing.visibility)
            table.methods[key] = m
            table.method_units[key] = unit
    for fqn, t in sorted(table.types.items()):
        unit = table.type_units[fqn]
        scope = fqn.rpartition(".")[0]
        parents = []
        for written in ([t.extends] if t.extends else []) + list(t.implements):
            resolved = table.resolve_type(written, scope, unit.language)
            if resolved is not UNKNOWN:
                parents.append(resolved)
        table.hierarchy[fqn] = tuple(parents)
        for p in parents:
            table._children.setdefault(p, []).append(fqn)
    return table
