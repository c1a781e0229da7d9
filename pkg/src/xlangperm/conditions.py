"""Boolean conditions over privilege-check atoms.

A condition is a tree of :class:`And`, :class:`Or`, :class:`Not` and
:class:`Atom` nodes plus the two constants ``TRUE`` and ``UNSATISFIABLE``.
:func:`normalize` produces the canonical form used everywhere else: negation
pushed onto atoms, no nested same-operator nodes, duplicates and absorbed
children removed, children sorted, no single-child operators. Constants only
survive as the value of a whole condition.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union


class AtomKind(str, enum.Enum):
    PERMISSION = "permission"
    UID_EQ = "uid_eq"
    PID_SELF = "pid_self"


@dataclass(frozen=True, order=True)
class CheckAtom:
    kind: AtomKind
    name: str = ""  # permission name or uid constant; empty for PID_SELF

    @classmethod
    def permission(cls, name: str) -> "CheckAtom":
        return cls(AtomKind.PERMISSION, name)

    @classmethod
    def uid_eq(cls, constant: str) -> "CheckAtom":
        return cls(AtomKind.UID_EQ, constant)

    @classmethod
    def pid_self(cls) -> "CheckAtom":
        return cls(AtomKind.PID_SELF)

    @property
    def permission_name(self) -> Optional[str]:
        return self.name if self.kind is AtomKind.PERMISSION else None

    @property
    def uid_constant(self) -> Optional[str]:
        return self.name if self.kind is AtomKind.UID_EQ else None

    def __str__(self) -> str:
        if self.kind is AtomKind.PERMISSION:
            return self.name
        if self.kind is AtomKind.UID_EQ:
            return f"uid == {self.name}"
        return "pid == getpid()"


@dataclass(frozen=True)
class Const:
    value: bool

    def __repr__(self) -> str:
        return "TRUE" if self.value else "UNSATISFIABLE"


TRUE = Const(True)
UNSATISFIABLE = Const(False)


@dataclass(frozen=True)
class Atom:
    atom: CheckAtom


@dataclass(frozen=True)
class Not:
    arg: "Condition"


@dataclass(frozen=True)
class And:
    args: Tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    args: Tuple["Condition", ...]


Condition = Union[Const, Atom, Not, And, Or]


def permission(name: str) -> Atom:
    return Atom(CheckAtom.permission(name))


def uid_eq(constant: str) -> Atom:
    return Atom(CheckAtom.uid_eq(constant))


def pid_self() -> Atom:
    return Atom(CheckAtom.pid_self())


def all_of(*args: Condition) -> Condition:
    return normalize(And(tuple(args)))


def any_of(*args: Condition) -> Condition:
    return normalize(Or(tuple(args)))


# -- inspection --------------------------------------------------------------


def atoms(c: Condition) -> FrozenSet[CheckAtom]:
    if isinstance(c, Atom):
        return frozenset({c.atom})
    if isinstance(c, Not):
        return atoms(c.arg)
    if isinstance(c, (And, Or)):
        return frozenset().union(*(atoms(a) for a in c.args))
    return frozenset()


def evaluate(c: Condition, valuation: Mapping[CheckAtom, bool]) -> bool:
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Atom):
        return valuation[c.atom]
    if isinstance(c, Not):
        return not evaluate(c.arg, valuation)
    if isinstance(c, And):
        return all(evaluate(a, valuation) for a in c.args)
    if isinstance(c, Or):
        return any(evaluate(a, valuation) for a in c.args)
    raise TypeError(f"not a condition: {c!r}")


def truth_table(c: Condition, over: Optional[Iterable[CheckAtom]] = None) -> Tuple[bool, ...]:
    """Values of ``c`` under every valuation of ``over`` (default: its atoms)."""
    names = sorted(set(over) if over is not None else atoms(c))
    return tuple(
        evaluate(c, dict(zip(names, bits)))
        for bits in itertools.product((False, True), repeat=len(names))
    )


def has_negated_atom(c: Condition) -> bool:
    if isinstance(c, Not):
        return True
    if isinstance(c, (And, Or)):
        return any(has_negated_atom(a) for a in c.args)
    return False


# -- normal form -------------------------------------------------------------


def nnf(c: Condition, negate: bool = False) -> Condition:
    """Negation normal form: ``Not`` only directly above atoms."""
    if isinstance(c, Const):
        return Const(c.value != negate)
    if isinstance(c, Atom):
        return Not(c) if negate else c
    if isinstance(c, Not):
        return nnf(c.arg, not negate)
    if isinstance(c, (And, Or)):
        flip = isinstance(c, And) == negate  # And under negation becomes Or
        kids = tuple(nnf(a, negate) for a in c.args)
        return Or(kids) if flip else And(kids)
    raise TypeError(f"not a condition: {c!r}")


def sort_key(c: Condition) -> Tuple:
    if isinstance(c, Const):
        return (0, c.value)
    if isinstance(c, Atom):
        return (1, c.atom.kind.value, c.atom.name)
    if isinstance(c, Not):
        return (2,) + sort_key(c.arg)
    tag = 3 if isinstance(c, And) else 4
    return (tag, len(c.args), tuple(sort_key(a) for a in c.args))


def _members(c: Condition, op) -> FrozenSet[Condition]:
    return frozenset(c.args) if isinstance(c, op) else frozenset({c})


def _complement(c: Condition) -> Condition:
    return c.arg if isinstance(c, Not) else Not(c)


def _combine(op, args: Iterable[Condition]) -> Condition:
    unit, zero = (TRUE, UNSATISFIABLE) if op is And else (UNSATISFIABLE, TRUE)
    dual = Or if op is And else And
    kids: List[Condition] = []
    for a in args:
        if a == unit:
            continue
        if a == zero:
            return zero
        for k in (a.args if isinstance(a, op) else (a,)):
            if k not in kids:
                kids.append(k)
    literals = {k for k in kids if isinstance(k, (Atom, Not))}
    if any(_complement(k) in literals for k in literals):
        return zero
    # absorption: x op (x dual y) == x
    member_sets = [_members(k, dual) for k in kids]
    kept = [
        k for i, k in enumerate(kids)
        if not any(j != i and member_sets[j] < member_sets[i] for j in range(len(kids)))
    ]
    if not kept:
        return unit
    if len(kept) == 1:
        return kept[0]
    return op(tuple(sorted(kept, key=sort_key)))


def _norm(c: Condition) -> Condition:
    if isinstance(c, (Const, Atom, Not)):
        return c
    return _combine(type(c), (_norm(a) for a in c.args))


def normalize(c: Condition) -> Condition:
    return _norm(nnf(c))


Assumptions = Union[Mapping[CheckAtom, bool], Callable[[CheckAtom], Optional[bool]]]


def _substitute(c: Condition, lookup: Callable[[CheckAtom], Optional[bool]]) -> Condition:
    if isinstance(c, Atom):
        v = lookup(c.atom)
        return c if v is None else Const(bool(v))
    if isinstance(c, Not):
        return Not(_substitute(c.arg, lookup))
    if isinstance(c, (And, Or)):
        return type(c)(tuple(_substitute(a, lookup) for a in c.args))
    return c


def simplify_condition(c: Condition, assumptions: Assumptions) -> Condition:
    """Fix some atoms to known values and re-normalize.

    ``assumptions`` maps atoms to booleans, or is a callable returning a
    boolean or None (unknown) for each atom. A condition that can no longer
    hold comes back as ``UNSATISFIABLE``.
    """
    lookup = assumptions if callable(assumptions) else assumptions.get
    return normalize(_substitute(c, lookup))


def unprivileged_app(atom: CheckAtom) -> Optional[bool]:
    """Assumptions for a third-party app: never the system process or a system uid."""
    if atom.kind is AtomKind.PID_SELF or atom.kind is AtomKind.UID_EQ:
        return False
    return None


def permissions_in(c: Condition) -> FrozenSet[str]:
    return frozenset(a.name for a in atoms(c) if a.kind is AtomKind.PERMISSION)


# -- rendering ---------------------------------------------------------------


def to_json(c: Condition) -> Dict:
    if isinstance(c, Atom):
        a = c.atom
        if a.kind is AtomKind.PERMISSION:
            return {"atom": "permission", "name": a.name}
        if a.kind is AtomKind.UID_EQ:
            return {"atom": "uid_eq", "const": a.name}
        return {"atom": "pid_self"}
    if isinstance(c, (And, Or)):
        return {"op": "and" if isinstance(c, And) else "or", "args": [to_json(a) for a in c.args]}
    if isinstance(c, Not):
        return {"op": "not", "args": [to_json(c.arg)]}
    return {"const": c.value}


def from_json(data: Dict) -> Condition:
    if "atom" in data:
        kind = AtomKind(data["atom"])
        if kind is AtomKind.PERMISSION:
            return permission(data["name"])
        if kind is AtomKind.UID_EQ:
            return uid_eq(data["const"])
        return pid_self()
    if "op" in data:
        args = tuple(from_json(a) for a in data["args"])
        if data["op"] == "not":
            (arg,) = args
            return Not(arg)
        return {"and": And, "or": Or}[data["op"]](args)
    if "const" in data:
        return Const(bool(data["const"]))
    raise ValueError(f"not a condition: {data!r}")


def to_infix(c: Condition, top: bool = True) -> str:
    if isinstance(c, Atom):
        return str(c.atom)
    if isinstance(c, Not):
        return f"!({to_infix(c.arg)})"
    if isinstance(c, (And, Or)):
        sep = " && " if isinstance(c, And) else " || "
        text = sep.join(to_infix(a, False) for a in c.args)
        return text if top else f"({text})"
    return "true" if c.value else "false"
