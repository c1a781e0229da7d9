"""Shared syntax tree for the MiniJava and MiniCpp dialects.

All nodes are frozen dataclasses holding tuples, so two trees compare equal
exactly when they are structurally identical. Source line numbers are kept
for diagnostics but excluded from comparison.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union


class Language(str, enum.Enum):
    JAVA = "JAVA"
    CPP = "CPP"


class TypeKind(str, enum.Enum):
    CLASS = "CLASS"
    INTERFACE = "INTERFACE"


class Visibility(str, enum.Enum):
    PUBLIC = "PUBLIC"
    NONPUBLIC = "NONPUBLIC"


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Call:
    receiver: Optional["Expr"]
    name: str
    args: Tuple["Expr", ...] = ()
    arrow: bool = False


@dataclass(frozen=True)
class New:
    type_name: str
    args: Tuple["Expr", ...] = ()


@dataclass(frozen=True)
class FieldAccess:
    base: "Expr"
    field: str
    arrow: bool = False


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # "==", "!=", "&&", "||"
    left: "Expr"
    right: "Expr"


Expr = Union[Ident, StrLit, IntLit, Call, New, FieldAccess, Unary, Binary]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    declared_type: str
    init: Optional[Expr] = None
    strong: bool = False  # declared through sp<T>
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Assign:
    target: Expr
    value: Expr
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Throw:
    exc: New
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class Opaque:
    text: str
    line: int = field(default=0, compare=False, kw_only=True)


Stmt = Union[VarDecl, Assign, ExprStmt, If, Return, Throw, Opaque]


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    declared_type: str
    strong: bool = False


@dataclass(frozen=True)
class FieldDecl:
    name: str
    declared_type: str
    init: Optional[Expr] = None
    strong: bool = False
    is_static: bool = False


@dataclass(frozen=True)
class MethodDecl:
    owner: Optional[str]  # fully qualified type name, None for free functions
    name: str
    params: Tuple[Param, ...]
    return_type: str  # "" for constructors
    visibility: Visibility = Visibility.NONPUBLIC
    body: Optional[Tuple[Stmt, ...]] = None
    is_out_of_line: bool = False
    is_static: bool = False
    line: int = field(default=0, compare=False, kw_only=True)

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def is_constructor(self) -> bool:
        return self.return_type == "" and self.owner is not None


@dataclass(frozen=True)
class TypeDecl:
    fqn: str
    name: str
    kind: TypeKind
    extends: Optional[str] = None
    implements: Tuple[str, ...] = ()
    fields: Tuple[FieldDecl, ...] = ()
    methods: Tuple[MethodDecl, ...] = ()
    nested: Tuple["TypeDecl", ...] = ()
    line: int = field(default=0, compare=False, kw_only=True)

    def walk(self) -> Iterator["TypeDecl"]:
        yield self
        for inner in self.nested:
            yield from inner.walk()


@dataclass(frozen=True)
class JniEntry:
    java_name: str
    signature: str
    native_function: str


@dataclass(frozen=True)
class JniTable:
    name: str
    entries: Tuple[JniEntry, ...]
    line: int = field(default=0, compare=False, kw_only=True)


@dataclass(frozen=True)
class ClassPathConst:
    name: str
    value: str
    line: int = field(default=0, compare=False, kw_only=True)


GlobalDecl = Union[JniTable, ClassPathConst]


@dataclass(frozen=True)
class SourceUnit:
    path: str
    language: Language
    package_or_namespace: str = ""
    types: Tuple[TypeDecl, ...] = ()
    free_functions: Tuple[MethodDecl, ...] = ()
    globals: Tuple[GlobalDecl, ...] = ()

    def all_types(self) -> Iterator[TypeDecl]:
        for t in self.types:
            yield from t.walk()

    def all_methods(self) -> Iterator[MethodDecl]:
        for t in self.all_types():
            yield from t.methods
        yield from self.free_functions


# -- traversal helpers -------------------------------------------------------


def iter_stmts(body) -> Iterator[Stmt]:
    """Pre-order walk over a statement list, descending into if-blocks."""
    for s in body or ():
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)


def stmt_exprs(s: Stmt) -> Tuple[Expr, ...]:
    """Expressions owned directly by ``s`` (not by nested statements)."""
    if isinstance(s, VarDecl):
        return (s.init,) if s.init is not None else ()
    if isinstance(s, Assign):
        return (s.target, s.value)
    if isinstance(s, ExprStmt):
        return (s.expr,)
    if isinstance(s, If):
        return (s.cond,)
    if isinstance(s, Return):
        return (s.value,) if s.value is not None else ()
    if isinstance(s, Throw):
        return (s.exc,)
    return ()


def iter_exprs(e: Optional[Expr]) -> Iterator[Expr]:
    if e is None:
        return
    yield e
    if isinstance(e, Call):
        yield from iter_exprs(e.receiver)
        for a in e.args:
            yield from iter_exprs(a)
    elif isinstance(e, New):
        for a in e.args:
            yield from iter_exprs(a)
    elif isinstance(e, FieldAccess):
        yield from iter_exprs(e.base)
    elif isinstance(e, Unary):
        yield from iter_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from iter_exprs(e.left)
        yield from iter_exprs(e.right)


def calls_in_stmt(s: Stmt) -> Iterator[Call]:
    for e in stmt_exprs(s):
        for sub in iter_exprs(e):
            if isinstance(sub, Call):
                yield sub


def calls_in_body(body) -> Iterator[Call]:
    for s in iter_stmts(body):
        yield from calls_in_stmt(s)


def dotted(e: Expr) -> Optional[str]:
    """``a.b.c`` for an Ident/FieldAccess chain, else None."""
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, FieldAccess):
        base = dotted(e.base)
        return f"{base}.{e.field}" if base is not None else None
    return None
