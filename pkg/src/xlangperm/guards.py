"""Recognizing privilege-check guards in method bodies.

A guard is an ``if`` whose condition mentions at least one check atom and
whose denial branch ends by returning a denial constant or throwing a
security exception. Its proceed-condition is the negation of the denial
condition, with negation pushed onto the atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

from .conditions import (
    And, Atom, CheckAtom, Condition, Not, Or, has_negated_atom, nnf, normalize,
)
from .diagnostics import Diagnostic, DiagnosticSink
from .frontend.ast import (
    Assign, Binary, Call, Expr, FieldAccess, Ident, If, Language, MethodDecl,
    Return, StrLit, Throw, Unary, VarDecl, dotted, iter_stmts,
)
from .frontend.printer import print_expr

DEFAULT_DENIAL_CONSTANTS = ("PERMISSION_DENIED", "-EPERM", "-EACCES")
DEFAULT_CHECK_FUNCTIONS = ("checkCallingPermission", "checkPermission", "checkCallingOrSelfPermission")
DEFAULT_SECURITY_EXCEPTIONS = ("SecurityException",)

CALLING_PID = ("getCallingPid",)
CALLING_UID = ("getCallingUid",)
OWN_PID = ("getpid", "myPid")
GRANTED = "PERMISSION_GRANTED"
DENIED = "PERMISSION_DENIED"


class GuardWithNonLiteralPermission(Exception):
    pass


class NegativeAtomRequired(Exception):
    pass


@dataclass(frozen=True)
class GuardConfig:
    denial_constants: Tuple[str, ...] = DEFAULT_DENIAL_CONSTANTS
    check_functions: Tuple[str, ...] = DEFAULT_CHECK_FUNCTIONS
    security_exceptions: Tuple[str, ...] = DEFAULT_SECURITY_EXCEPTIONS


@dataclass(frozen=True)
class Guard:
    denial: Condition  # when the branch denies, over atoms; may contain Not
    denial_value: str
    atoms: FrozenSet[CheckAtom]
    line: int = field(default=0, compare=False)


class _Other:
    """Placeholder for a condition fragment that is not a check atom."""

    def __repr__(self):
        return "OTHER"


OTHER = _Other()


@dataclass
class _MethodFacts:
    """Locals of one method assigned from intrinsics or check calls."""

    values: Dict[str, Expr]

    @classmethod
    def of(cls, m: MethodDecl) -> "_MethodFacts":
        seen: Dict[str, list] = {}
        for s in iter_stmts(m.body):
            if isinstance(s, VarDecl) and s.init is not None:
                seen.setdefault(s.name, []).append(s.init)
            elif isinstance(s, Assign) and isinstance(s.target, Ident):
                seen.setdefault(s.target.name, []).append(s.value)
        values = {}
        for name, exprs in seen.items():
            if all(e == exprs[0] for e in exprs) and isinstance(exprs[0], Call):
                values[name] = exprs[0]
        return cls(values)


class _Translator:
    def __init__(self, facts: _MethodFacts, config: GuardConfig):
        self.facts = facts
        self.config = config
        self.found = set()

    def value(self, e: Expr) -> Expr:
        if isinstance(e, Ident) and e.name in self.facts.values:
            return self.facts.values[e.name]
        return e

    def _intrinsic(self, e: Expr, names) -> bool:
        e = self.value(e)
        return isinstance(e, Call) and e.name in names and not e.args

    def _check_call(self, e: Expr) -> Optional[Call]:
        e = self.value(e)
        if isinstance(e, Call) and e.name in self.config.check_functions:
            return e
        return None

    def _permission(self, call: Call) -> Atom:
        if not call.args or not isinstance(call.args[0], StrLit):
            raise GuardWithNonLiteralPermission(call.name)
        atom = CheckAtom.permission(call.args[0].value)
        self.found.add(atom)
        return Atom(atom)

    def _const_name(self, e: Expr) -> Optional[str]:
        name = dotted(e)
        return name.rpartition(".")[2] if name else None

    def translate(self, e: Expr):
        if isinstance(e, Binary) and e.op in ("&&", "||"):
            left, right = self.translate(e.left), self.translate(e.right)
            return (And if e.op == "&&" else Or)((left, right))
        if isinstance(e, Unary) and e.op == "!":
            inner = self.translate(e.operand)
            return OTHER if inner is OTHER else Not(inner)
        call = self._check_call(e)
        if call is not None:
            return self._permission(call)
        if isinstance(e, Binary) and e.op in ("==", "!="):
            positive = self._comparison(e.left, e.right) or self._comparison(e.right, e.left)
            if positive is None:
                return OTHER
            atom, holds_on_eq = positive
            return atom if (e.op == "==") == holds_on_eq else Not(atom)
        return OTHER

    def _comparison(self, a: Expr, b: Expr):
        """(atom, True if ``a == b`` means the atom holds) or None."""
        call = self._check_call(a)
        if call is not None:
            const = self._const_name(b)
            if const in (GRANTED, DENIED):
                return self._permission(call), const == GRANTED
            return None
        if self._intrinsic(a, CALLING_PID) and self._intrinsic(b, OWN_PID):
            atom = CheckAtom.pid_self()
            self.found.add(atom)
            return Atom(atom), True
        if self._intrinsic(a, CALLING_UID):
            const = dotted(b)
            if const is not None and not isinstance(self.value(b), Call):
                atom = CheckAtom.uid_eq(const)
                self.found.add(atom)
                return Atom(atom), True
        return None


def _push_negation(c, negate: bool = False):
    if c is OTHER:
        return OTHER
    if isinstance(c, Not):
        return _push_negation(c.arg, not negate)
    if isinstance(c, (And, Or)):
        flip = isinstance(c, And) == negate
        kids = tuple(_push_negation(a, negate) for a in c.args)
        return Or(kids) if flip else And(kids)
    return Not(c) if negate else c


def _drop_other(c):
    """Remove non-atom parts, each replaced by the identity of its operator."""
    if isinstance(c, (And, Or)):
        kids = [k for k in (_drop_other(a) for a in c.args) if k is not OTHER]
        if not kids:
            return OTHER
        return kids[0] if len(kids) == 1 else type(c)(tuple(kids))
    return c


def _denial_value(stmt, config: GuardConfig, lang: Language) -> Optional[str]:
    if isinstance(stmt, Return) and stmt.value is not None:
        v = stmt.value
        if isinstance(v, (Ident, FieldAccess)):
            text = dotted(v).rpartition(".")[2]
        elif isinstance(v, Unary) and v.op == "-" and isinstance(v.operand, Ident):
            text = "-" + v.operand.name
        else:
            text = print_expr(v, lang)
        return text if text in config.denial_constants else None
    if isinstance(stmt, Throw):
        name = stmt.exc.type_name.rpartition(".")[2]
        return f"throw {name}" if name in config.security_exceptions else None
    return None


def recognize_check(
    stmt: If,
    method: MethodDecl,
    config: GuardConfig = GuardConfig(),
    language: Language = Language.JAVA,
    diagnostics: Optional[DiagnosticSink] = None,
    path: str = "",
) -> Optional[Guard]:
    if not isinstance(stmt, If):
        return None
    branch, denies_when_true = (stmt.then, True) if stmt.then else (stmt.orelse, False)
    if not branch:
        return None
    denial_value = _denial_value(branch[-1], config, language)
    if denial_value is None:
        return None
    tr = _Translator(_MethodFacts.of(method), config)
    try:
        formula = tr.translate(stmt.cond)
    except GuardWithNonLiteralPermission as e:
        if diagnostics is not None:
            diagnostics.add(Diagnostic(path, stmt.line, "NONLITERAL", f"permission argument of {e} in {method.name}"))
        return None
    if not tr.found:
        return None
    formula = _drop_other(_push_negation(formula))
    if formula is OTHER:
        return None
    denial = formula if denies_when_true else nnf(Not(formula))
    return Guard(denial, denial_value, frozenset(tr.found), line=stmt.line)


def extract_guard_condition(guard: Guard) -> Condition:
    """The condition under which execution proceeds past ``guard``."""
    proceed = normalize(Not(guard.denial))
    if has_negated_atom(proceed):
        raise NegativeAtomRequired(f"guard at line {guard.line} denies when an atom holds")
    return proceed
