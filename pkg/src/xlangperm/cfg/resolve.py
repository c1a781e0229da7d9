"""Call-target resolution: value tracing for native receivers and dispatch.

Native receivers are typed by tracing the values assigned to them: a service
lookup by identifier, a constructor, or the traced return value of a called
function. Fields are traced across every method of their class. Java
receivers use declared types only.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from ..diagnostics import Diagnostic, DiagnosticSink
from ..frontend import Language, MethodDecl, MethodRef, SymbolTable, TypeKind
from ..frontend.ast import (
    Assign, Call, FieldAccess, Ident, New, Return, StrLit, VarDecl, dotted, iter_stmts,
)
from ..frontend.symbols import UNKNOWN
from ..linkage import INTERFACE_CASTS, SERVICE_LOOKUPS, ServiceRegistry
from ..scope import find_field, is_null, local_types, resolve_type_in


class Evidence(str, enum.Enum):
    SERVICE_ID = "SERVICE_ID"
    CONSTRUCTOR = "CONSTRUCTOR"
    RETURN_TYPE = "RETURN_TYPE"
    MEMBER_INIT = "MEMBER_INIT"


@dataclass(frozen=True)
class TypeBinding:
    variable: Tuple[str, str]  # (method ref or class fqn, name)
    bound_type: str
    evidence: Evidence


@dataclass(frozen=True)
class Resolution:
    targets: Tuple[MethodRef, ...]
    unresolved: bool = False


_Traced = Tuple[object, Optional[Evidence]]  # (type fqn or UNKNOWN, evidence)
_NOTHING: _Traced = (UNKNOWN, None)


def is_this(e) -> bool:
    return isinstance(e, Ident) and e.name == "this"


class CallResolver:
    """Resolves calls inside corpus methods; results are cached per query."""

    def __init__(self, symtab: SymbolTable, registry: ServiceRegistry, diagnostics: Optional[DiagnosticSink] = None):
        self.symtab = symtab
        self.registry = registry
        self.sink = diagnostics if diagnostics is not None else DiagnosticSink()
        self._local_cache: Dict[Tuple[MethodRef, str], _Traced] = {}
        self._field_cache: Dict[Tuple[str, str], _Traced] = {}
        self._return_cache: Dict[MethodRef, _Traced] = {}
        self._active: Set[object] = set()
        self._cut = 0  # cycle cut-offs seen; results computed across one are not cached

    # -- helpers ---------------------------------------------------------------

    def _lang(self, m: MethodDecl) -> Optional[Language]:
        return self.symtab.language_of(MethodRef.of(m))

    def _where(self, m: MethodDecl) -> Tuple[str, int]:
        unit = self.symtab.unit_of(MethodRef.of(m))
        return (unit.path if unit else "?", m.line)

    def _merge(self, variable: Tuple[str, str], found: List[_Traced], where: Tuple[str, int]) -> _Traced:
        types = sorted({t for t, _ in found if t is not UNKNOWN})
        if len(types) == 1:
            evidence = next(e for t, e in found if t == types[0])
            return types[0], evidence
        if len(types) > 1:
            self.sink.add(Diagnostic(where[0], where[1], "CONFLICT", f"{variable[0]}:{variable[1]} bound to {', '.join(types)}"))
        return _NOTHING

    def _cached(self, cache: dict, key, compute) -> _Traced:
        if key in cache:
            return cache[key]
        tag = (id(cache), key)
        if tag in self._active:
            self._cut += 1
            return _NOTHING
        before = self._cut
        self._active.add(tag)
        try:
            result = compute()
        finally:
            self._active.discard(tag)
        if self._cut == before:
            cache[key] = result
        return result

    # -- value tracing ---------------------------------------------------------

    def value_type(self, e, m: MethodDecl) -> _Traced:
        """Concrete type of the value ``e`` evaluates to inside ``m``."""
        if isinstance(e, New):
            return resolve_type_in(self.symtab, m, e.type_name), Evidence.CONSTRUCTOR
        if isinstance(e, Call):
            if e.name in SERVICE_LOOKUPS and e.args and isinstance(e.args[0], StrLit):
                target = self.registry.get(e.args[0].value)
                return (target, Evidence.SERVICE_ID) if target is not UNKNOWN else _NOTHING
            if e.name in INTERFACE_CASTS and e.args:
                return self.value_type(e.args[0], m)
            res = self.resolve_call(e, m)
            if len(res.targets) == 1:
                t, ev = self.traced_return(res.targets[0])
                return (t, Evidence.RETURN_TYPE if ev is not None else None) if t is not UNKNOWN else _NOTHING
            return _NOTHING
        if is_this(e):
            return (m.owner, Evidence.CONSTRUCTOR) if m.owner else _NOTHING
        if isinstance(e, Ident):
            if e.name in local_types(m):
                return self.trace_local(m, e.name)
            return self.trace_field(m, e.name)
        if isinstance(e, FieldAccess) and is_this(e.base):
            return self.trace_field(m, e.field)
        return _NOTHING

    def traced_return(self, ref: MethodRef) -> _Traced:
        callee = self.symtab.method(ref)
        if callee is UNKNOWN or callee.body is None:
            return _NOTHING

        def compute():
            found = [
                self.value_type(s.value, callee)
                for s in iter_stmts(callee.body)
                if isinstance(s, Return) and s.value is not None and not is_null(s.value)
            ]
            return self._merge((str(ref), "return"), found, self._where(callee))

        return self._cached(self._return_cache, ref, compute)

    def trace_local(self, m: MethodDecl, name: str) -> _Traced:
        key = (MethodRef.of(m), name)

        def compute():
            found = []
            for s in iter_stmts(m.body):
                value = None
                if isinstance(s, VarDecl) and s.name == name:
                    value = s.init
                elif isinstance(s, Assign) and s.target == Ident(name):
                    value = s.value
                if value is not None and not is_null(value):
                    found.append(self.value_type(value, m))
            return self._merge((str(key[0]), name), found, self._where(m))

        return self._cached(self._local_cache, key, compute)

    def trace_field(self, m: MethodDecl, name: str) -> _Traced:
        hit = find_field(self.symtab, m.owner, name)
        if hit is None:
            return _NOTHING
        return self.trace_member(hit[0], name)

    def trace_member(self, cls: str, name: str) -> _Traced:
        key = (cls, name)

        def compute():
            methods = [
                meth for meth in self.symtab.iter_methods()
                if meth.owner == cls and meth.body is not None
            ]
            methods.sort(key=lambda meth: (not meth.is_constructor, meth.name, meth.arity))
            found = []
            decl = self.symtab.types.get(cls)
            fdecl = next((f for f in decl.fields if f.name == name), None) if decl else None
            if fdecl is not None and fdecl.init is not None and not is_null(fdecl.init) and methods:
                found.append(self.value_type(fdecl.init, methods[0]))
            for meth in methods:
                shadowed = name in local_types(meth)
                for s in iter_stmts(meth.body):
                    if not isinstance(s, Assign) or is_null(s.value):
                        continue
                    t = s.target
                    if (isinstance(t, Ident) and t.name == name and not shadowed) or (
                        isinstance(t, FieldAccess) and is_this(t.base) and t.field == name
                    ):
                        found.append(self.value_type(s.value, meth))
            where = (self.symtab.type_units[cls].path, decl.line) if decl else ("?", 0)
            traced = self._merge(key, found, where)
            return (traced[0], Evidence.MEMBER_INIT) if traced[0] is not UNKNOWN else _NOTHING

        return self._cached(self._field_cache, key, compute)

    # -- public binding queries ------------------------------------------------

    def resolve_strong_pointer(self, method: MethodRef, name: str):
        m = self.symtab.method(method)
        if m is UNKNOWN:
            return UNKNOWN
        t, ev = self.trace_local(m, name)
        return TypeBinding((str(method), name), t, ev) if t is not UNKNOWN else UNKNOWN

    def resolve_member_variable(self, cls: str, name: str):
        t, ev = self.trace_member(cls, name)
        return TypeBinding((cls, name), t, ev) if t is not UNKNOWN else UNKNOWN

    # -- declared types --------------------------------------------------------

    def declared_type(self, e, m: MethodDecl):
        if is_this(e):
            return m.owner or UNKNOWN
        if isinstance(e, Ident):
            written = local_types(m).get(e.name)
            if written is None:
                hit = find_field(self.symtab, m.owner, e.name)
                if hit is None:
                    return UNKNOWN
                return self.symtab.resolve_type(hit[1].declared_type, hit[0], self._lang(m))
            return resolve_type_in(self.symtab, m, written)
        if isinstance(e, FieldAccess) and is_this(e.base):
            hit = find_field(self.symtab, m.owner, e.field)
            return self.symtab.resolve_type(hit[1].declared_type, hit[0], self._lang(m)) if hit else UNKNOWN
        if isinstance(e, New):
            return resolve_type_in(self.symtab, m, e.type_name)
        if isinstance(e, Call):
            res = self.resolve_call(e, m)
            if len(res.targets) == 1:
                callee = self.symtab.method(res.targets[0])
                if callee.is_constructor:
                    return callee.owner
                return resolve_type_in(self.symtab, callee, callee.return_type)
        return UNKNOWN

    def static_type(self, e, m: MethodDecl):
        """The type named by ``e`` when it is a type reference, not a value."""
        name = dotted(e)
        if name is None or isinstance(e, Ident) and (e.name in local_types(m) or find_field(self.symtab, m.owner, e.name)):
            return UNKNOWN
        return resolve_type_in(self.symtab, m, name)

    # -- dispatch --------------------------------------------------------------

    def _interface_like(self, method: MethodDecl) -> bool:
        if method.body is not None:
            return False
        if self.symtab.kind_of(method.owner) is TypeKind.INTERFACE:
            return True
        return self.symtab.language_of(MethodRef.of(method)) is Language.CPP

    def resolve_virtual_call(self, name: str, arity: int, bound, declared, where=("?", 0)) -> Resolution:
        for receiver in (bound, declared):
            if receiver is UNKNOWN or receiver is None:
                continue
            found = self.symtab.find_in_hierarchy(receiver, name, arity)
            if found is not UNKNOWN and not self._interface_like(found):
                return Resolution((MethodRef.of(found),))
            impls = sorted(
                {
                    MethodRef.of(impl)
                    for d in self.symtab.descendants(receiver)
                    for impl in [self.symtab.find_in_hierarchy(d, name, arity)]
                    if impl is not UNKNOWN and impl.body is not None
                },
                key=lambda r: r.sort_key,
            )
            if len(impls) == 1:
                return Resolution(impls)
            if len(impls) > 1:
                self.sink.add(Diagnostic(
                    where[0], where[1], "AMBIGUOUS",
                    f"{receiver}.{name}/{arity} -> {', '.join(str(r) for r in impls)}",
                ))
            return Resolution((), True)
        return Resolution((), True)

    def resolve_new(self, e: New, m: MethodDecl) -> Optional[MethodRef]:
        t = resolve_type_in(self.symtab, m, e.type_name)
        if t is UNKNOWN:
            return None
        ctor = self.symtab.lookup(t, t.rpartition(".")[2], len(e.args))
        return MethodRef.of(ctor) if ctor is not UNKNOWN else None

    def _own_method(self, m: MethodDecl, name: str, arity: int):
        scope = m.owner
        while scope and scope in self.symtab.types:
            found = self.symtab.find_in_hierarchy(scope, name, arity)
            if found is not UNKNOWN:
                return scope, found
            scope = scope.rpartition(".")[0]
        return None, UNKNOWN

    def resolve_call(self, call: Call, m: MethodDecl) -> Resolution:
        arity = len(call.args)
        where = (self._where(m)[0], m.line)
        if call.receiver is None or is_this(call.receiver):
            scope, found = self._own_method(m, call.name, arity)
            if found is not UNKNOWN:
                if self._interface_like(found):
                    return self.resolve_virtual_call(call.name, arity, UNKNOWN, scope, where)
                return Resolution((MethodRef.of(found),))
            free = self.symtab.lookup(None, call.name, arity)
            if free is not UNKNOWN:
                return Resolution((MethodRef.of(free),))
            return Resolution((), True)
        static = self.static_type(call.receiver, m)
        if static is not UNKNOWN:
            found = self.symtab.find_in_hierarchy(static, call.name, arity)
            return Resolution((MethodRef.of(found),)) if found is not UNKNOWN else Resolution((), True)
        key = ("call", MethodRef.of(m), call)
        if key in self._active:
            self._cut += 1
            return Resolution((), True)
        self._active.add(key)
        try:
            bound = UNKNOWN
            if self._lang(m) is Language.CPP:
                bound, _ = self.value_type(call.receiver, m)
            declared = self.declared_type(call.receiver, m)
        finally:
            self._active.discard(key)
        return self.resolve_virtual_call(call.name, arity, bound, declared, where)
