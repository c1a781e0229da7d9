"""Cross-language entry points: service registry, AIDL pairs and JNI pairs."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .diagnostics import Diagnostic, DiagnosticSink, unmatched
from .frontend import Language, MethodDecl, MethodRef, SourceUnit, SymbolTable, TypeDecl, TypeKind
from .frontend.ast import (
    Assign, Call, ClassPathConst, FieldAccess, Ident, JniEntry, JniTable, New,
    Return, StrLit, VarDecl, calls_in_body, calls_in_stmt, dotted, iter_stmts,
)
from .frontend.parser import JNI_REGISTER_FUNCTIONS
from .frontend.symbols import UNKNOWN
from .scope import find_field, local_types, resolve_type_in

SERVICE_LOOKUPS = frozenset({"getService", "checkService"})
INTERFACE_CASTS = frozenset({"asInterface", "interface_cast"})
_REMOTE_INTERFACE = re.compile(r"I[A-Z]\w*$")


class PairKind(str, enum.Enum):
    AIDL = "AIDL"
    JNI = "JNI"


@dataclass(frozen=True)
class EntryPointPair:
    kind: PairKind
    java_method: MethodRef
    native_method: MethodRef
    match_key: Tuple[str, ...]
    inner_language: bool = False  # Java-to-Java AIDL

    @property
    def sort_key(self):
        return (self.kind.value, self.match_key)


# -- service registry --------------------------------------------------------


class ConflictingRegistration(Exception):
    def __init__(self, identifier: str, first: str, second: str):
        self.identifier = identifier
        super().__init__(f"service {identifier!r} registered as both {first} and {second}")


class UnresolvedServiceClass(Exception):
    def __init__(self, identifier: str, written: str):
        self.identifier = identifier
        super().__init__(f"service {identifier!r} registers unresolvable class {written!r}")


@dataclass(frozen=True)
class ServiceRegistry:
    entries: Mapping[str, str] = field(default_factory=dict)
    provenance: Mapping[str, str] = field(default_factory=dict)

    def get(self, identifier: str):
        return self.entries.get(identifier, UNKNOWN)

    def __len__(self) -> int:
        return len(self.entries)


def _bodied(unit: SourceUnit) -> Iterable[MethodDecl]:
    return (m for m in unit.all_methods() if m.body is not None)


def _is_service_manager(recv, m: MethodDecl, language: Language) -> bool:
    if language is Language.JAVA:
        name = dotted(recv) if recv is not None else None
        return name is not None and (name == "ServiceManager" or name.endswith(".ServiceManager"))
    if isinstance(recv, Call):
        return recv.name == "defaultServiceManager"
    if isinstance(recv, Ident):
        for s in iter_stmts(m.body):
            value = None
            if isinstance(s, VarDecl) and s.name == recv.name:
                value = s.init
            elif isinstance(s, Assign) and s.target == recv:
                value = s.value
            if isinstance(value, Call) and value.name == "defaultServiceManager":
                return True
    return False


def _registered_class(arg, m: MethodDecl, symtab: SymbolTable) -> Tuple[str, object]:
    if isinstance(arg, New):
        return arg.type_name, resolve_type_in(symtab, m, arg.type_name)
    if isinstance(arg, Ident):
        written = local_types(m).get(arg.name)
        if written is None:
            hit = find_field(symtab, m.owner, arg.name)
            written = hit[1].declared_type if hit else arg.name
        return written, resolve_type_in(symtab, m, written)
    return "?", UNKNOWN


def collect_service_registry(units: Sequence[SourceUnit], symtab: SymbolTable) -> ServiceRegistry:
    entries: Dict[str, str] = {}
    provenance: Dict[str, str] = {}
    for unit in sorted(units, key=lambda u: u.path):
        for m in _bodied(unit):
            for s in iter_stmts(m.body):
                for call in calls_in_stmt(s):
                    if call.name != "addService" or len(call.args) < 2:
                        continue
                    if not isinstance(call.args[0], StrLit):
                        continue
                    if not _is_service_manager(call.receiver, m, unit.language):
                        continue
                    ident = call.args[0].value
                    written, cls = _registered_class(call.args[1], m, symtab)
                    if cls is UNKNOWN:
                        raise UnresolvedServiceClass(ident, written)
                    if ident in entries and entries[ident] != cls:
                        raise ConflictingRegistration(ident, entries[ident], cls)
                    if ident not in entries:
                        entries[ident] = cls
                        provenance[ident] = f"{unit.path}:{s.line}"
    return ServiceRegistry(dict(sorted(entries.items())), dict(sorted(provenance.items())))


# -- AIDL --------------------------------------------------------------------


def calls_transact(m: MethodDecl) -> bool:
    return any(c.name == "transact" for c in calls_in_body(m.body))


def _has_transacting_class(t: TypeDecl) -> bool:
    for inner in t.nested:
        for sub in inner.walk():
            if any(calls_transact(m) for m in sub.methods if m.body is not None):
                return True
    return False


def remote_interfaces(units: Sequence[SourceUnit]) -> List[Tuple[SourceUnit, TypeDecl]]:
    """JAVA interfaces ``I<X>`` that nest a proxy class calling ``transact``."""
    found = []
    for unit in units:
        if unit.language is not Language.JAVA:
            continue
        for t in unit.all_types():
            if t.kind is TypeKind.INTERFACE and _REMOTE_INTERFACE.match(t.name) and _has_transacting_class(t):
                found.append((unit, t))
    return sorted(found, key=lambda p: p[1].fqn)


def _dispatched_calls(m: MethodDecl) -> List[Call]:
    return [
        c for c in calls_in_body(m.body)
        if c.receiver is None or (isinstance(c.receiver, Ident) and c.receiver.name == "this")
    ]


def _dispatch_index(units: Sequence[SourceUnit]) -> Dict[str, Set[str]]:
    """Unit path -> names of methods called from an ``onTransact`` in that unit."""
    index: Dict[str, Set[str]] = {}
    for unit in units:
        for m in _bodied(unit):
            if m.name == "onTransact":
                index.setdefault(unit.path, set()).update(c.name for c in _dispatched_calls(m))
    return index


def _literal_flow(e, env: Dict[str, str]) -> Optional[str]:
    if isinstance(e, Ident):
        return env.get(e.name)
    if isinstance(e, Call):
        if e.name in SERVICE_LOOKUPS and e.args and isinstance(e.args[0], StrLit):
            return e.args[0].value
        if e.name in INTERFACE_CASTS and e.args:
            return _literal_flow(e.args[0], env)
    return None


def _remote_base(written: Optional[str]) -> Optional[str]:
    if not written:
        return None
    simple = written.rpartition(".")[2]
    return simple[1:] if _REMOTE_INTERFACE.match(simple) else None


def _cast_base(e) -> Optional[str]:
    """``IFoo.Stub.asInterface(..)`` -> ``Foo``."""
    if isinstance(e, Call) and e.name in INTERFACE_CASTS and e.receiver is not None:
        recv = dotted(e.receiver)
        if recv and recv.endswith(".Stub"):
            return _remote_base(recv[: -len(".Stub")])
    return None


def java_service_flows(units: Sequence[SourceUnit], symtab: SymbolTable) -> Dict[str, Set[str]]:
    """Interface base name X -> service identifiers whose lookup reaches an I<X> value."""
    flows: Dict[str, Set[str]] = {}
    for unit in units:
        if unit.language is not Language.JAVA:
            continue
        for m in _bodied(unit):
            env: Dict[str, str] = {}
            locals_ = local_types(m)
            for s in iter_stmts(m.body):
                if isinstance(s, VarDecl) and s.init is not None:
                    target, written, value = s.name, s.declared_type, s.init
                elif isinstance(s, Assign):
                    value = s.value
                    target = s.target.name if isinstance(s.target, Ident) else None
                    name = target or (s.target.field if isinstance(s.target, FieldAccess) else None)
                    written = locals_.get(name) if name else None
                    if written is None and name:
                        hit = find_field(symtab, m.owner, name)
                        written = hit[1].declared_type if hit else None
                elif isinstance(s, Return) and s.value is not None:
                    target, written, value = None, m.return_type, s.value
                else:
                    continue
                lit = _literal_flow(value, env)
                if lit is None:
                    continue
                if target is not None:
                    env[target] = lit
                base = _remote_base(written) or _cast_base(value)
                if base:
                    flows.setdefault(base, set()).add(lit)
    return flows


def _family_names(symtab: SymbolTable, fqn: str) -> Set[str]:
    return {t.rpartition(".")[2] for t in [fqn] + symtab.ancestors(fqn)}


def match_aidl_pairs(
    units: Sequence[SourceUnit],
    symtab: SymbolTable,
    registry: ServiceRegistry,
    diagnostics: Optional[DiagnosticSink] = None,
) -> List[EntryPointPair]:
    sink = diagnostics if diagnostics is not None else DiagnosticSink()
    units = sorted(units, key=lambda u: u.path)
    dispatch = _dispatch_index(units)
    flows = java_service_flows(units, symtab)
    pairs: List[EntryPointPair] = []

    def via_dispatcher(owner: str, name: str, base: str) -> bool:
        family = [owner] + symtab.ancestors(owner)
        if not _family_names(symtab, owner) & {base, "Bn" + base, "I" + base}:
            return False
        return any(name in dispatch.get(symtab.type_units[t].path, ()) for t in family if t in symtab.type_units)

    def via_registry(owner: str, name: str, arity: int, base: str) -> bool:
        for ident in flows.get(base, ()):
            target = registry.get(ident)
            if target is UNKNOWN:
                continue
            impl = symtab.find_in_hierarchy(target, name, arity)
            if impl is not UNKNOWN and impl.owner == owner:
                return True
        return False

    for unit, iface in remote_interfaces(units):
        base = iface.name[1:]
        for m in iface.methods:
            java_ref = MethodRef.of(m)
            candidates: List[MethodRef] = []
            for c in symtab.methods_named(m.name, m.arity):
                if c.body is None or c.owner is None or calls_transact(c):
                    continue
                ref = MethodRef.of(c)
                lang = symtab.language_of(ref)
                if lang is Language.CPP:
                    if via_dispatcher(c.owner, c.name, base) or via_registry(c.owner, c.name, c.arity, base):
                        candidates.append(ref)
                elif lang is Language.JAVA:
                    nested_in_iface = c.owner.startswith(iface.fqn + ".")
                    if not nested_in_iface and symtab.is_subtype(c.owner, iface.fqn):
                        candidates.append(ref)
            key = (iface.name, m.name, str(m.arity))
            if not candidates:
                sink.add(unmatched("AIDL", "JAVA", str(java_ref), unit.path, m.line))
                continue
            if len(candidates) > 1:
                sink.add(Diagnostic(
                    unit.path, m.line, "AMBIGUOUS",
                    f"AIDL {java_ref} -> {', '.join(str(c) for c in candidates)}",
                ))
            for ref in candidates:
                inner = symtab.language_of(ref) is Language.JAVA
                k = key + (ref.owner,) if len(candidates) > 1 else key
                pairs.append(EntryPointPair(PairKind.AIDL, java_ref, ref, k, inner))

    # native dispatchers whose targets never met a Java remote method
    for unit in units:
        if unit.language is not Language.CPP:
            continue
        for m in _bodied(unit):
            if m.name != "onTransact" or m.owner is None:
                continue
            served = {m.owner} | set(symtab.descendants(m.owner))
            for s in iter_stmts(m.body):
                for c in calls_in_stmt(s):
                    if c not in _dispatched_calls(m):
                        continue
                    declared = symtab.find_in_hierarchy(m.owner, c.name, len(c.args))
                    if declared is UNKNOWN:
                        continue  # a helper, not a remote method
                    if any(p.native_method.name == c.name and p.native_method.owner in served for p in pairs):
                        continue
                    # native-to-native binder calls are resolved later by dispatch
                    if any(
                        (impl := symtab.lookup(d, c.name, len(c.args))) is not UNKNOWN
                        and impl.body is not None and not calls_transact(impl)
                        for d in served
                    ):
                        continue
                    ref = MethodRef(declared.owner, c.name, len(c.args))
                    sink.add(unmatched("AIDL", "NATIVE", str(ref), unit.path, s.line))
    return sorted(pairs, key=lambda p: p.sort_key)


# -- JNI ---------------------------------------------------------------------


_PRIMITIVES = frozenset("ZBCSIJFD")


def jni_arity(signature: str) -> int:
    """Number of top-level parameter descriptors in a JNI method signature."""
    if not signature.startswith("(") or ")" not in signature:
        raise ValueError(f"malformed JNI signature {signature!r}")
    params = signature[1 : signature.index(")")]
    count, i = 0, 0
    while i < len(params):
        while i < len(params) and params[i] == "[":
            i += 1
        if i >= len(params):
            raise ValueError(f"dangling array descriptor in {signature!r}")
        c = params[i]
        if c == "L":
            end = params.find(";", i)
            if end < 0:
                raise ValueError(f"unterminated object descriptor in {signature!r}")
            i = end + 1
        elif c in _PRIMITIVES:
            i += 1
        else:
            raise ValueError(f"unknown descriptor {c!r} in {signature!r}")
        count += 1
    return count


@dataclass(frozen=True)
class JniRegistration:
    class_path: str
    entries: Tuple[JniEntry, ...]
    registering_function: str
    path: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)

    @property
    def java_class(self) -> str:
        return self.class_path.replace("/", ".").replace("$", ".")


def find_jni_registrations(
    units: Sequence[SourceUnit], diagnostics: Optional[DiagnosticSink] = None
) -> List[JniRegistration]:
    sink = diagnostics if diagnostics is not None else DiagnosticSink()
    found: List[JniRegistration] = []
    for unit in sorted(units, key=lambda u: u.path):
        if unit.language is not Language.CPP:
            continue
        tables = {g.name: g for g in unit.globals if isinstance(g, JniTable)}
        paths = {g.name: g.value for g in unit.globals if isinstance(g, ClassPathConst)}
        for m in _bodied(unit):
            for s in iter_stmts(m.body):
                for call in calls_in_stmt(s):
                    if call.name not in JNI_REGISTER_FUNCTIONS:
                        continue
                    table = next((tables[a.name] for a in call.args if isinstance(a, Ident) and a.name in tables), None)
                    class_path = next(
                        (paths[a.name] if isinstance(a, Ident) else a.value
                         for a in call.args
                         if (isinstance(a, Ident) and a.name in paths) or isinstance(a, StrLit)),
                        None,
                    )
                    if table is None or class_path is None:
                        what = "table" if table is None else "class path"
                        sink.add(Diagnostic(unit.path, s.line, "UNRESOLVED", f"JNI {call.name} {what}"))
                        continue
                    reg = JniRegistration(class_path, table.entries, m.name, unit.path, s.line)
                    if reg not in found:
                        found.append(reg)
    return found


def _native_function(symtab: SymbolTable, name: str, prefer_path: str) -> Optional[MethodRef]:
    hits = [m for m in symtab.iter_methods() if m.owner is None and m.name == name and m.body is not None]
    local = [m for m in hits if symtab.unit_of(MethodRef.of(m)).path == prefer_path]
    chosen = local or hits
    return MethodRef.of(chosen[0]) if len(chosen) == 1 else None


def match_jni_pairs(
    units: Sequence[SourceUnit], symtab: SymbolTable, diagnostics: Optional[DiagnosticSink] = None
) -> List[EntryPointPair]:
    sink = diagnostics if diagnostics is not None else DiagnosticSink()
    pairs: Dict[Tuple[str, ...], EntryPointPair] = {}
    for reg in find_jni_registrations(units, sink):
        for entry in reg.entries:
            try:
                arity = jni_arity(entry.signature)
            except ValueError as e:
                sink.add(Diagnostic(reg.path, reg.line, "MALFORMED", str(e)))
                continue
            java_ref = MethodRef(reg.java_class, entry.java_name, arity)
            native_ref = _native_function(symtab, entry.native_function, reg.path)
            if symtab.method(java_ref) is UNKNOWN or symtab.language_of(java_ref) is not Language.JAVA:
                sink.add(unmatched("JNI", "JAVA", str(java_ref), reg.path, reg.line))
                continue
            if native_ref is None:
                sink.add(unmatched("JNI", "NATIVE", entry.native_function, reg.path, reg.line))
                continue
            key = (reg.class_path, entry.java_name, entry.signature)
            pairs.setdefault(key, EntryPointPair(PairKind.JNI, java_ref, native_ref, key))
    return [pairs[k] for k in sorted(pairs)]


@dataclass(frozen=True)
class Linkage:
    registry: ServiceRegistry
    pairs: Tuple[EntryPointPair, ...]
    diagnostics: Tuple[Diagnostic, ...]

    def by_kind(self, kind: PairKind) -> List[EntryPointPair]:
        return [p for p in self.pairs if p.kind is kind]


def link(units: Sequence[SourceUnit], symtab: SymbolTable) -> Linkage:
    sink = DiagnosticSink()
    registry = collect_service_registry(units, symtab)
    pairs = match_aidl_pairs(units, symtab, registry, sink) + match_jni_pairs(units, symtab, sink)
    return Linkage(registry, tuple(sorted(pairs, key=lambda p: p.sort_key)), tuple(sink.sorted()))
