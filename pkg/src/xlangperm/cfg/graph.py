"""Cross-language control-flow graph.

Each corpus method contributes one ENTRY node plus one node per statement
(numbered by pre-order position, the ``site``). FALLTHROUGH edges follow
statement order and both arms of every ``if``; ``return`` and ``throw`` end a
method. A call adds a CALL edge from its statement to the callee's ENTRY with
no edge back, so a path that enters a callee stays there. Linked entry-point
pairs add an XLANG edge from the Java endpoint to the native endpoint.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from ..conditions import Condition
from ..diagnostics import Diagnostic, DiagnosticSink
from ..frontend import Language, MethodDecl, MethodRef, SymbolTable, Visibility
from ..frontend.ast import Call, If, New, Return, Stmt, Throw, calls_in_stmt, iter_exprs, stmt_exprs
from ..frontend.symbols import UNKNOWN
from ..guards import GuardConfig, NegativeAtomRequired, extract_guard_condition, recognize_check
from ..linkage import EntryPointPair, ServiceRegistry
from .resolve import CallResolver, is_this


class NodeRole(str, enum.Enum):
    ENTRY = "ENTRY"
    CALL = "CALL"
    CHECK = "CHECK"
    RETURN = "RETURN"
    STMT = "STMT"


class EdgeKind(str, enum.Enum):
    CALL = "CALL"
    FALLTHROUGH = "FALLTHROUGH"
    XLANG = "XLANG"


@dataclass(frozen=True, order=True)
class NodeKey:
    method: MethodRef
    site: Optional[int] = None

    @property
    def sort_key(self):
        return (self.method.sort_key, -1 if self.site is None else self.site)


@dataclass(frozen=True)
class NodeInfo:
    language: Language
    role: NodeRole
    condition: Optional[Condition] = None
    unresolved: Tuple[str, ...] = ()
    line: int = 0


@dataclass(frozen=True)
class CfgNode:
    id: int
    method: MethodRef
    site: Optional[int]
    language: Language
    role: NodeRole
    condition: Optional[Condition] = None
    unresolved: Tuple[str, ...] = ()
    api_candidate: bool = False
    line: int = 0


@dataclass(frozen=True, order=True)
class CfgEdge:
    src: int
    dst: int
    kind: EdgeKind
    aidl: bool = False


@dataclass(frozen=True)
class CfgConfig:
    api_package_prefixes: Tuple[str, ...] = ("android.",)
    guards: GuardConfig = GuardConfig()


_Edge = Tuple[NodeKey, NodeKey, EdgeKind, bool]


@dataclass
class Fragment:
    """Nodes and edges keyed by (method, site) before ids are assigned."""

    nodes: Dict[NodeKey, NodeInfo] = field(default_factory=dict)
    edges: Set[_Edge] = field(default_factory=set)
    api_candidates: Set[MethodRef] = field(default_factory=set)

    def merge(self, other: "Fragment") -> None:
        self.nodes.update(other.nodes)
        self.edges |= other.edges
        self.api_candidates |= other.api_candidates

    def methods(self) -> Set[MethodRef]:
        return {k.method for k in self.nodes}

    def check_nodes(self) -> List[NodeKey]:
        return sorted((k for k, v in self.nodes.items() if v.role is NodeRole.CHECK), key=lambda k: k.sort_key)


def contains_security_check(fragment: Fragment) -> bool:
    return any(info.role is NodeRole.CHECK for info in fragment.nodes.values())


# -- per-method skeleton -----------------------------------------------------


def _size(s: Stmt) -> int:
    if isinstance(s, If):
        return 1 + sum(map(_size, s.then)) + sum(map(_size, s.orelse))
    return 1


def flat_statements(body) -> List[Stmt]:
    """Statements in site order (pre-order, ``then`` before ``else``)."""
    out: List[Stmt] = []

    def walk(block):
        for s in block:
            out.append(s)
            if isinstance(s, If):
                walk(s.then)
                walk(s.orelse)

    walk(body or ())
    return out


def fallthrough_edges(body) -> List[Tuple[Optional[int], int]]:
    """Intra-method successor pairs by site; ``None`` stands for ENTRY."""
    edges: List[Tuple[Optional[int], int]] = []

    def first(block, start: int, cont: Optional[int]) -> Optional[int]:
        return start if block else cont

    def link(block, start: int, cont: Optional[int]) -> None:
        sites = []
        pos = start
        for s in block:
            sites.append(pos)
            pos += _size(s)
        for i, s in enumerate(block):
            here = sites[i]
            nxt = sites[i + 1] if i + 1 < len(block) else cont
            if isinstance(s, (Return, Throw)):
                continue
            if isinstance(s, If):
                then_start = here + 1
                else_start = then_start + sum(map(_size, s.then))
                for target in (first(s.then, then_start, nxt), first(s.orelse, else_start, nxt)):
                    if target is not None and (here, target) not in edges:
                        edges.append((here, target))
                link(s.then, then_start, nxt)
                link(s.orelse, else_start, nxt)
            elif nxt is not None:
                edges.append((here, nxt))

    body = body or ()
    if body:
        edges.append((None, 0))
    link(body, 0, None)
    return edges


# -- builder -----------------------------------------------------------------


def _call_label(c: Call) -> str:
    return f"{c.name}/{len(c.args)}"


class CfgBuilder:
    def __init__(
        self,
        symtab: SymbolTable,
        registry: ServiceRegistry,
        config: CfgConfig = CfgConfig(),
        diagnostics: Optional[DiagnosticSink] = None,
    ):
        self.symtab = symtab
        self.registry = registry
        self.config = config
        self.sink = diagnostics if diagnostics is not None else DiagnosticSink()
        self.resolver = CallResolver(symtab, registry, self.sink)
        self._callers: Optional[Dict[MethodRef, Set[Tuple[MethodRef, int]]]] = None
        self._skeletons: Dict[MethodRef, Fragment] = {}

    # -- statements ---------------------------------------------------------------

    def _path(self, ref: MethodRef) -> str:
        unit = self.symtab.unit_of(ref)
        return unit.path if unit is not None else "?"

    def _check(self, s: If, m: MethodDecl, lang: Language) -> Optional[Condition]:
        ref = MethodRef.of(m)
        guard = recognize_check(s, m, self.config.guards, lang, self.sink, self._path(ref))
        if guard is None:
            return None
        try:
            return extract_guard_condition(guard)
        except NegativeAtomRequired as e:
            self.sink.add(Diagnostic(self._path(ref), s.line, "NEGATIVE", str(e)))
            return None

    def skeleton(self, ref: MethodRef) -> Fragment:
        """ENTRY plus statement nodes and FALLTHROUGH edges of one method."""
        if ref in self._skeletons:
            return self._skeletons[ref]
        m = self.symtab.method(ref)
        lang = self.symtab.language_of(ref)
        frag = Fragment()
        entry = NodeKey(ref)
        frag.nodes[entry] = NodeInfo(lang, NodeRole.ENTRY, line=m.line)
        for site, s in enumerate(flat_statements(m.body)):
            condition = self._check(s, m, lang) if isinstance(s, If) else None
            has_calls = any(isinstance(e, (Call, New)) for x in stmt_exprs(s) for e in iter_exprs(x))
            if condition is not None:
                role = NodeRole.CHECK
            elif has_calls:
                role = NodeRole.CALL
            elif isinstance(s, (Return, Throw)):
                role = NodeRole.RETURN
            else:
                role = NodeRole.STMT
            frag.nodes[NodeKey(ref, site)] = NodeInfo(lang, role, condition, line=s.line)
        for a, b in fallthrough_edges(m.body):
            # a denied trace never reaches the API's effect, so the denial
            # branch (always the block right after the guard) is not entered
            if a is not None and b == a + 1 and frag.nodes[NodeKey(ref, a)].role is NodeRole.CHECK:
                continue
            frag.edges.add((NodeKey(ref, a), NodeKey(ref, b), EdgeKind.FALLTHROUGH, False))
        self._skeletons[ref] = frag
        return frag

    def _stmt_targets(self, s: Stmt, m: MethodDecl, info: NodeInfo) -> Tuple[List[MethodRef], List[str]]:
        targets: List[MethodRef] = []
        unresolved: List[str] = []
        if info.role is NodeRole.CHECK:
            return targets, unresolved  # the guard's own calls are checks, not callees
        for x in stmt_exprs(s):
            for e in iter_exprs(x):
                if isinstance(e, Call):
                    res = self.resolver.resolve_call(e, m)
                    if res.targets:
                        targets.extend(t for t in res.targets if t not in targets)
                    else:
                        unresolved.append(_call_label(e))
                elif isinstance(e, New):
                    ctor = self.resolver.resolve_new(e, m)
                    if ctor is not None and ctor not in targets:
                        targets.append(ctor)
        return targets, unresolved

    # -- forward ------------------------------------------------------------------

    def build_forward_fragment(self, entry: MethodRef) -> Fragment:
        """Forward interprocedural expansion from ``entry`` (a service endpoint)."""
        frag = Fragment()
        seen: Set[MethodRef] = set()
        work = [entry]
        while work:
            ref = work.pop()
            if ref in seen:
                continue
            seen.add(ref)
            m = self.symtab.method(ref)
            if m is UNKNOWN:
                continue
            skel = self.skeleton(ref)
            frag.merge(skel)
            for site, s in enumerate(flat_statements(m.body)):
                key = NodeKey(ref, site)
                info = frag.nodes[key]
                targets, unresolved = self._stmt_targets(s, m, info)
                if unresolved:
                    frag.nodes[key] = NodeInfo(info.language, info.role, info.condition, tuple(unresolved), info.line)
                for t in targets:
                    if self.symtab.method(t) is UNKNOWN:
                        continue
                    frag.edges.add((key, NodeKey(t), EdgeKind.CALL, False))
                    if t not in seen:
                        work.append(t)
        return frag

    build_native_fragment = build_forward_fragment

    # -- backward (Java) -----------------------------------------------------------

    def _java_targets(self, s: Stmt, m: MethodDecl) -> Set[MethodRef]:
        """Class-hierarchy match of every call in ``s`` against corpus Java methods."""
        out: Set[MethodRef] = set()
        for x in stmt_exprs(s):
            for e in iter_exprs(x):
                if isinstance(e, New):
                    ctor = self.resolver.resolve_new(e, m)
                    if ctor is not None:
                        out.add(ctor)
                if not isinstance(e, Call):
                    continue
                named = [
                    c for c in self.symtab.methods_named(e.name, len(e.args))
                    if c.owner is not None and self.symtab.language_of(MethodRef.of(c)) is Language.JAVA
                ]
                if not named:
                    continue
                receivers = self._java_receivers(e, m)
                if not receivers:
                    if len(named) == 1:
                        out.add(MethodRef.of(named[0]))
                    continue
                for c in named:
                    if any(self.symtab.is_subtype(r, c.owner) or self.symtab.is_subtype(c.owner, r) for r in receivers):
                        out.add(MethodRef.of(c))
        return out

    def _java_receivers(self, call: Call, m: MethodDecl) -> List[str]:
        if call.receiver is None or is_this(call.receiver):
            scopes, scope = [], m.owner
            while scope and scope in self.symtab.types:
                scopes.append(scope)
                scope = scope.rpartition(".")[0]
            return scopes
        static = self.resolver.static_type(call.receiver, m)
        if static is not UNKNOWN:
            return [static]
        declared = self.resolver.declared_type(call.receiver, m)
        return [declared] if declared is not UNKNOWN else []

    def java_callers(self) -> Dict[MethodRef, Set[Tuple[MethodRef, int]]]:
        """Callee -> {(caller, site)} over all bodied Java methods."""
        if self._callers is not None:
            return self._callers
        callers: Dict[MethodRef, Set[Tuple[MethodRef, int]]] = {}
        for m in self.symtab.iter_methods():
            ref = MethodRef.of(m)
            if m.body is None or self.symtab.language_of(ref) is not Language.JAVA:
                continue
            if m.name == "onTransact":
                continue  # binder dispatch is modelled by the entry-point pairs
            for site, s in enumerate(flat_statements(m.body)):
                for t in self._java_targets(s, m):
                    callers.setdefault(t, set()).add((ref, site))
        self._callers = callers
        return callers

    def is_api(self, ref: MethodRef) -> bool:
        m = self.symtab.method(ref)
        return (
            m is not UNKNOWN
            and m.visibility is Visibility.PUBLIC
            and self.symtab.language_of(ref) is Language.JAVA
            and ref.owner is not None
            and any(ref.owner.startswith(p) for p in self.config.api_package_prefixes)
        )

    def build_java_fragment_backward(self, entry: MethodRef) -> Fragment:
        callers = self.java_callers()
        closure: Set[MethodRef] = {entry}
        work = [entry]
        while work:
            ref = work.pop()
            for caller, _ in callers.get(ref, ()):
                if caller not in closure:
                    closure.add(caller)
                    work.append(caller)
        frag = Fragment()
        for ref in closure:
            frag.merge(self.skeleton(ref))
        for callee in closure:
            for caller, site in callers.get(callee, ()):
                frag.edges.add((NodeKey(caller, site), NodeKey(callee), EdgeKind.CALL, False))
        frag.api_candidates = {r for r in closure if not callers.get(r) and self.is_api(r)}
        return frag


# -- assembled graph ---------------------------------------------------------


@dataclass(frozen=True)
class CrossCfg:
    nodes: Tuple[CfgNode, ...] = ()
    edges: Tuple[CfgEdge, ...] = ()
    pair_index: Mapping[Tuple[int, int], EntryPointPair] = field(default_factory=dict)

    def __post_init__(self):
        succ: Dict[int, List[int]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            if e.dst not in succ[e.src]:
                succ[e.src].append(e.dst)
        object.__setattr__(self, "_succ", {k: tuple(sorted(v)) for k, v in succ.items()})
        object.__setattr__(self, "_by_key", {(n.method, n.site): n for n in self.nodes})

    def successors(self, node_id: int) -> Tuple[int, ...]:
        return self._succ[node_id]

    def node(self, node_id: int) -> CfgNode:
        return self.nodes[node_id]

    def find(self, method: MethodRef, site: Optional[int] = None) -> Optional[CfgNode]:
        return self._by_key.get((method, site))

    def api_nodes(self) -> List[CfgNode]:
        return [n for n in self.nodes if n.api_candidate]

    def check_nodes(self) -> List[CfgNode]:
        return [n for n in self.nodes if n.role is NodeRole.CHECK]

    def xlang_edges(self) -> List[CfgEdge]:
        return [e for e in self.edges if e.kind is EdgeKind.XLANG]

    def is_empty(self) -> bool:
        return not self.nodes


def freeze(frag: Fragment, links: Iterable[Tuple[NodeKey, NodeKey, EdgeKind, bool, EntryPointPair]] = ()) -> CrossCfg:
    """Assign deterministic ids (method, then site with ENTRY first) and freeze."""
    keys = sorted(frag.nodes, key=lambda k: k.sort_key)
    ids = {k: i for i, k in enumerate(keys)}
    nodes = tuple(
        CfgNode(
            ids[k], k.method, k.site, frag.nodes[k].language, frag.nodes[k].role,
            frag.nodes[k].condition, frag.nodes[k].unresolved,
            k.site is None and k.method in frag.api_candidates, frag.nodes[k].line,
        )
        for k in keys
    )
    edges = {CfgEdge(ids[a], ids[b], kind, aidl) for a, b, kind, aidl in frag.edges}
    pair_index = {}
    for a, b, kind, aidl, pair in links:
        edges.add(CfgEdge(ids[a], ids[b], kind, aidl))
        pair_index[(ids[a], ids[b])] = pair
    return CrossCfg(nodes, tuple(sorted(edges)), dict(sorted(pair_index.items())))


def build_cross_cfg(
    symtab: SymbolTable,
    pairs: Sequence[EntryPointPair],
    registry: ServiceRegistry,
    config: CfgConfig = CfgConfig(),
    diagnostics: Optional[DiagnosticSink] = None,
) -> CrossCfg:
    builder = CfgBuilder(symtab, registry, config, diagnostics)
    whole = Fragment()
    links = []
    for pair in sorted(pairs, key=lambda p: p.sort_key):
        native = builder.build_native_fragment(pair.native_method)
        if not contains_security_check(native):
            continue
        whole.merge(native)
        whole.merge(builder.build_java_fragment_backward(pair.java_method))
        kind = EdgeKind.CALL if pair.inner_language else EdgeKind.XLANG
        links.append((NodeKey(pair.java_method), NodeKey(pair.native_method), kind, pair.inner_language, pair))
    return freeze(whole, links)
