"""API protection maps: per-API conditions collected along CFG paths.

For every API node, each maximal acyclic path contributes the conjunction of
the proceed-conditions of the CHECK nodes it crosses. Paths crossing no check
contribute nothing; the API's condition is the disjunction over the rest.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

from .cfg import CrossCfg, NodeRole
from .conditions import TRUE, And, Condition, Or, from_json, normalize, to_json
from .frontend import Language, MethodRef

DEFAULT_PATH_BUDGET = 10_000


class Origin(str, enum.Enum):
    NATIVE = "NATIVE"
    JAVA = "JAVA"
    MIXED = "MIXED"


@dataclass(frozen=True)
class PathRow:
    nodes: Tuple[int, ...]
    condition: Condition


@dataclass(frozen=True)
class ProtectionEntry:
    api: MethodRef
    condition: Condition
    origin: Origin
    approximate: bool = False
    witness_paths: Tuple[PathRow, ...] = ()


@dataclass(frozen=True)
class ProtectionMap:
    entries: Tuple[ProtectionEntry, ...] = ()
    corpus_id: str = ""

    def __post_init__(self):
        ordered = tuple(sorted(self.entries, key=lambda e: str(e.api)))
        apis = [str(e.api) for e in ordered]
        if len(set(apis)) != len(apis):
            raise ValueError("duplicate api in protection map")
        object.__setattr__(self, "entries", ordered)

    def get(self, api: MethodRef) -> Optional[Condition]:
        for e in self.entries:
            if e.api == api:
                return e.condition
        return None

    def apis(self) -> FrozenSet[MethodRef]:
        return frozenset(e.api for e in self.entries)

    def without(self, *apis: MethodRef) -> "ProtectionMap":
        drop = set(apis)
        return ProtectionMap(tuple(e for e in self.entries if e.api not in drop), self.corpus_id)

    def to_json(self, per_path: bool = False) -> Dict:
        rows = []
        for e in self.entries:
            row = {"api": str(e.api), "origin": e.origin.value, "condition": to_json(e.condition)}
            if e.approximate:
                row["approximate"] = True
            if per_path:
                row["paths"] = [{"nodes": list(p.nodes), "condition": to_json(p.condition)} for p in e.witness_paths]
            rows.append(row)
        return {"corpus_id": self.corpus_id, "entries": rows}

    @classmethod
    def from_json(cls, data: Mapping) -> "ProtectionMap":
        entries = []
        for row in data.get("entries", ()):
            entries.append(ProtectionEntry(
                MethodRef.parse(row["api"]),
                normalize(from_json(row["condition"])),
                Origin(row.get("origin", "NATIVE")),
                bool(row.get("approximate", False)),
            ))
        return cls(tuple(entries), data.get("corpus_id", ""))


# -- path enumeration --------------------------------------------------------


def maximal_paths(g: CrossCfg, start: int, budget: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Every maximal simple path from ``start``, in a deterministic order.

    A path is maximal when each successor of its last node already lies on
    it. Raises OverflowError once more than ``budget`` paths are produced.
    """
    path = [start]
    on_path = {start}
    stack = [iter(g.successors(start))]
    extended = [False]
    count = 0
    while stack:
        nxt = next((s for s in stack[-1] if s not in on_path), None)
        if nxt is not None:
            extended[-1] = True
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(g.successors(nxt)))
            extended.append(False)
            continue
        if not extended[-1]:
            count += 1
            if budget is not None and count > budget:
                raise OverflowError(count)
            yield tuple(path)
        stack.pop()
        extended.pop()
        on_path.discard(path.pop())


def reachable(g: CrossCfg, start: int) -> Set[int]:
    seen = {start}
    work = [start]
    while work:
        for s in g.successors(work.pop()):
            if s not in seen:
                seen.add(s)
                work.append(s)
    return seen


def _origin(g: CrossCfg, checks: Set[int]) -> Origin:
    langs = {g.node(c).language for c in checks}
    if langs == {Language.CPP}:
        return Origin.NATIVE
    if langs == {Language.JAVA}:
        return Origin.JAVA
    return Origin.MIXED


def _conj(g: CrossCfg, checks) -> Condition:
    return normalize(And(tuple(g.node(c).condition for c in sorted(checks))))


def entry_for(g: CrossCfg, api_node: int, budget: int = DEFAULT_PATH_BUDGET, per_path: bool = False) -> Optional[ProtectionEntry]:
    api = g.node(api_node).method
    check_sets: List[FrozenSet[int]] = []
    rows: List[PathRow] = []
    try:
        for p in maximal_paths(g, api_node, budget):
            checks = frozenset(n for n in p if g.node(n).role is NodeRole.CHECK)
            if not checks:
                continue
            if checks not in check_sets:
                check_sets.append(checks)
            if per_path:
                rows.append(PathRow(p, _conj(g, checks)))
        approximate = False
        condition = normalize(Or(tuple(_conj(g, cs) for cs in check_sets)))
        contributing = set().union(*check_sets) if check_sets else set()
    except OverflowError:
        # too many paths: any reachable check may be the one that applies
        contributing = {n for n in reachable(g, api_node) if g.node(n).role is NodeRole.CHECK}
        condition = normalize(Or(tuple(g.node(n).condition for n in sorted(contributing))))
        approximate, rows = True, []
    if not contributing or condition == TRUE:
        return None
    return ProtectionEntry(api, condition, _origin(g, contributing), approximate, tuple(rows))


def extract_mappings(
    g: CrossCfg,
    corpus_id: str = "",
    path_budget: int = DEFAULT_PATH_BUDGET,
    per_path: bool = False,
) -> ProtectionMap:
    entries = []
    for n in g.api_nodes():
        e = entry_for(g, n.id, path_budget, per_path)
        if e is not None:
            entries.append(e)
    return ProtectionMap(tuple(entries), corpus_id)
