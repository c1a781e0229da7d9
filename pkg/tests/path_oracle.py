"""Brute-force protection oracle over a synth.Program.

Builds its own statement graph from the program model with networkx,
enumerates every maximal simple path from each API, and evaluates guard
expressions directly under each atom valuation. Shares no code with the
parser, the CFG builder or the condition algebra.
"""
from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Tuple

import networkx as nx

from xlangperm.conditions import CheckAtom, evaluate
from xlangperm.synth import Branch, CallFn, Guard, Plain, Program, Ret, holds


def _block(g: nx.DiGraph, fn: str, stmts, prefix: Tuple, cont) -> Optional[Tuple]:
    nxt = cont
    for i in reversed(range(len(stmts))):
        s = stmts[i]
        node = (fn, prefix + (i,))
        g.add_node(node, guard=s.proceed if isinstance(s, Guard) else None)
        if isinstance(s, Guard) or isinstance(s, Plain):
            if nxt is not None:
                g.add_edge(node, nxt)
        elif isinstance(s, CallFn):
            g.add_edge(node, ("fn", s.callee))
            if nxt is not None:
                g.add_edge(node, nxt)
        elif isinstance(s, Branch):
            for k, sub in ((0, s.then), (1, s.orelse)):
                first = _block(g, fn, sub, prefix + (i, k), nxt)
                if first is not None:
                    g.add_edge(node, first)
        elif isinstance(s, Ret):
            pass
        nxt = node
    return nxt


def statement_graph(p: Program) -> nx.DiGraph:
    g = nx.DiGraph()
    for fn, body in p.functions.items():
        g.add_node(("fn", fn), guard=None)
        tail = (fn, "return")
        g.add_node(tail, guard=None)
        first = _block(g, fn, body, (), tail)
        g.add_edge(("fn", fn), first)
    for j, fn in p.natives.items():
        g.add_node(("jn", j), guard=None)
        g.add_edge(("jn", j), ("fn", fn))
    for api, calls in p.apis.items():
        entry = ("api", api)
        g.add_node(entry, guard=None)
        prev = entry
        for k, j in enumerate(calls):
            node = ("apistmt", api, k)
            g.add_node(node, guard=None)
            g.add_edge(prev, node)
            g.add_edge(node, ("jn", j))
            prev = node
    return g


def maximal_paths(g: nx.DiGraph, source) -> List[List]:
    targets = [n for n in g.nodes if n != source]
    paths = [
        p for p in nx.all_simple_paths(g, source, targets)
        if all(s in p for s in g.successors(p[-1]))
    ]
    if not list(g.successors(source)):
        paths.append([source])
    return paths


def checked_paths(g: nx.DiGraph, source) -> List[List]:
    return [p for p in maximal_paths(g, source) if any(g.nodes[n]["guard"] is not None for n in p)]


def check_atom(key) -> CheckAtom:
    if key[0] == "perm":
        return CheckAtom.permission(key[1])
    if key[0] == "pid":
        return CheckAtom.pid_self()
    return CheckAtom.uid_eq(key[1])


def valuations(p: Program):
    for bits in itertools.product((False, True), repeat=len(p.atoms)):
        yield dict(zip(p.atoms, bits))


def expected_table(p: Program, api: str) -> Optional[Tuple[bool, ...]]:
    """Allowed/denied per valuation, or None when no path meets a guard."""
    g = statement_graph(p)
    paths = checked_paths(g, ("api", api))
    if not paths:
        return None
    guards = [[g.nodes[n]["guard"] for n in path if g.nodes[n]["guard"] is not None] for path in paths]
    return tuple(
        any(all(holds(e, v) for e in gs) for gs in guards)
        for v in valuations(p)
    )


def condition_table(p: Program, condition) -> Tuple[bool, ...]:
    return tuple(
        evaluate(condition, {check_atom(k): b for k, b in v.items()})
        for v in valuations(p)
    )


def compare(p: Program, pmap) -> Dict[str, Tuple]:
    """Per-API (expected, actual) tables; an absent entry is None."""
    from xlangperm.frontend import MethodRef
    from xlangperm.synth import API_CLASS, JAVA_PACKAGE

    out = {}
    for api in sorted(p.apis):
        ref = MethodRef(f"{JAVA_PACKAGE}.{API_CLASS}", api, 1)
        cond = pmap.get(ref)
        out[api] = (expected_table(p, api), None if cond is None else condition_table(p, cond))
    return out


def sample_corpora(count: int, max_nodes: int = 50, max_atoms: int = 4, start_seed: int = 0):
    """First ``count`` seeded programs whose graph fits ``max_nodes`` and maps something.

    Yields (seed, program, extraction).
    """
    import random

    from xlangperm.corpus import corpus_from_sources
    from xlangperm.pipeline import extract_from_corpus
    from xlangperm.synth import random_program

    seed = start_seed
    found = 0
    while found < count:
        p = random_program(random.Random(seed), max_atoms)
        ex = extract_from_corpus(corpus_from_sources(p.sources()))
        if len(ex.cfg.nodes) <= max_nodes and ex.map.entries:
            found += 1
            yield seed, p, ex
        seed += 1
