"""Corpus to protection map in one call."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .cfg import CfgConfig, CrossCfg, build_cross_cfg
from .corpus import Corpus, PathLike, load_corpus
from .diagnostics import Diagnostic, DiagnosticSink
from .linkage import Linkage, link
from .mapping import DEFAULT_PATH_BUDGET, ProtectionMap, extract_mappings


@dataclass(frozen=True)
class Extraction:
    corpus: Corpus
    linkage: Linkage
    cfg: CrossCfg
    map: ProtectionMap
    diagnostics: Tuple[Diagnostic, ...]


def extract_from_corpus(
    corpus: Corpus,
    config: CfgConfig = CfgConfig(),
    path_budget: int = DEFAULT_PATH_BUDGET,
    per_path: bool = False,
) -> Extraction:
    linkage = link(corpus.units, corpus.symtab)
    sink = DiagnosticSink()
    sink.extend(linkage.diagnostics)
    g = build_cross_cfg(corpus.symtab, linkage.pairs, linkage.registry, config, sink)
    pmap = extract_mappings(g, corpus.corpus_id, path_budget, per_path)
    return Extraction(corpus, linkage, g, pmap, tuple(sink.sorted()))


def extract(roots: Sequence[PathLike], config: CfgConfig = CfgConfig(), path_budget: int = DEFAULT_PATH_BUDGET, per_path: bool = False) -> Extraction:
    return extract_from_corpus(load_corpus(roots), config, path_budget, per_path)
