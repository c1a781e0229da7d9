"""Loading a framework corpus from one or more directory trees."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from .frontend import ParseError, SourceUnit, SymbolTable, build_symbol_table, parse_source

JAVA_ROOT = "framework/java"
NATIVE_ROOT = "framework/native"

PathLike = Union[str, Path]


class CorpusError(Exception):
    """Corpus layout problem, e.g. the same relative path in two roots."""


@dataclass(frozen=True)
class Corpus:
    units: Tuple[SourceUnit, ...]
    symtab: SymbolTable
    corpus_id: str

    def unit(self, path: str) -> SourceUnit:
        for u in self.units:
            if u.path == path:
                return u
        raise KeyError(path)


def discover(roots: Sequence[PathLike]) -> List[Tuple[str, Path]]:
    """(corpus-relative path, file) for every dialect file under ``roots``.

    Several roots are overlaid into one corpus; a relative path present in
    more than one root is an error rather than a silent override.
    """
    found: Dict[str, Path] = {}
    for root in roots:
        root = Path(root)
        if not root.is_dir():
            raise FileNotFoundError(f"corpus directory not found: {root}")
        for sub, suffix in ((JAVA_ROOT, ".mjava"), (NATIVE_ROOT, ".mcpp")):
            base = root / sub
            if not base.is_dir():
                continue
            for f in base.rglob(f"*{suffix}"):
                if not f.is_file():
                    continue
                rel = f.relative_to(root).as_posix()
                if rel in found:
                    raise CorpusError(f"{rel} present in both {found[rel]} and {f}")
                found[rel] = f
    return sorted(found.items())


def corpus_id(files: Iterable[Tuple[str, bytes]]) -> str:
    h = hashlib.sha256()
    for rel, data in sorted(files):
        h.update(rel.encode("utf-8") + b"\0")
        h.update(len(data).to_bytes(8, "big"))
        h.update(data)
    return h.hexdigest()


def parse_files(files: Iterable[Tuple[str, str]]) -> Tuple[List[SourceUnit], List[ParseError]]:
    units, errors = [], []
    for rel, text in sorted(files):
        try:
            units.append(parse_source(text, rel))
        except ParseError as e:
            errors.append(e)
    return units, errors


class CorpusParseError(Exception):
    def __init__(self, errors: List[ParseError]):
        self.errors = errors
        super().__init__("\n".join(str(e) for e in errors))


def load_corpus(roots: Sequence[PathLike]) -> Corpus:
    raw = [(rel, f.read_bytes()) for rel, f in discover(roots)]
    units, errors = parse_files((rel, data.decode("utf-8")) for rel, data in raw)
    if errors:
        raise CorpusParseError(errors)
    return Corpus(tuple(units), build_symbol_table(units), corpus_id(raw))


def corpus_from_sources(sources: Dict[str, str]) -> Corpus:
    """In-memory corpus keyed by relative path; used by tests and generators."""
    units, errors = parse_files(sources.items())
    if errors:
        raise CorpusParseError(errors)
    raw = [(rel, text.encode("utf-8")) for rel, text in sources.items()]
    return Corpus(tuple(units), build_symbol_table(units), corpus_id(raw))
