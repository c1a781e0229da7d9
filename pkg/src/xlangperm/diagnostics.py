from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List


@dataclass(frozen=True, order=True)
class Diagnostic:
    """One non-fatal analysis remark, rendered as ``CODE message path:line``."""

    path: str
    line: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} {self.message} {self.path}:{self.line}"


def unmatched(kind: str, side: str, ref: str, path: str, line: int) -> Diagnostic:
    return Diagnostic(path, line, "UNMATCHED", f"{kind} {side} {ref}")


@dataclass
class DiagnosticSink:
    items: List[Diagnostic] = field(default_factory=list)

    def add(self, d: Diagnostic) -> None:
        if d not in self.items:
            self.items.append(d)

    def extend(self, ds: Iterable[Diagnostic]) -> None:
        for d in ds:
            self.add(d)

    def sorted(self) -> List[Diagnostic]:
        return sorted(self.items)

    def __len__(self) -> int:
        return len(self.items)
