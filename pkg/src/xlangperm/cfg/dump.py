"""Plain-text dump of a CrossCfg: an edge list and a node table."""
from __future__ import annotations

from pathlib import Path
from typing import Tuple

from ..report import atomic_write
from .graph import CrossCfg

EDGES_FILE = "cfg.edges"
NODES_FILE = "cfg.nodes"


def dump_text(g: CrossCfg) -> Tuple[str, str]:
    """(edges, nodes): ``FROM_ID KIND TO_ID`` and ``ID LANG ROLE METHOD SITE`` lines."""
    edges = "".join(f"{e.src} {e.kind.value} {e.dst}\n" for e in g.edges)
    nodes = "".join(
        f"{n.id} {n.language.value} {n.role.value} {n.method} {'-' if n.site is None else n.site}\n"
        for n in g.nodes
    )
    return edges, nodes


def write_dump(g: CrossCfg, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    edges, nodes = dump_text(g)
    atomic_write(directory / EDGES_FILE, edges.encode("utf-8"))
    atomic_write(directory / NODES_FILE, nodes.encode("utf-8"))


def read_dump(directory: Path):
    """Parse a dump back into ({id: (lang, role, method, site)}, [(src, kind, dst)])."""
    directory = Path(directory)
    nodes = {}
    for line in (directory / NODES_FILE).read_text("utf-8").splitlines():
        nid, lang, role, method, site = line.split(" ")
        nodes[int(nid)] = (lang, role, method, None if site == "-" else int(site))
    edges = []
    for line in (directory / EDGES_FILE).read_text("utf-8").splitlines():
        src, kind, dst = line.split(" ")
        edges.append((int(src), kind, int(dst)))
    return nodes, edges
