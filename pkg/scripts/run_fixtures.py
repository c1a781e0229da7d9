"""Extract a map from the fixture corpus and scan every fixture app.

    python scripts/run_fixtures.py --out /tmp/xlangperm-run
"""
import argparse
import json
import time
from dataclasses import dataclass
from pathlib import Path

from xlangperm.appscan import load_app, load_permission_db, scan_app
from xlangperm.cli import map_bytes
from xlangperm.conditions import to_infix
from xlangperm.pipeline import extract
from xlangperm.report import atomic_write, canonical_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@dataclass(frozen=True)
class FixtureRun:
    corpus: str = "full_corpus"
    out: Path = Path("fixture-run")
    permdb: Path = FIXTURES / "permdb.json"


def run(cfg: FixtureRun) -> None:
    parts = json.loads((FIXTURES / "corpora.json").read_text())[cfg.corpus]
    t0 = time.perf_counter()
    ex = extract([FIXTURES / "parts" / p for p in parts])
    elapsed = time.perf_counter() - t0
    print(f"corpus {cfg.corpus}: {len(ex.corpus.units)} files, {len(ex.linkage.pairs)} pairs, "
          f"{len(ex.cfg.nodes)} nodes, {len(ex.map.entries)} entries in {elapsed:.3f}s")
    for e in ex.map.entries:
        print(f"  {e.api}  ->  {to_infix(e.condition)}")
    atomic_write(cfg.out / "map.json", map_bytes(ex.map))

    permdb = load_permission_db(cfg.permdb)
    for app_dir in sorted(p for p in (FIXTURES / "apps").iterdir() if p.is_dir()):
        report = scan_app(load_app(app_dir), ex.map, permdb)
        atomic_write(cfg.out / f"{report.app}.json", canonical_json(report.to_json()))
        print(f"app {report.app}: {len(report.findings)} finding(s)")
        for f in report.findings:
            print(f"  {f.kind.value} {f.subject} {list(f.detail)}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--corpus", default=FixtureRun.corpus)
    p.add_argument("--out", type=Path, default=FixtureRun.out)
    args = p.parse_args()
    run(FixtureRun(args.corpus, args.out))


if __name__ == "__main__":
    main()
