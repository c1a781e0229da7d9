"""Compare extracted conditions with the brute-force path oracle over many random corpora.

    python scripts/oracle_sweep.py --seeds 500 --max-nodes 50
"""
import argparse
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import path_oracle  # noqa: E402
from xlangperm.corpus import corpus_from_sources  # noqa: E402
from xlangperm.pipeline import extract_from_corpus  # noqa: E402
from xlangperm.synth import random_program  # noqa: E402


@dataclass(frozen=True)
class Sweep:
    seeds: int = 300
    max_nodes: int = 50
    max_atoms: int = 4


def run(cfg: Sweep) -> int:
    compared = skipped = mismatches = entries = 0
    t0 = time.perf_counter()
    for seed in range(cfg.seeds):
        p = random_program(random.Random(seed), cfg.max_atoms)
        ex = extract_from_corpus(corpus_from_sources(p.sources()))
        if len(ex.cfg.nodes) > cfg.max_nodes:
            skipped += 1
            continue
        compared += 1
        entries += len(ex.map.entries)
        for api, (expected, actual) in path_oracle.compare(p, ex.map).items():
            if expected != actual:
                mismatches += 1
                print(f"seed {seed} {api}: expected {expected} got {actual}")
    elapsed = time.perf_counter() - t0
    print(f"compared {compared} corpora ({skipped} over {cfg.max_nodes} nodes), "
          f"{entries} entries, {mismatches} mismatches, {elapsed:.2f}s")
    return 1 if mismatches else 0


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=Sweep.seeds)
    p.add_argument("--max-nodes", type=int, default=Sweep.max_nodes)
    p.add_argument("--max-atoms", type=int, default=Sweep.max_atoms)
    args = p.parse_args()
    sys.exit(run(Sweep(args.seeds, args.max_nodes, args.max_atoms)))


if __name__ == "__main__":
    main()
