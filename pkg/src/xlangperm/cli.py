"""Command-line driver: ``extract``, ``scan`` and ``config``.

Exit codes: 0 success (findings included), 1 findings with
``--fail-on-findings``, 2 parse or analysis errors, 3 I/O errors, 4 schema or
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence

from .appscan import (
    AppReport, FindingKind, ManifestError, UnknownPermissionLevel, load_app,
    load_permission_db, scan_app,
)
from .cfg.dump import write_dump
from .conditions import to_infix
from .config import FORMATS, ConfigError, RunConfig, load_config
from .corpus import CorpusError, CorpusParseError, load_corpus
from .frontend import DuplicateType
from .linkage import ConflictingRegistration, PairKind, UnresolvedServiceClass
from .mapping import ProtectionMap
from .pipeline import extract_from_corpus
from .report import atomic_write, canonical_json, csv_bytes

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ANALYSIS = 2
EXIT_IO = 3
EXIT_SCHEMA = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _err(*lines: str) -> None:
    for line in lines:
        print(line, file=sys.stderr)


# -- serialization -----------------------------------------------------------


def map_bytes(pmap: ProtectionMap, fmt: str = "json", per_path: bool = False) -> bytes:
    if fmt == "json":
        return canonical_json(pmap.to_json(per_path))
    if per_path:
        rows = [
            (str(e.api), " ".join(map(str, p.nodes)), to_infix(p.condition))
            for e in pmap.entries for p in e.witness_paths
        ]
        return csv_bytes(("api", "path", "condition"), rows)
    return csv_bytes(("api", "condition"), ((str(e.api), to_infix(e.condition)) for e in pmap.entries))


def findings_csv(reports: Sequence[AppReport]) -> bytes:
    rows = [
        (f.app, f.kind.value, f.subject, ";".join(f.detail), ";".join(f.evidence), str(f.truncated).lower())
        for r in reports for f in r.findings
    ]
    return csv_bytes(("app", "kind", "subject", "detail", "evidence", "truncated"), rows)


# -- commands ----------------------------------------------------------------


def _require_dirs(paths: Sequence[str], what: str) -> None:
    for p in paths:
        if not Path(p).is_dir():
            raise CliError(EXIT_IO, f"{what} directory not found: {p}")


def _require_file(path: Optional[str], what: str) -> None:
    if path is None:
        raise CliError(EXIT_SCHEMA, f"missing {what}")
    if not Path(path).is_file():
        raise CliError(EXIT_IO, f"{what} not found: {path}")


def cmd_extract(config: RunConfig) -> int:
    if not config.corpus_dirs:
        raise CliError(EXIT_SCHEMA, "extract needs at least one --corpus directory")
    if config.output_path is None:
        raise CliError(EXIT_SCHEMA, "extract needs --out")
    _require_dirs(config.corpus_dirs, "corpus")
    try:
        corpus = load_corpus(config.corpus_dirs)
        result = extract_from_corpus(corpus, config.cfg, config.path_budget, config.per_path)
    except CorpusParseError as e:
        raise CliError(EXIT_ANALYSIS, str(e)) from e
    except (CorpusError, DuplicateType, ConflictingRegistration, UnresolvedServiceClass) as e:
        raise CliError(EXIT_ANALYSIS, str(e)) from e
    except OSError as e:
        raise CliError(EXIT_IO, str(e)) from e
    data = map_bytes(result.map, config.format, config.per_path)
    try:
        atomic_write(config.output_path, data)
        if config.debug_dump:
            write_dump(result.cfg, Path(config.debug_dump))
    except OSError as e:
        raise CliError(EXIT_IO, str(e)) from e
    _err(*(str(d) for d in result.diagnostics))
    _err(*(f"warning: path budget exceeded for {e.api}, condition approximated" for e in result.map.entries if e.approximate))
    print(f"files: {len(corpus.units)}")
    print(f"pairs: AIDL={len(result.linkage.by_kind(PairKind.AIDL))} JNI={len(result.linkage.by_kind(PairKind.JNI))}")
    print(f"entries: {len(result.map.entries)}")
    print(f"diagnostics: {len(result.diagnostics)}")
    return EXIT_OK


def load_map(path: str) -> ProtectionMap:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise CliError(EXIT_IO, str(e)) from e
    except json.JSONDecodeError as e:
        raise CliError(EXIT_SCHEMA, f"{path}: invalid JSON: {e.msg}") from e
    try:
        return ProtectionMap.from_json(data)
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise CliError(EXIT_SCHEMA, f"{path}: not a protection map: {e}") from e


def cmd_scan(config: RunConfig) -> int:
    _require_file(config.map_path, "map")
    _require_file(config.permdb_path, "permission db")
    if config.output_path is None:
        raise CliError(EXIT_SCHEMA, "scan needs --out")
    _require_dirs(config.app_dirs, "app")
    _require_dirs(config.corpus_dirs, "corpus")
    pmap = load_map(config.map_path)
    try:
        permdb = load_permission_db(config.permdb_path)
    except json.JSONDecodeError as e:
        raise CliError(EXIT_SCHEMA, f"{config.permdb_path}: invalid JSON: {e.msg}") from e
    except ValueError as e:
        raise CliError(EXIT_SCHEMA, f"{config.permdb_path}: {e}") from e
    framework = None
    reports: List[AppReport] = []
    try:
        if config.corpus_dirs:
            framework = load_corpus(config.corpus_dirs).units
        apps = [load_app(d) for d in config.app_dirs]
        packages = Counter(a.package for a in apps)
        dupes = sorted(p for p, n in packages.items() if n > 1)
        if dupes:
            raise CliError(EXIT_SCHEMA, f"package scanned twice: {', '.join(dupes)}")
        for app in sorted(apps, key=lambda a: a.package):
            reports.append(scan_app(app, pmap, permdb, framework, config.reach_budget_seconds))
    except (ManifestError, UnknownPermissionLevel) as e:
        raise CliError(EXIT_SCHEMA, str(e)) from e
    except (CorpusParseError, CorpusError, DuplicateType) as e:
        raise CliError(EXIT_ANALYSIS, str(e)) from e
    except OSError as e:
        raise CliError(EXIT_IO, str(e)) from e

    out = Path(config.output_path)
    try:
        for r in reports:
            atomic_write(out / f"{r.app}.json", canonical_json(r.to_json()))
        atomic_write(out / "findings.csv", findings_csv(reports))
    except OSError as e:
        raise CliError(EXIT_IO, str(e)) from e
    for r in reports:
        _err(*(f"warning: {w}" for w in r.warnings))

    counts = Counter((r.app, f.kind) for r in reports for f in r.findings)
    kinds = list(FindingKind)
    print(f"{'app':<40} " + " ".join(f"{k.value:>20}" for k in kinds))
    for r in reports:
        print(f"{r.app:<40} " + " ".join(f"{counts[(r.app, k)]:>20}" for k in kinds))
    total = sum(counts.values())
    print(f"apps: {len(reports)} findings: {total}")
    return EXIT_FINDINGS if config.fail_on_findings and total else EXIT_OK


def cmd_config(config: RunConfig) -> int:
    sys.stdout.write(canonical_json(config.to_json()).decode("utf-8"))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xlangperm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="build a protection map from a framework corpus")
    ex.add_argument("--corpus", action="append", metavar="DIR", help="corpus root; repeat to overlay parts")
    ex.add_argument("--out", metavar="FILE")
    ex.add_argument("--format", choices=FORMATS)
    ex.add_argument("--per-path", action="store_true", default=None)
    ex.add_argument("--debug-dump", metavar="DIR")
    ex.add_argument("--config", metavar="FILE")

    sc = sub.add_parser("scan", help="run both detectors over app bundles")
    sc.add_argument("--map", metavar="FILE")
    sc.add_argument("--permdb", metavar="FILE")
    sc.add_argument("--app", nargs="*", metavar="DIR", default=None)
    sc.add_argument("--corpus", action="append", metavar="DIR", help="framework corpus for app call resolution")
    sc.add_argument("--out", metavar="DIR")
    sc.add_argument("--fail-on-findings", action="store_true", default=None)
    sc.add_argument("--config", metavar="FILE")

    cf = sub.add_parser("config", help="show configuration")
    cf.add_argument("--print-defaults", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    if args.command == "extract":
        return base.replace(
            corpus_dirs=tuple(args.corpus) if args.corpus else None,
            output_path=args.out, format=args.format, per_path=args.per_path,
            debug_dump=args.debug_dump,
        )
    if args.command == "scan":
        return base.replace(
            map_path=args.map, permdb_path=args.permdb,
            app_dirs=tuple(args.app) if args.app is not None else None,
            corpus_dirs=tuple(args.corpus) if args.corpus else None,
            output_path=args.out, fail_on_findings=args.fail_on_findings,
        )
    return base


COMMANDS = {"extract": cmd_extract, "scan": cmd_scan, "config": cmd_config}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](config)
    except CliError as e:
        _err(f"error: {e}")
        return e.code
    except ConfigError as e:
        _err(f"error: {e}")
        return EXIT_SCHEMA
    except json.JSONDecodeError as e:
        _err(f"error: invalid configuration JSON: {e.msg}")
        return EXIT_SCHEMA
    except OSError as e:
        _err(f"error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
