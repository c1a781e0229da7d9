"""App bundles and the two permission detectors.

An app bundle is a directory holding ``manifest.json`` and MiniJava sources
under ``src/``. Its code is resolved against a framework layer: either a
parsed corpus or, when none is given, stub types synthesized from the
protection map so that calls to mapped APIs still resolve.
"""
from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import jsonschema

from .cfg.resolve import CallResolver
from .conditions import permissions_in, simplify_condition, unprivileged_app
from .corpus import CorpusParseError, parse_files
from .diagnostics import DiagnosticSink
from .frontend import (
    Language, MethodDecl, MethodRef, SourceUnit, SymbolTable, TypeDecl, TypeKind,
    Visibility, build_symbol_table,
)
from .frontend.ast import Call, New, Param, iter_exprs, iter_stmts, stmt_exprs
from .linkage import ServiceRegistry
from .mapping import ProtectionMap

DEFAULT_REACH_BUDGET_SECONDS = 10.0

_NAME = r"^[A-Za-z_$][A-Za-z0-9_$]*(\.[A-Za-z_$][A-Za-z0-9_$]*)*$"

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["package", "uses_permissions", "components"],
    "additionalProperties": False,
    "properties": {
        "package": {"type": "string", "pattern": _NAME},
        "uses_permissions": {"type": "array", "items": {"type": "string", "pattern": _NAME}},
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind", "exported", "guard_permissions", "entry_methods"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "pattern": _NAME},
                    "kind": {"enum": ["activity", "service", "receiver", "provider"]},
                    "exported": {"type": "boolean"},
                    "guard_permissions": {"type": "array", "items": {"type": "string", "pattern": _NAME}},
                    "entry_methods": {
                        "type": "array",
                        "items": {"type": "string", "pattern": r"^[A-Za-z_$][A-Za-z0-9_$.]*\.[A-Za-z_$][A-Za-z0-9_$]*/[0-9]+$"},
                    },
                },
            },
        },
    },
}


class ManifestError(ValueError):
    """Schema violation; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, pointer: str, message: str, path: str = ""):
        self.pointer = pointer
        self.path = path
        super().__init__(f"{path}{'#' if path else ''}{pointer or '/'}: {message}")


class UnknownPermissionLevel(KeyError):
    def __init__(self, permission: str):
        self.permission = permission
        super().__init__(permission)

    def __str__(self):
        return f"no protection level for {self.permission}"


class ComponentKind(str, enum.Enum):
    ACTIVITY = "activity"
    SERVICE = "service"
    RECEIVER = "receiver"
    PROVIDER = "provider"


class Level(str, enum.Enum):
    NORMAL = "normal"
    DANGEROUS = "dangerous"
    SIGNATURE = "signature"


@dataclass(frozen=True)
class ComponentDecl:
    name: str
    kind: ComponentKind
    exported: bool
    guard_permissions: FrozenSet[str] = frozenset()
    entry_methods: Tuple[MethodRef, ...] = ()


@dataclass(frozen=True)
class AppManifest:
    package: str
    uses_permissions: FrozenSet[str] = frozenset()
    components: Tuple[ComponentDecl, ...] = ()


def _pointer(parts: Iterable) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def manifest_from_json(data, path: str = "") -> AppManifest:
    errors = sorted(
        jsonschema.Draft7Validator(MANIFEST_SCHEMA).iter_errors(data),
        key=lambda e: (list(map(str, e.absolute_path)), e.message),
    )
    if errors:
        e = errors[0]
        raise ManifestError(_pointer(e.absolute_path), e.message, path)
    components = []
    seen: Set[str] = set()
    for i, c in enumerate(data["components"]):
        if c["name"] in seen:
            raise ManifestError(f"/components/{i}/name", f"duplicate component {c['name']}", path)
        seen.add(c["name"])
        components.append(ComponentDecl(
            c["name"],
            ComponentKind(c["kind"]),
            c["exported"],
            frozenset(c["guard_permissions"]),
            tuple(MethodRef.parse(m) for m in c["entry_methods"]),
        ))
    return AppManifest(data["package"], frozenset(data["uses_permissions"]), tuple(components))


def parse_manifest(file: Union[str, Path]) -> AppManifest:
    file = Path(file)
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestError("", f"invalid JSON: {e.msg} at line {e.lineno}", str(file)) from e
    return manifest_from_json(data, str(file))


# -- permission levels -------------------------------------------------------


@dataclass(frozen=True)
class PermissionDb:
    levels: Mapping[str, Level] = field(default_factory=dict)

    def level(self, permission: str) -> Level:
        try:
            return self.levels[permission]
        except KeyError:
            raise UnknownPermissionLevel(permission) from None

    def require(self, permissions: Iterable[str]) -> None:
        for p in sorted(set(permissions)):
            self.level(p)

    @classmethod
    def from_json(cls, data) -> "PermissionDb":
        if not isinstance(data, dict):
            raise ValueError("permission db must be a JSON object")
        levels = {}
        for name, level in data.items():
            if not isinstance(level, str) or level.lower() not in Level._value2member_map_:
                raise ValueError(f"unknown protection level {level!r} for {name}")
            levels[name] = Level(level.lower())
        return cls(levels)


def load_permission_db(file: Union[str, Path]) -> PermissionDb:
    return PermissionDb.from_json(json.loads(Path(file).read_text(encoding="utf-8")))


_SIGNATURE_DEFAULTS = (
    "ACCESS_DRM_CERTIFICATES", "ACCESS_FM_RADIO", "ACCESS_SURFACE_FLINGER", "CAPTURE_AUDIO_HOTWORD",
    "CONTROL_WIFI_DISPLAY", "LOCATION_HARDWARE", "MODIFY_AUDIO_ROUTING", "READ_FRAME_BUFFER",
)


def default_permission_db() -> PermissionDb:
    """Levels of the permissions checked by the native services modeled here."""
    levels = {f"android.permission.{p}": Level.SIGNATURE for p in _SIGNATURE_DEFAULTS}
    levels.update({
        "android.permission.CAMERA": Level.DANGEROUS,
        "android.permission.RECORD_AUDIO": Level.DANGEROUS,
        "android.permission.INTERNET": Level.NORMAL,
        "android.permission.MODIFY_AUDIO_SETTINGS": Level.NORMAL,
    })
    return PermissionDb(levels)


# -- app bundles -------------------------------------------------------------


@dataclass(frozen=True)
class App:
    manifest: AppManifest
    units: Tuple[SourceUnit, ...]
    root: str = ""

    @property
    def package(self) -> str:
        return self.manifest.package

    def methods(self) -> List[MethodDecl]:
        out = []
        for u in self.units:
            out.extend(u.all_methods())
            out.extend(u.free_functions)
        return sorted(out, key=lambda m: MethodRef.of(m).sort_key)


def load_app(directory: Union[str, Path]) -> App:
    directory = Path(directory)
    manifest = parse_manifest(directory / "manifest.json")
    src = directory / "src"
    files = []
    if src.is_dir():
        files = [
            (f.relative_to(directory).as_posix(), f.read_text(encoding="utf-8"))
            for f in sorted(src.rglob("*.mjava")) if f.is_file()
        ]
    units, errors = parse_files(files)
    if errors:
        raise CorpusParseError(errors)
    return App(manifest, tuple(units), str(directory))


def framework_stubs(pmap: ProtectionMap) -> Tuple[SourceUnit, ...]:
    """One bodied public stub per mapped API, grouped into classes by owner."""
    by_owner: Dict[str, List[MethodRef]] = {}
    for api in sorted(pmap.apis(), key=lambda r: r.sort_key):
        if api.owner is not None:
            by_owner.setdefault(api.owner, []).append(api)
    units = []
    for owner, refs in sorted(by_owner.items()):
        package, _, simple = owner.rpartition(".")
        methods = tuple(
            MethodDecl(
                owner, r.name, tuple(Param(f"p{i}", "Object") for i in range(r.arity)),
                "" if r.name == simple else "void", Visibility.PUBLIC, body=(),
            )
            for r in refs
        )
        t = TypeDecl(owner, simple, TypeKind.CLASS, methods=methods)
        units.append(SourceUnit(f"<map>/{owner}", Language.JAVA, package, (t,)))
    return tuple(units)


def scan_symbols(app: App, framework: Sequence[SourceUnit]) -> SymbolTable:
    return build_symbol_table(tuple(app.units) + tuple(framework))


def check_entry_methods(app: App, symtab: SymbolTable) -> None:
    own = {MethodRef.of(m) for m in app.methods()}
    for i, c in enumerate(app.manifest.components):
        for j, ref in enumerate(c.entry_methods):
            if ref not in own:
                raise ManifestError(
                    f"/components/{i}/entry_methods/{j}",
                    f"{ref} is not a method of the app", str(Path(app.root) / "manifest.json"),
                )


# -- reachability ------------------------------------------------------------


@dataclass(frozen=True)
class Reach:
    apis: FrozenSet[MethodRef]
    truncated: bool = False


def reachable_apis(
    app: App,
    start: Iterable[MethodRef],
    pmap: ProtectionMap,
    symtab: SymbolTable,
    budget_seconds: float = DEFAULT_REACH_BUDGET_SECONDS,
    clock=time.monotonic,
) -> Reach:
    """Mapped APIs in the forward call closure of ``start`` through app code.

    Framework methods are leaves: they count if mapped and are never entered.
    """
    own = {MethodRef.of(m) for m in app.methods()}
    mapped = pmap.apis()
    resolver = CallResolver(symtab, ServiceRegistry(), DiagnosticSink())
    deadline = clock() + budget_seconds
    seen: Set[MethodRef] = set()
    work = sorted(set(start) & own, key=lambda r: r.sort_key, reverse=True)
    found: Set[MethodRef] = set()
    while work:
        if clock() > deadline:
            return Reach(frozenset(found), True)
        ref = work.pop()
        if ref in seen:
            continue
        seen.add(ref)
        m = symtab.method(ref)
        targets: List[MethodRef] = []
        for s in iter_stmts(m.body):
            for x in stmt_exprs(s):
                for e in iter_exprs(x):
                    if isinstance(e, Call):
                        targets.extend(resolver.resolve_call(e, m).targets)
                    elif isinstance(e, New):
                        ctor = resolver.resolve_new(e, m)
                        if ctor is not None:
                            targets.append(ctor)
        for t in targets:
            if t in mapped:
                found.add(t)
            if t in own and t not in seen:
                work.append(t)
    return Reach(frozenset(found), False)


# -- detectors ---------------------------------------------------------------


class FindingKind(str, enum.Enum):
    OVER_PRIVILEGE = "OVER_PRIVILEGE"
    COMPONENT_HIJACKING = "COMPONENT_HIJACKING"


@dataclass(frozen=True, order=True)
class Finding:
    app: str
    kind: FindingKind
    subject: str
    detail: Tuple[str, ...] = ()
    evidence: Tuple[str, ...] = ()
    truncated: bool = False

    def to_json(self) -> Dict:
        return {
            "kind": self.kind.value,
            "subject": self.subject,
            "detail": list(self.detail),
            "evidence": list(self.evidence),
            "truncated": self.truncated,
        }


def required_permissions(pmap: ProtectionMap, api: MethodRef) -> FrozenSet[str]:
    """Permissions an unprivileged caller may need for ``api``."""
    condition = pmap.get(api)
    if condition is None:
        return frozenset()
    return permissions_in(simplify_condition(condition, unprivileged_app))


def default_start(app: App) -> List[MethodRef]:
    refs = {r for c in app.manifest.components for r in c.entry_methods}
    refs |= {MethodRef.of(m) for m in app.methods() if m.visibility is Visibility.PUBLIC}
    return sorted(refs, key=lambda r: r.sort_key)


def _require_levels(app: App, pmap: ProtectionMap, permdb: PermissionDb) -> None:
    permdb.require(app.manifest.uses_permissions)
    for c in app.manifest.components:
        permdb.require(c.guard_permissions)
    for e in pmap.entries:
        permdb.require(permissions_in(e.condition))


@dataclass
class ScanContext:
    """What both detectors need for one app; built once per scan."""

    app: App
    pmap: ProtectionMap
    permdb: PermissionDb
    symtab: SymbolTable
    budget_seconds: float = DEFAULT_REACH_BUDGET_SECONDS
    clock: Callable[[], float] = time.monotonic

    @classmethod
    def build(
        cls,
        app: App,
        pmap: ProtectionMap,
        permdb: PermissionDb,
        framework: Optional[Sequence[SourceUnit]] = None,
        budget_seconds: float = DEFAULT_REACH_BUDGET_SECONDS,
    ) -> "ScanContext":
        units = framework_stubs(pmap) if framework is None else framework
        symtab = scan_symbols(app, units)
        check_entry_methods(app, symtab)
        return cls(app, pmap, permdb, symtab, budget_seconds)

    def reach(self, start: Iterable[MethodRef]) -> Reach:
        return reachable_apis(self.app, start, self.pmap, self.symtab, self.budget_seconds, self.clock)


def detect_over_privilege(ctx: ScanContext) -> Tuple[List[Finding], Reach]:
    _require_levels(ctx.app, ctx.pmap, ctx.permdb)
    reach = ctx.reach(default_start(ctx.app))
    if reach.truncated:
        return [], reach
    used: Set[str] = set()
    for api in reach.apis:
        used |= required_permissions(ctx.pmap, api)
    findings = [
        Finding(ctx.app.package, FindingKind.OVER_PRIVILEGE, p)
        for p in sorted(ctx.app.manifest.uses_permissions - used)
    ]
    return findings, reach


def detect_component_hijacking(ctx: ScanContext) -> List[Finding]:
    _require_levels(ctx.app, ctx.pmap, ctx.permdb)
    findings = []
    for c in ctx.app.manifest.components:
        if not c.exported:
            continue
        if any(ctx.permdb.level(p) is Level.SIGNATURE for p in c.guard_permissions):
            continue
        reach = ctx.reach(c.entry_methods)
        per_api = {
            api: {p for p in required_permissions(ctx.pmap, api) if ctx.permdb.level(p) is Level.DANGEROUS}
            for api in reach.apis
        }
        required = set().union(*per_api.values()) if per_api else set()
        exposed = required - c.guard_permissions
        if not exposed:
            continue
        evidence = sorted(str(api) for api, perms in per_api.items() if perms & exposed)
        findings.append(Finding(
            ctx.app.package, FindingKind.COMPONENT_HIJACKING, c.name,
            tuple(sorted(exposed)), tuple(evidence), reach.truncated,
        ))
    return findings


@dataclass(frozen=True)
class AppReport:
    app: str
    findings: Tuple[Finding, ...]
    warnings: Tuple[str, ...] = ()

    def to_json(self) -> Dict:
        return {"app": self.app, "findings": [f.to_json() for f in self.findings]}


def scan_app(
    app: App,
    pmap: ProtectionMap,
    permdb: PermissionDb,
    framework: Optional[Sequence[SourceUnit]] = None,
    budget_seconds: float = DEFAULT_REACH_BUDGET_SECONDS,
) -> AppReport:
    ctx = ScanContext.build(app, pmap, permdb, framework, budget_seconds)
    over, reach = detect_over_privilege(ctx)
    warnings = []
    if reach.truncated:
        warnings.append(f"{app.package}: reachability budget exhausted, over-privilege findings suppressed")
    findings = sorted(over + detect_component_hijacking(ctx))
    return AppReport(app.package, tuple(findings), tuple(warnings))
