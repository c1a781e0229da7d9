"""Random two-language corpora with a known program model.

Used to cross-check extraction against independent oracles. A corpus is one
Java API class whose public methods call JNI-registered natives; native
functions run guards, branches and calls to other native functions. The
model keeps the structure so an oracle can evaluate guards directly without
going through the parser or the CFG.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple, Union

JAVA_PACKAGE = "android.gen"
API_CLASS = "Api"
JAVA_PATH = "framework/java/android/gen/Api.mjava"
NATIVE_PATH = "framework/native/jni/android_gen_Api.mcpp"

# atom keys: ("perm", name) | ("pid",) | ("uid", const)
AtomKey = Tuple[str, ...]


@dataclass(frozen=True)
class Lit:
    atom: AtomKey


@dataclass(frozen=True)
class Both:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Either:
    left: "Expr"
    right: "Expr"


Expr = Union[Lit, Both, Either]


def holds(e: Expr, valuation: Mapping[AtomKey, bool]) -> bool:
    if isinstance(e, Lit):
        return valuation[e.atom]
    if isinstance(e, Both):
        return holds(e.left, valuation) and holds(e.right, valuation)
    return holds(e.left, valuation) or holds(e.right, valuation)


@dataclass(frozen=True)
class Guard:
    """Execution proceeds iff ``proceed`` holds; rendered in denial or else form."""

    proceed: Expr
    else_form: bool = False


@dataclass(frozen=True)
class CallFn:
    callee: str


@dataclass(frozen=True)
class Branch:
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class Plain:
    pass


@dataclass(frozen=True)
class Ret:
    pass


Stmt = Union[Guard, CallFn, Branch, Plain, Ret]


@dataclass
class Program:
    atoms: Tuple[AtomKey, ...]
    functions: Dict[str, Tuple[Stmt, ...]]  # native free functions
    natives: Dict[str, str]  # java native method name -> native function
    apis: Dict[str, Tuple[str, ...]] = field(default_factory=dict)  # api method -> natives called in order

    def sources(self) -> Dict[str, str]:
        return {JAVA_PATH: render_java(self), NATIVE_PATH: render_native(self)}


# -- rendering ---------------------------------------------------------------


def _positive(atom: AtomKey) -> str:
    if atom[0] == "perm":
        return f'checkCallingPermission(String16("{atom[1]}"))'
    if atom[0] == "pid":
        return "getCallingPid() == getpid()"
    return f"getCallingUid() == {atom[1]}"


def _negative(atom: AtomKey) -> str:
    if atom[0] == "perm":
        return f'!checkCallingPermission(String16("{atom[1]}"))'
    if atom[0] == "pid":
        return "getCallingPid() != getpid()"
    return f"getCallingUid() != {atom[1]}"


def render_expr(e: Expr, negate: bool) -> str:
    """``e`` itself, or its De Morgan dual over negated literals."""
    if isinstance(e, Lit):
        return _negative(e.atom) if negate else _positive(e.atom)
    both = isinstance(e, Both) != negate
    op = " && " if both else " || "
    return "(" + render_expr(e.left, negate) + op + render_expr(e.right, negate) + ")"


def _render_stmts(stmts, pad: str) -> List[str]:
    out: List[str] = []
    for s in stmts:
        if isinstance(s, Guard):
            if s.else_form:
                out.append(f"{pad}if ({render_expr(s.proceed, False)}) {{")
                out.append(f"{pad}}} else {{")
            else:
                out.append(f"{pad}if ({render_expr(s.proceed, True)}) {{")
            out.append(f'{pad}    ALOGE("Permission Denial");')
            out.append(f"{pad}    return PERMISSION_DENIED;")
            out.append(f"{pad}}}")
        elif isinstance(s, CallFn):
            out.append(f"{pad}{s.callee}(mode);")
        elif isinstance(s, Branch):
            out.append(f"{pad}if (mode == 1) {{")
            out.extend(_render_stmts(s.then, pad + "    "))
            if s.orelse:
                out.append(f"{pad}}} else {{")
                out.extend(_render_stmts(s.orelse, pad + "    "))
            out.append(f"{pad}}}")
        elif isinstance(s, Plain):
            out.append(f"{pad}mode = 0;")
        else:
            out.append(f"{pad}return NO_ERROR;")
    return out


def render_native(p: Program) -> str:
    lines = ["namespace android {", ""]
    lines.append(f'static const char* const kApiClassPathName = "{JAVA_PACKAGE.replace(".", "/")}/{API_CLASS}";')
    lines.append("")
    lines.append("static const JNINativeMethod gApiMethods[] = {")
    rows = [f'    {{"{j}", "(I)I", (void*){fn}}}' for j, fn in sorted(p.natives.items())]
    lines.append(",\n".join(rows))
    lines.append("};")
    lines.append("")
    for name in sorted(p.functions):
        lines.append(f"static status_t {name}(int mode) {{")
        lines.extend(_render_stmts(p.functions[name], "    "))
        lines.append("    return NO_ERROR;")
        lines.append("}")
        lines.append("")
    lines.append("int register_android_gen_Api(JNIEnv* env) {")
    lines.append("    return jniRegisterNativeMethods(env, kApiClassPathName, gApiMethods, NELEM(gApiMethods));")
    lines.append("}")
    lines.append("")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_java(p: Program) -> str:
    lines = [f"package {JAVA_PACKAGE};", "", f"class {API_CLASS} {{"]
    for api in sorted(p.apis):
        lines.append(f"    public void {api}(int mode) {{")
        for j in p.apis[api]:
            lines.append(f"        {j}(mode);")
        lines.append("    }")
        lines.append("")
    for j in sorted(p.natives):
        lines.append(f"    private static native int {j}(int mode);")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- generation --------------------------------------------------------------


ATOM_POOL: Tuple[AtomKey, ...] = (
    ("perm", "android.permission.GEN_A"),
    ("perm", "android.permission.GEN_B"),
    ("pid",),
    ("uid", "AID_SYSTEM"),
    ("perm", "android.permission.GEN_C"),
)


def _expr(rng: random.Random, atoms, depth: int) -> Expr:
    if depth == 0 or rng.random() < 0.45:
        return Lit(rng.choice(atoms))
    kind = Both if rng.random() < 0.5 else Either
    return kind(_expr(rng, atoms, depth - 1), _expr(rng, atoms, depth - 1))


def _stmts(rng: random.Random, atoms, names: List[str], depth: int, count: int) -> Tuple[Stmt, ...]:
    out: List[Stmt] = []
    for _ in range(count):
        r = rng.random()
        if r < 0.3:
            out.append(Guard(_expr(rng, atoms, 2), else_form=rng.random() < 0.3))
        elif r < 0.6 and names:
            out.append(CallFn(rng.choice(names)))
        elif r < 0.8 and depth > 0:
            then = _stmts(rng, atoms, names, depth - 1, rng.randint(1, 2))
            orelse = _stmts(rng, atoms, names, depth - 1, rng.randint(0, 2))
            out.append(Branch(then, orelse))
        elif r < 0.9:
            out.append(Plain())
        else:
            out.append(Ret())
    return tuple(out)


def random_program(rng: random.Random, max_atoms: int = 4) -> Program:
    atoms = tuple(rng.sample(ATOM_POOL, rng.randint(1, max_atoms)))
    n_natives = rng.randint(1, 2)
    n_helpers = rng.randint(0, 3)
    entry_fns = [f"android_gen_n{i}" for i in range(n_natives)]
    helpers = [f"gen_helper{i}" for i in range(n_helpers)]
    names = entry_fns + helpers
    functions = {
        fn: _stmts(rng, atoms, [n for n in names if n not in entry_fns], 2, rng.randint(1, 4))
        for fn in names
    }
    natives = {f"native_n{i}": fn for i, fn in enumerate(entry_fns)}
    apis = {}
    for i in range(rng.randint(1, 2)):
        k = rng.randint(1, len(natives))
        apis[f"call{i}"] = tuple(rng.sample(sorted(natives), k))
    return Program(atoms, functions, natives, apis)
