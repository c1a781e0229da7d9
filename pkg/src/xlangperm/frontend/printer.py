"""Canonical dialect text for a parsed unit.

``parse(pretty_print(u))`` is structurally equal to ``u`` for every unit the
parsers produce. Opaque statements are written back verbatim.
"""
from __future__ import annotations

from typing import List, Optional

from .ast import (
    Assign, Binary, Call, ClassPathConst, Expr, ExprStmt, FieldAccess,
    FieldDecl, Ident, If, IntLit, JniTable, Language, MethodDecl, New, Opaque,
    Param, Return, SourceUnit, Stmt, StrLit, Throw, TypeDecl, TypeKind, Unary,
    VarDecl, Visibility,
)
from .lexer import escape

INDENT = "    "


def _type(name: str, strong: bool) -> str:
    return f"sp<{name}>" if strong else name


def print_expr(e: Expr, lang: Language) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, StrLit):
        return escape(e.value)
    if isinstance(e, IntLit):
        # negative literals only arise via Unary("-")
        return str(e.value)
    if isinstance(e, Call):
        args = ", ".join(print_expr(a, lang) for a in e.args)
        if e.receiver is None:
            return f"{e.name}({args})"
        sep = "->" if e.arrow else "."
        return f"{_postfix_base(e.receiver, lang)}{sep}{e.name}({args})"
    if isinstance(e, New):
        return f"new {e.type_name}({', '.join(print_expr(a, lang) for a in e.args)})"
    if isinstance(e, FieldAccess):
        sep = "->" if e.arrow else "."
        return f"{_postfix_base(e.base, lang)}{sep}{e.field}"
    if isinstance(e, Unary):
        inner = print_expr(e.operand, lang)
        if isinstance(e.operand, (Binary, Unary)):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        return f"{_operand(e.left, lang)} {e.op} {_operand(e.right, lang)}"
    raise TypeError(f"not an expression: {e!r}")


def _operand(e: Expr, lang: Language) -> str:
    text = print_expr(e, lang)
    return f"({text})" if isinstance(e, Binary) else text


def _postfix_base(e: Expr, lang: Language) -> str:
    text = print_expr(e, lang)
    if isinstance(e, (Binary, Unary, New)) or (isinstance(e, IntLit)):
        return f"({text})"
    return text


def print_stmts(body, lang: Language, depth: int) -> List[str]:
    out: List[str] = []
    pad = INDENT * depth
    for s in body:
        out.extend(_stmt(s, lang, depth, pad))
    return out


def _stmt(s: Stmt, lang: Language, depth: int, pad: str) -> List[str]:
    if isinstance(s, VarDecl):
        head = f"{pad}{_type(s.declared_type, s.strong)} {s.name}"
        if s.init is None:
            return [head + ";"]
        return [f"{head} = {print_expr(s.init, lang)};"]
    if isinstance(s, Assign):
        return [f"{pad}{print_expr(s.target, lang)} = {print_expr(s.value, lang)};"]
    if isinstance(s, ExprStmt):
        return [f"{pad}{print_expr(s.expr, lang)};"]
    if isinstance(s, Return):
        if s.value is None:
            return [f"{pad}return;"]
        return [f"{pad}return {print_expr(s.value, lang)};"]
    if isinstance(s, Throw):
        return [f"{pad}throw {print_expr(s.exc, lang)};"]
    if isinstance(s, Opaque):
        return [pad + s.text]
    if isinstance(s, If):
        lines = [f"{pad}if ({print_expr(s.cond, lang)}) {{"]
        lines += print_stmts(s.then, lang, depth + 1)
        if s.orelse:
            lines.append(f"{pad}}} else {{")
            lines += print_stmts(s.orelse, lang, depth + 1)
        lines.append(pad + "}")
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _params(params) -> str:
    return ", ".join(f"{_type(p.declared_type, p.strong)} {p.name}" for p in params)


def _field(f: FieldDecl, lang: Language, pad: str) -> str:
    mods = "static " if f.is_static else ""
    head = f"{pad}{mods}{_type(f.declared_type, f.strong)} {f.name}"
    if f.init is not None:
        head += f" = {print_expr(f.init, lang)}"
    return head + ";"


def _signature(m: MethodDecl, name: str) -> str:
    if m.return_type:
        return f"{m.return_type} {name}({_params(m.params)})"
    return f"{name}({_params(m.params)})"


def _body(m: MethodDecl, lang: Language, depth: int, head: str) -> List[str]:
    pad = INDENT * depth
    if m.body is None:
        return [f"{pad}{head};"]
    return [f"{pad}{head} {{"] + print_stmts(m.body, lang, depth + 1) + [pad + "}"]


# -- MiniJava -----------------------------------------------------------------


def _java_type(t: TypeDecl, depth: int, is_nested: bool) -> List[str]:
    pad = INDENT * depth
    head = f"{pad}{'static ' if is_nested and t.kind is TypeKind.CLASS else ''}{t.kind.value.lower()} {t.name}"
    if t.kind is TypeKind.INTERFACE:
        ext = ([t.extends] if t.extends else []) + list(t.implements)
        if ext:
            head += " extends " + ", ".join(ext)
    else:
        if t.extends:
            head += f" extends {t.extends}"
        if t.implements:
            head += " implements " + ", ".join(t.implements)
    lines = [head + " {"]
    for f in t.fields:
        lines.append(_field(f, Language.JAVA, pad + INDENT))
    for m in t.methods:
        vis = "public" if m.visibility is Visibility.PUBLIC else "private"
        mods = vis + (" static" if m.is_static else "")
        lines += _body(m, Language.JAVA, depth + 1, f"{mods} {_signature(m, m.name)}")
    for inner in t.nested:
        lines += _java_type(inner, depth + 1, True)
    lines.append(pad + "}")
    return lines


# -- MiniCpp ------------------------------------------------------------------


def _cpp_class(t: TypeDecl, depth: int, ns: str) -> List[str]:
    pad = INDENT * depth
    bases = ([t.extends] if t.extends else []) + list(t.implements)
    head = f"{pad}class {t.name}"
    if bases:
        head += " : " + ", ".join(f"public {b}" for b in bases)
    lines = [head + " {"]
    current: Optional[Visibility] = None
    inner_pad = pad + INDENT
    if t.fields:
        lines.append(f"{pad}private:")
        current = Visibility.NONPUBLIC
        for f in t.fields:
            lines.append(_field(f, Language.CPP, inner_pad))
    for m in t.methods:
        if m.visibility is not current:
            lines.append(f"{pad}{'public' if m.visibility is Visibility.PUBLIC else 'private'}:")
            current = m.visibility
        mods = "static " if m.is_static else ""
        head = mods + _signature(m, m.name)
        if m.is_out_of_line:
            lines.append(f"{inner_pad}{head};")
        else:
            lines += _body(m, Language.CPP, depth + 1, head)
    for inner in t.nested:
        lines += _cpp_class(inner, depth + 1, ns)
    lines.append(pad + "};")
    return lines


def _strip_ns(fqn: str, ns: str) -> str:
    if ns and fqn.startswith(ns + "."):
        fqn = fqn[len(ns) + 1 :]
    return fqn.replace(".", "::")


def _cpp_out_of_line(t: TypeDecl, ns: str) -> List[MethodDecl]:
    found = [m for m in t.methods if m.is_out_of_line]
    for inner in t.nested:
        found += _cpp_out_of_line(inner, ns)
    return found


def _cpp_function(m: MethodDecl, ns: str, depth: int) -> List[str]:
    mods = "static " if m.is_static else ""
    if m.owner is None:
        return _body(m, Language.CPP, depth, mods + _signature(m, m.name))
    qual = _strip_ns(m.owner, ns)
    return _body(m, Language.CPP, depth, mods + _signature(m, f"{qual}::{m.name}"))


def _cpp_global(g, pad: str) -> List[str]:
    if isinstance(g, ClassPathConst):
        return [f"{pad}static const char* const {g.name} = {escape(g.value)};"]
    assert isinstance(g, JniTable)
    lines = [f"{pad}static const JNINativeMethod {g.name}[] = {{"]
    for i, e in enumerate(g.entries):
        sep = "," if i + 1 < len(g.entries) else ""
        lines.append(f"{pad}{INDENT}{{{escape(e.java_name)}, {escape(e.signature)}, (void*){e.native_function}}}{sep}")
    lines.append(pad + "};")
    return lines


def pretty_print(unit: SourceUnit) -> str:
    if unit.language is Language.JAVA:
        lines = [f"package {unit.package_or_namespace};"]
        for t in unit.types:
            lines.append("")
            lines += _java_type(t, 0, False)
        return "\n".join(lines) + "\n"

    ns = unit.package_or_namespace
    parts = ns.split(".") if ns else []
    depth = len(parts)
    lines = [f"{INDENT * i}namespace {p} {{" for i, p in enumerate(parts)]
    body: List[str] = []
    for g in unit.globals:
        body += _cpp_global(g, INDENT * depth)
    for t in unit.types:
        body += _cpp_class(t, depth, ns)
    for t in unit.types:
        for m in _cpp_out_of_line(t, ns):
            body += _cpp_function(m, ns, depth)
    for m in unit.free_functions:
        body += _cpp_function(m, ns, depth)
    lines += body
    lines += [f"{INDENT * i}}}" for i in reversed(range(depth))]
    return "\n".join(lines) + "\n"
