"""Recursive-descent parsers for MiniJava and MiniCpp.

Top-level declarations are parsed strictly. Method bodies are delimited by
brace matching first and then parsed statement by statement; a statement that
falls outside the dialect becomes either the calls that can still be
recovered from it or a single :class:`Opaque` node holding its tokens.
"""
from __future__ import annotations

import dataclasses
from typing import Callable, List, Optional, Tuple

from .ast import (
    Assign, Binary, Call, ClassPathConst, Expr, ExprStmt, FieldAccess,
    FieldDecl, Ident, If, IntLit, JniEntry, JniTable, Language, MethodDecl,
    New, Opaque, Param, Return, SourceUnit, Stmt, StrLit, Throw, TypeDecl,
    TypeKind, Unary, VarDecl, Visibility, iter_exprs,
)
from .lexer import ParseError, Token, tokenize

KEYWORDS = frozenset(
    """if else return throw new for while do switch case default break continue
    try catch finally synchronized class interface package namespace using
    sizeof goto""".split()
)
TYPE_MODIFIERS = frozenset({"const", "final", "volatile", "unsigned", "signed"})
STRING_WRAPPERS = frozenset({"String16", "String8"})
JNI_REGISTER_FUNCTIONS = ("RegisterMethodsOrDie", "registerNativeMethods", "jniRegisterNativeMethods")


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


class _Parser:
    language: Language

    def __init__(self, source: str, path: str):
        self.path = path
        self.toks: List[Token] = tokenize(source, path)
        self.pos = 0
        self.limit = len(self.toks) - 1  # index of EOF
        self._eof = self.toks[-1]

    # -- token access ---------------------------------------------------------

    def tok(self, k: int = 0) -> Token:
        i = self.pos + k
        if i >= self.limit:
            t = self.toks[min(self.limit, len(self.toks) - 1)]
            return Token("EOF", "", t.line)
        return self.toks[i]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.tok(k)
        return t.kind in ("IDENT", "OP") and t.text == text

    def at_ident(self, k: int = 0) -> bool:
        t = self.tok(k)
        return t.kind == "IDENT" and t.text not in KEYWORDS

    def advance(self) -> Token:
        t = self.tok()
        if t.kind == "EOF":
            self.fail("more input")
        self.pos += 1
        return t

    def fail(self, expected: str):
        t = self.tok()
        raise ParseError(self.path, t.line, expected, t.text or "<eof>")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        if not self.at_ident():
            self.fail("identifier")
        return self.advance().text

    def dotted_name(self) -> str:
        parts = [self.ident()]
        while self.at(".") and self.tok(1).kind == "IDENT":
            self.pos += 1
            parts.append(self.ident())
        return ".".join(parts)

    def matching_brace(self, open_idx: int) -> int:
        depth = 0
        for i in range(open_idx, self.limit):
            t = self.toks[i]
            if t.kind != "OP":
                continue
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    return i
        raise ParseError(self.path, self.toks[open_idx].line, "matching '}'")

    # -- types ----------------------------------------------------------------

    def parse_type(self) -> Tuple[str, bool]:
        while self.tok().kind == "IDENT" and self.tok().text in TYPE_MODIFIERS:
            self.pos += 1
        if self.language is Language.CPP and self.at("sp") and self.at("<", 1):
            self.pos += 2
            inner, _ = self.parse_type()
            self.expect(">")
            return inner, True
        name = self.dotted_name()
        while True:
            if self.at("[") and self.at("]", 1):
                self.pos += 2
                name += "[]"
            elif self.language is Language.CPP and self.tok().text in ("*", "&") and self.tok().kind == "OP":
                name += self.advance().text
            elif self.language is Language.CPP and self.at("const"):
                self.pos += 1
            else:
                return name, False

    def parse_params(self) -> Tuple[Param, ...]:
        self.expect("(")
        params = []
        if self.language is Language.CPP and self.at("void") and self.at(")", 1):
            self.pos += 1
        while not self.at(")"):
            if params:
                self.expect(",")
            typ, strong = self.parse_type()
            params.append(Param(self.ident(), typ, strong))
        self.expect(")")
        return tuple(params)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self) -> Expr:
        left = self.parse_and()
        while self.at("||"):
            self.pos += 1
            left = Binary("||", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_eq()
        while self.at("&&"):
            self.pos += 1
            left = Binary("&&", left, self.parse_eq())
        return left

    def parse_eq(self) -> Expr:
        left = self.parse_unary()
        while self.at("==") or self.at("!="):
            op = self.advance().text
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.at("!") or self.at("-"):
            op = self.advance().text
            return Unary(op, self.parse_unary())
        return self.parse_postfix()

    def parse_args(self) -> Tuple[Expr, ...]:
        self.expect("(")
        args = []
        while not self.at(")"):
            if args:
                self.expect(",")
            args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.at(".") or (self.language is Language.CPP and self.at("->")):
                arrow = self.advance().text == "->"
                name = self.ident()
                if self.at("("):
                    e = Call(e, name, self.parse_args(), arrow)
                else:
                    e = FieldAccess(e, name, arrow)
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.tok()
        if t.kind == "STR":
            self.pos += 1
            return StrLit(t.value)
        if t.kind == "INT":
            if t.value is None:
                self.fail("integer literal")
            self.pos += 1
            return IntLit(t.value)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.accept("new"):
            type_name = self.dotted_name()
            return New(type_name, self.parse_args())
        if (
            self.language is Language.CPP
            and t.kind == "IDENT"
            and t.text in STRING_WRAPPERS
            and self.at("(", 1)
            and self.tok(2).kind == "STR"
            and self.at(")", 3)
        ):
            self.pos += 4
            return StrLit(self.toks[self.pos - 2].value)
        name = self.ident()
        if self.language is Language.CPP and self.at("<"):
            self._skip_template_args()
        if self.at("("):
            return Call(None, name, self.parse_args())
        return Ident(name)

    def _skip_template_args(self) -> None:
        """Drop explicit template arguments of a call such as ``interface_cast<IFoo>(b)``."""
        k, depth = 0, 0
        while True:
            t = self.tok(k)
            if t.kind == "EOF":
                return
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    break
            elif not (t.kind == "IDENT" or t.text in ("::", ",", "*")):
                return
            k += 1
        if self.at("(", k + 1):
            self.pos += k + 1

    # -- statements -----------------------------------------------------------

    def parse_block(self) -> Tuple[Stmt, ...]:
        if not self.at("{"):
            self.fail("'{'")
        close = self.matching_brace(self.pos)
        if close >= self.limit:
            self.fail("'}'")
        saved = self.limit
        self.pos += 1
        self.limit = close
        try:
            body = self.parse_stmts()
        finally:
            self.limit = saved
        self.pos = close + 1
        return body

    def parse_stmts(self) -> Tuple[Stmt, ...]:
        out: List[Stmt] = []
        while self.pos < self.limit:
            start = self.pos
            try:
                out.append(self.parse_stmt())
            except ParseError:
                end = self._skip_extent(start)
                out.extend(self._recover(start, end))
                self.pos = end
        return tuple(out)

    def parse_stmt(self) -> Stmt:
        line = self.tok().line
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse: Tuple[Stmt, ...] = ()
            if self.accept("else"):
                if self.at("if"):
                    orelse = (self.parse_stmt(),)
                else:
                    orelse = self.parse_block()
            return If(cond, then, orelse, line=line)
        if self.accept("return"):
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return Return(value, line=line)
        if self.accept("throw"):
            self.expect("new")
            type_name = self.dotted_name()
            args = self.parse_args()
            self.expect(";")
            return Throw(New(type_name, args), line=line)
        decl = self._try_decl(line)
        if decl is not None:
            return decl
        e = self.parse_expr()
        if self.accept("="):
            if not isinstance(e, (Ident, FieldAccess)):
                self.fail("assignable target")
            value = self.parse_expr()
            self.expect(";")
            return Assign(e, value, line=line)
        self.expect(";")
        return ExprStmt(e, line=line)

    def _try_decl(self, line: int) -> Optional[VarDecl]:
        save = self.pos
        try:
            typ, strong = self.parse_type()
            name = self.ident()
        except ParseError:
            self.pos = save
            return None
        if self.accept(";"):
            return VarDecl(name, typ, None, strong, line=line)
        if self.accept("="):
            init = self.parse_expr()
            self.expect(";")
            return VarDecl(name, typ, init, strong, line=line)
        self.pos = save
        return None

    def _skip_extent(self, start: int) -> int:
        depth = 0
        i = start
        while i < self.limit:
            t = self.toks[i]
            if t.kind == "OP" and t.text in "([{":
                depth += 1
            elif t.kind == "OP" and t.text in ")]}":
                depth -= 1
                if depth < 0:
                    return max(i, start + 1)
                if t.text == "}" and depth == 0:
                    nxt = self.toks[i + 1] if i + 1 < self.limit else None
                    if not (nxt is not None and nxt.kind == "IDENT" and nxt.text == "else"):
                        return i + 1
            elif t.kind == "OP" and t.text == ";" and depth == 0:
                return i + 1
            i += 1
        return self.limit

    def _recover(self, start: int, end: int) -> List[Stmt]:
        line = self.toks[start].line
        found: List[Stmt] = []
        saved_limit = self.limit
        i = start
        try:
            while i < end:
                t = self.toks[i]
                prev = self.toks[i - 1].text if i > start else ""
                if t.kind == "IDENT" and t.text not in KEYWORDS and prev not in (".", "->"):
                    self.pos, self.limit = i, end
                    try:
                        e = self.parse_postfix()
                    except ParseError:
                        e = None
                    if e is not None and any(isinstance(x, Call) for x in iter_exprs(e)):
                        found.append(ExprStmt(e, line=self.toks[i].line))
                        i = self.pos
                        continue
                i += 1
        finally:
            self.limit = saved_limit
        if found:
            return found
        return [Opaque(" ".join(t.text for t in self.toks[start:end]), line=line)]


# ---------------------------------------------------------------------------


class JavaParser(_Parser):
    language = Language.JAVA
    MODIFIERS = frozenset(
        {"public", "private", "protected", "static", "abstract", "final", "native", "synchronized", "transient"}
    )

    def parse_unit(self) -> SourceUnit:
        self.expect("package")
        package = self.dotted_name()
        self.expect(";")
        types = []
        while self.tok().kind != "EOF":
            types.append(self.parse_type_decl(package, self.parse_modifiers()))
        return SourceUnit(self.path, Language.JAVA, package, tuple(types))

    def parse_modifiers(self) -> frozenset:
        mods = set()
        while self.tok().kind == "IDENT" and self.tok().text in self.MODIFIERS:
            mods.add(self.advance().text)
        return frozenset(mods)

    def parse_type_decl(self, outer: str, mods: frozenset) -> TypeDecl:
        line = self.tok().line
        if self.accept("class"):
            kind = TypeKind.CLASS
        elif self.accept("interface"):
            kind = TypeKind.INTERFACE
        else:
            self.fail("'class' or 'interface'")
        name = self.ident()
        fqn = _join(outer, name)
        extends = None
        implements: List[str] = []
        if self.accept("extends"):
            extends = self.dotted_name()
            if kind is TypeKind.INTERFACE:
                while self.accept(","):
                    implements.append(self.dotted_name())
        if self.accept("implements"):
            implements.append(self.dotted_name())
            while self.accept(","):
                implements.append(self.dotted_name())
        self.expect("{")
        fields, methods, nested = [], [], []
        while not self.accept("}"):
            mods = self.parse_modifiers()
            if self.at("class") or self.at("interface"):
                nested.append(self.parse_type_decl(fqn, mods))
                continue
            mline = self.tok().line
            if self.at(name) and self.at("(", 1):
                self.pos += 1
                ret, mname, strong = "", name, False
            else:
                ret, strong = self.parse_type()
                mname = self.ident()
            if self.at("("):
                params = self.parse_params()
                if self.accept(";"):
                    body = None
                elif kind is TypeKind.INTERFACE:
                    self.fail("';' (interface methods are declarations)")
                else:
                    body = self.parse_block()
                public = "public" in mods or (
                    kind is TypeKind.INTERFACE and not ({"private", "protected"} & mods)
                )
                methods.append(
                    MethodDecl(
                        fqn, mname, params, ret,
                        Visibility.PUBLIC if public else Visibility.NONPUBLIC,
                        body, False, "static" in mods, line=mline,
                    )
                )
            else:
                init = self.parse_expr() if self.accept("=") else None
                self.expect(";")
                fields.append(FieldDecl(mname, ret, init, strong, "static" in mods))
        return TypeDecl(
            fqn, name, kind, extends, tuple(implements), tuple(fields), tuple(methods), tuple(nested), line=line
        )


class CppParser(_Parser):
    language = Language.CPP
    FN_MODIFIERS = frozenset({"static", "inline", "virtual", "explicit", "extern"})

    def parse_unit(self) -> SourceUnit:
        self.namespace: Optional[str] = None
        self.types: List[TypeDecl] = []
        self.functions: List[MethodDecl] = []
        self.globals: list = []
        self.parse_decls([], top=True)
        ns = self.namespace or ""
        types, free = self._attach_out_of_line(ns)
        return SourceUnit(self.path, Language.CPP, ns, tuple(types), tuple(free), tuple(self.globals))

    def _set_namespace(self, ns: List[str]):
        name = ".".join(ns)
        if self.namespace is not None and self.namespace != name:
            self.fail(f"single namespace per unit ({self.namespace!r})")
        self.namespace = name

    def parse_decls(self, ns: List[str], top: bool):
        while True:
            if top and self.tok().kind == "EOF":
                return
            if not top and self.at("}"):
                return
            self.parse_decl(ns)

    def parse_decl(self, ns: List[str]):
        prefix = ".".join(ns)
        if self.accept("namespace"):
            inner = ns + [self.ident()]
            self.expect("{")
            self.parse_decls(inner, top=False)
            self.expect("}")
            self.accept(";")
            return
        if self.accept("using"):
            self.expect("namespace")
            self.ident()
            self.expect(";")
            return
        if self.at("class") or self.at("struct"):
            self._set_namespace(ns)
            self.types.append(self.parse_class(prefix))
            self.expect(";")
            return
        save = self.pos
        self.accept("static")
        if self.at("const") and self.at("JNINativeMethod", 1):
            self._set_namespace(ns)
            self.globals.append(self.parse_jni_table())
            return
        if self.at("const") and self.at("char", 1) and self.at("*", 2):
            self._set_namespace(ns)
            self.globals.append(self.parse_class_path())
            return
        self.pos = save
        self._set_namespace(ns)
        self.functions.append(self.parse_function(prefix))

    def parse_jni_table(self) -> JniTable:
        line = self.tok().line
        self.expect("const")
        self.expect("JNINativeMethod")
        name = self.ident()
        self.expect("[")
        self.expect("]")
        self.expect("=")
        self.expect("{")
        entries = []
        while not self.at("}"):
            if entries:
                self.expect(",")
                if self.at("}"):
                    break
            self.expect("{")
            java_name = self._string()
            self.expect(",")
            sig = self._string()
            self.expect(",")
            self.expect("(")
            self.expect("void")
            self.expect("*")
            self.expect(")")
            fn = self.ident()
            self.expect("}")
            entries.append(JniEntry(java_name, sig, fn))
        self.expect("}")
        self.expect(";")
        return JniTable(name, tuple(entries), line=line)

    def _string(self) -> str:
        t = self.tok()
        if t.kind != "STR":
            self.fail("string literal")
        self.pos += 1
        return t.value

    def parse_class_path(self) -> ClassPathConst:
        line = self.tok().line
        self.expect("const")
        self.expect("char")
        self.expect("*")
        self.accept("const")
        name = self.ident()
        self.expect("=")
        value = self._string()
        self.expect(";")
        return ClassPathConst(name, value, line=line)

    def parse_class(self, outer: str) -> TypeDecl:
        line = self.tok().line
        is_struct = self.advance().text == "struct"
        name = self.ident()
        fqn = _join(outer, name)
        bases: List[str] = []
        if self.accept(":"):
            while True:
                for access in ("public", "private", "protected", "virtual"):
                    self.accept(access)
                bases.append(self.dotted_name())
                if not self.accept(","):
                    break
        self.expect("{")
        public = is_struct
        fields, methods, nested = [], [], []
        while not self.accept("}"):
            if self.tok().text in ("public", "private", "protected") and self.at(":", 1):
                public = self.advance().text == "public"
                self.pos += 1
                continue
            if self.at("class") or self.at("struct"):
                nested.append(self.parse_class(fqn))
                self.expect(";")
                continue
            mods = set()
            while self.tok().kind == "IDENT" and self.tok().text in self.FN_MODIFIERS:
                mods.add(self.advance().text)
            mline = self.tok().line
            if self.at(name) and self.at("(", 1):
                self.pos += 1
                ret, mname, strong = "", name, False
            else:
                ret, strong = self.parse_type()
                mname = self.ident()
            if self.at("("):
                params = self.parse_params()
                self._method_suffix()
                body = None if self.accept(";") else self.parse_block()
                methods.append(
                    MethodDecl(
                        fqn, mname, params, ret,
                        Visibility.PUBLIC if public else Visibility.NONPUBLIC,
                        body, False, "static" in mods, line=mline,
                    )
                )
            else:
                init = self.parse_expr() if self.accept("=") else None
                self.expect(";")
                fields.append(FieldDecl(mname, ret, init, strong, "static" in mods))
        return TypeDecl(
            fqn, name, TypeKind.CLASS, bases[0] if bases else None, tuple(bases[1:]),
            tuple(fields), tuple(methods), tuple(nested), line=line,
        )

    def _method_suffix(self):
        while self.accept("const") or self.accept("override"):
            pass
        if self.at("=") and self.tok(1).kind == "INT" and self.tok(1).value == 0:
            self.pos += 2

    def parse_function(self, ns_prefix: str) -> MethodDecl:
        mods = set()
        while self.tok().kind == "IDENT" and self.tok().text in self.FN_MODIFIERS:
            mods.add(self.advance().text)
        line = self.tok().line
        if self.at_ident() and self.at("::", 1) and self.tok(2).text == self.tok().text and self.at("(", 3):
            cls = self.ident()
            self.expect("::")
            name = self.ident()
            ret, qual = "", [cls]
        else:
            ret, _ = self.parse_type()
            qual = [self.ident()]
            while self.accept("::"):
                qual.append(self.ident())
            name = qual.pop()
        params = self.parse_params()
        self._method_suffix()
        body = None if self.accept(";") else self.parse_block()
        if qual:
            owner = _join(ns_prefix, ".".join(qual))
            return MethodDecl(owner, name, params, ret, Visibility.PUBLIC, body, True, "static" in mods, line=line)
        return MethodDecl(None, name, params, ret, Visibility.PUBLIC, body, False, "static" in mods, line=line)

    def _attach_out_of_line(self, ns: str):
        types = list(self.types)
        free: List[MethodDecl] = []

        def attach(t: TypeDecl, m: MethodDecl) -> Optional[TypeDecl]:
            if t.fqn == m.owner:
                methods = list(t.methods)
                for i, d in enumerate(methods):
                    if d.name == m.name and d.arity == m.arity and d.body is None:
                        methods[i] = dataclasses.replace(m, visibility=d.visibility, is_static=d.is_static or m.is_static)
                        return dataclasses.replace(t, methods=tuple(methods))
                return dataclasses.replace(t, methods=t.methods + (m,))
            for j, inner in enumerate(t.nested):
                new_inner = attach(inner, m)
                if new_inner is not None:
                    nested = list(t.nested)
                    nested[j] = new_inner
                    return dataclasses.replace(t, nested=tuple(nested))
            return None

        for m in self.functions:
            if m.owner is None:
                free.append(m)
                continue
            for i, t in enumerate(types):
                new_t = attach(t, m)
                if new_t is not None:
                    types[i] = new_t
                    break
            else:
                free.append(m)
        return types, free


def parse_java(source: str, path: str = "<string>") -> SourceUnit:
    return JavaParser(source, path).parse_unit()


def parse_cpp(source: str, path: str = "<string>") -> SourceUnit:
    return CppParser(source, path).parse_unit()


def parse_source(source: str, path: str) -> SourceUnit:
    """Dispatch on the corpus file extension (``.mjava`` / ``.mcpp``)."""
    parser: Callable[[str, str], SourceUnit] = parse_cpp if path.endswith(".mcpp") else parse_java
    return parser(source, path)
