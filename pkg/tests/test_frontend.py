import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlangperm.frontend import (
    DuplicateType, Language, MethodDecl, MethodRef, ParseError, SourceUnit, TypeDecl,
    TypeKind, UNKNOWN, Visibility, build_symbol_table, parse_cpp, parse_java,
    parse_source, pretty_print,
)
from xlangperm.frontend.ast import (
    Assign, Binary, Call, ExprStmt, FieldAccess, Ident, If, IntLit, New, Opaque,
    Return, StrLit, Throw, Unary, VarDecl, calls_in_body, iter_stmts,
)

from conftest import PARTS

FIXTURE_FILES = sorted(p for p in PARTS.rglob("*") if p.suffix in (".mjava", ".mcpp"))


def _rel(p):
    return p.relative_to(PARTS).as_posix()


@pytest.mark.parametrize("path", FIXTURE_FILES, ids=_rel)
def test_fixture_files_round_trip(path):
    unit = parse_source(path.read_text(), _rel(path))
    again = parse_source(pretty_print(unit), _rel(path))
    assert again == unit
    assert pretty_print(again) == pretty_print(unit)


@pytest.mark.parametrize("path", FIXTURE_FILES, ids=_rel)
def test_fixture_files_have_no_opaque_statements(path):
    unit = parse_source(path.read_text(), _rel(path))
    methods = list(unit.all_methods()) + list(unit.free_functions)
    assert not [s for m in methods for s in iter_stmts(m.body) if isinstance(s, Opaque)]


# -- hypothesis round trip ---------------------------------------------------

NAMES = st.sampled_from(["a", "b", "mode", "data", "mRemote", "client", "x1"])
METHODS = st.sampled_from(["foo", "bar", "connect", "getService", "setDataSource"])
TYPES = st.sampled_from(["int", "String", "Parcel", "IBinder", "Client"])
TEXT = st.text(alphabet="abcXYZ._ /", max_size=8)


def exprs(lang):
    leaves = st.one_of(
        NAMES.map(Ident),
        TEXT.map(StrLit),
        st.integers(min_value=0, max_value=999).map(IntLit),
    )

    def extend(inner):
        arrow = st.booleans() if lang is Language.CPP else st.just(False)
        args = st.lists(inner, max_size=3).map(tuple)
        return st.one_of(
            st.builds(Call, st.none(), METHODS, args, st.just(False)),
            st.builds(Call, NAMES.map(Ident), METHODS, args, arrow),
            st.builds(New, TYPES, args),
            st.builds(FieldAccess, NAMES.map(Ident), NAMES, arrow),
            st.builds(Unary, st.just("!"), inner),
            st.builds(Binary, st.sampled_from(["==", "!=", "&&", "||"]), inner, inner),
        )

    return st.recursive(leaves, extend, max_leaves=6)


def stmts(lang):
    e = exprs(lang)
    strong = st.booleans() if lang is Language.CPP else st.just(False)
    simple = st.one_of(
        st.builds(VarDecl, NAMES, TYPES, st.one_of(st.none(), e), strong),
        st.builds(Assign, NAMES.map(Ident), e),
        st.builds(ExprStmt, st.builds(Call, st.none(), METHODS, st.lists(e, max_size=2).map(tuple))),
        st.builds(Return, st.one_of(st.none(), e)),
        st.builds(Throw, st.builds(New, st.just("SecurityException"), st.lists(e, max_size=1).map(tuple))),
    )

    def extend(inner):
        block = st.lists(inner, max_size=3).map(tuple)
        return st.builds(If, e, block, block)

    return st.recursive(simple, extend, max_leaves=6)


def _unit(lang, body):
    if lang is Language.JAVA:
        m = MethodDecl("p.q.C", "m", (), "void", Visibility.PUBLIC, body=body)
        t = TypeDecl("p.q.C", "C", TypeKind.CLASS, methods=(m,))
        return SourceUnit("x.mjava", lang, "p.q", (t,))
    m = MethodDecl(None, "m", (), "void", Visibility.PUBLIC, body=body)
    return SourceUnit("x.mcpp", lang, "", free_functions=(m,))


@settings(max_examples=150, deadline=None)
@given(st.lists(stmts(Language.JAVA), max_size=4).map(tuple))
def test_java_print_parse_round_trip(body):
    unit = _unit(Language.JAVA, body)
    assert parse_java(pretty_print(unit), "x.mjava") == unit


@settings(max_examples=150, deadline=None)
@given(st.lists(stmts(Language.CPP), max_size=4).map(tuple))
def test_cpp_print_parse_round_trip(body):
    unit = _unit(Language.CPP, body)
    assert parse_cpp(pretty_print(unit), "x.mcpp") == unit


# -- parsing details ---------------------------------------------------------


def test_java_unit_structure():
    unit = parse_java(
        "package a.b;\n"
        "interface IFoo { int go(int x); class Stub implements IFoo { public int go(int x) { return x; } } }\n"
        "class Foo extends Base implements IFoo, Other {\n"
        "    private IFoo mFoo;\n"
        "    public int go(int x) { return mFoo.go(x); }\n"
        "    private static native void n(long t);\n"
        "}\n",
        "a/b/Foo.mjava",
    )
    assert unit.package_or_namespace == "a.b"
    iface, foo = unit.types
    assert iface.kind is TypeKind.INTERFACE and iface.methods[0].body is None
    assert iface.nested[0].fqn == "a.b.IFoo.Stub"
    assert foo.extends == "Base" and foo.implements == ("IFoo", "Other")
    go, n = foo.methods
    assert go.visibility is Visibility.PUBLIC and go.arity == 1
    assert n.body is None and n.is_static


def test_cpp_out_of_line_method_and_strong_pointer():
    unit = parse_cpp(
        "namespace android {\n"
        "class Svc : public BnSvc { public: status_t go(int x); };\n"
        "status_t Svc::go(int x) {\n"
        "    sp<IFoo> foo = interface_cast<IFoo>(binder);\n"
        "    foo->run(x);\n"
        "    return NO_ERROR;\n"
        "}\n"
        "}\n",
        "svc.mcpp",
    )
    (t,) = unit.types
    assert t.fqn == "android.Svc" and t.extends == "BnSvc"
    (m,) = t.methods  # the definition is merged into its in-unit declaration
    assert m.owner == "android.Svc" and m.is_out_of_line and m.visibility is Visibility.PUBLIC
    decl = m.body[0]
    assert isinstance(decl, VarDecl) and decl.strong and decl.declared_type == "IFoo"
    assert [c.name for c in calls_in_body(m.body)] == ["interface_cast", "run"]


def test_string_wrappers_unwrap_to_literals():
    unit = parse_cpp('void f() { checkCallingPermission(String16("android.permission.X")); }', "f.mcpp")
    (call,) = calls_in_body(unit.free_functions[0].body)
    assert call.args == (StrLit("android.permission.X"),)


def test_jni_globals_recognized():
    unit = parse_cpp(
        'static const char* const kPath = "android/os/Foo";\n'
        'static const JNINativeMethod gMethods[] = {\n'
        '    {"native_go", "(IJ)V", (void*)android_os_Foo_go},\n'
        '};\n',
        "jni.mcpp",
    )
    path, table = unit.globals
    assert path.value == "android/os/Foo"
    assert table.entries[0].java_name == "native_go" and table.entries[0].native_function == "android_os_Foo_go"


def test_unparseable_statement_keeps_recoverable_calls():
    unit = parse_cpp("void f(int m) { if (m > 1) { foo(m); } x = a + b; }", "f.mcpp")
    body = unit.free_functions[0].body
    assert body[0] == ExprStmt(Call(None, "foo", (Ident("m"),)))
    assert isinstance(body[1], Opaque)


@pytest.mark.parametrize("source", [
    "package a; class {",
    "package a; class C { public void m( }",
    "package a; class C extends { }",
])
def test_top_level_syntax_errors_carry_location(source):
    with pytest.raises(ParseError) as info:
        parse_java(source, "bad.mjava")
    assert info.value.path == "bad.mjava" and info.value.line >= 1 and info.value.expected


# -- symbol table ------------------------------------------------------------


def test_symbol_table_resolution_and_hierarchy():
    a = parse_java("package p; interface I { void go(); } class A implements I { public void go() { } }", "p/A.mjava")
    b = parse_java("package q; class B extends p.A { } class C extends B { }", "q/B.mjava")
    st_ = build_symbol_table([a, b])
    assert st_.resolve_type("A") == "p.A"
    assert st_.resolve_type("Nope") is UNKNOWN
    assert st_.ancestors("q.C") == ["q.B", "p.A", "p.I"]
    assert st_.descendants("p.I") == ["p.A", "q.B", "q.C"]
    assert MethodRef.of(st_.find_in_hierarchy("q.C", "go", 0)) == MethodRef("p.A", "go", 0)
    assert st_.lookup("p.A", "go", 1) is UNKNOWN


def test_duplicate_type_across_files():
    a = parse_java("package p; class A { }", "one.mjava")
    b = parse_java("package p; class A { }", "two.mjava")
    with pytest.raises(DuplicateType):
        build_symbol_table([a, b])


@pytest.mark.parametrize("text", ["android.media.MediaPlayer.setDataSource/1", "free/0", "a.B.B/3"])
def test_method_ref_parse_inverts_str(text):
    assert str(MethodRef.parse(text)) == text


@pytest.mark.parametrize("text", ["noarity", "a.b/x", "/1"])
def test_method_ref_parse_rejects_malformed(text):
    with pytest.raises(ValueError):
        MethodRef.parse(text)
