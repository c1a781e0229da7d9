import pytest

from xlangperm.conditions import And, Not, Or, permission, pid_self, uid_eq
from xlangperm.diagnostics import DiagnosticSink
from xlangperm.frontend import Language, parse_cpp, parse_java
from xlangperm.guards import (
    GuardConfig, NegativeAtomRequired, extract_guard_condition, recognize_check,
)

CAMERA = "android.permission.CAMERA"


def _cpp(body, params="int x"):
    m = parse_cpp(f"status_t f({params}) {{\n{body}\n}}", "f.mcpp").free_functions[0]
    return m, m.body


def _java(body):
    unit = parse_java(f"package p; class C {{ public void f(int x) {{\n{body}\n}} }}", "C.mjava")
    m = unit.types[0].methods[0]
    return m, m.body


def _guard(body, lang=Language.CPP, index=None, **kw):
    m, stmts = _cpp(body) if lang is Language.CPP else _java(body)
    if index is None:
        index = next(i for i, s in enumerate(stmts) if type(s).__name__ == "If")
    return recognize_check(stmts[index], m, language=lang, **kw)


def test_pid_or_permission_guard():
    g = _guard(
        "const int callingPid = getCallingPid();\n"
        f'if (callingPid != getpid() && !checkCallingPermission(String16("{CAMERA}"))) {{\n'
        '    ALOGE("denied");\n'
        "    return PERMISSION_DENIED;\n"
        "}"
    )
    assert g.denial_value == "PERMISSION_DENIED"
    assert g.denial == And((Not(pid_self()), Not(permission(CAMERA))))
    assert extract_guard_condition(g) == Or((permission(CAMERA), pid_self()))


def test_else_branch_denial():
    g = _guard(
        f'if (checkCallingPermission(String16("{CAMERA}")) == PERMISSION_GRANTED) {{\n'
        "} else {\n"
        "    return -EPERM;\n"
        "}"
    )
    assert extract_guard_condition(g) == permission(CAMERA)


def test_throw_security_exception_in_java():
    g = _guard(
        'if (checkCallingOrSelfPermission("android.permission.INTERNET") != PERMISSION_GRANTED) {\n'
        '    throw new SecurityException("no");\n'
        "}",
        Language.JAVA,
    )
    assert g.denial_value == "throw SecurityException"
    assert extract_guard_condition(g) == permission("android.permission.INTERNET")


def test_uid_comparison():
    g = _guard("if (getCallingUid() != AID_MEDIA) {\n    return PERMISSION_DENIED;\n}")
    assert extract_guard_condition(g) == uid_eq("AID_MEDIA")


def test_non_check_parts_are_projected_out():
    g = _guard(
        f'if (clientUid == USE_CALLING_UID && !checkCallingPermission(String16("{CAMERA}"))) {{\n'
        "    return PERMISSION_DENIED;\n"
        "}"
    )
    assert extract_guard_condition(g) == permission(CAMERA)


@pytest.mark.parametrize("body", [
    "if (x == 0) {\n    return PERMISSION_DENIED;\n}",  # no check atom
    f'if (!checkCallingPermission(String16("{CAMERA}"))) {{\n    return BAD_VALUE;\n}}',  # not a denial
    f'if (!checkCallingPermission(String16("{CAMERA}"))) {{\n    foo();\n}}',  # does not end in denial
])
def test_not_guards(body):
    assert _guard(body) is None


def test_configurable_denial_constants():
    body = f'if (!checkCallingPermission(String16("{CAMERA}"))) {{\n    return BAD_VALUE;\n}}'
    cfg = GuardConfig(denial_constants=("BAD_VALUE",))
    assert _guard(body, config=cfg) is not None


def test_non_literal_permission_is_diagnosed():
    sink = DiagnosticSink()
    g = _guard("if (!checkCallingPermission(perm)) {\n    return PERMISSION_DENIED;\n}", diagnostics=sink, path="f.mcpp")
    assert g is None
    assert [d.code for d in sink.sorted()] == ["NONLITERAL"]


def test_guard_denying_when_atom_holds_is_rejected():
    g = _guard(f'if (checkCallingPermission(String16("{CAMERA}"))) {{\n    return PERMISSION_DENIED;\n}}')
    with pytest.raises(NegativeAtomRequired):
        extract_guard_condition(g)
