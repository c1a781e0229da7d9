"""Name lookups inside one method: locals, parameters, fields, written types."""
from __future__ import annotations

from typing import Dict, Optional, Tuple

from .frontend import UNKNOWN, Language, MethodDecl, MethodRef, SymbolTable
from .frontend.ast import FieldDecl, Ident, IntLit, VarDecl, iter_stmts

NULL_NAMES = frozenset({"NULL", "nullptr", "null"})


def context_of(symtab: SymbolTable, m: MethodDecl) -> str:
    """Scope used to resolve type names written inside ``m``."""
    if m.owner is not None:
        return m.owner
    unit = symtab.unit_of(MethodRef.of(m))
    return unit.package_or_namespace if unit is not None else ""


def language_of(symtab: SymbolTable, m: MethodDecl) -> Optional[Language]:
    return symtab.language_of(MethodRef.of(m))


def resolve_type_in(symtab: SymbolTable, m: MethodDecl, written: str):
    return symtab.resolve_type(written, context_of(symtab, m), language_of(symtab, m))


def local_types(m: MethodDecl) -> Dict[str, str]:
    """Declared type of every parameter and local of ``m`` (last one wins)."""
    out = {p.name: p.declared_type for p in m.params}
    for s in iter_stmts(m.body):
        if isinstance(s, VarDecl):
            out[s.name] = s.declared_type
    return out


def find_field(symtab: SymbolTable, owner: Optional[str], name: str) -> Optional[Tuple[str, FieldDecl]]:
    """The field ``name`` visible from methods of ``owner``.

    Searches the class, its supertypes, then lexically enclosing classes.
    Returns (declaring class fqn, field).
    """
    scope = owner
    while scope:
        for t in [scope] + symtab.ancestors(scope):
            decl = symtab.types.get(t)
            if decl is None:
                continue
            for f in decl.fields:
                if f.name == name:
                    return t, f
        scope = scope.rpartition(".")[0]
        if scope not in symtab.types:
            return None
    return None


def is_null(e) -> bool:
    return (isinstance(e, Ident) and e.name in NULL_NAMES) or (isinstance(e, IntLit) and e.value == 0)


def type_or_none(value) -> Optional[str]:
    return None if value is UNKNOWN else value
