"""Dialect parsers, printer and symbol table."""
from .ast import Language, MethodDecl, SourceUnit, TypeDecl, TypeKind, Visibility
from .lexer import ParseError
from .parser import parse_cpp, parse_java, parse_source
from .printer import pretty_print
from .symbols import UNKNOWN, DuplicateType, MethodRef, SymbolTable, build_symbol_table

__all__ = [
    "DuplicateType", "Language", "MethodDecl", "MethodRef", "ParseError", "SourceUnit",
    "SymbolTable", "TypeDecl", "TypeKind", "UNKNOWN", "Visibility", "build_symbol_table",
    "parse_cpp", "parse_java", "parse_source", "pretty_print",
]
