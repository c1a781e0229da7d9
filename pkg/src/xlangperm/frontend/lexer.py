from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List


class ParseError(SyntaxError):
    """Token-level failure, carrying the corpus path, line and what was expected."""

    def __init__(self, path: str, line: int, expected: str, got: str = ""):
        self.path = path
        self.line = line
        self.expected = expected
        self.got = got
        msg = f"{path}:{line}: expected {expected}"
        if got:
            msg += f", got {got!r}"
        super().__init__(msg)


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, STR, INT, CHAR, OP, EOF
    text: str  # raw source text
    line: int
    value: object = None


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)*')
  | (?P<int>[0-9][0-9A-Za-z_.]*)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>::|->|==|!=|&&|\|\||\+\+|--|<=|>=|\+=|-=|[^\sA-Za-z0-9_])
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", '"': '"', "'": "'", "\\": "\\"}


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def escape(value: str) -> str:
    rev = {"\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0", '"': '\\"', "\\": "\\\\"}
    return '"' + "".join(rev.get(c, c) for c in value) + '"'


def tokenize(source: str, path: str = "<string>") -> List[Token]:
    tokens: List[Token] = []
    line = 1
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:  # unterminated string or comment
            raise ParseError(path, line, "token", source[pos : pos + 10])
        kind = m.lastgroup
        text = m.group()
        if kind == "str":
            tokens.append(Token("STR", text, line, unescape(text[1:-1])))
        elif kind == "char":
            tokens.append(Token("CHAR", text, line))
        elif kind == "int":
            try:
                value = int(text.rstrip("lLuU"), 0)
            except ValueError:
                value = None
            tokens.append(Token("INT", text, line, value))
        elif kind == "ident":
            tokens.append(Token("IDENT", text, line, text))
        elif kind == "op":
            tokens.append(Token("OP", text, line, text))
        line += text.count("\n")
        pos = m.end()
    tokens.append(Token("EOF", "", line))
    return tokens
