"""A small s-expression reader that keeps source positions for error messages."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ParseError


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int
    col: int


SExpr = Union[Token, SList]


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
        elif ch.isspace():
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            i += 1
            col += 1
        else:
            start, start_col = i, col
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, start_col))
    return tokens


def read_all(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    out: list[SExpr] = []
    stack: list[tuple[Token, list[SExpr]]] = []
    for tok in tokens:
        if tok.text == "(":
            stack.append((tok, []))
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            open_tok, items = stack.pop()
            node = SList(tuple(items), open_tok.line, open_tok.col)
            (stack[-1][1] if stack else out).append(node)
        else:
            (stack[-1][1] if stack else out).append(tok)
    if stack:
        tok = stack[-1][0]
        raise ParseError("unclosed '('", tok.line, tok.col)
    return out


def pos_of(x: SExpr) -> tuple[int, int]:
    return x.line, x.col


def head(x: SExpr) -> str | None:
    if isinstance(x, SList) and x.items and isinstance(x.items[0], Token):
        return x.items[0].text
    return None
