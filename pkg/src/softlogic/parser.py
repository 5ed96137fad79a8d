"""Concrete syntax for weighted formula programs (``.wfl`` files).

A program looks like::

    flavor psl
    atoms p q          # optional
    1 : p <-l q ^ 1
    2 : q <-l p        # exponent defaults to 1

Operators, loosest first: implications ``->l ->r ->s`` (right-associative)
and their reversed forms ``<-l <-r <-s``; disjunctions ``|l |m |p``;
conjunctions ``&l &m &p``; negations ``!s !m``. MLN programs use the plain
Boolean tokens ``! & | -> <-`` (the ``s``/``l`` suffixes are also accepted).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .formula import (
    ATOM_RE,
    Atom,
    Bin,
    Const,
    Formula,
    Neg,
    OperatorKind,
    as_literal,
    flatten,
    is_psl_rule,
    make_rule,
)
from .logics import Flavor, Program, ProgramError, WeightedFormula


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


_OP_TOKENS = sorted(
    [op.token for op in OperatorKind] + ["<-l", "<-r", "<-s", "!", "&", "|", "->", "<-"],
    key=len,
    reverse=True,
)
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<num>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<op>" + "|".join(re.escape(t) for t in _OP_TOKENS) + r")"
    r"|(?P<atom>" + ATOM_RE.pattern + r")"
    r"|(?P<punct>[():^-])"
)

_FUZZY_BY_TOKEN = {op.token: op for op in OperatorKind}
_REVERSED = {"<-l": "->l", "<-r": "->r", "<-s": "->s", "<-": "->"}
_MLN_DEFAULTS = {
    "!": OperatorKind.NEG_STANDARD,
    "!s": OperatorKind.NEG_STANDARD,
    "&": OperatorKind.CONJ_LUKASIEWICZ,
    "&l": OperatorKind.CONJ_LUKASIEWICZ,
    "|": OperatorKind.DISJ_LUKASIEWICZ,
    "|l": OperatorKind.DISJ_LUKASIEWICZ,
    "->": OperatorKind.IMPL_LUKASIEWICZ,
    "->l": OperatorKind.IMPL_LUKASIEWICZ,
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str, line: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


class _FormulaParser:
    def __init__(self, tokens: list[Token], flavor: Flavor | None, line: int):
        self.tokens = tokens
        self.pos = 0
        self.flavor = flavor
        self.line = line

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        if tok is None:
            tok = self.tokens[self.pos] if self.pos < len(self.tokens) else None
        col = tok.column if tok else (self.tokens[-1].column + len(self.tokens[-1].text) if self.tokens else 1)
        return ParseError(message, self.line, col)

    def operator(self, tok: Token):
        text = _REVERSED.get(tok.text, tok.text)
        if self.flavor is Flavor.MLN:
            if text not in _MLN_DEFAULTS:
                raise self.error(f"operator {tok.text!r} is not allowed in an MLN program", tok)
            return _MLN_DEFAULTS[text]
        if text not in _FUZZY_BY_TOKEN:
            raise self.error(f"operator {tok.text!r} needs a family suffix outside MLN programs", tok)
        return _FUZZY_BY_TOKEN[text]

    def parse(self) -> Formula:
        return self.implication()

    def implication(self) -> Formula:
        left = self.disjunction()
        tok = self.peek()
        if tok and tok.kind == "op" and tok.text.lstrip("<").startswith("-"):
            self.pos += 1
            op = self.operator(tok)
            right = self.implication()
            if tok.text.startswith("<-"):
                return Bin(op, right, left)
            return Bin(op, left, right)
        return left

    def _chain(self, prefix: str, sub) -> Formula:
        left = sub()
        while True:
            tok = self.peek()
            if not (tok and tok.kind == "op" and tok.text[0] == prefix):
                return left
            self.pos += 1
            op = self.operator(tok)
            left = Bin(op, left, sub())

    def disjunction(self) -> Formula:
        return self._chain("|", self.conjunction)

    def conjunction(self) -> Formula:
        return self._chain("&", self.unary)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of formula")
        if tok.kind == "op" and tok.text.startswith("!"):
            self.pos += 1
            return Neg(self.operator(tok), self.unary())
        if tok.kind == "atom":
            self.pos += 1
            return Atom(tok.text)
        if tok.kind == "num":
            self.pos += 1
            value = float(tok.text)
            if not 0.0 <= value <= 1.0:
                raise self.error(f"constant {tok.text} outside [0, 1]", tok)
            if self.flavor is Flavor.MLN and value not in (0.0, 1.0):
                raise self.error(f"MLN formulas only allow the constants 0 and 1, got {tok.text}", tok)
            return Const(value)
        if tok.text == "(":
            self.pos += 1
            f = self.implication()
            close = self.peek()
            if close is None or close.text != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return f
        raise self.error(f"unexpected {tok.text!r}", tok)


def parse_formula(text: str, flavor: Flavor | str | None = None) -> Formula:
    """Parse a single formula. Without a flavor the fuzzy (suffixed) tokens are required."""
    flavor = Flavor(flavor) if isinstance(flavor, str) else flavor
    tokens = tokenize(text)
    p = _FormulaParser(tokens, flavor, 1)
    f = p.parse()
    if p.pos != len(tokens):
        raise p.error(f"unexpected {tokens[p.pos].text!r}")
    return f


def _psl_desugar(f: Formula) -> Formula:
    """Allow a bare literal or Lukasiewicz clause in PSL programs: ``C`` means ``C <-l 1``."""
    lits = [as_literal(g) for g in flatten(f, OperatorKind.DISJ_LUKASIEWICZ)]
    if not is_psl_rule(f) and all(lit is not None for lit in lits):
        return make_rule(lits, [])
    return f


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for n, raw in enumerate(text.replace("\r\n", "\n").split("\n"), 1):
        line = _strip_comment(raw).rstrip()
        if line.strip():
            yield n, line


def parse_program(text: str) -> Program:
    lines = _lines(text)
    try:
        n, header = next(lines)
    except StopIteration:
        raise ParseError("empty program: expected 'flavor mln|psl|gpsl'", 1, 1) from None
    parts = header.split()
    if len(parts) != 2 or parts[0] != "flavor" or parts[1] not in {f.value for f in Flavor}:
        raise ParseError("first line must be 'flavor mln|psl|gpsl'", n, 1)
    flavor = Flavor(parts[1])

    declared: set[str] = set()
    formulas: list[WeightedFormula] = []
    for n, line in lines:
        if line.split(maxsplit=1)[0] == "atoms":
            line = line.strip()
            if formulas:
                raise ParseError("'atoms' must precede the formulas", n, 1)
            for name in line.split()[1:]:
                if not ATOM_RE.fullmatch(name):
                    raise ParseError(f"invalid atom name {name!r}", n, line.find(name) + 1)
                declared.add(name)
            continue
        formulas.append(_parse_rule_line(line, n, flavor, len(formulas) + 1))
    try:
        return Program(flavor, tuple(formulas), frozenset(declared))
    except ProgramError as exc:
        raise ParseError(str(exc)) from None


def _parse_rule_line(line: str, n: int, flavor: Flavor, index: int) -> WeightedFormula:
    tokens = tokenize(line, n)
    pos = 0
    sign = 1.0
    if tokens and tokens[0].text == "-":
        sign, pos = -1.0, 1
    if pos >= len(tokens) or tokens[pos].kind != "num":
        raise ParseError("expected 'WEIGHT : FORMULA [^ K]'", n, tokens[pos].column if pos < len(tokens) else 1)
    weight = sign * float(tokens[pos].text)
    pos += 1
    if pos >= len(tokens) or tokens[pos].text != ":":
        col = tokens[pos].column if pos < len(tokens) else tokens[pos - 1].column + len(tokens[pos - 1].text)
        raise ParseError("expected ':' after the weight", n, col)
    pos += 1
    body = tokens[pos:]
    exponent = 1
    if len(body) >= 2 and body[-2].text == "^":
        if flavor is Flavor.MLN:
            raise ParseError("MLN formulas carry no exponent", n, body[-2].column)
        if body[-1].text not in ("1", "2"):
            raise ParseError("exponent must be 1 or 2", n, body[-1].column)
        exponent = int(body[-1].text)
        body = body[:-2]
    if not body:
        raise ParseError("missing formula", n, len(line) + 1)
    p = _FormulaParser(body, flavor, n)
    f = p.parse()
    if p.pos != len(body):
        raise p.error(f"unexpected {body[p.pos].text!r}")
    if flavor is Flavor.PSL:
        f = _psl_desugar(f)
        if not is_psl_rule(f):
            raise ParseError(
                f"formula {index}: not a PSL rule (Lukasiewicz implication over literals)", n, body[0].column
            )
        if weight < 0:
            raise ParseError(f"formula {index}: PSL weights must be nonnegative", n, 1)
    return WeightedFormula(weight, f, exponent)


# ---------------------------------------------------------------------------
# Printing


def format_number(x: float) -> str:
    return np.format_float_positional(float(x), trim="-")


def print_formula(f: Formula) -> str:
    """Canonical, fully parenthesized text of ``f``."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return format_number(f.value)
    if isinstance(f, Neg):
        return f"{f.op.token} {print_formula(f.arg)}"
    return f"({print_formula(f.left)} {f.op.token} {print_formula(f.right)})"


def print_program(program: Program) -> str:
    lines = [f"flavor {program.flavor.value}"]
    if program.atoms:
        lines.append("atoms " + " ".join(program.signature))
    for wf in program.formulas:
        text = f"{format_number(wf.weight)} : {print_formula(wf.formula)}"
        if program.flavor is not Flavor.MLN:
            text += f" ^ {wf.exponent}"
        lines.append(text)
    return "\n".join(lines) + "\n"


def read_program(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


__all__ = [
    "ParseError",
    "parse_formula",
    "parse_program",
    "print_formula",
    "print_program",
    "read_program",
    "tokenize",
]
