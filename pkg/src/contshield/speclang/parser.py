"""Lexer and recursive-descent parser for ``.shieldspec`` sources.

Grammar (comments start with ``#`` and run to end of line):

    spec      := statement*
    statement := decl | assume | guarantee
    decl      := ("input" | "output") IDENT "in" "[" bound "," bound "]"
                 ("unit" IDENT)? ("init" number)? ";"
    assume    := "assume" formula ";"
    guarantee := "guarantee" formula ";"

    formula   := disjunction ("->" formula)?          # right associative
    disjunction := conjunction ("|" conjunction)*
    conjunction := unary ("&" unary)*
    unary     := "!" unary
               | "G" unary
               | "X" unary
               | "GB" "(" INT "," INT ")" unary
               | "(" formula ")"
               | atom
    atom      := "in" "(" arith "," number "," number ")"
               | arith cmp arith
    cmp       := "==" | "<=" | "<" | ">=" | ">"

    arith     := term (("+" | "-") term)*
    term      := factor (("*" | "/") factor)*
    factor    := number | IDENT | "prev" "(" IDENT ")"
               | ("sin" | "cos" | "abs") "(" arith ")"
               | "-" factor | "(" arith ")"
    bound     := number | "inf" | "-inf"

``prev`` applies to a variable name only, so look-back depth is capped at
one step by the grammar itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .ast import (
    Always,
    AlwaysBounded,
    And,
    ArithExpr,
    Atom,
    BinOp,
    Cmp,
    Const,
    Formula,
    Func,
    FUNC_NAMES,
    Implies,
    Member,
    Neg,
    Next,
    Not,
    Or,
    SpecDocument,
    SpecSyntaxError,
    SpecValidationError,
    Var,
    VarDecl,
    VarRole,
    formula_vars,
)
from . import analysis


class TT(Enum):
    IDENT = auto()
    NUMBER = auto()
    KEYWORD = auto()
    OP = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    COMMA = auto()
    SEMI = auto()
    EOF = auto()


KEYWORDS = {
    "input", "output", "assume", "guarantee", "in", "unit", "init",
    "prev", "sin", "cos", "abs", "inf", "G", "X", "GB",
}

_TWO_CHAR_OPS = ("->", "==", "<=", ">=")
_ONE_CHAR_OPS = "<>&|!+-*/"


@dataclass(frozen=True)
class Token:
    kind: TT
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def push(kind: TT, s: str):
        tokens.append(Token(kind, s, line, col))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_OPS:
            push(TT.OP, two)
            i += 2
            col += 2
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and (text[i].isdigit() or text[i] == "."):
                i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            s = text[start:i]
            push(TT.NUMBER, s)
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            s = text[start:i]
            push(TT.KEYWORD if s in KEYWORDS else TT.IDENT, s)
            col += i - start
            continue
        if ch in _ONE_CHAR_OPS:
            push(TT.OP, ch)
        elif ch == "(":
            push(TT.LPAREN, ch)
        elif ch == ")":
            push(TT.RPAREN, ch)
        elif ch == "[":
            push(TT.LBRACKET, ch)
        elif ch == "]":
            push(TT.RBRACKET, ch)
        elif ch == ",":
            push(TT.COMMA, ch)
        elif ch == ";":
            push(TT.SEMI, ch)
        else:
            raise SpecSyntaxError(f"unexpected character {ch!r}", line, col)
        i += 1
        col += 1

    tokens.append(Token(TT.EOF, "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self._toks = tokens
        self._pos = 0

    def _peek(self) -> Token:
        return self._toks[self._pos]

    def _advance(self) -> Token:
        tok = self._toks[self._pos]
        self._pos += 1
        return tok

    def _error(self, message: str) -> SpecSyntaxError:
        tok = self._peek()
        return SpecSyntaxError(message, tok.line, tok.col)

    def _expect(self, kind: TT, text: str | None = None) -> Token:
        tok = self._peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind.name
            got = tok.text or "end of input"
            raise self._error(f"expected {want!r}, got {got!r}")
        return self._advance()

    def _at(self, kind: TT, text: str | None = None) -> bool:
        tok = self._peek()
        return tok.kind == kind and (text is None or tok.text == text)

    # -- top level ----------------------------------------------------------

    def parse_document(self) -> SpecDocument:
        decls: list[VarDecl] = []
        assumptions: list[Formula] = []
        guarantees: list[Formula] = []
        while not self._at(TT.EOF):
            tok = self._peek()
            if tok.kind == TT.KEYWORD and tok.text in ("input", "output"):
                decls.append(self._parse_decl())
            elif self._at(TT.KEYWORD, "assume"):
                self._advance()
                assumptions.append(self.parse_formula())
                self._expect(TT.SEMI)
            elif self._at(TT.KEYWORD, "guarantee"):
                self._advance()
                guarantees.append(self.parse_formula())
                self._expect(TT.SEMI)
            else:
                raise self._error(
                    "expected 'input', 'output', 'assume' or 'guarantee'")
        return _finalize(tuple(decls), tuple(assumptions), tuple(guarantees))

    def _parse_decl(self) -> VarDecl:
        role = VarRole.ENVIRONMENT if self._advance().text == "input" else VarRole.SYSTEM
        name_tok = self._expect(TT.IDENT)
        self._expect(TT.KEYWORD, "in")
        self._expect(TT.LBRACKET)
        lo = self._parse_bound()
        self._expect(TT.COMMA)
        hi = self._parse_bound()
        self._expect(TT.RBRACKET)
        unit = None
        init = None
        if self._at(TT.KEYWORD, "unit"):
            self._advance()
            unit = self._advance().text
        if self._at(TT.KEYWORD, "init"):
            self._advance()
            init = self._parse_signed_number()
        self._expect(TT.SEMI)
        if not lo <= hi:
            raise self._error(f"empty domain for {name_tok.text!r}")
        return VarDecl(name_tok.text, role, lo, hi, unit, init)

    def _parse_bound(self) -> float:
        neg = False
        if self._at(TT.OP, "-"):
            self._advance()
            neg = True
        if self._at(TT.KEYWORD, "inf"):
            self._advance()
            return float("-inf") if neg else float("inf")
        tok = self._expect(TT.NUMBER)
        v = float(tok.text)
        return -v if neg else v

    def _parse_signed_number(self) -> float:
        neg = False
        if self._at(TT.OP, "-"):
            self._advance()
            neg = True
        tok = self._expect(TT.NUMBER)
        v = float(tok.text)
        return -v if neg else v

    # -- formulas ------------------------------------------------------------

    def parse_formula(self) -> Formula:
        left = self._parse_disjunction()
        if self._at(TT.OP, "->"):
            self._advance()
            return Implies(left, self.parse_formula())
        return left

    def _parse_disjunction(self) -> Formula:
        parts = [self._parse_conjunction()]
        while self._at(TT.OP, "|"):
            self._advance()
            parts.append(self._parse_conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def _parse_conjunction(self) -> Formula:
        parts = [self._parse_unary()]
        while self._at(TT.OP, "&"):
            self._advance()
            parts.append(self._parse_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def _parse_unary(self) -> Formula:
        if self._at(TT.OP, "!"):
            self._advance()
            return Not(self._parse_unary())
        if self._at(TT.KEYWORD, "G"):
            self._advance()
            return Always(self._parse_unary())
        if self._at(TT.KEYWORD, "X"):
            self._advance()
            return Next(self._parse_unary())
        if self._at(TT.KEYWORD, "GB"):
            self._advance()
            self._expect(TT.LPAREN)
            lo = self._parse_int()
            self._expect(TT.COMMA)
            hi = self._parse_int()
            self._expect(TT.RPAREN)
            if not (1 <= lo <= hi):
                raise self._error(f"GB bounds must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
            return AlwaysBounded(lo, hi, self._parse_unary())
        if self._at(TT.LPAREN):
            # Either a parenthesized formula or a parenthesized arithmetic
            # expression starting a comparison atom; backtrack on failure.
            mark = self._pos
            self._advance()
            try:
                inner = self.parse_formula()
                self._expect(TT.RPAREN)
                if self._peek().kind == TT.OP and self._peek().text in ("<", "<=", "==", ">=", ">", "+", "-", "*", "/"):
                    raise self._error("atom continues after ')'")
                return inner
            except SpecSyntaxError:
                self._pos = mark
                return self._parse_atom()
        return self._parse_atom()

    def _parse_int(self) -> int:
        tok = self._expect(TT.NUMBER)
        if "." in tok.text or "e" in tok.text or "E" in tok.text:
            raise SpecSyntaxError("expected an integer", tok.line, tok.col)
        return int(tok.text)

    def _parse_atom(self) -> Formula:
        if self._at(TT.KEYWORD, "in"):
            self._advance()
            self._expect(TT.LPAREN)
            expr = self.parse_arith()
            self._expect(TT.COMMA)
            lo = self._parse_signed_number()
            self._expect(TT.COMMA)
            hi = self._parse_signed_number()
            self._expect(TT.RPAREN)
            if not lo < hi:
                raise self._error("membership interval must satisfy lo < hi")
            return Atom(Member(expr, lo, hi))
        lhs = self.parse_arith()
        tok = self._peek()
        if tok.kind != TT.OP or tok.text not in ("<", "<=", "==", ">=", ">"):
            raise self._error("expected a comparison operator")
        self._advance()
        rhs = self.parse_arith()
        return Atom(Cmp(tok.text, lhs, rhs))

    # -- arithmetic ----------------------------------------------------------

    def parse_arith(self) -> ArithExpr:
        left = self._parse_term()
        while self._at(TT.OP, "+") or self._at(TT.OP, "-"):
            op = self._advance().text
            left = BinOp(op, left, self._parse_term())
        return left

    def _parse_term(self) -> ArithExpr:
        left = self._parse_factor()
        while self._at(TT.OP, "*") or self._at(TT.OP, "/"):
            op = self._advance().text
            left = BinOp(op, left, self._parse_factor())
        return left

    def _parse_factor(self) -> ArithExpr:
        if self._at(TT.OP, "-"):
            self._advance()
            child = self._parse_factor()
            if isinstance(child, Const):
                return Const(-child.value)
            return Neg(child)
        if self._at(TT.NUMBER):
            return Const(float(self._advance().text))
        if self._at(TT.KEYWORD, "prev"):
            self._advance()
            self._expect(TT.LPAREN)
            name = self._expect(TT.IDENT).text
            self._expect(TT.RPAREN)
            return Var(name, prev=True)
        for fn in FUNC_NAMES:
            if self._at(TT.KEYWORD, fn):
                self._advance()
                self._expect(TT.LPAREN)
                arg = self.parse_arith()
                self._expect(TT.RPAREN)
                return Func(fn, arg)
        if self._at(TT.LPAREN):
            self._advance()
            inner = self.parse_arith()
            self._expect(TT.RPAREN)
            return inner
        if self._at(TT.IDENT):
            return Var(self._advance().text)
        raise self._error("expected a number, variable or function call")


def _finalize(decls: tuple[VarDecl, ...], assumptions: tuple[Formula, ...],
              guarantees: tuple[Formula, ...]) -> SpecDocument:
    """Validate names/domains, derive dynamics bindings and attach warnings."""
    seen: set[str] = set()
    for d in decls:
        if d.name in seen:
            raise SpecValidationError(f"variable {d.name!r} declared twice")
        seen.add(d.name)
        if d.role is VarRole.SYSTEM and not (d.lo > float("-inf") and d.hi < float("inf")):
            raise SpecValidationError(
                f"system variable {d.name!r} must have a bounded domain")

    for f in list(assumptions) + list(guarantees):
        for name in sorted(formula_vars(f)):
            if name not in seen:
                raise SpecValidationError(f"undeclared variable {name!r}")

    doc = SpecDocument(decls, assumptions, guarantees)
    bindings = analysis.derive_bindings(doc)
    warnings = []
    if not guarantees:
        warnings.append("document has no guarantees; every trace satisfies it")
    return SpecDocument(decls, assumptions, guarantees, bindings, tuple(warnings))


def parse_spec(text: str) -> SpecDocument:
    """Parse a ``.shieldspec`` source string into a validated document."""
    return _Parser(tokenize(text)).parse_document()


def parse_formula(text: str) -> Formula:
    """Parse a single formula (used by tests and tooling)."""
    p = _Parser(tokenize(text))
    f = p.parse_formula()
    p._expect(TT.EOF)
    return f
