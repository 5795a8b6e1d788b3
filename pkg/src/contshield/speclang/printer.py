"""Canonical pretty printer: one declaration or formula per line.

``parse_spec(format_spec(doc))`` reproduces ``doc`` structurally, which the
test suite checks on randomly generated documents.
"""

from __future__ import annotations

from .ast import (
    Always,
    AlwaysBounded,
    And,
    ArithExpr,
    Atom,
    Cmp,
    Const,
    Formula,
    Func,
    Implies,
    Member,
    Neg,
    Next,
    Not,
    Or,
    SpecDocument,
    Var,
    VarDecl,
    VarRole,
)

_ARITH_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num(v: float) -> str:
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return repr(v)


def format_arith(expr: ArithExpr, parent_prec: int = 0) -> str:
    if isinstance(expr, Const):
        return _num(expr.value)
    if isinstance(expr, Var):
        return f"prev({expr.name})" if expr.prev else expr.name
    if isinstance(expr, Neg):
        return f"-{format_arith(expr.child, 3)}"
    if isinstance(expr, Func):
        return f"{expr.name}({format_arith(expr.arg)})"
    prec = _ARITH_PREC[expr.op]
    left = format_arith(expr.left, prec)
    # Same-precedence right children keep explicit parens so that
    # non-associative trees survive the round trip.
    right = format_arith(expr.right, prec + 1)
    s = f"{left} {expr.op} {right}"
    return f"({s})" if prec < parent_prec else s


def _format_atom(atom: Atom) -> str:
    p = atom.payload
    if isinstance(p, Member):
        return f"in({format_arith(p.expr)}, {_num(p.lo)}, {_num(p.hi)})"
    assert isinstance(p, Cmp)
    return f"{format_arith(p.lhs, 1)} {p.op} {format_arith(p.rhs, 1)}"


# Formula precedence levels: -> (1), | (2), & (3), unary (4), atom (5).

def _prec(f: Formula) -> int:
    if isinstance(f, Implies):
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    if isinstance(f, (Not, Always, AlwaysBounded, Next)):
        return 4
    return 5


def format_formula(f: Formula, parent_prec: int = 0) -> str:
    if isinstance(f, Atom):
        s = _format_atom(f)
        # Membership atoms are self-delimited; comparisons get parens under
        # unary operators so the operand boundary stays obvious.
        if parent_prec >= 4 and isinstance(f.payload, Cmp):
            return f"({s})"
        return s
    if isinstance(f, Not):
        return f"!{format_formula(f.child, 4)}"
    if isinstance(f, Always):
        return f"G {format_formula(f.child, 4)}"
    if isinstance(f, Next):
        return f"X {format_formula(f.child, 4)}"
    if isinstance(f, AlwaysBounded):
        return f"GB({f.lo}, {f.hi}) {format_formula(f.child, 4)}"
    if isinstance(f, And):
        s = " & ".join(format_formula(c, 4) for c in f.children)
        return f"({s})" if _prec(f) <= parent_prec else s
    if isinstance(f, Or):
        s = " | ".join(format_formula(c, 3) for c in f.children)
        return f"({s})" if _prec(f) <= parent_prec else s
    assert isinstance(f, Implies)
    s = f"{format_formula(f.left, 2)} -> {format_formula(f.right, 1)}"
    return f"({s})" if _prec(f) <= parent_prec else s


def _format_decl(d: VarDecl) -> str:
    kw = "input" if d.role is VarRole.ENVIRONMENT else "output"
    s = f"{kw} {d.name} in [{_num(d.lo)}, {_num(d.hi)}]"
    if d.unit is not None:
        s += f" unit {d.unit}"
    if d.init is not None:
        s += f" init {_num(d.init)}"
    return s + ";"


def format_spec(doc: SpecDocument) -> str:
    lines = [_format_decl(d) for d in doc.declarations]
    lines += [f"assume {format_formula(f)};" for f in doc.assumptions]
    lines += [f"guarantee {format_formula(f)};" for f in doc.guarantees]
    return "\n".join(lines) + "\n"
