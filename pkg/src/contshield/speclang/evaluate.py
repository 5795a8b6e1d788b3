"""Finite-trace evaluation of spec documents.

A trace is a sequence of per-step valuations (one ``{name: value}`` mapping
per step, covering every declared variable).  The document holds on the
trace when the conjunction of assumptions implies the conjunction of
guarantees, evaluated at step 0 with these conventions:

* ``G f``:       f at every step from now to the end of the trace;
* ``GB(a,b) f``: f at every step in [now+a, now+b] that exists; offsets
  past the end of the trace are vacuously satisfied;
* ``X f``:       f at the next step, vacuously true at the last step;
* ``prev(v)``:   the value of v one step earlier; at step 0 the declared
  ``init`` value of v.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .ast import (
    Always,
    AlwaysBounded,
    And,
    ArithExpr,
    Atom,
    Cmp,
    Const,
    EvalError,
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
)

Valuation = Mapping[str, float]
Trace = Sequence[Valuation]


def _lookup(doc: SpecDocument, trace: Trace, t: int, var: Var) -> float:
    if var.prev:
        if t == 0:
            init = doc.decl(var.name).init
            if init is None:
                raise EvalError(
                    f"prev({var.name}) at step 0 needs a declared init value")
            return init
        step = trace[t - 1]
    else:
        step = trace[t]
    try:
        return step[var.name]
    except KeyError:
        raise EvalError(f"step {t} does not assign variable {var.name!r}") from None


def eval_arith(doc: SpecDocument, trace: Trace, t: int, expr: ArithExpr) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return _lookup(doc, trace, t, expr)
    if isinstance(expr, Neg):
        return -eval_arith(doc, trace, t, expr.child)
    if isinstance(expr, Func):
        v = eval_arith(doc, trace, t, expr.arg)
        if expr.name == "sin":
            return math.sin(v)
        if expr.name == "cos":
            return math.cos(v)
        return abs(v)
    left = eval_arith(doc, trace, t, expr.left)
    right = eval_arith(doc, trace, t, expr.right)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0.0:
        raise EvalError("division by zero while evaluating an atom")
    return left / right


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_formula(doc: SpecDocument, trace: Trace, t: int, f: Formula) -> bool:
    if isinstance(f, Atom):
        p = f.payload
        if isinstance(p, Cmp):
            return _CMP[p.op](eval_arith(doc, trace, t, p.lhs),
                              eval_arith(doc, trace, t, p.rhs))
        assert isinstance(p, Member)
        v = eval_arith(doc, trace, t, p.expr)
        return p.lo <= v <= p.hi
    if isinstance(f, Not):
        return not eval_formula(doc, trace, t, f.child)
    if isinstance(f, And):
        return all(eval_formula(doc, trace, t, c) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(doc, trace, t, c) for c in f.children)
    if isinstance(f, Implies):
        return (not eval_formula(doc, trace, t, f.left)
                or eval_formula(doc, trace, t, f.right))
    if isinstance(f, Always):
        return all(eval_formula(doc, trace, u, f.child)
                   for u in range(t, len(trace)))
    if isinstance(f, AlwaysBounded):
        end = min(t + f.hi, len(trace) - 1)
        return all(eval_formula(doc, trace, u, f.child)
                   for u in range(t + f.lo, end + 1))
    assert isinstance(f, Next)
    if t + 1 >= len(trace):
        return True
    return eval_formula(doc, trace, t + 1, f.child)


def eval_bounded(doc: SpecDocument, trace: Trace) -> bool:
    """Whether the trace satisfies (all assumptions) -> (all guarantees)."""
    if len(trace) < 1:
        raise EvalError("trace must contain at least one step")
    for i, step in enumerate(trace):
        missing = doc.variable_names - set(step.keys())
        if missing:
            raise EvalError(
                f"step {i} does not assign variable {sorted(missing)[0]!r}")
    assumptions_hold = all(
        eval_formula(doc, trace, 0, f) for f in doc.assumptions)
    if not assumptions_hold:
        return True
    return all(eval_formula(doc, trace, 0, f) for f in doc.guarantees)
