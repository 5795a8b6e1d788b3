"""AST node types for the shield specification language.

A spec document declares environment (``input``) and system (``output``)
variables, a list of assumptions and a list of guarantees.  Formulas mix
boolean/temporal structure with arithmetic atoms over the declared
variables; ``prev(v)`` inside an atom refers to the variable's value one
step earlier.

All node types are immutable after construction and compare structurally,
so documents can be hashed, deduplicated and round-tripped through the
pretty printer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


class SpecError(Exception):
    """Base class for every specification-language error."""


class SpecSyntaxError(SpecError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class SpecValidationError(SpecError):
    """Semantic error in an otherwise well-formed document."""


class EvalError(SpecError):
    """Raised when a trace cannot be evaluated (missing value, division by zero)."""


class RewriteError(SpecError):
    """Raised when a document is outside the rewritable fragment."""


class VarRole(str, Enum):
    ENVIRONMENT = "environment"
    SYSTEM = "system"


@dataclass(frozen=True)
class VarDecl:
    name: str
    role: VarRole
    lo: float
    hi: float
    unit: str | None = None
    init: float | None = None


# ---------------------------------------------------------------------------
# Arithmetic expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    prev: bool = False  # True when written prev(name)


@dataclass(frozen=True)
class Neg:
    child: "ArithExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class Func:
    name: str  # one of sin cos abs
    arg: "ArithExpr"


ArithExpr = Union[Const, Var, Neg, BinOp, Func]

FUNC_NAMES = ("sin", "cos", "abs")
CMP_OPS = ("<", "<=", "==", ">=", ">")


# ---------------------------------------------------------------------------
# Atoms and formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    """Comparison atom ``lhs op rhs``."""

    op: str
    lhs: ArithExpr
    rhs: ArithExpr


@dataclass(frozen=True)
class Member:
    """Interval-membership atom ``in(expr, lo, hi)``, i.e. lo <= expr <= hi."""

    expr: ArithExpr
    lo: float
    hi: float


AtomPayload = Union[Cmp, Member]


@dataclass(frozen=True)
class Atom:
    payload: AtomPayload


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Always:
    child: "Formula"


@dataclass(frozen=True)
class AlwaysBounded:
    """``GB(lo, hi) f``: f holds at every offset in [lo, hi] from now."""

    lo: int
    hi: int
    child: "Formula"

    def __post_init__(self):
        if not (1 <= self.lo <= self.hi):
            raise SpecValidationError(
                f"GB bounds must satisfy 1 <= lo <= hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class Next:
    child: "Formula"


Formula = Union[Atom, Not, And, Or, Implies, Always, AlwaysBounded, Next]


@dataclass(frozen=True)
class SpecDocument:
    declarations: tuple[VarDecl, ...]
    assumptions: tuple[Formula, ...]
    guarantees: tuple[Formula, ...]
    # Derived: (variable name, arith over prev-marked variables) pairs, in
    # assumption order.  Recomputed on every parse, so round-trips agree.
    bindings: tuple[tuple[str, ArithExpr], ...] = ()
    warnings: tuple[str, ...] = ()

    def decl(self, name: str) -> VarDecl:
        for d in self.declarations:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def variable_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.declarations)


class FragmentClass(Enum):
    NCS = "NCS"
    ANTICIPATION = "Anticipation"
    CROSS_STATE = "CrossState"


# ---------------------------------------------------------------------------
# Tree walking helpers
# ---------------------------------------------------------------------------

def iter_arith(expr: ArithExpr) -> Iterator[ArithExpr]:
    yield expr
    if isinstance(expr, Neg):
        yield from iter_arith(expr.child)
    elif isinstance(expr, BinOp):
        yield from iter_arith(expr.left)
        yield from iter_arith(expr.right)
    elif isinstance(expr, Func):
        yield from iter_arith(expr.arg)


def atom_exprs(atom: Atom) -> tuple[ArithExpr, ...]:
    p = atom.payload
    if isinstance(p, Cmp):
        return (p.lhs, p.rhs)
    return (p.expr,)


def iter_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from iter_atoms(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from iter_atoms(c)
    elif isinstance(f, Implies):
        yield from iter_atoms(f.left)
        yield from iter_atoms(f.right)
    elif isinstance(f, (Always, AlwaysBounded, Next)):
        yield from iter_atoms(f.child)


def atom_vars(atom: Atom, *, include_prev: bool = True) -> frozenset[str]:
    names = set()
    for e in atom_exprs(atom):
        for node in iter_arith(e):
            if isinstance(node, Var) and (include_prev or not node.prev):
                names.add(node.name)
    return frozenset(names)


def atom_has_prev(atom: Atom) -> bool:
    for e in atom_exprs(atom):
        for node in iter_arith(e):
            if isinstance(node, Var) and node.prev:
                return True
    return False


def formula_vars(f: Formula) -> frozenset[str]:
    out: set[str] = set()
    for a in iter_atoms(f):
        out |= atom_vars(a)
    return frozenset(out)
