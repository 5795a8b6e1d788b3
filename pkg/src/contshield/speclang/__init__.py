"""Specification language: parsing, classification, rewriting, evaluation."""

from .ast import (
    Always,
    AlwaysBounded,
    And,
    ArithExpr,
    Atom,
    BinOp,
    Cmp,
    Const,
    EvalError,
    Formula,
    FragmentClass,
    Func,
    Implies,
    Member,
    Neg,
    Next,
    Not,
    Or,
    RewriteError,
    SpecDocument,
    SpecError,
    SpecSyntaxError,
    SpecValidationError,
    Var,
    VarDecl,
    VarRole,
)
from .analysis import classify_fragment, rewrite_anticipation
from .evaluate import eval_bounded, eval_formula
from .parser import parse_formula, parse_spec
from .printer import format_formula, format_spec

__all__ = [
    "Always", "AlwaysBounded", "And", "ArithExpr", "Atom", "BinOp", "Cmp",
    "Const", "EvalError", "Formula", "FragmentClass", "Func", "Implies",
    "Member", "Neg", "Next", "Not", "Or", "RewriteError", "SpecDocument",
    "SpecError", "SpecSyntaxError", "SpecValidationError", "Var", "VarDecl",
    "VarRole", "classify_fragment", "rewrite_anticipation", "eval_bounded",
    "eval_formula", "parse_formula", "parse_spec", "format_formula",
    "format_spec",
]
