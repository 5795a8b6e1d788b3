"""Fragment classification and look-back elimination.

A *dynamics binding* is a top-level assumption of the shape

    G (v == t(prev(v1), ..., prev(vk)))

where ``v`` is an environment variable and every variable occurrence on the
right-hand side is prev-marked.  Such an assumption pins the next value of
``v`` as a function of the current step, which is what allows ``prev`` to be
compiled away: each single-variable predicate ``P(v)`` found elsewhere in
the document is turned into a prediction clause

    G (P(t(v1, ..., vk)) -> X P(v))

and the binding assumption is replaced by the conjunction of those clauses.
Documents whose prev-occurrences cannot be explained this way relate values
across steps in an essential way and are rejected as CrossState.
"""

from __future__ import annotations

from .ast import (
    Always,
    And,
    ArithExpr,
    Atom,
    BinOp,
    Cmp,
    Formula,
    FragmentClass,
    Func,
    Implies,
    Member,
    Neg,
    Next,
    RewriteError,
    SpecDocument,
    SpecValidationError,
    Var,
    VarRole,
    atom_has_prev,
    atom_vars,
    iter_arith,
    iter_atoms,
)


def _binding_shape(f: Formula, doc: SpecDocument) -> tuple[str, ArithExpr] | None:
    """Return (name, rhs) if ``f`` is ``G (v == all-prev expression)``."""
    if not isinstance(f, Always) or not isinstance(f.child, Atom):
        return None
    payload = f.child.payload
    if not isinstance(payload, Cmp) or payload.op != "==":
        return None
    lhs, rhs = payload.lhs, payload.rhs
    if not isinstance(lhs, Var) or lhs.prev:
        return None
    try:
        if doc.decl(lhs.name).role is not VarRole.ENVIRONMENT:
            return None
    except KeyError:
        return None
    refs = [n for n in iter_arith(rhs) if isinstance(n, Var)]
    if not refs or any(not n.prev for n in refs):
        return None
    return lhs.name, rhs


def derive_bindings(doc: SpecDocument) -> tuple[tuple[str, ArithExpr], ...]:
    out: list[tuple[str, ArithExpr]] = []
    bound: set[str] = set()
    for f in doc.assumptions:
        hit = _binding_shape(f, doc)
        if hit is None:
            continue
        name, rhs = hit
        if name in bound:
            raise SpecValidationError(
                f"variable {name!r} has two dynamics assumptions")
        bound.add(name)
        out.append((name, rhs))
    return tuple(out)


def _binding_atoms(doc: SpecDocument) -> set[int]:
    """Identity set of the atoms that belong to binding assumptions."""
    ids: set[int] = set()
    for f in doc.assumptions:
        if _binding_shape(f, doc) is not None:
            assert isinstance(f, Always) and isinstance(f.child, Atom)
            ids.add(id(f.child))
    return ids


def _non_binding_atoms(doc: SpecDocument):
    skip = _binding_atoms(doc)
    for f in list(doc.assumptions) + list(doc.guarantees):
        for atom in iter_atoms(f):
            if id(atom) not in skip:
                yield atom


def classify_fragment(doc: SpecDocument) -> FragmentClass:
    """Classify a document by how its prev-occurrences can be handled.

    Total and deterministic: NCS when no prev occurs anywhere; Anticipation
    when every prev occurrence sits inside a dynamics binding and every
    bound variable is otherwise used only in single-variable predicates;
    CrossState otherwise.
    """
    has_prev = any(
        atom_has_prev(a)
        for f in list(doc.assumptions) + list(doc.guarantees)
        for a in iter_atoms(f)
    )
    if not has_prev:
        return FragmentClass.NCS

    bound = {name for name, _ in doc.bindings}
    for atom in _non_binding_atoms(doc):
        if atom_has_prev(atom):
            return FragmentClass.CROSS_STATE
        used = atom_vars(atom)
        if any(v in bound for v in used) and len(used) > 1:
            return FragmentClass.CROSS_STATE
    return FragmentClass.ANTICIPATION


def _first_offender(doc: SpecDocument) -> Atom | None:
    bound = {name for name, _ in doc.bindings}
    for atom in _non_binding_atoms(doc):
        if atom_has_prev(atom):
            return atom
        used = atom_vars(atom)
        if any(v in bound for v in used) and len(used) > 1:
            return atom
    return None


def _strip_prev(expr: ArithExpr) -> ArithExpr:
    if isinstance(expr, Var):
        return Var(expr.name, prev=False)
    if isinstance(expr, Neg):
        return Neg(_strip_prev(expr.child))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, _strip_prev(expr.left), _strip_prev(expr.right))
    if isinstance(expr, Func):
        return Func(expr.name, _strip_prev(expr.arg))
    return expr


def _subst_var(expr: ArithExpr, name: str, replacement: ArithExpr) -> ArithExpr:
    if isinstance(expr, Var):
        if expr.name == name and not expr.prev:
            return replacement
        return expr
    if isinstance(expr, Neg):
        return Neg(_subst_var(expr.child, name, replacement))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, _subst_var(expr.left, name, replacement),
                     _subst_var(expr.right, name, replacement))
    if isinstance(expr, Func):
        return Func(expr.name, _subst_var(expr.arg, name, replacement))
    return expr


def _subst_atom(atom: Atom, name: str, replacement: ArithExpr) -> Atom:
    p = atom.payload
    if isinstance(p, Cmp):
        return Atom(Cmp(p.op, _subst_var(p.lhs, name, replacement),
                        _subst_var(p.rhs, name, replacement)))
    return Atom(Member(_subst_var(p.expr, name, replacement), p.lo, p.hi))


def _predicates_over(doc: SpecDocument, name: str) -> list[Atom]:
    """Distinct single-variable atoms over ``name``, in document order."""
    seen: list[Atom] = []
    for atom in _non_binding_atoms(doc):
        if atom_vars(atom) == frozenset({name}) and atom not in seen:
            seen.append(atom)
    return seen


def rewrite_anticipation(doc: SpecDocument) -> SpecDocument:
    """Rewrite an Anticipation-class document into an equivalent prev-free one.

    NCS documents are returned unchanged; CrossState documents raise
    RewriteError naming the first offending atom.
    """
    cls = classify_fragment(doc)
    if cls is FragmentClass.NCS:
        return doc
    if cls is FragmentClass.CROSS_STATE:
        from .printer import format_formula
        offender = _first_offender(doc)
        shown = format_formula(offender) if offender is not None else "?"
        raise RewriteError(
            f"cannot eliminate prev: atom {shown} relates values across steps")

    new_assumptions: list[Formula] = []
    for f in doc.assumptions:
        hit = _binding_shape(f, doc)
        if hit is None:
            new_assumptions.append(f)
            continue
        name, rhs = hit
        predicted = _strip_prev(rhs)
        clauses: list[Formula] = [
            Implies(_subst_atom(p, name, predicted), Next(p))
            for p in _predicates_over(doc, name)
        ]
        if not clauses:
            continue  # variable never constrained: the assumption is inert
        body: Formula = clauses[0] if len(clauses) == 1 else And(tuple(clauses))
        new_assumptions.append(Always(body))

    from .parser import _finalize
    return _finalize(doc.declarations, tuple(new_assumptions), doc.guarantees)
