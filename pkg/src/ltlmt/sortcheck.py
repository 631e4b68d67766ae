"""Well-sortedness checking for terms and formulas against a signature.

Integer literals are numeric-polymorphic (legal at Int and Real positions);
decimal literals are Real only.  Division is restricted to Real terms with a
literal divisor, multiplication requires a literal factor.
"""

from __future__ import annotations

from .ast import (
    Add,
    Apply,
    Atom,
    BoundVar,
    Const,
    Div,
    Exists,
    Fo,
    FoFalse,
    FoFormula,
    FoTrue,
    Forall,
    IntLit,
    Mul,
    Neg,
    Next,
    Not,
    And,
    Or,
    Implies,
    Iff,
    INT,
    RatLit,
    REAL,
    RELATIONS,
    Signature,
    Sort,
    StateVar,
    Sub,
    TemporalFormula,
    Term,
    TTrue,
    WNext,
    temporal_children,
)


class SortError(Exception):
    pass


class _AnyNum:
    """Sort placeholder for bare integer literals."""

    def __repr__(self) -> str:
        return "AnyNum"


ANYNUM = _AnyNum()


def _unify(a, b, where: str):
    if isinstance(a, _AnyNum):
        if isinstance(b, _AnyNum):
            return ANYNUM
        if b.is_numeric:
            return b
        raise SortError(f"numeric literal used at sort {b.name} in {where}")
    if isinstance(b, _AnyNum):
        return _unify(b, a, where)
    if a != b:
        raise SortError(f"sort mismatch in {where}: {a.name} vs {b.name}")
    return a


def _is_literal(t: Term) -> bool:
    if isinstance(t, Neg):
        return _is_literal(t.arg)
    return isinstance(t, (IntLit, RatLit))


def infer_term(t: Term, sig: Signature, bound: dict[str, Sort]):
    """Return the sort of t (or ANYNUM for a bare integer literal)."""
    if isinstance(t, StateVar):
        if t.name not in sig.state_vars:
            raise SortError(f"undeclared variable {t.name}")
        return sig.state_vars[t.name]
    if isinstance(t, BoundVar):
        if t.name not in bound:
            raise SortError(f"unbound variable {t.name}")
        return bound[t.name]
    if isinstance(t, Const):
        if t.name not in sig.constants:
            raise SortError(f"undeclared constant {t.name}")
        return sig.constants[t.name]
    if isinstance(t, IntLit):
        return ANYNUM
    if isinstance(t, RatLit):
        return REAL
    if isinstance(t, Apply):
        if t.func not in sig.functions:
            raise SortError(f"undeclared function {t.func}")
        params, result = sig.functions[t.func]
        if len(params) != len(t.args):
            raise SortError(
                f"function {t.func} expects {len(params)} arguments, got {len(t.args)}"
            )
        for p, a in zip(params, t.args):
            _unify(p, infer_term(a, sig, bound), f"argument of {t.func}")
        return result
    if isinstance(t, (Add, Sub)):
        s = _unify(infer_term(t.left, sig, bound), infer_term(t.right, sig, bound), str(t))
        return _numeric(s, t)
    if isinstance(t, Neg):
        return _numeric(infer_term(t.arg, sig, bound), t)
    if isinstance(t, Mul):
        if not (_is_literal(t.left) or _is_literal(t.right)):
            raise SortError(f"multiplication needs a literal factor: {t}")
        s = _unify(infer_term(t.left, sig, bound), infer_term(t.right, sig, bound), str(t))
        return _numeric(s, t)
    if isinstance(t, Div):
        if not _is_literal(t.den):
            raise SortError(f"division needs a literal divisor: {t}")
        if _literal_value_is_zero(t.den):
            raise SortError(f"division by zero: {t}")
        s = _unify(infer_term(t.num, sig, bound), infer_term(t.den, sig, bound), str(t))
        if isinstance(s, _AnyNum) or s == INT:
            raise SortError(f"division requires Real operands: {t}")
        return s
    if isinstance(t, (Next, WNext)):
        if isinstance(t.arg, BoundVar):
            raise SortError(f"next-state term over bound variable {t.arg.name}")
        return infer_term(t.arg, sig, bound)
    raise SortError(f"unknown term: {t!r}")


def _literal_value_is_zero(t: Term) -> bool:
    if isinstance(t, Neg):
        return _literal_value_is_zero(t.arg)
    if isinstance(t, IntLit):
        return t.value == 0
    if isinstance(t, RatLit):
        return t.value == 0
    return False


def _numeric(s, t: Term):
    if isinstance(s, _AnyNum) or s.is_numeric:
        return s
    raise SortError(f"arithmetic on non-numeric sort {s.name}: {t}")


def check_fo(f: FoFormula, sig: Signature, bound: dict[str, Sort] | None = None) -> None:
    bound = dict(bound or {})
    if isinstance(f, (FoTrue, FoFalse)):
        return
    if isinstance(f, Atom):
        if f.pred in RELATIONS:
            if len(f.args) != 2:
                raise SortError(f"relation {f.pred} expects 2 arguments")
            s = _unify(
                infer_term(f.args[0], sig, bound),
                infer_term(f.args[1], sig, bound),
                str(f),
            )
            if f.pred != "=" and not (isinstance(s, _AnyNum) or s.is_numeric):
                raise SortError(f"order relation on non-numeric sort {s.name}: {f}")
            return
        if f.pred not in sig.predicates:
            raise SortError(f"undeclared predicate {f.pred}")
        params = sig.predicates[f.pred]
        if len(params) != len(f.args):
            raise SortError(
                f"predicate {f.pred} expects {len(params)} arguments, got {len(f.args)}"
            )
        for p, a in zip(params, f.args):
            _unify(p, infer_term(a, sig, bound), f"argument of {f.pred}")
        return
    if isinstance(f, Not):
        check_fo(f.arg, sig, bound)
        return
    if isinstance(f, (And, Or, Implies, Iff)):
        check_fo(f.left, sig, bound)
        check_fo(f.right, sig, bound)
        return
    if isinstance(f, (Exists, Forall)):
        if f.sort.name not in sig.sorts:
            raise SortError(f"undeclared sort {f.sort.name}")
        inner = dict(bound)
        inner[f.var] = f.sort
        check_fo(f.body, sig, inner)
        return
    raise SortError(f"unknown first-order formula: {f!r}")


def sort_check(phi: TemporalFormula, sig: Signature) -> None:
    """Raise SortError naming the offending subterm if phi is ill-sorted."""
    if isinstance(phi, TTrue):
        return
    if isinstance(phi, Fo):
        check_fo(phi.formula, sig)
        return
    for child in temporal_children(phi):
        sort_check(child, sig)
