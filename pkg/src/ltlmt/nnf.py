"""Negation normal form conversion.

The parser produces "surface" trees that may contain free negation and
implication at any level, plus the F/G shortcuts already expanded to U/R.
``to_nnf`` pushes negation down to atoms using the finite-trace dualities
(X/wX and U/R swap under negation) and splits the result into the canonical
two-layer form: temporal connectives over first-order leaves, where a leaf is
an atom, a negated atom, or a quantified formula.

``to_nnf`` also accepts already-canonical formulas, so it is idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .ast import (
    And,
    Atom,
    Exists,
    Fo,
    FoFalse,
    FoFormula,
    FoTrue,
    Forall,
    Implies,
    Not,
    Or,
    R,
    Sort,
    TAnd,
    TemporalFormula,
    Term,
    TOr,
    TTrue,
    U,
    WX,
    X,
)


class NnfError(Exception):
    pass


# ---------------------------------------------------------------------------
# Surface nodes (parser output; eliminated by to_nnf)


class Surface:
    def __str__(self) -> str:
        from .printer import print_surface

        return print_surface(self)


@dataclass(frozen=True)
class STrue(Surface):
    pass


@dataclass(frozen=True)
class SFalse(Surface):
    pass


@dataclass(frozen=True)
class SAtom(Surface):
    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class SNot(Surface):
    arg: object


@dataclass(frozen=True)
class SAnd(Surface):
    left: object
    right: object


@dataclass(frozen=True)
class SOr(Surface):
    left: object
    right: object


@dataclass(frozen=True)
class SImplies(Surface):
    left: object
    right: object


@dataclass(frozen=True)
class SX(Surface):
    arg: object


@dataclass(frozen=True)
class SWX(Surface):
    arg: object


@dataclass(frozen=True)
class SU(Surface):
    left: object
    right: object


@dataclass(frozen=True)
class SR(Surface):
    left: object
    right: object


@dataclass(frozen=True)
class SExists(Surface):
    var: str
    sort: Sort
    body: object


@dataclass(frozen=True)
class SForall(Surface):
    var: str
    sort: Sort
    body: object


def sugar_F(arg: object) -> Surface:
    return SU(STrue(), arg)


def sugar_G(arg: object) -> Surface:
    return SR(SFalse(), arg)


# ---------------------------------------------------------------------------
# Conversion


def to_nnf(f: object) -> TemporalFormula:
    """Convert a surface or canonical formula to canonical NNF."""
    return _temporal(f, False)


def _temporal(f: object, neg: bool) -> TemporalFormula:
    # Constants
    if isinstance(f, (STrue, TTrue)):
        return Fo(FoFalse()) if neg else TTrue()
    if isinstance(f, SFalse):
        return TTrue() if neg else Fo(FoFalse())
    # Atoms and first-order leaves
    if isinstance(f, SAtom):
        atom = Atom(f.pred, f.args)
        return Fo(Not(atom)) if neg else Fo(atom)
    if isinstance(f, Fo):
        lam = _fo(f.formula, neg)
        if isinstance(lam, FoTrue):
            return TTrue()
        return Fo(lam)
    if isinstance(f, (SExists, SForall, Exists, Forall)):
        lam = _fo(f, neg)
        return Fo(lam)
    # Connectives
    if isinstance(f, SNot):
        return _temporal(f.arg, not neg)
    if isinstance(f, (SAnd, ast.TAnd)):
        l, r = _temporal(f.left, neg), _temporal(f.right, neg)
        return TOr(l, r) if neg else TAnd(l, r)
    if isinstance(f, (SOr, ast.TOr)):
        l, r = _temporal(f.left, neg), _temporal(f.right, neg)
        return TAnd(l, r) if neg else TOr(l, r)
    if isinstance(f, SImplies):
        if neg:
            return TAnd(_temporal(f.left, False), _temporal(f.right, True))
        return TOr(_temporal(f.left, True), _temporal(f.right, False))
    # Temporal operators
    if isinstance(f, (SX, X)):
        sub = _temporal(f.arg, neg)
        return WX(sub) if neg else X(sub)
    if isinstance(f, (SWX, WX)):
        sub = _temporal(f.arg, neg)
        return X(sub) if neg else WX(sub)
    if isinstance(f, (SU, U)):
        l, r = _temporal(f.left, neg), _temporal(f.right, neg)
        return R(l, r) if neg else U(l, r)
    if isinstance(f, (SR, R)):
        l, r = _temporal(f.left, neg), _temporal(f.right, neg)
        return U(l, r) if neg else R(l, r)
    raise NnfError(f"unexpected node in temporal position: {f!r}")


def _fo(f: object, neg: bool) -> FoFormula:
    if isinstance(f, (STrue, FoTrue)):
        return FoFalse() if neg else FoTrue()
    if isinstance(f, (SFalse, FoFalse)):
        return FoTrue() if neg else FoFalse()
    if isinstance(f, SAtom):
        atom = Atom(f.pred, f.args)
        return Not(atom) if neg else atom
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, (SNot, Not)):
        return _fo(f.arg, not neg)
    if isinstance(f, (SAnd, And)):
        l, r = _fo(f.left, neg), _fo(f.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(f, (SOr, Or)):
        l, r = _fo(f.left, neg), _fo(f.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(f, (SImplies, Implies)):
        if neg:
            return And(_fo(f.left, False), _fo(f.right, True))
        return Or(_fo(f.left, True), _fo(f.right, False))
    if isinstance(f, (SExists, Exists)):
        body = _fo(f.body, neg)
        return Forall(f.var, f.sort, body) if neg else Exists(f.var, f.sort, body)
    if isinstance(f, (SForall, Forall)):
        body = _fo(f.body, neg)
        return Exists(f.var, f.sort, body) if neg else Forall(f.var, f.sort, body)
    if isinstance(f, (SX, SWX, SU, SR)) or isinstance(f, TemporalFormula):
        raise NnfError("temporal operator inside a quantifier body")
    raise NnfError(f"unexpected node in first-order position: {f!r}")
