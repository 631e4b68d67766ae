"""Encoding machinery: stepped terms, step-literal labeling, stepped normal
form, grounding of tomorrow formulas, the incremental unraveling and the
empty-rule extras, plus the branch-summary formula used by the reference
tableau.

Symbol scheme (user identifiers cannot start with '_' or contain '@'):

* ``x@i``     stepped copy of state variable x at step i
* ``_l@i``    step literal: true when step i is not the last state
* ``_g@n@i``  grounded (weak) tomorrow for closure entry n at step i
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Add,
    And,
    Apply,
    Atom,
    AtomStrength,
    BoundVar,
    Const,
    Div,
    Exists,
    Fo,
    FoFalse,
    FoFormula,
    FoTrue,
    Forall,
    Iff,
    Implies,
    IntLit,
    Mul,
    Neg,
    Next,
    Not,
    Or,
    R,
    RatLit,
    StateVar,
    Sub,
    TAnd,
    TemporalFormula,
    Term,
    TOr,
    TTrue,
    U,
    WNext,
    WX,
    X,
    classify_atom,
)
from .closure import ClosureTable


class EncodingError(Exception):
    pass


# ---------------------------------------------------------------------------
# Stepped symbols


@dataclass(frozen=True)
class SteppedSymbol:
    kind: str  # 'var' | 'step_literal' | 'grounded_tomorrow'
    step: int
    base: str | None = None
    closure_index: int | None = None

    def render(self) -> str:
        if self.kind == "var":
            return f"{self.base}@{self.step}"
        if self.kind == "step_literal":
            return f"_l@{self.step}"
        return f"_g@{self.closure_index}@{self.step}"

    @staticmethod
    def var(base: str, step: int) -> "SteppedSymbol":
        return SteppedSymbol("var", step, base=base)

    @staticmethod
    def step_literal(step: int) -> "SteppedSymbol":
        return SteppedSymbol("step_literal", step)

    @staticmethod
    def grounded_tomorrow(closure_index: int, step: int) -> "SteppedSymbol":
        return SteppedSymbol("grounded_tomorrow", step, closure_index=closure_index)


def parse_symbol(name: str) -> SteppedSymbol | None:
    """Inverse of SteppedSymbol.render; None for non-stepped names."""
    if name.startswith("_l@"):
        return SteppedSymbol.step_literal(int(name[3:]))
    if name.startswith("_g@"):
        n, i = name[3:].split("@")
        return SteppedSymbol.grounded_tomorrow(int(n), int(i))
    if "@" in name:
        base, i = name.rsplit("@", 1)
        return SteppedSymbol.var(base, int(i))
    return None


def stepped_var(base: str, step: int) -> StateVar:
    return StateVar(SteppedSymbol.var(base, step).render())


def step_literal(step: int) -> Atom:
    return Atom(SteppedSymbol.step_literal(step).render(), ())


def grounded_tomorrow(closure_index: int, step: int) -> Atom:
    return Atom(SteppedSymbol.grounded_tomorrow(closure_index, step).render(), ())


# ---------------------------------------------------------------------------
# Constant-folding connective builders


def fo_and(l: FoFormula, r: FoFormula) -> FoFormula:
    if isinstance(l, FoTrue):
        return r
    if isinstance(r, FoTrue):
        return l
    if isinstance(l, FoFalse) or isinstance(r, FoFalse):
        return FoFalse()
    return And(l, r)


def fo_or(l: FoFormula, r: FoFormula) -> FoFormula:
    if isinstance(l, FoFalse):
        return r
    if isinstance(r, FoFalse):
        return l
    if isinstance(l, FoTrue) or isinstance(r, FoTrue):
        return FoTrue()
    return Or(l, r)


def _is_t_true(f: TemporalFormula) -> bool:
    return isinstance(f, TTrue) or (isinstance(f, Fo) and isinstance(f.formula, FoTrue))


def _is_t_false(f: TemporalFormula) -> bool:
    return isinstance(f, Fo) and isinstance(f.formula, FoFalse)


def t_and(l: TemporalFormula, r: TemporalFormula) -> TemporalFormula:
    if _is_t_true(l):
        return r
    if _is_t_true(r):
        return l
    if _is_t_false(l) or _is_t_false(r):
        return Fo(FoFalse())
    return TAnd(l, r)


def t_or(l: TemporalFormula, r: TemporalFormula) -> TemporalFormula:
    if _is_t_false(l):
        return r
    if _is_t_false(r):
        return l
    if _is_t_true(l) or _is_t_true(r):
        return TTrue()
    return TOr(l, r)


def conjoin(parts: list[FoFormula]) -> FoFormula:
    out: FoFormula = FoTrue()
    for p in parts:
        out = fo_and(out, p)
    return out


# ---------------------------------------------------------------------------
# Stepped terms and formulas


def step_term(t: Term, i: int) -> Term:
    """Stepped version of a flat term at step i: x -> x@i, next(x) -> x@(i+1)."""
    if isinstance(t, StateVar):
        return stepped_var(t.name, i)
    if isinstance(t, (Next, WNext)):
        if not isinstance(t.arg, StateVar):
            raise EncodingError(f"term not flat: {t}")
        return stepped_var(t.arg.name, i + 1)
    if isinstance(t, (BoundVar, Const, IntLit, RatLit)):
        return t
    if isinstance(t, Apply):
        return Apply(t.func, tuple(step_term(a, i) for a in t.args))
    if isinstance(t, Add):
        return Add(step_term(t.left, i), step_term(t.right, i))
    if isinstance(t, Sub):
        return Sub(step_term(t.left, i), step_term(t.right, i))
    if isinstance(t, Mul):
        return Mul(step_term(t.left, i), step_term(t.right, i))
    if isinstance(t, Div):
        return Div(step_term(t.num, i), step_term(t.den, i))
    if isinstance(t, Neg):
        return Neg(step_term(t.arg, i))
    raise EncodingError(f"unknown term: {t!r}")


def step_formula(lam: FoFormula, i: int) -> FoFormula:
    if isinstance(lam, (FoTrue, FoFalse)):
        return lam
    if isinstance(lam, Atom):
        return Atom(lam.pred, tuple(step_term(a, i) for a in lam.args))
    if isinstance(lam, Not):
        return Not(step_formula(lam.arg, i))
    if isinstance(lam, And):
        return And(step_formula(lam.left, i), step_formula(lam.right, i))
    if isinstance(lam, Or):
        return Or(step_formula(lam.left, i), step_formula(lam.right, i))
    if isinstance(lam, Implies):
        return Implies(step_formula(lam.left, i), step_formula(lam.right, i))
    if isinstance(lam, Iff):
        return Iff(step_formula(lam.left, i), step_formula(lam.right, i))
    if isinstance(lam, Exists):
        return Exists(lam.var, lam.sort, step_formula(lam.body, i))
    if isinstance(lam, Forall):
        return Forall(lam.var, lam.sort, step_formula(lam.body, i))
    raise EncodingError(f"unknown first-order formula: {lam!r}")


# ---------------------------------------------------------------------------
# Step-literal labeling


def label_L(lam: FoFormula, i: int) -> FoFormula:
    """Guard strong/weak atoms of lam with the step literal for step i.

    A strong atom holds only at non-final steps, so it becomes l_i AND atom;
    a weak atom is vacuous at the final step: l_i -> atom.  The labeling
    replaces atom occurrences, so under a negation the guards dualize:
    not(l_i and atom) is l_i -> not(atom).
    """
    lit = step_literal(i)
    if isinstance(lam, Atom):
        s = classify_atom(lam)
        if s is AtomStrength.STRONG:
            return And(lit, lam)
        if s is AtomStrength.WEAK:
            return Implies(lit, lam)
        return lam
    if isinstance(lam, Not):
        s = classify_atom(lam)
        if s is AtomStrength.STRONG:
            return Implies(lit, lam)
        if s is AtomStrength.WEAK:
            return And(lit, lam)
        return lam
    if isinstance(lam, (FoTrue, FoFalse)):
        return lam
    if isinstance(lam, And):
        return And(label_L(lam.left, i), label_L(lam.right, i))
    if isinstance(lam, Or):
        return Or(label_L(lam.left, i), label_L(lam.right, i))
    if isinstance(lam, Exists):
        return Exists(lam.var, lam.sort, label_L(lam.body, i))
    if isinstance(lam, Forall):
        return Forall(lam.var, lam.sort, label_L(lam.body, i))
    raise EncodingError(f"labeling expects an NNF first-order formula: {lam!r}")


# ---------------------------------------------------------------------------
# Stepped normal form and grounding


def snf(phi: TemporalFormula, i: int) -> TemporalFormula:
    """Unfold until/release one step; X/wX leaves stay, labels applied at leaves."""
    if isinstance(phi, TTrue):
        return phi
    if isinstance(phi, Fo):
        return Fo(label_L(phi.formula, i))
    if isinstance(phi, (X, WX)):
        return phi
    if isinstance(phi, TAnd):
        return t_and(snf(phi.left, i), snf(phi.right, i))
    if isinstance(phi, TOr):
        return t_or(snf(phi.left, i), snf(phi.right, i))
    if isinstance(phi, U):
        return t_or(snf(phi.right, i), t_and(snf(phi.left, i), X(phi)))
    if isinstance(phi, R):
        return t_and(snf(phi.right, i), t_or(snf(phi.left, i), WX(phi)))
    raise EncodingError(f"unknown temporal formula: {phi!r}")


def ground(psi: TemporalFormula, i: int, ct: ClosureTable) -> FoFormula:
    """Step first-order leaves at i; replace X/wX formulas by their grounded
    tomorrow symbols."""
    if isinstance(psi, TTrue):
        return FoTrue()
    if isinstance(psi, Fo):
        return step_formula(psi.formula, i)
    if isinstance(psi, TAnd):
        return fo_and(ground(psi.left, i, ct), ground(psi.right, i, ct))
    if isinstance(psi, TOr):
        return fo_or(ground(psi.left, i, ct), ground(psi.right, i, ct))
    if isinstance(psi, (X, WX)):
        if psi not in ct:
            raise EncodingError(f"tomorrow formula missing from closure: {psi}")
        return grounded_tomorrow(ct.idx(psi), i)
    raise EncodingError(f"grounding expects stepped normal form, got: {psi!r}")


# ---------------------------------------------------------------------------
# Unraveling and empty-rule encoding


def unravel_base(phi: TemporalFormula, ct: ClosureTable) -> FoFormula:
    return ground(snf(phi, 0), 0, ct)


def unravel_delta(phi: TemporalFormula, k: int, ct: ClosureTable) -> FoFormula:
    """Conjuncts extending the k-unraveling to depth k+1: the step literal at
    k plus one biconditional per (weak) tomorrow formula tying its grounded
    symbol at k to its argument's stepped normal form at k+1."""
    parts: list[FoFormula] = [step_literal(k)]
    for n in ct.xr:
        alpha = ct.formula(n).arg
        parts.append(
            Iff(grounded_tomorrow(n, k), ground(snf(alpha, k + 1), k + 1, ct))
        )
    for n in ct.wxr:
        alpha = ct.formula(n).arg
        parts.append(
            Iff(grounded_tomorrow(n, k), ground(snf(alpha, k + 1), k + 1, ct))
        )
    return conjoin(parts)


def empty_extras(phi: TemporalFormula, k: int, ct: ClosureTable) -> FoFormula:
    """What the empty-rule check adds on top of the k-unraveling: no pending
    tomorrow at step k and the step literal forced false."""
    parts: list[FoFormula] = [Not(grounded_tomorrow(n, k)) for n in ct.xr]
    parts.append(Not(step_literal(k)))
    return conjoin(parts)


# ---------------------------------------------------------------------------
# Branch summary for the reference tableau


@dataclass(frozen=True)
class BranchSummary:
    """First-order formula sets of a branch's poised nodes, in order."""

    poised_labels: tuple[tuple[FoFormula, ...], ...]


def omega(b: BranchSummary) -> FoFormula:
    """Single formula describing all first-order obligations of a branch:
    each poised node's formulas labeled and stepped at its index, plus the
    step literals of all non-final steps (the last one stays unconstrained)."""
    m = len(b.poised_labels)
    if m < 1:
        raise EncodingError("branch summary needs at least one poised node")
    parts: list[FoFormula] = []
    for i, label in enumerate(b.poised_labels):
        for lam in label:
            parts.append(step_formula(label_L(lam, i), i))
    for i in range(m - 1):
        parts.append(step_literal(i))
    return conjoin(parts)
