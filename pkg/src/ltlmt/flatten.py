"""Flattening of nested next-state terms.

The input language allows `next`/`wnext` over arbitrary terms and nested to
any depth; the solver pipeline requires them directly on state variables.
Flattening proceeds in two steps, per atom:

1. Push next-operators down through rigid structure: ``next(f(x, c))``
   becomes ``f(next(x), c)`` (function symbols and constants are interpreted
   identically at every state), leaving chains of next-operators sitting
   directly on state variables.

2. An atom whose deepest chain has length d >= 2 (or that lost all its
   next-operators to rigid arguments) is shifted forward in time: it becomes
   ``X^d(core)`` when strong and ``wX^d(core)`` when weak (negated atoms swap,
   since a strong atom is false at states with no d-th successor and its
   negation therefore true).  Inside ``core``, a variable occurrence at chain
   depth j is replaced by a delayed copy carrying the value of the variable
   d-j steps ago; the copies are fresh state variables `_flat<n>` constrained
   by weak equalities ``G(wnext(_flatN) = ...)``, which never force a state to
   have a successor.

The result is equivalent over traces extended with values for the fresh
variables, hence equisatisfiable with the input.  Deep atoms under a
quantifier cannot be shifted across the binder and are rejected.
"""

from __future__ import annotations

from .ast import (
    Add,
    And,
    Apply,
    Atom,
    BoundVar,
    Const,
    Div,
    Exists,
    Fo,
    FoFalse,
    FoFormula,
    Forall,
    IntLit,
    Mul,
    Neg,
    Next,
    Not,
    Or,
    R,
    RatLit,
    Signature,
    Sort,
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
    AtomStrength,
    eq,
    fo_terms,
    next_depth,
    subterms,
    temporal_subformulas,
)


class FlattenError(Exception):
    pass


def is_flat(phi: TemporalFormula) -> bool:
    """True when every Next/WNext wraps a state variable directly."""
    for g in temporal_subformulas(phi):
        if isinstance(g, Fo):
            for t in fo_terms(g.formula):
                if isinstance(t, (Next, WNext)) and not isinstance(t.arg, StateVar):
                    return False
    return True


class _Flattener:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.counter = 0
        # (base var, lag level) -> fresh delayed-copy name
        self.lag_vars: dict[tuple[str, int], str] = {}
        self.trackers: list[FoFormula] = []

    def lag_var(self, base: str, level: int) -> str:
        key = (base, level)
        if key in self.lag_vars:
            return self.lag_vars[key]
        prev = StateVar(base) if level == 1 else StateVar(self.lag_var(base, level - 1))
        name = f"_flat{self.counter}"
        self.counter += 1
        self.lag_vars[key] = name
        self.sig = _with_fresh_var(self.sig, name, self.sig.state_vars[base])
        self.trackers.append(eq(WNext(StateVar(name)), prev))
        return name


def _with_fresh_var(sig: Signature, name: str, sort: Sort) -> Signature:
    new = sig.copy()
    new.state_vars[name] = sort
    return new


def _pushdown(t: Term, depth: int) -> Term:
    """Distribute `depth` pending next-operators over rigid term structure."""
    if isinstance(t, (Next, WNext)):
        return _pushdown(t.arg, depth + 1)
    if depth == 0:
        if isinstance(t, Apply):
            return Apply(t.func, tuple(_pushdown(a, 0) for a in t.args))
        if isinstance(t, Add):
            return Add(_pushdown(t.left, 0), _pushdown(t.right, 0))
        if isinstance(t, Sub):
            return Sub(_pushdown(t.left, 0), _pushdown(t.right, 0))
        if isinstance(t, Mul):
            return Mul(_pushdown(t.left, 0), _pushdown(t.right, 0))
        if isinstance(t, Div):
            return Div(_pushdown(t.num, 0), _pushdown(t.den, 0))
        if isinstance(t, Neg):
            return Neg(_pushdown(t.arg, 0))
        return t
    if isinstance(t, StateVar):
        out: Term = t
        for _ in range(depth):
            out = Next(out)
        return out
    if isinstance(t, (BoundVar, Const, IntLit, RatLit)):
        # Rigid at every state; the existence requirement is tracked at the
        # atom level by the enclosing shift.
        return t
    if isinstance(t, Apply):
        return Apply(t.func, tuple(_pushdown(a, depth) for a in t.args))
    if isinstance(t, Add):
        return Add(_pushdown(t.left, depth), _pushdown(t.right, depth))
    if isinstance(t, Sub):
        return Sub(_pushdown(t.left, depth), _pushdown(t.right, depth))
    if isinstance(t, Mul):
        return Mul(_pushdown(t.left, depth), _pushdown(t.right, depth))
    if isinstance(t, Div):
        return Div(_pushdown(t.num, depth), _pushdown(t.den, depth))
    if isinstance(t, Neg):
        return Neg(_pushdown(t.arg, depth))
    raise FlattenError(f"cannot flatten next-state term over {t}")


def _chain_depth(t: Term) -> tuple[int, Term]:
    d = 0
    while isinstance(t, (Next, WNext)):
        d += 1
        t = t.arg
    return d, t


def _shift_core(t: Term, shift: int, fl: _Flattener) -> Term:
    """Rewrite a pushed-down term for evaluation `shift` steps ahead."""
    d, base = _chain_depth(t)
    if d > 0:
        assert isinstance(base, StateVar)
        lag = shift - d
        if lag == 0:
            return base
        return StateVar(fl.lag_var(base.name, lag))
    if isinstance(t, StateVar):
        return StateVar(fl.lag_var(t.name, shift))
    if isinstance(t, (BoundVar, Const, IntLit, RatLit)):
        return t
    if isinstance(t, Apply):
        return Apply(t.func, tuple(_shift_core(a, shift, fl) for a in t.args))
    if isinstance(t, Add):
        return Add(_shift_core(t.left, shift, fl), _shift_core(t.right, shift, fl))
    if isinstance(t, Sub):
        return Sub(_shift_core(t.left, shift, fl), _shift_core(t.right, shift, fl))
    if isinstance(t, Mul):
        return Mul(_shift_core(t.left, shift, fl), _shift_core(t.right, shift, fl))
    if isinstance(t, Div):
        return Div(_shift_core(t.num, shift, fl), _shift_core(t.den, shift, fl))
    if isinstance(t, Neg):
        return Neg(_shift_core(t.arg, shift, fl))
    raise FlattenError(f"cannot flatten term {t}")


def _has_next_op(t: Term) -> bool:
    return any(isinstance(s, (Next, WNext)) for s in subterms(t))


def _flatten_literal(lit: FoFormula, fl: _Flattener) -> TemporalFormula:
    negated = isinstance(lit, Not)
    atom = lit.arg if isinstance(lit, Not) else lit
    assert isinstance(atom, Atom)
    if not any(_has_next_op(a) for a in atom.args):
        return Fo(lit)
    strength = classify_atom(atom)
    pushed = tuple(_pushdown(a, 0) for a in atom.args)
    depth = max(next_depth(p) for p in pushed)
    if depth == 1 and all(
        isinstance(s.arg, StateVar)
        for p in pushed
        for s in subterms(p)
        if isinstance(s, (Next, WNext))
    ):
        out_atom = Atom(atom.pred, pushed)
        return Fo(Not(out_atom) if negated else out_atom)
    shift = max(depth, 1)
    core = Atom(atom.pred, tuple(_shift_core(p, shift, fl) for p in pushed))
    leaf: TemporalFormula = Fo(Not(core) if negated else core)
    # X^d keeps the existence requirement of strong atoms; wX^d the vacuous
    # truth of weak ones.  Negation swaps the two.
    strong_wrap = (strength is AtomStrength.STRONG) != negated
    for _ in range(shift):
        leaf = X(leaf) if strong_wrap else WX(leaf)
    return leaf


def _flatten_formula(phi: TemporalFormula, fl: _Flattener) -> TemporalFormula:
    if isinstance(phi, TTrue):
        return phi
    if isinstance(phi, Fo):
        lam = phi.formula
        if isinstance(lam, (Atom, Not)):
            return _flatten_literal(lam, fl)
        if isinstance(lam, (Exists, Forall)):
            _reject_deep(lam)
            return phi
        if isinstance(lam, (FoFalse,)):
            return phi
        # NNF leaves are atoms, negated atoms or quantified formulas; other
        # shapes only appear in hand-built trees.
        _reject_deep(lam)
        return phi
    if isinstance(phi, TAnd):
        return TAnd(_flatten_formula(phi.left, fl), _flatten_formula(phi.right, fl))
    if isinstance(phi, TOr):
        return TOr(_flatten_formula(phi.left, fl), _flatten_formula(phi.right, fl))
    if isinstance(phi, X):
        return X(_flatten_formula(phi.arg, fl))
    if isinstance(phi, WX):
        return WX(_flatten_formula(phi.arg, fl))
    if isinstance(phi, U):
        return U(_flatten_formula(phi.left, fl), _flatten_formula(phi.right, fl))
    if isinstance(phi, R):
        return R(_flatten_formula(phi.left, fl), _flatten_formula(phi.right, fl))
    raise FlattenError(f"unknown formula: {phi!r}")


def _reject_deep(lam: FoFormula) -> None:
    for t in fo_terms(lam):
        if isinstance(t, (Next, WNext)) and not isinstance(t.arg, StateVar):
            raise FlattenError(
                "nested next-state terms under a quantifier are not supported: "
                f"{lam}"
            )


def flatten_next(
    phi: TemporalFormula, sig: Signature
) -> tuple[TemporalFormula, Signature]:
    """Rewrite phi so Next/WNext appear only directly on state variables.

    Returns the rewritten formula and the signature extended with the fresh
    `_flat<n>` delay variables.  Equisatisfiable with the input.
    """
    fl = _Flattener(sig)
    out = _flatten_formula(phi, fl)
    for tracker in fl.trackers:
        out = TAnd(out, R(Fo(FoFalse()), Fo(tracker)))
    return out, fl.sig
