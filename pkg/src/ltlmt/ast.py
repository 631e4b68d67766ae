"""Core syntax trees: sorts, signatures, terms and the two formula layers.

The first-order layer is kept in negation normal form after parsing (negation
only directly on atoms, no implication), while the ground/encoded layer reuses
the same node classes and is allowed to contain ``Not``/``Implies``/``Iff``
freely.  The temporal layer sits on top with ``Fo`` leaves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator


# ---------------------------------------------------------------------------
# Sorts and signatures


@dataclass(frozen=True)
class Sort:
    name: str
    uninterpreted: bool = False

    @property
    def is_numeric(self) -> bool:
        return self.name in ("Int", "Real") and not self.uninterpreted

    def __str__(self) -> str:
        return self.name


INT = Sort("Int")
REAL = Sort("Real")


def uninterpreted_sort(name: str) -> Sort:
    return Sort(name, uninterpreted=True)


class SignatureError(Exception):
    pass


@dataclass
class Signature:
    """Declared symbols: state variables, constants, functions, predicates.

    Quantified variables are scoped inside formulas and never appear here.
    Treated as immutable after construction; extension goes through
    ``with_var`` and friends, which return a new signature.
    """

    sorts: dict[str, Sort]
    state_vars: dict[str, Sort]
    constants: dict[str, Sort]
    functions: dict[str, tuple[tuple[Sort, ...], Sort]]
    predicates: dict[str, tuple[Sort, ...]]

    @staticmethod
    def empty() -> "Signature":
        return Signature(
            sorts={"Int": INT, "Real": REAL},
            state_vars={},
            constants={},
            functions={},
            predicates={},
        )

    def _check_fresh(self, name: str) -> None:
        for cat in (self.state_vars, self.constants, self.functions, self.predicates):
            if name in cat:
                raise SignatureError(f"duplicate declaration of '{name}'")

    def _check_sort(self, sort: Sort) -> None:
        if sort.name not in self.sorts:
            raise SignatureError(f"undeclared sort '{sort.name}'")

    def with_sort(self, name: str) -> "Signature":
        if name in self.sorts:
            raise SignatureError(f"duplicate declaration of sort '{name}'")
        new = self.copy()
        new.sorts[name] = uninterpreted_sort(name)
        return new

    def with_var(self, name: str, sort: Sort) -> "Signature":
        self._check_fresh(name)
        self._check_sort(sort)
        new = self.copy()
        new.state_vars[name] = sort
        return new

    def with_const(self, name: str, sort: Sort) -> "Signature":
        self._check_fresh(name)
        self._check_sort(sort)
        new = self.copy()
        new.constants[name] = sort
        return new

    def with_function(self, name: str, args: tuple[Sort, ...], result: Sort) -> "Signature":
        self._check_fresh(name)
        for s in args + (result,):
            self._check_sort(s)
        new = self.copy()
        new.functions[name] = (args, result)
        return new

    def with_predicate(self, name: str, args: tuple[Sort, ...]) -> "Signature":
        self._check_fresh(name)
        for s in args:
            self._check_sort(s)
        new = self.copy()
        new.predicates[name] = args
        return new

    def copy(self) -> "Signature":
        return Signature(
            sorts=dict(self.sorts),
            state_vars=dict(self.state_vars),
            constants=dict(self.constants),
            functions=dict(self.functions),
            predicates=dict(self.predicates),
        )


# ---------------------------------------------------------------------------
# Terms


class Term:
    def __str__(self) -> str:
        from .printer import print_term

        return print_term(self)


@dataclass(frozen=True)
class StateVar(Term):
    name: str


@dataclass(frozen=True)
class BoundVar(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class IntLit(Term):
    value: int


@dataclass(frozen=True)
class RatLit(Term):
    value: Fraction


@dataclass(frozen=True)
class Apply(Term):
    func: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Mul(Term):
    """Multiplication where at least one factor is a numeric literal."""

    left: Term
    right: Term


@dataclass(frozen=True)
class Div(Term):
    """Division of a term by a non-zero numeric literal (Real only)."""

    num: Term
    den: Term


@dataclass(frozen=True)
class Next(Term):
    """Value of ``arg`` at the next state.  Flat form requires a StateVar."""

    arg: Term


@dataclass(frozen=True)
class WNext(Term):
    """Like Next, but atoms containing only these hold at the last state."""

    arg: Term


def term_children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Apply):
        return t.args
    if isinstance(t, (Add, Sub, Mul)):
        return (t.left, t.right)
    if isinstance(t, Div):
        return (t.num, t.den)
    if isinstance(t, Neg):
        return (t.arg,)
    if isinstance(t, (Next, WNext)):
        return (t.arg,)
    return ()


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in term_children(t):
        yield from subterms(c)


def next_depth(t: Term) -> int:
    """Maximum nesting of Next/WNext constructors within the term."""
    if isinstance(t, (Next, WNext)):
        return 1 + next_depth(t.arg)
    kids = term_children(t)
    return max((next_depth(c) for c in kids), default=0)


# ---------------------------------------------------------------------------
# First-order layer


class FoFormula:
    def __str__(self) -> str:
        from .printer import print_fo

        return print_fo(self)


@dataclass(frozen=True)
class FoTrue(FoFormula):
    pass


@dataclass(frozen=True)
class FoFalse(FoFormula):
    pass


@dataclass(frozen=True)
class Atom(FoFormula):
    """Built-in relation ('=', '<', '<=', '>', '>=') or predicate application."""

    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(FoFormula):
    arg: FoFormula


@dataclass(frozen=True)
class And(FoFormula):
    left: FoFormula
    right: FoFormula


@dataclass(frozen=True)
class Or(FoFormula):
    left: FoFormula
    right: FoFormula


@dataclass(frozen=True)
class Implies(FoFormula):
    left: FoFormula
    right: FoFormula


@dataclass(frozen=True)
class Iff(FoFormula):
    left: FoFormula
    right: FoFormula


@dataclass(frozen=True)
class Exists(FoFormula):
    var: str
    sort: Sort
    body: FoFormula


@dataclass(frozen=True)
class Forall(FoFormula):
    var: str
    sort: Sort
    body: FoFormula


RELATIONS = ("=", "<", "<=", ">", ">=")


def fo_children(f: FoFormula) -> tuple[FoFormula, ...]:
    if isinstance(f, (And, Or, Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def fo_subformulas(f: FoFormula) -> Iterator[FoFormula]:
    yield f
    for c in fo_children(f):
        yield from fo_subformulas(c)


def fo_atoms(f: FoFormula) -> Iterator[Atom]:
    for g in fo_subformulas(f):
        if isinstance(g, Atom):
            yield g


def fo_terms(f: FoFormula) -> Iterator[Term]:
    for a in fo_atoms(f):
        for t in a.args:
            yield from subterms(t)


def is_nnf_fo(f: FoFormula) -> bool:
    """Negation only directly on atoms, no Implies/Iff."""
    if isinstance(f, (Implies, Iff)):
        return False
    if isinstance(f, Not):
        return isinstance(f.arg, Atom)
    return all(is_nnf_fo(c) for c in fo_children(f))


# ---------------------------------------------------------------------------
# Atom strength


class AtomStrength(Enum):
    STRONG = "strong"
    WEAK = "weak"
    RIGID = "rigid"


def classify_atom(atom: FoFormula) -> AtomStrength:
    """Strength of a (possibly negated) atom by its next-state term content.

    Any Next occurrence makes the atom strong, even mixed with WNext.
    """
    if isinstance(atom, Not):
        atom = atom.arg
    if not isinstance(atom, Atom):
        raise TypeError(f"not an atom: {atom!r}")
    has_next = False
    has_wnext = False
    for arg in atom.args:
        for t in subterms(arg):
            if isinstance(t, Next):
                has_next = True
            elif isinstance(t, WNext):
                has_wnext = True
    if has_next:
        return AtomStrength.STRONG
    if has_wnext:
        return AtomStrength.WEAK
    return AtomStrength.RIGID


# ---------------------------------------------------------------------------
# Temporal layer


class TemporalFormula:
    def __str__(self) -> str:
        from .printer import print_temporal

        return print_temporal(self)


@dataclass(frozen=True)
class TTrue(TemporalFormula):
    pass


@dataclass(frozen=True)
class Fo(TemporalFormula):
    formula: FoFormula


@dataclass(frozen=True)
class TAnd(TemporalFormula):
    left: TemporalFormula
    right: TemporalFormula


@dataclass(frozen=True)
class TOr(TemporalFormula):
    left: TemporalFormula
    right: TemporalFormula


@dataclass(frozen=True)
class X(TemporalFormula):
    arg: TemporalFormula


@dataclass(frozen=True)
class WX(TemporalFormula):
    arg: TemporalFormula


@dataclass(frozen=True)
class U(TemporalFormula):
    left: TemporalFormula
    right: TemporalFormula


@dataclass(frozen=True)
class R(TemporalFormula):
    left: TemporalFormula
    right: TemporalFormula


def temporal_children(f: TemporalFormula) -> tuple[TemporalFormula, ...]:
    if isinstance(f, (TAnd, TOr, U, R)):
        return (f.left, f.right)
    if isinstance(f, (X, WX)):
        return (f.arg,)
    return ()


def temporal_subformulas(f: TemporalFormula) -> Iterator[TemporalFormula]:
    yield f
    for c in temporal_children(f):
        yield from temporal_subformulas(c)


def temporal_fo_leaves(f: TemporalFormula) -> Iterator[FoFormula]:
    for g in temporal_subformulas(f):
        if isinstance(g, Fo):
            yield g.formula


def is_elementary(f: TemporalFormula) -> bool:
    """First-order, tomorrow or weak-tomorrow formulas need no expansion."""
    return isinstance(f, (Fo, X, WX, TTrue))


# Convenience builders used by tests and the benchmark generators.


def conj(parts: list[TemporalFormula]) -> TemporalFormula:
    if not parts:
        return TTrue()
    out = parts[0]
    for p in parts[1:]:
        out = TAnd(out, p)
    return out


def fo_conj(parts: list[FoFormula]) -> FoFormula:
    if not parts:
        return FoTrue()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def eq(a: Term, b: Term) -> Atom:
    return Atom("=", (a, b))
