"""Finite-trace semantics: explicit evaluation and the enumeration oracle.

A trace is a non-empty sequence of assignments to the state variables plus a
single rigid interpretation of constants and uninterpreted function/predicate
symbols shared by all states.  Evaluation is exact (int / Fraction); terms
containing next-state constructors are undefined at the last state, which
makes strong atoms false there and weak atoms true.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

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
    RELATIONS,
    Signature,
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


class SemanticsError(Exception):
    pass


class IncompleteInterpretation(SemanticsError):
    pass


class QuantifierDomainError(SemanticsError):
    """Raised when a quantifier is evaluated without a finite domain."""


class EnumerationCapError(SemanticsError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"enumeration search space exceeds cap of {cap} candidates")


@dataclass(frozen=True)
class Elem:
    """Abstract element of an uninterpreted sort, identified by a label."""

    sort: str
    label: str

    def __str__(self) -> str:
        return self.label


Value = object  # int | Fraction | bool | Elem


@dataclass
class Interpretation:
    constants: dict[str, Value] = field(default_factory=dict)
    functions: dict[str, dict[tuple, Value]] = field(default_factory=dict)
    predicates: dict[str, dict[tuple, bool]] = field(default_factory=dict)

    def constant(self, name: str) -> Value:
        if name not in self.constants:
            raise IncompleteInterpretation(f"incomplete interpretation: constant {name}")
        return self.constants[name]

    def apply(self, func: str, args: tuple) -> Value:
        table = self.functions.get(func)
        if table is None or args not in table:
            raise IncompleteInterpretation(
                f"incomplete interpretation: {func}({', '.join(map(str, args))})"
            )
        return table[args]

    def test(self, pred: str, args: tuple) -> bool:
        table = self.predicates.get(pred)
        if table is None or args not in table:
            raise IncompleteInterpretation(
                f"incomplete interpretation: {pred}({', '.join(map(str, args))})"
            )
        return table[args]


@dataclass
class Trace:
    states: list[dict[str, Value]]
    interp: Interpretation = field(default_factory=Interpretation)
    model_incomplete: bool = False

    def __post_init__(self):
        if not self.states:
            raise SemanticsError("a trace must have at least one state")

    def __len__(self) -> int:
        return len(self.states)

    def to_json(self) -> str:
        doc = {
            "length": len(self.states),
            "states": [
                {name: value_to_str(v) for name, v in st.items()} for st in self.states
            ],
        }
        return json.dumps(doc, indent=2)

    @staticmethod
    def from_json(text: str, sig: Signature) -> "Trace":
        doc = json.loads(text)
        states = []
        for st in doc["states"]:
            out: dict[str, Value] = {}
            for name, s in st.items():
                sort = sig.state_vars.get(name)
                if sort is None:
                    raise SemanticsError(f"unknown variable in trace: {name}")
                out[name] = value_from_str(s, sort.name)
            states.append(out)
        if doc.get("length") != len(states):
            raise SemanticsError("trace length field does not match states")
        return Trace(states)


def value_to_str(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, Elem):
        return v.label
    raise SemanticsError(f"unknown value: {v!r}")


def value_from_str(s: str, sort_name: str) -> Value:
    if sort_name == "Int":
        return int(s)
    if sort_name == "Real":
        return Fraction(s)
    return Elem(sort_name, s)


# ---------------------------------------------------------------------------
# Evaluation


def eval_term(t: Term, trace: Trace, i: int, env: dict[str, Value]) -> Value | None:
    """Value of t at instant i; None when it refers past the end of the trace."""
    if isinstance(t, StateVar):
        st = trace.states[i]
        if t.name not in st:
            raise SemanticsError(f"state {i} does not assign variable {t.name}")
        return st[t.name]
    if isinstance(t, BoundVar):
        if t.name not in env:
            raise SemanticsError(f"unbound variable {t.name}")
        return env[t.name]
    if isinstance(t, Const):
        return trace.interp.constant(t.name)
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, RatLit):
        return t.value
    if isinstance(t, (Next, WNext)):
        if i + 1 >= len(trace):
            return None
        return eval_term(t.arg, trace, i + 1, env)
    if isinstance(t, Apply):
        args = []
        for a in t.args:
            v = eval_term(a, trace, i, env)
            if v is None:
                return None
            args.append(v)
        return trace.interp.apply(t.func, tuple(args))
    if isinstance(t, (Add, Sub, Mul)):
        l = eval_term(t.left, trace, i, env)
        r = eval_term(t.right, trace, i, env)
        if l is None or r is None:
            return None
        if isinstance(t, Add):
            return l + r
        if isinstance(t, Sub):
            return l - r
        return l * r
    if isinstance(t, Div):
        n = eval_term(t.num, trace, i, env)
        d = eval_term(t.den, trace, i, env)
        if n is None or d is None:
            return None
        return Fraction(n) / Fraction(d)
    if isinstance(t, Neg):
        v = eval_term(t.arg, trace, i, env)
        return None if v is None else -v
    raise SemanticsError(f"unknown term: {t!r}")


def _holds_atom(a: Atom, trace: Trace, i: int, env: dict[str, Value]) -> bool:
    vals = []
    for arg in a.args:
        v = eval_term(arg, trace, i, env)
        if v is None:
            # Strong atoms require all terms well-defined; weak and rigid
            # atoms hold whenever some term is not.
            return classify_atom(a) is not AtomStrength.STRONG
        vals.append(v)
    if a.pred in RELATIONS:
        l, r = vals
        if a.pred == "=":
            return l == r
        if a.pred == "<":
            return l < r
        if a.pred == "<=":
            return l <= r
        if a.pred == ">":
            return l > r
        return l >= r
    return trace.interp.test(a.pred, tuple(vals))


def sat_fo(
    lam: FoFormula,
    trace: Trace,
    i: int,
    env: dict[str, Value] | None = None,
    domains: dict[str, list[Value]] | None = None,
) -> bool:
    env = env or {}
    if isinstance(lam, FoTrue):
        return True
    if isinstance(lam, FoFalse):
        return False
    if isinstance(lam, Atom):
        return _holds_atom(lam, trace, i, env)
    if isinstance(lam, Not):
        return not sat_fo(lam.arg, trace, i, env, domains)
    if isinstance(lam, And):
        return sat_fo(lam.left, trace, i, env, domains) and sat_fo(
            lam.right, trace, i, env, domains
        )
    if isinstance(lam, Or):
        return sat_fo(lam.left, trace, i, env, domains) or sat_fo(
            lam.right, trace, i, env, domains
        )
    if isinstance(lam, Implies):
        return (not sat_fo(lam.left, trace, i, env, domains)) or sat_fo(
            lam.right, trace, i, env, domains
        )
    if isinstance(lam, Iff):
        return sat_fo(lam.left, trace, i, env, domains) == sat_fo(
            lam.right, trace, i, env, domains
        )
    if isinstance(lam, (Exists, Forall)):
        if domains is None or lam.sort.name not in domains:
            raise QuantifierDomainError(
                "quantifier over a non-enumerable domain: delegate to SMT verification"
            )
        dom = domains[lam.sort.name]
        results = (
            sat_fo(lam.body, trace, i, {**env, lam.var: v}, domains) for v in dom
        )
        return any(results) if isinstance(lam, Exists) else all(results)
    raise SemanticsError(f"unknown first-order formula: {lam!r}")


def sat_temporal(
    phi: TemporalFormula,
    trace: Trace,
    i: int,
    domains: dict[str, list[Value]] | None = None,
) -> bool:
    n = len(trace)
    if not 0 <= i < n:
        raise SemanticsError(f"position {i} outside trace of length {n}")
    if isinstance(phi, TTrue):
        return True
    if isinstance(phi, Fo):
        return sat_fo(phi.formula, trace, i, {}, domains)
    if isinstance(phi, TAnd):
        return sat_temporal(phi.left, trace, i, domains) and sat_temporal(
            phi.right, trace, i, domains
        )
    if isinstance(phi, TOr):
        return sat_temporal(phi.left, trace, i, domains) or sat_temporal(
            phi.right, trace, i, domains
        )
    if isinstance(phi, X):
        return i < n - 1 and sat_temporal(phi.arg, trace, i + 1, domains)
    if isinstance(phi, WX):
        return i == n - 1 or sat_temporal(phi.arg, trace, i + 1, domains)
    if isinstance(phi, U):
        for j in range(i, n):
            if sat_temporal(phi.right, trace, j, domains):
                if all(sat_temporal(phi.left, trace, k, domains) for k in range(i, j)):
                    return True
        return False
    if isinstance(phi, R):
        if all(sat_temporal(phi.right, trace, j, domains) for j in range(i, n)):
            return True
        for k in range(i, n):
            if sat_temporal(phi.left, trace, k, domains):
                if all(
                    sat_temporal(phi.right, trace, j, domains) for j in range(i, k + 1)
                ):
                    return True
        return False
    raise SemanticsError(f"unknown temporal formula: {phi!r}")


# ---------------------------------------------------------------------------
# Brute-force enumeration oracle


def _interp_choices(sig: Signature, domains: dict[str, list[Value]]):
    """All rigid interpretations of the signature's uninterpreted symbols."""
    const_items = list(sig.constants.items())
    fun_items = list(sig.functions.items())
    pred_items = list(sig.predicates.items())

    const_options = [domains[s.name] for _, s in const_items]

    def fun_tables(args, res):
        arg_tuples = list(itertools.product(*(domains[s.name] for s in args)))
        for values in itertools.product(*(domains[res.name] for _ in arg_tuples)):
            yield dict(zip(arg_tuples, values))

    def pred_tables(args):
        arg_tuples = list(itertools.product(*(domains[s.name] for s in args)))
        for values in itertools.product(*([False, True] for _ in arg_tuples)):
            yield dict(zip(arg_tuples, values))

    fun_options = [list(fun_tables(a, r)) for _, (a, r) in fun_items]
    pred_options = [list(pred_tables(a)) for _, a in pred_items]

    for consts in itertools.product(*const_options):
        for funs in itertools.product(*fun_options):
            for preds in itertools.product(*pred_options):
                yield Interpretation(
                    constants={n: v for (n, _), v in zip(const_items, consts)},
                    functions={n: t for (n, _), t in zip(fun_items, funs)},
                    predicates={n: t for (n, _), t in zip(pred_items, preds)},
                )


def enumerate_sat(
    phi: TemporalFormula,
    sig: Signature,
    domains: dict[str, list[Value]],
    max_len: int,
    cap: int = 2_000_000,
) -> Trace | None:
    """Smallest satisfying trace over the finite domains, or None.

    Traces are tried in length-lexicographic order; every uninterpreted
    symbol's interpretation is enumerated over the domains as well.
    """
    var_names = list(sig.state_vars.keys())
    var_domains = [domains[sig.state_vars[v].name] for v in var_names]
    interps = list(_interp_choices(sig, domains))
    candidates = 0
    for length in range(1, max_len + 1):
        state_space = itertools.product(
            *(itertools.product(*var_domains) for _ in range(length))
        )
        for state_tuple in state_space:
            states = [dict(zip(var_names, vals)) for vals in state_tuple]
            for interp in interps:
                candidates += 1
                if candidates > cap:
                    raise EnumerationCapError(cap)
                trace = Trace(states=[dict(s) for s in states], interp=interp)
                if sat_temporal(phi, trace, 0, domains):
                    return trace
    return None
