"""Main solving loop over the incremental encoding, witness extraction from
the solver model, and witness verification against the trace semantics.

The loop keeps one solver session: the unraveling grows monotonically via
deltas, while the empty-rule extras are asserted inside a push/pop scope at
each depth.  The unraveling check runs with the current step literal
unconstrained; only the empty-rule check forces it false.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .ast import (
    Apply,
    Atom,
    BoundVar,
    Exists,
    Fo,
    FoFormula,
    Forall,
    IntLit,
    Next,
    Not,
    RatLit,
    Signature,
    Sort,
    TemporalFormula,
    Term,
    TAnd,
    TOr,
    TTrue,
    U,
    R,
    WNext,
    WX,
    X,
    classify_atom,
    AtomStrength,
    eq,
    fo_subformulas,
    fo_terms,
    subterms,
    temporal_fo_leaves,
)
from .backend import (
    BackendError,
    CheckResult,
    Session,
    SolverConfig,
    infer_logic,
    open_session,
)
from .closure import closure
from .encoder import (
    empty_extras,
    step_formula,
    stepped_var,
    unravel_base,
    unravel_delta,
)
from .flatten import flatten_next, is_flat
from .semantics import (
    Elem,
    IncompleteInterpretation,
    Interpretation,
    QuantifierDomainError,
    Trace,
    Value,
    eval_term,
    sat_fo,
)
from .sortcheck import sort_check


class EngineDivergence(Exception):
    """The explicit tableau and the encoding disagreed on an input."""


@dataclass
class SolveOptions:
    max_k: int = 300  # 0 = unbounded
    backend: SolverConfig = field(default_factory=SolverConfig)
    verify: bool = False
    engine: str = "encoding"  # 'encoding' | 'tableau' | 'both'
    wall_deadline: float | None = None  # time.monotonic() limit
    dump_tableau: str | None = None


@dataclass
class SolveOutcome:
    status: str  # 'sat' | 'unsat' | 'unknown'
    k: int | None = None
    trace: Trace | None = None
    reason: str | None = None  # 'bound-exhausted' | 'backend-unknown' | 'timeout'
    verified: bool | None = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


def _deadline_exceeded(opts: SolveOptions) -> bool:
    return opts.wall_deadline is not None and time.monotonic() > opts.wall_deadline


def solve(phi: TemporalFormula, sig: Signature, opts: SolveOptions | None = None) -> SolveOutcome:
    """Decide satisfiability of phi; flattens and sort-checks if needed."""
    opts = opts or SolveOptions()
    if not is_flat(phi):
        phi, sig = flatten_next(phi, sig)
    sort_check(phi, sig)
    outcome = _dispatch(phi, sig, opts)
    if opts.verify and outcome.is_sat and outcome.trace is not None:
        vcfg = dataclasses.replace(opts.backend, trace_log=None)
        outcome.verified = verify_witness(outcome.trace, phi, sig, vcfg)
    return outcome


def _tableau_cfg(cfg: SolverConfig) -> SolverConfig:
    if cfg.trace_log is None:
        return cfg
    return dataclasses.replace(cfg, trace_log=cfg.trace_log + ".tableau")


def _dispatch(phi: TemporalFormula, sig: Signature, opts: SolveOptions) -> SolveOutcome:
    if opts.engine == "encoding":
        return _solve_encoding(phi, sig, opts)
    if opts.engine == "tableau":
        from .tableau import search

        max_poised = opts.max_k + 1 if opts.max_k > 0 else 0
        return search(phi, sig, _tableau_cfg(opts.backend), max_poised,
                      opts.dump_tableau, wall_deadline=opts.wall_deadline)
    if opts.engine == "both":
        from .tableau import search

        enc = _solve_encoding(phi, sig, opts)
        max_poised = opts.max_k + 1 if opts.max_k > 0 else 0
        tab = search(phi, sig, _tableau_cfg(opts.backend), max_poised,
                     opts.dump_tableau, wall_deadline=opts.wall_deadline)
        if enc.status != tab.status or (
            enc.status == "sat" and tab.k is not None and enc.k != tab.k
        ):
            raise EngineDivergence(
                f"engines disagree: encoding={enc.status}(k={enc.k}) "
                f"tableau={tab.status}(k={tab.k})"
            )
        return enc
    raise ValueError(f"unknown engine {opts.engine!r}")


def _solve_encoding(phi: TemporalFormula, sig: Signature, opts: SolveOptions) -> SolveOutcome:
    ct = closure(phi)
    logic = opts.backend.logic or infer_logic(phi, sig)
    session = open_session(opts.backend, sig, logic)
    try:
        session.assert_formula(unravel_base(phi, ct))
        k = 0
        while True:
            if _deadline_exceeded(opts):
                return SolveOutcome("unknown", k=k, reason="timeout")
            r1 = session.check()
            if r1.is_unsat:
                return SolveOutcome("unsat", k=k)
            if r1.is_unknown:
                return SolveOutcome("unknown", k=k, reason=_unknown_reason(r1))
            session.push()
            session.assert_formula(empty_extras(phi, k, ct))
            r2 = session.check()
            if r2.is_sat:
                trace = extract_trace(session, sig, phi, k)
                session.pop()
                return SolveOutcome("sat", k=k, trace=trace)
            if r2.is_unknown:
                return SolveOutcome("unknown", k=k, reason=_unknown_reason(r2))
            session.pop()
            if opts.max_k and k >= opts.max_k:
                return SolveOutcome("unknown", k=k, reason="bound-exhausted")
            session.assert_formula(unravel_delta(phi, k, ct))
            k += 1
    finally:
        session.close()


def _unknown_reason(r: CheckResult) -> str:
    return "timeout" if r.reason == "timeout" else "backend-unknown"


# ---------------------------------------------------------------------------
# Trace extraction


def _default_value(sort: Sort) -> Value:
    if sort.name == "Int":
        return 0
    if sort.name == "Real":
        return Fraction(0)
    return Elem(sort.name, f"@{sort.name}!_default")


def _value_literal(v: Value) -> Term | None:
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, Fraction):
        return RatLit(v)
    return None


def _ground_apps(phi: TemporalFormula) -> list[Apply]:
    """Function applications without bound variables, innermost first."""
    apps: list[Apply] = []
    seen = set()
    for lam in temporal_fo_leaves(phi):
        for t in fo_terms(lam):
            if isinstance(t, Apply) and t not in seen:
                if not any(isinstance(s, BoundVar) for s in subterms(t)):
                    seen.add(t)
                    apps.append(t)
    apps.sort(key=lambda a: sum(1 for _ in subterms(a)))
    return apps


def _ground_pred_atoms(phi: TemporalFormula, sig: Signature) -> list[Atom]:
    atoms: list[Atom] = []
    seen = set()
    for lam in temporal_fo_leaves(phi):
        for f in fo_subformulas(lam):
            if isinstance(f, Not):
                f = f.arg
            if isinstance(f, Atom) and f.pred in sig.predicates and f not in seen:
                if not any(isinstance(s, BoundVar) for a in f.args for s in subterms(a)):
                    seen.add(f)
                    atoms.append(f)
    return atoms


def extract_trace(session: Session, sig: Signature, phi: TemporalFormula, k: int) -> Trace:
    """Build the witness trace from the model of the last sat check.

    State i assigns each variable the value of its stepped copy at i;
    variables the encoding never mentioned get per-sort defaults and the
    trace is flagged model-incomplete.  The interpretation oracle is filled
    by get-value queries on the ground function/predicate applications of
    phi at every state.
    """
    wanted = []
    for name in sig.state_vars:
        for i in range(k + 1):
            sym = stepped_var(name, i).name
            if sym in session.declared:
                wanted.append(sym)
    values = session.model_values(wanted)
    incomplete = False
    states: list[dict[str, Value]] = []
    for i in range(k + 1):
        st: dict[str, Value] = {}
        for name, sort in sig.state_vars.items():
            sym = stepped_var(name, i).name
            if sym in values:
                st[name] = values[sym]
            else:
                st[name] = _default_value(sort)
                incomplete = True
        states.append(st)
    interp = Interpretation()
    for cname, csort in sig.constants.items():
        if cname in session.declared:
            interp.constants[cname] = session.value_of_term(
                _const_term(cname)
            )
        else:
            interp.constants[cname] = _default_value(csort)
    trace = Trace(states=states, interp=interp, model_incomplete=incomplete)
    _fill_interp(session, sig, phi, trace, k)
    return trace


def _const_term(name: str) -> Term:
    from .ast import Const

    return Const(name)


def _fill_interp(
    session: Session, sig: Signature, phi: TemporalFormula, trace: Trace, k: int
) -> None:
    for app in _ground_apps(phi):
        for i in range(k + 1):
            argvals = []
            ok = True
            for a in app.args:
                v = eval_term(a, trace, i, {})
                if v is None:
                    ok = False
                    break
                argvals.append(v)
            if not ok:
                continue
            key = tuple(argvals)
            table = trace.interp.functions.setdefault(app.func, {})
            if key in table:
                continue
            literals = [_value_literal(v) for v in argvals]
            if all(l is not None for l in literals):
                value = session.value_of_term(Apply(app.func, tuple(literals)))
            else:
                value = session.value_of_term(
                    step_formula_term(app, i)
                )
            table[key] = value
    for atom in _ground_pred_atoms(phi, sig):
        for i in range(k + 1):
            argvals = []
            ok = True
            for a in atom.args:
                v = eval_term(a, trace, i, {})
                if v is None:
                    ok = False
                    break
                argvals.append(v)
            if not ok:
                continue
            key = tuple(argvals)
            table = trace.interp.predicates.setdefault(atom.pred, {})
            if key in table:
                continue
            literals = [_value_literal(v) for v in argvals]
            if all(l is not None for l in literals):
                value = session.value_of_pred(Atom(atom.pred, tuple(literals)))
            else:
                value = session.value_of_pred(
                    Atom(atom.pred, tuple(_stepped_args(atom.args, i)))
                )
            table[key] = bool(value)


def step_formula_term(app: Apply, i: int) -> Term:
    from .encoder import step_term

    return step_term(app, i)


def _stepped_args(args: tuple[Term, ...], i: int) -> list[Term]:
    from .encoder import step_term

    return [step_term(a, i) for a in args]


# ---------------------------------------------------------------------------
# Witness verification


class _VerifyUnknown(Exception):
    pass


class _Verifier:
    """Checks sigma, 0 |= phi.  Quantifier-free leaves over interpreted
    symbols evaluate directly; quantified leaves and leaves whose needed
    interpretation points are missing go to a solver query that conjoins the
    state's variable values."""

    def __init__(self, trace: Trace, sig: Signature, cfg: SolverConfig):
        self.trace = trace
        self.sig = sig
        self.cfg = cfg
        self.session: Session | None = None
        self.pinned_states: set[int] = set()

    def close(self) -> None:
        if self.session is not None:
            self.session.close()
            self.session = None

    def holds(self, phi: TemporalFormula, i: int) -> bool:
        n = len(self.trace)
        if isinstance(phi, TTrue):
            return True
        if isinstance(phi, Fo):
            return self.fo_holds(phi.formula, i)
        if isinstance(phi, TAnd):
            return self.holds(phi.left, i) and self.holds(phi.right, i)
        if isinstance(phi, TOr):
            return self.holds(phi.left, i) or self.holds(phi.right, i)
        if isinstance(phi, X):
            return i < n - 1 and self.holds(phi.arg, i + 1)
        if isinstance(phi, WX):
            return i == n - 1 or self.holds(phi.arg, i + 1)
        if isinstance(phi, U):
            for j in range(i, n):
                if self.holds(phi.right, j):
                    if all(self.holds(phi.left, m) for m in range(i, j)):
                        return True
            return False
        if isinstance(phi, R):
            if all(self.holds(phi.right, j) for j in range(i, n)):
                return True
            for m in range(i, n):
                if self.holds(phi.left, m):
                    if all(self.holds(phi.right, j) for j in range(i, m + 1)):
                        return True
            return False
        raise TypeError(f"unknown temporal formula: {phi!r}")

    def fo_holds(self, lam: FoFormula, i: int) -> bool:
        try:
            return sat_fo(lam, self.trace, i, {})
        except (QuantifierDomainError, IncompleteInterpretation):
            return self.delegate(lam, i)

    def delegate(self, lam: FoFormula, i: int) -> bool:
        lam = self._resolve_end_atoms(lam, i)
        sess = self._ensure_session()
        self._pin_state(i)
        if i + 1 < len(self.trace):
            self._pin_state(i + 1)
        sess.push()
        sess.assert_formula(step_formula_fo(lam, i))
        r = sess.check()
        sess.pop()
        if r.is_unknown:
            raise _VerifyUnknown(r.reason or "backend-unknown")
        return r.is_sat

    def _resolve_end_atoms(self, lam: FoFormula, i: int) -> FoFormula:
        """At the last state, atoms with next-state terms are decided by
        strength before anything reaches the solver."""
        from .ast import And, Or, FoTrue, FoFalse, Implies, Iff

        if i < len(self.trace) - 1:
            return lam
        if isinstance(lam, (Atom, Not)):
            atom = lam.arg if isinstance(lam, Not) else lam
            if isinstance(atom, Atom) and any(
                isinstance(s, (Next, WNext)) for a in atom.args for s in subterms(a)
            ):
                truth = classify_atom(atom) is not AtomStrength.STRONG
                if isinstance(lam, Not):
                    truth = not truth
                return FoTrue() if truth else FoFalse()
            return lam
        if isinstance(lam, And):
            return And(self._resolve_end_atoms(lam.left, i), self._resolve_end_atoms(lam.right, i))
        if isinstance(lam, Or):
            return Or(self._resolve_end_atoms(lam.left, i), self._resolve_end_atoms(lam.right, i))
        if isinstance(lam, Exists):
            return Exists(lam.var, lam.sort, self._resolve_end_atoms(lam.body, i))
        if isinstance(lam, Forall):
            return Forall(lam.var, lam.sort, self._resolve_end_atoms(lam.body, i))
        return lam

    def _ensure_session(self) -> Session:
        if self.session is None:
            self.session = open_session(self.cfg, self.sig, "ALL")
            self._pin_interp()
        return self.session

    def _pin_state(self, i: int) -> None:
        if i in self.pinned_states:
            return
        self.pinned_states.add(i)
        for name, value in self.trace.states[i].items():
            lit = _value_literal(value)
            if lit is not None:
                self.session.assert_formula(eq(stepped_var(name, i), lit))

    def _pin_interp(self) -> None:
        interp = self.trace.interp
        for cname, v in interp.constants.items():
            lit = _value_literal(v)
            if lit is not None:
                self.session.assert_formula(eq(_const_term(cname), lit))
        for fname, table in interp.functions.items():
            for args, v in table.items():
                arg_lits = [_value_literal(a) for a in args]
                v_lit = _value_literal(v)
                if v_lit is not None and all(l is not None for l in arg_lits):
                    self.session.assert_formula(
                        eq(Apply(fname, tuple(arg_lits)), v_lit)
                    )
        for pname, table in interp.predicates.items():
            for args, truth in table.items():
                arg_lits = [_value_literal(a) for a in args]
                if all(l is not None for l in arg_lits):
                    atom = Atom(pname, tuple(arg_lits))
                    self.session.assert_formula(atom if truth else Not(atom))


def step_formula_fo(lam: FoFormula, i: int) -> FoFormula:
    return step_formula(lam, i)


def verify_witness(
    trace: Trace,
    phi: TemporalFormula,
    sig: Signature,
    cfg: SolverConfig | None = None,
) -> bool | None:
    """True/False verdict of sigma,0 |= phi; None when a delegated solver
    check answered unknown."""
    v = _Verifier(trace, sig, cfg or SolverConfig())
    try:
        return v.holds(phi, 0)
    except _VerifyUnknown:
        return None
    finally:
        v.close()
