"""Scalable benchmark families and the transition-system front end.

Each family generates a `.ltlmt` source text parameterized on N; the AST
form is obtained by parsing that text, which keeps the two representations
aligned by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    AtomStrength,
    Fo,
    FoFalse,
    Next,
    R,
    Signature,
    TAnd,
    TemporalFormula,
    WNext,
    WX,
    X,
    U,
    classify_atom,
    Atom,
    Not,
    fo_subformulas,
    fo_terms,
    temporal_fo_leaves,
    temporal_subformulas,
)
from .parser import parse, parse_transition_sections

FAMILIES = (
    "lia-counter",
    "lia-sum-unsat",
    "lra-decade",
    "lra-geometric",
    "euf-lia-recursion",
)


class BenchError(Exception):
    pass


@dataclass(frozen=True)
class BenchFamily:
    id: str
    n: int

    def __post_init__(self):
        if self.id not in FAMILIES:
            raise BenchError(f"unknown family {self.id!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise BenchError("N must be >= 1")


def _xn(n: int, body: str) -> str:
    for _ in range(n):
        body = f"X({body})"
    return body


def gen_text(f: BenchFamily) -> str:
    """The `.ltlmt` source of the family instance."""
    n = f.n
    if f.id == "lia-counter":
        return (
            "var x : Int;\n"
            f"formula: x = 0 & G(wnext(x) = x + 1) & F(x = {n});\n"
        )
    if f.id == "lia-sum-unsat":
        decls = "".join(f"var x{i} : Int;\n" for i in range(n + 1))
        chain = [f"x0 > 0"]
        for i in range(n):
            chain.append(_xn(i, f"next(x{i + 1}) > x{i}"))
        frozen = " & ".join(f"wnext(x{i}) = x{i}" for i in range(n + 1))
        total = " + ".join(f"x{i}" for i in range(n))
        const = n * (n - 1) // 2 - 1
        body = " & ".join(chain) + f" & G({frozen}) & G({total} = {const})"
        return decls + f"formula: {body};\n"
    if f.id == "lra-decade":
        return (
            "var c : Real;\nvar x : Real;\n"
            "formula: c = 1 & G(wnext(c) = 10 * c) & "
            + _xn(n, "x = c & G(wnext(x) = x / 10) & F(x = 1)")
            + ";\n"
        )
    if f.id == "lra-geometric":
        # The target fraction 1/10^N is carried by the reciprocal chain h and
        # pinned into the rigid constant g at the X^N block, so the threshold
        # atom stays linear.
        block = (
            "g = h & G(wnext(e) = e / 2 & wnext(x) = x + e & 0 <= x & x < 2)"
            " & F(x > 2 - g)"
        )
        return (
            "var c : Real;\nvar e : Real;\nvar x : Real;\nvar h : Real;\n"
            "const g : Real;\n"
            "formula: c = 1 & G(wnext(c) = 10 * c) & e = 1 & x = 0 & h = 1 & "
            "G(wnext(h) = h / 10) & " + _xn(n, block) + ";\n"
        )
    if f.id == "euf-lia-recursion":
        return (
            "var n : Int;\nvar c : Int;\nfun f(Int) : Int;\n"
            "formula: n = 0 & c >= 0 & G(wnext(c) = c & wnext(n) = n + 1) & "
            "G((n > 1 -> f(n) = 2 * f(n - 1) + c) & (n = 1 -> f(n) = c)) & "
            + _xn(n, "wX(false)")
            + ";\n"
        )
    raise BenchError(f"unknown family {f.id!r}")


def gen_benchmark(f: BenchFamily) -> tuple[Signature, TemporalFormula]:
    return parse(gen_text(f), filename=f"<{f.id}-{f.n}>")


# ---------------------------------------------------------------------------
# Transition systems


@dataclass
class TransitionSystemSpec:
    sig: Signature
    init: TemporalFormula
    trans: TemporalFormula
    prop: TemporalFormula


def _is_first_order(phi: TemporalFormula) -> bool:
    return not any(isinstance(g, (X, WX, U, R)) for g in temporal_subformulas(phi))


def _first_strong_atom(phi: TemporalFormula):
    for lam in temporal_fo_leaves(phi):
        for g in fo_subformulas(lam):
            if isinstance(g, Not):
                g = g.arg
            if isinstance(g, Atom) and classify_atom(g) is AtomStrength.STRONG:
                return g
    return None


def _has_next_terms(phi: TemporalFormula) -> bool:
    for lam in temporal_fo_leaves(phi):
        for t in fo_terms(lam):
            if isinstance(t, (Next, WNext)):
                return True
    return False


def compile_transition_system(ts: TransitionSystemSpec) -> TemporalFormula:
    """Initial condition, always-transition and property as one formula."""
    if not _is_first_order(ts.init) or _has_next_terms(ts.init):
        raise BenchError("init must be a purely first-order formula")
    if not _is_first_order(ts.trans):
        raise BenchError("trans must be a first-order formula")
    strong = _first_strong_atom(ts.trans)
    if strong is not None:
        raise BenchError(
            f"trans must be weak (no next-state terms requiring a successor): {strong}"
        )
    return TAnd(TAnd(ts.init, R(Fo(FoFalse()), ts.trans)), ts.prop)


def parse_transition_system(text: str, filename: str = "<input>") -> TransitionSystemSpec:
    sig, init, trans, prop = parse_transition_sections(text, filename)
    return TransitionSystemSpec(sig=sig, init=init, trans=trans, prop=prop)
