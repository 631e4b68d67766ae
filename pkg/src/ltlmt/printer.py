"""Canonical text rendering of terms, formulas and source files.

The printer inserts the minimal parentheses needed to re-parse to the same
tree under the fixed precedence ladder (implication < or < and < U/R < unary)
and is the inverse of the parser on canonical trees.
"""

from __future__ import annotations

from fractions import Fraction

from . import ast, nnf
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
    X,
    WX,
)

# Formula precedence levels, loosest first.
_IMP, _OR, _AND, _UR, _UNARY, _PRIM = 10, 20, 30, 40, 50, 60

# Term precedence levels.
_ADD, _MUL, _NEG, _TPRIM = 10, 20, 30, 40


def _rat_str(v: Fraction) -> str:
    num, den = v.numerator, v.denominator
    k = 0
    d = den
    while d % 10 == 0:
        d //= 10
        k += 1
    while d % 2 == 0:
        d //= 2
        k += 1
        num *= 5
    while d % 5 == 0:
        d //= 5
        k += 1
        num *= 2
    if d != 1:
        return f"{v.numerator}/{v.denominator}"
    digits = str(abs(num)).rjust(k + 1, "0")
    sign = "-" if num < 0 else ""
    if k == 0:
        return f"{sign}{digits}.0"
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def print_term(t: Term, level: int = 0) -> str:
    s, lv = _term(t)
    if lv < level:
        return f"({s})"
    return s


def _term(t: Term) -> tuple[str, int]:
    if isinstance(t, (StateVar, BoundVar, Const)):
        return t.name, _TPRIM
    if isinstance(t, IntLit):
        return str(t.value), _TPRIM if t.value >= 0 else _NEG
    if isinstance(t, RatLit):
        s = _rat_str(t.value)
        return s, _TPRIM if not s.startswith("-") else _NEG
    if isinstance(t, Apply):
        return f"{t.func}({', '.join(print_term(a) for a in t.args)})", _TPRIM
    if isinstance(t, Next):
        return f"next({print_term(t.arg)})", _TPRIM
    if isinstance(t, WNext):
        return f"wnext({print_term(t.arg)})", _TPRIM
    if isinstance(t, Add):
        return f"{print_term(t.left, _ADD)} + {print_term(t.right, _ADD + 1)}", _ADD
    if isinstance(t, Sub):
        return f"{print_term(t.left, _ADD)} - {print_term(t.right, _ADD + 1)}", _ADD
    if isinstance(t, Mul):
        return f"{print_term(t.left, _MUL)} * {print_term(t.right, _MUL + 1)}", _MUL
    if isinstance(t, Div):
        return f"{print_term(t.num, _MUL)} / {print_term(t.den, _MUL + 1)}", _MUL
    if isinstance(t, Neg):
        return f"-{print_term(t.arg, _NEG)}", _NEG
    raise TypeError(f"unknown term: {t!r}")


def _atom_str(f: Atom) -> tuple[str, int]:
    if f.pred in ast.RELATIONS:
        a, b = f.args
        return f"{print_term(a)} {f.pred} {print_term(b)}", _UNARY
    if not f.args:
        return f.pred, _PRIM
    return f"{f.pred}({', '.join(print_term(a) for a in f.args)})", _PRIM


def print_fo(f: FoFormula, level: int = 0) -> str:
    s, lv = _fo(f)
    if lv < level:
        return f"({s})"
    return s


def _fo(f: FoFormula) -> tuple[str, int]:
    if isinstance(f, FoTrue):
        return "true", _PRIM
    if isinstance(f, FoFalse):
        return "false", _PRIM
    if isinstance(f, Atom):
        return _atom_str(f)
    if isinstance(f, Not):
        inner = print_fo(f.arg, _PRIM)
        return f"!{inner}", _UNARY
    if isinstance(f, And):
        return f"{print_fo(f.left, _AND)} & {print_fo(f.right, _AND + 1)}", _AND
    if isinstance(f, Or):
        return f"{print_fo(f.left, _OR)} | {print_fo(f.right, _OR + 1)}", _OR
    if isinstance(f, Implies):
        return f"{print_fo(f.left, _IMP + 1)} -> {print_fo(f.right, _IMP)}", _IMP
    if isinstance(f, Iff):
        # Not part of the input language; shown for debugging ground formulas.
        return f"{print_fo(f.left, _IMP + 1)} <-> {print_fo(f.right, _IMP + 1)}", _IMP
    if isinstance(f, Exists):
        return f"exists {f.var}:{f.sort.name} . {print_fo(f.body, _UNARY)}", _UNARY
    if isinstance(f, Forall):
        return f"forall {f.var}:{f.sort.name} . {print_fo(f.body, _UNARY)}", _UNARY
    raise TypeError(f"unknown first-order formula: {f!r}")


def print_temporal(f: TemporalFormula, level: int = 0) -> str:
    s, lv = _temporal(f)
    if lv < level:
        return f"({s})"
    return s


def _temporal(f: TemporalFormula) -> tuple[str, int]:
    if isinstance(f, TTrue):
        return "true", _PRIM
    if isinstance(f, Fo):
        return _fo(f.formula)
    if isinstance(f, TAnd):
        return f"{print_temporal(f.left, _AND)} & {print_temporal(f.right, _AND + 1)}", _AND
    if isinstance(f, TOr):
        return f"{print_temporal(f.left, _OR)} | {print_temporal(f.right, _OR + 1)}", _OR
    if isinstance(f, X):
        return f"X({print_temporal(f.arg)})", _PRIM
    if isinstance(f, WX):
        return f"wX({print_temporal(f.arg)})", _PRIM
    if isinstance(f, U):
        return f"{print_temporal(f.left, _UR + 1)} U {print_temporal(f.right, _UR)}", _UR
    if isinstance(f, R):
        return f"{print_temporal(f.left, _UR + 1)} R {print_temporal(f.right, _UR)}", _UR
    raise TypeError(f"unknown temporal formula: {f!r}")


def print_surface(f: object, level: int = 0) -> str:
    s, lv = _surface(f)
    if lv < level:
        return f"({s})"
    return s


def _surface(f: object) -> tuple[str, int]:
    if isinstance(f, nnf.STrue):
        return "true", _PRIM
    if isinstance(f, nnf.SFalse):
        return "false", _PRIM
    if isinstance(f, nnf.SAtom):
        return _atom_str(Atom(f.pred, f.args))
    if isinstance(f, nnf.SNot):
        return f"!{print_surface(f.arg, _PRIM)}", _UNARY
    if isinstance(f, nnf.SAnd):
        return f"{print_surface(f.left, _AND)} & {print_surface(f.right, _AND + 1)}", _AND
    if isinstance(f, nnf.SOr):
        return f"{print_surface(f.left, _OR)} | {print_surface(f.right, _OR + 1)}", _OR
    if isinstance(f, nnf.SImplies):
        return f"{print_surface(f.left, _IMP + 1)} -> {print_surface(f.right, _IMP)}", _IMP
    if isinstance(f, nnf.SX):
        return f"X({print_surface(f.arg)})", _PRIM
    if isinstance(f, nnf.SWX):
        return f"wX({print_surface(f.arg)})", _PRIM
    if isinstance(f, nnf.SU):
        return f"{print_surface(f.left, _UR + 1)} U {print_surface(f.right, _UR)}", _UR
    if isinstance(f, nnf.SR):
        return f"{print_surface(f.left, _UR + 1)} R {print_surface(f.right, _UR)}", _UR
    if isinstance(f, nnf.SExists):
        return f"exists {f.var}:{f.sort.name} . {print_surface(f.body, _UNARY)}", _UNARY
    if isinstance(f, nnf.SForall):
        return f"forall {f.var}:{f.sort.name} . {print_surface(f.body, _UNARY)}", _UNARY
    if isinstance(f, TemporalFormula):
        return _temporal(f)
    if isinstance(f, FoFormula):
        return _fo(f)
    raise TypeError(f"unknown surface formula: {f!r}")


def print_source(sig: Signature, formula: TemporalFormula) -> str:
    """Render declarations plus the formula as a complete source file."""
    lines: list[str] = []
    for name, sort in sig.sorts.items():
        if sort.uninterpreted:
            lines.append(f"sort {name};")
    for name, sort in sig.state_vars.items():
        lines.append(f"var {name} : {sort.name};")
    for name, sort in sig.constants.items():
        lines.append(f"const {name} : {sort.name};")
    for name, (args, res) in sig.functions.items():
        lines.append(f"fun {name}({', '.join(s.name for s in args)}) : {res.name};")
    for name, args in sig.predicates.items():
        lines.append(f"pred {name}({', '.join(s.name for s in args)});")
    lines.append(f"formula: {print_temporal(formula)};")
    return "\n".join(lines) + "\n"
