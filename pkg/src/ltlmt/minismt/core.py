"""Typed internal form of SMT-LIB terms and assertions.

Sorts are strings: "Bool", "Int", "Real" or a declared uninterpreted sort
name.  Numeric terms are linear: sums, differences and scaling by literal
constants; uninterpreted function applications are opaque leaves.  Anything
outside the supported fragment raises Unsupported, which poisons the current
assertion scope (check-sat answers unknown) rather than crashing the session.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class SmtError(Exception):
    """Malformed input; reported as an (error ...) response."""


class Unsupported(Exception):
    """Well-formed input outside the solvable fragment."""


# --- terms


@dataclass(frozen=True)
class TSym:
    name: str
    sort: str


@dataclass(frozen=True)
class TNum:
    val: Fraction
    sort: str  # "Int" or "Real"


@dataclass(frozen=True)
class TApp:
    fn: str
    args: tuple
    sort: str


@dataclass(frozen=True)
class TAdd:
    args: tuple


@dataclass(frozen=True)
class TMul:
    coeff: Fraction
    arg: object


def term_sort(t, env) -> str:
    if isinstance(t, TSym):
        return t.sort
    if isinstance(t, TNum):
        return t.sort
    if isinstance(t, TApp):
        return t.sort
    if isinstance(t, TAdd):
        for a in t.args:
            s = term_sort(a, env)
            if s == "Real":
                return "Real"
        return "Int"
    if isinstance(t, TMul):
        return term_sort(t.arg, env)
    raise SmtError(f"unknown term {t!r}")


# --- formulas


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


@dataclass(frozen=True)
class FNot:
    arg: object


@dataclass(frozen=True)
class FAnd:
    args: tuple


@dataclass(frozen=True)
class FOr:
    args: tuple


@dataclass(frozen=True)
class FImp:
    left: object
    right: object


@dataclass(frozen=True)
class FIff:
    left: object
    right: object


@dataclass(frozen=True)
class FCmp:
    op: str  # '<', '<=', '>', '>=', '='
    left: object
    right: object


@dataclass(frozen=True)
class FPred:
    name: str
    args: tuple


@dataclass(frozen=True)
class FDiv:
    """Divisibility d | arg, introduced by quantifier elimination."""

    d: int
    arg: object


@dataclass(frozen=True)
class FQuant:
    kind: str  # 'exists' | 'forall'
    var: str
    sort: str
    body: object


@dataclass
class Declarations:
    sorts: set
    consts: dict  # name -> sort
    funs: dict  # name -> (arg sorts, result sort)

    @staticmethod
    def new() -> "Declarations":
        return Declarations(sorts={"Bool", "Int", "Real"}, consts={}, funs={})


def lin_term(t) -> tuple[dict, Fraction]:
    """Decompose a numeric term into (coefficients over opaque keys, constant).

    Keys are TSym/TApp instances; raises Unsupported on nonlinear structure.
    """
    if isinstance(t, TNum):
        return {}, t.val
    if isinstance(t, (TSym, TApp)):
        return {t: Fraction(1)}, Fraction(0)
    if isinstance(t, TAdd):
        coeffs: dict = {}
        const = Fraction(0)
        for a in t.args:
            c2, k2 = lin_term(a)
            for key, v in c2.items():
                coeffs[key] = coeffs.get(key, Fraction(0)) + v
            const += k2
        return {k: v for k, v in coeffs.items() if v != 0}, const
    if isinstance(t, TMul):
        c2, k2 = lin_term(t.arg)
        return (
            {k: v * t.coeff for k, v in c2.items() if v * t.coeff != 0},
            k2 * t.coeff,
        )
    raise Unsupported(f"nonlinear term {t!r}")


def term_of_lin(coeffs: dict, const: Fraction, sort: str):
    """Inverse of lin_term, for rebuilt formulas."""
    parts = []
    for key in coeffs:
        c = coeffs[key]
        parts.append(key if c == 1 else TMul(c, key))
    if const != 0 or not parts:
        parts.append(TNum(const, sort))
    if len(parts) == 1:
        return parts[0]
    return TAdd(tuple(parts))


_NUMERAL = frozenset("0123456789")


def _is_numeral(s: str) -> bool:
    return bool(s) and all(c in _NUMERAL for c in s)


def _is_decimal(s: str) -> bool:
    if "." not in s:
        return False
    a, _, b = s.partition(".")
    return _is_numeral(a) and _is_numeral(b)


class Converter:
    """sexpr -> typed IR against a set of declarations."""

    def __init__(self, decls: Declarations):
        self.decls = decls
        self.fresh_counter = 0

    def fresh(self, prefix: str) -> str:
        self.fresh_counter += 1
        return f"{prefix}!{self.fresh_counter}"

    # -- sorts

    def sort_of_sexp(self, e) -> str:
        if isinstance(e, str):
            if e in self.decls.sorts:
                return e
            raise SmtError(f"unknown sort {e}")
        raise Unsupported(f"parametric sorts: {e}")

    # -- terms and formulas

    def formula(self, e, env: dict | None = None):
        env = env or {}
        f = self._convert(e, env)
        if isinstance(f, (TSym, TNum, TApp, TAdd, TMul)):
            raise SmtError(f"expected a Bool expression: {e}")
        return f

    def term(self, e, env: dict | None = None):
        env = env or {}
        t = self._convert(e, env)
        if not isinstance(t, (TSym, TNum, TApp, TAdd, TMul)):
            raise SmtError(f"expected a first-order term: {e}")
        return t

    def _convert(self, e, env: dict):
        if isinstance(e, str):
            return self._atom(e, env)
        if not e:
            raise SmtError("empty application")
        head = e[0]
        if isinstance(head, list):
            raise Unsupported(f"higher-order application: {e}")
        args = e[1:]
        if head in ("exists", "forall"):
            return self._quant(head, args, env)
        if head == "let":
            return self._let(args, env)
        if head == "!":
            # annotated term: drop attributes
            return self._convert(args[0], env)
        if head == "and":
            return FAnd(tuple(self._bool(a, env) for a in args))
        if head == "or":
            return FOr(tuple(self._bool(a, env) for a in args))
        if head == "not":
            if len(args) != 1:
                raise SmtError("not takes one argument")
            return FNot(self._bool(args[0], env))
        if head == "=>":
            out = self._bool(args[-1], env)
            for a in reversed(args[:-1]):
                out = FImp(self._bool(a, env), out)
            return out
        if head == "xor":
            out = self._bool(args[0], env)
            for a in args[1:]:
                out = FNot(FIff(out, self._bool(a, env)))
            return out
        if head == "ite":
            raise Unsupported("ite")
        if head in ("<", "<=", ">", ">="):
            terms = [self.term(a, env) for a in args]
            cmps = [
                FCmp(head, terms[i], terms[i + 1]) for i in range(len(terms) - 1)
            ]
            return cmps[0] if len(cmps) == 1 else FAnd(tuple(cmps))
        if head == "=":
            vals = [self._convert(a, env) for a in args]
            pairs = [self._equal(vals[i], vals[i + 1], e) for i in range(len(vals) - 1)]
            return pairs[0] if len(pairs) == 1 else FAnd(tuple(pairs))
        if head == "distinct":
            vals = [self._convert(a, env) for a in args]
            out = []
            for i in range(len(vals)):
                for j in range(i + 1, len(vals)):
                    out.append(FNot(self._equal(vals[i], vals[j], e)))
            return out[0] if len(out) == 1 else FAnd(tuple(out))
        if head == "+":
            return TAdd(tuple(self.term(a, env) for a in args))
        if head == "-":
            terms = [self.term(a, env) for a in args]
            if len(terms) == 1:
                return TMul(Fraction(-1), terms[0])
            out = terms[0]
            for t in terms[1:]:
                out = TAdd((out, TMul(Fraction(-1), t)))
            return out
        if head == "*":
            return self._mul(args, env)
        if head == "/":
            return self._div(args, env)
        if head in ("div", "mod", "abs", "to_real", "to_int"):
            raise Unsupported(head)
        # uninterpreted application
        return self._app(head, args, env)

    def _bool(self, e, env: dict):
        f = self._convert(e, env)
        if isinstance(f, (TSym, TApp)):
            # Bool-sorted symbol used as a formula
            sort = f.sort if isinstance(f, TSym) else f.sort
            if sort != "Bool":
                raise SmtError(f"expected Bool, got {sort}: {e}")
            if isinstance(f, TSym):
                return FPred(f.name, ())
            return FPred(f.fn, f.args)
        if isinstance(f, (TNum, TAdd, TMul)):
            raise SmtError(f"expected Bool expression: {e}")
        return f

    def _atom(self, name: str, env: dict):
        if name == "true":
            return FTrue()
        if name == "false":
            return FFalse()
        if _is_numeral(name):
            return TNum(Fraction(int(name)), "Int")
        if _is_decimal(name):
            return TNum(Fraction(name), "Real")
        if name in env:
            return env[name]
        if name in self.decls.consts:
            sort = self.decls.consts[name]
            if sort == "Bool":
                return FPred(name, ())
            return TSym(name, sort)
        if name in self.decls.funs:
            raise SmtError(f"function {name} needs arguments")
        raise SmtError(f"unknown symbol {name}")

    def _app(self, name: str, args, env: dict):
        if name not in self.decls.funs:
            raise SmtError(f"unknown function {name}")
        params, result = self.decls.funs[name]
        if len(params) != len(args):
            raise SmtError(f"{name} expects {len(params)} arguments")
        terms = tuple(self.term(a, env) for a in args)
        if result == "Bool":
            return FPred(name, terms)
        return TApp(name, terms, result)

    def _equal(self, a, b, src):
        a_term = isinstance(a, (TSym, TNum, TApp, TAdd, TMul))
        b_term = isinstance(b, (TSym, TNum, TApp, TAdd, TMul))
        if a_term != b_term:
            raise SmtError(f"mixed Bool/term equality: {src}")
        if a_term:
            return FCmp("=", a, b)
        return FIff(a, b)

    def _mul(self, args, env: dict):
        terms = [self.term(a, env) for a in args]
        coeff = Fraction(1)
        rest = []
        for t in terms:
            if isinstance(t, TNum):
                coeff *= t.val
            else:
                rest.append(t)
        if not rest:
            return TNum(coeff, "Real" if any(isinstance(t, TNum) and t.sort == "Real" for t in terms) else "Int")
        if len(rest) > 1:
            raise Unsupported("nonlinear multiplication")
        return TMul(coeff, rest[0])

    def _div(self, args, env: dict):
        terms = [self.term(a, env) for a in args]
        out = terms[0]
        for t in terms[1:]:
            if not isinstance(t, TNum):
                raise Unsupported("division by a non-constant")
            if t.val == 0:
                raise Unsupported("division by zero")
            out = TMul(Fraction(1) / t.val, out)
        return out

    def _quant(self, kind: str, args, env: dict):
        if len(args) != 2:
            raise SmtError(f"{kind} takes a binder list and a body")
        binders = args[0]
        body_env = dict(env)
        bound = []
        for b in binders:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise SmtError(f"bad binder {b}")
            sort = self.sort_of_sexp(b[1])
            internal = self.fresh(b[0])
            body_env[b[0]] = TSym(internal, sort)
            bound.append((internal, sort))
        body = self._bool(args[1], body_env)
        for internal, sort in reversed(bound):
            body = FQuant(kind, internal, sort, body)
        return body

    def _let(self, args, env: dict):
        if len(args) != 2:
            raise SmtError("let takes bindings and a body")
        body_env = dict(env)
        for b in args[0]:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise SmtError(f"bad let binding {b}")
            body_env[b[0]] = self._convert(b[1], env)
        return self._convert(args[1], body_env)
