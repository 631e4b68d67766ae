"""Quantifier handling: skolemization of outer existentials and quantifier
elimination for linear integer (Cooper) and linear real (test-point virtual
substitution) arithmetic.

Both eliminations work on the negation-normal matrix with the quantified
variable isolated per atom; the surrounding boolean skeleton is kept and the
variable's atoms replaced under each substitution.  Divisibility atoms
introduced by the integer case are first-class formula nodes handled by the
theory layer.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .core import (
    Converter,
    FAnd,
    FCmp,
    FDiv,
    FFalse,
    FIff,
    FImp,
    FNot,
    FOr,
    FPred,
    FQuant,
    FTrue,
    TApp,
    TNum,
    TSym,
    Unsupported,
    lin_term,
    term_of_lin,
)

_SIZE_CAP = 200_000
_BRANCH_CAP = 512


def _fand(args):
    out = []
    for a in args:
        if isinstance(a, FFalse):
            return FFalse()
        if not isinstance(a, FTrue):
            out.append(a)
    if not out:
        return FTrue()
    return out[0] if len(out) == 1 else FAnd(tuple(out))


def _for(args):
    out = []
    for a in args:
        if isinstance(a, FTrue):
            return FTrue()
        if not isinstance(a, FFalse):
            out.append(a)
    if not out:
        return FFalse()
    return out[0] if len(out) == 1 else FOr(tuple(out))


def _size(f) -> int:
    if isinstance(f, (FTrue, FFalse, FCmp, FPred, FDiv)):
        return 1
    if isinstance(f, FNot):
        return 1 + _size(f.arg)
    if isinstance(f, (FAnd, FOr)):
        return 1 + sum(_size(a) for a in f.args)
    if isinstance(f, (FImp, FIff)):
        return 1 + _size(f.left) + _size(f.right)
    if isinstance(f, FQuant):
        return 1 + _size(f.body)
    return 1


def _occurs_term(sym: TSym, t) -> bool:
    if isinstance(t, TSym):
        return t == sym
    if isinstance(t, TApp):
        return any(_occurs_term(sym, a) for a in t.args)
    if hasattr(t, "args"):
        return any(_occurs_term(sym, a) for a in t.args)
    if hasattr(t, "arg"):
        return _occurs_term(sym, t.arg)
    return False


def _occurs(sym: TSym, f) -> bool:
    if isinstance(f, (FTrue, FFalse)):
        return False
    if isinstance(f, FCmp):
        return _occurs_term(sym, f.left) or _occurs_term(sym, f.right)
    if isinstance(f, FDiv):
        return _occurs_term(sym, f.arg)
    if isinstance(f, FPred):
        return any(_occurs_term(sym, a) for a in f.args)
    if isinstance(f, FNot):
        return _occurs(sym, f.arg)
    if isinstance(f, (FAnd, FOr)):
        return any(_occurs(sym, a) for a in f.args)
    if isinstance(f, (FImp, FIff)):
        return _occurs(sym, f.left) or _occurs(sym, f.right)
    if isinstance(f, FQuant):
        return _occurs(sym, f.body)
    raise Unsupported(f"unknown formula {f!r}")


# ---------------------------------------------------------------------------
# Skolemization of existentials at positive polarity outside any universal


def skolemize(f, conv: Converter, pos: bool = True, under_forall: bool = False):
    if isinstance(f, FQuant):
        is_ex = f.kind == "exists"
        if pos and is_ex and not under_forall:
            fresh = TSym(conv.fresh(f"sk!{f.var}"), f.sort)
            conv.decls.consts[fresh.name] = f.sort
            body = _subst_sym(f.body, TSym(f.var, f.sort), fresh)
            return skolemize(body, conv, pos, under_forall)
        inner_forall = under_forall or (f.kind == "forall" if pos else is_ex)
        return FQuant(f.kind, f.var, f.sort, skolemize(f.body, conv, pos, inner_forall))
    if isinstance(f, FNot):
        return FNot(skolemize(f.arg, conv, not pos, under_forall))
    if isinstance(f, FAnd):
        return FAnd(tuple(skolemize(a, conv, pos, under_forall) for a in f.args))
    if isinstance(f, FOr):
        return FOr(tuple(skolemize(a, conv, pos, under_forall) for a in f.args))
    if isinstance(f, FImp):
        return FImp(
            skolemize(f.left, conv, not pos, under_forall),
            skolemize(f.right, conv, pos, under_forall),
        )
    if isinstance(f, FIff):
        # both polarities: no skolemization below
        return f
    return f


def _subst_sym(f, old: TSym, new):
    def sub_t(t):
        if isinstance(t, TSym):
            return new if t == old else t
        if isinstance(t, TApp):
            return TApp(t.fn, tuple(sub_t(a) for a in t.args), t.sort)
        if t.__class__.__name__ == "TAdd":
            return t.__class__(tuple(sub_t(a) for a in t.args))
        if t.__class__.__name__ == "TMul":
            return t.__class__(t.coeff, sub_t(t.arg))
        return t

    if isinstance(f, FCmp):
        return FCmp(f.op, sub_t(f.left), sub_t(f.right))
    if isinstance(f, FDiv):
        return FDiv(f.d, sub_t(f.arg))
    if isinstance(f, FPred):
        return FPred(f.name, tuple(sub_t(a) for a in f.args))
    if isinstance(f, FNot):
        return FNot(_subst_sym(f.arg, old, new))
    if isinstance(f, (FAnd, FOr)):
        return f.__class__(tuple(_subst_sym(a, old, new) for a in f.args))
    if isinstance(f, (FImp, FIff)):
        return f.__class__(_subst_sym(f.left, old, new), _subst_sym(f.right, old, new))
    if isinstance(f, FQuant):
        if f.var == old.name:
            return f
        return FQuant(f.kind, f.var, f.sort, _subst_sym(f.body, old, new))
    return f


# ---------------------------------------------------------------------------
# Quantifier elimination driver


def eliminate_quantifiers(f, conv: Converter):
    if isinstance(f, FQuant):
        body = eliminate_quantifiers(f.body, conv)
        sym = TSym(f.var, f.sort)
        if not _occurs(sym, body):
            return body
        if f.kind == "exists":
            return _elim_exists(sym, body)
        return _push_not(_elim_exists(sym, _push_not(body, True)), True)
    if isinstance(f, FNot):
        return FNot(eliminate_quantifiers(f.arg, conv))
    if isinstance(f, (FAnd, FOr)):
        return f.__class__(tuple(eliminate_quantifiers(a, conv) for a in f.args))
    if isinstance(f, (FImp, FIff)):
        return f.__class__(
            eliminate_quantifiers(f.left, conv), eliminate_quantifiers(f.right, conv)
        )
    return f


def _elim_exists(sym: TSym, body):
    if sym.sort == "Int":
        out = _cooper(sym, body)
    elif sym.sort == "Real":
        out = _lw(sym, body)
    else:
        raise Unsupported(f"quantifier over sort {sym.sort}")
    if _size(out) > _SIZE_CAP:
        raise Unsupported("quantifier elimination blowup")
    return out


def _push_not(f, neg: bool):
    """Negation normal form at the formula level (atoms stay intact)."""
    if isinstance(f, FTrue):
        return FFalse() if neg else f
    if isinstance(f, FFalse):
        return FTrue() if neg else f
    if isinstance(f, FNot):
        return _push_not(f.arg, not neg)
    if isinstance(f, FAnd):
        args = tuple(_push_not(a, neg) for a in f.args)
        return FOr(args) if neg else FAnd(args)
    if isinstance(f, FOr):
        args = tuple(_push_not(a, neg) for a in f.args)
        return FAnd(args) if neg else FOr(args)
    if isinstance(f, FImp):
        if neg:
            return FAnd((_push_not(f.left, False), _push_not(f.right, True)))
        return FOr((_push_not(f.left, True), _push_not(f.right, False)))
    if isinstance(f, FIff):
        a, b = f.left, f.right
        if neg:
            return FOr(
                (
                    FAnd((_push_not(a, False), _push_not(b, True))),
                    FAnd((_push_not(a, True), _push_not(b, False))),
                )
            )
        return FOr(
            (
                FAnd((_push_not(a, False), _push_not(b, False))),
                FAnd((_push_not(a, True), _push_not(b, True))),
            )
        )
    if isinstance(f, (FCmp, FPred, FDiv)):
        return FNot(f) if neg else f
    if isinstance(f, FQuant):
        if neg:
            kind = "forall" if f.kind == "exists" else "exists"
            return FQuant(kind, f.var, f.sort, _push_not(f.body, True))
        return FQuant(f.kind, f.var, f.sort, _push_not(f.body, False))
    raise Unsupported(f"unknown formula {f!r}")


def _lin_sides(cmp: FCmp):
    cl, kl = lin_term(cmp.left)
    cr, kr = lin_term(cmp.right)
    coeffs = dict(cl)
    for k, v in cr.items():
        coeffs[k] = coeffs.get(k, Fraction(0)) - v
    coeffs = {k: v for k, v in coeffs.items() if v != 0}
    return coeffs, kl - kr  # left - right


def _check_free_of(sym: TSym, coeffs: dict):
    for key in coeffs:
        if isinstance(key, TApp) and _occurs_term(sym, key):
            raise Unsupported("quantified variable under an uninterpreted function")


# ---------------------------------------------------------------------------
# Cooper's method for integers
#
# The matrix is normalized so every comparison mentioning x reads
# `t < c*x` or `c*x < t`; equalities expand, negations flip.  After scaling
# x's coefficient to the lcm L and substituting X = L*x (with L | X), the
# eliminated formula is the disjunction over j in 1..delta of the minus-
# infinity form at j and the formula at each lower bound plus j.


def _cooper(sym: TSym, body):
    body = _push_not(body, False)
    lcm_c = 1
    atoms: list = []

    def scan(f):
        nonlocal lcm_c
        if isinstance(f, (FAnd, FOr)):
            for a in f.args:
                scan(a)
        elif isinstance(f, FNot):
            scan(f.arg)
        elif isinstance(f, FCmp):
            coeffs, _ = _lin_sides(f)
            _check_free_of(sym, coeffs)
            c = coeffs.get(sym)
            if c is not None:
                if c.denominator != 1:
                    raise Unsupported("fractional coefficient on an Int variable")
                lcm_c = lcm_c * int(abs(c)) // gcd(lcm_c, int(abs(c)))
                atoms.append(f)
        elif isinstance(f, FDiv):
            coeffs, _ = _lin_sides(FCmp("=", f.arg, TNum(Fraction(0), "Int")))
            _check_free_of(sym, coeffs)
            c = coeffs.get(sym)
            if c is not None:
                if c.denominator != 1:
                    raise Unsupported("fractional coefficient on an Int variable")
                lcm_c = lcm_c * int(abs(c)) // gcd(lcm_c, int(abs(c)))
        elif isinstance(f, FPred):
            if any(_occurs_term(sym, a) for a in f.args):
                raise Unsupported("quantified variable under a predicate")
        elif isinstance(f, (FImp, FIff, FQuant)):
            raise Unsupported("unexpected structure in QE matrix")

    scan(body)
    L = lcm_c

    # Rewrite every x-atom into strict/div normal form over X = L*x; the
    # skeleton function rebuilds the body for a given substitution.
    delta = L
    lowers: list[tuple[dict, Fraction]] = []

    def norm_cmp(f: FCmp):
        """Return list of (kind, payload) conjuncts/disjuncts describing f.

        kinds: ('lt_x', t) for t < X; ('x_lt', t) for X < t, with t a lin
        pair; returns a tree mirroring =, != expansions.
        """
        coeffs, const = _lin_sides(f)  # left - right (op) 0
        c = coeffs.get(sym, Fraction(0))
        rest = {k: v for k, v in coeffs.items() if k != sym}
        # f.op in <, <=, >, >=, =  over: c*x + rest + const (op) 0
        items: list[tuple[str, tuple[dict, Fraction]]] = []

        def side(op):
            # c*x (op) -(rest+const); scale so x coeff is +L
            scale = Fraction(L) / c  # may be negative
            t = ({k: -v * scale for k, v in rest.items()}, -const * scale)
            if scale < 0:
                op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}[op]
            return op, t

        op, t = side(f.op)
        # ints: a < b == a <= b-1; express everything with strict <
        def lt_pairs(o, tt):
            co, k = tt
            if o == "<":
                return [("x_lt", (co, k))]
            if o == "<=":
                return [("x_lt", (co, k + 1))]
            if o == ">":
                return [("lt_x", (co, k))]
            if o == ">=":
                return [("lt_x", (co, k - 1))]
            return [("x_lt", (co, k + 1)), ("lt_x", (co, k - 1))]  # equality

        return op, t, lt_pairs(op, t)

    divs_lcm = [L]

    def build(f, subst):
        """Rebuild f substituting X := subst (a lin pair) or '-inf'."""
        if isinstance(f, FAnd):
            return _fand([build(a, subst) for a in f.args])
        if isinstance(f, FOr):
            return _for([build(a, subst) for a in f.args])
        if isinstance(f, FNot):
            inner = f.arg
            if isinstance(inner, (FPred,)):
                return f
            if isinstance(inner, FCmp) and _occurs(sym, inner):
                flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "="}
                if inner.op == "=":
                    lt = FCmp("<", inner.left, inner.right)
                    gt = FCmp(">", inner.left, inner.right)
                    return _for([build(lt, subst), build(gt, subst)])
                return build(FCmp(flipped[inner.op], inner.left, inner.right), subst)
            if isinstance(inner, FDiv) and _occurs(sym, inner):
                return FNot(build_div(inner, subst))
            return f
        if isinstance(f, FCmp) and _occurs(sym, f):
            _, _, pairs = norm_cmp(f)
            conj = []
            for kind, (co, k) in pairs:
                conj.append(apply_lt(kind, co, k, subst))
            return _fand(conj)
        if isinstance(f, FDiv) and _occurs(sym, f):
            return build_div(f, subst)
        return f

    def apply_lt(kind, co, k, subst):
        # kind 'x_lt': X < co+k ; 'lt_x': co+k < X
        if subst == "-inf":
            return FTrue() if kind == "x_lt" else FFalse()
        sco, sk = subst
        diff = dict(sco)
        for key, v in co.items():
            diff[key] = diff.get(key, Fraction(0)) - v
        diff = {k2: v for k2, v in diff.items() if v != 0}
        c0 = sk - k
        if kind == "x_lt":
            # subst < co+k  <=>  diff + c0 < 0
            if not diff:
                return FTrue() if c0 < 0 else FFalse()
            return FCmp("<", term_of_lin(diff, c0, "Int"), TNum(Fraction(0), "Int"))
        if not diff:
            return FTrue() if c0 > 0 else FFalse()
        return FCmp(">", term_of_lin(diff, c0, "Int"), TNum(Fraction(0), "Int"))

    def build_div(f: FDiv, subst):
        coeffs, const = lin_term(f.arg)
        c = coeffs.get(sym, Fraction(0))
        rest = {k: v for k, v in coeffs.items() if k != sym}
        scale = Fraction(L) / c
        d_scaled = int(abs(f.d * scale))
        divs_lcm.append(d_scaled)
        # d | c x + rest  scaled: d*|s| | X + s*(rest+const) with sign fix
        s_rest = {k: v * scale for k, v in rest.items()}
        s_const = const * scale
        if subst == "-inf":
            raise AssertionError("div under -inf handled by caller substitution")
        sco, sk = subst
        total = dict(s_rest)
        for key, v in sco.items():
            total[key] = total.get(key, Fraction(0)) + v
        return FDiv(d_scaled, term_of_lin(total, s_const + sk, "Int"))

    # collect lower bounds and divisor lcm by a dry scan
    def collect(f):
        if isinstance(f, (FAnd, FOr)):
            for a in f.args:
                collect(a)
        elif isinstance(f, FNot):
            inner = f.arg
            if isinstance(inner, FCmp) and _occurs(sym, inner):
                if inner.op == "=":
                    collect(FCmp("<", inner.left, inner.right))
                    collect(FCmp(">", inner.left, inner.right))
                else:
                    flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
                    collect(FCmp(flipped[inner.op], inner.left, inner.right))
            elif isinstance(inner, FDiv) and _occurs(sym, inner):
                collect(inner)
        elif isinstance(f, FCmp) and _occurs(sym, f):
            _, _, pairs = norm_cmp(f)
            for kind, t in pairs:
                if kind == "lt_x":
                    lowers.append(t)
        elif isinstance(f, FDiv) and _occurs(sym, f):
            coeffs, _ = lin_term(f.arg)
            c = coeffs.get(sym, Fraction(0))
            if c:
                divs_lcm.append(int(abs(f.d * Fraction(L) / c)))

    collect(body)
    delta = 1
    for d in divs_lcm:
        delta = delta * d // gcd(delta, d)

    uniq_lowers: list[tuple[dict, Fraction]] = []
    seen = set()
    for co, k in lowers:
        key = (tuple(sorted(((repr(x), v) for x, v in co.items()))), k)
        if key not in seen:
            seen.add(key)
            uniq_lowers.append((co, k))

    if delta * (len(uniq_lowers) + 1) > _BRANCH_CAP:
        raise Unsupported("quantifier elimination blowup")

    def with_L_div(g, subst):
        return _fand([g, build_div_unit(subst)])

    def build_div_unit(subst):
        sco, sk = subst
        return FDiv(L, term_of_lin(dict(sco), sk, "Int")) if L > 1 else FTrue()

    disjuncts = []
    for j in range(1, delta + 1):
        jlin = ({}, Fraction(j))
        # minus-infinity branch: comparisons collapse, divisibilities at X=j
        minf = build(_replace_cmp_minf(body, sym, build, jlin), "-inf")
        disjuncts.append(with_L_div(minf, jlin))
        for co, k in uniq_lowers:
            subst = (dict(co), k + j)
            disjuncts.append(with_L_div(build(body, subst), subst))
    return _for(disjuncts)


def _replace_cmp_minf(body, sym, build, jlin):
    """For the minus-infinity branch, divisibility atoms still need X := j;
    handled by rebuilding them eagerly before the main build pass."""

    def walk(f):
        if isinstance(f, FAnd):
            return FAnd(tuple(walk(a) for a in f.args))
        if isinstance(f, FOr):
            return FOr(tuple(walk(a) for a in f.args))
        if isinstance(f, FNot):
            if isinstance(f.arg, FDiv) and _occurs(sym, f.arg):
                return FNot(build(f.arg, jlin))
            return FNot(walk(f.arg))
        if isinstance(f, FDiv) and _occurs(sym, f):
            return build(f, jlin)
        return f

    return walk(body)


# ---------------------------------------------------------------------------
# Test-point virtual substitution for reals


def _lw(sym: TSym, body):
    body = _push_not(body, False)

    # normalize: every comparison with x becomes x (op) t with t a lin pair
    def norm(f: FCmp):
        coeffs, const = _lin_sides(f)
        c = coeffs.get(sym, Fraction(0))
        rest = {k: v for k, v in coeffs.items() if k != sym}
        op = f.op
        # c*x (op) -(rest + const)
        t = ({k: -v / c for k, v in rest.items()}, -const / c)
        if c < 0:
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}[op]
        return op, t

    cands: list = ["-inf"]

    def collect(f):
        if isinstance(f, (FAnd, FOr)):
            for a in f.args:
                collect(a)
        elif isinstance(f, FNot):
            inner = f.arg
            if isinstance(inner, FCmp) and _occurs(sym, inner):
                if inner.op == "=":
                    collect(FCmp("<", inner.left, inner.right))
                    collect(FCmp(">", inner.left, inner.right))
                else:
                    flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
                    collect(FCmp(flipped[inner.op], inner.left, inner.right))
            elif isinstance(inner, (FDiv,)):
                raise Unsupported("divisibility over a real variable")
        elif isinstance(f, FCmp) and _occurs(sym, f):
            coeffs, _ = _lin_sides(f)
            _check_free_of(sym, coeffs)
            op, t = norm(f)
            if op in (">=", "="):
                cands.append(("plain", t))
            elif op == ">":
                cands.append(("eps", t))
        elif isinstance(f, FPred):
            if any(_occurs_term(sym, a) for a in f.args):
                raise Unsupported("quantified variable under a predicate")

    collect(body)
    if len(cands) > _BRANCH_CAP:
        raise Unsupported("quantifier elimination blowup")

    def subst_atom(op, t, cand):
        if cand == "-inf":
            return FTrue() if op in ("<", "<=") else FFalse()
        mode, (sco, sk) = cand
        tco, tk = t
        diff = dict(sco)
        for key, v in tco.items():
            diff[key] = diff.get(key, Fraction(0)) - v
        diff = {k2: v for k2, v in diff.items() if v != 0}
        c0 = sk - tk  # s - t
        if mode == "plain":
            cmpop = op
        else:  # s + eps
            if op == "=":
                return FFalse()
            cmpop = {"<": "<", "<=": "<", ">": ">=", ">=": ">="}[op]
        if not diff:
            holds = {
                "<": c0 < 0,
                "<=": c0 <= 0,
                ">": c0 > 0,
                ">=": c0 >= 0,
                "=": c0 == 0,
            }[cmpop]
            return FTrue() if holds else FFalse()
        return FCmp(cmpop, term_of_lin(diff, c0, "Real"), TNum(Fraction(0), "Real"))

    def build(f, cand):
        if isinstance(f, FAnd):
            return _fand([build(a, cand) for a in f.args])
        if isinstance(f, FOr):
            return _for([build(a, cand) for a in f.args])
        if isinstance(f, FNot):
            inner = f.arg
            if isinstance(inner, FCmp) and _occurs(sym, inner):
                if inner.op == "=":
                    return _for(
                        [
                            build(FCmp("<", inner.left, inner.right), cand),
                            build(FCmp(">", inner.left, inner.right), cand),
                        ]
                    )
                flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
                return build(FCmp(flipped[inner.op], inner.left, inner.right), cand)
            return f
        if isinstance(f, FCmp) and _occurs(sym, f):
            op, t = norm(f)
            if op == "=" and not isinstance(cand, str) and cand[0] == "plain":
                # split equality into both non-strict sides
                return _fand(
                    [subst_atom("<=", t, cand), subst_atom(">=", t, cand)]
                )
            return subst_atom(op, t, cand)
        return f

    return _for([build(body, c) for c in cands])
