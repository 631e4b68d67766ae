"""Solver orchestration: clausification, scopes, the check loop and models.

Scopes are realized with guard variables solved under assumptions, so learned
clauses survive pops.  The check loop alternates CDCL search with theory
checks; theory conflicts and congruence lemmas are added as globally valid
clauses and the search resumes.
"""

from __future__ import annotations

import time
from fractions import Fraction

from .core import (
    Converter,
    Declarations,
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
    SmtError,
    TApp,
    TNum,
    TSym,
    TAdd,
    TMul,
    Unsupported,
    term_sort,
)
from .qe import eliminate_quantifiers, skolemize
from .sat import Sat, SatTimeout
from .theory import Theory, TheoryIncomplete


class Solver:
    def __init__(self):
        self.decls = Declarations.new()
        self.conv = Converter(self.decls)
        self.sat = Sat()
        self.theory = Theory()
        self.true_lit = self.sat.new_var()
        self.sat.add_clause([self.true_lit])
        self.gate_cache: dict = {}
        self.pred_vars: dict = {}
        self.pred_instances: dict[str, list] = {}
        self.guards: list[int] = []  # one per open scope
        self.poison: list[list[str]] = [[]]
        self.timeout_ms: int | None = None
        self.last_assign: list[int] | None = None
        self.last_cols: dict[int, Fraction] | None = None
        self.elem_names: dict[str, dict[Fraction, int]] = {}
        self.reason_unknown = "incomplete"

    # -- declarations

    def declare_sort(self, name: str) -> None:
        if name in self.decls.sorts:
            raise SmtError(f"sort {name} already declared")
        self.decls.sorts.add(name)

    def declare_const(self, name: str, sort: str) -> None:
        if name in self.decls.consts or name in self.decls.funs:
            raise SmtError(f"symbol {name} already declared")
        if sort not in self.decls.sorts:
            raise SmtError(f"unknown sort {sort}")
        self.decls.consts[name] = sort

    def declare_fun(self, name: str, args: list[str], result: str) -> None:
        if not args:
            self.declare_const(name, result)
            return
        if name in self.decls.consts or name in self.decls.funs:
            raise SmtError(f"symbol {name} already declared")
        for s in list(args) + [result]:
            if s not in self.decls.sorts:
                raise SmtError(f"unknown sort {s}")
        self.decls.funs[name] = (tuple(args), result)

    # -- clausification

    def lit(self, f) -> int:
        if isinstance(f, FTrue):
            return self.true_lit
        if isinstance(f, FFalse):
            return -self.true_lit
        if isinstance(f, FNot):
            return -self.lit(f.arg)
        cached = self.gate_cache.get(f)
        if cached is not None:
            return cached
        if isinstance(f, FCmp):
            out = self._cmp_lit(f)
        elif isinstance(f, FDiv):
            a = self.theory.div_atom(f.d, f.arg, self.sat.new_var)
            out = (self.true_lit if a else -self.true_lit) if isinstance(a, bool) else a
        elif isinstance(f, FPred):
            out = self._pred_lit(f)
        elif isinstance(f, FAnd):
            lits = [self.lit(a) for a in f.args]
            v = self.sat.new_var()
            for l in lits:
                self.sat.add_clause([-v, l])
            self.sat.add_clause([v] + [-l for l in lits])
            out = v
        elif isinstance(f, FOr):
            lits = [self.lit(a) for a in f.args]
            v = self.sat.new_var()
            for l in lits:
                self.sat.add_clause([v, -l])
            self.sat.add_clause([-v] + lits)
            out = v
        elif isinstance(f, FImp):
            out = self.lit(FOr((FNot(f.left), f.right)))
        elif isinstance(f, FIff):
            a, b = self.lit(f.left), self.lit(f.right)
            v = self.sat.new_var()
            self.sat.add_clause([-v, -a, b])
            self.sat.add_clause([-v, a, -b])
            self.sat.add_clause([v, a, b])
            self.sat.add_clause([v, -a, -b])
            out = v
        elif isinstance(f, FQuant):
            raise Unsupported("quantifier outside the eliminated fragment")
        else:
            raise SmtError(f"cannot clausify {f!r}")
        self.gate_cache[f] = out
        return out

    def _cmp_lit(self, f: FCmp) -> int:
        if f.op == "=":
            le = self.lit(FCmp("<=", f.left, f.right))
            ge = self.lit(FCmp(">=", f.left, f.right))
            v = self.sat.new_var()
            self.sat.add_clause([-v, le])
            self.sat.add_clause([-v, ge])
            self.sat.add_clause([v, -le, -ge])
            return v
        a = self.theory.cmp_atom(f.op, f.left, f.right, self.sat.new_var)
        if isinstance(a, bool):
            return self.true_lit if a else -self.true_lit
        return a

    def _pred_lit(self, f: FPred) -> int:
        key = (f.name, f.args)
        v = self.pred_vars.get(key)
        if v is None:
            v = self.sat.new_var()
            self.pred_vars[key] = v
            for a in f.args:
                self.theory._intern_term_keys(a)
            if f.args:
                self.pred_instances.setdefault(f.name, []).append(key)
        return v

    # -- assertions and scopes

    def assert_sexpr(self, e) -> None:
        f = self.conv.formula(e)
        try:
            f = skolemize(f, self.conv)
            f = eliminate_quantifiers(f, self.conv)
            root = self.lit(f)
        except Unsupported as u:
            self.poison[-1].append(str(u))
            return
        if self.guards:
            self.sat.add_clause([-self.guards[-1], root])
        else:
            self.sat.add_clause([root])

    def push(self) -> None:
        self.guards.append(self.sat.new_var())
        self.poison.append([])

    def pop(self, n: int = 1) -> None:
        for _ in range(n):
            if not self.guards:
                raise SmtError("pop without matching push")
            g = self.guards.pop()
            self.poison.pop()
            self.sat.add_clause([-g])

    # -- checking

    def check_sat(self) -> str:
        for reasons in self.poison:
            if reasons:
                self.reason_unknown = f"unsupported: {reasons[0]}"
                return "unknown"
        deadline = None
        if self.timeout_ms is not None:
            deadline = time.monotonic() + self.timeout_ms / 1000.0

        def probe():
            if deadline is not None and time.monotonic() > deadline:
                raise SatTimeout()

        self.sat.deadline_probe = probe
        assumptions = list(self.guards)
        try:
            while True:
                probe()
                if not self.sat.solve(assumptions):
                    return "unsat"
                assign = self.sat.assign
                clause = self.theory.check(assign, probe)
                if clause is not None:
                    if not clause:
                        return "unsat"
                    self.sat.add_clause(clause)
                    continue
                col_vals = self.theory.model_values()
                lemmas = self.theory.uf_lemmas(
                    col_vals,
                    self.pred_instances,
                    lambda key: self.sat.assign[self.pred_vars[key]] == 1,
                )
                if lemmas:
                    for lemma in lemmas:
                        self._assert_congruence(lemma)
                    continue
                self.last_assign = list(assign)
                self.last_cols = col_vals
                self._name_elements()
                return "sat"
        except SatTimeout:
            self.reason_unknown = "timeout"
            return "unknown"
        except TheoryIncomplete as t:
            self.reason_unknown = str(t)
            return "unknown"
        finally:
            self.sat.deadline_probe = None

    def _assert_congruence(self, lemma) -> None:
        kind, a, b = lemma
        if kind == "fun":
            eqs = [
                self.lit(FCmp("=", x, y)) for x, y in zip(a.args, b.args)
            ]
            res = self.lit(FCmp("=", a, b))
            self.sat.add_clause([-e for e in eqs] + [res])
        else:
            (name_a, args_a), (name_b, args_b) = a, b
            eqs = [
                self.lit(FCmp("=", x, y)) for x, y in zip(args_a, args_b)
            ]
            va, vb = self.pred_vars[a], self.pred_vars[b]
            self.sat.add_clause([-e for e in eqs] + [-va, vb])
            self.sat.add_clause([-e for e in eqs] + [va, -vb])

    # -- models

    def _name_elements(self) -> None:
        self.elem_names = {}
        for col, key in sorted(self.theory.col_key.items()):
            sort = key.sort
            if sort in ("Int", "Real", "Bool") or sort not in self.decls.sorts:
                continue
            v = self.last_cols[col]
            table = self.elem_names.setdefault(sort, {})
            if v not in table:
                table[v] = len(table)

    def eval_term_model(self, t) -> Fraction:
        if self.last_cols is None:
            raise SmtError("no model available")
        if isinstance(t, TNum):
            return t.val
        if isinstance(t, TSym):
            col = self.theory.key_col.get(t)
            return self.last_cols[col] if col is not None else Fraction(0)
        if isinstance(t, TApp):
            col = self.theory.key_col.get(t)
            if col is not None:
                return self.last_cols[col]
            argv = tuple(self.eval_term_model(a) for a in t.args)
            for app in self.theory.apps.get(t.fn, []):
                if tuple(self.eval_term_model(a) for a in app.args) == argv:
                    return self.last_cols[self.theory.key_col[app]]
            return Fraction(0)
        if isinstance(t, TAdd):
            out = Fraction(0)
            for a in t.args:
                out += self.eval_term_model(a)
            return out
        if isinstance(t, TMul):
            return t.coeff * self.eval_term_model(t.arg)
        raise SmtError(f"cannot evaluate {t!r}")

    def eval_formula_model(self, f) -> bool:
        if self.last_assign is None:
            raise SmtError("no model available")
        if isinstance(f, FTrue):
            return True
        if isinstance(f, FFalse):
            return False
        if isinstance(f, FNot):
            return not self.eval_formula_model(f.arg)
        if isinstance(f, FAnd):
            return all(self.eval_formula_model(a) for a in f.args)
        if isinstance(f, FOr):
            return any(self.eval_formula_model(a) for a in f.args)
        if isinstance(f, FImp):
            return (not self.eval_formula_model(f.left)) or self.eval_formula_model(f.right)
        if isinstance(f, FIff):
            return self.eval_formula_model(f.left) == self.eval_formula_model(f.right)
        if isinstance(f, FCmp):
            l = self.eval_term_model(f.left)
            r = self.eval_term_model(f.right)
            return {
                "<": l < r,
                "<=": l <= r,
                ">": l > r,
                ">=": l >= r,
                "=": l == r,
            }[f.op]
        if isinstance(f, FDiv):
            v = self.eval_term_model(f.arg)
            return v.denominator == 1 and int(v) % f.d == 0
        if isinstance(f, FPred):
            key = (f.name, f.args)
            v = self.pred_vars.get(key)
            if v is not None:
                return self.last_assign[v] == 1
            argv = tuple(self.eval_term_model(a) for a in f.args)
            for other_key in self.pred_instances.get(f.name, []):
                if tuple(self.eval_term_model(a) for a in other_key[1]) == argv:
                    return self.last_assign[self.pred_vars[other_key]] == 1
            return False
        raise SmtError(f"cannot evaluate {f!r}")

    def render_value(self, e) -> str:
        node = self.conv._convert(e, {})
        if isinstance(node, (FTrue, FFalse, FNot, FAnd, FOr, FImp, FIff, FCmp, FPred, FDiv)):
            return "true" if self.eval_formula_model(node) else "false"
        v = self.eval_term_model(node)
        sort = term_sort(node, None)
        return self._format_value(v, sort)

    def _format_value(self, v: Fraction, sort: str) -> str:
        if sort == "Int":
            n = int(v)
            return str(n) if n >= 0 else f"(- {-n})"
        if sort == "Real":
            num, den = v.numerator, v.denominator
            sign = num < 0
            num = abs(num)
            if den == 1:
                body = f"{num}.0"
            else:
                body = f"(/ {num}.0 {den}.0)"
            return f"(- {body})" if sign else body
        table = self.elem_names.setdefault(sort, {})
        if v not in table:
            table[v] = len(table)
        return f"(as @{sort}!{table[v]} {sort})"
