"""Arithmetic/UF theory layer.

Every comparison atom is normalized to bounds on a simplex column (shared
slack per linear expression); divisibility atoms get auxiliary integer
columns.  Uninterpreted function and predicate applications are opaque
columns/variables whose functional consistency is enforced lazily: when a
candidate model assigns equal argument tuples but different results, a
congruence lemma over fresh equality atoms is returned for the caller to
assert, and the search resumes.
"""

from __future__ import annotations

from fractions import Fraction

from .core import TApp, TNum, TSym, Unsupported, lin_term
from .simplex import IntBudgetExceeded, Simplex


class TheoryIncomplete(Exception):
    pass


class Theory:
    def __init__(self):
        self.sx = Simplex()
        self.key_col: dict = {}  # TSym/TApp -> column
        self.col_key: dict[int, object] = {}
        self.slack_of: dict = {}  # canonical expr tuple -> column
        self.key_ids: dict = {}  # TSym/TApp -> stable ordering id
        # satvar -> (bounds if true, bounds if false); each bound is
        # (column, is_lower, (value, delta))
        self.atom_bounds: dict[int, tuple[list, list]] = {}
        self.cmp_atom_vars: dict = {}  # canonical cmp key -> satvar
        self.div_atom_vars: dict = {}  # canonical div key -> satvar
        self.apps: dict[str, list[TApp]] = {}
        self.int_budget = 50_000

    # -- columns

    def _key_id(self, key) -> int:
        if key not in self.key_ids:
            self.key_ids[key] = len(self.key_ids)
        return self.key_ids[key]

    def intern_key(self, key) -> int:
        if key in self.key_col:
            return self.key_col[key]
        if isinstance(key, TApp):
            for a in key.args:
                self._intern_term_keys(a)
            self.apps.setdefault(key.fn, []).append(key)
        is_int = key.sort != "Real"
        col = self.sx.new_col(is_int)
        self.key_col[key] = col
        self.col_key[col] = key
        self._key_id(key)
        return col

    def _intern_term_keys(self, t) -> None:
        coeffs, _ = lin_term(t)
        for key in coeffs:
            self.intern_key(key)

    def _expr_col(self, coeffs: dict) -> int:
        items = sorted(
            ((self._key_id(k), k, v) for k, v in coeffs.items()), key=lambda x: x[0]
        )
        sig = tuple((kid, v) for kid, _, v in items)
        if len(items) == 1 and items[0][2] == 1:
            return self.intern_key(items[0][1])
        if sig in self.slack_of:
            return self.slack_of[sig]
        lin = {self.intern_key(k): v for _, k, v in items}
        is_int = all(k.sort != "Real" for _, k, _ in items) and all(
            v.denominator == 1 for _, _, v in items
        )
        col = self.sx.add_row(lin, is_int)
        self.slack_of[sig] = col
        return col

    # -- atom creation (returns signed satvar or boolean constant)

    def cmp_atom(self, op: str, left, right, new_var) -> int | bool:
        cl, kl = lin_term(left)
        cr, kr = lin_term(right)
        coeffs = dict(cl)
        for k, v in cr.items():
            coeffs[k] = coeffs.get(k, Fraction(0)) - v
        coeffs = {k: v for k, v in coeffs.items() if v != 0}
        const = kl - kr
        # coeffs + const (op) 0
        if not coeffs:
            return {
                "<": const < 0,
                "<=": const <= 0,
                ">": const > 0,
                ">=": const >= 0,
            }[op]
        if op in (">", ">="):
            coeffs = {k: -v for k, v in coeffs.items()}
            const = -const
            op = "<" if op == ">" else "<="
        # expr <= / < c
        c = -const
        is_int = all(k.sort != "Real" for k in coeffs)
        if is_int:
            denom = 1
            for v in coeffs.values():
                denom = denom * v.denominator // _gcd(denom, v.denominator)
            if denom != 1:
                coeffs = {k: v * denom for k, v in coeffs.items()}
                c = c * denom
            g = 0
            for v in coeffs.values():
                g = _gcd(g, abs(v.numerator))
            if g > 1:
                coeffs = {k: v / g for k, v in coeffs.items()}
                c = c / g
            if op == "<":
                c = _ceil(c) - 1
                op = "<="
            else:
                c = Fraction(_floor(c))
        key = (
            tuple(
                sorted(((self._key_id(k), v) for k, v in coeffs.items()))
            ),
            op,
            c,
        )
        if key in self.cmp_atom_vars:
            return self.cmp_atom_vars[key]
        col = self._expr_col(coeffs)
        var = new_var()
        if is_int:
            true_b = [(col, False, (c, Fraction(0)))]
            false_b = [(col, True, (c + 1, Fraction(0)))]
        elif op == "<=":
            true_b = [(col, False, (c, Fraction(0)))]
            false_b = [(col, True, (c, Fraction(1)))]
        else:  # strict <
            true_b = [(col, False, (c, Fraction(-1)))]
            false_b = [(col, True, (c, Fraction(0)))]
        self.atom_bounds[var] = (true_b, false_b)
        self.cmp_atom_vars[key] = var
        return var

    def div_atom(self, d: int, arg, new_var) -> int | bool:
        coeffs, const = lin_term(arg)
        coeffs = {k: v for k, v in coeffs.items() if v != 0}
        if any(v.denominator != 1 for v in coeffs.values()) or const.denominator != 1:
            raise Unsupported("fractional divisibility")
        if not coeffs:
            return int(const) % d == 0
        key = (
            d,
            tuple(sorted(((self._key_id(k), v) for k, v in coeffs.items()))),
            int(const) % d,
        )
        if key in self.div_atom_vars:
            return self.div_atom_vars[key]
        var = new_var()
        # true: exists int q, expr + const = d*q ; false: remainder in [1, d-1]
        q_t = self.sx.new_col(True)
        q_f = self.sx.new_col(True)
        lin_t = {self._expr_col(coeffs): Fraction(1), q_t: Fraction(-d)}
        lin_f = {self._expr_col(coeffs): Fraction(1), q_f: Fraction(-d)}
        st = self.sx.add_row(lin_t, True)
        sf = self.sx.add_row(lin_f, True)
        cc = Fraction(-const)
        true_b = [(st, False, (cc, Fraction(0))), (st, True, (cc, Fraction(0)))]
        false_b = [
            (sf, True, (cc + 1, Fraction(0))),
            (sf, False, (cc + d - 1, Fraction(0))),
        ]
        self.atom_bounds[var] = (true_b, false_b)
        self.div_atom_vars[key] = var
        return var

    # -- checking

    def check(self, assign: list[int], deadline_probe=None) -> list[int] | None:
        """None when the assignment is theory-consistent; else a conflict
        clause (list of literals to assert)."""
        self.sx.reset_bounds()
        for var, (true_b, false_b) in self.atom_bounds.items():
            val = assign[var]
            if val == 0:
                continue
            lit = var if val == 1 else -var
            for col, is_lower, bval in true_b if val == 1 else false_b:
                if is_lower:
                    conflict = self.sx.assert_lower(col, bval, lit)
                else:
                    conflict = self.sx.assert_upper(col, bval, lit)
                if conflict is not None:
                    return self._conflict_clause(conflict)
        try:
            conflict = self.sx.check_int([self.int_budget], deadline_probe)
        except IntBudgetExceeded:
            raise TheoryIncomplete("integer branching budget exceeded") from None
        if conflict is not None:
            return self._conflict_clause(conflict)
        return None

    @staticmethod
    def _conflict_clause(reasons: list) -> list[int]:
        out = []
        for r in reasons:
            if isinstance(r, int) and -r not in out:
                if -r not in out:
                    out.append(-r)
        return out

    # -- models and lazy UF consistency

    def model_values(self) -> dict[int, Fraction]:
        vals = self.sx.concrete_values()
        return {col: vals[col] for col in range(self.sx.ncols)}

    def eval_term(self, t, col_vals: dict[int, Fraction]) -> Fraction:
        if isinstance(t, TNum):
            return t.val
        if isinstance(t, (TSym, TApp)):
            col = self.key_col.get(t)
            if col is None:
                return Fraction(0)
            return col_vals[col]
        coeffs, const = lin_term(t)
        out = const
        for k, v in coeffs.items():
            col = self.key_col.get(k)
            out += v * (col_vals[col] if col is not None else Fraction(0))
        return out

    def uf_lemmas(
        self, col_vals: dict[int, Fraction], pred_instances, pred_value
    ) -> list[tuple]:
        """Pairs of applications that violate functional consistency.

        Returns tuples ('fun', a, b) or ('pred', a, b); empty when the model
        extends to a genuine interpretation.
        """
        lemmas = []
        for _, instances in sorted(self.apps.items()):
            by_args: dict[tuple, TApp] = {}
            for app in instances:
                argv = tuple(self.eval_term(a, col_vals) for a in app.args)
                other = by_args.get(argv)
                if other is None:
                    by_args[argv] = app
                elif col_vals[self.key_col[app]] != col_vals[self.key_col[other]]:
                    lemmas.append(("fun", other, app))
            del by_args
        for name, instances in sorted(pred_instances.items()):
            by_args = {}
            for papp in instances:
                argv = tuple(self.eval_term(a, col_vals) for a in papp[1])
                other = by_args.get(argv)
                if other is None:
                    by_args[argv] = papp
                elif pred_value(papp) != pred_value(other):
                    lemmas.append(("pred", other, papp))
        return lemmas


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)
