"""Incremental general simplex over exact rationals with branch & bound.

Values are delta-rationals (q, d) meaning q + d*eps for an infinitesimal
eps > 0, which represents strict bounds exactly.  Bounds carry opaque reason
tags; an infeasibility is reported as the set of reason tags of the bounds it
follows from.  Feasibility search uses Bland's rule, so it terminates.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = (Fraction(0), Fraction(0))


def dv_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def dv_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def dv_scale(a, k: Fraction):
    return (a[0] * k, a[1] * k)


def dv_is_int(a) -> bool:
    return a[1] == 0 and a[0].denominator == 1


def dv_floor(a):
    """Largest integer strictly representable below-or-at a delta-rational."""
    q, d = a
    if q.denominator != 1:
        return q.numerator // q.denominator
    return int(q) if d >= 0 else int(q) - 1


class IntBudgetExceeded(Exception):
    pass


class Simplex:
    def __init__(self):
        self.ncols = 0
        self.is_int: list[bool] = []
        self.rows: dict[int, dict[int, Fraction]] = {}  # basic -> expansion
        self.occurs: dict[int, set[int]] = {}  # nonbasic -> basics using it
        self.values: list[tuple] = []
        self.lower: list[tuple | None] = []
        self.upper: list[tuple | None] = []
        self.lower_reason: list[object] = []
        self.upper_reason: list[object] = []

    # -- construction

    def new_col(self, is_int: bool) -> int:
        c = self.ncols
        self.ncols += 1
        self.is_int.append(is_int)
        self.values.append(ZERO)
        self.lower.append(None)
        self.upper.append(None)
        self.lower_reason.append(None)
        self.upper_reason.append(None)
        self.occurs[c] = set()
        return c

    def add_row(self, lin: dict[int, Fraction], is_int: bool) -> int:
        """New column constrained to equal the linear combination."""
        s = self.new_col(is_int)
        expansion: dict[int, Fraction] = {}
        val = ZERO
        for c, a in lin.items():
            if c in self.rows:
                for c2, a2 in self.rows[c].items():
                    expansion[c2] = expansion.get(c2, Fraction(0)) + a * a2
            else:
                expansion[c] = expansion.get(c, Fraction(0)) + a
            val = dv_add(val, dv_scale(self.values[c], a))
        expansion = {c: a for c, a in expansion.items() if a != 0}
        self.rows[s] = expansion
        for c in expansion:
            self.occurs[c].add(s)
        self.values[s] = val
        return s

    # -- bounds

    def reset_bounds(self) -> None:
        for c in range(self.ncols):
            self.lower[c] = None
            self.upper[c] = None
            self.lower_reason[c] = None
            self.upper_reason[c] = None

    def save_bounds(self, c: int):
        return (
            self.lower[c],
            self.upper[c],
            self.lower_reason[c],
            self.upper_reason[c],
        )

    def restore_bounds(self, c: int, saved) -> None:
        self.lower[c], self.upper[c], self.lower_reason[c], self.upper_reason[c] = saved

    def assert_lower(self, c: int, val: tuple, reason) -> list | None:
        if self.lower[c] is not None and val <= self.lower[c]:
            return None
        if self.upper[c] is not None and val > self.upper[c]:
            return [reason, self.upper_reason[c]]
        self.lower[c] = val
        self.lower_reason[c] = reason
        if c not in self.rows and self.values[c] < val:
            self._update(c, val)
        return None

    def assert_upper(self, c: int, val: tuple, reason) -> list | None:
        if self.upper[c] is not None and val >= self.upper[c]:
            return None
        if self.lower[c] is not None and val < self.lower[c]:
            return [reason, self.lower_reason[c]]
        self.upper[c] = val
        self.upper_reason[c] = reason
        if c not in self.rows and self.values[c] > val:
            self._update(c, val)
        return None

    def _update(self, c: int, v: tuple) -> None:
        delta = dv_sub(v, self.values[c])
        for b in self.occurs[c]:
            a = self.rows[b].get(c)
            if a:
                self.values[b] = dv_add(self.values[b], dv_scale(delta, a))
        self.values[c] = v

    # -- feasibility

    def check(self) -> list | None:
        """None when feasible; otherwise the reasons of an infeasible subset."""
        while True:
            broken = -1
            below = False
            for b in self.rows:
                if self.lower[b] is not None and self.values[b] < self.lower[b]:
                    if broken == -1 or b < broken:
                        broken, below = b, True
                elif self.upper[b] is not None and self.values[b] > self.upper[b]:
                    if broken == -1 or b < broken:
                        broken, below = b, False
            if broken == -1:
                return None
            b = broken
            row = self.rows[b]
            pivot_col = -1
            for j in sorted(row):
                a = row[j]
                if below:
                    ok = (a > 0 and (self.upper[j] is None or self.values[j] < self.upper[j])) or (
                        a < 0 and (self.lower[j] is None or self.values[j] > self.lower[j])
                    )
                else:
                    ok = (a < 0 and (self.upper[j] is None or self.values[j] < self.upper[j])) or (
                        a > 0 and (self.lower[j] is None or self.values[j] > self.lower[j])
                    )
                if ok:
                    pivot_col = j
                    break
            if pivot_col == -1:
                reasons = []
                for j in row:
                    a = row[j]
                    if (below and a > 0) or (not below and a < 0):
                        reasons.append(self.upper_reason[j])
                    else:
                        reasons.append(self.lower_reason[j])
                reasons.append(self.lower_reason[b] if below else self.upper_reason[b])
                return reasons
            target = self.lower[b] if below else self.upper[b]
            self._pivot_and_update(b, pivot_col, target)

    def _pivot_and_update(self, b: int, j: int, v: tuple) -> None:
        a = self.rows[b][j]
        theta = dv_scale(dv_sub(v, self.values[b]), Fraction(1) / a)
        self.values[b] = v
        self.values[j] = dv_add(self.values[j], theta)
        for i in list(self.occurs[j]):
            if i != b:
                aij = self.rows[i].get(j)
                if aij:
                    self.values[i] = dv_add(self.values[i], dv_scale(theta, aij))
        self._pivot(b, j)

    def _pivot(self, b: int, j: int) -> None:
        row = self.rows.pop(b)
        a = row.pop(j)
        # x_j = (x_b - sum a_k x_k) / a
        new_row = {b: Fraction(1) / a}
        for k, ak in row.items():
            new_row[k] = -ak / a
            self.occurs[k].discard(b)
        self.occurs[j].discard(b)
        for k in new_row:
            self.occurs.setdefault(k, set())
        self.rows[j] = new_row
        for i in list(self.occurs[j]):
            if i == j:
                continue
            irow = self.rows[i]
            aij = irow.pop(j, None)
            if aij is None:
                continue
            for k, ak in new_row.items():
                nv = irow.get(k, Fraction(0)) + aij * ak
                if nv == 0:
                    if k in irow:
                        del irow[k]
                    self.occurs[k].discard(i)
                else:
                    irow[k] = nv
                    self.occurs[k].add(i)
        self.occurs[j] = {i for i in self.occurs[j] if j in self.rows.get(i, {})}
        for k in new_row:
            self.occurs[k].add(j)

    # -- integer feasibility

    def check_int(self, budget: list, deadline_probe=None) -> list | None:
        """Branch & bound over the integer columns; None when int-feasible."""
        conflict = self.check()
        if conflict is not None:
            return conflict
        if deadline_probe is not None:
            deadline_probe()
        frac_col = -1
        for c in range(self.ncols):
            if self.is_int[c] and c not in self.rows and not dv_is_int(self.values[c]):
                frac_col = c
                break
        if frac_col == -1:
            for c in range(self.ncols):
                if self.is_int[c] and not dv_is_int(self.values[c]):
                    frac_col = c
                    break
        if frac_col == -1:
            return None
        budget[0] -= 1
        if budget[0] <= 0:
            raise IntBudgetExceeded()
        c = frac_col
        v = dv_floor(self.values[c])
        marker_lo = object()
        marker_hi = object()
        saved = self.save_bounds(c)
        conflict = self.assert_upper(c, (Fraction(v), Fraction(0)), marker_lo)
        r1 = conflict if conflict is not None else self.check_int(budget, deadline_probe)
        self.restore_bounds(c, saved)
        if r1 is None:
            return None
        saved = self.save_bounds(c)
        conflict = self.assert_lower(c, (Fraction(v + 1), Fraction(0)), marker_hi)
        r2 = conflict if conflict is not None else self.check_int(budget, deadline_probe)
        self.restore_bounds(c, saved)
        if r2 is None:
            return None
        merged = [x for x in r1 if x != marker_lo] + [
            x for x in r2 if x != marker_hi and x not in r1
        ]
        return merged

    # -- models

    def concrete_values(self) -> list[Fraction]:
        """Choose an epsilon small enough and collapse delta-rationals."""
        eps = Fraction(1)
        for c in range(self.ncols):
            q, d = self.values[c]
            lo = self.lower[c]
            if lo is not None and q > lo[0] and d < lo[1]:
                eps = min(eps, (q - lo[0]) / (lo[1] - d))
            hi = self.upper[c]
            if hi is not None and q < hi[0] and d > hi[1]:
                eps = min(eps, (hi[0] - q) / (d - hi[1]))
        eps = eps / 2
        return [q + d * eps for q, d in self.values]
