"""CDCL SAT core: two-watched literals, first-UIP learning, VSIDS decisions
with a lazy heap, Luby restarts and solving under assumptions.

Literals are signed ints over 1-based variables.  Clauses learned during a
solve are implied by the clause database alone (conflict analysis resolves
only database clauses), so they stay valid across scope pops when callers
guard scoped assertions with fresh assumption variables.
"""

from __future__ import annotations

import heapq


class SatTimeout(Exception):
    pass


def _luby(i: int) -> int:
    k = 1
    while (1 << (k + 1)) - 1 <= i:
        k += 1
    while (1 << k) - 1 != i + 1:
        i = i - (1 << (k - 1)) + 1
        k = 1
        while (1 << (k + 1)) - 1 <= i:
            k += 1
    return 1 << (k - 1)


class Sat:
    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[list[int]]] = {}
        self.assign: list[int] = [0]  # var -> 0 unassigned, 1 true, -1 false
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0]
        self.var_inc = 1.0
        self.phase: list[bool] = [False]
        self.heap: list[tuple[float, int]] = []
        self.ok = True
        self.deadline_probe = None
        self._probe_countdown = 4096

    # -- construction

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.assign.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        self.watches[v] = []
        self.watches[-v] = []
        heapq.heappush(self.heap, (0.0, v))
        return v

    def value(self, lit: int) -> int:
        s = self.assign[abs(lit)]
        return s if lit > 0 else -s

    def add_clause(self, lits: list[int]) -> None:
        """Add a clause; callable between solves only (resets to level 0)."""
        if not self.ok:
            return
        self._backjump(0)
        seen = set()
        out = []
        for l in lits:
            if -l in seen:
                return  # tautology
            if l not in seen:
                seen.add(l)
                out.append(l)
        out2 = []
        for l in out:
            v = self.value(l)
            if v == 1:
                return
            if v == 0:
                out2.append(l)
        if not out2:
            self.ok = False
            return
        if len(out2) == 1:
            self._enqueue(out2[0], None)
            if self.propagate() is not None:
                self.ok = False
            return
        self._attach(out2)

    def _attach(self, lits: list[int]) -> None:
        self.clauses.append(lits)
        self.watches[lits[0]].append(lits)
        self.watches[lits[1]].append(lits)

    # -- trail

    def _enqueue(self, lit: int, reason) -> bool:
        v = self.value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        var = abs(lit)
        self.assign[var] = 1 if lit > 0 else -1
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.phase[var] = lit > 0
        self.trail.append(lit)
        return True

    def propagate(self):
        """Returns a conflicting clause or None."""
        while self.qhead < len(self.trail):
            self._probe_countdown -= 1
            if self._probe_countdown <= 0:
                self._probe_countdown = 4096
                if self.deadline_probe is not None:
                    self.deadline_probe()
            lit = self.trail[self.qhead]
            self.qhead += 1
            falsified = -lit
            watchlist = self.watches[falsified]
            i = 0
            while i < len(watchlist):
                clause = watchlist[i]
                if clause[0] == falsified:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self.value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1]].append(clause)
                        watchlist[i] = watchlist[-1]
                        watchlist.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value(first) == -1:
                    return clause
                self._enqueue(first, clause)
                i += 1
        return None

    def _backjump(self, target_level: int) -> None:
        while self.trail_lim and len(self.trail_lim) > target_level:
            limit = self.trail_lim[-1]
            while len(self.trail) > limit:
                lit = self.trail.pop()
                var = abs(lit)
                self.assign[var] = 0
                self.reason[var] = None
                heapq.heappush(self.heap, (-self.activity[var], var))
            self.trail_lim.pop()
        self.qhead = min(self.qhead, len(self.trail))

    # -- learning

    def _bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100
        heapq.heappush(self.heap, (-self.activity[var], var))

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        learnt = [0]
        seen = [False] * (self.nvars + 1)
        counter = 0
        p = None  # the literal whose reason we are resolving on
        reason = conflict
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            for q in reason:
                if p is not None and q == p:
                    continue
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    self._bump(var)
                    if self.level[var] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            var = abs(p)
            seen[var] = False
            counter -= 1
            idx -= 1
            if counter == 0:
                learnt[0] = -p
                break
            reason = self.reason[var]
            assert reason is not None
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[abs(q)] for q in learnt[1:])
        top = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[top] = learnt[top], learnt[1]
        return learnt, back

    # -- search

    def _decide(self) -> int:
        while self.heap:
            act, v = self.heap[0]
            if self.assign[v] != 0 or -act != self.activity[v]:
                heapq.heappop(self.heap)
                continue
            return v if self.phase[v] else -v
        return 0

    def solve(self, assumptions: list[int] | None = None) -> bool:
        """True iff satisfiable under the assumptions (model in .assign)."""
        assumptions = assumptions or []
        if not self.ok:
            return False
        self._backjump(0)
        if self.propagate() is not None:
            self.ok = False
            return False
        restart_idx = 0
        restart_budget = _luby(0) * 64
        while True:
            conflict = self.propagate()
            if conflict is not None:
                if not self.trail_lim:
                    self.ok = False
                    return False
                restart_budget -= 1
                learnt, back_level = self._analyze(conflict)
                self._backjump(back_level)
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        self.ok = False
                        return False
                else:
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc *= 1.052
                continue
            if restart_budget <= 0:
                restart_idx += 1
                restart_budget = _luby(restart_idx) * 64
                self._backjump(0)
                continue
            lit = None
            for a in assumptions:
                v = self.value(a)
                if v == -1:
                    self._backjump(0)
                    return False
                if v == 0:
                    lit = a
                    break
            if lit is None:
                lit = self._decide()
                if lit == 0:
                    return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def model(self) -> list[int]:
        return list(self.assign)
