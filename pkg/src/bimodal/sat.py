"""A small CDCL solver used by bounded search.

Two-watched-literal propagation, first-UIP clause learning, activity-based
branching and Luby restarts.  Literals are non-zero ints (DIMACS style).
Deterministic: identical input gives identical output.
"""

from __future__ import annotations

import heapq
import time


class SolverBudget(Exception):
    """Raised when the conflict or wall-clock budget runs out."""


def _luby(i: int) -> int:
    k = 1
    while (1 << k) - 1 < i + 1:
        k += 1
    while True:
        if i + 1 == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i + 1:
            k += 1


class Solver:
    def __init__(self, nvars: int = 0):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.value: list[int] = [0]
        self.level: list[int] = [0]
        self.reason: list[int] = [-1]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [-1]
        self.units: list[int] = []
        self.empty = False
        self.ensure(nvars)

    def ensure(self, n: int):
        while self.nvars < n:
            self.nvars += 1
            self.value.append(0)
            self.level.append(0)
            self.reason.append(-1)
            self.activity.append(0.0)
            self.phase.append(-1)
            self.watches[self.nvars] = []
            self.watches[-self.nvars] = []

    def new_var(self) -> int:
        self.ensure(self.nvars + 1)
        return self.nvars

    def add_clause(self, lits):
        c = sorted(set(lits), key=abs)
        for l in c:
            if -l in c:
                return  # tautology
            self.ensure(abs(l))
        if not c:
            self.empty = True
            return
        if len(c) == 1:
            self.units.append(c[0])
            return
        idx = len(self.clauses)
        self.clauses.append(c)
        self.watches[c[0]].append(idx)
        self.watches[c[1]].append(idx)

    # -- core ---------------------------------------------------------------
    def _val(self, lit):
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def _assign(self, lit, lvl, reason):
        var = abs(lit)
        self.value[var] = 1 if lit > 0 else -1
        self.level[var] = lvl
        self.reason[var] = reason
        self.trail.append(lit)

    def _propagate(self):
        value = self.value
        clauses = self.clauses
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            ws = watches[false_lit]
            i = 0
            j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = value[abs(first)]
                if (fv if first > 0 else -fv) == 1:
                    ws[j] = ci
                    j += 1
                    i += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    l = c[k]
                    lv = value[abs(l)]
                    if (lv if l > 0 else -lv) != -1:
                        c[1], c[k] = l, c[1]
                        watches[l].append(ci)
                        found = True
                        break
                if found:
                    i += 1
                    continue
                ws[j] = ci
                j += 1
                i += 1
                if (fv if first > 0 else -fv) == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return ci
                self._assign(first, self.cur_level, ci)
            del ws[j:]
        return -1

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        clause = self.clauses[confl]
        while True:
            for q in clause:
                if p and q == p:
                    continue
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= self.cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            clause = self.clauses[self.reason[abs(p)]]
        learnt[0] = -p
        if len(learnt) == 1:
            back = 0
        else:
            mi = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            back = self.level[abs(learnt[1])]
        return learnt, back

    def _bump(self, v):
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            for k in range(1, self.nvars + 1):
                self.activity[k] *= 1e-100
            self.inc *= 1e-100
        heapq.heappush(self.heap, (-self.activity[v], v))

    def _backtrack(self, lvl):
        if self.cur_level <= lvl:
            return
        lim = self.trail_lim[lvl]
        for lit in self.trail[lim:]:
            v = abs(lit)
            self.phase[v] = self.value[v]
            self.value[v] = 0
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        self.cur_level = lvl

    def _pick(self):
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.value[v] == 0:
                return v
        for v in range(1, self.nvars + 1):
            if self.value[v] == 0:
                return v
        return 0

    def solve(self, max_conflicts: int | None = None, deadline: float | None = None,
              decision_order: list[int] | None = None) -> bool:
        """Return True (model in self.model()) or False; may raise SolverBudget."""
        if self.empty:
            return False
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.cur_level = 0
        self.inc = 1.0
        for v in range(1, self.nvars + 1):
            self.value[v] = 0
        if decision_order:
            # earlier variables get a small initial preference
            n = len(decision_order)
            for k, v in enumerate(decision_order):
                self.activity[v] = max(self.activity[v], (n - k) * 1e-6)
        self.heap = [(-self.activity[v], v) for v in range(1, self.nvars + 1)]
        heapq.heapify(self.heap)
        for u in self.units:
            val = self._val(u)
            if val == -1:
                return False
            if val == 0:
                self._assign(u, 0, -1)
        if self._propagate() != -1:
            return False
        conflicts = 0
        restart_no = 0
        limit = 64 * _luby(restart_no)
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl != -1:
                conflicts += 1
                since_restart += 1
                if self.cur_level == 0:
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self.units.append(learnt[0])
                    self._assign(learnt[0], 0, -1)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._assign(learnt[0], self.cur_level, ci)
                self.inc *= 1.05
                if max_conflicts is not None and conflicts > max_conflicts:
                    raise SolverBudget("conflict budget exhausted")
                if deadline is not None and conflicts % 64 == 0 and time.monotonic() > deadline:
                    raise SolverBudget("time budget exhausted")
                continue
            if since_restart >= limit:
                restart_no += 1
                limit = 64 * _luby(restart_no)
                since_restart = 0
                self._backtrack(0)
                continue
            v = self._pick()
            if v == 0:
                return True
            self.trail_lim.append(len(self.trail))
            self.cur_level += 1
            self._assign(v if self.phase[v] == 1 else -v, self.cur_level, -1)

    def model(self) -> dict[int, bool]:
        return {v: self.value[v] == 1 for v in range(1, self.nvars + 1)}
