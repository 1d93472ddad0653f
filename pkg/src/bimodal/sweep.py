"""Exhaustive frame-correspondence sweep for the three commutator formulas.

A 2-frame on n <= 4 worlds is a pair of n*n-bit relation masks.  Validity of

    [1][0]P -> [0][1]P,   [0][1]P -> [1][0]P,   <0>[1]P -> [1]<0>P

is decided by enumerating all 2^n valuations of P as bitmasks; the
first-order side is commute (both inclusions) and confluence.  For n = 4 the
first relation ranges over isomorphism-class representatives and the second
over all relations, which covers every frame up to isomorphism.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = ["SweepResult", "sweep", "random_sweep", "frame_valid", "frame_fo",
           "orbit_representatives", "to_twoframe"]


@njit(cache=True)
def _succ(rel, n):
    out = np.zeros(n, dtype=np.int64)
    for a in range(n):
        m = 0
        for b in range(n):
            if rel >> (a * n + b) & 1:
                m |= 1 << b
        out[a] = m
    return out


@njit(cache=True)
def _box_table(succ, n):
    full = (1 << n) - 1
    tab = np.zeros(1 << n, dtype=np.int64)
    for x in range(1 << n):
        r = 0
        for a in range(n):
            if succ[a] & ~x & full == 0:
                r |= 1 << a
        tab[x] = r
    return tab


@njit(cache=True)
def _dia_table(succ, n):
    tab = np.zeros(1 << n, dtype=np.int64)
    for x in range(1 << n):
        r = 0
        for a in range(n):
            if succ[a] & x:
                r |= 1 << a
        tab[x] = r
    return tab


@njit(cache=True)
def _valid(b0, b1, d0, n):
    full = (1 << n) - 1
    for x in range(1 << n):
        if b1[b0[x]] & ~b0[b1[x]] & full:
            return False
        if b0[b1[x]] & ~b1[b0[x]] & full:
            return False
        if d0[b1[x]] & ~b1[d0[x]] & full:
            return False
    return True


@njit(cache=True)
def _fo(s0, s1, n):
    for a in range(n):
        # R0;R1 and R1;R0 images of a
        c01 = 0
        c10 = 0
        for b in range(n):
            if s0[a] >> b & 1:
                c01 |= s1[b]
            if s1[a] >> b & 1:
                c10 |= s0[b]
        if c01 != c10:
            return False
        for y in range(n):
            if not s0[a] >> y & 1:
                continue
            for z in range(n):
                if s1[a] >> z & 1 and s1[y] & s0[z] == 0:
                    return False
    return True


@njit(cache=True)
def _sweep_block(reps, n):
    nrel = 1 << (n * n)
    tables_b = np.zeros((nrel, 1 << n), dtype=np.int64)
    succs = np.zeros((nrel, n), dtype=np.int64)
    for r in range(nrel):
        s = _succ(r, n)
        succs[r] = s
        tables_b[r] = _box_table(s, n)
    mismatches = 0
    first0 = -1
    first1 = -1
    valid_count = 0
    for k in range(reps.shape[0]):
        r0 = reps[k]
        s0 = succs[r0]
        b0 = tables_b[r0]
        d0 = _dia_table(s0, n)
        for r1 in range(nrel):
            v = _valid(b0, tables_b[r1], d0, n)
            f = _fo(s0, succs[r1], n)
            if v:
                valid_count += 1
            if v != f:
                mismatches += 1
                if first0 < 0:
                    first0 = r0
                    first1 = r1
    return mismatches, valid_count, first0, first1


def _permute(rel: int, perm, n: int) -> int:
    out = 0
    for a in range(n):
        for b in range(n):
            if rel >> (a * n + b) & 1:
                out |= 1 << (perm[a] * n + perm[b])
    return out


def orbit_representatives(n: int) -> np.ndarray:
    """Least element of every isomorphism class of relations on n worlds."""
    perms = list(itertools.permutations(range(n)))
    seen = np.zeros(1 << (n * n), dtype=bool)
    reps = []
    for r in range(1 << (n * n)):
        if seen[r]:
            continue
        reps.append(r)
        for p in perms:
            seen[_permute(r, p, n)] = True
    return np.array(reps, dtype=np.int64)


@dataclass
class SweepResult:
    worlds: int
    frames: int
    valid: int
    mismatches: int
    elapsed: float
    first_mismatch: tuple | None = None
    reduced: bool = False

    def line(self) -> str:
        how = "up to isomorphism" if self.reduced else "literal"
        return (f"n={self.worlds} ({how}): {self.frames} frames, {self.valid} valid, "
                f"{self.mismatches} mismatches, {self.elapsed:.1f}s")


def sweep(n: int, reduce: bool | None = None) -> SweepResult:
    """Compare validity with commute & confluent on every 2-frame with n worlds."""
    if n < 1 or n > 4:
        raise ValueError("exhaustive sweep supports 1..4 worlds")
    reduce = n == 4 if reduce is None else reduce
    t0 = time.monotonic()
    reps = orbit_representatives(n) if reduce else np.arange(1 << (n * n), dtype=np.int64)
    mism, valid, f0, f1 = _sweep_block(reps, n)
    first = (int(f0), int(f1)) if mism else None
    frames = len(reps) * (1 << (n * n))
    return SweepResult(n, frames, int(valid), int(mism), time.monotonic() - t0, first, reduce)


def frame_valid(r0: int, r1: int, n: int) -> bool:
    s0, s1 = _succ(r0, n), _succ(r1, n)
    return bool(_valid(_box_table(s0, n), _box_table(s1, n), _dia_table(s0, n), n))


def frame_fo(r0: int, r1: int, n: int) -> bool:
    return bool(_fo(_succ(r0, n), _succ(r1, n), n))


def to_twoframe(r0: int, r1: int, n: int):
    from .frames import TwoFrame
    rel = lambda r: [(a, b) for a in range(n) for b in range(n) if r >> (a * n + b) & 1]
    return TwoFrame(range(n), rel(r0), rel(r1))


def random_sweep(count: int = 200, max_worlds: int = 6, seed: int = 0):
    """Random frames checked through the library's generic property and validity code."""
    from .formula import parse
    from .frames import check_property
    from .semantics import valid_in_frame

    rng = random.Random(seed)
    formulas = [parse("[1][0]P -> [0][1]P"), parse("[0][1]P -> [1][0]P"),
                parse("<0>[1]P -> [1]<0>P")]
    bad = []
    for k in range(count):
        n = rng.randint(1, max_worlds)
        dens0, dens1 = rng.choice([0.1, 0.3, 0.5, 0.8]), rng.choice([0.1, 0.3, 0.5, 0.8])
        # bias toward commuting frames so both verdicts occur
        if k % 4 == 0:
            pairs = [(a, b) for a in range(n) for b in range(n)]
            r0 = [p for p in pairs if rng.random() < dens0]
            r1 = [p for p in pairs if rng.random() < dens1]
            from .frames import TwoFrame
            tf = TwoFrame(range(n), r0, r1)
        else:
            tf = _random_product_like(rng, n)
        valid = all(valid_in_frame(tf, f) for f in formulas)
        fo = check_property(tf, "commute") and check_property(tf, "confluent")
        if valid != fo:
            bad.append(tf)
    return bad


def _random_product_like(rng: random.Random, n: int):
    """A random sub-product perturbation: commuting frames are rare otherwise."""
    from .frames import TwoFrame
    a = rng.randint(1, max(1, n // 2))
    b = max(1, n // a)
    worlds = [(i, j) for i in range(a) for j in range(b)][:n]
    idx = {w: k for k, w in enumerate(worlds)}
    h = [(i, i2) for i in range(a) for i2 in range(a) if rng.random() < 0.5]
    v = [(j, j2) for j in range(b) for j2 in range(b) if rng.random() < 0.5]
    r0 = [(idx[(i, j)], idx[(i2, j)]) for i, i2 in h for j in range(b)
          if (i, j) in idx and (i2, j) in idx]
    r1 = [(idx[(i, j)], idx[(i, j2)]) for j, j2 in v for i in range(a)
          if (i, j) in idx and (i, j2) in idx]
    if rng.random() < 0.3 and n > 1:
        r0.append((rng.randrange(n), rng.randrange(n)))
    return TwoFrame(range(n), r0, r1)
