"""Finite frames, 2-frames, grid constructions and frame properties."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Hashable, Iterable, Iterator, Sequence

__all__ = [
    "Frame", "TwoFrame", "GridTwoFrame", "INFINITE", "TOP_POINT",
    "make_linear", "make_difference", "make_omega_plus_one_reversed",
    "product", "assemble", "check_property", "horizontal_rank",
    "DerivedStructure", "derive_tick_structure", "FrameError",
    "grid_candidates", "commuting_candidates", "compose",
]


class FrameError(ValueError):
    pass


class _Infinite:
    """Sentinel for the rank of points that reach a cycle."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = object.__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITE"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()
TOP_POINT = "top"


class Frame:
    """A finite frame <W, R>; world order is the given carrier order."""

    def __init__(self, worlds: Sequence[Hashable], rel: Iterable[tuple]):
        self.worlds = tuple(worlds)
        if not self.worlds:
            raise FrameError("a frame needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise FrameError("duplicate world ids")
        self.rel = frozenset(rel)
        ws = set(self.worlds)
        for a, b in self.rel:
            if a not in ws or b not in ws:
                raise FrameError(f"edge ({a!r}, {b!r}) leaves the carrier")
        self.index = {w: i for i, w in enumerate(self.worlds)}
        self.succ = {w: [] for w in self.worlds}
        for a, b in sorted(self.rel, key=lambda e: (self.index[e[0]], self.index[e[1]])):
            self.succ[a].append(b)

    def __eq__(self, other):
        return isinstance(other, Frame) and self.worlds == other.worlds and self.rel == other.rel

    def __hash__(self):
        return hash((self.worlds, self.rel))

    def __repr__(self):
        return f"Frame({list(self.worlds)!r}, {sorted(self.rel, key=repr)!r})"

    def restrict(self, keep: Iterable) -> "Frame":
        keep = set(keep)
        return Frame([w for w in self.worlds if w in keep],
                     [(a, b) for a, b in self.rel if a in keep and b in keep])


class TwoFrame:
    """A finite 2-frame <W, R0, R1> with bitmask successor tables."""

    def __init__(self, worlds: Sequence[Hashable], rel0: Iterable[tuple], rel1: Iterable[tuple]):
        self.worlds = tuple(worlds)
        if not self.worlds:
            raise FrameError("a 2-frame needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise FrameError("duplicate world ids")
        self.rel0 = frozenset(rel0)
        self.rel1 = frozenset(rel1)
        self.index = {w: i for i, w in enumerate(self.worlds)}
        n = len(self.worlds)
        self.succ_mask = ([0] * n, [0] * n)
        for k, rel in enumerate((self.rel0, self.rel1)):
            for a, b in rel:
                if a not in self.index or b not in self.index:
                    raise FrameError(f"edge ({a!r}, {b!r}) leaves the carrier")
                self.succ_mask[k][self.index[a]] |= 1 << self.index[b]

    def rel(self, i: int) -> frozenset:
        return self.rel1 if i else self.rel0

    def successors(self, i: int, w) -> list:
        m = self.succ_mask[i][self.index[w]]
        return [self.worlds[j] for j in range(len(self.worlds)) if m >> j & 1]

    def __len__(self):
        return len(self.worlds)

    def __eq__(self, other):
        return (isinstance(other, TwoFrame) and self.worlds == other.worlds
                and self.rel0 == other.rel0 and self.rel1 == other.rel1)

    def __hash__(self):
        return hash((self.worlds, self.rel0, self.rel1))

    def __repr__(self):
        return f"TwoFrame({len(self.worlds)} worlds, |R0|={len(self.rel0)}, |R1|={len(self.rel1)})"

    def restrict(self, keep: Iterable) -> "TwoFrame":
        keep = set(keep)
        return TwoFrame([w for w in self.worlds if w in keep],
                        [(a, b) for a, b in self.rel0 if a in keep and b in keep],
                        [(a, b) for a, b in self.rel1 if a in keep and b in keep])


class GridTwoFrame(TwoFrame):
    """A product, expanding or decreasing 2-frame over a horizontal frame.

    World ids are the pairs (h, v) themselves, so coord(w) == w.
    """

    def __init__(self, horizontal: Frame, domains: dict, tag: str):
        self.horizontal = horizontal
        self.domains = {h: domains[h] for h in horizontal.worlds}
        self.tag = tag
        worlds = [(h, v) for h in horizontal.worlds for v in self.domains[h].worlds]
        members = {h: set(self.domains[h].worlds) for h in horizontal.worlds}
        rel0 = [((h, v), (h2, v)) for h, h2 in horizontal.rel
                for v in self.domains[h].worlds if v in members[h2]]
        rel1 = [((h, a), (h, b)) for h in horizontal.worlds for a, b in self.domains[h].rel]
        super().__init__(worlds, rel0, rel1)
        self._check_coordinates()

    def coord(self, w) -> tuple:
        return w

    def column(self, h) -> list:
        return [(h, v) for v in self.domains[h].worlds]

    def vertical_ids(self) -> list:
        seen, out = set(), []
        for h in self.horizontal.worlds:
            for v in self.domains[h].worlds:
                if v not in seen:
                    seen.add(v)
                    out.append(v)
        return out

    def _check_coordinates(self):
        hrel = self.horizontal.rel
        for (a, b) in self.rel0:
            assert a[1] == b[1] and (a[0], b[0]) in hrel
        for (a, b) in self.rel1:
            assert a[0] == b[0] and (a[1], b[1]) in self.domains[a[0]].rel
        for x, y in hrel:
            wx, wy = set(self.domains[x].worlds), set(self.domains[y].worlds)
            if self.tag == "expanding":
                assert wx <= wy
            elif self.tag == "decreasing":
                assert wx >= wy
            elif self.tag == "product":
                assert wx == wy

    def __repr__(self):
        sizes = [len(self.domains[h].worlds) for h in self.horizontal.worlds]
        return f"GridTwoFrame({self.tag}, horizontal={list(self.horizontal.worlds)}, domain sizes={sizes})"


# ---------------------------------------------------------------- constructors

def make_linear(n: int, ids: Sequence | None = None) -> Frame:
    """<n, <> as an irreflexive strict order."""
    if n < 1:
        raise FrameError("size must be >= 1")
    ids = list(range(n)) if ids is None else list(ids)
    return Frame(ids, [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)])


def make_difference(n: int, ids: Sequence | None = None) -> Frame:
    """<n, !=>: the full inequality relation."""
    if n < 1:
        raise FrameError("size must be >= 1")
    ids = list(range(n)) if ids is None else list(ids)
    return Frame(ids, [(a, b) for a in ids for b in ids if a != b])


def make_omega_plus_one_reversed(K: int) -> Frame:
    """Truncation of <omega+1, >>: top above the reversed chain K > ... > 0."""
    if K < 1:
        raise FrameError("truncation must be >= 1")
    worlds = [TOP_POINT] + list(range(K + 1))
    rel = [(TOP_POINT, n) for n in range(K + 1)]
    rel += [(n, m) for n in range(K + 1) for m in range(n)]
    return Frame(worlds, rel)


def product(f0: Frame, f1: Frame) -> GridTwoFrame:
    return GridTwoFrame(f0, {h: f1 for h in f0.worlds}, "product")


def _is_subframe(small: Frame, big: Frame) -> bool:
    s = set(small.worlds)
    if not s <= set(big.worlds):
        return False
    return small.rel == frozenset((a, b) for a, b in big.rel if a in s and b in s)


def assemble(f: Frame, domains: dict, mode: str) -> GridTwoFrame:
    """The H construction over f with vertical frames `domains[x]`."""
    if mode not in ("expanding", "decreasing"):
        raise FrameError(f"unknown mode {mode!r}")
    for x, y in f.rel:
        small, big = (domains[x], domains[y]) if mode == "expanding" else (domains[y], domains[x])
        if not _is_subframe(small, big):
            raise FrameError(f"{mode} inclusion fails between {x!r} and {y!r}")
    return GridTwoFrame(f, domains, mode)


# ---------------------------------------------------------------- properties

def compose(r: frozenset, s: frozenset) -> set:
    """Relational composition r;s = {(x,z) : x r y s z}."""
    by_src: dict = {}
    for a, b in s:
        by_src.setdefault(a, []).append(b)
    return {(x, z) for x, y in r for z in by_src.get(y, ())}


def _transitive(worlds, rel) -> bool:
    return compose(rel, rel) <= rel


def _weakly_connected(worlds, rel) -> bool:
    succ: dict = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    for x, ys in succ.items():
        for y in ys:
            for z in ys:
                if y != z and (y, z) not in rel and (z, y) not in rel:
                    return False
    return True


def _pseudo_transitive(worlds, rel) -> bool:
    return all(x == z or (x, z) in rel for x, z in compose(rel, rel))


def _dense(worlds, rel) -> bool:
    comp = compose(rel, rel)
    return all(e in comp for e in rel)


def _rooted(worlds, rels) -> bool:
    edges: dict = {}
    for rel in rels:
        for a, b in rel:
            edges.setdefault(a, set()).add(b)
    for r in worlds:  # first world in carrier order first, then the rest
        seen, stack = {r}, [r]
        while stack:
            for b in edges.get(stack.pop(), ()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        if len(seen) == len(worlds):
            return True
    return False


def _modally_discrete(worlds, rel) -> bool:
    # finite shadow: no x_inf with a cycle (of distinct consecutive points)
    # among worlds y such that y R x_inf and not x_inf R y
    for xinf in worlds:
        pool = {y for y in worlds if (y, xinf) in rel and (xinf, y) not in rel}
        graph = {y: {b for a, b in rel if a == y and b in pool and b != y} for y in pool}
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError:
            return False
    return True


def _linear_order(worlds, rel) -> bool:
    if any((w, w) in rel for w in worlds):
        return False
    if not _transitive(worlds, rel):
        return False
    return all(a == b or (a, b) in rel or (b, a) in rel for a in worlds for b in worlds)


def check_property(fr, prop: str) -> bool:
    """Decide a named first-order frame condition on a finite (2-)frame.

    2-frame properties: commute (R0;R1 = R1;R0), commute-left (R0;R1 is
    contained in R1;R0), commute-right (the converse inclusion), confluent,
    rooted.  Frame properties: weak-order, pseudo-equivalence, linear-order,
    well-order, modally-discrete, dense, rooted, transitive, symmetric.
    """
    if isinstance(fr, TwoFrame):
        r0, r1 = fr.rel0, fr.rel1
        if prop == "commute-left":
            return compose(r0, r1) <= compose(r1, r0)
        if prop == "commute-right":
            return compose(r1, r0) <= compose(r0, r1)
        if prop == "commute":
            return compose(r0, r1) == compose(r1, r0)
        if prop == "confluent":
            s1: dict = {}
            for a, b in r1:
                s1.setdefault(a, set()).add(b)
            p0: dict = {}
            for a, b in r0:
                p0.setdefault(b, set()).add(a)
            s0: dict = {}
            for a, b in r0:
                s0.setdefault(a, set()).add(b)
            for x in fr.worlds:
                for y in s0.get(x, ()):
                    for z in s1.get(x, ()):
                        # need u with y R1 u and z R0 u
                        if not (s1.get(y, set()) & s0.get(z, set())):
                            return False
            return True
        if prop == "rooted":
            return _rooted(fr.worlds, (r0, r1))
        raise FrameError(f"unknown 2-frame property {prop!r}")
    worlds, rel = fr.worlds, fr.rel
    table = {
        "transitive": lambda: _transitive(worlds, rel),
        "symmetric": lambda: all((b, a) in rel for a, b in rel),
        "weak-order": lambda: _transitive(worlds, rel) and _weakly_connected(worlds, rel),
        "pseudo-equivalence": lambda: all((b, a) in rel for a, b in rel) and _pseudo_transitive(worlds, rel),
        "linear-order": lambda: _linear_order(worlds, rel),
        # every finite linear order is a well-order
        "well-order": lambda: _linear_order(worlds, rel),
        "modally-discrete": lambda: _modally_discrete(worlds, rel),
        "dense": lambda: _dense(worlds, rel),
        "rooted": lambda: _rooted(worlds, (rel,)),
    }
    if prop not in table:
        raise FrameError(f"unknown frame property {prop!r}")
    return table[prop]()


def _closure(succ: list) -> list:
    reach = list(succ)
    changed = True
    while changed:
        changed = False
        for i, m in enumerate(reach):
            acc, rest, j = m, m, 0
            while rest:
                if rest & 1:
                    acc |= reach[j]
                rest >>= 1
                j += 1
            if acc != m:
                reach[i] = acc
                changed = True
    return reach


def horizontal_rank(tf: TwoFrame, w):
    """Longest R0-path length from w; INFINITE if w reaches an R0-cycle."""
    succ = tf.succ_mask[0]
    reach = _closure(succ)
    n = len(succ)
    cyclic = 0
    for i in range(n):
        if reach[i] >> i & 1:
            cyclic |= 1 << i
    start = tf.index[w]
    if (reach[start] | (1 << start)) & cyclic:
        return INFINITE
    below = [j for j in range(n) if (reach[start] | 1 << start) >> j & 1]
    below.sort(key=lambda j: bin(reach[j]).count("1"))
    rank = {}
    for j in below:
        best, m, k = 0, succ[j], 0
        while m:
            if m & 1:
                best = max(best, rank[k] + 1)
            m >>= 1
            k += 1
        rank[j] = best
    return rank[start]


# ---------------------------------------------------------------- tick trick

@dataclass
class DerivedStructure:
    """R^M, ~ and the ~-classes derived from a Tick valuation."""

    model: object
    rel: frozenset
    sim: frozenset
    classes: dict = field(default_factory=dict)

    def interval(self, x) -> frozenset:
        return self.classes[x]

    def violations(self) -> list[str]:
        """Check transitivity, equivalence, (sameroot), (wcon), (wconM)."""
        pts = list(self.model.frame.horizontal.worlds)
        R, sim = self.rel, self.sim
        out = []
        if not compose(R, R) <= R:
            out.append("R^M not transitive")
        if not all((x, x) in sim for x in pts):
            out.append("~ not reflexive")
        if not all((b, a) in sim for a, b in sim):
            out.append("~ not symmetric")
        if not compose(sim, sim) <= sim:
            out.append("~ not transitive")
        for y, z in sim:
            for x in pts:
                if (x, y) in R and (x, z) not in R:
                    out.append(f"(sameroot) fails at x={x!r}, y={y!r}, z={z!r}")
                if (y, x) in R and (z, x) not in R:
                    out.append(f"(wcon) fails at x={x!r}, y={y!r}, z={z!r}")
        for x in pts:
            for y in pts:
                for z in pts:
                    if (x, y) in R and (x, z) in R and not ((y, z) in sim or (y, z) in R or (z, y) in R):
                        out.append(f"(wconM) fails at x={x!r}, y={y!r}, z={z!r}")
        return out


def derive_tick_structure(m, tick_var: str, root=None) -> DerivedStructure:
    """Compute R^M and ~ for a decreasing grid model with a Tick variable."""
    from .formula import Var, box_plus, conj, dia, box, imp, disj
    from .semantics import check

    fr = m.frame
    if not isinstance(fr, GridTwoFrame) or fr.tag not in ("decreasing", "product"):
        raise FrameError("tick structure needs a decreasing (or product) grid frame")
    t = Var(tick_var)
    tick_formula = box_plus(1, box_plus(0, imp(disj(t, dia(1, t)), t & box(1, t))))
    root = root if root is not None else m.root
    if root is None:
        raise FrameError("model has no designated root")
    if not check(m, root, tick_formula):
        raise FrameError("(tick) fails at the root")
    ticks = m.valuation.get(tick_var, frozenset())
    hrel = fr.horizontal.rel
    pts = fr.horizontal.worlds

    def flip(x, z):
        return all(((x, u) in ticks) != ((z, u) in ticks) for u in fr.domains[z].worlds)

    R = set()
    for x, z in hrel:
        if flip(x, z):
            R.add((x, z))
            for y in pts:
                if (z, y) in hrel:
                    R.add((x, y))
    sim = {(y, y) for y in pts}
    for y, z in hrel:
        if (y, z) not in R:
            sim.add((y, z))
            sim.add((z, y))
    classes = {x: frozenset(z for z in pts if (x, z) in sim) for x in pts}
    return DerivedStructure(m, frozenset(R), frozenset(sim), classes)


# ---------------------------------------------------------------- search classes

def _sequences(h: int, vmax: int, order: str) -> Iterator[tuple]:
    """Domain-size sequences of length h, monotone per `order`."""
    if order == "const":
        for v in range(1, vmax + 1):
            yield (v,) * h
        return
    for seq in itertools.combinations_with_replacement(range(1, vmax + 1), h):
        yield seq if order == "up" else tuple(reversed(seq))


def grid_candidates(kind: str, hmax: int, vmax: int) -> list[tuple]:
    """Candidate frames of a search class in size-lexicographic order.

    Returns (label, frame, roots) triples; `roots` are the worlds that need
    to be tried as evaluation points (completeness argued per class in the
    docs).  Kinds: product, expanding, decreasing, expanding-linear, omega.
    """
    params = []
    if kind == "omega":
        for K in range(1, hmax + 1):
            for v in range(1, vmax + 1):
                params.append(((K + 2) * v, (K, v)))
    else:
        order = {"product": "const", "expanding": "up", "expanding-linear": "up",
                 "decreasing": "down"}.get(kind)
        if order is None:
            raise FrameError(f"unknown frame class {kind!r}")
        for h in range(1, hmax + 1):
            for seq in _sequences(h, vmax, order):
                params.append((sum(seq), seq))
    params.sort()
    out = []
    for _, p in params:
        if kind == "omega":
            K, v = p
            f = product(make_omega_plus_one_reversed(K), make_difference(v))
            out.append((f"omega K={K} v={v}", f, [(TOP_POINT, 0)]))
            continue
        seq = p
        hf = make_linear(len(seq))
        vert = make_linear if kind == "expanding-linear" else make_difference
        doms = {i: vert(d) for i, d in enumerate(seq)}
        if kind == "product":
            f = product(hf, doms[0])
        else:
            f = assemble(hf, doms, "decreasing" if kind == "decreasing" else "expanding")
        if kind == "decreasing":
            roots = [(0, v) for v in range(seq[0])]
        else:
            roots = [(0, 0)]
        out.append((f"{kind} {list(seq)}", f, roots))
    return out


def commuting_candidates(max_worlds: int) -> Iterator[tuple]:
    """All raw 2-frames on 1..max_worlds worlds satisfying commute and confluent."""
    for n in range(1, max_worlds + 1):
        pairs = [(a, b) for a in range(n) for b in range(n)]
        for bits in range(1 << (2 * len(pairs))):
            r0 = [pairs[k] for k in range(len(pairs)) if bits >> k & 1]
            r1 = [pairs[k] for k in range(len(pairs)) if bits >> (k + len(pairs)) & 1]
            tf = TwoFrame(range(n), r0, r1)
            if check_property(tf, "commute") and check_property(tf, "confluent"):
                yield (f"raw n={n} #{bits}", tf, list(range(n)))
