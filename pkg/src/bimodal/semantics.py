"""Truth evaluation, frame validity and bounded satisfiability search."""

from __future__ import annotations

import itertools
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .formula import And, Bot, Dia0, Dia1, Formula, Neg, Top, Var, subformula_list, variables
from .frames import Frame, GridTwoFrame, TwoFrame, commuting_candidates, grid_candidates
from .sat import Solver, SolverBudget

__all__ = [
    "Model", "check", "naive_check", "satisfiable_in", "valid_in_frame", "truth_set",
    "SearchSpec", "SearchResult", "bounded_sat", "BudgetExceeded", "ground_and_solve",
    "random_valuation", "dump_model", "load_model", "ModelFormatError",
]


class BudgetExceeded(RuntimeError):
    pass


class Model:
    """A 2-frame plus a valuation; variables absent from it are empty."""

    def __init__(self, frame: TwoFrame, valuation: dict | None = None, root: Hashable = None):
        self.frame = frame
        val = {}
        for name, ws in (valuation or {}).items():
            ws = frozenset(ws)
            for w in ws:
                if w not in frame.index:
                    raise ValueError(f"valuation of {name!r} mentions unknown world {w!r}")
            val[name] = ws
        self.valuation = val
        if root is not None and root not in frame.index:
            raise ValueError(f"unknown root {root!r}")
        self.root = root
        self._masks: dict = {}

    def var_mask(self, name: str) -> int:
        idx = self.frame.index
        m = 0
        for w in self.valuation.get(name, ()):
            m |= 1 << idx[w]
        return m

    def with_valuation(self, valuation: dict, root=None) -> "Model":
        return Model(self.frame, valuation, self.root if root is None else root)

    def __repr__(self):
        return f"Model({self.frame!r}, vars={sorted(self.valuation)})"


def _labels(m: Model, phi: Formula) -> int:
    masks = m._masks
    if phi in masks:
        return masks[phi]
    fr = m.frame
    n = len(fr.worlds)
    full = (1 << n) - 1
    s0, s1 = fr.succ_mask
    for s in subformula_list(phi):
        if s in masks:
            continue
        if isinstance(s, Var):
            r = m.var_mask(s.name)
        elif isinstance(s, Top):
            r = full
        elif isinstance(s, Bot):
            r = 0
        elif isinstance(s, Neg):
            r = full & ~masks[s.child]
        elif isinstance(s, And):
            r = masks[s.left] & masks[s.right]
        else:
            succ = s0 if isinstance(s, Dia0) else s1
            c = masks[s.child]
            r = 0
            if c:
                for i in range(n):
                    if succ[i] & c:
                        r |= 1 << i
        masks[s] = r
    return masks[phi]


def truth_set(m: Model, phi: Formula) -> frozenset:
    mask = _labels(m, phi)
    return frozenset(w for i, w in enumerate(m.frame.worlds) if mask >> i & 1)


def check(m: Model, w, phi: Formula) -> bool:
    """The inductive truth relation, via memoised labelling."""
    if w not in m.frame.index:
        raise ValueError(f"unknown world {w!r}")
    return bool(_labels(m, phi) >> m.frame.index[w] & 1)


def naive_check(m: Model, w, phi: Formula) -> bool:
    """Direct recursive evaluation without memoisation (test oracle)."""
    if isinstance(phi, Var):
        return w in m.valuation.get(phi.name, ())
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Neg):
        return not naive_check(m, w, phi.child)
    if isinstance(phi, And):
        return naive_check(m, w, phi.left) and naive_check(m, w, phi.right)
    rel = m.frame.rel0 if isinstance(phi, Dia0) else m.frame.rel1
    return any(naive_check(m, v, phi.child) for (u, v) in rel if u == w)


def satisfiable_in(m: Model, phi: Formula):
    """Least world (carrier order) where phi holds, or None."""
    mask = _labels(m, phi)
    for i, w in enumerate(m.frame.worlds):
        if mask >> i & 1:
            return w
    return None


def valid_in_frame(tf: TwoFrame, phi: Formula, budget: int = 1 << 20) -> bool:
    """True iff phi holds everywhere under every valuation of its variables."""
    names = sorted(set(variables(phi)))
    n = len(tf.worlds)
    total_bits = n * len(names)
    if (1 << total_bits) > budget:
        raise BudgetExceeded(f"2^{total_bits} valuations exceed the budget {budget}")
    full = (1 << n) - 1
    for bits in range(1 << total_bits):
        val = {}
        for k, name in enumerate(names):
            chunk = (bits >> (k * n)) & full
            val[name] = [tf.worlds[i] for i in range(n) if chunk >> i & 1]
        if _labels(Model(tf, val), phi) != full:
            return False
    return True


# ---------------------------------------------------------------- grounding

class _Grounder:
    """Tseitin encoding of phi over a fixed frame, with constant folding."""

    def __init__(self, frame: TwoFrame, solver: Solver):
        self.f = frame
        self.s = solver
        self.memo: dict = {}
        self.gates: dict = {}
        self.atoms: dict = {}

    def atom(self, name, i):
        key = (name, i)
        v = self.atoms.get(key)
        if v is None:
            v = self.s.new_var()
            self.atoms[key] = v
        return v

    def lit(self, phi: Formula, i: int):
        # iterative post-order to stay clear of the recursion limit
        memo = self.memo
        stack = [(phi, i, False)]
        while stack:
            node, w, ready = stack.pop()
            if (node, w) in memo:
                continue
            if not ready:
                stack.append((node, w, True))
                for c, cw in self._deps(node, w):
                    if (c, cw) not in memo:
                        stack.append((c, cw, False))
                continue
            memo[(node, w)] = self._make(node, w)
        return memo[(phi, i)]

    def _deps(self, node, w):
        if isinstance(node, Neg):
            return [(node.child, w)]
        if isinstance(node, And):
            return [(node.right, w), (node.left, w)]
        if isinstance(node, (Dia0, Dia1)):
            succ = self.f.succ_mask[0 if isinstance(node, Dia0) else 1][w]
            out, j = [], 0
            while succ:
                if succ & 1:
                    out.append((node.child, j))
                succ >>= 1
                j += 1
            return out
        return []

    def _make(self, node, w):
        memo = self.memo
        if isinstance(node, Var):
            return self.atom(node.name, w)
        if isinstance(node, Top):
            return True
        if isinstance(node, Bot):
            return False
        if isinstance(node, Neg):
            c = memo[(node.child, w)]
            return (not c) if isinstance(c, bool) else -c
        if isinstance(node, And):
            a, b = memo[(node.left, w)], memo[(node.right, w)]
            if a is False or b is False:
                return False
            if a is True:
                return b
            if b is True:
                return a
            if a == b:
                return a
            if a == -b:
                return False
            key = ("and",) + tuple(sorted((a, b)))
            g = self.gates.get(key)
            if g is None:
                g = self.s.new_var()
                self.s.add_clause([-g, a])
                self.s.add_clause([-g, b])
                self.s.add_clause([g, -a, -b])
                self.gates[key] = g
            return g
        lits = set()
        for c, cw in self._deps(node, w):
            l = memo[(c, cw)]
            if l is True:
                return True
            if l is not False:
                lits.add(l)
        if not lits:
            return False
        if len(lits) == 1:
            return next(iter(lits))
        key = ("or",) + tuple(sorted(lits))
        g = self.gates.get(key)
        if g is None:
            g = self.s.new_var()
            self.s.add_clause([-g] + sorted(lits))
            for l in lits:
                self.s.add_clause([g, -l])
            self.gates[key] = g
        return g


def ground_and_solve(frame: TwoFrame, phi: Formula, roots: list, max_conflicts=None, deadline=None):
    """Search a valuation making phi true at one of `roots`; None if none exists."""
    s = Solver()
    g = _Grounder(frame, s)
    root_lits = []
    for r in roots:
        l = g.lit(phi, frame.index[r])
        if l is True:
            return Model(frame, {}, r), r
        if l is not False:
            root_lits.append((r, l))
    if not root_lits:
        return None
    s.add_clause([l for _, l in root_lits])
    order = sorted(g.atoms.values())
    if not s.solve(max_conflicts=max_conflicts, deadline=deadline, decision_order=order):
        return None
    assign = s.model()
    val: dict = {}
    for (name, i), v in g.atoms.items():
        if assign[v]:
            val.setdefault(name, set()).add(frame.worlds[i])
    for name in variables(phi):
        val.setdefault(name, set())
    model = Model(frame, val)
    for r, _ in root_lits:
        if check(model, r, phi):
            model.root = r
            return model, r
    raise AssertionError("solver model does not satisfy the formula")


# ---------------------------------------------------------------- search

CLASSES = ("product", "expanding", "decreasing", "expanding-linear", "omega", "commuting")


@dataclass
class SearchSpec:
    """What to search: frame class, size bounds, formula and budget.

    hmax/vmax bound the horizontal length and vertical domain size (for the
    omega class hmax is the truncation K); for the raw commuting class
    max_worlds bounds the carrier.
    """

    formula: Formula
    frame_class: str = "product"
    hmax: int = 2
    vmax: int = 2
    max_worlds: int = 2
    max_candidates: int | None = None
    max_seconds: float | None = None
    max_conflicts: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.frame_class not in CLASSES:
            raise ValueError(f"unknown frame class {self.frame_class!r}")
        if min(self.hmax, self.vmax, self.max_worlds) < 1:
            raise ValueError("bounds must be >= 1")
        for b in (self.max_candidates, self.max_seconds, self.max_conflicts):
            if b is not None and b <= 0:
                raise ValueError("budgets must be positive")

    def candidates(self):
        if self.frame_class == "commuting":
            return list(commuting_candidates(self.max_worlds))
        return grid_candidates(self.frame_class, self.hmax, self.vmax)

    def bounds_text(self) -> str:
        if self.frame_class == "commuting":
            return f"class=commuting max_worlds={self.max_worlds}"
        return f"class={self.frame_class} hmax={self.hmax} vmax={self.vmax}"


@dataclass
class SearchResult:
    status: str  # found | exhausted | budget
    spec_bounds: str
    candidates_tried: int
    elapsed: float
    model: Model | None = None
    world: Hashable = None
    frame_label: str = ""
    note: str = ""

    @property
    def found(self) -> bool:
        return self.status == "found"

    def report(self, timestamps: bool = True) -> str:
        lines = [f"status: {self.status}", f"bounds: {self.spec_bounds}",
                 f"candidates tried: {self.candidates_tried}"]
        if timestamps:
            lines.append(f"elapsed: {self.elapsed:.3f}s")
        if self.found:
            lines.append(f"frame: {self.frame_label}")
            lines.append(f"world: {self.world!r}")
        elif self.status == "exhausted":
            lines.append("no model within bounds")
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)


def _solve_candidate(args):
    frame, phi, roots, max_conflicts, deadline = args
    try:
        return ("ok", ground_and_solve(frame, phi, roots, max_conflicts, deadline))
    except SolverBudget as e:
        return ("budget", str(e))


def bounded_sat(spec: SearchSpec) -> SearchResult:
    """First model of spec.formula over the class's candidates, in order."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))
    t0 = time.monotonic()
    deadline = t0 + spec.max_seconds if spec.max_seconds else None
    cands = spec.candidates()
    if spec.max_candidates is not None and len(cands) > spec.max_candidates:
        cands_run, truncated = cands[: spec.max_candidates], True
    else:
        cands_run, truncated = cands, False
    tried = 0

    def done(status, res=None, label="", note=""):
        model, world = res if res else (None, None)
        return SearchResult(status, spec.bounds_text(), tried, time.monotonic() - t0,
                            model, world, label, note)

    jobs = [(fr, spec.formula, roots, spec.max_conflicts, deadline) for _, fr, roots in cands_run]
    if spec.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as ex:
            futures = [ex.submit(_solve_candidate, j) for j in jobs]
            for k, fut in enumerate(futures):
                status, res = fut.result()
                tried = k + 1
                if status == "budget":
                    for f in futures[k + 1:]:
                        f.cancel()
                    return done("budget", note=res)
                if res is not None:
                    for f in futures[k + 1:]:
                        f.cancel()
                    return done("found", res, cands_run[k][0])
    else:
        for k, j in enumerate(jobs):
            if deadline is not None and time.monotonic() > deadline:
                return done("budget", note="time budget exhausted")
            status, res = _solve_candidate(j)
            tried = k + 1
            if status == "budget":
                return done("budget", note=res)
            if res is not None:
                return done("found", res, cands_run[k][0])
    if truncated:
        return done("budget", note=f"candidate budget {spec.max_candidates} reached")
    return done("exhausted")


def random_valuation(rng, frame: TwoFrame, names, density: float = 0.4) -> dict:
    """Independent coin per (variable, world); worlds in carrier order."""
    return {p: {w for w in frame.worlds if rng.random() < density} for p in names}


# ---------------------------------------------------------------- text format
#
#   worlds: id id ...        carrier in order
#   r0: id id                one edge per line (likewise r1)
#   val NAME: id id ...
#   root: id                 optional
#   coord id = (h, v)        world id becomes the pair (h, v)
#   grid: TAG                rebuild a GridTwoFrame (needs coord lines)
#   horizontal: h h ...      its horizontal carrier, with `hr: h h` edges
#   param KEY: VALUE         free-form metadata, returned separately
#
# Atoms are integers or [A-Za-z_][A-Za-z0-9_']* tokens; '#' starts a comment.

class ModelFormatError(ValueError):
    pass


_ATOM = re.compile(r"-?\d+|[A-Za-z_][A-Za-z0-9_']*")


def _atom_text(a) -> str:
    text = str(a)
    if isinstance(a, bool) or not isinstance(a, (int, str)) or not _ATOM.fullmatch(text):
        raise ModelFormatError(f"world coordinate {a!r} has no text form")
    return text


def _atom(tok: str):
    if not _ATOM.fullmatch(tok):
        raise ModelFormatError(f"bad identifier {tok!r}")
    return int(tok) if tok.lstrip("-").isdigit() else tok


def dump_model(m: Model, meta: dict | None = None) -> str:
    fr = m.frame
    pairs = all(isinstance(w, tuple) and len(w) == 2 for w in fr.worlds)
    if pairs:
        name = {w: f"{_atom_text(w[0])}_{_atom_text(w[1])}" for w in fr.worlds}
        if len(set(name.values())) != len(name):
            raise ModelFormatError("world names collide")
    else:
        name = {w: _atom_text(w) for w in fr.worlds}
    order = fr.index
    key = lambda e: (order[e[0]], order[e[1]])
    out = []
    for k, v in (meta or {}).items():
        out.append(f"param {k}: {v}")
    if isinstance(fr, GridTwoFrame):
        out.append(f"grid: {fr.tag}")
        hz = fr.horizontal
        out.append("horizontal: " + " ".join(_atom_text(h) for h in hz.worlds))
        out += [f"hr: {_atom_text(a)} {_atom_text(b)}"
                for a, b in sorted(hz.rel, key=lambda e: (hz.index[e[0]], hz.index[e[1]]))]
    out.append("worlds: " + " ".join(name[w] for w in fr.worlds))
    if pairs:
        out += [f"coord {name[w]} = ({_atom_text(w[0])}, {_atom_text(w[1])})" for w in fr.worlds]
    if m.root is not None:
        out.append(f"root: {name[m.root]}")
    out += [f"r0: {name[a]} {name[b]}" for a, b in sorted(fr.rel0, key=key)]
    out += [f"r1: {name[a]} {name[b]}" for a, b in sorted(fr.rel1, key=key)]
    for p in sorted(m.valuation):
        ws = sorted(m.valuation[p], key=order.get)
        out.append(f"val {p}: " + " ".join(name[w] for w in ws))
    return "\n".join(out) + "\n"


_COORD = re.compile(r"coord\s+(\S+)\s*=\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")


def load_model(text: str) -> tuple[Model, dict]:
    """Parse the text format; returns (model, params)."""
    meta, coords, val = {}, {}, {}
    names, r0, r1, hr = None, [], [], []
    root = tag = horizontal = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("param "):
                k, _, v = line[6:].partition(":")
                meta[k.strip()] = v.strip()
            elif line.startswith("coord "):
                mt = _COORD.match(line)
                if not mt:
                    raise ModelFormatError("malformed coord line")
                coords[mt.group(1)] = (_atom(mt.group(2)), _atom(mt.group(3)))
            elif line.startswith("val "):
                k, _, v = line[4:].partition(":")
                val[k.strip()] = v.split()
            else:
                head, sep, rest = line.partition(":")
                if not sep:
                    raise ModelFormatError("expected 'key: value'")
                head, toks = head.strip(), rest.split()
                if head == "worlds":
                    names = toks
                elif head in ("r0", "r1", "hr"):
                    if len(toks) != 2:
                        raise ModelFormatError(f"{head} needs exactly two ids")
                    {"r0": r0, "r1": r1, "hr": hr}[head].append(tuple(toks))
                elif head == "root":
                    root = rest.strip()
                elif head == "grid":
                    tag = rest.strip()
                elif head == "horizontal":
                    horizontal = [_atom(t) for t in toks]
                else:
                    raise ModelFormatError(f"unknown key {head!r}")
        except ModelFormatError as e:
            raise ModelFormatError(f"line {lineno}: {e}") from None
    if names is None:
        raise ModelFormatError("missing 'worlds:' line")
    if coords:
        missing = [n for n in names if n not in coords]
        if missing:
            raise ModelFormatError(f"worlds without coord: {missing[:3]}")
        wid = {n: coords[n] for n in names}
    else:
        wid = {n: _atom(n) for n in names}

    def look(n):
        if n not in wid:
            raise ModelFormatError(f"unknown world {n!r}")
        return wid[n]

    worlds = [wid[n] for n in names]
    e0 = [(look(a), look(b)) for a, b in r0]
    e1 = [(look(a), look(b)) for a, b in r1]
    if tag is not None:
        if not coords or horizontal is None:
            raise ModelFormatError("grid frames need coord and horizontal lines")
        hz = Frame(horizontal, [(_atom(a), _atom(b)) for a, b in hr])
        doms = {}
        for h in horizontal:
            col = [w[1] for w in worlds if w[0] == h]
            doms[h] = Frame(col, [(a[1], b[1]) for a, b in e1 if a[0] == h])
        fr = GridTwoFrame(hz, doms, tag)
        if set(fr.worlds) != set(worlds) or fr.rel0 != frozenset(e0) or fr.rel1 != frozenset(e1):
            raise ModelFormatError("edges do not match the declared grid")
    else:
        fr = TwoFrame(worlds, e0, e1)
    valuation = {p: [look(n) for n in ws] for p, ws in val.items()}
    return Model(fr, valuation, None if root is None else look(root)), meta
