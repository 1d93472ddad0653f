"""One-variable first-order temporal logic with a difference quantifier.

Formulas speak about a single implicit variable x over a finite linear
timeline whose instants carry finite domains.  The map `star` sends the
desugared syntax bijectively onto bimodal formulas (P(x) to P, F> to <0>,
E!= x to <1>), and `dagger` sends a model to the grid model whose point
(t, a) satisfies P exactly when a is in P at instant t.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache

from . import formula as fm
from .formula import Formula, ParseError, Parser
from .frames import Frame, GridTwoFrame, check_property, make_difference, make_linear, product
from .semantics import Model

__all__ = [
    "FoltlFormula", "Pred", "FTop", "FBot", "FNeg", "FAnd", "DiaF", "ExistsNe",
    "f_or", "f_imp", "f_iff", "box_f", "exists", "exists_ge2", "exists_eq1", "forall_ne",
    "parse_foltl", "foltl_text", "foltl_depth", "predicates",
    "FoltlModel", "FoltlError", "foltl_check", "foltl_truth",
    "star", "unstar", "dagger", "undagger", "random_foltl", "random_model", "MODES",
]

MODES = ("constant", "decreasing", "expanding", "free")


class FoltlError(ValueError):
    pass


# ---------------------------------------------------------------- syntax

class FoltlFormula:
    """Base of the FOLTL node classes (frozen dataclasses, value equality)."""

    def children(self) -> tuple:
        return ()

    def __str__(self):
        return foltl_text(self)


@dataclass(frozen=True)
class Pred(FoltlFormula):
    name: str


@dataclass(frozen=True)
class FTop(FoltlFormula):
    pass


@dataclass(frozen=True)
class FBot(FoltlFormula):
    pass


@dataclass(frozen=True)
class FNeg(FoltlFormula):
    child: FoltlFormula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class FAnd(FoltlFormula):
    left: FoltlFormula
    right: FoltlFormula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class DiaF(FoltlFormula):
    """Some strictly later instant, with x still in its domain."""
    child: FoltlFormula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class ExistsNe(FoltlFormula):
    """Some other element of the current domain."""
    child: FoltlFormula

    def children(self):
        return (self.child,)


# Sugar mirrors the bimodal builders shape for shape, so star() of a sugared
# formula is exactly the bimodal sugar (e.g. [F] E=1 x Dog(x) -> [0] <1>=1 Dog).

def f_or(a, b):
    return FNeg(FAnd(FNeg(a), FNeg(b)))


def f_imp(a, b):
    return FNeg(FAnd(a, FNeg(b)))


def f_iff(a, b):
    return FAnd(f_imp(a, b), f_imp(b, a))


def box_f(a):
    return FNeg(DiaF(FNeg(a)))


def exists(a):
    return f_or(a, ExistsNe(a))


def forall_ne(a):
    return FNeg(ExistsNe(FNeg(a)))


def exists_ge2(a):
    # a witness b != x with a(b), and some c != b with a(c)
    return ExistsNe(FAnd(a, ExistsNe(a)))


def exists_eq1(a):
    return exists(FAnd(a, forall_ne(FNeg(a))))


def foltl_depth(phi: FoltlFormula) -> int:
    if isinstance(phi, (DiaF, ExistsNe)):
        return 1 + foltl_depth(phi.child)
    return max((foltl_depth(c) for c in phi.children()), default=0)


def predicates(phi: FoltlFormula) -> list[str]:
    out, stack = set(), [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Pred):
            out.add(f.name)
        stack.extend(f.children())
    return sorted(out)


_EXTRA = re.compile(r"F>|\[F\]|E!=|E>=2|E=1")


class FoltlParser(Parser):
    """Same precedence as the bimodal grammar, FOLTL connectives and atoms."""

    def __init__(self, text: str):
        super().__init__(text, extra=_EXTRA)

    def parse_iff(self):
        left = self.parse_imp()
        while self.peek()[1] == "<->":
            self.take()
            left = f_iff(left, self.parse_imp())
        return left

    def parse_imp(self):
        left = self.parse_or()
        if self.peek()[1] == "->":
            self.take()
            return f_imp(left, self.parse_imp())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[1] == "|":
            self.take()
            left = f_or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.peek()[1] == "&":
            self.take()
            left = FAnd(left, self.parse_unary())
        return left

    def _bound_var(self):
        t = self.peek()
        if t[0] != "ident" or t[1] != "x":
            self.fail("expected the variable x")
        self.take()

    def parse_unary(self):
        kind, val, _, _ = self.peek()
        if kind == "op":
            if val in ("~", "F>", "[F]"):
                self.take()
                wrap = {"~": FNeg, "F>": DiaF, "[F]": box_f}[val]
                return wrap(self.parse_unary())
            if val in ("E!=", "E>=2", "E=1"):
                self.take()
                self._bound_var()
                wrap = {"E!=": ExistsNe, "E>=2": exists_ge2, "E=1": exists_eq1}[val]
                return wrap(self.parse_unary())
            if val in ("<0>", "<1>", "[0]", "[1]", "<0>+", "<1>+", "[0]+", "[1]+", "<1>=1"):
                self.fail("bimodal operator in a FOLTL formula")
        if kind == "ident" and val == "E":
            self.take()
            self._bound_var()
            return exists(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        kind, val, _, _ = self.peek()
        if kind == "op" and val == "(":
            self.take()
            phi = self.parse_iff()
            self.expect(")")
            return phi
        if kind == "ident":
            self.take()
            if val == "true":
                return FTop()
            if val == "false":
                return FBot()
            if val == "x":
                self.fail("x is only allowed as an argument")
            self.expect("(")
            self._bound_var()
            self.expect(")")
            return Pred(val)
        self.fail("expected a formula")


def parse_foltl(text: str) -> FoltlFormula:
    return FoltlParser(text).parse_all()


def foltl_text(phi: FoltlFormula) -> str:
    """Concrete syntax; parse_foltl(foltl_text(phi)) == phi.

    Printing goes through star(), reusing the bimodal shape matchers, since the
    sugar on both sides is built shape for shape.
    """
    U = fm._UNARY

    @lru_cache(maxsize=None)
    def go(f, level):
        text, own = render(f)
        return f"({text})" if own < level else text

    def render(f):
        if isinstance(f, fm.Var):
            return f"{f.name}(x)", 6
        if f is fm.TOP:
            return "true", 6
        if f is fm.BOT:
            return "false", 6
        m = fm._match_dia_eq1(f)
        if m is not None:
            return "E=1 x " + go(m, U), U
        m = fm._match_dia_plus(f)
        if m is not None and m[0] == 1:
            return "E x " + go(m[1], U), U
        if isinstance(f, fm.Dia1) and isinstance(f.child, fm.And) \
                and f.child.right is fm.Dia1(f.child.left):
            return "E>=2 x " + go(f.child.left, U), U
        if isinstance(f, fm.And):
            m = fm._match_iff(f)
            if m is not None:
                return go(m[0], fm._IFF) + " <-> " + go(m[1], fm._IFF + 1), fm._IFF
        m = fm._match_box(f)
        if m is not None and m[0] == 0:
            return "[F] " + go(m[1], U), U
        m = fm._match_or(f)
        if m is not None:
            return go(m[0], fm._OR) + " | " + go(m[1], fm._OR + 1), fm._OR
        m = fm._match_imp(f)
        if m is not None:
            return go(m[0], fm._IMP + 1) + " -> " + go(m[1], fm._IMP), fm._IMP
        if isinstance(f, fm.Neg):
            return "~" + go(f.child, U), U
        if isinstance(f, fm.Dia0):
            return "F> " + go(f.child, U), U
        if isinstance(f, fm.Dia1):
            return "E!= x " + go(f.child, U), U
        if isinstance(f, fm.And):
            return go(f.left, fm._AND) + " & " + go(f.right, fm._AND + 1), fm._AND
        raise TypeError(f)

    return go(star(phi), 0)


# ---------------------------------------------------------------- star

def star(phi: FoltlFormula) -> Formula:
    if isinstance(phi, Pred):
        return fm.Var(phi.name)
    if isinstance(phi, FTop):
        return fm.TOP
    if isinstance(phi, FBot):
        return fm.BOT
    if isinstance(phi, FNeg):
        return fm.Neg(star(phi.child))
    if isinstance(phi, FAnd):
        return fm.And(star(phi.left), star(phi.right))
    if isinstance(phi, DiaF):
        return fm.Dia0(star(phi.child))
    if isinstance(phi, ExistsNe):
        return fm.Dia1(star(phi.child))
    raise TypeError(f"not a FOLTL formula: {phi!r}")


def unstar(phi: Formula) -> FoltlFormula:
    if isinstance(phi, fm.Var):
        return Pred(phi.name)
    if phi is fm.TOP:
        return FTop()
    if phi is fm.BOT:
        return FBot()
    if isinstance(phi, fm.Neg):
        return FNeg(unstar(phi.child))
    if isinstance(phi, fm.And):
        return FAnd(unstar(phi.left), unstar(phi.right))
    if isinstance(phi, fm.Dia0):
        return DiaF(unstar(phi.child))
    if isinstance(phi, fm.Dia1):
        return ExistsNe(unstar(phi.child))
    raise TypeError(f"not a bimodal formula: {phi!r}")


# ---------------------------------------------------------------- models

@dataclass(frozen=True, eq=False)
class FoltlModel:
    timeline: Frame
    domains: dict
    interp: dict = field(default_factory=dict)
    mode: str = "constant"

    def __post_init__(self):
        if self.mode not in MODES:
            raise FoltlError(f"unknown domain mode {self.mode!r}")
        if not check_property(self.timeline, "linear-order"):
            raise FoltlError("timeline must be a finite strict linear order")
        doms = {}
        for t in self.timeline.worlds:
            if t not in self.domains or not self.domains[t]:
                raise FoltlError(f"instant {t!r} needs a non-empty domain")
            doms[t] = tuple(self.domains[t])
        object.__setattr__(self, "domains", doms)
        interp = {}
        for (t, p), ext in self.interp.items():
            ext = frozenset(ext)
            if not ext <= set(doms[t]):
                raise FoltlError(f"{p}^I({t!r}) leaves the domain")
            if ext:
                interp[(t, p)] = ext
        object.__setattr__(self, "interp", interp)
        for t, u in self.timeline.rel:
            a, b = set(doms[t]), set(doms[u])
            bad = {"constant": a != b, "decreasing": not a >= b,
                   "expanding": not a <= b}.get(self.mode, False)
            if bad:
                raise FoltlError(f"{self.mode} inclusion fails between {t!r} and {u!r}")

    def later(self, t) -> list:
        return self.timeline.succ[t]

    def holds(self, t, p: str, a) -> bool:
        return a in self.interp.get((t, p), ())

    def predicates(self) -> list[str]:
        return sorted({p for _, p in self.interp})

    def __eq__(self, other):
        return (isinstance(other, FoltlModel) and self.mode == other.mode
                and self.timeline == other.timeline
                and {t: set(d) for t, d in self.domains.items()}
                == {t: set(d) for t, d in other.domains.items()}
                and self.interp == other.interp)

    def __hash__(self):
        return hash((self.mode, self.timeline))

    def __repr__(self):
        return (f"FoltlModel({self.mode}, instants={list(self.timeline.worlds)}, "
                f"domains={ {t: list(d) for t, d in self.domains.items()} })")


def foltl_check(m: FoltlModel, t, a, phi: FoltlFormula) -> bool:
    """Truth of phi at instant t under the assignment x := a."""
    if t not in m.domains:
        raise FoltlError(f"unknown instant {t!r}")
    if a not in m.domains[t]:
        raise FoltlError(f"{a!r} is not in the domain of instant {t!r}")

    @lru_cache(maxsize=None)
    def ev(t, a, f):
        if isinstance(f, Pred):
            return m.holds(t, f.name, a)
        if isinstance(f, FTop):
            return True
        if isinstance(f, FBot):
            return False
        if isinstance(f, FNeg):
            return not ev(t, a, f.child)
        if isinstance(f, FAnd):
            return ev(t, a, f.left) and ev(t, a, f.right)
        if isinstance(f, DiaF):
            return any(a in m.domains[u] and ev(u, a, f.child) for u in m.later(t))
        if isinstance(f, ExistsNe):
            return any(b != a and ev(t, b, f.child) for b in m.domains[t])
        raise TypeError(f"not a FOLTL formula: {f!r}")

    return ev(t, a, phi)


def foltl_truth(m: FoltlModel, phi: FoltlFormula) -> frozenset:
    return frozenset((t, a) for t in m.timeline.worlds for a in m.domains[t]
                     if foltl_check(m, t, a, phi))


# ---------------------------------------------------------------- dagger

def _vertical(elems) -> Frame:
    return make_difference(len(elems), list(elems))


def dagger(m: FoltlModel) -> Model:
    """Grid model over (instant, element) points; the frame tag follows the mode."""
    if m.mode == "constant":
        first = m.domains[m.timeline.worlds[0]]
        frame = product(m.timeline, _vertical(first))
    else:
        # Vertical frames share element order so inclusions are subframes.
        order = {}
        for t in m.timeline.worlds:
            for a in m.domains[t]:
                order.setdefault(a, len(order))
        doms = {t: _vertical(sorted(m.domains[t], key=order.get)) for t in m.timeline.worlds}
        frame = GridTwoFrame(m.timeline, doms, m.mode)
    val: dict = {}
    for (t, p), ext in m.interp.items():
        val.setdefault(p, set()).update((t, a) for a in ext)
    return Model(frame, val)


def undagger(model: Model) -> FoltlModel:
    frame = model.frame
    if not isinstance(frame, GridTwoFrame):
        raise FoltlError("undagger needs a grid model")
    for h in frame.horizontal.worlds:
        if not check_property(frame.domains[h], "symmetric") or \
                len(frame.domains[h].rel) != len(frame.domains[h].worlds) * (len(frame.domains[h].worlds) - 1):
            raise FoltlError("vertical frames must be difference frames")
    mode = "constant" if frame.tag == "product" else frame.tag
    domains = {h: frame.domains[h].worlds for h in frame.horizontal.worlds}
    interp: dict = {}
    for p, ws in model.valuation.items():
        for (t, a) in ws:
            interp.setdefault((t, p), set()).add(a)
    return FoltlModel(frame.horizontal, domains, interp, mode)


# ---------------------------------------------------------------- random

def random_foltl(rng: random.Random, preds=("P", "Q"), depth: int = 3) -> FoltlFormula:
    """Random desugared formula with modal depth at most `depth`."""
    def go(d):
        r = rng.random()
        if d == 0 or r < 0.2:
            return Pred(rng.choice(preds)) if rng.random() < 0.9 else rng.choice([FTop(), FBot()])
        if r < 0.35:
            return FNeg(go(d))
        if r < 0.55:
            return FAnd(go(d - 1), go(d - 1))
        if r < 0.75:
            return DiaF(go(d - 1))
        return ExistsNe(go(d - 1))
    return go(depth)


def random_model(rng: random.Random, mode: str = "constant", max_instants: int = 4,
                 max_elems: int = 4, preds=("P", "Q"), density: float = 0.4) -> FoltlModel:
    n = rng.randint(1, max_instants)
    k = rng.randint(1, max_elems)
    elems = [f"e{i}" for i in range(k)]
    timeline = make_linear(n)
    if mode == "constant":
        doms = {t: list(elems) for t in range(n)}
    elif mode in ("expanding", "decreasing"):
        # nested chain of non-empty prefixes
        sizes = sorted(rng.randint(1, k) for _ in range(n))
        if mode == "decreasing":
            sizes.reverse()
        doms = {t: elems[:sizes[t]] for t in range(n)}
    else:
        doms = {t: [e for e in elems if rng.random() < 0.6] or [rng.choice(elems)]
                for t in range(n)}
    interp = {(t, p): {a for a in doms[t] if rng.random() < density}
              for t in range(n) for p in preds}
    return FoltlModel(timeline, doms, interp, mode)
