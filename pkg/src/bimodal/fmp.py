"""Finite-model closure: shrink the vertical carriers of a grid model.

cl_n(X) saturates X with vertical witnesses at column n: whenever x is in the
set and <1>psi holds at (n, x) for a subformula psi, some other member must
satisfy psi there.  Chaining cl over the columns in timeline order and
restricting the model keeps every subformula's truth value at every
surviving point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import Dia1, Formula, subformula_list
from .frames import GridTwoFrame, check_property
from .semantics import Model, truth_set

__all__ = ["FmpError", "ClosureTrace", "closure_step", "shrink", "dia1_demands"]


class FmpError(ValueError):
    pass


@dataclass
class StepRecord:
    instant: object
    before: int
    after: int
    added: list  # (demanding world, subformula text, witness)


@dataclass
class ClosureTrace:
    mode: str
    subformulas: int
    sets: dict = field(default_factory=dict)  # instant -> tuple of vertical ids
    steps: list = field(default_factory=list)

    @property
    def bound_per_step(self) -> int:
        return 2 * self.subformulas

    def final_size(self) -> int:
        return max((len(s) for s in self.sets.values()), default=0)

    def dump(self) -> str:
        lines = [f"mode: {self.mode}", f"|sub phi| = {self.subformulas}",
                 f"per-step bound: |X| + {self.bound_per_step}"]
        for st in self.steps:
            lines.append(f"cl_{st.instant}: {st.before} -> {st.after} "
                         f"(bound {st.before + self.bound_per_step})")
            for x, psi, y in st.added:
                lines.append(f"  witness {y!r} for <1>{psi} at {x!r}")
            lines.append(f"  W'_{st.instant} = {list(self.sets[st.instant])!r}")
        return "\n".join(lines) + "\n"


def dia1_demands(phi: Formula) -> list[Formula]:
    """Subformulas psi with <1>psi in sub phi, children first."""
    return [s.child for s in subformula_list(phi) if isinstance(s, Dia1)]


def _grid(m: Model) -> GridTwoFrame:
    fr = m.frame
    if not isinstance(fr, GridTwoFrame) or fr.tag not in ("product", "expanding"):
        raise FmpError("shrink needs a product or expanding grid model")
    for h in fr.horizontal.worlds:
        d = fr.domains[h]
        k = len(d.worlds)
        if len(d.rel) != k * (k - 1) or any(a == b for a, b in d.rel):
            raise FmpError(f"vertical frame at {h!r} is not a difference frame")
    if not check_property(fr.horizontal, "linear-order"):
        raise FmpError("horizontal frame must be a finite linear order")
    return fr


def closure_step(m: Model, n, X, phi: Formula, record: list | None = None) -> frozenset:
    """Least-witness saturation of X at column n."""
    fr = _grid(m)
    column = fr.domains[n].worlds
    colset = set(column)
    X = set(X)
    if not X <= colset:
        raise FmpError(f"X is not inside the vertical carrier at {n!r}")
    demands = dia1_demands(phi)
    holds = {psi: {v for (h, v) in truth_set(m, psi) if h == n} for psi in demands}
    dholds = {psi: {v for (h, v) in truth_set(m, Dia1(psi)) if h == n} for psi in demands}
    order = {v: i for i, v in enumerate(column)}
    Y = set(X)
    changed = True
    while changed:
        changed = False
        for x in sorted(Y, key=order.get):
            for psi in demands:
                if x not in dholds[psi]:
                    continue
                if any(y != x for y in holds[psi] & Y):
                    continue
                fresh = [y for y in column if y != x and y in holds[psi] and y not in Y]
                if not fresh:
                    raise FmpError(f"inconsistent host: <1>{psi} at ({n!r},{x!r}) has no witness")
                Y.add(fresh[0])
                if record is not None:
                    record.append((x, str(psi), fresh[0]))
                changed = True
    bound = len(X) + 2 * len(subformula_list(phi))
    assert len(Y) <= bound, f"closure size {len(Y)} exceeds {bound}"
    return frozenset(Y)


def _timeline(fr: GridTwoFrame) -> list:
    # finite strict linear order: earlier instants have more successors
    return sorted(fr.horizontal.worlds, key=lambda h: -len(fr.horizontal.succ[h]))


def shrink(m: Model, phi: Formula, root=None, check: bool = True):
    """Restrict m to closed vertical carriers; returns (model, trace).

    Product models keep one carrier W'_{T-1} for every column; expanding
    models keep the per-column sets W'_n.  The carriers are seeded with the
    root's vertical coordinate at its column (and with the least element of
    the first column when the root lies later).
    """
    fr = _grid(m)
    root = m.root if root is None else root
    if root is None or root not in fr.index:
        raise FmpError("shrink needs a root world of the model")
    r_h, r_v = root
    times = _timeline(fr)
    trace = ClosureTrace(fr.tag, len(subformula_list(phi)))
    prev: frozenset = frozenset()
    for h in times:
        seed = set(prev)
        if h == r_h:
            seed.add(r_v)
        if not seed:
            seed.add(fr.domains[h].worlds[0])
        added: list = []
        cur = closure_step(m, h, seed, phi, added)
        trace.steps.append(StepRecord(h, len(seed), len(cur), added))
        order = {v: i for i, v in enumerate(fr.domains[h].worlds)}
        trace.sets[h] = tuple(sorted(cur, key=order.get))
        prev = cur
    if fr.tag == "product":
        keep = set(trace.sets[times[-1]])
        doms = {h: fr.domains[h].restrict(keep) for h in fr.horizontal.worlds}
    else:
        doms = {h: fr.domains[h].restrict(trace.sets[h]) for h in fr.horizontal.worlds}
    small = GridTwoFrame(fr.horizontal, doms, fr.tag)
    val = {p: {w for w in ws if w in small.index} for p, ws in m.valuation.items()}
    out = Model(small, val, root)
    if fr.tag == "product":
        limit = 1 + 2 * len(times) * trace.subformulas
        assert len(trace.sets[times[-1]]) <= limit, "vertical carrier exceeds 1 + 2T|sub phi|"
    if check:
        for s in subformula_list(phi):
            before = truth_set(m, s) & set(small.worlds)
            after = truth_set(out, s)
            assert before == after, f"truth of {s} changed on the shrunken model"
    return out, trace
