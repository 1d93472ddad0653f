"""Formula compilers: staircase grids, counter layers, machine encodings and
the syntactic translations between frame classes.

Every compiler returns a CompiledEncoding whose conjuncts carry stable labels;
witness verification reports per label.
"""

from __future__ import annotations

import ast
import hashlib
from dataclasses import dataclass, field

from .formula import (BOT, TOP, And, Bot, Dia0, Dia1, Formula, Neg, Top, Var,
                      VarDictionary, box, box_plus, box_upto, conj, dia,
                      dia_eq1, dia_plus, disj, iff, imp, modal_depth, neg,
                      parse, subformula_list, to_text, variables)
from .machines import CounterMachine, Op, dump_machine, reach_normalized

__all__ = [
    "CompiledEncoding", "TARGETS", "GRID_VARIANTS", "compile_grid",
    "compile_counter_layer", "compile_op_gadget", "compile_machine",
    "bullet_translate", "bdia0", "bbox0", "compile_interval", "relativize",
    "product_to_decreasing", "diff_to_linear", "dagger_translate",
    "dump_encoding", "load_encoding", "EncodingError",
]


class EncodingError(ValueError):
    pass


@dataclass
class CompiledEncoding:
    target: str
    conjuncts: list  # (label, Formula)
    dict: VarDictionary
    machine: CounterMachine | None = None
    params: dict = field(default_factory=dict)
    compiled_machine: CounterMachine | None = None  # machine the formula speaks about

    def __post_init__(self):
        labels = [l for l, _ in self.conjuncts]
        if len(set(labels)) != len(labels):
            raise EncodingError(f"duplicate conjunct labels in {labels}")

    @property
    def formula(self) -> Formula:
        return conj(f for _, f in self.conjuncts)

    @property
    def labels(self) -> list:
        return [l for l, _ in self.conjuncts]

    def __getitem__(self, label) -> Formula:
        for l, f in self.conjuncts:
            if l == label:
                return f
        raise KeyError(label)

    def v(self, role) -> Var:
        return self.dict.var(role)

    def __repr__(self):
        return f"CompiledEncoding({self.target}, {len(self.conjuncts)} conjuncts)"


# ---------------------------------------------------------------- helpers

def _bp(*ops):
    """Prefix builder: _bp('0+', '1')(phi) = [0]+ [1] phi."""
    def wrap(phi):
        for op in reversed(ops):
            i = int(op[0])
            phi = box_plus(i, phi) if op.endswith("+") else box(i, phi)
        return phi
    return wrap


def _dict(d: VarDictionary | None, avoid=()) -> VarDictionary:
    return d if d is not None else VarDictionary(avoid)


def _state_unique(d: VarDictionary, m: CounterMachine) -> Formula:
    """S <-> OR_{q in Q-H} (S_q & AND_{q' != q} ~S_q')."""
    S = d.var("S")
    alts = []
    for q in m.states:
        if q in m.halt:
            continue
        others = [neg(d.var(("S_q", q2))) for q2 in m.states if q2 != q]
        alts.append(conj([d.var(("S_q", q))] + others))
    return iff(S, disj(alts))


# ---------------------------------------------------------------- Tick macros

def bdia0(psi: Formula, tick: Formula) -> Formula:
    """The derived horizontal diamond built from Tick blocks."""
    inner = disj(psi, Dia0(psi))
    return disj(tick & Dia0(neg(tick) & inner), neg(tick) & Dia0(tick & inner))


def bbox0(psi: Formula, tick: Formula) -> Formula:
    return neg(bdia0(neg(psi), tick))


def bullet_translate(phi: Formula, tick: str | Formula = "@Tick") -> Formula:
    """Replace every <0> by the Tick diamond (on the desugared tree)."""
    t = Var(tick) if isinstance(tick, str) else tick
    memo: dict = {}
    for s in subformula_list(phi):
        if isinstance(s, (Var, Top, Bot)):
            memo[s] = s
        elif isinstance(s, Neg):
            memo[s] = Neg(memo[s.child])
        elif isinstance(s, Dia1):
            memo[s] = Dia1(memo[s.child])
        elif isinstance(s, Dia0):
            memo[s] = bdia0(memo[s.child], t)
        else:
            memo[s] = And(memo[s.left], memo[s.right])
    return memo[phi]


def compile_interval(p: str, dictionary: VarDictionary | None = None, role=None) -> CompiledEncoding:
    """Interval_P: five conjuncts making P uniform along ~-classes."""
    d = _dict(dictionary, [p])
    t = d.var("Tick")
    P = Var(p)
    Pp = d.var(("prime", p))
    bd = lambda f: bdia0(f, t)
    bb = lambda f: bbox0(f, t)
    pre = _bp("1+", "0+")
    tag = f"Interval_{_short(d, p)}"
    parts = [
        (f"{tag}.puniq", pre(imp(P, bb(neg(P))))),
        (f"{tag}.int1", pre(imp(Dia0(P) & bb(neg(P)), P))),
        (f"{tag}.int5", pre(imp(P & neg(bd(TOP)), box(0, P)))),
        (f"{tag}.int2", pre(imp(P & bd(TOP), bd(Pp)))),
        (f"{tag}.int4", pre(imp(P, box(0, imp(bd(Pp), P))))),
    ]
    return CompiledEncoding("interval", parts, d)


def _short(d: VarDictionary, name: str) -> str:
    try:
        role = d.role_of(name)
    except KeyError:
        return name
    if isinstance(role, str):
        return role
    head, arg = role[0], role[1]
    return {"S_q": f"S_{arg}", "C-": f"C{arg}-", "I": f"I_{arg}"}.get(head, f"{head}{arg}")


# ---------------------------------------------------------------- grids

GRID_VARIANTS = ("fw", "fin", "bw", "star", "unique", "unique_fin")


def compile_grid(variant: str, dictionary: VarDictionary | None = None) -> CompiledEncoding:
    d = _dict(dictionary)
    S, N = d.var("S"), d.var("N")
    initfw = S & box(0, neg(S))
    dgenfw = _bp("0+", "1+")(imp(S, Dia1(N)))
    step = Dia0(S) & box(0, box(0, neg(S)))
    # reflexive vertical box: an N in the root row must not escape generation
    sgenfw = _bp("0+", "1+")(imp(N, step))
    diaguniq = _bp("0+", "1")(imp(N, box(1, neg(N))))
    if variant in ("fin", "unique_fin"):
        end = d.var("end")
        sgenfin = _bp("0+", "1+")(imp(N & neg(end), step))
        parts = [("initfw", initfw), ("dgenfw", dgenfw), ("sgenfin", sgenfin)]
        if variant == "unique_fin":
            parts.append(("diaguniq", diaguniq))
        return CompiledEncoding(f"grid_{variant}", parts, d)
    if variant in ("fw", "unique"):
        parts = [("initfw", initfw), ("dgenfw", dgenfw), ("sgenfw", sgenfw)]
        if variant == "unique":
            parts.append(("diaguniq", diaguniq))
        return CompiledEncoding(f"grid_{variant}", parts, d)
    if variant not in ("bw", "star"):
        raise EncodingError(f"unknown grid variant {variant!r}")
    bw = [
        ("initfbw", Dia0(S & box(0, BOT))),
        ("dgenbw", box_plus(1, Dia0(N))),
        ("sgenbw", _bp("1+", "0")(imp(N, box(1, neg(N)) & Dia1(S)))),
        ("sgen", _bp("1+", "0")(imp(N, step))),
        ("suni", _bp("1+", "0")(imp(S, box(0, neg(S)) & box(1, neg(S))))),
    ]
    if variant == "bw":
        return CompiledEncoding("grid_bw", bw, d)
    t = d.var("Tick")
    parts = [("initbwd", bdia0(S & box_plus(1, bbox0(BOT, t)), t))]
    parts += [(f"{l}.bullet", bullet_translate(f, t)) for l, f in bw[1:]]
    parts.append(("tick", _bp("1+", "0+")(imp(disj(t, Dia1(t)), t & box(1, t)))))
    for p in ("N", "S"):
        parts += compile_interval(d.name(p), d, role=p).conjuncts
    return CompiledEncoding("grid_star", parts, d)


# ---------------------------------------------------------------- counters

def _allc(d, i):
    N = d.var("N")
    return Dia0(N) & box(0, imp(disj(N, Dia0(N)), d.var(("C", i))))


def _tillstart(d, i):
    N = d.var("N")
    return Dia0(N) & box(0, imp(disj(N, Dia0(N)), neg(d.var("start")) & d.var(("C", i))))


def compile_counter_layer(variant: str, n: int, dictionary: VarDictionary | None = None) -> CompiledEncoding:
    if n < 2:
        raise EncodingError("need at least two counters")
    d = _dict(dictionary)
    N = d.var("N")
    if variant == "fw":
        parts = []
        for i in range(n):
            cp, cm = d.var(("C+", i)), d.var(("C-", i))
            parts.append(conj([imp(cp, box(0, cp)), imp(cm, box(0, cm)), imp(cm, cp)]))
        return CompiledEncoding("counter", [("counter", conj(_bp("0+", "1+")(p) for p in parts))], d)
    if variant == "bw":
        body = conj(imp(d.var(("C", i)), disj(N, _allc(d, i))) for i in range(n))
        return CompiledEncoding("counter_bw", [("counterbw", _bp("1+", "0")(body))], d)
    if variant == "bw_bullet":
        t = d.var("Tick")
        body = conj(imp(d.var(("C", i)), disj(N, bullet_translate(_allc(d, i), t))) for i in range(n))
        return CompiledEncoding("counter_bw_bullet", [("counterbw.bullet", box_plus(1, bbox0(body, t)))], d)
    if variant == "lossy":
        return CompiledEncoding("till_start", [(f"TillStartAllC{i}", _tillstart(d, i)) for i in range(n)], d)
    raise EncodingError(f"unknown counter variant {variant!r}")


def _fix(variant, d, i):
    if variant == "fw":
        cp, cm = d.var(("C+", i)), d.var(("C-", i))
        return box_plus(1, imp(box(0, cp), cp)) & box_plus(1, imp(box(0, cm), cm))
    if variant == "bw":
        return box_plus(1, iff(d.var(("C", i)), _allc(d, i)))
    return box_plus(1, imp(d.var(("C", i)), _tillstart(d, i)))


def _inc(variant, d, i):
    if variant == "fw":
        cp, cm = d.var(("C+", i)), d.var(("C-", i))
        return dia_eq1(neg(cp) & box(0, cp)) & box_plus(1, imp(box(0, cm), cm))
    N = d.var("N")
    if variant == "bw":
        return box_plus(1, iff(d.var(("C", i)), disj(N, _allc(d, i))))
    return box_plus(1, imp(d.var(("C", i)), disj(N, _tillstart(d, i))))


def _dec(variant, d, i):
    if variant == "fw":
        cp, cm = d.var(("C+", i)), d.var(("C-", i))
        # reflexive box: the S-point itself must not gain C+ during a decrement
        return dia_eq1(neg(cm) & box(0, cm)) & box_plus(1, imp(box(0, cp), cp))
    c = d.var(("C", i))
    if variant == "bw":
        return box_plus(1, imp(c, _allc(d, i))) & dia_eq1(neg(c) & _allc(d, i))
    return box_plus(1, imp(c, _tillstart(d, i))) & dia_plus(1, neg(c) & _tillstart(d, i))


def compile_op_gadget(variant: str, op: Op, n: int = 2, dictionary: VarDictionary | None = None) -> Formula:
    """Do_iota for variant fw | bw | bw_bullet | lossy."""
    if op.counter >= n:
        raise EncodingError(f"counter {op.counter} out of range for N={n}")
    d = _dict(dictionary)
    base = "bw" if variant == "bw_bullet" else variant
    if base not in ("fw", "bw", "lossy"):
        raise EncodingError(f"unknown gadget variant {variant!r}")
    i = op.counter
    others = [_fix(base, d, j) for j in range(n) if j != i]
    if op.kind == "inc":
        f = conj([_inc(base, d, i)] + others)
    elif op.kind == "dec":
        f = conj([_dec(base, d, i)] + others)
    else:
        if base == "fw":
            head = box_plus(1, imp(d.var(("C+", i)), d.var(("C-", i))))
        else:
            head = box_plus(1, neg(d.var(("C", i))))
        f = conj([head] + [_fix(base, d, j) for j in range(n)])
    if variant == "bw_bullet":
        f = bullet_translate(f, d.var("Tick"))
    return f


def gadget_parts(variant: str, kind: str, i: int, dictionary: VarDictionary) -> Formula:
    """Single Fix_i / Inc_i / Dec_i formula (used by tests and decoders)."""
    return {"fix": _fix, "inc": _inc, "dec": _dec}[kind](variant, dictionary, i)


# ---------------------------------------------------------------- machines

TARGETS = ("fw_recurrence", "fw_finite_reach", "bw_nontermination", "bw_recurrence",
           "dense_nontermination", "lossy_omega_reach", "lossy_finite_reach")


def _phi_fw(m: CounterMachine, d: VarDictionary) -> list:
    S, N = d.var("S"), d.var("N")
    parts = compile_counter_layer("fw", m.counters, d).conjuncts
    allzero = conj(box_plus(1, neg(d.var(("C+", i))) & neg(d.var(("C-", i)))) for i in range(m.counters))
    parts.append(("allzero", allzero))
    parts.append(("griduniquetwo", _bp("1+", "0+")(_state_unique(d, m))))
    clauses = []
    for q in m.states:
        if q in m.halt:
            continue
        alts = [compile_op_gadget("fw", op, m.counters, d)
                & box(1, imp(N, box(0, imp(S, d.var(("S_q", q2))))))
                for op, q2 in m.instructions[q]]
        clauses.append(imp(d.var(("S_q", q)), disj(alts)))
    parts.append(("fwstep", _bp("1+", "0+")(conj(clauses))))
    return parts


def _phi_bw(m: CounterMachine, d: VarDictionary, bullet: bool = False) -> list:
    S, N = d.var("S"), d.var("N")
    t = d.var("Tick") if bullet else None
    tr = (lambda f: bullet_translate(f, t)) if bullet else (lambda f: f)
    ops = m.ops()
    if bullet:
        parts = compile_counter_layer("bw_bullet", m.counters, d).conjuncts
    else:
        parts = compile_counter_layer("bw", m.counters, d).conjuncts
    sfx = ".bullet" if bullet else ""
    parts.append(("gridunique" + sfx, tr(_bp("1+", "0")(_state_unique(d, m)))))
    clauses = []
    for q in m.states:
        if q in m.halt:
            continue
        pre = S & Dia1(N & Dia0(d.var(("S_q", q))))
        alts = [d.var(("I", str(op))) & d.var(("S_q", q2)) for op, q2 in m.instructions[q]]
        clauses.append(imp(pre, disj(alts)))
    parts.append(("executebwdec" + sfx, tr(_bp("1", "0")(conj(clauses)))))
    inst = conj(imp(d.var(("I", str(op))), compile_op_gadget("bw", op, m.counters, d)) for op in ops)
    parts.append(("instbw" + sfx, tr(_bp("1", "0")(inst))))
    return parts


def _rec_bw(d: VarDictionary, q_r: str) -> list:
    S, N, R, Q = d.var("S"), d.var("N"), d.var("R"), d.var("Q")
    p = _bp("1+", "0")
    return [
        ("erec", p(imp(S, Dia1(R)))),
        ("upd", p(imp(R, box(0, neg(S))))),
        ("dgenr", box(0, imp(Dia1(S), Dia1(N)))),
        ("dgenrdiff", _bp("1", "0")(imp(S, iff(Q, box(1, imp(N, box(0, imp(S, neg(Q))))))))),
        ("rtos", p(imp(S & Dia0(R), d.var(("S_q", q_r))))),
    ]


def _decuniq(m: CounterMachine, d: VarDictionary) -> list:
    t = d.var("Tick")
    parts = []
    for i in range(m.counters):
        cm = d.var(("C-", i))
        parts += compile_interval(d.name(("C-", i)), d, role=("C-", i)).conjuncts
        allc = bullet_translate(_allc(d, i), t)
        parts.append((f"decuniq{i}", _bp("1+", "0")(iff(cm, neg(d.var(("C", i))) & allc))))
    return parts


def _phi_lossy(m: CounterMachine, d: VarDictionary, q0: str) -> list:
    S, N, start = d.var("S"), d.var("N"), d.var("start")
    p = _bp("0+", "1+")
    parts = [("startv", p(imp(start, box(1, start)))),
             ("griduniquel", p(_state_unique(d, m)))]
    zero = conj(box_plus(1, neg(d.var(("C", i)))) for i in range(m.counters))
    parts.append(("initmmbwl", p(imp(S & start, d.var(("S_q", q0)) & zero))))
    clauses = []
    for q in m.states:
        if q in m.halt:
            continue
        pre = S & neg(start) & Dia1(N & Dia0(d.var(("S_q", q))))
        alts = [compile_op_gadget("lossy", op, m.counters, d) & d.var(("S_q", q2))
                for op, q2 in m.instructions[q]]
        clauses.append(imp(pre, disj(alts)))
    # reflexive prefix: the step into the root column is checked as well
    parts.append(("executebwl", p(conj(clauses))))
    return parts


def _rec_lossy(d: VarDictionary) -> list:
    S, start, R, Ss = d.var("S"), d.var("start"), d.var("R"), d.var("S*")
    p = _bp("0+", "1+")
    return [
        ("recinit", start & box_plus(0, Dia0(start))),
        ("startpoints", p(imp(start, dia_plus(1, R & Dia0(S & neg(start))
                                               & box(0, imp(Dia0(S), neg(start))))))),
        ("qr", p(imp(R, box(0, imp(S, Ss))))),
        ("recpoints", _bp("0", "1+")(imp(Ss, Dia1(
            R & Dia0(start & Dia0(S & neg(start)))
            & box(0, imp(start & Dia0(S), box(0, imp(Dia0(S), neg(start))))))))),
        ("sstars", p(imp(Ss, S))),
        ("svuniq", p(imp(S, box(1, neg(S))))),
        ("unipoints", p(imp(R, box(0, neg(R))))),
    ]


def compile_machine(m: CounterMachine, target: str, q0: str | None = None,
                    q_r: str | None = None, dictionary: VarDictionary | None = None) -> CompiledEncoding:
    """Compile machine M for one of TARGETS.

    Finite-reachability targets compile against reach_normalized(M, q_r), so
    q_r is a non-terminal state whose only step is inc0 back to itself.
    """
    if target not in TARGETS:
        raise EncodingError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    q0 = q0 or m.states[0]
    m.check_state(q0)
    if q0 != m.states[0]:
        raise EncodingError("the encodings start in the machine's first state; reorder the states")
    needs_qr = target not in ("bw_nontermination", "dense_nontermination")
    if needs_qr:
        if q_r is None:
            raise EncodingError(f"target {target} needs a state q_r")
        m.check_state(q_r)
    d = _dict(dictionary)
    for q in m.states:
        d.name(("S_q", q))
    params = {"q0": q0, "q_r": q_r}
    mm = m
    if target in ("fw_finite_reach", "lossy_finite_reach"):
        mm = reach_normalized(m, q_r)
    if target.startswith("fw"):
        variant = "fw" if target == "fw_recurrence" else "fin"
        parts = compile_grid(variant, d).conjuncts + _phi_fw(mm, d)
        S, N = d.var("S"), d.var("N")
        sq = d.var(("S_q", q_r))
        parts.append(("init-state", d.var(("S_q", q0))))
        if target == "fw_recurrence":
            parts.append(("recurrence-target", box(0, Dia0(box(1, imp(S, sq))))))
        else:
            parts.append(("reach-target", _bp("0+", "1+")(imp(N & d.var("end"), box(1, imp(S, sq))))))
    elif target in ("bw_nontermination", "bw_recurrence"):
        for op in mm.ops():
            d.name(("I", str(op)))
        parts = compile_grid("bw", d).conjuncts + _phi_bw(mm, d)
        S = d.var("S")
        parts.append(("init-state", Dia0(S & box(0, BOT) & d.var(("S_q", q0)))))
        if target == "bw_recurrence":
            parts += _rec_bw(d, q_r)
    elif target == "dense_nontermination":
        for op in mm.ops():
            d.name(("I", str(op)))
        parts = compile_grid("star", d).conjuncts + _phi_bw(mm, d, bullet=True)
        parts += _decuniq(mm, d)
        t, S = d.var("Tick"), d.var("S")
        parts.append(("init-state", bdia0(S & d.var(("S_q", q0)) & box_plus(1, bbox0(BOT, t)), t)))
        for q in mm.states:
            parts += compile_interval(d.name(("S_q", q)), d, role=("S_q", q)).conjuncts
        for op in mm.ops():
            parts += compile_interval(d.name(("I", str(op))), d, role=("I", str(op))).conjuncts
    elif target == "lossy_omega_reach":
        parts = compile_grid("unique", d).conjuncts + _phi_lossy(mm, d, q0) + _rec_lossy(d)
        parts.append(("sstar-target", _bp("0+", "1+")(imp(d.var("S*"), d.var(("S_q", q_r))))))
    else:
        parts = compile_grid("unique_fin", d).conjuncts + _phi_lossy(mm, d, q0)
        parts.append(("reach-root", d.var(("S_q", q_r))))
        parts.append(("end-start", _bp("0+", "1+")(iff(d.var("end"), d.var("start")))))
    return CompiledEncoding(target, parts, d, machine=m, params=params, compiled_machine=mm)


# ---------------------------------------------------------------- translations

def _relativize_body(phi: Formula, D: Formula) -> Formula:
    memo: dict = {}
    for s in subformula_list(phi):
        if isinstance(s, (Var, Top, Bot)):
            memo[s] = s
        elif isinstance(s, Neg):
            memo[s] = Neg(memo[s.child])
        elif isinstance(s, And):
            memo[s] = And(memo[s.left], memo[s.right])
        else:
            memo[s] = type(s)(D & memo[s.child])
    return memo[phi]


def relativize(phi: Formula, mode: str, dictionary: VarDictionary | None = None) -> Formula:
    """Relativize both diamonds to a fresh D, guarded to depth modal_depth(phi)."""
    d = _dict(dictionary, variables(phi))
    D = d.var("D")
    n = modal_depth(phi)
    if mode == "decreasing":
        guard = imp(Dia0(D), D)
    elif mode == "expanding":
        guard = imp(D, box(0, D))
    else:
        raise EncodingError(f"unknown mode {mode!r}")
    return conj([D, box_upto(0, n, box_upto(1, n, guard)), _relativize_body(phi, D)])


def product_to_decreasing(phi: Formula) -> Formula:
    return _bp("1+", "0+")(imp(Dia0(TOP), box(1, Dia0(TOP)))) & phi


def dagger_translate(phi: Formula, pvars: dict) -> Formula:
    memo: dict = {}
    for s in subformula_list(phi):
        if isinstance(s, (Var, Top, Bot)):
            memo[s] = s
        elif isinstance(s, Neg):
            memo[s] = Neg(memo[s.child])
        elif isinstance(s, And):
            memo[s] = And(memo[s.left], memo[s.right])
        elif isinstance(s, Dia0):
            memo[s] = Dia0(memo[s.child])
        else:
            memo[s] = disj(pvars[s.child], Dia1(memo[s.child]))
    return memo[phi]


def diff_to_linear(phi: Formula, dictionary: VarDictionary | None = None) -> CompiledEncoding:
    """chi_phi & phi-dagger: difference verticals simulated by linear ones."""
    d = _dict(dictionary, variables(phi))
    subs = subformula_list(phi)
    pv = {s: d.var(("P", k)) for k, s in enumerate(subs)}
    tr = {s: dagger_translate(s, pv) for s in subs}
    blocks = []
    for s in subs:
        p = pv[s]
        blocks.append(conj([neg(p), box_plus(1, imp(tr[s], box(1, p))),
                            imp(Dia1(p), dia_plus(1, neg(p) & tr[s]))]))
    chi = box_plus(0, conj(blocks))
    enc = CompiledEncoding("diff_to_linear", [("chi", chi), ("phi-dagger", tr[phi])], d)
    enc.params["subformulas"] = {to_text(s): d.name(("P", k)) for k, s in enumerate(subs)}
    return enc


# ---------------------------------------------------------------- text format

def dump_encoding(enc: CompiledEncoding) -> str:
    lines = [f"target: {enc.target}"]
    if enc.machine is not None:
        digest = hashlib.sha256(dump_machine(enc.machine).encode()).hexdigest()[:16]
        lines.append(f"machine: {digest}")
    for k, v in enc.params.items():
        if isinstance(v, (str, type(None))):
            lines.append(f"param {k}: {v}")
    for role, name in enc.dict.items():
        lines.append(f"dict {role!r} = {name}")
    for label, f in enc.conjuncts:
        lines.append("")
        lines.append(f"[{label}]")
        lines.append(to_text(f))
    return "\n".join(lines) + "\n"


def load_encoding(text: str, machine: CounterMachine | None = None) -> CompiledEncoding:
    target, entries, params, conjuncts = None, {}, {}, []
    digest = None
    label, buf = None, []

    def flush():
        if label is not None:
            conjuncts.append((label, parse("\n".join(buf))))

    for raw in text.splitlines():
        line = raw.rstrip()
        if line.startswith("[") and line.endswith("]"):
            flush()
            label, buf = line[1:-1], []
        elif label is not None:
            if line.strip():
                buf.append(line)
        elif line.startswith("target:"):
            target = line.split(":", 1)[1].strip()
        elif line.startswith("machine:"):
            digest = line.split(":", 1)[1].strip()
        elif line.startswith("param "):
            k, v = line[6:].split(":", 1)
            v = v.strip()
            params[k.strip()] = None if v == "None" else v
        elif line.startswith("dict "):
            role_txt, name = line[5:].rsplit(" = ", 1)
            entries[ast.literal_eval(role_txt)] = name.strip()
        elif line.strip():
            raise EncodingError(f"unexpected header line {line!r}")
    flush()
    if target is None:
        raise EncodingError("missing target line")
    if machine is not None and digest is not None:
        got = hashlib.sha256(dump_machine(machine).encode()).hexdigest()[:16]
        if got != digest:
            raise EncodingError("machine hash does not match the encoding header")
    d = VarDictionary(entries=entries)
    mm = None
    if machine is not None and target in ("fw_finite_reach", "lossy_finite_reach"):
        mm = reach_normalized(machine, params["q_r"])
    elif machine is not None:
        mm = machine
    return CompiledEncoding(target, conjuncts, d, machine=machine, params=params, compiled_machine=mm)
