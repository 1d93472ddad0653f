"""Explicit witness models, per-conjunct verification and run decoding.

Witnesses are finite: exact for the finite targets, truncations of the
infinite constructions otherwise.  Verification reports, per labeled
conjunct, where it fails and whether every failure sits on the truncation
boundary of the carrier.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .formula import And, Dia0, Dia1, Formula, Neg, Var, VarDictionary, conj
from .frames import (INFINITE, TOP_POINT, GridTwoFrame, TwoFrame, assemble,
                     horizontal_rank, make_difference, make_linear,
                     make_omega_plus_one_reversed, product)
from .machines import (Configuration, CounterMachine, MachineError, Op, Run,
                       bounded_oracle, successors, validate_run)
from .reductions import CompiledEncoding
from .semantics import Model, check, truth_set

__all__ = [
    "WitnessSpec", "WitnessError", "DecodeError", "DecodedRun", "ConjunctResult",
    "VerifyReport", "KINDS", "build", "verify", "decode_run",
    "verify_backward_claims", "violation_worlds", "spec_for", "canonical_run",
    "tick_coherence",
]

KINDS = ("fw_rec", "fw_fin", "bw_inf", "bw_rec", "dense", "lossy_exp", "lossy_fin")
EXACT_KINDS = ("fw_fin", "lossy_fin")


class WitnessError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass
class WitnessSpec:
    kind: str
    machine: CounterMachine
    runs: list  # list of Run; a single run for every kind but lossy_exp
    dictionary: VarDictionary
    K: int | None = None
    q_r: str | None = None
    width: int = 2
    visits: list | None = None  # lossy_exp: chosen q_r visit indices per run

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WitnessError(f"unknown witness kind {self.kind!r}")
        if isinstance(self.runs, Run):
            self.runs = [self.runs]
        if not self.runs:
            raise WitnessError("at least one run is required")
        if self.width < 1:
            raise WitnessError("interval width must be >= 1")

    @property
    def run(self) -> Run:
        return self.runs[0]


# ---------------------------------------------------------------- helpers

def _name(d: VarDictionary, role) -> str:
    return d.name(role)


def _add(val: dict, name: str, w):
    val.setdefault(name, set()).add(w)


def _check_run(spec: WitnessSpec, run: Run, kind: str = "reliable"):
    m = spec.machine
    if run.kind != kind:
        raise WitnessError(f"{spec.kind} needs a {kind} run, got {run.kind}")
    try:
        validate_run(m, run, m.initial())
    except MachineError as e:
        raise WitnessError(f"invalid run: {e}") from None


def _counter_sets_fw(run: Run, n: int):
    """Per column m: (plus_i, minus_i) row sets following the forward displays."""
    plus = [set() for _ in range(n)]
    minus = [set() for _ in range(n)]
    cols = [([set(p) for p in plus], [set(q) for q in minus])]
    for k, op in enumerate(run.ops):
        i = op.counter
        if op.kind == "inc":
            plus[i].add(k)
        elif op.kind == "dec":
            live = plus[i] - minus[i]
            minus[i].add(min(live))
        cols.append(([set(p) for p in plus], [set(q) for q in minus]))
    return cols


def _counter_sets_bw(run: Run, n: int):
    """mu_m(C_i) for m = 0..len(ops)."""
    cur = [set() for _ in range(n)]
    out = [[set(s) for s in cur]]
    for k, op in enumerate(run.ops):
        i = op.counter
        if op.kind == "inc":
            cur[i].add(k)
        elif op.kind == "dec":
            cur[i].discard(min(cur[i]))
        out.append([set(s) for s in cur])
    return out


# ---------------------------------------------------------------- builders

def _build_fw(spec: WitnessSpec, finite: bool) -> Model:
    m, d, run = spec.machine, spec.dictionary, spec.run
    _check_run(spec, run)
    n = m.counters
    if finite:
        q_r = spec.q_r
        states = [c.state for c in run.configs]
        if q_r is None or states[-1] != q_r or q_r in states[:-1]:
            raise WitnessError("fw_fin needs a run ending at its first visit of q_r")
        T = len(run)
        # the normalized machine takes one more inc0 step inside q_r
        last = run.configs[-1]
        extra = Configuration(q_r, (last.counters[0] + 1,) + last.counters[1:])
        full = Run(run.configs + (extra,), run.ops + (Op("inc", 0),))
        H, V = T + 1, T + 1
        staircase = T
    else:
        K = spec.K or len(run)
        if len(run) < K:
            raise WitnessError(f"run prefix of length {len(run)} is shorter than K={K}")
        full = run
        H, V = K, K + 1
        staircase = K
    cols = _counter_sets_fw(full, n)
    val: dict = {}
    S, N = _name(d, "S"), _name(d, "N")
    for k in range(staircase):
        _add(val, S, (k, k))
        _add(val, _name(d, ("S_q", full.configs[k].state)), (k, k))
        _add(val, N, (k, k + 1))
    if finite:
        _add(val, _name(d, "end"), (staircase - 1, staircase))
    for col in range(H):
        plus, minus = cols[min(col, len(cols) - 1)]
        for i in range(n):
            for r in plus[i]:
                _add(val, _name(d, ("C+", i)), (col, r))
            for r in minus[i]:
                _add(val, _name(d, ("C-", i)), (col, r))
    fr = product(make_linear(H), make_difference(V))
    return Model(fr, val, (0, 0))


def _build_bw(spec: WitnessSpec, rec: bool) -> Model:
    m, d, run = spec.machine, spec.dictionary, spec.run
    _check_run(spec, run)
    K = spec.K
    if K is None or K < 2:
        raise WitnessError("bw witnesses need a truncation K >= 2")
    if len(run) < K + 1:
        raise WitnessError(f"run prefix needs K+1={K + 1} configurations, got {len(run)}")
    fr = product(make_omega_plus_one_reversed(K), make_difference(K))
    mu = _counter_sets_bw(run, m.counters)
    val: dict = {}
    S, N = _name(d, "S"), _name(d, "N")
    for k in range(K):
        _add(val, S, (k, k))
        _add(val, _name(d, ("S_q", run.configs[k].state)), (k, k))
        _add(val, N, (k + 1, k))
        if k + 1 < K:
            # the op of step k is read at the next staircase point
            _add(val, _name(d, ("I", str(run.ops[k]))), (k + 1, k + 1))
    for col in range(K + 1):
        for i in range(m.counters):
            for r in mu[col][i]:
                _add(val, _name(d, ("C", i)), (col, r))
    if rec:
        q_r = spec.q_r
        visits = [k for k, c in enumerate(run.configs[:K]) if c.state == q_r]
        for k in range(1, K, 2):
            _add(val, _name(d, "Q"), (k, k))
        for k in range(K):
            later = [v for v in visits if v > k]
            if later:
                _add(val, _name(d, "R"), (k, later[0]))
    return Model(fr, val, (TOP_POINT, 0))


def _dense_positions(K: int, width: int):
    """Interval m occupies chain positions width*m .. width*m+width-1."""
    return {m: list(range(width * m, width * m + width)) for m in range(K)}


def _build_dense(spec: WitnessSpec) -> Model:
    m, d, run = spec.machine, spec.dictionary, spec.run
    _check_run(spec, run)
    K, w = spec.K, spec.width
    if K is None or K < 2:
        raise WitnessError("dense witnesses need a truncation K >= 2")
    if len(run) < K + 1:
        raise WitnessError(f"run prefix needs K+1={K + 1} configurations, got {len(run)}")
    horiz = make_omega_plus_one_reversed(w * K - 1)
    fr = product(horiz, make_difference(K))
    mu_model = _build_bw(WitnessSpec("bw_inf", m, [run], d, K=K), rec=False)
    mu = mu_model.valuation
    intervals = _dense_positions(K, w)
    tick = _name(d, "Tick")
    val: dict = {}
    verts = range(K)
    for col, pts in intervals.items():
        if col % 2 == 1:
            for p in pts:
                for v in verts:
                    _add(val, tick, (p, v))
    if (K - 1) % 2 == 0:
        for v in verts:
            _add(val, tick, (TOP_POINT, v))
    plain = [_name(d, "N"), _name(d, "S")]
    plain += [_name(d, ("S_q", q)) for q in m.states]
    plain += [_name(d, ("I", str(op))) for op in m.ops()]
    cvars = [_name(d, ("C", i)) for i in range(m.counters)]
    for name in plain + cvars:
        for (col, v) in mu.get(name, ()):
            if col == TOP_POINT or col >= K:
                continue
            for p in intervals[col]:
                _add(val, name, (p, v))
    for name in plain:
        pname = _name(d, ("prime", name))
        for (col, v) in mu.get(name, ()):
            if col == TOP_POINT or col < 1 or col - 1 >= K:
                continue
            for p in intervals[col - 1]:
                _add(val, pname, (p, v))
    for i, cname in enumerate(cvars):
        cm = _name(d, ("C-", i))
        cmp_ = _name(d, ("prime", cm))
        cset = mu.get(cname, frozenset())
        for col in range(K):
            for v in verts:
                here = (col, v) in cset
                if not here and col > 0 and (col - 1, v) in cset:
                    for p in intervals[col]:
                        _add(val, cm, (p, v))
                if here and (col + 1, v) not in cset:
                    for p in intervals[col]:
                        _add(val, cmp_, (p, v))
    return Model(fr, val, (TOP_POINT, 0))


def _lossy_units(run: Run, n: int, cols: list) -> list:
    """Unit rows per config index for a lossy run laid out right-to-left.

    Config j sits at column cols[j] (decreasing).  An increment landing at
    column c creates the unit at row c+1; losses drop the least rows.
    """
    units = [[set() for _ in range(n)]]
    for j in range(1, len(run)):
        prev = units[-1]
        op = run.ops[j - 1]
        target = run.configs[j].counters
        col = cols[j]
        cur = []
        for i in range(n):
            rows = sorted(prev[i])
            want = target[i]
            if op.kind == "inc" and op.counter == i and want == len(rows) + 1:
                cur.append(set(rows) | {col + 1})
                continue
            if want > len(rows):
                raise WitnessError(f"step {j - 1} raises counter {i} beyond a single increment")
            cur.append(set(rows[len(rows) - want:]))
        units.append(cur)
    return units


def _lay_segment(val, d, m, run, start_col, cols_out):
    n = m.counters
    cols = [start_col - j for j in range(len(run))]
    units = _lossy_units(run, n, cols)
    for j, c in enumerate(run.configs):
        col = cols[j]
        _add(val, _name(d, ("S_q", c.state)), (col, col))
        for i in range(n):
            for r in units[j][i]:
                _add(val, _name(d, ("C", i)), (col, r))
    cols_out.extend(cols)
    return cols


def _build_lossy_fin(spec: WitnessSpec) -> Model:
    m, d, run = spec.machine, spec.dictionary, spec.run
    _check_run(spec, run, "lossy")
    states = [c.state for c in run.configs]
    if spec.q_r is None or states[-1] != spec.q_r or spec.q_r in states[:-1]:
        raise WitnessError("lossy_fin needs a lossy run ending at its first visit of q_r")
    bad = [q for q in states[:-1] if q in m.halt]
    if bad:
        raise WitnessError(f"run passes halting state {bad[0]}")
    T = len(run)
    val: dict = {}
    _lay_segment(val, d, m, run, T - 1, [])
    S, N = _name(d, "S"), _name(d, "N")
    for k in range(T):
        _add(val, S, (k, k))
        _add(val, N, (k, k + 1))
    for v in range(T + 1):
        _add(val, _name(d, "start"), (T - 1, v))
        _add(val, _name(d, "end"), (T - 1, v))
    fr = product(make_linear(T), make_difference(T + 1))
    return Model(fr, val, (0, 0))


def _lossy_layout(spec: WitnessSpec):
    """Start columns and chosen q_r visits (as columns) per segment."""
    starts = [0]
    for r in spec.runs:
        starts.append(starts[-1] + len(r))
    visits = spec.visits
    if visits is None:
        visits = []
        for n, r in enumerate(spec.runs, 1):
            # S*-points must avoid the start column, so config 0 never counts
            idx = [j for j, c in enumerate(r.configs) if c.state == spec.q_r and j > 0]
            if len(idx) < n:
                raise WitnessError(f"run {n} visits q_r only {len(idx)} times after its start, needs {n}")
            visits.append(idx[-n:])
    seg_visits = []
    for n, (r, vs) in enumerate(zip(spec.runs, visits), 1):
        if len(set(vs)) < n or any(j < 1 or r.configs[j].state != spec.q_r for j in vs):
            raise WitnessError(f"bad q_r visit choice for run {n}")
        seg_visits.append(sorted(starts[n] - j for j in vs))
    return starts, seg_visits


def _build_lossy_exp(spec: WitnessSpec) -> Model:
    m, d = spec.machine, spec.dictionary
    if spec.q_r is None:
        raise WitnessError("lossy_exp needs q_r")
    for r in spec.runs:
        _check_run(spec, r, "lossy")
        if any(c.state in m.halt for c in r.configs):
            raise WitnessError("lossy_exp runs must avoid halting states")
    starts, seg_visits = _lossy_layout(spec)
    L = starts[-1] + 1
    val: dict = {}
    q0 = m.states[0]
    _add(val, _name(d, ("S_q", q0)), (0, 0))
    for n, r in enumerate(spec.runs, 1):
        # segment n: config 0 at its start column, the rest to the left of it
        _lay_segment(val, d, m, r, starts[n], [])
    S, N, start = _name(d, "S"), _name(d, "N"), _name(d, "start")
    for k in range(L):
        _add(val, S, (k, k))
        _add(val, N, (k, k + 1))
    for s in starts:
        for v in range(L + 1):
            _add(val, start, (s, v))
    sstar, R = _name(d, "S*"), _name(d, "R")
    for vs in seg_visits:
        for c in vs:
            _add(val, sstar, (c, c))
    # R: start column and each S* of segment n point to distinct S* of segment n+1
    for n in range(len(seg_visits)):
        sources = [starts[n]] + (seg_visits[n - 1] if n >= 1 else [])
        targets = seg_visits[n]
        for src, tgt in zip(sorted(sources), targets):
            _add(val, R, (src, tgt))
    fr = product(make_linear(L), make_difference(L + 1))
    return Model(fr, val, (0, 0))


def build(spec: WitnessSpec) -> Model:
    k = spec.kind
    if k == "fw_fin":
        return _build_fw(spec, True)
    if k == "fw_rec":
        return _build_fw(spec, False)
    if k == "bw_inf":
        return _build_bw(spec, False)
    if k == "bw_rec":
        return _build_bw(spec, True)
    if k == "dense":
        return _build_dense(spec)
    if k == "lossy_fin":
        return _build_lossy_fin(spec)
    return _build_lossy_exp(spec)


# ---------------------------------------------------------------- verification

def violation_worlds(m: Model, phi: Formula, w) -> list:
    """Worlds where phi's failure at w is realized, drilling through boxes and conjunctions."""
    out, seen = [], set()
    stack = [(phi, w)]
    while stack:
        f, x = stack.pop()
        if (f, x) in seen or check(m, x, f):
            continue
        seen.add((f, x))
        if isinstance(f, And):
            stack.append((f.left, x))
            stack.append((f.right, x))
        elif isinstance(f, Neg) and isinstance(f.child, Neg):
            stack.append((f.child.child, x))
        elif isinstance(f, Neg) and isinstance(f.child, (Dia0, Dia1)):
            i = 0 if isinstance(f.child, Dia0) else 1
            body = f.child.child
            inner = body.child if isinstance(body, Neg) else Neg(body)
            for u in m.frame.successors(i, x):
                stack.append((inner, u))
        elif x not in out:
            out.append(x)
    return sorted(out, key=repr)


def boundary(spec: WitnessSpec, model: Model) -> set:
    """Truncation boundary of the carrier; empty for the exact kinds."""
    k = spec.kind
    worlds = model.frame.worlds
    if k in EXACT_KINDS:
        return set()
    vmax = max(v for _, v in worlds)
    if k in ("bw_inf", "bw_rec"):
        K = spec.K
        edge = {x for x in worlds if x[0] == K or x[1] == vmax}
        if k == "bw_rec":
            # staircase points whose next q_r visit lies beyond the carrier
            visits = [j for j, c in enumerate(spec.run.configs[:K]) if c.state == spec.q_r]
            last = visits[-1] if visits else 0
            edge |= {x for x in worlds if x[0] != TOP_POINT and x[0] >= last and x[0] == x[1]}
        return edge
    if k == "dense":
        last = spec.width * spec.K - spec.width
        return {x for x in worlds if (x[0] != TOP_POINT and x[0] >= last) or x[1] == vmax}
    if k == "fw_rec":
        K = spec.K or len(spec.run)
        states = [c.state for c in spec.run.configs[:K]]
        visits = [j for j, q in enumerate(states) if q == spec.q_r]
        edge = visits[-1] if visits else 0
        return {x for x in worlds if x[0] >= min(edge, K - 1) or x[1] == vmax}
    starts, _ = _lossy_layout(spec)
    edge = starts[-2] + 1 if len(starts) > 1 else 0
    return {x for x in worlds if x[0] >= edge or x[1] == vmax}


@dataclass
class ConjunctResult:
    label: str
    holds: bool
    worlds: list = field(default_factory=list)
    on_boundary: bool = True

    def line(self) -> str:
        if self.holds:
            return f"{self.label}: HOLDS"
        tag = "boundary" if self.on_boundary else "interior"
        more = f" (+{len(self.worlds) - 1} more)" if len(self.worlds) > 1 else ""
        return f"{self.label}: FAILS at {_fmt(self.worlds[0])} [{tag}]{more}"


def _fmt(w) -> str:
    if isinstance(w, tuple):
        return "(" + ",".join(map(str, w)) + ")"
    return str(w)


@dataclass
class VerifyReport:
    kind: str
    results: list

    @property
    def ok(self) -> bool:
        if self.kind in EXACT_KINDS:
            return all(r.holds for r in self.results)
        return all(r.holds or r.on_boundary for r in self.results)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.results)

    def failing(self) -> list:
        return [r.label for r in self.results if not r.holds]

    def __getitem__(self, label) -> ConjunctResult:
        for r in self.results:
            if r.label == label:
                return r
        raise KeyError(label)

    def text(self) -> str:
        return "\n".join(r.line() for r in self.results) + "\n"


def _verify_one(args):
    model, label, f, edge = args
    root = model.root
    if check(model, root, f):
        return ConjunctResult(label, True)
    ws = violation_worlds(model, f, root)
    return ConjunctResult(label, False, ws, all(w in edge for w in ws))


def verify(spec: WitnessSpec, enc: CompiledEncoding, model: Model | None = None,
           jobs: int = 1) -> VerifyReport:
    model = model if model is not None else build(spec)
    edge = boundary(spec, model)
    tasks = [(model, label, f, edge) for label, f in enc.conjuncts]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_verify_one, tasks))
    else:
        results = [_verify_one(t) for t in tasks]
    return VerifyReport(spec.kind, results)


# ---------------------------------------------------------------- decoding

@dataclass
class DecodedRun:
    run: Run
    counts: list  # counts[m] = tuple of c_i(m)
    staircase: list  # the staircase worlds y_m (S-points)
    n_points: list = field(default_factory=list)  # the N-points used between them
    sstar: int = 0

    def __len__(self):
        return len(self.run)


def _unique_state(model: Model, d: VarDictionary, m: CounterMachine, w) -> str:
    hits = [q for q in m.states if w in model.valuation.get(_name(d, ("S_q", q)), ())]
    if len(hits) != 1:
        raise DecodeError(f"S_q not unique at staircase point {_fmt(w)}: {hits or 'none'}")
    return hits[0]


def _column(fr: TwoFrame, x) -> list:
    return [x] + fr.successors(1, x)


def _count(model: Model, name: str, ws) -> int:
    s = model.valuation.get(name, ())
    return sum(1 for w in ws if w in s)


def _steps_from_counts(m: CounterMachine, configs: list, kind: str) -> tuple:
    ops = []
    for k, (a, b) in enumerate(zip(configs, configs[1:])):
        cands = [op for op, q2 in m.instructions.get(a.state, ()) if q2 == b.state]
        found = None
        for op in cands:
            trial = Run((a, b), (op,), kind)
            try:
                validate_run(m, trial)
                found = op
                break
            except MachineError:
                continue
        if found is None:
            raise DecodeError(f"step {k}: {a} -> {b} is not a {kind} step "
                              f"(candidates: {', '.join(map(str, cands)) or 'none'})")
        ops.append(found)
    return tuple(ops)


def _decode_fw(model, enc, finite):
    d, m = enc.dict, enc.machine
    mm = enc.compiled_machine or m
    fr = model.frame
    S, N, end = _name(d, "S"), _name(d, "N"), _name(d, "end")
    sv, nv = model.valuation.get(S, set()), model.valuation.get(N, set())
    ev = model.valuation.get(end, set())
    q_r = enc.params.get("q_r")
    y = model.root
    if y not in sv:
        raise DecodeError("no S at the root")
    ys, ns, configs, counts = [y], [], [], []
    limit = len(fr.worlds)
    while True:
        col = _column(fr, y)
        q = _unique_state(model, d, mm, y)
        c = tuple(sum(1 for w in col if w in model.valuation.get(_name(d, ("C+", i)), ())
                      and w not in model.valuation.get(_name(d, ("C-", i)), ()))
                  for i in range(mm.counters))
        configs.append(Configuration(q, c))
        counts.append(c)
        if finite and q == q_r:
            break
        if len(configs) > limit:
            break
        cands = [w for w in fr.successors(1, y) if w in nv and (not finite or w not in ev)]
        nxt = None
        for w in sorted(cands, key=repr):
            succ = [u for u in fr.successors(0, w) if u in sv]
            if succ:
                nearest = max(succ, key=lambda u: len(fr.successors(0, u)))
                ns.append(w)
                nxt = nearest
                break
        if nxt is None:
            if finite:
                raise DecodeError(f"staircase stops at {_fmt(y)} before reaching {q_r}")
            break
        y = nxt
        ys.append(y)
    ops = _steps_from_counts(m, configs, "reliable")
    run = Run(tuple(configs), ops)
    validate_run(m, run, m.initial())
    return DecodedRun(run, counts, ys, ns)


def _decode_lossy_segment(model, enc, cols, rows=None):
    """Read configs at the given columns (in run order) of a product-like grid."""
    d, m = enc.dict, enc.machine
    mm = enc.compiled_machine or m
    fr = model.frame
    configs, counts, ys = [], [], []
    sstar = model.valuation.get(_name(d, "S*"), set())
    nstar = 0
    for col, y in cols:
        q = _unique_state(model, d, mm, y)
        column = _column(fr, y)
        c = tuple(_count(model, _name(d, ("C", i)), column) for i in range(mm.counters))
        configs.append(Configuration(q, c))
        counts.append(c)
        ys.append(y)
        nstar += y in sstar
    ops = _steps_from_counts(m, configs, "lossy")
    run = Run(tuple(configs), ops, "lossy")
    validate_run(m, run, m.initial())
    return DecodedRun(run, counts, ys, sstar=nstar)


def _staircase_fw(model, enc):
    """Follow S -> N -> next S along a forward grid; returns the S-points."""
    d = enc.dict
    fr = model.frame
    sv = model.valuation.get(_name(d, "S"), set())
    nv = model.valuation.get(_name(d, "N"), set())
    y = model.root
    if y not in sv:
        raise DecodeError("no S at the root")
    out, seen = [y], {y}
    while True:
        nxt = None
        for w in sorted((w for w in fr.successors(1, y) if w in nv), key=repr):
            succ = [u for u in fr.successors(0, w) if u in sv]
            if succ:
                nxt = max(succ, key=lambda u: len(fr.successors(0, u)))
                break
        if nxt is None or nxt in seen:
            return out
        out.append(nxt)
        seen.add(nxt)
        y = nxt


def _decode_lossy_fin(model, enc):
    d = enc.dict
    stairs = _staircase_fw(model, enc)
    start = model.valuation.get(_name(d, "start"), set())
    cut = next((k for k, y in enumerate(stairs) if y in start), None)
    if cut is None:
        raise DecodeError("no start column along the staircase")
    seg = stairs[:cut + 1]
    return _decode_lossy_segment(model, enc, [(None, y) for y in reversed(seg)])


def _decode_lossy_exp(model, enc):
    d = enc.dict
    stairs = _staircase_fw(model, enc)
    start = model.valuation.get(_name(d, "start"), set())
    marks = [k for k, y in enumerate(stairs) if y in start]
    out = []
    for a, b in zip(marks, marks[1:]):
        seg = stairs[a + 1:b + 1]
        out.append(_decode_lossy_segment(model, enc, [(None, y) for y in reversed(seg)]))
    return out


def _bw_staircase(model, enc, limit=None):
    """u_m (S-points) and v_m (N-points) going backward from the dead-end S."""
    d = enc.dict
    fr = model.frame
    sv = model.valuation.get(_name(d, "S"), set())
    nv = model.valuation.get(_name(d, "N"), set())
    reach = fr.successors(0, model.root)
    u0 = [x for x in reach if x in sv and not fr.successors(0, x)]
    if len(u0) != 1:
        raise DecodeError(f"expected one S-point without horizontal successors, found {len(u0)}")
    us, vs = [u0[0]], []
    limit = limit or len(fr.worlds)
    while len(us) < limit:
        u = us[-1]
        preds = [x for x in fr.worlds if x in nv and u in fr.successors(0, x)]
        if len(preds) != 1:
            break
        v = preds[0]
        nxt = [x for x in fr.successors(1, v) if x in sv]
        if len(nxt) != 1:
            break
        vs.append(v)
        us.append(nxt[0])
    return us, vs


def _decode_bw(model, enc, length=None):
    d, m = enc.dict, enc.machine
    fr = model.frame
    us, vs = _bw_staircase(model, enc, length)
    configs, counts = [], []
    for u in us:
        q = _unique_state(model, d, m, u)
        col = _column(fr, u)
        c = tuple(_count(model, _name(d, ("C", i)), col) for i in range(m.counters))
        configs.append(Configuration(q, c))
        counts.append(c)
    ops = []
    for k in range(1, len(us)):
        hits = [op for op in m.ops() if us[k] in model.valuation.get(_name(d, ("I", str(op))), ())]
        if len(hits) != 1:
            raise DecodeError(f"instruction marker not unique at {_fmt(us[k])}: {hits}")
        ops.append(hits[0])
    run = Run(tuple(configs), tuple(ops))
    try:
        validate_run(m, run, m.initial())
    except MachineError as e:
        raise DecodeError(str(e)) from None
    return DecodedRun(run, counts, us, vs)


def decode_run(model: Model, enc: CompiledEncoding, kind: str, length: int | None = None):
    """Extract the machine run a model encodes.

    kind is one of fw_fin, fw_rec, bw_inf, bw_rec, lossy_fin, lossy_exp; the
    latter returns one DecodedRun per start-delimited segment.
    """
    if enc.machine is None:
        raise DecodeError("encoding carries no machine")
    if kind == "fw_fin":
        return _decode_fw(model, enc, True)
    if kind == "fw_rec":
        dr = _decode_fw(model, enc, False)
        if length is not None and len(dr.run) > length:
            cfgs = dr.run.configs[:length]
            dr = DecodedRun(Run(cfgs, dr.run.ops[:length - 1]), dr.counts[:length], dr.staircase[:length])
        return dr
    if kind in ("bw_inf", "bw_rec"):
        return _decode_bw(model, enc, length)
    if kind == "lossy_fin":
        return _decode_lossy_fin(model, enc)
    if kind == "lossy_exp":
        return _decode_lossy_exp(model, enc)
    raise DecodeError(f"no decoder for kind {kind!r}")


# ---------------------------------------------------------------- backward claims

@dataclass
class ClaimsReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def text(self) -> str:
        if self.ok:
            return f"all backward claims hold for m < {self.checked}\n"
        return "\n".join(self.violations) + "\n"


def verify_backward_claims(model: Model, enc: CompiledEncoding, K: int) -> ClaimsReport:
    """Staircase, rank, half-grid and counting claims for m < K-1."""
    d, m = enc.dict, enc.machine
    fr = model.frame
    N = _name(d, "N")
    nv = model.valuation.get(N, set())
    sv = model.valuation.get(_name(d, "S"), set())
    bad = []
    try:
        us, vs = _bw_staircase(model, enc, K)
    except DecodeError as e:
        return ClaimsReport(0, [f"staircase: {e}"])
    upto = K - 1
    if len(us) < upto:
        bad.append(f"staircase: only {len(us)} S-points found, need {upto}")
    upto = min(upto, len(us))
    dia_n = truth_set(model, Dia0(Var(N)))
    for k in range(upto):
        col = _column(fr, us[k])
        s_here = [x for x in col if x in sv]
        if s_here != [us[k]]:
            bad.append(f"m={k}: S not unique in Column_m ({len(s_here)} points)")
        n_here = [x for x in col if x in nv]
        if k > 0 and len(n_here) != 1:
            bad.append(f"m={k}: {len(n_here)} N-points in Column_m")
        ranks = {horizontal_rank(fr, x) for x in col}
        if len(ranks) != 1 or INFINITE in ranks:
            bad.append(f"m={k}: horizontal rank not constant on Column_m ({sorted(map(str, ranks))})")
        half = {}
        for n in range(k):
            xs = [x for x in col if us[n] in fr.successors(0, x)]
            if len(xs) != 1:
                bad.append(f"m={k}, n={n}: {len(xs)} half-grid points reach u_n")
            else:
                half[n] = xs[0]
        if len(set(half.values())) != len(half):
            bad.append(f"m={k}: half-grid points not pairwise distinct")
        want = {half[n] for n in half if n < k - 1}
        got = {x for x in col if x in dia_n}
        if got != want:
            bad.append(f"m={k}: <0>N points {sorted(map(_fmt, got))} differ from x_(m,n), n<m-1")
        want_nn = set(half.values())
        got_nn = {x for x in col if x in dia_n or x in nv}
        if got_nn != want_nn:
            bad.append(f"m={k}: N-or-<0>N points differ from the half-grid points")
    allc = {i: truth_set(model, _allc_formula(d, i)) for i in range(m.counters)}
    for k in range(upto - 1):
        here, nxt = _column(fr, us[k]), _column(fr, us[k + 1])
        for i in range(m.counters):
            a = _count(model, _name(d, ("C", i)), here)
            b = sum(1 for x in nxt if x in allc[i])
            if a != b:
                bad.append(f"m={k}: |C{i} in Column_m| = {a} but |AllC{i} in Column_m+1| = {b}")
    return ClaimsReport(upto, bad)


def _allc_formula(d, i):
    from .reductions import _allc
    return _allc(d, i)


# ---------------------------------------------------------------- conveniences

def canonical_run(m: CounterMachine, kind: str, length: int | None = None,
                  q_r: str | None = None, visits: int = 1, cap: int | None = None) -> Run:
    """A run usable for the witness kinds, found by bounded search."""
    if kind in ("fw_fin",):
        v = bounded_oracle(m, "reachability", (length or 8) - 1, target=q_r)
    elif kind == "lossy_fin":
        v = bounded_oracle(m, "lossy-reachability", (length or 8) - 1, target=q_r, cap=cap)
    elif kind == "lossy_exp":
        k = visits + (q_r == m.states[0])
        v = bounded_oracle(m, "lossy-omega-reachability", (length or 12) - 1, target=q_r,
                           k=k, cap=cap)
    else:
        v = bounded_oracle(m, "nontermination", (length or 8) - 1)
    if not v.yes:
        raise WitnessError(f"no suitable run within the search bound for {kind}")
    return v.witness


def spec_for(enc: CompiledEncoding, kind: str, runs, K: int | None = None, width: int = 2,
             visits=None) -> WitnessSpec:
    runs = [runs] if isinstance(runs, Run) else list(runs)
    return WitnessSpec(kind, enc.machine if kind in ("fw_fin", "lossy_fin") else enc.compiled_machine or enc.machine,
                       runs, enc.dict, K=K, q_r=enc.params.get("q_r"), width=width, visits=visits)


def tick_coherence(model: Model, enc: CompiledEncoding, names=("N", "S")) -> list[str]:
    """Tick-diamond versus the derived step relation, and interval uniformity.

    For every subformula psi of grid*, the Tick diamond of psi must hold
    exactly where some R^M-successor column satisfies psi in the same row.
    Each P in `names` must be constant on the ~-classes of every row.
    """
    from .frames import derive_tick_structure
    from .reductions import bdia0, compile_grid
    from .formula import subformula_list

    d = enc.dict
    tick = Var(_name(d, "Tick"))
    ds = derive_tick_structure(model, tick.name)
    fr = model.frame
    succ: dict = {}
    for x, z in ds.rel:
        succ.setdefault(x, []).append(z)
    grid = conj(f for _, f in compile_grid("star", d).conjuncts)
    bad = []
    for psi in subformula_list(grid):
        ts = truth_set(model, psi)
        want = {(x, v) for (x, v) in fr.worlds if any((z, v) in ts for z in succ.get(x, ()))}
        got = truth_set(model, bdia0(psi, tick))
        if got != want:
            diff = sorted(got ^ want, key=repr)
            bad.append(f"tick diamond differs from R^M on {psi} at {diff[0]!r}")
    for p in names:
        pv = model.valuation.get(_name(d, p), frozenset())
        for (x, v) in sorted(pv, key=repr):
            for z in ds.interval(x):
                if (z, v) not in pv:
                    bad.append(f"Interval_{p}: {p} at ({x},{v}) but not at ({z},{v})")
    return bad
