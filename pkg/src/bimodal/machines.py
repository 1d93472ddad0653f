"""Minsky counter machines: reliable and lossy steps, runs and bounded oracles."""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

__all__ = [
    "Op", "CounterMachine", "Configuration", "Run", "MachineError",
    "successors", "lossy_step", "lossy_step_bruteforce", "validate_run",
    "bounded_runs", "bounded_oracle", "Verdict", "prefill", "reach_normalized",
    "parse_machine", "dump_machine", "M_A", "M_B", "M_C",
]


class MachineError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Op:
    kind: str  # inc | dec | zero
    counter: int

    def __post_init__(self):
        if self.kind not in ("inc", "dec", "zero"):
            raise MachineError(f"unknown op kind {self.kind!r}")
        if self.counter < 0:
            raise MachineError("counter index must be >= 0")

    def __str__(self):
        return f"{self.kind}{self.counter}"


@dataclass(frozen=True)
class Configuration:
    state: str
    counters: tuple

    def __post_init__(self):
        if any(c < 0 for c in self.counters):
            raise MachineError(f"negative counter in {self.counters}")

    def __str__(self):
        return f"<{self.state},({','.join(map(str, self.counters))})>"


@dataclass(frozen=True)
class Run:
    configs: tuple
    ops: tuple  # ops[k] labels the step configs[k] -> configs[k+1]
    kind: str = "reliable"

    def __len__(self):
        return len(self.configs)

    def __str__(self):
        parts = [str(self.configs[0])]
        for op, c in zip(self.ops, self.configs[1:]):
            parts.append(f"-{op}-> {c}")
        return " ".join(parts)


class CounterMachine:
    """States Q, terminal states H, N >= 2 counters and instruction sets I_q."""

    def __init__(self, states: Sequence[str], halt: Sequence[str], counters: int,
                 instructions: dict, name: str = "M"):
        self.states = tuple(states)
        self.halt = frozenset(halt)
        self.counters = counters
        self.name = name
        if counters < 2:
            raise MachineError("machines need at least two counters")
        if len(set(self.states)) != len(self.states):
            raise MachineError("duplicate state names")
        if not self.halt <= set(self.states):
            raise MachineError("terminal states must be states")
        instr = {}
        for q in self.states:
            lst = tuple(instructions.get(q, ()))
            if q in self.halt and lst:
                raise MachineError(f"terminal state {q!r} has instructions")
            if q not in self.halt and not lst:
                raise MachineError(f"non-terminal state {q!r} has no instructions")
            for op, q2 in lst:
                if op.counter >= counters:
                    raise MachineError(f"counter index {op.counter} out of range")
                if q2 not in self.states:
                    raise MachineError(f"unknown target state {q2!r}")
            instr[q] = lst
        for q in instructions:
            if q not in self.states:
                raise MachineError(f"instructions for unknown state {q!r}")
        self.instructions = instr

    def ops(self) -> list:
        """Distinct operations in first-use order."""
        seen = []
        for q in self.states:
            for op, _ in self.instructions[q]:
                if op not in seen:
                    seen.append(op)
        return seen

    def initial(self, state: str | None = None) -> Configuration:
        return Configuration(state or self.states[0], (0,) * self.counters)

    def check_state(self, q: str):
        if q not in self.states:
            raise MachineError(f"unknown state {q!r}")

    def __eq__(self, other):
        return (isinstance(other, CounterMachine) and self.states == other.states
                and self.halt == other.halt and self.counters == other.counters
                and self.instructions == other.instructions)

    def __hash__(self):
        return hash((self.states, self.halt, self.counters))

    def __repr__(self):
        return f"CounterMachine({self.name}, |Q|={len(self.states)}, N={self.counters})"

    def digest(self) -> str:
        return hashlib.sha256(dump_machine(self).encode()).hexdigest()[:16]


def _apply(op: Op, c: tuple):
    i = op.counter
    if op.kind == "inc":
        return c[:i] + (c[i] + 1,) + c[i + 1:]
    if op.kind == "dec":
        return c[:i] + (c[i] - 1,) + c[i + 1:] if c[i] > 0 else None
    return c if c[i] == 0 else None


def successors(m: CounterMachine, cfg: Configuration) -> list:
    """Reliable successors as (op, configuration) in instruction order."""
    out = []
    for op, q2 in m.instructions.get(cfg.state, ()):
        c2 = _apply(op, cfg.counters)
        if c2 is not None:
            out.append((op, Configuration(q2, c2)))
    return out


def lossy_step(m: CounterMachine, cfg: Configuration, cfg2: Configuration):
    """An op iota with cfg ->lossy cfg2, or None (closed form).

    Taking the largest admissible intermediate sigma1 is optimal, which gives:
    inc: c2_i <= c_i + 1; dec: c_i >= 1 and c2_i <= c_i - 1; zero: c2_i = 0;
    every other counter c2_j <= c_j.
    """
    c, d = cfg.counters, cfg2.counters
    for op, q2 in m.instructions.get(cfg.state, ()):
        if q2 != cfg2.state:
            continue
        i = op.counter
        if any(d[j] > c[j] for j in range(len(c)) if j != i):
            continue
        if op.kind == "inc" and d[i] <= c[i] + 1:
            return op
        if op.kind == "dec" and c[i] >= 1 and d[i] <= c[i] - 1:
            return op
        if op.kind == "zero" and d[i] == 0:
            return op
    return None


def lossy_step_bruteforce(m: CounterMachine, cfg: Configuration, cfg2: Configuration):
    """Oracle: search sigma1 <= cfg explicitly and compare sigma2 >= cfg2."""
    c, d = cfg.counters, cfg2.counters
    for op, q2 in m.instructions.get(cfg.state, ()):
        if q2 != cfg2.state:
            continue
        for c1 in itertools.product(*(range(x + 1) for x in c)):
            c2 = _apply(op, c1)
            if c2 is not None and all(a >= b for a, b in zip(c2, d)):
                return op
    return None


def validate_run(m: CounterMachine, run: Run, start: Configuration | None = None):
    """Raise MachineError naming the first bad step; return run on success."""
    if start is not None and run.configs[0] != start:
        raise MachineError(f"run starts at {run.configs[0]}, expected {start}")
    if len(run.ops) != len(run.configs) - 1:
        raise MachineError("op labels do not match the number of steps")
    for k, (a, op, b) in enumerate(zip(run.configs, run.ops, run.configs[1:])):
        if run.kind == "reliable":
            ok = (op, b) in successors(m, a)
        else:
            ok = (op, b.state) in m.instructions.get(a.state, ()) and lossy_step(m, a, b) is not None \
                and _lossy_with(op, a, b)
        if not ok:
            cands = [str(o) for o, _ in m.instructions.get(a.state, ())]
            raise MachineError(f"step {k}: {a} -{op}-> {b} is not a {run.kind} step "
                               f"(candidates: {', '.join(cands) or 'none'})")
    return run


def _lossy_with(op: Op, a: Configuration, b: Configuration) -> bool:
    c, d, i = a.counters, b.counters, op.counter
    if any(d[j] > c[j] for j in range(len(c)) if j != i):
        return False
    if op.kind == "inc":
        return d[i] <= c[i] + 1
    if op.kind == "dec":
        return c[i] >= 1 and d[i] <= c[i] - 1
    return d[i] == 0


def lossy_successors(m: CounterMachine, cfg: Configuration, cap: int) -> list:
    out = []
    for op, q2 in m.instructions.get(cfg.state, ()):
        for d in itertools.product(range(cap + 1), repeat=m.counters):
            b = Configuration(q2, d)
            if _lossy_with(op, cfg, b):
                out.append((op, b))
    return out


def bounded_runs(m: CounterMachine, start: Configuration, depth: int, kind: str = "reliable",
                 cap: int | None = None) -> Iterator[Run]:
    """Depth-first enumeration of all runs with at most `depth` configurations."""
    if depth < 1:
        raise MachineError("depth must be >= 1")
    if kind == "lossy" and cap is None:
        raise MachineError("lossy enumeration needs an explicit counter cap")
    stack = [((start,), ())]
    while stack:
        cfgs, ops = stack.pop()
        yield Run(cfgs, ops, kind)
        if len(cfgs) >= depth:
            continue
        last = cfgs[-1]
        succ = successors(m, last) if kind == "reliable" else lossy_successors(m, last, cap)
        for op, c2 in reversed(succ):
            assert min(c2.counters) >= 0
            stack.append((cfgs + (c2,), ops + (op,)))


@dataclass(frozen=True)
class Verdict:
    answer: str  # yes-within-bound | no-within-bound
    problem: str
    params: tuple
    witness: Run | None = None

    @property
    def yes(self) -> bool:
        return self.answer == "yes-within-bound"

    def __str__(self):
        return f"{self.problem}{dict(self.params)}: {self.answer}"


def bounded_oracle(m: CounterMachine, problem: str, depth: int, target: str | None = None,
                   k: int = 1, cap: int | None = None, start: Configuration | None = None) -> Verdict:
    """Bounded versions of the five decision problems.

    `depth` counts steps, so runs of up to depth+1 configurations are explored.
    Problems: nontermination, reachability, recurrence, lossy-reachability,
    lossy-omega-reachability (visit target at least k times, lossy).
    """
    start = start or m.initial()
    lossy = problem.startswith("lossy")
    if lossy and cap is None:
        cap = depth + max(start.counters)
    params = (("depth", depth), ("target", target), ("k", k), ("cap", cap))
    kind = "lossy" if lossy else "reliable"
    for run in bounded_runs(m, start, depth + 1, kind, cap):
        states = [c.state for c in run.configs]
        if problem == "nontermination":
            hit = len(run.configs) == depth + 1
        elif problem in ("reachability", "lossy-reachability"):
            hit = states[-1] == target
        elif problem in ("recurrence", "lossy-omega-reachability"):
            hit = states.count(target) >= k
        else:
            raise MachineError(f"unknown problem {problem!r}")
        if hit:
            return Verdict("yes-within-bound", problem, params, run)
    return Verdict("no-within-bound", problem, params)


# ---------------------------------------------------------------- transformers

def prefill(m: CounterMachine, sigma0: Configuration) -> CounterMachine:
    """M^{sigma0}: first increments counters up to sigma0, then behaves as M."""
    states, instr = [], {}
    prefix = []
    for i, c in enumerate(sigma0.counters):
        prefix += [i] * c
    names = [f"pre{k}" for k in range(len(prefix))]
    for nm in names:
        if nm in m.states:
            raise MachineError(f"state name {nm!r} clashes with the prefill chain")
    chain = names + [sigma0.state]
    for k, i in enumerate(prefix):
        instr[chain[k]] = [(Op("inc", i), chain[k + 1])]
    states = names + list(m.states)
    for q in m.states:
        if q not in m.halt:
            instr[q] = list(m.instructions[q])
    return CounterMachine(states, m.halt, m.counters, instr, name=f"{m.name}^pre")


def reach_normalized(m: CounterMachine, q_r: str) -> CounterMachine:
    """Make q_r non-terminal with the single always-enabled step inc0 -> q_r.

    Runs up to the first visit of q_r are unchanged, so reachability of q_r
    is preserved; the finite-reachability encodings are compiled against it.
    """
    m.check_state(q_r)
    instr = {q: list(m.instructions[q]) for q in m.states if q not in m.halt}
    instr[q_r] = [(Op("inc", 0), q_r)]
    return CounterMachine(m.states, m.halt - {q_r}, m.counters, instr, name=f"{m.name}[{q_r}]")


# ---------------------------------------------------------------- text format

_LINE = re.compile(r"^(?P<q>[A-Za-z_][A-Za-z0-9_']*)\s*:\s*(?P<k>inc|dec|zero)\s+(?P<i>\d+)\s*->\s*(?P<q2>[A-Za-z_][A-Za-z0-9_']*)$")


def parse_machine(text: str, name: str = "M") -> CounterMachine:
    counters, states, halt = None, None, []
    instr: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("counters:"):
            counters = int(line.split(":", 1)[1])
        elif line.startswith("states:"):
            states = line.split(":", 1)[1].split()
        elif line.startswith("halt:"):
            halt = line.split(":", 1)[1].split()
        else:
            mt = _LINE.match(line)
            if not mt:
                raise MachineError(f"line {lineno}: cannot parse {raw!r}")
            instr.setdefault(mt["q"], []).append((Op(mt["k"], int(mt["i"])), mt["q2"]))
    if counters is None or states is None:
        raise MachineError("machine file needs 'counters:' and 'states:' lines")
    return CounterMachine(states, halt, counters, instr, name)


def dump_machine(m: CounterMachine) -> str:
    lines = [f"counters: {m.counters}", "states: " + " ".join(m.states),
             "halt: " + " ".join(q for q in m.states if q in m.halt)]
    for q in m.states:
        for op, q2 in m.instructions[q]:
            lines.append(f"{q}: {op.kind} {op.counter} -> {q2}")
    return "\n".join(lines) + "\n"


M_A = parse_machine("counters: 2\nstates: q0 q1 h\nhalt: h\nq0: inc 0 -> q1\nq1: dec 0 -> h\n", "M_A")
M_B = parse_machine("counters: 2\nstates: q0\nhalt:\nq0: zero 0 -> q0\n", "M_B")
M_C = parse_machine("counters: 2\nstates: q0 q1\nhalt: q1\nq0: dec 0 -> q1\n", "M_C")
