import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from bimodal.machines import (M_A, M_B, M_C, Configuration, MachineError, Op, Run,
                              bounded_oracle, bounded_runs, dump_machine, lossy_step,
                              lossy_step_bruteforce, parse_machine, prefill, reach_normalized,
                              successors, validate_run)


def C(q, *c):
    return Configuration(q, tuple(c) if c else (0, 0))


@pytest.mark.parametrize("m, cfg, expected", [
    (M_A, C("q0"), [(Op("inc", 0), C("q1", 1, 0))]),
    (M_A, C("q1"), []),
    (M_B, C("q0"), [(Op("zero", 0), C("q0"))]),
    (M_A, C("h"), []),
])
def test_successors(m, cfg, expected):
    assert successors(m, cfg) == expected


def test_lossy_examples():
    assert lossy_step(M_A, C("q0", 3, 0), C("q1", 1, 0)) == Op("inc", 0)
    assert lossy_step(M_A, C("q0"), C("q1", 2, 0)) is None


def test_reliable_steps_are_lossy():
    for m in (M_A, M_B, M_C):
        for q in m.states:
            for c in itertools.product(range(3), repeat=2):
                for op, c2 in successors(m, Configuration(q, c)):
                    assert lossy_step(m, Configuration(q, c), c2) is not None


BRANCH = parse_machine("""counters: 2
states: a b c
halt: c
a: inc 0 -> b
a: dec 1 -> a
b: zero 1 -> c
b: dec 0 -> a
""")


def test_lossy_closed_form_matches_bruteforce_1000():
    rng = random.Random(3)
    for _ in range(1000):
        m = rng.choice([M_A, M_B, M_C, BRANCH])
        q, q2 = rng.choice(m.states), rng.choice(m.states)
        a = Configuration(q, (rng.randint(0, 3), rng.randint(0, 3)))
        b = Configuration(q2, (rng.randint(0, 4), rng.randint(0, 4)))
        assert (lossy_step(m, a, b) is None) == (lossy_step_bruteforce(m, a, b) is None)


@given(st.tuples(st.integers(0, 4), st.integers(0, 4)), st.tuples(st.integers(0, 5), st.integers(0, 5)))
@settings(max_examples=200, deadline=None)
def test_lossy_property(c, d):
    for q, q2 in itertools.product(BRANCH.states, repeat=2):
        a, b = Configuration(q, c), Configuration(q2, d)
        assert (lossy_step(BRANCH, a, b) is None) == (lossy_step_bruteforce(BRANCH, a, b) is None)


def test_bounded_runs_examples():
    runs = list(bounded_runs(M_A, C("q0"), 3))
    maximal = [r for r in runs if len(r) == 3]
    assert len(maximal) == 1 and maximal[0].configs[-1] == C("h")
    assert [len(r) for r in bounded_runs(M_C, C("q0"), 5)] == [1]
    longest = max(bounded_runs(M_B, C("q0"), 4), key=len)
    assert [c.state for c in longest.configs] == ["q0"] * 4


def test_bounded_runs_errors():
    with pytest.raises(MachineError):
        list(bounded_runs(M_A, C("q0"), 0))
    with pytest.raises(MachineError):
        list(bounded_runs(M_A, C("q0"), 2, "lossy"))


def test_lossy_runs_are_valid():
    for r in bounded_runs(BRANCH, C("a", 1, 1), 3, "lossy", cap=2):
        validate_run(BRANCH, r)


@pytest.mark.parametrize("m, problem, kw, yes", [
    (M_B, "recurrence", dict(target="q0", k=3, depth=5), True),
    (M_A, "reachability", dict(target="h", depth=2), True),
    (M_C, "reachability", dict(target="q1", depth=10), False),
    (M_B, "nontermination", dict(depth=6), True),
    (M_A, "nontermination", dict(depth=3), False),
    (M_A, "lossy-reachability", dict(target="h", depth=2), True),
    (M_B, "lossy-omega-reachability", dict(target="q0", k=4, depth=3), True),
])
def test_bounded_oracle(m, problem, kw, yes):
    v = bounded_oracle(m, problem, **kw)
    assert v.yes is yes
    assert "within-bound" in str(v)
    if yes:
        validate_run(m, v.witness)


def test_oracle_unknown_problem():
    with pytest.raises(MachineError):
        bounded_oracle(M_A, "halting", depth=2)


def test_validate_run_names_bad_step():
    bad = Run((C("q0"), C("q1", 2, 0)), (Op("inc", 0),))
    with pytest.raises(MachineError, match="step 0"):
        validate_run(M_A, bad)


def test_prefill_reaches_sigma0():
    sigma0 = C("q1", 2, 1)
    m = prefill(M_A, sigma0)
    run = max(bounded_runs(m, m.initial(), 4), key=len)
    assert run.configs[-1] == sigma0


def test_reach_normalized_keeps_reachability():
    m = reach_normalized(M_A, "h")
    assert "h" not in m.halt
    for d in range(1, 5):
        assert bounded_oracle(M_A, "reachability", d, "h").yes == \
            bounded_oracle(m, "reachability", d, "h").yes


@pytest.mark.parametrize("text", [
    "counters: 1\nstates: a\nhalt: a\n",
    "counters: 2\nstates: a\nhalt:\na: inc 5 -> a\n",
    "counters: 2\nstates: a\nhalt:\na: inc 0 -> z\n",
    "counters: 2\nstates: a\nhalt:\n",
    "counters: 2\nstates: a\nhalt:\na: jump 0 -> a\n",
])
def test_machine_errors(text):
    with pytest.raises(MachineError):
        parse_machine(text)


def test_machine_text_round_trip(corpus):
    for m in corpus.values():
        assert parse_machine(dump_machine(m)) == m
