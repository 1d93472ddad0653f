import random

import pytest

from bimodal.fmp import FmpError, closure_step, dia1_demands, shrink
from bimodal.formula import parse, random_formula, subformula_list
from bimodal.frames import assemble, make_difference, make_linear, product
from bimodal.semantics import Model, check, random_valuation, truth_set


def _column(*p_at):
    fr = product(make_linear(1), make_difference(3, ["a", "b", "c"]))
    return Model(fr, {"P": {(0, x) for x in p_at}})


def test_closure_adds_least_witness_then_saturates():
    rec: list = []
    Y = closure_step(_column("b", "c"), 0, {"a"}, parse("<1>P"), rec)
    # b itself demands a P-witness other than b, so c follows
    assert Y == {"a", "b", "c"}
    assert rec[0][2] == "b"


def test_closure_without_demands_is_identity():
    assert closure_step(_column("b"), 0, {"a"}, parse("P & <0>P")) == {"a"}


def test_closure_of_closed_set():
    m = _column("b", "c")
    Y = closure_step(m, 0, {"a"}, parse("<1>P"))
    assert closure_step(m, 0, Y, parse("<1>P")) == Y


def test_closure_rejects_foreign_set():
    with pytest.raises(FmpError):
        closure_step(_column("b"), 0, {"z"}, parse("<1>P"))


def test_shrink_two_by_ten():
    fr = product(make_linear(2), make_difference(10))
    rng = random.Random(1)
    m = Model(fr, {"P": {w for w in fr.worlds if rng.random() < 0.3}}, (0, 0))
    phi = parse("<1>P")
    assert check(m, (0, 0), phi)
    small, trace = shrink(m, phi)
    assert len(small.frame.domains[0].worlds) <= 1 + 2 * 2 * 2
    assert check(small, (0, 0), phi)
    assert "per-step bound" in trace.dump()


def test_shrink_small_model_keeps_carrier():
    fr = product(make_linear(2), make_difference(2))
    m = Model(fr, {"P": {(0, 1), (1, 0), (1, 1)}}, (0, 0))
    small, _ = shrink(m, parse("<1>P & <0><1>P"))
    assert set(small.frame.worlds) == set(fr.worlds)


def test_shrink_rejects_non_grid():
    fr = assemble(make_linear(2), {0: make_difference(2), 1: make_difference(1)}, "decreasing")
    with pytest.raises(FmpError):
        shrink(Model(fr, {}, (0, 0)), parse("P"))


def test_dia1_demands():
    assert [str(x) for x in dia1_demands(parse("<1>(P & <1>Q)"))] == ["Q", "P & <1> Q"]


def _random_instance(rng, tag):
    h, v = rng.randint(1, 4), rng.randint(2, 8)
    if tag == "product":
        fr = product(make_linear(h), make_difference(v))
    else:
        sizes = sorted(rng.randint(1, v) for _ in range(h))
        fr = assemble(make_linear(h), {t: make_difference(s) for t, s in enumerate(sizes)},
                      "expanding")
    m = Model(fr, random_valuation(rng, fr, ("P", "Q"), 0.35))
    return m


@pytest.mark.parametrize("tag", ["product", "expanding"])
def test_shrink_preserves_truth_on_random_models(tag):
    rng = random.Random(31 if tag == "product" else 32)
    done = 0
    while done < 25:
        m = _random_instance(rng, tag)
        phi = random_formula(rng, ("P", "Q"), depth=4)
        root = next((w for w in m.frame.worlds if check(m, w, phi)), None)
        if root is None:
            continue
        small, trace = shrink(Model(m.frame, m.valuation, root), phi)
        for s in subformula_list(phi):
            assert truth_set(small, s) == truth_set(m, s) & set(small.frame.worlds)
        for st in trace.steps:
            assert st.after <= st.before + trace.bound_per_step
        assert check(small, root, phi)
        done += 1
