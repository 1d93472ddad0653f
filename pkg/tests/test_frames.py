import random

import pytest

from bimodal.formula import parse
from bimodal.frames import (INFINITE, TOP_POINT, Frame, FrameError, GridTwoFrame, TwoFrame,
                            assemble, check_property, derive_tick_structure, grid_candidates,
                            horizontal_rank, make_difference, make_linear,
                            make_omega_plus_one_reversed, product)
from bimodal.semantics import Model, valid_in_frame

COMMUTATOR = ["[1][0]P -> [0][1]P", "[0][1]P -> [1][0]P", "<0>[1]P -> [1]<0>P"]


def test_constructors():
    assert make_linear(3).rel == {(0, 1), (0, 2), (1, 2)}
    assert len(make_difference(3).rel) == 6
    om = make_omega_plus_one_reversed(2)
    assert set(om.worlds) == {TOP_POINT, 0, 1, 2}
    assert om.rel == {(TOP_POINT, 0), (TOP_POINT, 1), (TOP_POINT, 2), (2, 1), (2, 0), (1, 0)}


@pytest.mark.parametrize("fn", [make_linear, make_difference, make_omega_plus_one_reversed])
def test_constructors_reject_empty(fn):
    with pytest.raises(FrameError):
        fn(0)


def test_product_small():
    p = product(make_linear(2), make_difference(2))
    assert len(p.worlds) == 4
    assert p.rel0 == {((0, j), (1, j)) for j in range(2)}
    assert p.rel1 == {((i, 0), (i, 1)) for i in range(2)} | {((i, 1), (i, 0)) for i in range(2)}
    one = product(make_linear(1), make_difference(1))
    assert len(one.worlds) == 1 and not one.rel0 and not one.rel1


def test_product_validates_commutator_formulas():
    p = product(make_linear(3), make_difference(4))
    for f in COMMUTATOR:
        assert valid_in_frame(p, parse(f))


def test_assemble_expanding_and_inclusion_error():
    doms = {0: make_difference(1, ["a"]), 1: make_difference(2, ["a", "b"])}
    e = assemble(make_linear(2), doms, "expanding")
    assert len(e.worlds) == 3
    assert e.rel0 == {((0, "a"), (1, "a"))}
    with pytest.raises(FrameError):
        assemble(make_linear(2), doms, "decreasing")
    assert valid_in_frame(e, parse("[0][1]P -> [1][0]P"))
    assert valid_in_frame(e, parse("<0>[1]P -> [1]<0>P"))
    assert not valid_in_frame(e, parse("[1][0]P -> [0][1]P"))


def test_grid_invariants_after_constructors():
    for fr in (product(make_linear(3), make_difference(2)),
               assemble(make_linear(3), {0: make_difference(1), 1: make_difference(2),
                                         2: make_difference(3)}, "expanding")):
        for a, b in fr.rel0:
            assert a[1] == b[1] and (a[0], b[0]) in fr.horizontal.rel
        for a, b in fr.rel1:
            assert a[0] == b[0] and a[1] != b[1]


@pytest.mark.parametrize("fr, prop, expected", [
    (product(make_linear(2), make_difference(2)), "commute", True),
    (product(make_linear(2), make_difference(2)), "confluent", True),
    (make_difference(3), "pseudo-equivalence", True),
    (make_difference(3), "weak-order", False),
    (make_linear(3), "weak-order", True),
    (make_linear(3), "dense", False),
    (make_linear(3), "linear-order", True),
    (Frame([0], [(0, 0)]), "dense", True),
    (make_omega_plus_one_reversed(3), "rooted", True),
    (Frame([0, 1], []), "rooted", False),
])
def test_check_property(fr, prop, expected):
    assert check_property(fr, prop) is expected


def test_unknown_property():
    with pytest.raises(FrameError):
        check_property(make_linear(2), "shiny")


def test_one_sided_commutation_is_not_enough():
    # R0;R1 strictly inside R1;R0: only commute-left holds
    tf = TwoFrame([0, 1, 2], [(1, 2)], [(0, 1)])
    assert check_property(tf, "commute-right") != check_property(tf, "commute-left")
    assert not check_property(tf, "commute")
    assert not all(valid_in_frame(tf, parse(f)) for f in COMMUTATOR)


def test_symmetric_commute_implies_confluent():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        n = rng.randint(1, 4)
        pairs = [(a, b) for a in range(n) for b in range(n)]
        r0 = [p for p in pairs if rng.random() < 0.4]
        r1 = {p for p in pairs if rng.random() < 0.4}
        r1 |= {(b, a) for a, b in r1}
        tf = TwoFrame(range(n), r0, r1)
        if check_property(tf, "commute"):
            seen += 1
            assert check_property(tf, "confluent")
    assert seen > 10


def test_horizontal_rank():
    p = product(make_linear(3), make_difference(2))
    assert horizontal_rank(p, (0, 1)) == 2
    assert horizontal_rank(p, (2, 0)) == 0
    loop = TwoFrame([0], [(0, 0)], [])
    assert horizontal_rank(loop, 0) is INFINITE


def test_modally_discrete_finite_shadow():
    assert check_property(make_linear(4), "modally-discrete")
    # a cluster sitting above a further point
    fr = Frame([0, 1, 2], [(0, 1), (1, 0), (0, 0), (1, 1), (0, 2), (1, 2)])
    assert check_property(fr, "weak-order")
    assert not check_property(fr, "modally-discrete")


def _tick_model(ticks):
    fr = product(make_linear(len(ticks)), make_difference(1))
    return Model(fr, {"T": {(h, 0) for h, t in enumerate(ticks) if t}}, (0, 0))


def test_tick_structure_alternating_blocks():
    ds = derive_tick_structure(_tick_model([1, 1, 0, 0]), "T")
    assert ds.rel == {(0, 2), (0, 3), (1, 2), (1, 3)}
    assert ds.interval(0) == {0, 1} and ds.interval(3) == {2, 3}
    assert ds.violations() == []


def test_tick_structure_all_tick():
    ds = derive_tick_structure(_tick_model([1, 1, 1]), "T")
    assert ds.rel == frozenset()
    assert all(ds.interval(x) == {0, 1, 2} for x in range(3))


def test_tick_structure_rejects_non_uniform_tick():
    fr = product(make_linear(2), make_difference(2))
    m = Model(fr, {"T": {(0, 0)}}, (0, 0))
    with pytest.raises(FrameError):
        derive_tick_structure(m, "T")


def test_tick_structure_on_random_block_models():
    rng = random.Random(2)
    for _ in range(30):
        ticks, cur = [], rng.random() < 0.5
        while len(ticks) < 7:
            ticks += [cur] * rng.randint(1, 3)
            cur = not cur
        assert derive_tick_structure(_tick_model(ticks[:7]), "T").violations() == []


@pytest.mark.parametrize("kind", ["product", "expanding", "decreasing", "omega"])
def test_grid_candidates_are_ordered_and_tagged(kind):
    cands = grid_candidates(kind, 2, 2)
    sizes = [len(fr.worlds) for _, fr, _ in cands]
    assert sizes == sorted(sizes)
    for label, fr, roots in cands:
        assert isinstance(fr, GridTwoFrame) and roots
