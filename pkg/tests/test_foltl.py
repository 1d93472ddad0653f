import random

import pytest
from hypothesis import given, settings, strategies as st

from bimodal.formula import Dia0, Dia1, Var, dia_eq1, box, parse
from bimodal.frames import GridTwoFrame, make_linear
from bimodal.foltl import (MODES, DiaF, ExistsNe, FAnd, FNeg, FoltlError, FoltlModel, Pred,
                           box_f, dagger, exists, exists_eq1, exists_ge2, f_iff, f_or,
                           foltl_check, foltl_depth, foltl_text, parse_foltl, random_foltl,
                           random_model, star, undagger, unstar)
from bimodal.semantics import check


def _two_instants():
    return FoltlModel(make_linear(2), {0: ["a", "b"], 1: ["a", "b"]}, {(1, "P"): {"a"}})


def test_future_diamond_example():
    m = _two_instants()
    phi = DiaF(Pred("P"))
    assert foltl_check(m, 0, "a", phi)
    assert not foltl_check(m, 0, "b", phi)


def test_element_outside_domain():
    m = FoltlModel(make_linear(2), {0: ["b"], 1: ["a", "b"]}, mode="expanding")
    with pytest.raises(FoltlError):
        foltl_check(m, 0, "a", Pred("P"))


def test_future_diamond_needs_membership():
    m = FoltlModel(make_linear(2), {0: ["a", "b"], 1: ["b"]}, {(1, "P"): {"b"}}, "decreasing")
    assert not foltl_check(m, 0, "a", DiaF(Pred("P")))
    assert foltl_check(m, 0, "b", DiaF(Pred("P")))
    # a has left the domain at 1, so even the quantified future fails
    assert not foltl_check(m, 0, "a", DiaF(exists(Pred("P"))))


@pytest.mark.parametrize("kw", [
    dict(domains={0: ["a"], 1: []}),
    dict(domains={0: ["a"], 1: ["b"]}, mode="expanding"),
    dict(domains={0: ["a"], 1: ["a"]}, mode="sideways"),
    dict(domains={0: ["a"], 1: ["a"]}, interp={(0, "P"): {"z"}}),
])
def test_model_validation(kw):
    with pytest.raises(FoltlError):
        FoltlModel(make_linear(2), **kw)


def _points(m):
    return [(t, a) for t in m.timeline.worlds for a in m.domains[t]]


def test_quantifier_identities_on_random_models():
    rng = random.Random(9)
    for _ in range(20):
        m = random_model(rng, rng.choice(MODES))
        phi = random_foltl(rng, depth=2)
        lhs = ExistsNe(phi)
        rhs = f_or(FAnd(FNeg(phi), exists(phi)), exists_ge2(phi))
        for t, a in _points(m):
            ext = {b for b in m.domains[t] if foltl_check(m, t, b, phi)}
            assert foltl_check(m, t, a, exists(phi)) == bool(ext)
            assert foltl_check(m, t, a, exists_ge2(phi)) == (len(ext) >= 2)
            assert foltl_check(m, t, a, exists_eq1(phi)) == (len(ext) == 1)
            assert foltl_check(m, t, a, f_iff(lhs, rhs))


@pytest.mark.parametrize("text, bimodal", [
    ("E!= x F> Lucky(x)", "<1><0>Lucky"),
    ("P(x)", "P"),
    ("[F] E=1 x Dog(x)", "[0] <1>=1 Dog"),
])
def test_star_examples(text, bimodal):
    assert star(parse_foltl(text)) is parse(bimodal)


def test_star_unstar_inverse():
    rng = random.Random(5)
    for _ in range(200):
        phi = random_foltl(rng, depth=4)
        assert unstar(star(phi)) == phi


@given(st.integers(0, 10 ** 6))
@settings(max_examples=150, deadline=None)
def test_parse_print_round_trip(seed):
    phi = random_foltl(random.Random(seed), depth=4)
    assert parse_foltl(foltl_text(phi)) == phi


def test_parser_rejects_bimodal_operators():
    with pytest.raises(Exception):
        parse_foltl("<1> P(x)")


def test_depth_and_sugar():
    assert foltl_depth(parse_foltl("F> E!= x P(x)")) == 2
    assert box_f(Pred("P")) == FNeg(DiaF(FNeg(Pred("P"))))


@pytest.mark.parametrize("mode", ["constant", "expanding", "decreasing"])
def test_dagger_round_trip(mode):
    rng = random.Random(len(mode))
    for _ in range(50):
        m = random_model(rng, mode)
        assert undagger(dagger(m)) == m


def test_dagger_shapes():
    const = dagger(_two_instants())
    assert isinstance(const.frame, GridTwoFrame) and const.frame.tag == "product"
    assert const.valuation["P"] == {(1, "a")}
    exp = FoltlModel(make_linear(2), {0: ["a"], 1: ["a", "b"]}, mode="expanding")
    assert dagger(exp).frame.tag == "expanding"


@pytest.mark.parametrize("mode", MODES)
def test_correspondence_pointwise(mode):
    rng = random.Random(100 + MODES.index(mode))
    for _ in range(50):
        m = random_model(rng, mode)
        phi = random_foltl(rng, depth=rng.randint(0, 4))
        bm, sp = dagger(m), star(phi)
        for t, a in _points(m):
            assert foltl_check(m, t, a, phi) == check(bm, (t, a), sp)
