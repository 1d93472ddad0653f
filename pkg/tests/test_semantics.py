import random

import pytest

from bimodal.formula import TOP, Var, parse, random_formula
from bimodal.frames import (TwoFrame, assemble, make_difference, make_linear, product)
from bimodal.semantics import (BudgetExceeded, Model, ModelFormatError, SearchSpec, bounded_sat,
                               check, dump_model, load_model, naive_check, random_valuation,
                               satisfiable_in, truth_set, valid_in_frame)

P2 = product(make_linear(2), make_difference(2))


def _m():
    return Model(P2, {"P": {(1, 1)}})


@pytest.mark.parametrize("w, text, expected", [
    ((0, 1), "<0>P", True),
    ((0, 0), "<0>P", False),
    ((0, 0), "<0><1>P", True),
    ((1, 0), "true", True),
])
def test_check_examples(w, text, expected):
    assert check(_m(), w, parse(text)) is expected


def test_check_unknown_world():
    with pytest.raises(Exception):
        check(_m(), (5, 5), parse("P"))


def test_absent_variable_is_empty():
    assert not check(_m(), (0, 0), parse("Q"))


def test_dia_eq1_on_difference_column():
    fr = product(make_linear(1), make_difference(2, ["a", "b"]))
    phi = parse("<1>=1 P")
    assert check(Model(fr, {"P": {(0, "a")}}), (0, "a"), phi)
    assert not check(Model(fr, {"P": {(0, "a"), (0, "b")}}), (0, "a"), phi)


def test_satisfiable_in_returns_least_world():
    m = _m()
    assert satisfiable_in(m, parse("<0>P")) == (0, 1)
    assert satisfiable_in(m, parse("P & ~P")) is None
    assert satisfiable_in(m, parse("<0><1>P")) == (0, 0)


def test_valid_in_frame_examples():
    phi = parse("[1][0]P -> [0][1]P")
    assert valid_in_frame(P2, phi)
    exp = assemble(make_linear(2), {0: make_difference(1, ["a"]),
                                    1: make_difference(2, ["a", "b"])}, "expanding")
    assert not valid_in_frame(exp, phi)
    assert valid_in_frame(exp, TOP)


def test_valid_in_frame_budget():
    big = product(make_linear(4), make_difference(4))
    with pytest.raises(BudgetExceeded):
        valid_in_frame(big, parse("P & Q & R"), budget=1 << 10)


def test_check_agrees_with_naive_on_500():
    rng = random.Random(11)
    for _ in range(500):
        h, v = rng.randint(1, 3), rng.randint(1, 3)
        while h * v > 8:
            v -= 1
        fr = product(make_linear(h), make_difference(v))
        m = Model(fr, random_valuation(rng, fr, ("P", "Q")))
        phi = random_formula(rng, ("P", "Q"), depth=6)
        w = rng.choice(fr.worlds)
        assert check(m, w, phi) == naive_check(m, w, phi)


def test_check_agrees_with_naive_on_raw_frames():
    rng = random.Random(4)
    for _ in range(100):
        n = rng.randint(1, 5)
        pairs = [(a, b) for a in range(n) for b in range(n)]
        tf = TwoFrame(range(n), [p for p in pairs if rng.random() < 0.3],
                      [p for p in pairs if rng.random() < 0.3])
        m = Model(tf, random_valuation(rng, tf, ("P",)))
        phi = random_formula(rng, ("P",), depth=5)
        assert all(check(m, w, phi) == naive_check(m, w, phi) for w in tf.worlds)


def test_bounded_sat_finds_expected_model():
    r = bounded_sat(SearchSpec(parse("<0><1>P"), "product", 2, 2))
    assert r.found
    assert sorted(r.model.frame.horizontal.worlds) == [0, 1]
    assert check(r.model, r.world, parse("<0><1>P"))


def test_bounded_sat_exhaustion_is_not_a_claim():
    r = bounded_sat(SearchSpec(parse("P & ~P"), "product", 2, 2))
    assert r.status == "exhausted" and r.model is None
    assert "no model within bounds" in r.report()


def test_bounded_sat_depends_on_vertical_bound():
    phi = parse("<1>=1 P & <1>P")
    assert not bounded_sat(SearchSpec(phi, "product", 1, 1)).found
    assert bounded_sat(SearchSpec(phi, "product", 1, 2)).found


def test_bounded_sat_candidate_budget():
    r = bounded_sat(SearchSpec(parse("P & ~P"), "product", 3, 3, max_candidates=2))
    assert r.status == "budget"


@pytest.mark.parametrize("kw", [dict(hmax=0), dict(max_seconds=-1), dict(frame_class="wild")])
def test_search_spec_rejects_bad_bounds(kw):
    with pytest.raises(ValueError):
        SearchSpec(parse("P"), **kw)


def test_bounded_sat_is_deterministic():
    spec = SearchSpec(parse("<0>P & <1>~P"), "expanding", 2, 2)
    a, b = bounded_sat(spec), bounded_sat(spec)
    assert (a.frame_label, a.world, a.model.valuation) == (b.frame_label, b.world, b.model.valuation)


def test_monotone_in_bounds():
    rng = random.Random(8)
    for _ in range(15):
        phi = random_formula(rng, ("P",), depth=3)
        if bounded_sat(SearchSpec(phi, "product", 1, 2)).found:
            assert bounded_sat(SearchSpec(phi, "product", 2, 3)).found


@pytest.mark.parametrize("cls", ["product", "expanding", "decreasing", "omega", "commuting"])
def test_found_models_satisfy_formula(cls):
    phi = parse("<0>P & <1>Q")
    r = bounded_sat(SearchSpec(phi, cls, 2, 2, max_worlds=3))
    if r.found:
        assert check(r.model, r.world, phi)


def test_model_round_trip():
    rng = random.Random(1)
    fr = assemble(make_linear(3), {0: make_difference(1), 1: make_difference(2),
                                   2: make_difference(3)}, "expanding")
    m = Model(fr, random_valuation(rng, fr, ("P", "@S")), (0, 0))
    m2, meta = load_model(dump_model(m, {"K": 3}))
    assert meta == {"K": "3"}
    assert set(m2.frame.worlds) == set(fr.worlds)
    assert m2.frame.rel0 == fr.rel0 and m2.frame.rel1 == fr.rel1
    def nonempty(val):
        return {k: v for k, v in val.items() if v}
    assert nonempty(m2.valuation) == nonempty(m.valuation)
    assert m2.root == (0, 0)


def test_raw_model_round_trip():
    tf = TwoFrame(["a", "b"], [("a", "b")], [("b", "a")])
    m = Model(tf, {"P": {"b"}})
    m2, _ = load_model(dump_model(m))
    assert truth_set(m2, Var("P")) == {"b"} and m2.frame.rel0 == tf.rel0


@pytest.mark.parametrize("text", ["worlds a\n", "r0: a\nworlds: a\n", "bogus: 1\nworlds: a\n"])
def test_model_format_errors(text):
    with pytest.raises(ModelFormatError):
        load_model(text)
