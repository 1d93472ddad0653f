import random

import pytest

from bimodal.formula import (TOP, Dia0, Dia1, Var, VarDictionary, modal_depth, parse,
                             random_formula, subformula_list, to_text, variables)
from bimodal.machines import M_A, M_B, M_C, Op
from bimodal.reductions import (GRID_VARIANTS, TARGETS, CompiledEncoding, EncodingError,
                                bullet_translate, compile_counter_layer, compile_grid,
                                compile_interval, compile_machine, compile_op_gadget,
                                diff_to_linear, dump_encoding, load_encoding,
                                product_to_decreasing, relativize)
from bimodal.semantics import SearchSpec, bounded_sat

from make_golden import CASES
from conftest import GOLDEN


@pytest.mark.parametrize("variant, labels", [
    ("fw", ["initfw", "dgenfw", "sgenfw"]),
    ("bw", ["initfbw", "dgenbw", "sgenbw", "sgen", "suni"]),
])
def test_grid_labels(variant, labels):
    assert compile_grid(variant).labels == labels


def test_unique_grid_extends_fw():
    fw, uni = compile_grid("fw"), compile_grid("unique")
    assert uni.labels[:3] == fw.labels and uni.labels[3] == "diaguniq"
    assert to_text(uni["diaguniq"]) == "[0]+ [1] (@N -> [1] ~@N)"


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_encodings(name):
    path = GOLDEN / f"{name}.txt"
    assert dump_encoding(CASES[name]()) == path.read_text()


@pytest.mark.parametrize("variant", GRID_VARIANTS)
def test_formula_is_conjunction_and_dict_vars_used(variant):
    enc = compile_grid(variant)
    used = set(variables(enc.formula))
    assert all(name in used for _, name in enc.dict.items())


def test_counter_layers():
    fw = compile_counter_layer("fw", 2)
    assert to_text(fw["counter"]).count("->") == 6
    assert compile_counter_layer("lossy", 2)["TillStartAllC0"] is parse(
        "<0>@N & [0](@N | <0>@N -> ~@start & @C0)")


def test_op_gadgets():
    inc = compile_op_gadget("fw", Op("inc", 0))
    assert to_text(inc).startswith("<1>=1 (~@C0p & [0] @C0p) & [1]+ (<0> ~@C0m | @C0m)")
    dec = compile_op_gadget("bw", Op("dec", 0))
    assert "<1>=1 (~@C0 & " in to_text(dec)
    z = compile_op_gadget("lossy", Op("zero", 1))
    assert to_text(z).startswith("[1]+ ~@C1 & ")


def test_op_gadget_counter_range():
    with pytest.raises(EncodingError):
        compile_op_gadget("fw", Op("inc", 3), 2)


def test_compile_machine_fw_finite():
    enc = compile_machine(M_A, "fw_finite_reach", q_r="h")
    for lab in ["initfw", "dgenfw", "sgenfin", "counter", "allzero", "griduniquetwo",
                "fwstep", "reach-target"]:
        assert lab in enc.labels
    names = {n for _, n in enc.dict.items()}
    assert {"@S", "@N", "@end", "@S_q0", "@S_q1", "@S_h", "@C0p", "@C0m", "@C1p", "@C1m"} <= names


def test_fw_phi_m_has_four_parts():
    enc = compile_machine(M_A, "fw_recurrence", q_r="q1")
    grid = compile_grid("fw").labels
    body = [l for l in enc.labels if l not in grid and l not in ("init-state", "recurrence-target")]
    assert len(body) == 4


def test_compile_machine_bw_recurrence():
    enc = compile_machine(M_B, "bw_recurrence", q_r="q0")
    assert {"erec", "upd", "dgenr", "dgenrdiff", "rtos"} <= set(enc.labels)
    assert {"@R", "@Q", "@I_zero0"} <= {n for _, n in enc.dict.items()}


@pytest.mark.parametrize("kw", [dict(target="nope"), dict(target="fw_recurrence"),
                                dict(target="fw_recurrence", q_r="zz")])
def test_compile_machine_errors(kw):
    with pytest.raises(Exception):
        compile_machine(M_A, **kw)


@pytest.mark.parametrize("target", TARGETS)
def test_every_target_compiles(target):
    enc = compile_machine(M_B, target, q_r="q0")
    assert len(set(enc.labels)) == len(enc.labels)


def test_duplicate_labels_rejected():
    with pytest.raises(EncodingError):
        CompiledEncoding("x", [("a", TOP), ("a", TOP)], VarDictionary())


def test_bullet_translate():
    assert bullet_translate(parse("<0>S"), "Tick") is parse(
        "Tick & <0>(~Tick & (S | <0>S)) | ~Tick & <0>(Tick & (S | <0>S))")
    assert bullet_translate(parse("P")) is parse("P")
    inner = bullet_translate(parse("<0>P"))
    assert bullet_translate(parse("<1><0>P")) is Dia1(inner)


def test_interval():
    enc = compile_interval("@S")
    assert len(enc.conjuncts) == 5
    assert "@S'" in {n for _, n in enc.dict.items()}
    def primes(d):
        return {n for r, n in d.items() if isinstance(r, tuple) and r[0] == "prime"}
    a = compile_interval("@S")
    pa = primes(a.dict)
    pb = primes(compile_interval("@N", a.dict).dict) - pa
    assert pb and not pa & pb


def test_relativize_examples():
    d = relativize(parse("<0>P"), "decreasing")
    assert to_text(d) == "@D & [0]+ [1]+ (<0> @D -> @D) & <0> (@D & P)"
    assert to_text(relativize(parse("P"), "decreasing")) == "@D & (<0> @D -> @D) & P"
    e = relativize(parse("<1><0>P"), "expanding")
    assert "@D -> [0] @D" in to_text(e)
    with pytest.raises(EncodingError):
        relativize(parse("P"), "sideways")


@pytest.mark.parametrize("text", ["P", "<0>P", "<1>P"])
def test_product_to_decreasing(text):
    phi = parse(text)
    out = product_to_decreasing(phi)
    assert out.right is phi
    assert to_text(out.left) == "[1]+ [0]+ (<0> true -> [1] <0> true)"


def test_diff_to_linear_shapes():
    enc = diff_to_linear(parse("<1>P"))
    assert to_text(enc["phi-dagger"]) == "@P0 | <1> P"
    assert len(enc.params["subformulas"]) == len(subformula_list(parse("<1>P")))
    assert to_text(diff_to_linear(parse("P"))["phi-dagger"]) == "P"


def test_encoding_round_trip():
    enc = compile_machine(M_A, "lossy_finite_reach", q_r="h")
    back = load_encoding(dump_encoding(enc), M_A)
    assert back.labels == enc.labels and back.formula is enc.formula
    assert back.compiled_machine == enc.compiled_machine
    with pytest.raises(EncodingError):
        load_encoding(dump_encoding(enc), M_C)


def _sat(phi, cls, h, v):
    return bounded_sat(SearchSpec(phi, cls, h, v)).found


def _random_small(rng):
    return random_formula(rng, ("P",), depth=rng.randint(1, 3))


@pytest.mark.parametrize("mode", ["decreasing", "expanding"])
def test_relativization_agrees_within_bounds(mode):
    rng = random.Random(21)
    for _ in range(8):
        phi = _random_small(rng)
        assert _sat(phi, mode, 2, 2) == _sat(relativize(phi, mode), "product", 2, 2), to_text(phi)


def test_product_to_decreasing_agrees_within_bounds():
    rng = random.Random(22)
    for _ in range(8):
        phi = _random_small(rng)
        assert _sat(phi, "product", 2, 2) == _sat(product_to_decreasing(phi), "decreasing", 2, 2)


def test_diff_to_linear_agrees_within_bounds():
    rng = random.Random(23)
    for _ in range(8):
        phi = _random_small(rng)
        assert _sat(phi, "expanding", 2, 2) == \
            _sat(diff_to_linear(phi).formula, "expanding-linear", 2, 2), to_text(phi)
