import pytest

from bimodal.frames import TwoFrame, TOP_POINT
from bimodal.machines import M_A, M_B, Configuration, Run, validate_run
from bimodal.reductions import compile_machine
from bimodal.semantics import Model, SearchSpec, bounded_sat
from bimodal.witnesses import (DecodeError, WitnessError, WitnessSpec, build, canonical_run,
                               decode_run, spec_for, tick_coherence, verify,
                               verify_backward_claims)


def _fw_fin(m=M_A, q_r="h"):
    enc = compile_machine(m, "fw_finite_reach", q_r=q_r)
    spec = spec_for(enc, "fw_fin", canonical_run(m, "fw_fin", q_r=q_r))
    return enc, spec, build(spec)


def _bw_inf(K):
    enc = compile_machine(M_B, "bw_nontermination")
    spec = spec_for(enc, "bw_inf", canonical_run(M_B, "bw_inf", length=K + 1), K=K)
    return enc, spec, build(spec)


def _dense(K, width=2):
    enc = compile_machine(M_B, "dense_nontermination")
    spec = spec_for(enc, "dense", canonical_run(M_B, "dense", length=K + 1), K=K, width=width)
    return enc, spec, build(spec)


def _with(model, name, add=(), drop=()):
    val = {k: set(v) for k, v in model.valuation.items()}
    val.setdefault(name, set())
    val[name] |= set(add)
    val[name] -= set(drop)
    return model.with_valuation(val)


def test_fw_fin_layout():
    enc, spec, m = _fw_fin()
    v = m.valuation
    assert v["@S"] == {(0, 0), (1, 1), (2, 2)}
    assert {(0, 1), (1, 2)} <= v["@N"]
    assert v["@end"] == {(2, 3)}
    assert (1, 0) in v["@C0p"] and (0, 0) not in v["@C0p"]


def test_fw_fin_all_conjuncts_hold():
    enc, spec, m = _fw_fin()
    rep = verify(spec, enc, m)
    assert rep.all_hold and rep.ok
    assert all(line.endswith("HOLDS") for line in rep.text().splitlines())


def test_fw_fin_round_trip(corpus):
    for name, mach in corpus.items():
        qs = [q for q in mach.states if q in mach.halt] or [mach.states[-1]]
        for q_r in qs:
            try:
                enc, spec, m = _fw_fin(mach, q_r)
            except WitnessError:
                continue
            assert decode_run(m, enc, "fw_fin").run.configs == spec.run.configs


def test_end_off_staircase_is_interior_failure():
    enc, spec, m = _fw_fin()
    bad = _with(m, "@end", add={(1, 3)}, drop={(2, 3)})
    rep = verify(spec, enc, bad)
    assert not rep.ok
    assert any(not r.holds and not r.on_boundary for r in rep.results)


def test_doubled_state_breaks_decode():
    enc, spec, m = _fw_fin()
    bad = _with(m, "@S_q1", add={(0, 0)})
    with pytest.raises(DecodeError, match="not unique"):
        decode_run(bad, enc, "fw_fin")


def test_decode_found_model():
    enc = compile_machine(M_A, "fw_finite_reach", q_r="h")
    r = bounded_sat(SearchSpec(enc.formula, "product", 4, 4))
    assert r.found
    dr = decode_run(r.model, enc, "fw_fin")
    validate_run(M_A, dr.run)
    assert dr.run.configs[-1].state == "h"


def test_bw_inf_layout():
    enc, spec, m = _bw_inf(3)
    assert m.valuation["@S"] == {(n, n) for n in range(3)}
    assert m.valuation["@N"] == {(n + 1, n) for n in range(3)}
    assert TOP_POINT in m.frame.horizontal.worlds


@pytest.mark.parametrize("K", [3, 4, 5])
def test_bw_inf_boundary_only(K):
    enc, spec, m = _bw_inf(K)
    rep = verify(spec, enc, m)
    assert rep.ok
    assert rep.failing() == ["sgenbw"]
    assert rep["sgenbw"].on_boundary


def test_bw_claims():
    enc, spec, m = _bw_inf(4)
    rep = verify_backward_claims(m, enc, 4)
    assert rep.ok and rep.checked == 3


def test_bw_claims_spurious_n():
    enc, spec, m = _bw_inf(4)
    bad = _with(m, "@N", add={(2, 0)})
    rep = verify(spec, enc, bad)
    assert not rep["sgenbw"].holds and not rep.ok
    rep = verify_backward_claims(bad, enc, 4)
    assert not rep.ok


def test_bw_claims_rank_break():
    enc, spec, m = _bw_inf(4)
    fr = m.frame
    extra = ((1, 0), (1, 0))  # a reflexive R0 loop gives infinite rank
    tf = TwoFrame(fr.worlds, set(fr.rel0) | {extra}, fr.rel1)
    rep = verify_backward_claims(Model(tf, m.valuation, m.root), enc, 4)
    assert any("rank" in v for v in rep.violations)


def test_bw_decode_prefix():
    enc, spec, m = _bw_inf(4)
    dr = decode_run(m, enc, "bw_inf")
    assert dr.run.configs == spec.run.configs[: len(dr.run)]


def test_bw_rec_reports_interior_dgenr():
    enc = compile_machine(M_B, "bw_recurrence", q_r="q0")
    spec = spec_for(enc, "bw_rec", canonical_run(M_B, "bw_rec", length=5), K=4)
    rep = verify(spec, enc)
    assert "dgenr" in rep.failing()
    assert not rep["dgenr"].on_boundary


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_dense_tick_coherence(K):
    enc, spec, m = _dense(K)
    assert tick_coherence(m, enc) == []


def test_dense_tick_mutation_detected():
    enc, spec, m = _dense(3)
    n = sorted(m.valuation["@N"], key=repr)[0]
    assert tick_coherence(_with(m, "@N", drop={n}), enc)


def test_dense_verify_is_boundary_only():
    enc, spec, m = _dense(4)
    assert verify(spec, enc, m).ok


def test_lossy_fin_round_trip():
    enc = compile_machine(M_A, "lossy_finite_reach", q_r="h")
    spec = spec_for(enc, "lossy_fin", canonical_run(M_A, "lossy_fin", q_r="h", cap=2))
    m = build(spec)
    assert verify(spec, enc, m).all_hold
    dr = decode_run(m, enc, "lossy_fin")
    validate_run(M_A, dr.run, Configuration("q0", (0, 0)))
    assert dr.run.configs[-1].state == "h"


def test_lossy_exp_segments(corpus):
    mach = corpus["cycle"]
    enc = compile_machine(mach, "lossy_omega_reach", q_r="q2")
    runs = [canonical_run(mach, "lossy_exp", q_r="q2", visits=n, cap=3) for n in (1, 2, 3)]
    spec = spec_for(enc, "lossy_exp", runs)
    m = build(spec)
    assert verify(spec, enc, m).ok
    segs = decode_run(m, enc, "lossy_exp")
    sstar = m.valuation[enc.dict.name("S*")]
    for n, seg in enumerate(segs, 1):
        validate_run(mach, seg.run, mach.initial())
        assert sum(1 for y in seg.staircase if y in sstar) >= n


def test_spec_validation():
    enc = compile_machine(M_A, "fw_finite_reach", q_r="h")
    with pytest.raises(WitnessError):
        WitnessSpec("nope", M_A, [], enc.dict)
    with pytest.raises(WitnessError):
        WitnessSpec("fw_fin", M_A, [], enc.dict)
    bad = Run((Configuration("q0", (0, 0)), Configuration("h", (0, 0))),
              (M_A.instructions["q0"][0][0],))
    with pytest.raises(Exception):
        build(spec_for(enc, "fw_fin", bad))


def test_decode_unknown_kind():
    enc, spec, m = _fw_fin()
    with pytest.raises(DecodeError):
        decode_run(m, enc, "dense")
