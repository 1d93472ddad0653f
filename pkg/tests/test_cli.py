import pytest

from bimodal.cli import main
from conftest import CORPUS

M_A = str(CORPUS / "m_a.cm")
M_B = str(CORPUS / "m_b.cm")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_and_errors(capsys):
    code, out, _ = run(capsys, "parse", "-f", "<1>=1 P")
    assert code == 0 and out.startswith("<1>=1 P")
    code, _, err = run(capsys, "parse", "-f", "P &")
    assert code == 2 and "line 1, column 4" in err


def test_parse_foltl(capsys):
    code, out, _ = run(capsys, "parse", "--foltl", "-f", "E!= x F> P(x)")
    assert code == 0 and "star: <1> <0> P" in out


def test_compile_unknown_state(capsys, tmp_path):
    code, _, err = run(capsys, "compile", "-m", M_A, "--target", "fw_finite_reach", "--qr", "q9")
    assert code == 2 and "q9" in err


def test_compile_build_verify_decode(capsys, tmp_path):
    enc, w = str(tmp_path / "enc.txt"), str(tmp_path / "w.txt")
    assert run(capsys, "compile", "-m", M_A, "--target", "fw_finite_reach", "--qr", "h",
               "--out", enc)[0] == 0
    assert run(capsys, "build-witness", "-m", M_A, "--encoding", enc, "--out", w)[0] == 0
    code, out, _ = run(capsys, "verify-witness", "-m", M_A, "--encoding", enc, "--model", w)
    assert code == 0 and "reach-target: HOLDS" in out
    code, out, _ = run(capsys, "decode", "-m", M_A, "--encoding", enc, "--model", w)
    assert code == 0 and "<q0,(0,0)> -inc0-> <q1,(1,0)> -dec0-> <h,(0,0)>" in out
    code, out, _ = run(capsys, "check", "--model", w, "-f", "@S")
    assert code == 0 and "true" in out


def test_verify_with_wrong_machine(capsys, tmp_path):
    enc, w = str(tmp_path / "enc.txt"), str(tmp_path / "w.txt")
    run(capsys, "compile", "-m", M_A, "--target", "fw_finite_reach", "--qr", "h", "--out", enc)
    run(capsys, "build-witness", "-m", M_A, "--encoding", enc, "--out", w)
    code, _, err = run(capsys, "verify-witness", "-m", M_B, "--encoding", enc, "--model", w)
    assert code == 2 and "hash" in err


def test_bw_claims(capsys, tmp_path):
    w = str(tmp_path / "w.txt")
    run(capsys, "build-witness", "-m", M_B, "--target", "bw_nontermination", "--K", "4", "--out", w)
    code, out, _ = run(capsys, "verify-witness", "-m", M_B, "--target", "bw_nontermination",
                       "--model", w, "--claims")
    assert code == 0
    assert "[boundary]" in out and "all backward claims hold" in out


def test_search_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "-f", "P & ~P", "--no-timestamps")
    assert code == 0 and "no model within bounds" in out
    code, out, _ = run(capsys, "search", "-f", "<0><1>P", "--no-timestamps",
                       "--out", str(tmp_path / "m.txt"))
    assert code == 0 and "status: found" in out
    code, out, _ = run(capsys, "valid", "--frame", str(tmp_path / "m.txt"),
                       "-f", "[1][0]P -> [0][1]P")
    assert code == 0 and out.strip() == "valid"


def test_search_budget_exit(capsys):
    code, out, _ = run(capsys, "search", "-f", "P & ~P", "--hmax", "3", "--vmax", "3",
                       "--max-candidates", "1", "--no-timestamps")
    assert code == 3 and "status: budget" in out


def test_search_reproducible(capsys):
    argv = ["search", "-f", "<0>P & <1>~P", "--class", "expanding", "--no-timestamps"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_simulate_and_oracle(capsys):
    code, out, _ = run(capsys, "simulate", "-m", M_A, "--steps", "5")
    assert code == 0 and out.rstrip().endswith("halted")
    code, out, _ = run(capsys, "oracle", "-m", M_A, "--problem", "reachability",
                       "--depth", "2", "--target", "h")
    assert code == 0 and "yes-within-bound" in out


def test_shrink(capsys, tmp_path):
    m = str(tmp_path / "m.txt")
    run(capsys, "search", "-f", "<1>P & <0>~P", "--vmax", "3", "--out", m)
    code, out, _ = run(capsys, "shrink", "--model", m, "-f", "<1>P & <0>~P",
                       "--trace", str(tmp_path / "t.txt"))
    assert code == 0
    assert "per-step bound" in (tmp_path / "t.txt").read_text()


@pytest.mark.parametrize("argv, code, text", [
    (["roundtrip", "-m", M_A, "--target", "fw_finite_reach", "--qr", "h"], 0,
     "run of length 3 recovered"),
    (["roundtrip", "-m", M_A, "--target", "lossy_finite_reach", "--qr", "h"], 0,
     "run of length 3 recovered"),
    (["roundtrip", "-m", M_B, "--target", "bw_nontermination", "--K", "3"], 0,
     "prefix of length"),
    (["roundtrip", "-m", M_B, "--target", "dense_nontermination", "--K", "3"], 0, "no decoder"),
    (["roundtrip", "-m", M_B, "--target", "bw_recurrence", "--qr", "q0"], 1,
     "verification failed"),
])
def test_roundtrip(capsys, argv, code, text):
    got, out, err = run(capsys, *argv)
    assert got == code and text in out + err


def test_usage_error(capsys):
    code, _, err = run(capsys, "search")
    assert code == 2 and "required" in err
