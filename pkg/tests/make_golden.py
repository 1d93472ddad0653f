"""Regenerate tests/golden/*.txt.  Review diffs by hand before committing."""
from pathlib import Path

from bimodal.machines import M_A, M_B
from bimodal.reductions import GRID_VARIANTS, compile_grid, compile_machine, dump_encoding

GOLDEN = Path(__file__).resolve().parent / "golden"

CASES = {f"grid_{v}": (lambda v=v: compile_grid(v)) for v in GRID_VARIANTS}
CASES.update({
    "m_a_fw_finite_reach": lambda: compile_machine(M_A, "fw_finite_reach", q_r="h"),
    "m_a_lossy_finite_reach": lambda: compile_machine(M_A, "lossy_finite_reach", q_r="h"),
    "m_b_bw_nontermination": lambda: compile_machine(M_B, "bw_nontermination"),
    "m_b_bw_recurrence": lambda: compile_machine(M_B, "bw_recurrence", q_r="q0"),
    "m_b_dense_nontermination": lambda: compile_machine(M_B, "dense_nontermination"),
    "m_a_fw_recurrence": lambda: compile_machine(M_A, "fw_recurrence", q_r="q1"),
    "m_b_lossy_omega_reach": lambda: compile_machine(M_B, "lossy_omega_reach", q_r="q0"),
})

if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, make in CASES.items():
        (GOLDEN / f"{name}.txt").write_text(dump_encoding(make()))
        print("wrote", name)
