# # Dense time and lossy recurrence
#
# On dense or reflexive orders the "next column" step is recovered from
# alternating Tick blocks.  The lossy encoding instead packs longer and
# longer runs side by side.

# %%
from bimodal.machines import M_B
from bimodal.reductions import compile_machine
from bimodal.witnesses import build, canonical_run, decode_run, spec_for, tick_coherence, verify

# %%
enc = compile_machine(M_B, "dense_nontermination")
for K in (2, 3, 4):
    spec = spec_for(enc, "dense", canonical_run(M_B, "dense", length=K + 1), K=K, width=2)
    m = build(spec)
    print(f"K={K}: {len(m.frame.worlds)} worlds, tick violations: {tick_coherence(m, enc)}")

# %% [markdown]
# Three runs visiting q2 once, twice and three times, laid out as segments.

# %%
from bimodal.machines import parse_machine

cycle = parse_machine("""counters: 2
states: q0 q1 q2
halt:
q0: inc 0 -> q1
q1: inc 1 -> q2
q2: dec 0 -> q0
""", "cycle")
enc = compile_machine(cycle, "lossy_omega_reach", q_r="q2")
runs = [canonical_run(cycle, "lossy_exp", q_r="q2", visits=n, cap=3) for n in (1, 2, 3)]
spec = spec_for(enc, "lossy_exp", runs)
m = build(spec)
print("boundary-only:", verify(spec, enc, m).ok)
for seg in decode_run(m, enc, "lossy_exp"):
    print(seg.run)
