# # From machines to formulas and back
#
# A machine compiles into a conjunction of labelled formulas.  For a run we
# can build the intended grid model, check every conjunct on it, and decode
# the run back out of the model.

# %%
from bimodal.formula import to_text
from bimodal.machines import M_A, M_B
from bimodal.reductions import compile_machine
from bimodal.witnesses import build, canonical_run, decode_run, spec_for, verify
from bimodal.witnesses import verify_backward_claims

# %%
enc = compile_machine(M_A, "fw_finite_reach", q_r="h")
for label, f in enc.conjuncts[:4]:
    print(f"[{label}] {to_text(f)}")

# %% [markdown]
# Finite reachability has exact witnesses: every conjunct holds at the root.

# %%
run = canonical_run(M_A, "fw_fin", q_r="h")
spec = spec_for(enc, "fw_fin", run)
model = build(spec)
print(verify(spec, enc, model).text())
print("decoded:", decode_run(model, enc, "fw_fin").run)

# %% [markdown]
# Non-termination needs an infinite model, so the witness is truncated.
# Failures are allowed only on the truncation boundary, and the report
# checks that structurally.

# %%
enc = compile_machine(M_B, "bw_nontermination")
K = 4
spec = spec_for(enc, "bw_inf", canonical_run(M_B, "bw_inf", length=K + 1), K=K)
model = build(spec)
print(verify(spec, enc, model).text())
print(verify_backward_claims(model, enc, K).text())

# %% [markdown]
# Search side: a model found by bounded search decodes to a real run.

# %%
from bimodal.semantics import SearchSpec, bounded_sat

enc = compile_machine(M_A, "fw_finite_reach", q_r="h")
r = bounded_sat(SearchSpec(enc.formula, "product", 4, 4))
print(r.status, "->", decode_run(r.model, enc, "fw_fin").run)
