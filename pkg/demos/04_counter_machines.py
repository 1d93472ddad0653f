# # Counter machines
#
# Minsky machines with reliable and lossy steps, plus bounded versions of
# the decision problems the encodings reduce from.

# %%
from bimodal.machines import M_A, M_B, Configuration, bounded_oracle, bounded_runs, lossy_step
from bimodal.machines import lossy_step_bruteforce, dump_machine

print(dump_machine(M_A))

# %%
for run in bounded_runs(M_A, M_A.initial(), 3):
    print(run)

# %% [markdown]
# A lossy step may drop counter values before and after the reliable step.
# The closed-form test agrees with a brute-force search over intermediates.

# %%
a, b = Configuration("q0", (3, 0)), Configuration("q1", (1, 0))
print(lossy_step(M_A, a, b), lossy_step_bruteforce(M_A, a, b))
print(lossy_step(M_A, Configuration("q0", (0, 0)), Configuration("q1", (2, 0))))

# %%
print(bounded_oracle(M_A, "reachability", 2, target="h"))
print(bounded_oracle(M_B, "recurrence", 5, target="q0", k=3))
print(bounded_oracle(M_A, "nontermination", 3))
