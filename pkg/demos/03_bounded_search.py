# # Bounded satisfiability search
#
# bounded_sat walks candidate frames of a class in size order and grounds
# the formula into clauses for each one.  It either returns a model or says
# that none exists *within the bounds*; it never claims unsatisfiability.

# %%
from bimodal.formula import parse
from bimodal.semantics import SearchSpec, bounded_sat, dump_model

# %%
r = bounded_sat(SearchSpec(parse("<0><1>P"), "product", hmax=2, vmax=2))
print(r.report(timestamps=False))
print(dump_model(r.model))

# %% [markdown]
# "Exactly one other P" together with "some other P" needs at least two
# vertical points, so the answer depends on the bound.

# %%
phi = parse("<1>=1 P & <1>P")
for v in (1, 2):
    print(f"vmax={v}:", bounded_sat(SearchSpec(phi, "product", 1, v)).status)

# %% [markdown]
# Other frame classes: expanding and decreasing grids, a truncated omega+1
# horizontal, and raw commuting 2-frames.

# %%
phi = parse("<0>P & [0][1]~P")
for cls in ("product", "expanding", "decreasing", "omega", "commuting"):
    res = bounded_sat(SearchSpec(phi, cls, 3, 2, max_worlds=3))
    print(f"{cls:10s} {res.status:9s} {res.frame_label}")
