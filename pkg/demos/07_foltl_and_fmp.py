# # First-order temporal logic and finite models
#
# One-variable temporal formulas with the "elsewhere" quantifier translate
# one-for-one into bimodal formulas, and models translate into grids.
# Separately, large vertical carriers can be shrunk without changing truth.

# %%
import random

from bimodal.foltl import dagger, foltl_check, parse_foltl, random_model, star
from bimodal.formula import to_text
from bimodal.semantics import check

# %%
phi = parse_foltl("[F] E=1 x Dog(x)")
print(to_text(star(phi)))

# %%
rng = random.Random(1)
m = random_model(rng, "expanding", preds=("Dog",))
g = dagger(m)
for t in m.timeline.worlds:
    for a in m.domains[t]:
        print(t, a, foltl_check(m, t, a, phi), check(g, (t, a), star(phi)))

# %% [markdown]
# Shrinking a 2 x 10 product model of <1>P & <0><1>~P.

# %%
from bimodal.fmp import shrink
from bimodal.formula import parse
from bimodal.frames import make_difference, make_linear, product
from bimodal.semantics import Model

fr = product(make_linear(2), make_difference(10))
val = {"P": {(h, v) for h in range(2) for v in range(10) if (h + v) % 3 == 0}}
f = parse("<1>P & <0><1>~P")
small, trace = shrink(Model(fr, val, (0, 0)), f)
print(trace.dump())
print("still true at the root:", check(small, (0, 0), f))
