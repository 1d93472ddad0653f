# # Commutativity and confluence
#
# The three interaction formulas
#
#     [1][0]P -> [0][1]P,  [0][1]P -> [1][0]P,  <0>[1]P -> [1]<0>P
#
# are valid in a 2-frame exactly when the frame commutes (both ways) and is
# confluent.  Here we check that claim on every 2-frame with up to three
# worlds, then on random larger frames.

# %%
import time

from bimodal.formula import parse
from bimodal.frames import TwoFrame, check_property
from bimodal.semantics import valid_in_frame
from bimodal.sweep import sweep, random_sweep

# %%
for n in (1, 2, 3):
    print(sweep(n).line())

# %% [markdown]
# One inclusion alone is not enough: this frame only commutes one way and
# already fails one of the formulas.

# %%
tf = TwoFrame([0, 1, 2], [(1, 2)], [(0, 1)])
print("commute-left", check_property(tf, "commute-left"),
      "commute-right", check_property(tf, "commute-right"))
for text in ["[1][0]P -> [0][1]P", "[0][1]P -> [1][0]P", "<0>[1]P -> [1]<0>P"]:
    print(f"{text:22s} valid: {valid_in_frame(tf, parse(text))}")

# %%
t0 = time.monotonic()
bad = random_sweep(100, 6, seed=4)
print(f"100 random frames, {len(bad)} mismatches, {time.monotonic() - t0:.1f}s")
