# # Formulas, frames and model checking
#
# Bimodal formulas talk about two relations at once: <0> looks along the
# horizontal (time-like) relation, <1> along the vertical (counting) one.
# This notebook parses a few formulas, builds a small product frame and
# evaluates them.

# %%
from bimodal.formula import parse, to_text, subformulas, modal_depth
from bimodal.frames import make_linear, make_difference, product
from bimodal.semantics import Model, check, satisfiable_in

# %% [markdown]
# Sugar such as `<1>=1` ("exactly one other point") expands into the
# primitive operators.  The printer folds it back.

# %%
phi = parse("<1>=1 P")
print(to_text(phi))
print(to_text(phi, sugar=False))
print("depth", modal_depth(phi), "subformulas", len(subformulas(phi)))

# %% [markdown]
# A product of a 2-point linear order with a 2-point difference frame.
# P holds only at (1, 1).

# %%
frame = product(make_linear(2), make_difference(2))
m = Model(frame, {"P": {(1, 1)}})
for text in ["<0>P", "<0><1>P", "<1>=1 <0>P"]:
    f = parse(text)
    print(f"{text:14s}", {w: check(m, w, f) for w in frame.worlds})

# %%
print("least world satisfying <0><1>P:", satisfiable_in(m, parse("<0><1>P")))
