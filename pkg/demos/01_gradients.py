"""Check the hand-written gradients of every model variant against finite differences."""

from dprecon.autodiff import Graph, finite_diff_check
from dprecon.gradcheck import check_variant

# a two-parameter toy first: d/dw sum(tanh(w * x))
g = Graph()
w = g.param("w", [0.5, -1.5])
x = g.constant([2.0, 0.3])
loss = g.sum(g.tanh(g.mul(w, x)))
print("toy grad:", g.backward(loss)["w"])
print("toy max relative error:", finite_diff_check(g, loss))

# the full objective: encoder-decoder plus whichever reconstructors the variant has
for variant in ("Baseline", "EncRec", "DecRec", "Both"):
    print(f"{variant:8} max relative error {check_variant(variant):.2e}")
