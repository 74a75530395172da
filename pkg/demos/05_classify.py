# SLOCC classes from Majorana roots
#
# p(z) = sum_k c_k sqrt(C(N,k)) z^k.  The multiplicity pattern of its roots
# (with a degree drop counted as roots at infinity) labels the class, and an
# identical invertible operation on every qubit moves the roots by a Moebius
# map without changing that pattern.

# %%
import numpy as np

from symprep import classifier as cl

named = {
    "|g g g g>": np.eye(5)[0],
    "W_4": np.eye(5)[1],
    "D_{4,2}": np.eye(5)[2],
    "GHZ_4": np.array([1, 0, 0, 0, 1]) / np.sqrt(2),
    "reference": np.arange(1, 6) / np.sqrt(55),
}
for name, c in named.items():
    print(f"{name:10s} -> {cl.classify(c).describe()}")

# %%
ghz = cl.majorana_roots(named["GHZ_4"])
print("GHZ_4 roots:", np.round(ghz.finite, 6))

# %%
# Apply a random invertible single-qubit matrix to all four qubits of W_4.
rng = np.random.default_rng(0)
A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
image = cl.mobius_transform(named["W_4"], A)
res = cl.classify(image)
print("W_4 after A^(x4):", res.describe())
print("roots:", np.round(res.roots.finite, 5))
print("expected:", np.round([cl.mobius_map_root(0, A)] + [cl.mobius_map_root(complex("inf"), A)] * 3, 5))

# %%
# Roots back to coefficients.
back = cl.coefficients_from_roots(cl.majorana_roots(named["reference"]))
print("round trip overlap:", abs(np.vdot(back.c, named["reference"])))
