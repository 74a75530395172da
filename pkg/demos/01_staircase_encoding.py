# Staircase encoding
#
# A symmetric target sum_k c_k |D_{N,k}> is first written into the staircase
# states |(k)> = |g...g e...e> (last k qubits excited) by a chain of a
# rotation on the last qubit followed by controlled rotations moving up the
# register.

# %%
import numpy as np

from symprep import encoder
from symprep.states import SymmetricCoefficients, staircase_superposition

c = SymmetricCoefficients(np.arange(1, 6) / np.sqrt(55))
print("N =", c.N, " |c_k|^2 =", np.round(np.abs(c.c) ** 2, 4))

# %%
# One rotation pair per qubit.  Each gate leaves the qubit above untouched
# unless its control is excited, which produces the staircase.
pairs = encoder.staircase_decompose(c)
circuit = encoder.build_circuit(pairs, c.N)
for g in circuit.gates:
    print(g)

# %%
state = encoder.apply_circuit(circuit)
want = staircase_superposition(c)
print("overlap with the staircase superposition:", abs(np.vdot(want.amplitudes, state.amplitudes)) ** 2)
for k in range(c.N + 1):
    idx = 2**k - 1
    print(f"  |({k})>  index {idx:2d}  amplitude {state.amplitudes[idx]:.4f}")

# %%
# The circuit serialises to a plain JSON gate list.
print(circuit.to_json()[:160], "...")
