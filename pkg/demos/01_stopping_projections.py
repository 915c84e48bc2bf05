"""Stopping projections for a matrix-valued function.

For a scalar function the stopping set is where some dyadic ancestor average
exceeds lambda. For matrices the same role is played by a decreasing family of
projections, and different directions can stop at different levels. This
script builds one such family and shows how much of each cell gets stopped.
"""

import numpy as np

from nczlab import build_dyadic, run_cuculescu, verify_cuculescu
from nczlab.harness import generate_test_function, lambda_floor

filt = build_dyadic(1, 5)
f = generate_test_function(seed=4, d=1, J=5, m=3, profile="rank-one-bumps", domain=filt.domain)
lam = 2.0 * lambda_floor(f, filt)
seq = run_cuculescu(f, lam, filt)

print(f"lambda = {lam:.3f}")
for j in range(1, filt.J + 1):
    ranks = np.real(np.trace(seq.pi[j], axis1=1, axis2=2)).round().astype(int)
    print(f"level {j}: rank of p_j per atom {ranks.tolist()}")

# rank of 1 - q per cell: how many directions stopped somewhere above it
stopped = 3 - np.real(np.trace(seq.q_cells(filt.J), axis1=1, axis2=2)).round().astype(int)
print("stopped rank per cell:", "".join(str(s) for s in stopped))

rep = verify_cuculescu(seq, f)
print(rep)
