"""From Schur multipliers on Z_N to Fourier multipliers on the plane.

The rotation cocycle of Z_N sends each group element to a vector in R^2 whose
squared length is psi(k) = 4 sin^2(pi k / N). Conjugating a matrix by the
phases exp(2 pi i x . beta) turns the Schur multiplier with symbol m(psi) into
the Euclidean multiplier m(|xi|^2). The script checks that identity, then
watches the localization defect shrink as the gaussian window widens.
"""

import numpy as np

from nczlab.group_multiplier import (CocycleData, localization_sweep, folner_embedding, symbol_by_name,
                                     verify_conditionally_negative, verify_intertwining)

N = 8
c = CocycleData.rotation(N)
print("psi =", np.round(c.psi, 4).tolist())
print(verify_conditionally_negative(c.psi, c.group))

rng = np.random.default_rng(0)
A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
for name in ("heat", "imaginary-power"):
    print(verify_intertwining(A, c, symbol_by_name(name)))

rep = localization_sweep(A, c, symbol_by_name("heat"))
for eps, d in zip(rep.data["eps"], rep.data["defects"]):
    print(f"eps = {eps:<8.5g} defect = {d:.4f}")

# normalized Schatten norms of Toeplitz truncations approach the circle norm
for n_sites in (8, 64, 512):
    value, info = folner_embedding({0: 1.0, 1: 0.5, -1: 0.5}, n_sites, 2)
    print(f"N = {n_sites:3d}   ||j_N(f)||_2 = {value:.6f}   limit {info['exact']:.6f}")
