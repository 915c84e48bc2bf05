"""Regular and nonregular decompositions side by side.

On dyadic Lebesgue cells both decompositions apply. The regular one keeps the
good part bounded by 2 lambda pointwise; the nonregular one only controls its
L2 norm but works on filtrations where ancestor averages cannot be compared.
The second half repeats the nonregular split on a filtration adapted to the
density x^3, which is not doubling near 0.
"""

import numpy as np

from nczlab.cz_decompose import (decompose_nonregular, decompose_regular, verify_nonregular_lemma,
                                 verify_regular_lemma)
from nczlab.filtration import build_dyadic, build_nondoubling_filtration_1d, regularity_constant
from nczlab.harness import generate_test_function, lambda_floor, reference_measure
from nczlab.operator_space import bochner_lp_norm

filt = build_dyadic(1, 6)
f = generate_test_function(seed=1, d=1, J=6, m=4, profile="spiky-psd", domain=filt.domain)
lam = 1.5 * lambda_floor(f, filt)

reg = decompose_regular(f, lam, filt)
non = decompose_nonregular(f, lam, filt)
g_inf = np.linalg.norm(reg.g.values, ord=2, axis=(1, 2)).max()
print(f"regular:    ||g||_inf / lam = {g_inf / lam:.4f}   (c_reg = {regularity_constant(filt):g})")
print(f"nonregular: ||g||_2^2 / (lam ||f||_1) = {bochner_lp_norm(non.g, 2) ** 2 / lam:.4f}")
print(f"reconstruction defects: {reg.reconstruction_defect():.1e}, {non.reconstruction_defect():.1e}")
print(verify_regular_lemma(reg))

mu = reference_measure("cubic", 7)
nd = build_nondoubling_filtration_1d(mu)
print(f"\nx^3 filtration: {nd.J} levels, atoms per level {[len(l) for l in nd.levels]}")
print(f"regularity constant: {regularity_constant(nd)}")
f = generate_test_function(seed=2, d=1, J=7, m=2, profile="adversarial-cell-mass", domain=nd.domain)
parts = decompose_nonregular(f, 1.2 * lambda_floor(f, nd), nd)
print(verify_nonregular_lemma(parts))
