"""Does the weak (1,1) constant of the Hilbert transform grow with matrix size?

For each m the script takes the worst ratio ||T f||_{1,inf} / ||f||_1 over a
few seeded inputs on 1024 cells, then prints K(m) / K(1). Flat ratios are what
one expects when the constant does not depend on m.
"""

from nczlab import GridDomain
from nczlab.singular_integral import build_operator, hilbert_kernel, sweep_matrix_size
from nczlab.harness import weak11_generator

J = 10
dom = GridDomain.lebesgue(1, J)
T = build_operator(hilbert_kernel(), dom)
res = sweep_matrix_size(T, weak11_generator(0, J, "spiky-psd", dom), [1, 2, 4, 8, 16], trials=5)
for m, r in res.relative().items():
    print(f"m = {m:2d}   K(m) = {res.K[m]:.4f}   K(m)/K(1) = {r:.3f}")
