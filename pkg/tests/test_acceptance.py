"""The fourteen acceptance criteria, each at its stated tolerance.

Every test prints one ``CRITERION n: PASS|FAIL`` line (visible in ``pytest -v``
output) before asserting.
"""

import time

import mpmath as mp
import numpy as np
import pytest

from nczlab.cuculescu import run_cuculescu, verify_cuculescu
from nczlab.cz_decompose import (build_zeta, decompose_nonregular, decompose_regular, verify_nonregular_lemma,
                                 verify_regular_lemma, verify_vanishing_identities, verify_zeta)
from nczlab.filtration import build_dyadic, build_nondoubling_filtration_1d
from nczlab.group_multiplier import (CocycleData, folner_convergence, folner_embedding, gaussian_constants,
                                     localization_sweep, symbol_by_name, verify_conditionally_negative,
                                     verify_intertwining, weak_lower_bound_check)
from nczlab.harness import (SuiteConfig, choose_lambda, generate_test_function, reference_measure, run_suite,
                            suite_members)
from nczlab.operator_space import bochner_lp_norm
from nczlab.singular_integral import constant_kernel, hilbert_kernel, identity_kernel, l2_hormander_constant

CFG = SuiteConfig.from_dict({})


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def dyadic_suite():
    """The 200 seeded members with their Cuculescu sequences and both decompositions."""
    t0 = time.perf_counter()
    rows = []
    for mem in suite_members(CFG):
        filt = build_dyadic(mem["d"], mem["J"])
        f = generate_test_function(mem["seed"], mem["d"], mem["J"], mem["m"], mem["profile"])
        lam = choose_lambda(CFG, f, filt, mem["seed"])
        seq = run_cuculescu(f, lam, filt)
        rows.append({**mem, "filt": filt, "f": f, "lam": lam, "seq": seq,
                     "regular": decompose_regular(f, lam, filt, seq),
                     "nonregular": decompose_nonregular(f, lam, filt, seq)})
    return rows, time.perf_counter() - t0


def test_criterion_01_reconstruction(dyadic_suite, capsys):
    rows, elapsed = dyadic_suite
    worst = max(max(r["regular"].reconstruction_defect(), r["nonregular"].reconstruction_defect())
                / bochner_lp_norm(r["f"], 1) for r in rows)
    dims = {(r["d"], r["J"], r["m"]) for r in rows}
    ok = len(rows) == 200 and worst <= 1e-10 and elapsed <= 120 and max(J for _, J, _ in dims) <= 4
    report(capsys, 1, ok, f"200 members, worst relative defect {worst:.2e} <= 1e-10, built in {elapsed:.1f}s")


def test_criterion_02_cuculescu(dyadic_suite, capsys):
    rows, _ = dyadic_suite
    b, c, d_ok = 0.0, 0.0, True
    for r in rows:
        rep = verify_cuculescu(r["seq"], r["f"], tol=1e-9)
        b = min(b, rep["cuculescu.B"].value)
        c = max(c, rep["cuculescu.C"].value)
        d_ok &= rep["cuculescu.D.global"].passed and rep["cuculescu.A"].passed
    ok = b >= -1e-9 and c <= 1e-9 and d_ok
    report(capsys, 2, ok, f"B min {b:.2e} (>= -1e-9 lam), C max {c:.2e}, D global {'ok' if d_ok else 'violated'}")


def test_criterion_03_regular_lemma(dyadic_suite, capsys):
    rows, _ = dyadic_suite
    ratio, bd_ratio, mean0 = 0.0, 0.0, 0.0
    n = 0
    for r in rows:
        if r["d"] != 1:
            continue
        n += 1
        rep = verify_regular_lemma(r["regular"], tol=1e-9)
        ratio = max(ratio, rep["cz.g_linf"].value)
        bd_ratio = max(bd_ratio, rep["cz.bd_l1"].value / rep["cz.bd_l1"].bound * 2)
        mean0 = max(mean0, rep["cz.mean_zero"].value)
    ok = n > 0 and ratio <= 2 + 1e-9 and bd_ratio <= 2 * (1 + 1e-12) and mean0 <= 1e-9
    report(capsys, 3, ok, f"{n} members d=1: ||g||_inf/lam max {ratio:.6f} <= 2, "
                          f"sum ||b_d||_1/||f||_1 max {bd_ratio:.4f} <= 2, mean-zero {mean0:.2e}")


def test_criterion_04_nonregular_lemma(capsys):
    worst, count, all_ok = 0.0, 0, True
    nd = CFG["nondoubling"]
    for k, name in enumerate(("cubic", "two-bump")):
        filt = build_nondoubling_filtration_1d(reference_measure(name, nd["J"]))
        for i in range(nd["members"]):
            seed = 700_000 + 1000 * k + i
            m = CFG["matrix_sizes"][i % 4]
            f = generate_test_function(seed, 1, filt.domain.J, m, CFG["profiles"][i % 4], domain=filt.domain)
            lam = choose_lambda(CFG, f, filt, seed)
            rep = verify_nonregular_lemma(decompose_nonregular(f, lam, filt), tol=1e-9)
            all_ok &= rep.passed
            worst = max(worst, rep["cz.g_l2"].detail["ratio"])
            count += 1
    report(capsys, 4, all_ok, f"{count} members on x^3 and two-bump: max ||g||_2^2/(lam ||f||_1) = {worst:.4f} <= 6")


def test_criterion_05_vanishing(dyadic_suite, capsys):
    rows, _ = dyadic_suite
    worst = 0.0
    for r in rows:
        rep = verify_vanishing_identities(r["seq"], r["f"], tol=1e-10)
        worst = max(worst, rep["cz.vanishing.offdiag"].value, rep["cz.vanishing.q"].value)
    report(capsys, 5, worst <= 1e-10, f"max operator norm {worst:.2e} <= 1e-10")


def test_criterion_06_zeta(dyadic_suite, capsys):
    rows, _ = dyadic_suite
    ann, ratio_ok, worst_ratio = 0.0, True, 0.0
    for r in rows:
        rep = verify_zeta(build_zeta(r["seq"]), r["seq"], r["f"], tol=1e-10)
        ann = max(ann, rep["zeta.annihilation"].value)
        q = rep["zeta.measure"]
        ratio_ok &= q.value <= 5 ** r["d"] * (1 + 1e-9)
        worst_ratio = max(worst_ratio, q.value / 5 ** r["d"])
    ok = ann <= 1e-10 and ratio_ok
    report(capsys, 6, ok, f"annihilation {ann:.2e} <= 1e-10, max phi(1-zeta) lam/||f||_1 / 5^d = {worst_ratio:.3f}")


def test_criterion_07_m_independence(capsys):
    t0 = time.perf_counter()
    rep = run_suite(CFG, ["weak11"])
    elapsed = time.perf_counter() - t0
    rel = rep.artifacts["weak11"]["relative"]
    ok = rep.passed and set(rel) == {1, 2, 4, 8, 16} and max(rel.values()) <= 2.5 and elapsed <= 600
    shown = ", ".join(f"{m}:{v:.3f}" for m, v in sorted(rel.items()))
    report(capsys, 7, ok, f"K(m)/K(1) = {{{shown}}} <= 2.5 (regression bound), {elapsed:.1f}s")


def _hilbert_oracle(j_max=12):
    mp.mp.dps = 30
    total = mp.mpf(0)
    g = lambda x: (1 / (x - mp.mpf(1) / 2) - 1 / x) ** 2 / mp.pi ** 2
    for j in range(1, j_max + 1):
        a, b = mp.mpf(2) ** j, mp.mpf(2) ** (j + 1)
        total += mp.sqrt(mp.mpf(2) ** j * (mp.quad(g, [a, b]) + mp.quad(g, [-b, -a])))
    return float(total)


def test_criterion_08_kernel_functionals(capsys):
    value = l2_hormander_constant(hilbert_kernel(), j_max=12)
    oracle = _hilbert_oracle()
    rel = abs(value - oracle) / oracle
    smooth = max(abs(l2_hormander_constant(k, j_max=12)) for k in (constant_kernel(1), identity_kernel(1)))
    ok = rel <= 1e-2 and smooth <= 1e-8
    report(capsys, 8, ok, f"Hilbert {value:.10f} vs oracle {oracle:.10f} (rel {rel:.1e}), smooth kernels {smooth:.1e}")


def test_criterion_09_scalar_oracle(capsys):
    rep = run_suite(CFG, ["scalar-oracle"])
    members = {r["member"] for r in rep.records}
    ok = rep.passed and len(members) == 50
    report(capsys, 9, ok, f"{len(members)} scalar inputs, {len(rep.failures)} mismatches "
                          "(stopped cubes, g and b per cube)")


def test_criterion_10_group_identities(capsys):
    worst, sv, ok = 0.0, 0.0, True
    for N in (4, 8, 16):
        c = CocycleData.rotation(N)
        rng = np.random.default_rng(N)
        A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        for name in ("heat", "imaginary-power"):
            rep = verify_intertwining(A, c, symbol_by_name(name), tol=1e-12, rng=rng)
            ok &= rep["group.intertwining"].passed and rep["group.lift_singular_values"].passed
            worst = max(worst, rep["group.intertwining"].value)
            sv = max(sv, rep["group.lift_singular_values"].value)
    report(capsys, 10, ok, f"intertwining defect {worst:.2e}, singular value gap {sv:.2e} (<= 1e-12)")


def test_criterion_11_negativity(capsys):
    worst, schoen, ok = -np.inf, np.inf, True
    for N in (4, 8, 16):
        c = CocycleData.rotation(N)
        for psi in (c.psi, CocycleData.regular(c.group).psi):
            rep = verify_conditionally_negative(psi, c.group, t_grid=(0.1, 1.0, 10.0), tol=1e-9)
            ok &= rep.passed
            worst = max(worst, rep["group.negativity"].value)
            schoen = min(schoen, rep["group.schoenberg"].value)
    report(capsys, 11, ok, f"mean-zero max eigenvalue {worst:.2e} <= 1e-9, Schoenberg min eigenvalue {schoen:.2e}")


def test_criterion_12_gaussians(capsys):
    ok, spread = True, 0.0
    for n in (1, 2):
        rep = gaussian_constants(n=n, tol=1e-8)
        ok &= rep.passed
        spread = max(spread, rep["group.sigma_constant"].value)
    c = CocycleData.rotation(8)
    lower_ok = 0
    for t in range(20):
        rng = np.random.default_rng([800_000, 8, t])
        B = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        lower_ok += weak_lower_bound_check(B, c).passed
    ok &= lower_ok == 20
    report(capsys, 12, ok, f"L1, half-height and sigma spread {spread:.1e} <= 1e-8; lower bound {lower_ok}/20")


def test_criterion_13_folner(capsys):
    worst = 0.0
    ok = True
    for p in (1, 2, 4):
        for N in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512):
            value, _ = folner_embedding({1: 1.0}, N, p)
            ok &= abs(value - 1) <= 1 / N
            worst = max(worst, abs(value - 1) * N)
    rng = np.random.default_rng(13)
    polys = [{k: complex(*rng.normal(size=2)) for k in range(-3, 4)} for _ in range(3)]
    mono = all(folner_convergence(poly, [64, 128, 256, 512], p, tol=1e-3).passed for poly in polys for p in (1, 2, 4))
    ok &= mono
    report(capsys, 13, ok, f"max N |norm - 1| = {worst:.4f} <= 1; random polynomials monotone: {mono}")


def test_criterion_14_localization(capsys):
    eps = [1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32]
    ok, lines = True, []
    for N in (4, 8):
        c = CocycleData.rotation(N)
        rng = np.random.default_rng([800_000, N, 3])
        A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
        for name in ("heat", "imaginary-power"):
            rep = localization_sweep(A, c, symbol_by_name(name), eps)
            ok &= rep.passed
            d = rep.data["defects"]
            lines.append(f"Z_{N}/{name}: {d[0]:.3f}->{d[-1]:.3f}")
    report(capsys, 14, ok, "; ".join(lines))
