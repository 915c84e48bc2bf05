import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from nczlab.group_multiplier import (CocycleData, GroupAlgebraElement, GroupModel, SpectralSymbol, ball_volume,
                                     circle_lp_norm, localization_sweep, cyclic_dual_spectrum, folner_convergence,
                                     folner_embedding, fourier_multiplier, gamma_eps, gaussian_constants,
                                     gaussian_weighted_weak, gaussian_weighted_weak_grid, hm_norm, lift_symbol,
                                     schatten_norm, schur_multiplier, sigma_constant_displayed, sigma_constant_exact,
                                     sphere_area, symbol_by_name, toeplitz_truncation, transference_consistency_check,
                                     transference_lift, verify_cocycle, verify_conditionally_negative,
                                     verify_intertwining, weak_lower_bound_check, weak_schatten_quasinorm)


# -- groups and cocycles ------------------------------------------------------------


@pytest.mark.parametrize("G", [GroupModel.cyclic(6), GroupModel.dihedral(4), GroupModel.dihedral(5)], ids=str)
def test_group_axioms(G):
    assert G.check_axioms().passed


def test_dihedral_is_nonabelian_of_order_2n():
    G = GroupModel.dihedral(4)
    assert G.order == 8 and not G.abelian
    assert not np.array_equal(G.table, G.table.T)


def test_from_table_recovers_inverses():
    G = GroupModel.from_table(GroupModel.cyclic(5).table)
    assert np.array_equal(G.inverse, [0, 4, 3, 2, 1]) and G.abelian


@pytest.mark.parametrize("c", [CocycleData.rotation(8), CocycleData.dihedral(5), CocycleData.additive(4),
                               CocycleData.regular(GroupModel.dihedral(3))], ids=lambda c: c.name)
def test_shipped_cocycles_satisfy_cocycle_law(c):
    assert verify_cocycle(c).passed


def test_rotation_length_closed_form():
    N = 8
    c = CocycleData.rotation(N, v=(0.6, 0.8))
    k = np.arange(N)
    assert np.allclose(c.psi, 4 * np.sin(np.pi * k / N) ** 2)


def test_regular_cocycle_length_is_one_minus_delta():
    G = GroupModel.dihedral(3)
    psi = CocycleData.regular(G).psi
    assert np.allclose(psi, 1 - np.eye(G.order)[G.unit])


def test_broken_cocycle_is_detected():
    c = CocycleData.rotation(8)
    beta = c.beta.copy()
    beta[3] += 0.01
    assert not verify_cocycle(c.with_beta(beta))["group.cocycle"].passed


@pytest.mark.parametrize("c", [CocycleData.rotation(4), CocycleData.rotation(16), CocycleData.dihedral(4),
                               CocycleData.regular(GroupModel.cyclic(8))], ids=lambda c: c.name)
def test_cocycle_lengths_are_conditionally_negative(c):
    assert verify_conditionally_negative(c.psi, c.group).passed


def test_negativity_negative_controls():
    G = GroupModel.cyclic(8)
    # a symmetric length that is not conditionally negative: a bump at the antipode
    psi = np.zeros(8)
    psi[4] = 1.0
    rep = verify_conditionally_negative(psi, G)
    assert rep["group.length"].passed and not rep["group.negativity"].passed
    # a symmetric perturbation of a genuine length: the mean-zero form picks up 2 on the +-2 mode
    bad = CocycleData.rotation(8).psi.copy()
    bad[[2, 6]] += 2.0
    assert not verify_conditionally_negative(bad, G)["group.negativity"].passed
    asym = CocycleData.rotation(8).psi.copy()
    asym[1] += 0.1
    assert not verify_conditionally_negative(asym, G)["group.length"].passed
    with pytest.raises(ValueError):
        verify_conditionally_negative(np.zeros(9), GroupModel.integer_window(4))


# -- symbols -------------------------------------------------------------------------


@pytest.mark.parametrize("m", [SpectralSymbol.heat(0.5), SpectralSymbol.imaginary_power(0.7),
                               SpectralSymbol.monomial(2)], ids=lambda m: m.name)
def test_symbol_derivatives_match_finite_differences(m):
    # central differences with step 1e-4 x carry relative error ~ (1e-4 x)^2 / 6 up to x = 100
    assert m.check_derivatives() < 1e-5


def test_from_callable_derivatives():
    m = SpectralSymbol.from_callable(lambda x: np.exp(-x) + 0j)
    x = np.array([0.5, 2.0])
    assert np.allclose(m.derivative(1, x), -np.exp(-x), rtol=1e-5)
    assert np.allclose(m.derivative(2, x), np.exp(-x), rtol=1e-4)


def test_lifted_partials_against_finite_differences(rng):
    M = lift_symbol(SpectralSymbol.heat(0.3), 2)
    xi = rng.normal(size=(5, 2))
    h = 1e-5
    for gamma in ([0], [1], [0, 1], [1, 1], [0, 0, 1]):
        head, last = gamma[:-1], gamma[-1]
        e = np.eye(2)[last] * h
        fd = (M.partial(xi + e, head) - M.partial(xi - e, head)) / (2 * h)
        assert np.allclose(M.partial(xi, gamma), fd, rtol=1e-6, atol=1e-8)


def test_hm_norm_values():
    theta = 0.7
    assert hm_norm(SpectralSymbol.imaginary_power(theta), 1) == pytest.approx(1 + theta, rel=1e-9)
    assert hm_norm(SpectralSymbol.heat(1.0), 1) == pytest.approx(1.0, rel=1e-9)
    assert hm_norm(SpectralSymbol.monomial(1), 1) == np.inf
    assert np.isfinite(hm_norm(lift_symbol(SpectralSymbol.imaginary_power(theta), 2), 2))
    with pytest.raises(ValueError):
        hm_norm(SpectralSymbol.heat(), 2)


def test_symbol_lookup():
    assert symbol_by_name("exp").name.startswith("heat")
    assert not symbol_by_name("imaginary-power", theta=0.3).continuous_at_zero
    with pytest.raises(ValueError):
        symbol_by_name("nope")


# -- multipliers -----------------------------------------------------------------------


def test_fourier_multiplier_is_schur_multiplier_on_realizations(rng):
    c = CocycleData.dihedral(4)
    G = c.group
    f = GroupAlgebraElement(G, rng.normal(size=G.order) + 1j * rng.normal(size=G.order))
    M = SpectralSymbol.heat(0.5)(c.psi)
    lhs = fourier_multiplier(M, f).realization()
    rhs = schur_multiplier(M, f.realization(), G)
    assert np.abs(lhs - rhs).max() < 1e-14


def test_realization_is_star_homomorphism(rng):
    G = GroupModel.dihedral(3)
    a = GroupAlgebraElement(G, rng.normal(size=G.order) + 0j)
    assert np.allclose(a.adjoint().realization(), a.realization().conj().T)
    assert a.trace() == a.coeffs[G.unit]
    d = GroupAlgebraElement.delta(G, 2).realization()
    assert np.allclose(d @ d.conj().T, np.eye(G.order))


def test_cyclic_dual_spectrum_matches_eigenvalues(rng):
    G = GroupModel.cyclic(8)
    f = GroupAlgebraElement(G, rng.normal(size=8) + 1j * rng.normal(size=8))
    ev = np.linalg.eigvals(f.realization())
    spec = cyclic_dual_spectrum(f)
    assert np.allclose(np.sort_complex(ev), np.sort_complex(spec))


def test_weak_schatten_quasinorm_of_identity():
    assert weak_schatten_quasinorm(np.eye(5)) == pytest.approx(5.0)
    assert weak_schatten_quasinorm(np.eye(5), normalized=True) == pytest.approx(1.0)
    assert schatten_norm(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0)


# -- transference ----------------------------------------------------------------------


@pytest.mark.parametrize("N", [4, 8, 16])
@pytest.mark.parametrize("symbol", ["heat", "imaginary-power"])
def test_intertwining(N, symbol, rng):
    c = CocycleData.rotation(N)
    A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    rep = verify_intertwining(A, c, symbol_by_name(symbol))
    assert rep.passed, str(rep)


def test_intertwining_on_dihedral_cocycle(rng):
    c = CocycleData.dihedral(4)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert verify_intertwining(A, c, SpectralSymbol.heat(0.4)).passed


def test_intertwining_fails_with_wrong_length(rng):
    c = CocycleData.rotation(8)
    A = rng.normal(size=(8, 8)) + 0j
    wrong = c.with_psi(1.1 * c.psi)
    assert not verify_intertwining(A, wrong, SpectralSymbol.heat(1.0))["group.intertwining"].passed


def test_lift_validates_shapes(rng):
    c = CocycleData.rotation(4)
    with pytest.raises(ValueError):
        transference_lift(np.eye(3), c, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        transference_lift(np.eye(4), c, np.zeros((2, 3)))


@pytest.mark.parametrize("symbol", ["heat", "imaginary-power"])
def test_transference_consistency(symbol):
    rep = transference_consistency_check(symbol_by_name(symbol), CocycleData.rotation(8), trials=10)
    assert rep.passed, str(rep)


# -- gaussians ---------------------------------------------------------------------------


def test_volumes():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("n", [1, 2])
def test_gaussian_constants(n):
    rep = gaussian_constants(n=n)
    assert rep.passed
    sigma = rep.data["sigma"]
    assert np.allclose(sigma, sigma_constant_exact(n), rtol=1e-10)


def test_sigma_constant_closed_forms():
    assert sigma_constant_exact(1) == pytest.approx(special.erf(math.sqrt(math.log(2))), rel=1e-14)
    assert sigma_constant_exact(2) == pytest.approx(0.5, rel=1e-14)
    # the displayed ratio of sphere area to (4 pi)^{n/2} only agrees at n = 2
    assert sigma_constant_displayed(2) == pytest.approx(0.5, rel=1e-14)
    assert sigma_constant_displayed(1) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-14)


def test_gamma_eps_half_height():
    for eps in (1, 0.25, 1 / 32):
        R = math.sqrt(math.log(2) / eps)
        x = np.array([[R, 0.0]])
        assert gamma_eps(x, eps, 2)[0] / gamma_eps(np.zeros((1, 2)), eps, 2)[0] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("s", [1.0, 3.7])
def test_weighted_weak_rank_one_closed_forms(s):
    assert gaussian_weighted_weak(np.array([s]), 2) == pytest.approx(s / math.e, rel=1e-10)
    expected = s * math.sqrt(2 / math.pi) * math.exp(-0.5)
    assert gaussian_weighted_weak(np.array([s]), 1) == pytest.approx(expected, rel=1e-10)


@given(st.integers(0, 10_000), st.sampled_from([1, 2]))
def test_weighted_weak_grid_agrees(seed, n):
    rng = np.random.default_rng(seed)
    s = np.exp(rng.normal(size=4))
    exact = gaussian_weighted_weak(s, n)
    assert gaussian_weighted_weak_grid(s, 0.5, n) == pytest.approx(exact, rel=2e-2)


@pytest.mark.parametrize("n", [1, 2])
def test_weak_lower_bound(n, rng):
    for _ in range(5):
        B = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        assert weak_lower_bound_check(B, n=n).passed


# -- localization defect ---------------------------------------------------------------


@pytest.mark.parametrize("symbol", ["heat", "imaginary-power"])
def test_localization_defect_decreases(symbol, rng):
    c = CocycleData.rotation(4)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rep = localization_sweep(A, c, symbol_by_name(symbol), K=64)
    assert rep.passed, rep.data["defects"]
    assert rep.data["defects"][-1] < 0.5 * rep.data["defects"][0]


def test_localization_defect_vanishes_for_constant_symbol(rng):
    c = CocycleData.rotation(4)
    A = rng.normal(size=(4, 4)) + 0j
    rep = localization_sweep(A, c, SpectralSymbol.one(), eps_list=(1, 0.5), K=32)
    assert max(rep.data["defects"]) < 1e-12


# -- Folner ------------------------------------------------------------------------------


def test_toeplitz_truncation_shape_and_entries():
    T = toeplitz_truncation({1: 2.0, -2: 3.0}, 3)
    assert T.shape == (7, 7)
    assert T[4, 3] == 2.0 and T[1, 3] == 3.0


@pytest.mark.parametrize("p", [1, 2, 4])
def test_folner_for_translation(p):
    for N in (4, 64, 512):
        value, info = folner_embedding({1: 1.0}, N, p)
        assert value == pytest.approx((2 * N / (2 * N + 1)) ** (1 / p), rel=1e-12)
        assert abs(value - 1) <= 1 / N


def test_circle_norm_exact_for_even_p():
    coeffs = {0: 1.0, 1: 0.5, -1: 0.5}
    # |1 + cos(2 pi t)|^2 averages to 1 + 1/2
    assert circle_lp_norm(coeffs, 2) == pytest.approx(math.sqrt(1.5), rel=1e-14)
    assert circle_lp_norm(coeffs, np.inf) == pytest.approx(2.0)


def test_folner_convergence_for_random_polynomial(rng):
    coeffs = {k: complex(rng.normal(), rng.normal()) for k in range(-3, 4)}
    rep = folner_convergence(coeffs, [64, 128, 256], 2, bound=lambda N: 50.0 / N)
    assert rep.passed, rep.data["errors"]
    with pytest.raises(ValueError):
        folner_embedding(coeffs, 8, 0.5)
