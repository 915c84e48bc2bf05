import numpy as np
import pytest
from hypothesis import given, strategies as st

from nczlab.operator_space import (GridDomain, OpValuedFunction, bochner_lp_norm, hermitian_part, is_projection,
                                   join_projections, level_set_measure, random_unitary, range_projection,
                                   spectral_distribution, spectral_projection, trace_integral, weak_l1_breakpoint,
                                   weak_l1_profile, weak_l1_quasinorm, weak_sup)

from conftest import random_psd


def brute_weak(values, weights, grid=20001):
    """Dense scan of lam * W(lam) just below every breakpoint and on a log grid."""
    v = np.asarray(values).ravel()
    w = np.asarray(weights).ravel()
    lams = np.concatenate([v[v > 0] * (1 - 1e-12), np.geomspace(1e-6, v.max() * 2, grid)])
    return max(float(l * w[v > l].sum()) for l in lams)


def test_lebesgue_domain_layout():
    dom = GridDomain.lebesgue(2, 2)
    assert dom.n_cells == 16
    assert dom.total_measure == pytest.approx(1.0)
    assert np.allclose(dom.cell_centers[1], [0.125, 0.375])


def test_density_domain_integrates_density():
    dom = GridDomain.from_density(1, 5, lambda x: 3 * x[..., 0] ** 2)
    assert dom.total_measure == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("bad", [np.zeros(4), -np.ones(4), np.ones(3)])
def test_domain_rejects_bad_measures(bad):
    with pytest.raises(ValueError):
        GridDomain(1, 2, bad)


def test_weak_sup_two_level_distribution():
    # values {2 with weight 1, 1 with weight 3}: sup(2*1, 1*4) = 4, attained just below 1
    sup, lam = weak_sup(np.array([2.0, 1.0]), np.array([1.0, 3.0]))
    assert sup == pytest.approx(4.0)
    assert lam == pytest.approx(1.0)


def test_weak_l1_of_scalar_indicator():
    dom = GridDomain.lebesgue(1, 3)
    vals = np.zeros((8, 1, 1))
    vals[:2] = 5.0
    f = OpValuedFunction(dom, vals, hermitian=True)
    assert weak_l1_quasinorm(f) == pytest.approx(5.0 * 0.25)
    assert bochner_lp_norm(f, 1) == pytest.approx(1.25)


def test_weak_l1_scalar_one_over_x_samples():
    # values 1/((k + 1/2) h) with weight h: just below the k-th value the product is (k + 1)/(k + 1/2)
    dom = GridDomain.lebesgue(1, 12)
    x = dom.cell_centers[:, 0]
    f = OpValuedFunction(dom, (1 / x)[:, None, None], hermitian=True)
    sup, lam = weak_l1_breakpoint(f)
    assert sup == pytest.approx(2.0, rel=1e-12)
    assert lam == pytest.approx(1 / x[0])


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_weak_sup_matches_dense_scan(seed, m):
    rng = np.random.default_rng(seed)
    v = np.abs(rng.normal(size=(16, m))) * np.exp(rng.normal(size=(16, 1)))
    w = np.repeat(rng.uniform(0.1, 1, size=(16, 1)), m, axis=1)
    assert weak_sup(v, w)[0] == pytest.approx(brute_weak(v, w), rel=1e-9)


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_weak_norm_bounded_by_l1_and_quasi_triangle(seed, m):
    rng = np.random.default_rng(seed)
    dom = GridDomain.lebesgue(1, 4)
    f, g = random_psd(dom, m, rng), random_psd(dom, m, rng)
    assert weak_l1_quasinorm(f) <= bochner_lp_norm(f, 1) * (1 + 1e-12)
    assert weak_l1_quasinorm(f + g) <= 2 * (weak_l1_quasinorm(f) + weak_l1_quasinorm(g)) * (1 + 1e-12)


@given(st.integers(0, 10_000))
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    dom = GridDomain.lebesgue(1, 3)
    f = random_psd(dom, 3, rng)
    U = random_unitary(3, rng)
    g = f.with_values(U @ f.values @ np.conj(U.T))
    assert weak_l1_quasinorm(g) == pytest.approx(weak_l1_quasinorm(f), rel=1e-10)
    for p in (1, 2, np.inf):
        assert bochner_lp_norm(g, p) == pytest.approx(bochner_lp_norm(f, p), rel=1e-10)


def test_trace_integral_and_l1_agree_on_psd(rng):
    f = random_psd(GridDomain.lebesgue(2, 2), 3, rng)
    assert trace_integral(f).real == pytest.approx(bochner_lp_norm(f, 1), rel=1e-12)


def test_spectral_distribution_total_weight(rng):
    f = random_psd(GridDomain.lebesgue(1, 3), 4, rng)
    dist = spectral_distribution(f)
    assert dist.total_weight == pytest.approx(4.0)
    assert np.all(np.diff(dist.eigenvalues) < 0)


def test_level_set_and_profile_consistent(rng):
    f = random_psd(GridDomain.lebesgue(1, 4), 2, rng)
    lams = np.geomspace(1e-2, 10, 13)
    prof = weak_l1_profile(f, lams)
    direct = np.array([l * level_set_measure(f, l) for l in lams])
    assert np.allclose(prof, direct)
    assert prof.max() <= weak_l1_breakpoint(f)[0] * (1 + 1e-12)


def test_level_set_rejects_nonpositive_lambda(rng):
    f = random_psd(GridDomain.lebesgue(1, 2), 2, rng)
    with pytest.raises(ValueError):
        level_set_measure(f, 0.0)


def test_lp_norm_rejects_small_p(rng):
    with pytest.raises(ValueError):
        bochner_lp_norm(random_psd(GridDomain.lebesgue(1, 2), 2, rng), 0.5)


def test_spectral_projection_keeps_boundary_on_lower_side():
    A = np.diag([0.5, 1.0, 2.0])
    P = spectral_projection(A, 1.0, "<=")
    assert np.allclose(np.diag(P).real, [1, 1, 0])
    assert is_projection(P)


def test_join_of_projections_is_range_of_sum(rng):
    u = rng.normal(size=(4, 1)) + 0j
    v = rng.normal(size=(4, 1)) + 0j
    Pu = u @ u.conj().T / (u.conj().T @ u)
    Pv = v @ v.conj().T / (v.conj().T @ v)
    J = join_projections([Pu, Pv])
    assert is_projection(J)
    assert np.trace(J).real == pytest.approx(2.0)
    assert np.allclose(J @ Pu, Pu) and np.allclose(J @ Pv, Pv)
    assert np.allclose(range_projection(np.hstack([u, 2 * u])), Pu)


def test_hermitian_part_symmetrizes():
    A = np.array([[[1.0, 2.0], [0.0, 1.0]]])
    H = hermitian_part(A)
    assert np.allclose(H, np.conj(np.swapaxes(H, 1, 2)))
