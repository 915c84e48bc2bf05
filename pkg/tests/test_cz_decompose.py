import numpy as np
import pytest
from hypothesis import given, strategies as st

from nczlab.cuculescu import run_cuculescu
from nczlab.cz_decompose import (build_zeta, classical_cz_scalar, decompose_nonregular, decompose_regular,
                                 verify_nonregular_lemma, verify_reconstruction, verify_regular_lemma,
                                 verify_sandwich_structure, verify_vanishing_identities, verify_zeta)
from nczlab.filtration import build_dyadic, build_nondoubling_filtration_1d
from nczlab.harness import generate_test_function, reference_measure

from conftest import random_psd, top_mean


@given(st.integers(0, 10_000), st.sampled_from([1, 2]), st.sampled_from([1, 2, 4]), st.floats(1.0, 8.0))
def test_regular_lemma_and_identities(seed, d, m, factor):
    rng = np.random.default_rng(seed)
    filt = build_dyadic(d, 4 if d == 1 else 3, np.exp(rng.normal(size=16 if d == 1 else 64)))
    f = random_psd(filt.domain, m, rng, spread=2.5)
    lam = factor * top_mean(f, filt)
    seq = run_cuculescu(f, lam, filt)
    parts = decompose_regular(f, lam, filt, seq)
    assert verify_regular_lemma(parts).passed
    assert verify_vanishing_identities(seq, f).passed
    assert verify_sandwich_structure(parts).passed


@given(st.integers(0, 10_000), st.sampled_from([1, 3]), st.floats(1.0, 8.0))
def test_nonregular_lemma(seed, m, factor):
    rng = np.random.default_rng(seed)
    filt = build_dyadic(1, 5, np.exp(2 * rng.normal(size=32)))
    f = random_psd(filt.domain, m, rng, spread=2.5)
    lam = factor * top_mean(f, filt)
    parts = decompose_nonregular(f, lam, filt)
    assert verify_nonregular_lemma(parts).passed
    assert verify_reconstruction(parts).passed


@pytest.mark.parametrize("name", ["cubic", "two-bump"])
def test_nonregular_lemma_on_nondoubling_filtrations(name):
    filt = build_nondoubling_filtration_1d(reference_measure(name, 7))
    rng = np.random.default_rng(7)
    f = random_psd(filt.domain, 2, rng, spread=2.0)
    lam = 1.5 * top_mean(f, filt)
    parts = decompose_nonregular(f, lam, filt)
    assert verify_nonregular_lemma(parts).passed


def test_regular_rejects_filtration_with_null_atoms():
    filt = build_nondoubling_filtration_1d(reference_measure("two-bump", 7))
    rng = np.random.default_rng(3)
    f = random_psd(filt.domain, 1, rng)
    with pytest.raises(ValueError):
        decompose_regular(f, 2 * top_mean(f, filt), filt)


@given(st.integers(0, 10_000), st.floats(1.0, 4.0))
def test_scalar_case_is_classical_decomposition(seed, factor):
    rng = np.random.default_rng(seed)
    filt = build_dyadic(1, 6)
    f = random_psd(filt.domain, 1, rng, spread=3.0)
    u = f.values[:, 0, 0].real
    lam = factor * top_mean(f, filt)
    seq = run_cuculescu(f, lam, filt)
    parts = decompose_regular(f, lam, filt, seq)
    stopped, g, b = classical_cz_scalar(u, lam, filt)
    assert sorted(stopped) == sorted((j, int(i)) for j in range(1, 7) for i in seq.bad_atoms(j))
    assert np.allclose(parts.g.values[:, 0, 0].real, g, rtol=1e-12, atol=1e-14)
    assert np.allclose(parts.b_d_total()[:, 0, 0].real, sum(b.values(), np.zeros_like(u)), atol=1e-12)
    assert np.abs(parts.b_off_total()).max() < 1e-14


def test_no_bad_parts_when_lambda_is_large(rng):
    filt = build_dyadic(1, 4)
    f = random_psd(filt.domain, 2, rng)
    lam = 2 * max(np.linalg.eigvalsh(f.values).max(), 1.0)
    parts = decompose_regular(f, lam, filt)
    assert np.allclose(parts.g.values, f.values)
    assert np.abs(parts.b_d_total()).max() == 0 and np.abs(parts.b_off_total()).max() == 0


def test_lemma_check_fails_when_constant_is_too_small():
    filt = build_dyadic(1, 6)
    f = generate_test_function(3, 1, 6, 1, "adversarial-cell-mass", domain=filt.domain)
    lam = 1.0 * top_mean(f, filt)
    parts = decompose_nonregular(f, lam, filt)
    assert not verify_nonregular_lemma(parts, l2_constant=1e-3).passed


@given(st.integers(0, 10_000), st.sampled_from(["spiky-psd", "rank-one-bumps", "adversarial-cell-mass"]))
def test_zeta_annihilates_dilated_bad_atoms(seed, profile):
    filt = build_dyadic(1, 6)
    f = generate_test_function(seed, 1, 6, 4, profile, domain=filt.domain)
    lam = 1.5 * top_mean(f, filt)
    seq = run_cuculescu(f, lam, filt)
    z = build_zeta(seq)
    rep = verify_zeta(z, seq, f)
    assert rep.passed
    zv = z.values
    assert np.abs(zv @ zv - zv).max() < 1e-10


def test_zeta_annihilation_on_hard_member():
    # a rank-one bump case in d=2 where thresholding sum(pi_Q) left a 2e-5 defect
    filt = build_dyadic(2, 4)
    f = generate_test_function(190, 2, 4, 8, "rank-one-bumps", domain=filt.domain)
    for factor in (1.0, 1.5, 3.0, 8.0):
        lam = factor * top_mean(f, filt)
        seq = run_cuculescu(f, lam, filt)
        assert verify_zeta(build_zeta(seq), seq, f)["zeta.annihilation"].value <= 1e-10


def test_zeta_ball_mode_on_nondoubling():
    filt = build_nondoubling_filtration_1d(reference_measure("cubic", 7))
    rng = np.random.default_rng(11)
    f = random_psd(filt.domain, 2, rng, spread=2.0)
    seq = run_cuculescu(f, 1.2 * top_mean(f, filt), filt)
    z = build_zeta(seq)
    assert z.mode == "ball"
    assert verify_zeta(z, seq, f)["zeta.annihilation"].passed
