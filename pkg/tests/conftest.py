import numpy as np
import pytest
from hypothesis import settings

from nczlab.operator_space import OpValuedFunction

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


def random_psd(domain, m, rng, spread=2.0):
    """Wishart cells with log-normal weights, ``||f||_1 = 1``."""
    X = rng.normal(size=(domain.n_cells, m, m)) + 1j * rng.normal(size=(domain.n_cells, m, m))
    w = np.exp(spread * rng.normal(size=domain.n_cells))
    vals = X @ np.conj(np.swapaxes(X, 1, 2)) * w[:, None, None]
    vals = 0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2)))
    f = OpValuedFunction(domain, vals, hermitian=True)
    tr = np.real(np.trace(vals, axis1=1, axis2=2))
    return f * (1.0 / float(np.dot(domain.cell_measures, tr)))


def top_mean(f, filt):
    return float(np.linalg.eigvalsh(filt.atom_means(f.values, 0)).max())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
