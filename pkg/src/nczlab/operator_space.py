"""Matrix-valued functions on dyadic grids, traces, norms and spectral tools.

Everything here works on the discrete model of ``L_inf([0,1)^d) (x) M_m``: a
function is one ``m x m`` complex matrix per dyadic cell, and the trace is

    phi(f) = sum_cells mu(cell) * tr f(cell).

Level sets and weak-L1 quasi-norms are evaluated exactly from eigenvalue
breakpoints, never by scanning a lambda grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

TAU_HERM = 1e-8
TAU_PROJ = 1e-8


def spectral_tolerance(norm: float) -> float:
    """Tie-breaking window around a spectral cutoff."""
    return 1e-10 * (1.0 + norm)


@dataclass(frozen=True, eq=False)
class GridDomain:
    """The ``2^(J d)`` half-open dyadic cells of ``[0,1)^d`` with weights.

    Cells are flattened in C order of their integer multi-index
    ``(k_1, ..., k_d)``, each ``k_i`` in ``range(2**J)``.
    """

    d: int
    J: int
    cell_measures: np.ndarray

    def __post_init__(self):
        if self.d < 1 or self.J < 0:
            raise ValueError(f"need d >= 1 and J >= 0, got d={self.d}, J={self.J}")
        mu = np.ascontiguousarray(self.cell_measures, dtype=float)
        if mu.shape != (self.n_cells,):
            raise ValueError(f"expected {self.n_cells} cell measures, got shape {mu.shape}")
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ValueError("cell measures must be finite and non-negative")
        if mu.sum() <= 0:
            raise ValueError("total measure must be positive")
        mu.setflags(write=False)
        object.__setattr__(self, "cell_measures", mu)

    @classmethod
    def lebesgue(cls, d: int, J: int) -> "GridDomain":
        n = 2 ** (J * d)
        return cls(d, J, np.full(n, 1.0 / n))

    @classmethod
    def from_density(cls, d: int, J: int, density: Callable, order: int = 8) -> "GridDomain":
        """Discretize ``density(x)`` by tensor Gauss-Legendre quadrature per cell.

        ``density`` receives an array of points with shape ``(..., d)``.
        Polynomial densities of degree < 2*order are integrated exactly.
        """
        nodes, weights = np.polynomial.legendre.leggauss(order)
        nodes = 0.5 * (nodes + 1.0)
        weights = 0.5 * weights
        grids = np.meshgrid(*([nodes] * d), indexing="ij")
        local = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.prod(np.meshgrid(*([weights] * d), indexing="ij"), axis=0).ravel()
        dom = cls.lebesgue(d, J)
        h = dom.side
        pts = dom.cell_corners[:, None, :] + h * local[None, :, :]
        vals = np.asarray(density(pts), dtype=float)
        mu = (vals * w[None, :]).sum(axis=1) * h**d
        return cls(d, J, np.clip(mu, 0.0, None))

    @property
    def n_cells(self) -> int:
        return 2 ** (self.J * self.d)

    @property
    def side(self) -> float:
        return 2.0 ** (-self.J)

    @property
    def total_measure(self) -> float:
        return float(self.cell_measures.sum())

    @property
    def multi_index(self) -> np.ndarray:
        n = 2**self.J
        return np.stack(np.unravel_index(np.arange(self.n_cells), (n,) * self.d), axis=-1)

    @property
    def cell_corners(self) -> np.ndarray:
        return self.multi_index * self.side

    @property
    def cell_centers(self) -> np.ndarray:
        return (self.multi_index + 0.5) * self.side

    def same_as(self, other: "GridDomain") -> bool:
        return (
            self.d == other.d
            and self.J == other.J
            and np.array_equal(self.cell_measures, other.cell_measures)
        )


@dataclass(frozen=True, eq=False)
class OpValuedFunction:
    """One ``m x m`` complex matrix per cell of a :class:`GridDomain`."""

    domain: GridDomain
    values: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 3 or vals.shape[0] != self.domain.n_cells or vals.shape[1] != vals.shape[2]:
            raise ValueError(
                f"values must have shape ({self.domain.n_cells}, m, m), got {vals.shape}"
            )
        if self.hermitian:
            defect = _herm_defect(vals)
            if defect > TAU_HERM:
                raise ValueError(f"hermitian flag set but defect is {defect:.3e}")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, domain: GridDomain, matrix, hermitian: bool | None = None) -> "OpValuedFunction":
        mat = np.atleast_2d(np.asarray(matrix, dtype=complex))
        vals = np.broadcast_to(mat, (domain.n_cells,) + mat.shape).copy()
        if hermitian is None:
            hermitian = _herm_defect(mat[None]) <= TAU_HERM
        return cls(domain, vals, hermitian)

    @classmethod
    def from_callable(cls, domain: GridDomain, fn: Callable, hermitian: bool = False) -> "OpValuedFunction":
        """Sample ``fn(center) -> matrix`` at every cell center."""
        vals = np.array([np.atleast_2d(fn(c)) for c in domain.cell_centers], dtype=complex)
        return cls(domain, vals, hermitian)

    def with_values(self, values, hermitian: bool | None = None) -> "OpValuedFunction":
        return OpValuedFunction(self.domain, values, self.hermitian if hermitian is None else hermitian)

    def adjoint(self) -> "OpValuedFunction":
        return self.with_values(np.conj(np.swapaxes(self.values, 1, 2)))

    def __add__(self, other: "OpValuedFunction") -> "OpValuedFunction":
        _check_same_domain(self, other)
        return OpValuedFunction(self.domain, self.values + other.values, self.hermitian and other.hermitian)

    def __sub__(self, other: "OpValuedFunction") -> "OpValuedFunction":
        _check_same_domain(self, other)
        return OpValuedFunction(self.domain, self.values - other.values, self.hermitian and other.hermitian)

    def __mul__(self, c) -> "OpValuedFunction":
        herm = self.hermitian and np.isreal(c)
        return OpValuedFunction(self.domain, self.values * c, bool(herm))

    __rmul__ = __mul__

    def __matmul__(self, other: "OpValuedFunction") -> "OpValuedFunction":
        _check_same_domain(self, other)
        return OpValuedFunction(self.domain, self.values @ other.values)


def _check_same_domain(a: OpValuedFunction, b: OpValuedFunction) -> None:
    if a.domain is not b.domain and not a.domain.same_as(b.domain):
        raise ValueError("functions live on different grid domains")


def _herm_defect(vals: np.ndarray) -> float:
    diff = np.abs(vals - np.conj(np.swapaxes(vals, -1, -2))).max(initial=0.0)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    return float(diff / scale)


def hermitian_part(vals: np.ndarray) -> np.ndarray:
    """Symmetrize ``(A + A*)/2``, logging the symmetrization defect."""
    vals = np.asarray(vals, dtype=complex)
    sym = 0.5 * (vals + np.conj(np.swapaxes(vals, -1, -2)))
    defect = float(np.abs(vals - sym).max(initial=0.0))
    if defect > 0:
        logger.debug("symmetrization defect %.3e", defect)
    return sym


def trace_integral(f: OpValuedFunction) -> complex:
    """``phi(f) = sum_cells mu(cell) tr f(cell)``."""
    tr = np.trace(f.values, axis1=1, axis2=2)
    return complex(np.dot(f.domain.cell_measures, tr))


def singular_values(f: OpValuedFunction) -> np.ndarray:
    """Per-cell singular values, shape ``(n_cells, m)``, descending."""
    if f.hermitian:
        return np.sort(np.abs(np.linalg.eigvalsh(hermitian_part(f.values))), axis=1)[:, ::-1]
    return np.linalg.svd(f.values, compute_uv=False)


def bochner_lp_norm(f: OpValuedFunction, p: float) -> float:
    """``(sum_cells mu * ||f(cell)||_{S_p}^p)^{1/p}``; ``p = inf`` gives the sup of operator norms.

    Cells of zero measure are ignored for ``p = inf`` (they are null sets).
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = singular_values(f)
    mu = f.domain.cell_measures
    if np.isinf(p):
        live = mu > 0
        return float(s[live].max(initial=0.0))
    return float(np.dot(mu, (s**p).sum(axis=1)) ** (1.0 / p))


@dataclass(frozen=True)
class SpectralDistribution:
    """Eigenvalue/weight pairs, sorted descending by eigenvalue, equal values merged."""

    eigenvalues: np.ndarray
    weights: np.ndarray

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.eigenvalues.tolist(), self.weights.tolist()))


def _merge_distribution(vals: np.ndarray, wts: np.ndarray) -> SpectralDistribution:
    vals = np.asarray(vals, dtype=float).ravel()
    wts = np.asarray(wts, dtype=float).ravel()
    order = np.argsort(-vals, kind="stable")
    vals, wts = vals[order], wts[order]
    if vals.size == 0:
        return SpectralDistribution(vals, wts)
    uniq, start = np.unique(-vals, return_index=True)
    merged = np.add.reduceat(wts, start)
    return SpectralDistribution(-uniq, merged)


def spectral_distribution(f: OpValuedFunction) -> SpectralDistribution:
    """Distribution of eigenvalues (of ``f`` if Hermitian, else of ``|f|``).

    Every cell contributes its ``m`` eigenvalues, each weighted by the cell's
    measure.
    """
    mu = f.domain.cell_measures
    if f.hermitian:
        try:
            ev = np.linalg.eigvalsh(hermitian_part(f.values))
        except np.linalg.LinAlgError:
            _locate_eig_failure(f.values)
            raise
    else:
        ev = singular_values(f)
    return _merge_distribution(ev, np.repeat(mu[:, None], f.m, axis=1))


def _locate_eig_failure(vals: np.ndarray) -> None:
    for i, a in enumerate(vals):
        try:
            np.linalg.eigvalsh(hermitian_part(a))
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"eigensolver failed on cell {i}") from exc


def level_set_measure(f: OpValuedFunction, lam: float) -> float:
    """``phi{|f| > lam}``: cell measure times the number of singular values above ``lam``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    s = singular_values(f)
    return float(np.dot(f.domain.cell_measures, (s > lam).sum(axis=1)))


def weak_sup(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """Exact ``sup_lam lam * sum{w : v > lam}`` over non-negative ``values``.

    Returns ``(sup, lam_star)`` where ``lam_star`` is the breakpoint approached
    from below. For a step distribution the supremum on ``[s_{k+1}, s_k)`` is
    the limit ``s_k * W_k`` with ``W_k`` the weight of values ``>= s_k``.
    """
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    keep = (v > 0) & (w > 0)
    if not keep.any():
        return 0.0, 0.0
    dist = _merge_distribution(v[keep], w[keep])
    cum = np.cumsum(dist.weights)
    prods = dist.eigenvalues * cum
    k = int(np.argmax(prods))
    return float(prods[k]), float(dist.eigenvalues[k])


def weak_l1_quasinorm(f: OpValuedFunction, lam_grid: Sequence[float] | None = None) -> float:
    """``sup_lam lam * phi{|f| > lam}``, evaluated at the spectral breakpoints.

    ``lam_grid`` is only validated; use :func:`weak_l1_profile` for tables.
    """
    if lam_grid is not None and len(lam_grid) == 0:
        raise ValueError("lam_grid must be non-empty")
    return weak_l1_breakpoint(f)[0]


def weak_l1_breakpoint(f: OpValuedFunction) -> tuple[float, float]:
    s = singular_values(f)
    mu = np.repeat(f.domain.cell_measures[:, None], f.m, axis=1)
    return weak_sup(s, mu)


def weak_l1_profile(f: OpValuedFunction, lam_grid: Iterable[float]) -> np.ndarray:
    """``lam * phi{|f| > lam}`` on a reporting grid."""
    s_all = singular_values(f).ravel()
    order = np.argsort(s_all, kind="stable")
    s = s_all[order]
    w = np.repeat(f.domain.cell_measures, f.m)[order]
    tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    lam = np.asarray(list(lam_grid), dtype=float)
    idx = np.searchsorted(s, lam, side="right")
    return lam * tail[idx]


def spectral_projection(A, cutoff: float, side: str = "<=") -> np.ndarray:
    """Projection onto eigenvectors of Hermitian ``A`` on one side of ``cutoff``.

    Eigenvalues within ``1e-10 (1 + ||A||)`` of the cutoff count as ``<=``.
    Works on a single matrix or a stack ``(..., m, m)``.
    """
    if side not in ("<=", ">"):
        raise ValueError("side must be '<=' or '>'")
    A = np.asarray(A, dtype=complex)
    if _herm_defect(A if A.ndim == 3 else A[None]) > TAU_HERM:
        raise ValueError("spectral_projection needs a Hermitian matrix")
    w, V = np.linalg.eigh(hermitian_part(A))
    norm = np.abs(w).max(axis=-1, keepdims=True)
    below = w <= cutoff + spectral_tolerance(norm)
    mask = below if side == "<=" else ~below
    Vm = V * mask[..., None, :]
    return Vm @ np.conj(np.swapaxes(V, -1, -2))


def is_projection(P, tol: float = TAU_PROJ) -> bool:
    P = np.asarray(P, dtype=complex)
    return bool(
        np.abs(P - np.conj(P.T)).max(initial=0.0) <= tol and np.abs(P @ P - P).max(initial=0.0) <= tol
    )


def range_projection(X, rtol: float = 1e-9) -> np.ndarray:
    """Orthogonal projection onto the column span of ``X``."""
    X = np.asarray(X, dtype=complex)
    m = X.shape[0]
    if X.size == 0:
        return np.zeros((m, m), dtype=complex)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((m, m), dtype=complex)
    U = U[:, s > rtol * max(1.0, s[0])]
    return U @ np.conj(U.T)


def join_projections(projections: Sequence) -> np.ndarray:
    """Lattice join: the projection onto the sum of the ranges."""
    mats = [np.asarray(P, dtype=complex) for P in projections]
    if not mats:
        raise ValueError("need at least one projection")
    m = mats[0].shape[0]
    if any(P.shape != (m, m) for P in mats):
        raise ValueError("projections must share one size")
    return range_projection(np.concatenate(mats, axis=1))


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
