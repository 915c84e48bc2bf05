"""Cuculescu's decreasing projections at height lambda.

On an atomic filtration everything is atomwise: with ``xi`` the projection of
the parent atom and ``f_Q`` the average of ``f`` over ``Q``,

    pi_Q = 1_{(lambda, inf)}(xi f_Q xi),     xi_Q = xi - pi_Q,

which is the recursion ``q_j = 1_{[0, lambda]}(q_{j-1} f_j q_{j-1}) q_{j-1}``
written so that both pieces come out of one eigendecomposition. Eigenvalues
of ``xi f_Q xi`` above ``lambda`` live in the range of ``xi``, so ``pi_Q`` is
automatically dominated by ``xi``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .filtration import AtomicFiltration, _check_domain
from .operator_space import OpValuedFunction, bochner_lp_norm, hermitian_part, spectral_tolerance
from .report import Report

logger = logging.getLogger(__name__)

PSD_CLIP = 1e-10


@dataclass(frozen=True, eq=False)
class CuculescuSequence:
    """Per-atom projections ``xi_Q`` (value of ``q_j``) and ``pi_Q`` (value of ``p_j``).

    ``xi[j]`` has shape ``(n_atoms_j, m, m)``; ``pi[0]`` is all zeros.
    The terminal projection is ``q = q_J`` at the working depth.
    """

    lam: float
    filt: AtomicFiltration
    xi: list[np.ndarray]
    pi: list[np.ndarray]

    @property
    def J(self) -> int:
        return self.filt.J

    @property
    def m(self) -> int:
        return self.xi[0].shape[-1]

    def q(self, j: int) -> OpValuedFunction:
        return OpValuedFunction(self.filt.domain, self.filt.expand(self.xi[j], j), hermitian=True)

    def p(self, j: int) -> OpValuedFunction:
        return OpValuedFunction(self.filt.domain, self.filt.expand(self.pi[j], j), hermitian=True)

    @property
    def q_final(self) -> OpValuedFunction:
        return self.q(self.J)

    def q_cells(self, j: int) -> np.ndarray:
        return self.filt.expand(self.xi[j], j)

    def p_cells(self, j: int) -> np.ndarray:
        return self.filt.expand(self.pi[j], j)

    def bad_atoms(self, j: int) -> np.ndarray:
        """Indices of level-``j`` atoms with ``pi_Q != 0``."""
        tr = np.real(np.trace(self.pi[j], axis1=1, axis2=2))
        return np.nonzero(tr > 0.5)[0]


def _prepare_psd(f: OpValuedFunction) -> np.ndarray:
    vals = hermitian_part(f.values)
    w, V = np.linalg.eigh(vals)
    scale = 1.0 + np.abs(w).max(axis=1)
    low = w.min(axis=1)
    bad = np.nonzero(low < -PSD_CLIP * scale)[0]
    if bad.size:
        raise ValueError(f"input is not positive semidefinite on cell {int(bad[0])} "
                         f"(min eigenvalue {low[bad[0]]:.3e})")
    if np.any(low < 0):
        logger.debug("clipping PSD defect %.3e", float(-low.min()))
        w = np.clip(w, 0.0, None)
        vals = (V * w[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))
    return vals


def run_cuculescu(f: OpValuedFunction, lam: float, filt: AtomicFiltration) -> CuculescuSequence:
    """Cuculescu projections of a positive ``f`` at height ``lam``.

    Level 0 is the trivial partition with ``q_0 = 1``, which presupposes
    ``E_0 f <= lam``; larger averages are rejected.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    _check_domain(f, filt)
    vals = _prepare_psd(f)
    m = f.m
    f0 = hermitian_part(filt.atom_means(vals, 0))
    top = float(np.linalg.eigvalsh(f0).max())
    if top > lam + spectral_tolerance(top):
        raise ValueError(f"E_0 f has norm {top:.6g} > lam = {lam:.6g}; start level must satisfy q_0 = 1")
    eye = np.eye(m, dtype=complex)
    xi = [np.broadcast_to(eye, (1, m, m)).copy()]
    pi = [np.zeros((1, m, m), dtype=complex)]
    for j in range(1, filt.J + 1):
        parent_xi = xi[-1][filt.parents(j)]
        fj = hermitian_part(filt.atom_means(vals, j))
        A = hermitian_part(parent_xi @ fj @ parent_xi)
        w, V = np.linalg.eigh(A)
        norm = np.abs(w).max(axis=1, keepdims=True)
        above = w > lam + spectral_tolerance(norm)
        null = filt.atom_measures(j) <= 0
        above[null] = False
        Vm = V * above[:, None, :]
        p = hermitian_part(Vm @ np.conj(np.swapaxes(V, 1, 2)))
        xi.append(hermitian_part(parent_xi - p))
        pi.append(p)
    return CuculescuSequence(float(lam), filt, xi, pi)


def verify_cuculescu(seq: CuculescuSequence, f: OpValuedFunction, lam: float | None = None,
                     filt: AtomicFiltration | None = None, tol: float = 1e-9) -> Report:
    """Check the four defining properties with worst-case defects.

    A: each ``q_j`` is a projection, is ``Sigma_j``-measurable (``E_j q_j = q_j``)
       and ``q_j <= q_{j-1}``;
    B: ``min eig(lam q_j - q_j f_j q_j) >= -tol lam`` on every atom;
    C: ``||[q_j, q_{j-1} f_j q_{j-1}]|| <= tol``;
    D: ``q f q <= lam q`` per cell and ``lam phi(1 - q) <= ||f||_1 (1 + tol)``.
    """
    lam = seq.lam if lam is None else lam
    filt = seq.filt if filt is None else filt
    vals = hermitian_part(f.values)
    m = f.m
    eye = np.eye(m)
    rep = Report("cuculescu")

    defect_a = 0.0
    for j in range(filt.J + 1):
        cells = filt.expand(seq.xi[j], j)
        defect_a = max(defect_a, float(np.abs(cells @ cells - cells).max()))
        defect_a = max(defect_a, float(np.abs(cells - np.conj(np.swapaxes(cells, 1, 2))).max()))
        means = filt.expand(filt.atom_means(cells, j), j)
        live = filt.domain.cell_measures > 0
        defect_a = max(defect_a, float(np.abs(means - cells)[live].max(initial=0.0)))
        if j == 0:
            defect_a = max(defect_a, float(np.abs(seq.xi[0] - eye).max()))
        else:
            parent = filt.expand(seq.xi[j - 1], j - 1)
            defect_a = max(defect_a, float(np.abs(parent @ cells - cells).max()))
            p = filt.expand(seq.pi[j], j)
            defect_a = max(defect_a, float(np.abs(parent - cells - p).max()))
    rep.add("cuculescu.A", defect_a <= tol, value=defect_a, bound=tol)

    worst_b, worst_c = 0.0, 0.0
    for j in range(1, filt.J + 1):
        live = filt.atom_measures(j) > 0
        fj = hermitian_part(filt.atom_means(vals, j))
        x = seq.xi[j]
        B = lam * x - x @ fj @ x
        ev = np.linalg.eigvalsh(hermitian_part(B))[live]
        if ev.size:
            worst_b = min(worst_b, float(ev.min()) / lam)
        xp = seq.xi[j - 1][filt.parents(j)]
        A = xp @ fj @ xp
        comm = x @ A - A @ x
        if live.any():
            worst_c = max(worst_c, float(np.linalg.norm(comm[live], ord=2, axis=(1, 2)).max()))
    rep.add("cuculescu.B", worst_b >= -tol, value=worst_b, bound=-tol)
    rep.add("cuculescu.C", worst_c <= tol, value=worst_c, bound=tol)

    q = filt.expand(seq.xi[filt.J], filt.J)
    local = lam * q - q @ vals @ q
    live = filt.domain.cell_measures > 0
    worst_d = float(np.linalg.eigvalsh(hermitian_part(local))[live].min()) / lam
    rep.add("cuculescu.D.local", worst_d >= -tol, value=worst_d, bound=-tol)
    mass = float(np.dot(filt.domain.cell_measures, np.real(np.trace(eye - q, axis1=1, axis2=2))))
    fl1 = bochner_lp_norm(f, 1)
    rep.add("cuculescu.D.global", lam * mass <= fl1 * (1 + tol), value=lam * mass, bound=fl1)
    rep.data.update(lam=lam, phi_one_minus_q=mass, f_l1=fl1)
    return rep
