"""Regular and nonregular Calderon-Zygmund decompositions of matrix-valued functions.

Both decompositions are computed on cells from a Cuculescu sequence:

regular     g = q f q + sum_j p_j f_j p_j,
            b_d,j = p_j (f - f_j) p_j,  b_off,j = p_j (f - f_j) q_j + q_j (f - f_j) p_j;
nonregular  g = q f q + sum_j E_{j-1}(p_j f p_j),
            b_d,j = p_j f p_j - E_{j-1}(p_j f p_j),  b_off,j = p_j f q_j + q_j f p_j.

Also here: the vanishing identities, the zeta projection and lemma verifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cuculescu import CuculescuSequence, run_cuculescu
from .filtration import AtomicFiltration, regularity_constant
from .operator_space import OpValuedFunction, bochner_lp_norm, hermitian_part
from .report import Report

TAU_REC = 1e-10
ZETA_RTOL = 1e-12


def _adj(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def _opnorm(x: np.ndarray) -> float:
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, ord=2, axis=(-2, -1)).max())


def _s1(domain, vals: np.ndarray) -> float:
    s = np.linalg.svd(vals, compute_uv=False)
    return float(np.dot(domain.cell_measures, s.sum(axis=1)))


@dataclass(eq=False)
class CZParts:
    """Good part and per-level bad parts, stored as cell arrays ``(N, m, m)``.

    ``b_d[j-1]`` and ``b_off[j-1]`` hold level ``j``.
    """

    mode: str
    g: OpValuedFunction
    b_d: list[np.ndarray]
    b_off: list[np.ndarray]
    f: OpValuedFunction
    lam: float
    seq: CuculescuSequence
    zeta: "ZetaProjection | None" = None
    meta: dict = field(default_factory=dict)

    @property
    def filt(self) -> AtomicFiltration:
        return self.seq.filt

    @property
    def J(self) -> int:
        return len(self.b_d)

    def b_d_total(self) -> np.ndarray:
        return np.sum(self.b_d, axis=0) if self.b_d else np.zeros_like(self.f.values)

    def b_off_total(self) -> np.ndarray:
        return np.sum(self.b_off, axis=0) if self.b_off else np.zeros_like(self.f.values)

    def reconstruction_defect(self) -> float:
        """``||f - g - b_d - b_off||_1`` with levels summed in ascending order."""
        r = self.f.values - self.g.values
        for bd, bo in zip(self.b_d, self.b_off):
            r = r - bd - bo
        return _s1(self.f.domain, r)


def _cells(seq: CuculescuSequence, f: np.ndarray):
    filt = seq.filt
    q = [seq.q_cells(j) for j in range(filt.J + 1)]
    p = [seq.p_cells(j) for j in range(filt.J + 1)]
    fj = [filt.expand(filt.atom_means(f, j), j) for j in range(filt.J + 1)]
    return q, p, fj


def decompose_regular(f: OpValuedFunction, lam: float, filt: AtomicFiltration,
                      seq: CuculescuSequence | None = None) -> CZParts:
    """Regular decomposition; the filtration must have a finite regularity constant."""
    c_reg = regularity_constant(filt)
    if c_reg is None:
        raise ValueError("regular decomposition needs a filtration without null atoms")
    seq = run_cuculescu(f, lam, filt) if seq is None else seq
    vals = f.values
    q, p, fj = _cells(seq, vals)
    qJ = q[filt.J]
    g = qJ @ vals @ qJ
    b_d, b_off = [], []
    for j in range(1, filt.J + 1):
        g = g + p[j] @ fj[j] @ p[j]
        d = vals - fj[j]
        b_d.append(p[j] @ d @ p[j])
        b_off.append(p[j] @ d @ q[j] + q[j] @ d @ p[j])
    gf = OpValuedFunction(f.domain, hermitian_part(g), hermitian=True)
    return CZParts("regular", gf, b_d, b_off, f, float(lam), seq, meta={"c_reg": c_reg})


def decompose_nonregular(f: OpValuedFunction, lam: float, filt: AtomicFiltration,
                         seq: CuculescuSequence | None = None) -> CZParts:
    """Nonregular decomposition; valid on any atomic filtration."""
    seq = run_cuculescu(f, lam, filt) if seq is None else seq
    vals = f.values
    q, p, _ = _cells(seq, vals)
    qJ = q[filt.J]
    g = qJ @ vals @ qJ
    b_d, b_off = [], []
    for j in range(1, filt.J + 1):
        pfp = p[j] @ vals @ p[j]
        e = filt.expand(filt.atom_means(pfp, j - 1), j - 1)
        g = g + e
        b_d.append(pfp - e)
        b_off.append(p[j] @ vals @ q[j] + q[j] @ vals @ p[j])
    gf = OpValuedFunction(f.domain, hermitian_part(g), hermitian=True)
    return CZParts("nonregular", gf, b_d, b_off, f, float(lam), seq,
                   meta={"c_reg": regularity_constant(filt)})


def verify_reconstruction(parts: CZParts, tol: float = TAU_REC) -> Report:
    rep = Report(f"cz.{parts.mode}.reconstruction")
    fl1 = bochner_lp_norm(parts.f, 1)
    defect = parts.reconstruction_defect()
    rep.add("cz.reconstruction", defect <= tol * fl1, value=defect, bound=tol * fl1)
    return rep


def verify_vanishing_identities(seq: CuculescuSequence, f: OpValuedFunction,
                                filt: AtomicFiltration | None = None, tol: float = 1e-10) -> Report:
    """Max of ``||p_j f_{j^k} p_k||`` over ``j != k`` and of ``||p_j f_j q||`` over ``j``."""
    filt = seq.filt if filt is None else filt
    q, p, fj = _cells(seq, hermitian_part(f.values))
    qJ = q[filt.J]
    J = filt.J
    off = 0.0
    worst_pair = None
    for j in range(1, J + 1):
        for k in range(1, J + 1):
            if j == k:
                continue
            v = _opnorm(p[j] @ fj[min(j, k)] @ p[k])
            if v > off:
                off, worst_pair = v, (j, k)
    vq = max((_opnorm(p[j] @ fj[j] @ qJ) for j in range(1, J + 1)), default=0.0)
    rep = Report("cz.vanishing")
    rep.add("cz.vanishing.offdiag", off <= tol, value=off, bound=tol, worst_pair=worst_pair)
    rep.add("cz.vanishing.q", vq <= tol, value=vq, bound=tol)
    return rep


def _mean_zero_defect(filt: AtomicFiltration, parts: list[np.ndarray], shift: int) -> float:
    worst = 0.0
    for j, b in enumerate(parts, start=1):
        worst = max(worst, _opnorm(filt.atom_means(b, j - shift)))
    return worst


def _common_checks(rep: Report, parts: CZParts, tol: float, rec_tol: float = TAU_REC) -> None:
    f = parts.f
    fl1 = bochner_lp_norm(f, 1)
    g1 = bochner_lp_norm(parts.g, 1)
    rep.add("cz.g_l1", g1 <= fl1 * (1 + tol), value=g1, bound=fl1)
    bd = sum(_s1(f.domain, b) for b in parts.b_d)
    rep.add("cz.bd_l1", bd <= 2 * fl1 * (1 + tol), value=bd, bound=2 * fl1)
    rec = parts.reconstruction_defect()
    rep.add("cz.reconstruction", rec <= rec_tol * fl1, value=rec, bound=rec_tol * fl1)


def verify_regular_lemma(parts: CZParts, f: OpValuedFunction | None = None, lam: float | None = None,
                         c_reg: float | None = None, tol: float = 1e-9, rec_tol: float = TAU_REC) -> Report:
    """L1, L_inf, bad-part and mean-zero checks for the regular decomposition."""
    if parts.mode != "regular":
        raise ValueError("expected a regular decomposition")
    lam = parts.lam if lam is None else lam
    c_reg = parts.meta["c_reg"] if c_reg is None else c_reg
    rep = Report("cz.regular")
    _common_checks(rep, parts, tol, rec_tol)
    ginf = bochner_lp_norm(parts.g, np.inf)
    rep.add("cz.g_linf", ginf <= c_reg * lam * (1 + tol), value=ginf / lam, bound=c_reg,
            note="value is ||g||_inf / lambda")
    md = max(_mean_zero_defect(parts.filt, parts.b_d, 0), _mean_zero_defect(parts.filt, parts.b_off, 0))
    rep.add("cz.mean_zero", md <= tol, value=md, bound=tol)
    pos = float(np.linalg.eigvalsh(parts.g.values).min())
    rep.data.update(g_min_eig=pos, c_reg=c_reg, lam=lam)
    return rep


def verify_nonregular_lemma(parts: CZParts, f: OpValuedFunction | None = None, lam: float | None = None,
                            tol: float = 1e-9, l2_constant: float = 6.0, rec_tol: float = TAU_REC) -> Report:
    """L1, L2, bad-part and mean-zero checks for the nonregular decomposition.

    The diagonal bad part here satisfies ``E_{j-1}(b_d,j) = 0``, which is what
    is asserted; the stronger ``E_j(b_d,j)`` is recorded but not asserted since
    ``E_j(p_j f p_j) != E_{j-1}(p_j f p_j)`` in general.
    """
    if parts.mode != "nonregular":
        raise ValueError("expected a nonregular decomposition")
    lam = parts.lam if lam is None else lam
    rep = Report("cz.nonregular")
    _common_checks(rep, parts, tol, rec_tol)
    fl1 = bochner_lp_norm(parts.f, 1)
    g2 = bochner_lp_norm(parts.g, 2) ** 2
    bound = l2_constant * lam * fl1
    rep.add("cz.g_l2", g2 <= bound * (1 + tol), value=g2, bound=bound,
            ratio=g2 / (lam * fl1) if fl1 > 0 else 0.0)
    md = max(_mean_zero_defect(parts.filt, parts.b_d, 1), _mean_zero_defect(parts.filt, parts.b_off, 0))
    rep.add("cz.mean_zero", md <= tol, value=md, bound=tol, note="E_{j-1}(b_d,j) and E_j(b_off,j)")
    rep.data["E_j_b_d_defect"] = _mean_zero_defect(parts.filt, parts.b_d, 0)
    return rep


def verify_sandwich_structure(parts: CZParts, tol: float = 1e-10) -> Report:
    """``q_j b_off,j q_j = 0`` and ``p_j b_off,j p_j = 0`` per cell."""
    rep = Report("cz.sandwich")
    worst = 0.0
    for j, bo in enumerate(parts.b_off, start=1):
        q = parts.seq.q_cells(j)
        p = parts.seq.p_cells(j)
        worst = max(worst, _opnorm(q @ bo @ q), _opnorm(p @ bo @ p))
    rep.add("cz.sandwich", worst <= tol, value=worst, bound=tol)
    return rep


# -- zeta ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ZetaProjection:
    zeta: OpValuedFunction
    mode: str
    dilation: float
    covers: list[tuple[int, int, np.ndarray]]

    @property
    def values(self) -> np.ndarray:
        return self.zeta.values


def _dilated_cells(filt: AtomicFiltration, atom, mode: str, dilation: float) -> np.ndarray:
    centers = filt.domain.cell_centers
    if mode == "dyadic":
        half = dilation * atom.side / 2
        inside = np.all(np.abs(centers - atom.center) < half + 1e-14, axis=1)
    else:
        if not atom.has_ball:
            raise ValueError(f"atom {atom.id} at level {atom.level} has no ball data")
        r = dilation * atom.ball_radius
        inside = np.linalg.norm(centers - np.asarray(atom.ball_center), axis=1) < r + 1e-14
    return np.nonzero(inside)[0]


def build_zeta(seq: CuculescuSequence, filt: AtomicFiltration | None = None,
               dilation: float | None = None, mode: str | None = None) -> ZetaProjection:
    """``zeta(x) = 1 - join{pi_Q : x in dilated Q}``, one join per cell.

    A cell belongs to a dilated atom when its center does. The join is the
    range projection of the stacked orthonormal bases of the covering
    ``pi_Q``, from an SVD with singular values below ``1e-12 s_max`` dropped.
    A dropped direction ``v`` then has ``||pi_Q v|| <= 1e-12 s_max``, whereas
    thresholding the eigenvalues of ``sum pi_Q`` would only give the square
    root of the threshold.
    """
    filt = seq.filt if filt is None else filt
    if mode is None:
        mode = "dyadic" if filt.is_dyadic else "ball"
    if dilation is None:
        dilation = 5.0 if mode == "dyadic" else float(filt.params.get("alpha", 4.0))
    N, m = filt.domain.n_cells, seq.m
    covers = []
    per_cell: list[list[np.ndarray]] = [[] for _ in range(N)]
    for j in range(1, filt.J + 1):
        atoms = filt.levels[j]
        for i in seq.bad_atoms(j):
            if filt.atom_measures(j)[i] <= 0:
                continue
            cells = _dilated_cells(filt, atoms[i], mode, dilation)
            w, V = np.linalg.eigh(hermitian_part(seq.pi[j][i]))
            basis = V[:, w > 0.5]
            for c in cells:
                per_cell[c].append(basis)
            covers.append((j, int(i), cells))
    width = max((sum(b.shape[1] for b in bs) for bs in per_cell), default=0)
    join = np.zeros((N, m, m), dtype=complex)
    if width:
        X = np.zeros((N, m, width), dtype=complex)
        for c, bs in enumerate(per_cell):
            if bs:
                cols = np.concatenate(bs, axis=1)
                X[c, :, : cols.shape[1]] = cols
        U, sv, _ = np.linalg.svd(X, full_matrices=False)
        keep = sv > ZETA_RTOL * np.maximum(sv[:, :1], 1e-300)
        keep &= sv > 0
        Uk = U[:, :, : sv.shape[1]] * keep[:, None, :]
        join = Uk @ _adj(Uk)
    zeta = hermitian_part(np.eye(m) - join)
    return ZetaProjection(OpValuedFunction(filt.domain, zeta, hermitian=True), mode, float(dilation), covers)


def verify_zeta(z: ZetaProjection, seq: CuculescuSequence, f: OpValuedFunction,
                lam: float | None = None, filt: AtomicFiltration | None = None,
                tol: float = 1e-10, constant: float | None = None) -> Report:
    """Annihilation ``zeta(x) pi_Q = pi_Q zeta(x) = 0`` on dilated atoms and the measure bound."""
    filt = seq.filt if filt is None else filt
    lam = seq.lam if lam is None else lam
    zv = z.values
    worst = 0.0
    for j, i, cells in z.covers:
        pi = seq.pi[j][i]
        if cells.size:
            worst = max(worst, _opnorm(zv[cells] @ pi), _opnorm(pi @ zv[cells]))
    rep = Report("zeta")
    rep.add("zeta.annihilation", worst <= tol, value=worst, bound=tol)
    m = seq.m
    mass = float(np.dot(filt.domain.cell_measures, np.real(np.trace(np.eye(m) - zv, axis1=1, axis2=2))))
    fl1 = bochner_lp_norm(f, 1)
    ratio = mass * lam / fl1 if fl1 > 0 else 0.0
    if constant is None and z.mode == "dyadic":
        constant = z.dilation ** filt.domain.d
    if constant is None:
        rep.add("zeta.measure", True, value=ratio, note="reported only; no bound asserted in ball mode")
    else:
        rep.add("zeta.measure", ratio <= constant * (1 + 1e-9), value=ratio, bound=constant)
    rep.data.update(phi_one_minus_zeta=mass)
    return rep


# -- scalar baseline ------------------------------------------------------------


def classical_cz_scalar(f: np.ndarray, lam: float, filt: AtomicFiltration):
    """Classical dyadic CZ decomposition of a scalar ``f >= 0`` on cells.

    Stopping atoms are the maximal atoms with mean ``> lam``. Returns
    ``(stopped, g, b)`` with ``stopped`` a list of ``(level, atom)`` and
    ``b`` a dict mapping each stopped pair to its cell array.
    """
    f = np.asarray(f, dtype=float)
    stopped_cells = np.zeros(f.shape[0], dtype=bool)
    stopped, b = [], {}
    g = f.copy()
    for j in range(1, filt.J + 1):
        means = filt.atom_means(f[:, None, None], j)[:, 0, 0].real
        lab = filt.labels[j]
        for i in np.nonzero(means > lam)[0]:
            cells = np.nonzero(lab == i)[0]
            if stopped_cells[cells].any() or filt.atom_measures(j)[i] <= 0:
                continue
            stopped_cells[cells] = True
            stopped.append((j, int(i)))
            g[cells] = means[i]
            bi = np.zeros_like(f)
            bi[cells] = f[cells] - means[i]
            b[(j, int(i))] = bi
    return stopped, g, b
