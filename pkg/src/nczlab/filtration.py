"""Atomic filtrations on dyadic grids.

A filtration is a list of levels ``0..J``; level ``j`` partitions the grid
cells into atoms, each atom being a union of atoms of level ``j + 1``. Level 0
is the whole domain and level ``J`` is the cell partition itself, so every
grid function is measurable with respect to the last level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .operator_space import GridDomain, OpValuedFunction
from .report import Report

TAU_GROWTH = 1e-9


class FiltrationConstructionError(RuntimeError):
    """Raised when an atom admits no valid split."""

    def __init__(self, message: str, atom: "Atom"):
        super().__init__(message)
        self.atom = atom


@dataclass(frozen=True, eq=False)
class Atom:
    """One atom of one level.

    ``lo``/``hi`` bound the atom (a cube or interval), ``side`` is its side
    length, and ``ball_center``/``ball_radius`` carry the comparable ball.
    """

    id: int
    level: int
    cells: np.ndarray
    measure: float
    lo: np.ndarray
    hi: np.ndarray
    parent: int | None = None
    ball_center: np.ndarray | None = None
    ball_radius: float | None = None

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def side(self) -> float:
        return float(np.max(self.hi - self.lo))

    @property
    def has_ball(self) -> bool:
        return self.ball_center is not None and self.ball_radius is not None


@dataclass(frozen=True, eq=False)
class AtomicFiltration:
    domain: GridDomain
    levels: list[list[Atom]]
    labels: list[np.ndarray]
    is_dyadic: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.levels) != len(self.labels):
            raise ValueError("levels and labels disagree")
        if len(self.levels[0]) != 1:
            raise ValueError("level 0 must be the trivial partition")

    @property
    def J(self) -> int:
        return len(self.levels) - 1

    def n_atoms(self, j: int) -> int:
        return len(self.levels[j])

    @cached_property
    def _aggregators(self) -> list[sp.csr_matrix]:
        mu = self.domain.cell_measures
        n = self.domain.n_cells
        return [
            sp.csr_matrix((mu, (lab, np.arange(n))), shape=(len(atoms), n))
            for atoms, lab in zip(self.levels, self.labels)
        ]

    def atom_measures(self, j: int) -> np.ndarray:
        return np.array([a.measure for a in self.levels[j]])

    def atom_means(self, values: np.ndarray, j: int) -> np.ndarray:
        """Per-atom averages ``(1/mu(Q)) int_Q values``; zero on null atoms."""
        values = np.asarray(values)
        flat = values.reshape(values.shape[0], -1)
        sums = self._aggregators[j] @ flat
        mass = self.atom_measures(j)
        out = np.zeros_like(sums, dtype=np.result_type(values, float))
        live = mass > 0
        out[live] = sums[live] / mass[live, None]
        return out.reshape((len(mass),) + values.shape[1:])

    def expand(self, atom_values: np.ndarray, j: int) -> np.ndarray:
        """Broadcast per-atom values back onto the grid cells."""
        return np.asarray(atom_values)[self.labels[j]]

    def parents(self, j: int) -> np.ndarray:
        return np.array([a.parent for a in self.levels[j]], dtype=int)

    def strict_ancestor(self, j: int, i: int) -> tuple[int, int] | None:
        """Nearest ancestor of atom ``(j, i)`` with a strictly larger cell set."""
        atom = self.levels[j][i]
        size = atom.cells.size
        jj, ii = j, i
        while jj > 0:
            ii = self.levels[jj][ii].parent
            jj -= 1
            if self.levels[jj][ii].cells.size > size:
                return jj, ii
        return None

    def summary(self) -> str:
        counts = ", ".join(str(len(l)) for l in self.levels)
        kind = "dyadic" if self.is_dyadic else "atomic"
        return f"{kind} filtration, d={self.domain.d}, J={self.J}, atoms per level: {counts}"


def _as_domain(d: int, J: int, measure) -> GridDomain:
    if measure is None:
        return GridDomain.lebesgue(d, J)
    if isinstance(measure, GridDomain):
        if measure.d != d or measure.J != J:
            raise ValueError("measure lives on a different grid")
        return measure
    if callable(measure):
        return GridDomain.from_density(d, J, measure)
    return GridDomain(d, J, np.asarray(measure, dtype=float))


def build_dyadic(d: int, J: int, measure=None) -> AtomicFiltration:
    """The dyadic filtration of ``[0,1)^d`` down to depth ``J``.

    ``measure`` may be None (Lebesgue), an array of cell weights, a density
    callable, or a :class:`GridDomain`. Atoms carry their inscribed ball.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    dom = _as_domain(d, J, measure)
    if np.any(dom.cell_measures <= 0):
        raise ValueError("dyadic construction needs a strictly positive measure")
    mi = dom.multi_index
    mu = dom.cell_measures
    levels, labels = [], []
    for j in range(J + 1):
        n = 2**j
        a = mi >> (J - j)
        lab = np.ravel_multi_index(tuple(a.T), (n,) * d)
        order = np.argsort(lab, kind="stable")
        splits = np.cumsum(np.bincount(lab, minlength=n**d))[:-1]
        cell_groups = np.split(order, splits)
        mass = np.bincount(lab, weights=mu, minlength=n**d)
        side = 2.0**-j
        atoms = []
        for i, cells in enumerate(cell_groups):
            idx = np.array(np.unravel_index(i, (n,) * d))
            lo = idx * side
            parent = None
            if j > 0:
                parent = int(np.ravel_multi_index(tuple(idx >> 1), (n // 2,) * d))
            atoms.append(
                Atom(i, j, cells, float(mass[i]), lo, lo + side, parent, lo + side / 2, side / 2)
            )
        levels.append(atoms)
        labels.append(lab)
    return AtomicFiltration(dom, levels, labels, is_dyadic=True)


def conditional_expectation(f: OpValuedFunction, filt: AtomicFiltration, j: int) -> OpValuedFunction:
    """``E_j f``: the average of ``f`` over each level-``j`` atom."""
    if not 0 <= j <= filt.J:
        raise ValueError(f"level {j} outside 0..{filt.J}")
    _check_domain(f, filt)
    means = filt.atom_means(f.values, j)
    return f.with_values(filt.expand(means, j))


def _check_domain(f: OpValuedFunction, filt: AtomicFiltration) -> None:
    if f.domain is not filt.domain and not f.domain.same_as(filt.domain):
        raise ValueError("function and filtration live on different grids")


def regularity_constant(filt: AtomicFiltration) -> float | None:
    """``max mu(parent)/mu(child)`` over all atoms, or None if an atom is null.

    For atomic filtrations this is the least ``c`` with ``E_j f <= c E_{j-1} f``
    for every positive ``f``.
    """
    best = 1.0
    for j in range(1, filt.J + 1):
        parent_mass = filt.atom_measures(j - 1)[filt.parents(j)]
        mass = filt.atom_measures(j)
        if np.any(mass <= 0):
            return None
        best = max(best, float(np.max(parent_mass / mass)))
    return best


def verify_regularity(f: OpValuedFunction, filt: AtomicFiltration, c_reg: float | None = None,
                      tol: float = 1e-10) -> Report:
    """Check ``c_reg E_{j-1} f - E_j f >= 0`` cell by cell for positive ``f``."""
    c = regularity_constant(filt) if c_reg is None else c_reg
    rep = Report("regularity")
    if c is None:
        rep.add("filtration.regularity", False, detail_reason="null atom")
        return rep
    worst = 0.0
    prev = filt.atom_means(f.values, 0)
    for j in range(1, filt.J + 1):
        cur = filt.atom_means(f.values, j)
        diff = c * prev[filt.parents(j)] - cur
        ev = np.linalg.eigvalsh(0.5 * (diff + np.conj(np.swapaxes(diff, 1, 2))))
        scale = 1.0 + np.abs(cur).max(initial=0.0)
        worst = min(worst, float(ev.min()) / scale)
        prev = cur
    rep.add("filtration.regularity", worst >= -tol, value=worst, bound=-tol, c_reg=c)
    return rep


# ---------------------------------------------------------------------------
# measures of polynomial growth


@dataclass(frozen=True, eq=False)
class GrowthMeasure:
    """Cell weights on a grid with a declared growth law ``mu(B(x,r)) <= C r^n``."""

    domain: GridDomain
    n: float
    C_mu: float

    @classmethod
    def from_density(cls, density: Callable, J: int, n: float = 1, C_mu: float = 2.0, d: int = 1):
        return cls(GridDomain.from_density(d, J, density), n, C_mu)

    @classmethod
    def from_weights(cls, weights, n: float = 1, C_mu: float = 2.0, d: int = 1):
        weights = np.asarray(weights, dtype=float)
        J = int(round(np.log2(weights.size) / d))
        return cls(GridDomain(d, J, weights), n, C_mu)

    def coarsen(self, J: int) -> "GrowthMeasure":
        dom = self.domain
        if J > dom.J:
            raise ValueError("cannot refine a grid measure")
        shape = (2**dom.J,) * dom.d
        w = dom.cell_measures.reshape(shape)
        f = 2 ** (dom.J - J)
        for ax in range(dom.d):
            w = np.add.reduceat(w, np.arange(0, w.shape[ax], f), axis=ax)
        return GrowthMeasure(GridDomain(dom.d, J, w.ravel()), self.n, self.C_mu)


def _cdf_1d(domain: GridDomain) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, domain.n_cells + 1)
    cum = np.concatenate([[0.0], np.cumsum(domain.cell_measures)])
    return edges, cum


def interval_measure(domain: GridDomain, a, b) -> np.ndarray:
    """Measure of ``(a, b)`` for piecewise uniform cell weights (``d = 1``)."""
    edges, cum = _cdf_1d(domain)
    a = np.clip(a, 0.0, 1.0)
    b = np.clip(b, 0.0, 1.0)
    return np.maximum(np.interp(b, edges, cum) - np.interp(a, edges, cum), 0.0)


def ball_measure(domain: GridDomain, center, r, subsample: int = 4) -> float:
    """``mu(B(center, r))`` for piecewise uniform cell weights.

    Exact in one dimension; for ``d > 1`` each cell is sampled at
    ``subsample^d`` midpoints.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if domain.d == 1:
        return float(interval_measure(domain, center[0] - r, center[0] + r))
    h = domain.side
    offs = (np.arange(subsample) + 0.5) / subsample * h
    local = np.stack(np.meshgrid(*([offs] * domain.d), indexing="ij"), -1).reshape(-1, domain.d)
    pts = domain.cell_corners[:, None, :] + local[None]
    inside = (np.linalg.norm(pts - center, axis=-1) < r).mean(axis=1)
    return float(np.dot(domain.cell_measures, inside))


def verify_polynomial_growth(mu: GrowthMeasure, sample_centers, radii) -> Report:
    """Largest ``mu(B(x,r)) / r^n`` over the sample against the declared ``C_mu``."""
    dom = mu.domain
    centers = np.asarray(sample_centers, dtype=float).reshape(-1, dom.d)
    radii = np.asarray(radii, dtype=float).ravel()
    idx = np.clip((centers / dom.side).astype(int), 0, 2**dom.J - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (2**dom.J,) * dom.d)
    if np.any(dom.cell_measures[flat] <= 0):
        raise ValueError("sample centers must lie in the support of mu")
    best, where = 0.0, None
    for x in centers:
        for r in radii:
            ratio = ball_measure(dom, x, r) / r**mu.n
            if ratio > best:
                best, where = ratio, (x.tolist(), float(r))
    rep = Report("polynomial_growth")
    rep.add("filtration.growth", best <= mu.C_mu * (1 + TAU_GROWTH), value=best, bound=mu.C_mu,
            argmax=where, n=mu.n)
    return rep


# ---------------------------------------------------------------------------
# comparable doubling balls and the nonregular 1-d construction


def is_doubling(domain: GridDomain, center, r: float, alpha: float, beta: float) -> tuple[bool, float]:
    inner = ball_measure(domain, center, r)
    outer = ball_measure(domain, center, alpha * r)
    if inner <= 0:
        return False, float("inf")
    ratio = outer / inner
    return ratio <= beta * (1 + 1e-12), ratio


def _find_ball_1d(domain: GridDomain, lo: float, hi: float, alpha: float, beta: float,
                  dilation: float) -> tuple[float, float] | None:
    """First ``(alpha, beta)``-doubling ball ``B`` with ``B in [lo, hi) in dilation*B``.

    Radii are tried from largest to smallest; centers from the mass centroid
    outwards on the half-cell lattice.
    """
    h = domain.side
    L = hi - lo
    lo_c, hi_c = int(round(lo / h)), int(round(hi / h))
    w = domain.cell_measures[lo_c:hi_c]
    mids = (np.arange(lo_c, hi_c) + 0.5) * h
    centroid = float(np.dot(w, mids) / w.sum()) if w.sum() > 0 else 0.5 * (lo + hi)
    r = L / 2
    while r * dilation >= L / 2 - 1e-15 and r >= h / 2 - 1e-15:
        grid = np.arange(lo + r, hi - r + 1e-12, h / 2)
        ok_geom = (grid - lo <= dilation * r + 1e-12) & (hi - grid <= dilation * r + 1e-12)
        grid = grid[ok_geom]
        for c in grid[np.argsort(np.abs(grid - centroid), kind="stable")]:
            ok, _ = is_doubling(domain, c, r, alpha, beta)
            if ok:
                return float(c), float(r)
        r /= 2
    return None


def build_nondoubling_filtration_1d(mu: GrowthMeasure, J: int | None = None, alpha: float = 4.0,
                                    beta: float = 64.0, dilation: float = 28.0) -> AtomicFiltration:
    """Greedy stopping-time filtration adapted to ``mu`` on ``[0,1)``.

    Each atom with at least two cells is split at the cell boundary that best
    halves its mass, among boundaries leaving each side at least a quarter of
    the cells; a split is accepted only when every non-null child contains an
    ``(alpha, beta)``-doubling ball ``B`` with ``B in Q in dilation*B``.
    Splitting continues until every atom is a single cell, so atoms may
    persist unchanged across levels. ``J`` coarsens the grid of ``mu``.
    """
    if mu.domain.d != 1:
        raise ValueError("the nonregular construction is one-dimensional")
    if J is not None and J != mu.domain.J:
        mu = mu.coarsen(J)
    dom = mu.domain
    h = dom.side
    w = dom.cell_measures
    n_cells = dom.n_cells

    def make(i, level, s, e, parent):
        cells = np.arange(s, e)
        mass = float(w[s:e].sum())
        lo, hi = np.array([s * h]), np.array([e * h])
        ball = None
        if mass > 0:
            ball = _find_ball_1d(dom, s * h, e * h, alpha, beta, dilation)
            if ball is None:
                return None
        else:
            ball = (0.5 * (s + e) * h, 0.5 * (e - s) * h)
        return Atom(i, level, cells, mass, lo, hi, parent, np.array([ball[0]]), ball[1])

    root = make(0, 0, 0, n_cells, None)
    if root is None:
        raise FiltrationConstructionError("no doubling ball in the root atom", Atom(
            0, 0, np.arange(n_cells), float(w.sum()), np.array([0.0]), np.array([1.0])))
    levels = [[root]]
    spans = [[(0, n_cells)]]
    while any(e - s > 1 for s, e in spans[-1]):
        level = len(levels)
        atoms, new_spans = [], []
        for pi, ((s, e), parent) in enumerate(zip(spans[-1], levels[-1])):
            if e - s == 1:
                atoms.append(make(len(atoms), level, s, e, pi))
                new_spans.append((s, e))
                continue
            n = e - s
            q = max(1, n // 4)
            cand = np.arange(s + q, e - q + 1)
            left = np.cumsum(w[s:e])[cand - s - 1]
            half = 0.5 * w[s:e].sum()
            order = np.lexsort((np.abs(cand - 0.5 * (s + e)), np.abs(left - half)))
            chosen = None
            for t in cand[order]:
                a = make(len(atoms), level, s, int(t), pi)
                b = make(len(atoms) + 1, level, int(t), e, pi)
                if a is not None and b is not None:
                    chosen = (a, b, int(t))
                    break
            if chosen is None:
                raise FiltrationConstructionError(
                    f"atom [{s * h:g}, {e * h:g}) at level {level - 1} admits no valid split", parent
                )
            a, b, t = chosen
            atoms += [a, b]
            new_spans += [(s, t), (t, e)]
        levels.append(atoms)
        spans.append(new_spans)
    labels = []
    for sp_ in spans:
        lab = np.empty(n_cells, dtype=int)
        for i, (s, e) in enumerate(sp_):
            lab[s:e] = i
        labels.append(lab)
    return AtomicFiltration(dom, levels, labels, is_dyadic=False,
                            params={"alpha": alpha, "beta": beta, "dilation": dilation, "n": mu.n})


# ---------------------------------------------------------------------------
# structural verifiers


def verify_nested(filt: AtomicFiltration) -> Report:
    """Each atom's cells are exactly the disjoint union of its children's cells."""
    rep = Report("nestedness")
    bad = []
    n = filt.domain.n_cells
    if not np.array_equal(np.sort(filt.levels[0][0].cells), np.arange(n)):
        bad.append((0, 0))
    for j in range(1, filt.J + 1):
        kids: dict[int, list[np.ndarray]] = {}
        for a in filt.levels[j]:
            kids.setdefault(a.parent, []).append(a.cells)
        for i, parent in enumerate(filt.levels[j - 1]):
            union = np.sort(np.concatenate(kids.get(i, [np.array([], dtype=int)])))
            if not np.array_equal(union, np.sort(parent.cells)):
                bad.append((j - 1, i))
    leaves_ok = all(a.cells.size == 1 for a in filt.levels[-1])
    rep.add("filtration.nested", not bad and leaves_ok, value=len(bad), bound=0,
            offending=bad[:10], leaves_are_cells=leaves_ok)
    return rep


def _corona_integral_1d(domain: GridDomain, x: float, regions: Sequence[tuple[float, float]],
                        n: float) -> float:
    """``int_regions dmu(y) / |x - y|^n`` for piecewise uniform weights, exact per cell."""
    h = domain.side
    rho = domain.cell_measures / h
    total = 0.0
    for a, b in regions:
        a, b = max(a, 0.0), min(b, 1.0)
        if b <= a:
            continue
        if a < x < b:
            return float("inf")
        k0, k1 = int(np.floor(a / h)), int(np.ceil(b / h))
        for k in range(k0, min(k1, domain.n_cells)):
            lo, hi = max(a, k * h), min(b, (k + 1) * h)
            if hi <= lo or rho[k] == 0:
                continue
            u, v = sorted((abs(x - lo), abs(x - hi)))
            if u == 0:
                return float("inf")
            if n == 1:
                piece = np.log(v / u)
            else:
                piece = (u ** (1 - n) - v ** (1 - n)) / (n - 1)
            total += rho[k] * piece
    return float(total)


def verify_nondoubling_properties(filt: AtomicFiltration, alpha: float = 4.0, beta: float = 64.0,
                                dilation: float = 28.0, corona_cutoff: float = 56.0,
                                n: float | None = None, atoms: Sequence[tuple[int, int]] | None = None,
                                x_samples: int = 3) -> Report:
    """Per-atom comparable-ball checks for a filtration carrying ball data.

    For each sampled atom ``Q`` with ball ``B_Q``: ``B_Q in Q in dilation*B_Q``,
    ``mu(alpha B_Q) <= beta mu(B_Q)``, and the empirical value of the corona
    integral ``int_{alpha B_R minus corona_cutoff*B_Q} dmu(y)/|x-y|^n`` with
    ``R`` the nearest strictly larger ancestor. The corona integral carries
    no asserted bound; its maximum is reported. Null atoms are skipped.
    """
    dom = filt.domain
    if n is None:
        n = filt.params.get("n", dom.d)
    if atoms is None:
        atoms = [(j, i) for j in range(filt.J + 1) for i in range(filt.n_atoms(j))]
    rep = Report("nondoubling_filtration")
    missing = [(j, i) for j, i in atoms if not filt.levels[j][i].has_ball]
    if missing:
        rep.add("filtration.sandwich", False, detail="missing ball data", offending=missing[:10])
        return rep
    sand_fail, dbl_fail, worst_ratio, corona_max = [], [], 0.0, 0.0
    skipped = 0
    for j, i in atoms:
        Q = filt.levels[j][i]
        if Q.measure <= 0:
            skipped += 1
            continue
        c, r = np.atleast_1d(Q.ball_center), Q.ball_radius
        inside = np.all(c - r >= Q.lo - 1e-12) and np.all(c + r <= Q.hi + 1e-12)
        corners = np.stack(np.meshgrid(*zip(Q.lo, Q.hi), indexing="ij"), -1).reshape(-1, dom.d)
        covered = np.max(np.linalg.norm(corners - c, axis=1)) <= dilation * r * (1 + 1e-12)
        if not (inside and covered):
            sand_fail.append((j, i))
        ok, ratio = is_doubling(dom, c, r, alpha, beta)
        worst_ratio = max(worst_ratio, ratio)
        if not ok:
            dbl_fail.append((j, i))
        anc = filt.strict_ancestor(j, i)
        if anc is None or not (inside and covered):
            continue
        R = filt.levels[anc[0]][anc[1]]
        cR, rR = np.atleast_1d(R.ball_center), R.ball_radius
        xs = dom.cell_centers[Q.cells]
        if len(xs) > x_samples:
            xs = xs[np.linspace(0, len(xs) - 1, x_samples).astype(int)]
        for x in xs:
            if dom.d == 1:
                outer = (cR[0] - alpha * rR, cR[0] + alpha * rR)
                hole = (c[0] - corona_cutoff * r, c[0] + corona_cutoff * r)
                regions = [(outer[0], min(outer[1], hole[0])), (max(outer[0], hole[1]), outer[1])]
                val = _corona_integral_1d(dom, float(x[0]), regions, n)
            else:
                val = _corona_integral_nd(dom, x, cR, alpha * rR, c, corona_cutoff * r, n)
            corona_max = max(corona_max, val)
    checked = len(atoms) - skipped
    rep.add("filtration.sandwich", not sand_fail, value=len(sand_fail), bound=0,
            dilation=dilation, offending=sand_fail[:10], atoms_checked=checked)
    rep.add("filtration.doubling", not dbl_fail, value=worst_ratio, bound=beta, alpha=alpha,
            offending=dbl_fail[:10])
    rep.add("filtration.corona", np.isfinite(corona_max), value=corona_max,
            corona_cutoff=corona_cutoff, note="empirical maximum, no asserted bound")
    rep.data.update(alpha=alpha, beta=beta, dilation=dilation, corona_cutoff=corona_cutoff,
                    skipped_null_atoms=skipped)
    return rep


def _corona_integral_nd(dom: GridDomain, x, c_outer, r_outer, c_hole, r_hole, n, subsample=2) -> float:
    h = dom.side
    offs = (np.arange(subsample) + 0.5) / subsample * h
    local = np.stack(np.meshgrid(*([offs] * dom.d), indexing="ij"), -1).reshape(-1, dom.d)
    pts = (dom.cell_corners[:, None, :] + local[None]).reshape(-1, dom.d)
    wts = np.repeat(dom.cell_measures / local.shape[0], local.shape[0])
    keep = (np.linalg.norm(pts - c_outer, axis=1) < r_outer) & (np.linalg.norm(pts - c_hole, axis=1) >= r_hole)
    dist = np.linalg.norm(pts[keep] - x, axis=1)
    if np.any(dist == 0):
        return float("inf")
    return float(np.sum(wts[keep] / dist**n))
