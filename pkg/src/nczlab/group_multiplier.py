"""Finite group models, cocycles, Schur and Fourier multipliers, and the transference lift.

Conventions. A group is a multiplication table over element indices. The
left regular representation realizes ``f = sum_g f^(g) lambda(g)`` as the
matrix ``C[a, b] = f^(a b^-1)``. Schur multipliers act by
``S_M(A)[g, h] = M(g h^-1) A[g, h]``. The transference lift of ``A`` at
``x in R^n`` is ``pi(A)(x)[g, h] = e(-x.beta(g^-1)) A[g, h] e(x.beta(h^-1))``
with ``e(t) = exp(2 pi i t)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .operator_space import GridDomain, OpValuedFunction, weak_sup
from .report import Report

TAU_GROUP = 1e-12


# -- groups -------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupModel:
    """A finite group (or a finite window of Z) given by its multiplication table.

    ``table[a, b]`` is the index of ``ab``, or ``-1`` when the product leaves a window.
    """

    name: str
    labels: list
    table: np.ndarray
    unit: int
    inverse: np.ndarray
    abelian: bool = False
    window: bool = False

    @property
    def order(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def quotient_index(self) -> np.ndarray:
        """``Q[g, h]`` = index of ``g h^-1`` (``-1`` if undefined)."""
        return self.table[:, self.inverse]

    @classmethod
    def cyclic(cls, N: int) -> "GroupModel":
        k = np.arange(N)
        table = (k[:, None] + k[None, :]) % N
        return cls(f"Z_{N}", list(range(N)), table, 0, (-k) % N, abelian=True)

    @classmethod
    def dihedral(cls, N: int) -> "GroupModel":
        """``D_N`` of order ``2N``: element ``(k, s)`` is ``r^k t^s`` with ``t r t = r^-1``."""
        labels = [(k, s) for s in (0, 1) for k in range(N)]
        idx = {lab: i for i, lab in enumerate(labels)}
        G = len(labels)
        table = np.empty((G, G), dtype=int)
        for (k1, s1), (k2, s2) in itertools.product(labels, repeat=2):
            k = (k1 + (k2 if s1 == 0 else -k2)) % N
            table[idx[(k1, s1)], idx[(k2, s2)]] = idx[(k, (s1 + s2) % 2)]
        inverse = np.array([idx[((-k) % N, 0)] if s == 0 else idx[(k, 1)] for k, s in labels])
        return cls(f"D_{N}", labels, table, idx[(0, 0)], inverse, abelian=N <= 2)

    @classmethod
    def integer_window(cls, K: int) -> "GroupModel":
        """``{-K, ..., K}`` inside Z; products outside the window are undefined."""
        vals = np.arange(-K, K + 1)
        s = vals[:, None] + vals[None, :]
        table = np.where(np.abs(s) <= K, s + K, -1)
        return cls(f"Z[-{K},{K}]", list(vals), table, K, (-vals) + K, abelian=True, window=True)

    @classmethod
    def from_table(cls, table, unit: int = 0, labels=None, name: str = "G") -> "GroupModel":
        table = np.asarray(table, dtype=int)
        G = table.shape[0]
        inverse = np.array([int(np.nonzero(table[a] == unit)[0][0]) for a in range(G)])
        ab = bool(np.array_equal(table, table.T))
        return cls(name, list(range(G)) if labels is None else list(labels), table, unit, inverse, abelian=ab)

    def check_axioms(self, rng: np.random.Generator | None = None, samples: int = 20000) -> Report:
        rep = Report(f"group[{self.name}]")
        G, T = self.order, self.table
        idx = np.arange(G)
        unit_ok = bool(np.all(T[self.unit] == idx) and np.all(T[:, self.unit] == idx))
        inv_ok = bool(np.all(T[idx, self.inverse] == self.unit) and np.all(T[self.inverse, idx] == self.unit))
        if self.window:
            assoc = True
        elif G <= 64:
            assoc = bool(np.array_equal(T[T[:, :, None], idx[None, None, :]], T[idx[:, None, None], T[None, :, :]]))
        else:
            rng = np.random.default_rng(0) if rng is None else rng
            a, b, c = rng.integers(G, size=(3, samples))
            assoc = bool(np.all(T[T[a, b], c] == T[a, T[b, c]]))
        rep.add("group.axioms.unit", unit_ok)
        rep.add("group.axioms.inverse", inv_ok)
        rep.add("group.axioms.associativity", assoc)
        return rep


# -- cocycles ----------------------------------------------------------------------


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class CocycleData:
    """Orthogonal representation ``alpha`` (``(|G|, n, n)``) and cocycle ``beta`` (``(|G|, n)``).

    ``psi_override`` replaces the induced length ``|beta|^2``; it exists for
    negative controls.
    """

    group: GroupModel
    alpha: np.ndarray
    beta: np.ndarray
    name: str = "cocycle"
    psi_override: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.beta.shape[1]

    @property
    def psi(self) -> np.ndarray:
        if self.psi_override is not None:
            return np.asarray(self.psi_override, dtype=float)
        return np.sum(self.beta ** 2, axis=1)

    def with_psi(self, psi) -> "CocycleData":
        return CocycleData(self.group, self.alpha, self.beta, self.name + "+psi", np.asarray(psi, dtype=float))

    def with_beta(self, beta) -> "CocycleData":
        return CocycleData(self.group, self.alpha, np.asarray(beta, dtype=float), self.name + "+beta")

    def xi(self) -> np.ndarray:
        """``xi[g, h] = alpha_{g^-1}(beta(g h^-1))``, shape ``(|G|, |G|, n)``."""
        G = self.group
        Q = G.quotient_index()
        ainv = self.alpha[G.inverse]
        return np.einsum("gij,ghj->ghi", ainv, self.beta[Q])

    @classmethod
    def rotation(cls, N: int, v=(1.0, 0.0)) -> "CocycleData":
        """Coboundary of ``v`` under rotations of the plane: ``psi(k) = 4 sin^2(pi k / N) |v|^2``."""
        G = GroupModel.cyclic(N)
        alpha = np.array([rotation(2 * np.pi * k / N) for k in range(N)])
        v = np.asarray(v, dtype=float)
        beta = alpha @ v - v
        return cls(G, alpha, beta, f"rotation[Z_{N}]")

    @classmethod
    def dihedral(cls, N: int, v=(1.0, 0.0)) -> "CocycleData":
        G = GroupModel.dihedral(N)
        refl = np.diag([1.0, -1.0])
        alpha = np.array([rotation(2 * np.pi * k / N) @ (refl if s else np.eye(2)) for k, s in G.labels])
        v = np.asarray(v, dtype=float)
        return cls(G, alpha, alpha @ v - v, f"reflection[D_{N}]")

    @classmethod
    def additive(cls, K: int) -> "CocycleData":
        G = GroupModel.integer_window(K)
        vals = np.array(G.labels, dtype=float)
        return cls(G, np.ones((G.order, 1, 1)), vals[:, None], f"additive[Z,{K}]")

    @classmethod
    def regular(cls, G: GroupModel) -> "CocycleData":
        """``beta(g) = (delta_g - delta_e) / sqrt 2`` in the left regular representation; ``psi = 1 - delta_e``."""
        n = G.order
        alpha = np.zeros((n, n, n))
        for g in range(n):
            alpha[g, G.table[g], np.arange(n)] = 1.0
        beta = np.eye(n) - np.eye(n)[G.unit]
        return cls(G, alpha, beta / math.sqrt(2), f"regular[{G.name}]")


def verify_cocycle(c: CocycleData, tol: float = 1e-10) -> Report:
    """Cocycle law, orthogonality and the length symmetries, with the worst pair located."""
    G = c.group
    rep = Report(f"cocycle[{c.name}]")
    T = G.table
    defined = T >= 0
    lhs = np.einsum("gij,hj->ghi", c.alpha, c.beta)
    rhs = c.beta[np.where(defined, T, 0)] - c.beta[:, None, :]
    err = np.where(defined[..., None], np.abs(lhs - rhs), 0.0).max(axis=-1)
    worst = np.unravel_index(int(np.argmax(err)), err.shape)
    e = float(err.max())
    rep.add("group.cocycle", e <= tol, value=e, bound=tol,
            worst_pair=[G.labels[worst[0]], G.labels[worst[1]]])
    eye = np.eye(c.n)
    orth = float(np.abs(c.alpha @ np.swapaxes(c.alpha, 1, 2) - eye).max())
    rep.add("group.cocycle.orthogonal", orth <= tol, value=orth, bound=tol)
    psi = c.psi
    sym = max(abs(float(psi[G.unit])), float(np.abs(psi - psi[G.inverse]).max()))
    rep.add("group.length", sym <= tol, value=sym, bound=tol, note="psi(e) = 0 and psi(g) = psi(g^-1)")
    return rep


def verify_conditionally_negative(psi, G: GroupModel, trials: int = 200, t_grid=(0.1, 1.0, 10.0),
                                  rng: np.random.Generator | None = None, tol: float = 1e-9) -> Report:
    """Quadratic-form trials, the exact mean-zero eigenvalue test, and Schoenberg positivity."""
    rng = np.random.default_rng(0) if rng is None else rng
    psi = np.asarray(psi, dtype=float)
    if G.window:
        raise ValueError("conditional negativity needs a genuine finite group")
    K = psi[G.quotient_index()]
    n = G.order
    rep = Report(f"negativity[{G.name}]")
    asym = max(abs(float(psi[G.unit])), float(np.abs(psi - psi[G.inverse]).max()))
    rep.add("group.length", asym <= tol, value=asym, bound=tol, note="psi(e) = 0 and psi(g) = psi(g^-1)")
    a = rng.normal(size=(trials, n)) + 1j * rng.normal(size=(trials, n))
    a -= a.mean(axis=1, keepdims=True)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    forms = np.real(np.einsum("tg,gh,th->t", a, K, np.conj(a)))
    rep.add("group.negativity.trials", forms.max() <= tol, value=float(forms.max()), bound=tol)
    P = np.eye(n) - np.ones((n, n)) / n
    basis = np.linalg.svd(P)[0][:, : n - 1]
    restricted = basis.T @ ((K + K.T) / 2) @ basis
    top = float(np.linalg.eigvalsh(restricted).max()) if n > 1 else 0.0
    rep.add("group.negativity", top <= tol, value=top, bound=tol)
    worst = np.inf
    for t in t_grid:
        E = np.exp(-t * K)
        worst = min(worst, float(np.linalg.eigvalsh((E + E.T) / 2).min()))
    rep.add("group.schoenberg", worst >= -tol, value=worst, bound=-tol, t_grid=list(t_grid))
    return rep


# -- symbols -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralSymbol:
    """``m: R_+ -> C`` with derivative evaluators ``derivs[k]`` for ``k = 0..3``.

    ``value_at_zero`` is used wherever ``m(0)`` is needed and ``m`` has no
    limit at 0; ``continuous_at_zero`` records whether it does.
    """

    name: str
    derivs: tuple[Callable, ...]
    value_at_zero: complex = 1.0
    continuous_at_zero: bool = True
    fd_accuracy: float = 0.0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(self.derivs[0](x), dtype=complex)
        return np.where(x == 0, self.value_at_zero, v)

    def derivative(self, k: int, x) -> np.ndarray:
        if k >= len(self.derivs):
            raise ValueError(f"no derivative of order {k} for {self.name}")
        return np.asarray(self.derivs[k](np.asarray(x, dtype=float)), dtype=complex)

    @classmethod
    def one(cls) -> "SpectralSymbol":
        z = lambda x: np.zeros_like(x, dtype=complex)
        return cls("one", (lambda x: np.ones_like(x, dtype=complex), z, z, z))

    @classmethod
    def heat(cls, t: float = 1.0) -> "SpectralSymbol":
        return cls(f"heat[{t:g}]", tuple((lambda x, k=k: (-t) ** k * np.exp(-t * x) + 0j) for k in range(4)))

    @classmethod
    def imaginary_power(cls, theta: float) -> "SpectralSymbol":
        a = 1j * theta

        def d(k):
            coef = np.prod([a - i for i in range(k)]) if k else 1.0
            return lambda x: coef * np.asarray(x, dtype=float) ** (a - k)
        return cls(f"imaginary-power[{theta:g}]", tuple(d(k) for k in range(4)), value_at_zero=1.0,
                   continuous_at_zero=theta == 0)

    @classmethod
    def monomial(cls, p: int = 1) -> "SpectralSymbol":
        """``x^p``: an unbounded symbol, used as a negative control."""
        def d(k):
            coef = float(np.prod([p - i for i in range(k)])) if k else 1.0
            return lambda x: coef * np.asarray(x, dtype=float) ** max(p - k, 0) * (k <= p) + 0j
        return cls(f"monomial[{p}]", tuple(d(k) for k in range(4)), value_at_zero=0.0 if p else 1.0)

    @classmethod
    def from_callable(cls, fn: Callable, name: str = "custom", rel_step: float = 1e-3) -> "SpectralSymbol":
        """Derivatives by five-point central differences with step ``rel_step * x``."""
        def fd(k):
            if k == 0:
                return fn

            def deriv(x):
                x = np.asarray(x, dtype=float)
                h = rel_step * np.maximum(np.abs(x), 1e-12)
                f = [np.asarray(fn(x + j * h), dtype=complex) for j in (-2, -1, 0, 1, 2)]
                if k == 1:
                    return (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
                if k == 2:
                    return (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h ** 2)
                return (-f[0] + 2 * f[1] - 2 * f[3] + f[4]) / (2 * h ** 3)
            return deriv
        return cls(name, tuple(fd(k) for k in range(4)), fd_accuracy=rel_step ** 2)

    def check_derivatives(self, probe=None, rel_step: float = 1e-4) -> float:
        """Max relative mismatch between the evaluators and finite differences on a probe grid."""
        probe = np.geomspace(1e-2, 1e2, 25) if probe is None else np.asarray(probe, dtype=float)
        worst = 0.0
        for k in range(1, len(self.derivs)):
            h = rel_step * probe
            num = (self.derivative(k - 1, probe + h) - self.derivative(k - 1, probe - h)) / (2 * h)
            ref = self.derivative(k, probe)
            scale = np.abs(ref) + np.abs(self.derivative(k - 1, probe)) / probe
            worst = max(worst, float((np.abs(num - ref) / np.maximum(scale, 1e-300)).max()))
        return worst


def symbol_by_name(name: str, theta: float = 0.7, t: float = 1.0) -> SpectralSymbol:
    if name == "one":
        return SpectralSymbol.one()
    if name in ("heat", "exp"):
        return SpectralSymbol.heat(t)
    if name == "imaginary-power":
        return SpectralSymbol.imaginary_power(theta)
    raise ValueError(f"unknown symbol {name!r}")


@dataclass(frozen=True, eq=False)
class LiftedSymbol:
    """``M(xi) = m(|xi|^2)`` on ``R^n`` with partial derivatives up to order 3 by the chain rule."""

    m: SpectralSymbol
    n: int

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.m(np.sum(xi ** 2, axis=-1))

    def partial(self, xi, gamma: Sequence[int]) -> np.ndarray:
        """``d^gamma M`` for a multi-index given as a list of coordinate indices, e.g. ``[0, 0, 1]``."""
        xi = np.asarray(xi, dtype=float)
        s = np.sum(xi ** 2, axis=-1)
        d = lambda k: self.m.derivative(k, s)
        g = list(gamma)
        if len(g) == 0:
            return self(xi)
        if len(g) == 1:
            return 2 * xi[..., g[0]] * d(1)
        if len(g) == 2:
            i, j = g
            return 4 * xi[..., i] * xi[..., j] * d(2) + 2 * (i == j) * d(1)
        if len(g) == 3:
            i, j, k = g
            lin = (i == j) * xi[..., k] + (i == k) * xi[..., j] + (j == k) * xi[..., i]
            return 8 * xi[..., i] * xi[..., j] * xi[..., k] * d(3) + 4 * lin * d(2)
        raise ValueError("derivatives above order 3 are not provided")


def lift_symbol(m: SpectralSymbol, n: int) -> LiftedSymbol:
    return LiftedSymbol(m, n)


def _hm_sup(M, n: int, radii: np.ndarray, directions: np.ndarray) -> tuple[float, float]:
    order = n // 2 + 1
    best, arg = 0.0, float(radii[0])
    if isinstance(M, SpectralSymbol):
        if n != 1:
            raise ValueError("lift a spectral symbol before measuring it in n > 1 variables")
        total = sum(radii ** k * np.abs(M.derivative(k, radii)) for k in range(order + 1))
        i = int(np.argmax(total))
        return float(total[i]), float(radii[i])
    for u in directions:
        xi = radii[:, None] * u[None, :]
        r = radii
        total = np.zeros_like(r)
        for k in range(order + 1):
            for gamma in itertools.combinations_with_replacement(range(n), k):
                # sum over multi-indices |gamma| <= order (each multi-index once)
                total = total + r ** k * np.abs(M.partial(xi, gamma))
        i = int(np.argmax(total))
        if total[i] > best:
            best, arg = float(total[i]), float(r[i])
    return best, arg


def hm_norm(M, n: int = 1, lo: float = 1e-6, hi: float = 1e6, points: int = 2401,
            directions: np.ndarray | None = None, detail: bool = False):
    """``sup_xi sum_{|gamma| <= [n/2]+1} |xi|^{|gamma|} |d^gamma M(xi)|`` on a log grid.

    A second pass on ``[lo/100, hi*100]`` detects divergence: if the sup grows
    by more than 0.1% the norm is reported infinite.
    """
    if directions is None:
        rng = np.random.default_rng(7)
        extra = rng.normal(size=(4, n))
        directions = np.vstack([np.eye(n), np.ones((1, n)), extra])
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    base, arg = _hm_sup(M, n, np.geomspace(lo, hi, points), directions)
    ext, _ = _hm_sup(M, n, np.geomspace(lo / 100, hi * 100, points + 800), directions)
    value = np.inf if (not np.isfinite(ext) or ext > base * (1 + 1e-3)) else base
    meta = {"grid": [lo, hi], "points": points, "argmax": arg, "extended_sup": ext, "order": n // 2 + 1}
    return (value, meta) if detail else value


# -- multipliers --------------------------------------------------------------------


def symbol_matrix(G: GroupModel, M) -> np.ndarray:
    """``[M(g h^-1)]_{g,h}`` for ``M`` given per element."""
    return np.asarray(M)[G.quotient_index()]


def schur_multiplier(M, A, G: GroupModel | None = None) -> np.ndarray:
    """``S_M(A) = [M(g h^-1) A_gh]``; ``M`` is a per-element vector (needs ``G``) or a full matrix."""
    A = np.asarray(A)
    Mm = np.asarray(M)
    if Mm.ndim == 1:
        if G is None:
            raise ValueError("a per-element symbol needs the group")
        Mm = symbol_matrix(G, Mm)
    return Mm * A


@dataclass(frozen=True, eq=False)
class GroupAlgebraElement:
    """Finitely supported ``f^: G -> C`` (or ``-> M_k`` for amplified elements)."""

    group: GroupModel
    coeffs: np.ndarray

    def realization(self) -> np.ndarray:
        """``sum_g f^(g) lambda(g)``, i.e. ``C[a, b] = f^(a b^-1)`` (block form if amplified)."""
        Q = self.group.quotient_index()
        c = np.asarray(self.coeffs)
        if c.ndim == 1:
            return c[Q]
        blocks = c[Q]
        G, k = Q.shape[0], c.shape[1]
        return blocks.transpose(0, 2, 1, 3).reshape(G * k, G * k)

    def adjoint(self) -> "GroupAlgebraElement":
        c = np.asarray(self.coeffs)[self.group.inverse]
        c = np.conj(np.swapaxes(c, -1, -2)) if c.ndim == 3 else np.conj(c)
        return GroupAlgebraElement(self.group, c)

    def trace(self) -> complex:
        """``tau(f) = f^(e)``."""
        return self.coeffs[self.group.unit]

    @classmethod
    def delta(cls, G: GroupModel, g: int) -> "GroupAlgebraElement":
        c = np.zeros(G.order, dtype=complex)
        c[g] = 1.0
        return cls(G, c)


def fourier_multiplier(M, f: GroupAlgebraElement) -> GroupAlgebraElement:
    """``(T_M f)^ = M f^`` coefficientwise."""
    M = np.asarray(M)
    c = np.asarray(f.coeffs)
    return GroupAlgebraElement(f.group, M.reshape((-1,) + (1,) * (c.ndim - 1)) * c)


def cyclic_dual_spectrum(f: GroupAlgebraElement) -> np.ndarray:
    """Eigenvalues of the realization of ``f`` over ``Z_N``: ``sum_k f^(k) exp(2 pi i k l / N)``."""
    N = f.group.order
    return np.fft.ifft(np.asarray(f.coeffs)) * N


def weak_schatten_quasinorm(A, normalized: bool = False) -> float:
    """``sup_lam lam #{s_i(A) > lam}`` (divided by the size when ``normalized``)."""
    A = np.atleast_2d(np.asarray(A))
    s = np.linalg.svd(A, compute_uv=False)
    w = np.full(s.shape, 1.0 / s.size if normalized else 1.0)
    return weak_sup(s, w)[0]


def schatten_norm(A, p: float = 1.0, normalized: bool = False) -> float:
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    scale = 1.0 / s.size if normalized else 1.0
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float((scale * np.sum(s ** p)) ** (1.0 / p))


# -- transference -------------------------------------------------------------------


def _points(domain, scale: float = 1.0) -> np.ndarray:
    if isinstance(domain, GridDomain):
        return domain.cell_centers * scale
    pts = np.asarray(domain, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


def lift_phases(c: CocycleData, x: np.ndarray) -> np.ndarray:
    """``u(x)_g = e(x . beta(g^-1))``, shape ``(len(x), |G|)``."""
    b = c.beta[c.group.inverse]
    return np.exp(2j * np.pi * (x @ b.T))


def transference_lift(A, c: CocycleData, domain, scale: float = 1.0):
    """``pi(A)(x) = u(x)^* A u(x)`` entrywise; returns an OpValuedFunction when given a GridDomain."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (c.group.order, c.group.order):
        raise ValueError("matrix size must equal the group order")
    x = _points(domain, scale)
    if x.shape[1] != c.n:
        raise ValueError("points must live in the cocycle space R^n")
    u = lift_phases(c, x)
    vals = np.conj(u)[:, :, None] * A[None] * u[:, None, :]
    if isinstance(domain, GridDomain):
        return OpValuedFunction(domain, vals)
    return vals


def apply_lifted_multiplier(A, c: CocycleData, m: SpectralSymbol, x) -> np.ndarray:
    """``T_{m~}(pi(A))(x)`` from the eigenfunction rule ``T e_xi = m(|xi|^2) e_xi``.

    Uses the actual frequency vectors ``alpha_{g^-1}(beta(g h^-1))``, never ``psi``.
    """
    x = _points(x)
    xi = c.xi()
    lifted = m(np.sum(xi ** 2, axis=-1))
    phase = np.exp(2j * np.pi * np.einsum("pi,ghi->pgh", x, xi))
    return phase * (lifted * np.asarray(A))[None]


def verify_intertwining(A, c: CocycleData, m: SpectralSymbol, x=None, tol: float = TAU_GROUP,
                        rng: np.random.Generator | None = None) -> Report:
    """``T_{m~}(pi(A)) = pi(S_{m o psi}(A))`` pointwise, plus the *-homomorphism property of ``pi``."""
    rng = np.random.default_rng(0) if rng is None else rng
    if x is None:
        x = rng.uniform(-2, 2, size=(16, c.n))
    x = _points(x)
    A = np.asarray(A, dtype=complex)
    lhs = apply_lifted_multiplier(A, c, m, x)
    M = m(c.psi)
    rhs = transference_lift(schur_multiplier(M, A, c.group), c, x)
    defect = float(np.abs(lhs - rhs).max())
    rep = Report(f"intertwining[{c.name},{m.name}]")
    rep.add("group.intertwining", defect <= tol, value=defect, bound=tol)
    B = rng.normal(size=A.shape) + 1j * rng.normal(size=A.shape)
    pa, pb = transference_lift(A, c, x), transference_lift(B, c, x)
    hom = max(float(np.abs(transference_lift(A @ B, c, x) - pa @ pb).max()),
              float(np.abs(transference_lift(np.conj(A.T), c, x) - np.conj(np.swapaxes(pa, 1, 2))).max()))
    scale = max(1.0, float(np.abs(A).max() * np.abs(B).max() * A.shape[0]))
    rep.add("group.homomorphism", hom <= tol * scale, value=hom, bound=tol * scale)
    sa = np.linalg.svd(A, compute_uv=False)
    sv = float(np.abs(np.linalg.svd(pa, compute_uv=False) - sa[None]).max())
    rep.add("group.lift_singular_values", sv <= tol * max(1.0, sa.max(initial=0)), value=sv)
    return rep


# -- gaussians ---------------------------------------------------------------------


def sphere_area(n: int) -> float:
    """``|S^{n-1}|``."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def gamma_eps(x, eps: float, n: int) -> np.ndarray:
    r2 = np.sum(np.atleast_2d(np.asarray(x, dtype=float)) ** 2, axis=-1)
    return (eps / np.pi) ** (n / 2) * np.exp(-eps * r2)


def sigma_constant_exact(n: int) -> float:
    """``sigma_eps(B(0, R_eps)) = P(chi^2_n / 2 < log 2)``, the regularized lower gamma."""
    return float(special.gammainc(n / 2, math.log(2)))


def sigma_constant_displayed(n: int) -> float:
    return sphere_area(n) / (4 * math.pi) ** (n / 2)


def gaussian_constants(eps_list=(1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32), n: int = 1, tol: float = 1e-8) -> Report:
    """L1 normalization, half-height radius and the ball mass of the gaussians, by radial quadrature."""
    rep = Report(f"gaussian[n={n}]")
    area = sphere_area(n)
    sig = []
    l1_worst, half_worst = 0.0, 0.0
    for eps in eps_list:
        dens = lambda r: (eps / np.pi) ** (n / 2) * np.exp(-eps * r * r) * r ** (n - 1)
        mass = area * integrate.quad(dens, 0, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
        l1_worst = max(l1_worst, abs(mass - 1))
        R = math.sqrt(math.log(2) / eps)
        ratio = math.exp(-eps * R * R)
        half_worst = max(half_worst, abs(ratio - 0.5))
        sig.append(area * integrate.quad(dens, 0, R, epsabs=0, epsrel=1e-13, limit=200)[0])
    sig = np.array(sig)
    rep.add("group.gaussian_l1", l1_worst <= tol, value=l1_worst, bound=tol)
    rep.add("group.half_height", half_worst <= 4 * np.finfo(float).eps, value=half_worst)
    spread = float((sig.max() - sig.min()) / sig.mean())
    rep.add("group.sigma_constant", spread <= tol, value=spread, bound=tol,
            measured=float(sig.mean()), analytic=sigma_constant_exact(n), displayed=sigma_constant_displayed(n))
    rep.data.update(sigma=sig.tolist(), eps=list(eps_list), sigma_exact=sigma_constant_exact(n),
                    sigma_displayed=sigma_constant_displayed(n))
    return rep


def gaussian_weighted_weak(s: np.ndarray, n: int) -> float:
    """``sup_lam lam |{x : gamma_eps(x) s_i > lam}|`` summed over ``i``; independent of ``eps``.

    Equals ``pi^{-n/2} V_n sup_mu mu sum_i log(s_i / mu)_+^{n/2}``.
    """
    s = np.sort(np.asarray(s, dtype=float)[np.asarray(s) > 0])[::-1]
    if s.size == 0:
        return 0.0
    c = math.pi ** (-n / 2) * ball_volume(n)

    def h(logmu):
        mu = math.exp(logmu)
        return mu * float(np.sum(np.log(np.maximum(s / mu, 1.0)) ** (n / 2)))

    best = 0.0
    knots = np.log(np.concatenate([s, [s[-1] * math.exp(-8.0)]]))
    for hi, lo in zip(knots[:-1], knots[1:]):
        if hi - lo < 1e-14:
            continue
        r = optimize.minimize_scalar(lambda t: -h(t), bounds=(lo, hi), method="bounded",
                                     options={"xatol": 1e-12})
        best = max(best, -r.fun, h(lo), h(hi))
    return c * best


def gaussian_weighted_weak_grid(s: np.ndarray, eps: float, n: int, points: int = 4001) -> float:
    """Grid version of :func:`gaussian_weighted_weak` on a box in ``R^n``."""
    R = 5.0 / math.sqrt(eps)
    if n == 1:
        x = np.linspace(-R, R, points)
        w = np.full(x.size, x[1] - x[0])
        g = gamma_eps(x[:, None], eps, 1)
    elif n == 2:
        k = int(math.sqrt(points * 50))
        t = np.linspace(-R, R, k)
        X, Y = np.meshgrid(t, t, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], -1)
        w = np.full(pts.shape[0], (t[1] - t[0]) ** 2)
        g = gamma_eps(pts, eps, 2)
    else:
        raise ValueError("grid check implemented for n <= 2")
    vals = g[:, None] * np.asarray(s)[None, :]
    return weak_sup(vals, np.repeat(w[:, None], len(s), axis=1))[0]


def weak_lower_bound_check(B, c: CocycleData | None = None, eps_list=(1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32),
                           n: int | None = None, grid_eps: float | None = 1.0) -> Report:
    """``||gamma_eps pi(B)||_{1,inf} >= (1/4) sigma_eps(B(0,R_eps)) ||B||_{S_{1,inf}}``.

    Per cell ``pi(B)(x)`` is unitarily conjugate to ``B``, so the left side
    only sees the singular values of ``B``; it is evaluated analytically per
    ``eps`` and cross-checked once on a grid.
    """
    n = (c.n if c is not None else 1) if n is None else n
    s = np.linalg.svd(np.atleast_2d(np.asarray(B)), compute_uv=False)
    rhs_norm = weak_schatten_quasinorm(B)
    sigma = sigma_constant_exact(n)
    rep = Report(f"weak_lower_bound[n={n}]")
    worst = np.inf
    lhs_vals = []
    for eps in eps_list:
        lhs = gaussian_weighted_weak(s, n)
        lhs_vals.append(lhs)
        rhs = 0.25 * sigma * rhs_norm
        worst = min(worst, lhs - rhs)
    ok = bool(worst >= -1e-12 * max(1.0, rhs_norm))
    rep.add("group.weak_lower_bound", ok, value=min(lhs_vals, default=0.0), bound=0.25 * sigma * rhs_norm,
            sigma=sigma, sigma_displayed=sigma_constant_displayed(n))
    if grid_eps is not None and n <= 2 and rhs_norm > 0:
        g = gaussian_weighted_weak_grid(s, grid_eps, n)
        rel = abs(g - lhs_vals[0]) / lhs_vals[0]
        rep.add("group.weak_lower_bound.grid", rel <= 2e-2, value=rel, bound=2e-2, grid_value=g)
    return rep


# -- localization defect ---------------------------------------------------------------


def _gaussian_transform_grid(G: np.ndarray, n: int, L: float, K: int) -> tuple[np.ndarray, float]:
    """``F(y) = int G(zeta) exp(2 i y.zeta) dzeta`` for ``G`` sampled on ``[-L, L)^n`` with ``K`` points per axis.

    Returns ``F`` on the grid ``y_j = (j - K/2) pi / (2L)`` and the cell volume ``dy^n``.
    """
    h = 2 * L / K
    sign = (-1.0) ** np.arange(K)
    Gs = G.copy()
    for ax in range(n):
        shape = [1] * n
        shape[ax] = K
        Gs = Gs * sign.reshape(shape)
    F = np.fft.ifftn(Gs, axes=tuple(range(n))) * K ** n
    F = np.fft.fftshift(F, axes=tuple(range(n)))
    dy = np.pi / (K * h)
    y = (np.arange(K) - K // 2) * dy
    phase = np.exp(-2j * y * L)
    for ax in range(n):
        shape = [1] * n
        shape[ax] = K
        F = F * phase.reshape(shape)
    # shifting by K/2 in the ifft index introduces (-1)^j per axis
    corr = (-1.0) ** (np.arange(K) - K // 2)
    for ax in range(n):
        shape = [1] * n
        shape[ax] = K
        F = F * corr.reshape(shape)
    return F * h ** n, dy ** n


def localization_defect(A, c: CocycleData, m: SpectralSymbol, eps: float, K: int = 128, L: float = 6.0,
                  exclude_singular: bool = True) -> tuple[float, dict]:
    """Weak-L1 size of ``T_{m~}(gamma_eps pi(A)) - gamma_eps T_{m~}(pi(A))`` on a grid.

    Entry ``(g, h)`` equals ``A_gh e(x.xi_gh) [T_Phi(gamma_eps) - Phi(0) gamma_eps](x)`` with
    ``Phi = m~(. + xi_gh)``. After ``y = sqrt(eps) x`` and ``eta = sqrt(eps) zeta / pi`` the
    quasi-norm is ``pi^{-n}`` times that of
    ``y -> [A_gh int (Phi(sqrt(eps) zeta / pi) - Phi(0)) e^{-|zeta|^2} e^{2 i y.zeta} dzeta]``,
    since the phases ``e(x.xi_gh)`` are a unitary conjugation. Entries where
    ``m~`` is discontinuous at ``xi_gh`` are dropped when ``exclude_singular``.
    """
    A = np.asarray(A, dtype=complex).copy()
    n = c.n
    xi = c.xi()
    G = A.shape[0]
    norms = np.linalg.norm(xi, axis=-1)
    singular = (norms < 1e-12) & (A != 0)
    meta = {"dropped_entries": 0}
    if singular.any() and not m.continuous_at_zero:
        if not exclude_singular:
            raise ValueError("symbol is discontinuous at xi = 0 and A has entries there")
        meta["dropped_entries"] = int(singular.sum())
        A[singular] = 0
    t = -L + (2 * L / K) * np.arange(K)
    mesh = np.stack(np.meshgrid(*([t] * n), indexing="ij"), axis=-1)
    weight = np.exp(-np.sum(mesh ** 2, axis=-1))
    shift = math.sqrt(eps) / math.pi
    out = np.zeros((K ** n, G, G), dtype=complex)
    cache = {}
    dvol = None
    for g, h in zip(*np.nonzero(A)):
        key = tuple(np.round(xi[g, h], 14))
        if key not in cache:
            x0 = xi[g, h]
            phi0 = m(np.sum(x0 ** 2))
            vals = m(np.sum((mesh * shift + x0) ** 2, axis=-1)) - phi0
            F, dvol = _gaussian_transform_grid(vals * weight, n, L, K)
            cache[key] = F.ravel()
        out[:, g, h] = A[g, h] * cache[key]
    if dvol is None:
        return 0.0, meta
    s = np.linalg.svd(out, compute_uv=False)
    sup = weak_sup(s, np.full(s.shape, dvol))[0]
    meta.update(K=K, L=L, eps=eps)
    return math.pi ** (-n) * sup, meta


def localization_sweep(A, c: CocycleData, m: SpectralSymbol, eps_list=(1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32),
                 K: int = 128, L: float = 6.0, exclude_singular: bool = True) -> Report:
    """Defects along decreasing ``eps``; passes when they decrease monotonically."""
    eps_list = sorted(eps_list, reverse=True)
    defects, meta = [], {}
    for eps in eps_list:
        d, meta = localization_defect(A, c, m, eps, K, L, exclude_singular)
        defects.append(d)
    diffs = np.diff(defects)
    mono = bool(np.all(diffs < 0)) if len(defects) > 1 else True
    rep = Report(f"localization[{c.name},{m.name}]")
    rep.add("group.localization", mono, value=defects[-1] if defects else 0.0, bound=defects[0] if defects else 0.0,
            defects=defects, eps=eps_list, dropped_entries=meta.get("dropped_entries", 0))
    rep.data.update(eps=eps_list, defects=defects)
    return rep


# -- Folner ---------------------------------------------------------------------------


def toeplitz_truncation(coeffs: dict[int, complex], N: int) -> np.ndarray:
    """``j_N(f)[a, b] = f^(a - b)`` for ``a, b in {-N, ..., N}``."""
    size = 2 * N + 1
    T = np.zeros((size, size), dtype=complex)
    for k, v in coeffs.items():
        if abs(k) < size:
            T += v * np.eye(size, k=-k)
    return T


def circle_lp_norm(coeffs: dict[int, complex], p: float, points: int | None = None) -> float:
    """``||sum_k c_k e(k t)||_{L_p(T)}`` by the trapezoid rule (exact for trigonometric polynomials
    when ``p`` is an even integer and enough points are used)."""
    deg = max((abs(k) for k in coeffs), default=0)
    points = points or max(4096, 64 * (deg + 1))
    t = np.arange(points) / points
    F = sum(v * np.exp(2j * np.pi * k * t) for k, v in coeffs.items())
    F = np.asarray(F) if not np.isscalar(F) else np.full(points, F)
    if np.isinf(p):
        return float(np.abs(F).max())
    return float(np.mean(np.abs(F) ** p) ** (1 / p))


def folner_embedding(coeffs: dict[int, complex], N: int, p: float) -> tuple[float, dict]:
    """Normalized Schatten-p norm of the Toeplitz truncation on ``{-N, ..., N}``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    T = toeplitz_truncation(coeffs, N)
    value = schatten_norm(T, p, normalized=True)
    exact = circle_lp_norm(coeffs, p)
    size = 2 * N + 1
    info = {"N": N, "p": p, "exact": exact, "error": abs(value - exact),
            "normalized_trace": complex(np.trace(T) / size),
            "folner_ratio_1": (size - 1) / size}
    return value, info


def folner_convergence(coeffs: dict[int, complex], N_list: Sequence[int], p: float,
                       tol: float = 1e-3, bound: Callable[[int], float] | None = None) -> Report:
    """Truncation errors along ``N_list``: non-increasing up to ``tol``, and below ``bound(N)`` if given."""
    vals = [folner_embedding(coeffs, N, p) for N in N_list]
    errors = [v[1]["error"] for v in vals]
    rep = Report(f"folner[p={p:g}]")
    c0 = coeffs.get(0, 0.0)
    tr = max(abs(v[1]["normalized_trace"] - c0) for v in vals)
    rep.add("group.trace", tr <= 1e-12, value=tr, bound=1e-12)
    rises = [b - a for a, b in zip(errors, errors[1:])]
    worst_rise = max(rises, default=0.0)
    mono = worst_rise <= tol and (len(errors) < 2 or errors[-1] <= errors[0])
    rep.add("group.folner", mono, value=errors[-1], bound=tol, worst_rise=worst_rise, errors=errors)
    if bound is not None:
        slack = max(e - bound(N) for e, N in zip(errors, N_list))
        rep.add("group.folner.rate", slack <= 0, value=slack, bound=0.0)
    rep.data.update(N=list(N_list), errors=errors, values=[v[0] for v in vals], exact=vals[0][1]["exact"])
    return rep


# -- transference consistency ---------------------------------------------------------


def transference_consistency_check(m: SpectralSymbol, c: CocycleData, trials: int = 20, seed: int = 0,
                                   extra_schur: int = 20, amplification: int = 1, slack: float = 1e-9) -> Report:
    """Restricted-family comparison of the Fourier-side and Schur-side weak (1,1) ratios over ``Z_N``.

    The Schur family contains the circulant realizations of the Fourier test
    elements, so the Fourier-side sup cannot exceed it; this is a consistency
    check on that family, not an operator-norm computation.
    """
    G = c.group
    if not G.abelian:
        raise ValueError("the dual cross-check needs an abelian group")
    rng = np.random.default_rng(seed)
    M = m(c.psi)
    k = amplification
    fourier, schur, circ_gap, dual_gap = [], [], 0.0, 0.0
    for _ in range(trials):
        shape = (G.order,) if k == 1 else (G.order, k, k)
        coeffs = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        coeffs *= rng.random(size=shape) < 0.6
        f = GroupAlgebraElement(G, coeffs)
        C = f.realization()
        Tf = fourier_multiplier(M, f)
        CT = Tf.realization()
        if k == 1:
            ev = cyclic_dual_spectrum(Tf)
            dual_gap = max(dual_gap, float(np.abs(np.sort(np.abs(ev)) - np.sort(np.linalg.svd(CT, compute_uv=False))).max()))
        l1 = schatten_norm(C, 1, normalized=True)
        if l1 == 0:
            continue
        r_f = weak_schatten_quasinorm(CT, normalized=True) / l1
        fourier.append(r_f)
        SM = schur_multiplier(np.kron(symbol_matrix(G, M), np.ones((k, k))), C)
        circ_gap = max(circ_gap, float(np.abs(SM - CT).max()))
        schur.append(weak_schatten_quasinorm(SM, normalized=True) / l1)
    size = G.order * k
    mask = np.kron(symbol_matrix(G, M), np.ones((k, k)))
    for _ in range(extra_schur):
        A = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        schur.append(weak_schatten_quasinorm(mask * A) / schatten_norm(A, 1))
    rep = Report(f"transference[{c.name},{m.name}]")
    fmax, smax = max(fourier, default=0.0), max(schur, default=0.0)
    rep.add("group.transference", fmax <= smax * (1 + slack), value=fmax, bound=smax,
            family="Schur side includes circulant realizations of the Fourier test set")
    rep.add("group.circulant_intertwining", circ_gap <= TAU_GROUP * max(1.0, size), value=circ_gap)
    if k == 1:
        rep.add("group.dual_diagonalization", dual_gap <= 1e-10 * size, value=dual_gap)
    return rep
