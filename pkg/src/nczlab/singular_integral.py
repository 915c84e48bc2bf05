"""Discretized singular integrals, kernel-regularity functionals and weak (1,1) sweeps.

Kernels act entrywise on matrix-valued functions: ``T(f)_{ab} = T(f_{ab})``.
Fourier conventions: ``f^(xi) = int f(x) exp(-2 pi i x.xi) dx``; a multiplier
``M`` has kernel ``k(x, y) = M^v(x - y)``. Under this convention ``-i sign(xi)``
corresponds to ``1 / (pi x)`` and ``-i xi_j / |xi|`` to ``c_d x_j / |x|^{d+1}``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .filtration import AtomicFiltration
from .operator_space import GridDomain, OpValuedFunction, bochner_lp_norm, weak_l1_breakpoint

logger = logging.getLogger(__name__)

QUAD_RTOL = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """A kernel ``k(x, y)`` defined off the diagonal.

    ``evaluator`` takes broadcastable arrays ``x, y`` of shape ``(..., d)``.
    ``cell_integral(x, a, b)`` (d = 1 only) returns ``int_a^b k(x, y) dy`` in
    closed form when available. ``symbol`` is the Fourier multiplier when known.
    """

    name: str
    d: int
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    n: float | None = None
    size_constant: float | None = None
    symbol: Callable[[np.ndarray], np.ndarray] | None = None
    cell_integral: Callable | None = None
    identity: bool = False
    translation_invariant: bool = True

    def __post_init__(self):
        if self.n is None:
            object.__setattr__(self, "n", float(self.d))

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def check_size(self, x, y, tol: float = 1e-9) -> tuple[bool, float]:
        """Max of ``|k(x,y)| |x-y|^n`` over sampled pairs against the declared constant."""
        x, y = np.atleast_2d(x), np.atleast_2d(y)
        r = np.linalg.norm(x - y, axis=-1)
        vals = np.abs(self(x, y)) * r ** self.n
        worst = float(vals.max(initial=0.0))
        if self.size_constant is None:
            return True, worst
        return worst <= self.size_constant * (1 + tol), worst


def _diff(x, y):
    return np.asarray(x)[..., 0] - np.asarray(y)[..., 0]


def _hilbert_cell_integral(x, a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.abs((x - a) / (x - b))) / np.pi


def hilbert_kernel() -> KernelSpec:
    return KernelSpec(
        "hilbert", 1, lambda x, y: 1.0 / (np.pi * _diff(x, y)), n=1, size_constant=1 / np.pi,
        symbol=lambda xi: -1j * np.sign(np.asarray(xi)[..., 0]), cell_integral=_hilbert_cell_integral,
    )


def riesz_constant(d: int) -> float:
    return math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2)


def riesz_kernel(d: int = 2, j: int = 0) -> KernelSpec:
    c = riesz_constant(d)

    def ev(x, y):
        z = x - y
        return c * z[..., j] / np.linalg.norm(z, axis=-1) ** (d + 1)

    def sym(xi):
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(r > 0, -1j * xi[..., j] / np.where(r > 0, r, 1), 0)
        return out

    cell = _hilbert_cell_integral if d == 1 else None
    return KernelSpec(f"riesz{j + 1}", d, ev, n=d, size_constant=c, symbol=sym, cell_integral=cell)


def identity_kernel(d: int = 1) -> KernelSpec:
    """Delta kernel; the discretized operator is the identity."""
    return KernelSpec("identity", d, lambda x, y: np.zeros(np.broadcast_shapes(x.shape, y.shape)[:-1]),
                      n=d, size_constant=0.0, symbol=lambda xi: np.ones(np.asarray(xi).shape[:-1]),
                      identity=True)


def constant_kernel(d: int = 1, value: float = 1.0) -> KernelSpec:
    return KernelSpec("constant", d, lambda x, y: np.full(np.broadcast_shapes(x.shape, y.shape)[:-1], value),
                      n=0, translation_invariant=True)


def jump_kernel(y0: float = 0.5) -> KernelSpec:
    """``(1 + 1_{y >= y0}) / (x - y)``: a size-bounded kernel with a jump in ``y``."""
    def ev(x, y):
        return (1.0 + (np.asarray(y)[..., 0] >= y0)) / _diff(x, y)
    return KernelSpec("jump", 1, ev, n=1, size_constant=2.0, translation_invariant=False)


def imaginary_power_constant(theta: float) -> complex:
    t = complex(theta)
    return complex(special.gamma((1 + 1j * t) / 2) / (np.pi ** (0.5 + 1j * t) * special.gamma(-1j * t / 2)))


def imaginary_power_kernel(theta: float) -> KernelSpec:
    """Kernel of ``|xi|^{i theta}`` on the line: ``c_theta |x|^{-1 - i theta}``."""
    if theta == 0:
        return identity_kernel(1)
    c = imaginary_power_constant(theta)

    def ev(x, y):
        r = np.abs(_diff(x, y))
        return c * r ** (-1 - 1j * theta)

    return KernelSpec(f"imaginary-power[{theta:g}]", 1, ev, n=1, size_constant=abs(c),
                      symbol=lambda xi: np.abs(np.asarray(xi)[..., 0]) ** (1j * theta) + 0j)


def _numeric_inverse_1d(M: Callable, cutoff: float = 200.0) -> Callable:
    def k(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=complex)
        for i, xv in np.ndenumerate(x):
            w = 2 * np.pi * xv
            re_c = integrate.quad(lambda s: M(s).real + M(-s).real, 0, cutoff, weight="cos", wvar=w, limit=400)[0]
            im_c = integrate.quad(lambda s: M(s).imag + M(-s).imag, 0, cutoff, weight="cos", wvar=w, limit=400)[0]
            re_s = integrate.quad(lambda s: M(s).real - M(-s).real, 0, cutoff, weight="sin", wvar=w, limit=400)[0]
            im_s = integrate.quad(lambda s: M(s).imag - M(-s).imag, 0, cutoff, weight="sin", wvar=w, limit=400)[0]
            out[i] = (re_c - im_s) + 1j * (im_c + re_s)
        return out
    return k


def multiplier_kernel(M, d: int = 1, theta: float = 0.7) -> KernelSpec:
    """Kernel of a Fourier multiplier.

    ``M`` is a shipped name (``"one"``, ``"hilbert"``, ``"sign"``, ``"riesz1"``,
    ``"imaginary-power"``) or, for d = 1, a callable symbol with integrable
    decay whose kernel is obtained by numerical inversion.
    """
    if isinstance(M, str):
        if M in ("one", "identity"):
            return identity_kernel(d)
        if M == "hilbert":
            return hilbert_kernel() if d == 1 else riesz_kernel(d, 0)
        if M == "sign":
            h = hilbert_kernel()
            return KernelSpec("sign", 1, lambda x, y: 1j * h(x, y), n=1, size_constant=1 / np.pi,
                              symbol=lambda xi: np.sign(np.asarray(xi)[..., 0]) + 0j,
                              cell_integral=lambda x, a, b: 1j * _hilbert_cell_integral(x, a, b))
        if M.startswith("riesz"):
            j = int(M[5:] or 1) - 1
            return riesz_kernel(d, j)
        if M == "imaginary-power":
            return imaginary_power_kernel(theta)
        raise ValueError(f"unknown symbol {M!r}")
    if d != 1:
        raise ValueError("numerical inversion is only supported on the line")
    tail = max(abs(complex(M(s))) * s ** 2 for s in (50.0, 100.0, 200.0, -200.0))
    if not np.isfinite(tail) or tail > 1e-3:
        raise ValueError("symbol has no closed form and lacks integrable decay")
    inv = _numeric_inverse_1d(M)
    return KernelSpec("custom-symbol", 1, lambda x, y: inv(_diff(x, y)), n=1,
                      symbol=lambda xi: np.vectorize(M, otypes=[complex])(np.asarray(xi)[..., 0]))


def kernel_by_name(name: str, d: int = 1, theta: float = 0.7) -> KernelSpec:
    zoo = {
        "hilbert": lambda: hilbert_kernel(),
        "riesz1": lambda: riesz_kernel(max(d, 1), 0),
        "identity": lambda: identity_kernel(d),
        "constant": lambda: constant_kernel(d),
        "jump": lambda: jump_kernel(),
        "imaginary-power": lambda: imaginary_power_kernel(theta),
        "custom-symbol": lambda: multiplier_kernel(lambda s: np.exp(-np.pi * s * s) * (abs(s) + 1e-300) ** (1j * theta)),
    }
    if name not in zoo:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(zoo)}")
    return zoo[name]()


# -- discretized operators --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscretizedCZOperator:
    """A linear map on scalar grid functions, applied entrywise to matrices.

    Either a dense cell-to-cell matrix or a periodic Fourier multiplier.
    """

    domain: GridDomain
    kind: str
    matrix: np.ndarray | None = None
    multiplier: np.ndarray | None = None
    kernel: KernelSpec | None = None

    def apply_scalar(self, u: np.ndarray) -> np.ndarray:
        """Act on the leading (cell) axis of ``u``."""
        u = np.asarray(u)
        flat = u.reshape(u.shape[0], -1)
        if self.kind == "matrix":
            out = self.matrix @ flat
        else:
            side = 2 ** self.domain.J
            shape = (side,) * self.domain.d
            grid = flat.reshape(shape + (flat.shape[1],))
            axes = tuple(range(self.domain.d))
            fu = np.fft.fftn(grid, axes=axes)
            out = np.fft.ifftn(fu * self.multiplier[..., None], axes=axes).reshape(flat.shape)
        return out.reshape(u.shape)

    def dense(self) -> np.ndarray:
        if self.kind == "matrix":
            return self.matrix
        return self.apply_scalar(np.eye(self.domain.n_cells, dtype=complex))

    def is_real(self) -> bool:
        return self.kind == "matrix" and not np.iscomplexobj(self.matrix)


def _gl(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    return (t + 1) / 2, w / 2


def build_operator(k: KernelSpec, domain: GridDomain, order: int = 8) -> DiscretizedCZOperator:
    """Principal-value discretization ``T[i, l] = int_{cell l} k(x_i, y) dmu(y)``.

    ``x_i`` is the center of cell ``i`` and the diagonal is zero. Closed-form
    cell integrals are used when the kernel provides them; otherwise a
    tensor Gauss-Legendre rule on each cell. The measure density is taken
    constant on cells.
    """
    N = domain.n_cells
    if k.identity:
        return DiscretizedCZOperator(domain, "matrix", np.eye(N), kernel=k)
    if k.d != domain.d:
        raise ValueError("kernel and domain dimensions differ")
    centers = domain.cell_centers
    corners = domain.cell_corners
    h = domain.side
    density = domain.cell_measures / h ** domain.d
    if k.cell_integral is not None and domain.d == 1:
        T = k.cell_integral(centers[:, None, 0], corners[None, :, 0], corners[None, :, 0] + h)
    else:
        t, w = _gl(order)
        pts = np.array(list(itertools.product(t, repeat=domain.d)))
        wts = np.prod(np.array(list(itertools.product(w, repeat=domain.d))), axis=1) * h ** domain.d
        T = np.zeros((N, N), dtype=complex)
        for q, wq in zip(pts, wts):
            ys = corners + q * h
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = k(centers[:, None, :], ys[None, :, :])
            T += wq * vals
    T = np.array(T)
    np.fill_diagonal(T, 0)
    T = T * density[None, :]
    if np.iscomplexobj(T) and np.abs(T.imag).max() == 0:
        T = T.real
    return DiscretizedCZOperator(domain, "matrix", T, kernel=k)


def build_symbol_operator(symbol: Callable, domain: GridDomain, name: str = "symbol") -> DiscretizedCZOperator:
    """Exact periodic multiplier: ``T e_k = symbol(k) e_k`` for integer frequencies ``k``."""
    if not np.allclose(domain.cell_measures, domain.cell_measures[0]):
        raise ValueError("the symbol-exact builder requires a uniform grid")
    side = 2 ** domain.J
    freqs = np.fft.fftfreq(side, d=1.0 / side)
    mesh = np.stack(np.meshgrid(*([freqs] * domain.d), indexing="ij"), axis=-1)
    mult = np.asarray(symbol(mesh), dtype=complex)
    return DiscretizedCZOperator(domain, "fft", multiplier=mult)


def apply_cz(T: DiscretizedCZOperator, f: OpValuedFunction) -> OpValuedFunction:
    if not T.domain.same_as(f.domain):
        raise ValueError("operator and function live on different domains")
    out = T.apply_scalar(f.values)
    herm = bool(f.hermitian and T.is_real())
    return OpValuedFunction(f.domain, out, hermitian=herm)


def weak11_measure(T: DiscretizedCZOperator, f: OpValuedFunction) -> tuple[float, float]:
    """``(ratio, lambda*)`` with ratio ``||T f||_{1,inf} / ||f||_1``."""
    fl1 = bochner_lp_norm(f, 1)
    if not fl1 > 0:
        raise ValueError("f must have positive L1 norm")
    sup, lam = weak_l1_breakpoint(apply_cz(T, f))
    return sup / fl1, lam


def weak11_ratio(T: DiscretizedCZOperator, f: OpValuedFunction, lam_grid: Sequence[float] | None = None) -> float:
    return weak11_measure(T, f)[0]


@dataclass
class SweepResult:
    rows: list[dict]
    K: dict[int, float]

    def relative(self) -> dict[int, float]:
        base = self.K[min(self.K)]
        return {m: (v / base if base > 0 else 0.0) for m, v in self.K.items()}

    def to_csv(self) -> str:
        lines = ["m,trial,seed,lambda_star,ratio"]
        for r in self.rows:
            lines.append(f"{r['m']},{r['trial']},{r['seed']},{r['lambda_star']:.12g},{r['ratio']:.12g}")
        return "\n".join(lines) + "\n"


def sweep_matrix_size(T: DiscretizedCZOperator, generator: Callable[[int, int], OpValuedFunction],
                      m_list: Sequence[int], trials: int | Sequence[int],
                      lam_grid: Sequence[float] | None = None) -> SweepResult:
    """``K(m) = max`` over trials of the weak (1,1) ratio.

    ``generator(seed, m)`` returns a PSD function on ``T.domain``; ``trials``
    is a count (seeds ``0..trials-1``) or an explicit seed list.
    """
    seeds = list(range(trials)) if isinstance(trials, int) else list(trials)
    rows, K = [], {}
    for m in m_list:
        best = 0.0
        for t, s in enumerate(seeds):
            f = generator(s, m)
            ratio, lam = weak11_measure(T, f)
            rows.append({"m": int(m), "trial": t, "seed": int(s), "lambda_star": lam, "ratio": ratio})
            best = max(best, ratio)
        K[int(m)] = best
    return SweepResult(rows, K)


# -- regularity functionals -------------------------------------------------------


@dataclass
class QuadResult:
    value: float
    error: float
    converged: bool = True


def _quad_1d(func: Callable, a: float, b: float) -> QuadResult:
    val, err, *rest = integrate.quad(func, a, b, epsrel=QUAD_RTOL, epsabs=0.0, limit=200, full_output=1)
    ok = len(rest) < 2
    if not ok:
        logger.warning("quadrature on [%g, %g] did not converge: %s", a, b, rest[1])
    return QuadResult(val, err, ok)


def _corona_nd(func: Callable, center: np.ndarray, r0: float, r1: float) -> QuadResult:
    """``int_{r0 <= |x - center| <= r1} func(x) dx`` for d = 2 by refined product rules."""
    d = center.shape[0]
    if d != 2:
        raise ValueError("corona quadrature implemented for d <= 2")
    prev = None
    for nr, nt in ((16, 64), (32, 128), (64, 256), (128, 512)):
        t, w = _gl(nr)
        r = r0 + (r1 - r0) * t
        wr = w * (r1 - r0) * r
        th = 2 * np.pi * np.arange(nt) / nt
        pts = center + r[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None, :, :]
        val = float(np.sum(func(pts) * wr[:, None]) * 2 * np.pi / nt)
        if prev is not None and abs(val - prev) <= QUAD_RTOL * max(abs(val), 1e-300):
            return QuadResult(val, abs(val - prev))
        prev = val
    return QuadResult(val, abs(val - prev), False)


def corona_integral(k: KernelSpec, y, c, r0: float, r1: float) -> QuadResult:
    """``int_{r0 <= |x - c| <= r1} |k(x, y) - k(x, c)|^2 dx`` over the whole space."""
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    if k.d == 1:
        def g(x):
            xx = np.array([x])
            return float(np.abs(k(xx, y) - k(xx, c)) ** 2)
        a = _quad_1d(g, c[0] + r0, c[0] + r1)
        b = _quad_1d(g, c[0] - r1, c[0] - r0)
        return QuadResult(a.value + b.value, a.error + b.error, a.converged and b.converged)

    def gv(x):
        return np.abs(k(x, y) - k(x, c)) ** 2
    return _corona_nd(gv, c, r0, r1)


def sample_lattice(center, side: float, per_axis: int = 3) -> np.ndarray:
    """Deterministic points ``center + side * {-1/2, ..., 1/2}^d`` (includes the center for odd counts)."""
    center = np.asarray(center, dtype=float)
    offs = np.linspace(-0.5, 0.5, per_axis) * side
    pts = np.array(list(itertools.product(offs, repeat=center.shape[0])))
    return center + pts


def dyadic_cube_family(d: int = 1, levels: Sequence[int] = (0, 1, 2, 3), per_level: int = 2) -> list[tuple[np.ndarray, float]]:
    """A few dyadic cubes ``(center, side)`` per level, taken from the first cells of each level."""
    out = []
    for lev in levels:
        side = 2.0 ** -lev
        count = 2 ** lev
        for idx in list(itertools.product(range(count), repeat=d))[:per_level]:
            out.append(((np.array(idx) + 0.5) * side, side))
    return out


@dataclass
class FunctionalResult:
    value: float
    per_cube: list[float]
    per_j: list[list[float]]
    j_max: int
    converged: bool
    max_error: float

    def __float__(self) -> float:
        return float(self.value)


def l2_hormander_constant(k: KernelSpec, cube_family=None, j_max: int = 12, per_axis: int = 3,
                          detail: bool = False):
    """``sup_Q sum_{j=1}^{j_max} sup_y (2^{jd} l^d int_{corona_j} |k(x,y) - k(x,c_Q)|^2 dx)^{1/2}``.

    ``y`` ranges over ``sample_lattice(c_Q, l(Q), per_axis)``.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    cubes = dyadic_cube_family(k.d) if cube_family is None else cube_family
    d = k.d
    per_cube, per_j, conv, err = [], [], True, 0.0
    for c, side in cubes:
        c = np.asarray(c, dtype=float)
        terms = []
        for j in range(1, j_max + 1):
            best = 0.0
            for y in sample_lattice(c, side, per_axis):
                if np.allclose(y, c):
                    continue
                q = corona_integral(k, y, c, 2 ** j * side, 2 ** (j + 1) * side)
                conv &= q.converged
                err = max(err, q.error)
                best = max(best, math.sqrt(max(2 ** (j * d) * side ** d * q.value, 0.0)))
            terms.append(best)
        per_j.append(terms)
        per_cube.append(float(np.sum(terms)))
    res = FunctionalResult(max(per_cube, default=0.0), per_cube, per_j, j_max, conv, err)
    return res if detail else res.value


def l1_hormander_constant(k: KernelSpec, pair_family=None, j_max: int = 16, detail: bool = False):
    """``max`` over pairs of ``int_{|x - y1| > 2|y1 - y2|} |k(x,y1) - k(x,y2)| dx``,
    truncated to ``|x - y1| < 2^{j_max + 1} |y1 - y2|`` (d = 1) and summed over dyadic shells."""
    if pair_family is None:
        pair_family = [(np.array([0.5] * k.d), np.array([0.5] * k.d) + np.eye(k.d)[0] * 2.0 ** -s)
                       for s in (2, 4, 6)]
    values, conv = [], True
    for y1, y2 in pair_family:
        y1, y2 = np.asarray(y1, float), np.asarray(y2, float)
        delta = float(np.linalg.norm(y1 - y2))
        total = 0.0
        for j in range(1, j_max + 1):
            r0, r1 = 2.0 ** j * delta, 2.0 ** (j + 1) * delta
            if k.d == 1:
                def g(x):
                    xx = np.array([x])
                    return float(np.abs(k(xx, y1) - k(xx, y2)))
                a = _quad_1d(g, y1[0] + r0, y1[0] + r1)
                b = _quad_1d(g, y1[0] - r1, y1[0] - r0)
                total += a.value + b.value
                conv &= a.converged and b.converged
            else:
                q = _corona_nd(lambda x: np.abs(k(x, y1) - k(x, y2)), y1, r0, r1)
                total += q.value
                conv &= q.converged
        values.append(total)
    res = FunctionalResult(max(values, default=0.0), values, [], j_max, conv, 0.0)
    return res if detail else res.value


def _mu_corona_1d(domain: GridDomain, func: Callable, c: float, r0: float, r1: float, order: int = 16):
    """``(mu(C), int_C func dmu)`` over ``C = {r0 <= |x - c| <= r1} cap [0, 1)`` for piecewise-constant density."""
    h = domain.side
    dens = domain.cell_measures / h
    t, w = _gl(order)
    mass, total = 0.0, 0.0
    for lo, hi in ((c + r0, c + r1), (c - r1, c - r0)):
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if hi <= lo:
            continue
        i0, i1 = int(np.floor(lo / h)), min(int(np.ceil(hi / h)), domain.n_cells)
        for i in range(i0, i1):
            a, b = max(lo, i * h), min(hi, (i + 1) * h)
            if b <= a or dens[i] == 0:
                continue
            mass += dens[i] * (b - a)
            xs = a + (b - a) * t
            total += dens[i] * (b - a) * float(np.dot(w, func(xs)))
    return mass, total


def nondoubling_l2_constant(k: KernelSpec, filt: AtomicFiltration, j_max: int = 12,
                            per_axis: int = 3, levels: Sequence[int] | None = None, detail: bool = False):
    """``sup_Q sum_j sup_{y in B_Q} (mu(C_{Q,j}) int_{C_{Q,j}} |k(x,y) - k(x,c_B)|^2 dmu(x))^{1/2}``
    on a one-dimensional filtration whose atoms carry balls; coronas are cut to ``[0, 1)``."""
    if filt.domain.d != 1 or k.d != 1:
        raise ValueError("nondoubling functional is implemented on the line")
    levels = range(1, filt.J + 1) if levels is None else levels
    per_atom, per_j = [], []
    seen = set()
    for j in levels:
        for atom in filt.levels[j]:
            if not atom.has_ball:
                raise ValueError(f"atom {atom.id} at level {atom.level} has no ball data")
            key = (float(atom.ball_center[0]), float(atom.ball_radius))
            if key in seen or atom.measure <= 0:
                continue
            seen.add(key)
            c, r = key
            terms = []
            for jj in range(1, j_max + 1):
                best = 0.0
                for y in np.linspace(c - r, c + r, per_axis):
                    if y == c:
                        continue
                    func = lambda x, y=y: np.abs(k(x[:, None], np.array([y])) - k(x[:, None], np.array([c]))) ** 2
                    mass, integral = _mu_corona_1d(filt.domain, func, c, 2 ** jj * r, 2 ** (jj + 1) * r)
                    best = max(best, math.sqrt(max(mass * integral, 0.0)))
                terms.append(best)
            per_j.append(terms)
            per_atom.append(float(np.sum(terms)))
    res = FunctionalResult(max(per_atom, default=0.0), per_atom, per_j, j_max, True, 0.0)
    return res if detail else res.value


def lipschitz_constant(k: KernelSpec, triples=None, gamma: float = 1.0, rng=None) -> float:
    """``max |k(x,y) - k(x,z)| |x - y|^{n + gamma} / |y - z|^gamma`` over ``|x - y| > 2|y - z|``."""
    if triples is None:
        rng = np.random.default_rng(0) if rng is None else rng
        y = rng.uniform(0, 1, size=(4000, k.d))
        z = y + rng.normal(size=(4000, k.d)) * 10.0 ** rng.uniform(-6, -1, size=(4000, 1))
        dirs = rng.normal(size=(4000, k.d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dist = np.linalg.norm(y - z, axis=1, keepdims=True) * (2.0 + 10.0 ** rng.uniform(0, 3, size=(4000, 1)))
        x = y + dirs * dist
    else:
        x, y, z = (np.asarray(a, dtype=float) for a in triples)
    ryz = np.linalg.norm(y - z, axis=-1)
    rxy = np.linalg.norm(x - y, axis=-1)
    ok = (rxy > 2 * ryz) & (ryz > 0)
    num = np.abs(k(x, y) - k(x, z)) * rxy ** (k.n + gamma)
    return float((num[ok] / ryz[ok] ** gamma).max(initial=0.0))


@dataclass
class RegularityReport:
    kernel: str
    l2_hormander: float
    l1_hormander: float
    nondoubling_l2: float | None
    lipschitz: float | None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "l2_hormander": self.l2_hormander, "l1_hormander": self.l1_hormander,
                "nondoubling_l2": self.nondoubling_l2, "lipschitz": self.lipschitz, "metadata": self.metadata}


def regularity_report(k: KernelSpec, j_max: int = 12, filt: AtomicFiltration | None = None,
                      cube_family=None) -> RegularityReport:
    l2 = l2_hormander_constant(k, cube_family, j_max=j_max, detail=True)
    l1 = l1_hormander_constant(k)
    nd = nondoubling_l2_constant(k, filt, j_max=j_max) if (filt is not None and k.d == 1) else None
    lip = lipschitz_constant(k)
    meta = {"j_max": j_max, "n_cubes": len(l2.per_cube), "quad_rtol": QUAD_RTOL,
            "converged": l2.converged, "max_quad_error": l2.max_error}
    return RegularityReport(k.name, l2.value, l1, nd, lip, meta)
