"""Check records shared by every verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

# check id -> the identity or inequality it verifies
ANCHORS: dict[str, str] = {
    "cuculescu.A": "q_j in M_j",
    "cuculescu.B": "q_j E_j(f) q_j <= lambda q_j",
    "cuculescu.C": "q_j commutes with q_{j-1} E_j(f) q_{j-1}",
    "cuculescu.D.local": "q f q <= lambda q",
    "cuculescu.D.global": "lambda tau(1 - q) <= ||f||_1",
    "cz.reconstruction": "f = g + b_d + b_off",
    "cz.g_l1": "||g||_1 <= ||f||_1",
    "cz.g_linf": "||g||_inf <= c_reg lambda",
    "cz.g_l2": "||g||_2^2 <= 6 lambda ||f||_1",
    "cz.bd_l1": "sum_j ||b_d,j||_1 <= 2 ||f||_1",
    "cz.mean_zero": "E_j(b_d,j) = E_j(b_off,j) = 0",
    "cz.sandwich": "q_j b_off,j q_j = p_j b_off,j p_j = 0",
    "cz.scalar_oracle": "m = 1: maximal dyadic cubes with average > lambda, g = f_Q on Q, b_Q = (f - f_Q) 1_Q",
    "cz.vanishing.offdiag": "p_j f_{j^k} p_k = 0 for j != k",
    "cz.vanishing.q": "p_j f_j q = 0",
    "zeta.annihilation": "zeta(x) p_j(y) = p_j(y) zeta(x) = 0 for y in Q, x in 5Q",
    "zeta.measure": "phi(1 - zeta) <~ ||f||_1 / lambda",
    "filtration.nested": "Sigma_k increasingly nested",
    "filtration.sandwich": "B_Q subset Q subset 28 B_Q",
    "filtration.doubling": "mu(alpha B) <= beta mu(B)",
    "filtration.corona": "int_{alpha B_R minus 56 B_Q} dmu(y) / |x - y|^n",
    "filtration.growth": "mu(B(x,r)) <= C_mu r^n",
    "filtration.regularity": "E_j f <= c_reg E_{j-1} f",
    "kernel.l2_hormander": "2^{jd} l(Q)^d int_{2^j l(Q) <= |x - c_Q| <= 2^{j+1} l(Q)} |k(x,y) - k(x,c_Q)|^2 dx",
    "kernel.l1_hormander": "int_{|x - y1| > 2|y1 - y2|} |k(x,y1) - k(x,y2)| dx",
    "kernel.nondoubling_l2": "mu(C_{Q,j}) int_{C_{Q,j}} |k(x,y) - k(x,c_{B_Q})|^2 dmu(x)",
    "weak11.ratio": "lambda int tr{|T_k f| > lambda} dmu <= C int tr|f| dmu",
    "weak11.m_independence": "constant C_d independent of m",
    "group.axioms": "G is a group: unit, inverses, associativity",
    "group.cocycle": "alpha_g(beta(h)) = beta(gh) - beta(g)",
    "group.cocycle.orthogonal": "alpha: G -> O(H) orthogonal",
    "group.length": "psi(g) = |beta(g)|^2",
    "group.negativity": "sum a_g conj(a_h) psi(g h^-1) <= 0 when sum a_g = 0",
    "group.schoenberg": "lambda(g) -> exp(-t psi(g)) lambda(g) Markov",
    "group.intertwining": "T_m~(pi(A)) = pi(S_{m o psi}(A))",
    "group.homomorphism": "pi(A) = u^* (1 (x) A) u",
    "group.lift_singular_values": "pi(A)(x) unitarily conjugate to A",
    "group.circulant_intertwining": "J(T_M f) = S_M(J f) on circulants",
    "group.dual_diagonalization": "lambda(Z_N) diagonalized by characters",
    "group.gaussian_l1": "gamma_eps(x) = (eps/pi)^{n/2} exp(-eps |x|^2)",
    "group.half_height": "gamma_eps(R_eps) = gamma_eps(0) / 2",
    "group.sigma_constant": "sigma_eps(B(0,R_eps)) independent of eps",
    "group.weak_lower_bound": ">= 1/4 sigma_eps(B(0,R_eps)) ||B||_{S_1,inf}",
    "group.folner": "||f||_{L_p(L(G))} = lim ||j_a(f)||_{S_p(Lambda_a)}",
    "group.trace": "tau(f) = f^(e)",
    "group.transference": "||id (x) T_M||_{L1 -> L1,inf} <= ||id (x) S_M||_{S1 -> S1,inf}",
    "group.localization": "T_m~(gamma_eps pi(A)) - gamma_eps T_m~(pi(A)) -> 0",
    "group.hm_norm": "sup_xi sum_{|g| <= [n/2]+1} |xi|^|g| |d^g M(xi)|",
}


def anchor_for(check_id: str) -> str:
    """Anchor of a check id, falling back to the longest dotted prefix with one."""
    key = check_id.split("[")[0]
    while key:
        if key in ANCHORS:
            return ANCHORS[key]
        key = key.rpartition(".")[0]
    return ""


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return x


@dataclass
class Check:
    id: str
    passed: bool
    value: float | None = None
    bound: float | None = None
    detail: dict = field(default_factory=dict)

    @property
    def anchor(self) -> str:
        return anchor_for(self.id)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "check": self.id,
                "anchor": self.anchor,
                "passed": self.passed,
                "value": self.value,
                "bound": self.bound,
                "detail": self.detail,
            }
        )


@dataclass
class Report:
    name: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, id: str, passed, value=None, bound=None, **detail) -> Check:
        c = Check(id, bool(passed), None if value is None else float(value),
                  None if bound is None else float(bound), detail)
        self.checks.append(c)
        return c

    def __getitem__(self, id: str) -> Check:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def __contains__(self, id: str) -> bool:
        return any(c.id == id for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": _jsonable(self.data),
        }

    def __str__(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            tail = ""
            if c.value is not None:
                tail = f" value={c.value:.6g}"
            if c.bound is not None:
                tail += f" bound={c.bound:.6g}"
            lines.append(f"  [{'ok' if c.passed else 'XX'}] {c.id}{tail}")
        return "\n".join(lines)
