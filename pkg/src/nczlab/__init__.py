"""Matrix-valued Calderon-Zygmund decompositions, singular integrals and group multipliers."""

__version__ = "0.1.0"

from .operator_space import GridDomain, OpValuedFunction, bochner_lp_norm, weak_l1_quasinorm  # noqa: E402
from .filtration import AtomicFiltration, build_dyadic, build_nondoubling_filtration_1d  # noqa: E402
from .cuculescu import CuculescuSequence, run_cuculescu, verify_cuculescu  # noqa: E402
from .cz_decompose import CZParts, build_zeta, decompose_nonregular, decompose_regular  # noqa: E402
from .report import Report  # noqa: E402

__all__ = [
    "AtomicFiltration", "CZParts", "CuculescuSequence", "GridDomain", "OpValuedFunction", "Report",
    "bochner_lp_norm", "build_dyadic", "build_nondoubling_filtration_1d", "build_zeta",
    "decompose_nonregular", "decompose_regular", "run_cuculescu", "verify_cuculescu", "weak_l1_quasinorm",
]
