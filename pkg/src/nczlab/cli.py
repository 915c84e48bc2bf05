"""Command line entry point.

Exit codes: 0 all checks pass, 1 some check failed, 2 structural error
(bad arguments, bad config, construction failure).
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as nio
from .cuculescu import run_cuculescu, verify_cuculescu
from .cz_decompose import (build_zeta, decompose_nonregular, decompose_regular, verify_nonregular_lemma,
                           verify_regular_lemma, verify_sandwich_structure, verify_vanishing_identities,
                           verify_zeta)
from .filtration import build_dyadic, build_nondoubling_filtration_1d, verify_nested
from .group_multiplier import (CocycleData, GroupModel, folner_convergence, gaussian_constants, hm_norm,
                               lift_symbol, localization_sweep, symbol_by_name, transference_consistency_check,
                               verify_cocycle, verify_conditionally_negative, verify_intertwining,
                               weak_lower_bound_check)
from .harness import (PROFILES, SECTIONS, ConfigError, SuiteConfig, generate_test_function, lambda_floor,
                      reference_measure, run_suite, weak11_generator)
from .operator_space import GridDomain
from .report import Report, _jsonable
from .singular_integral import build_operator, kernel_by_name, regularity_report, sweep_matrix_size

EXIT_OK, EXIT_CHECKS, EXIT_STRUCTURAL = 0, 1, 2


class StructuralError(RuntimeError):
    pass


# -- output --------------------------------------------------------------------------


def _reports_csv(reports: list[Report], seed: int) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["report", "check", "anchor", "passed", "value", "bound", "seed"])
    for rep in reports:
        for c in rep.checks:
            w.writerow([rep.name, c.id, c.anchor, c.passed, c.value, c.bound, seed])
    return buf.getvalue()


def _emit(args, reports: list[Report], extra: dict | None = None) -> int:
    if args.format == "csv":
        text = _reports_csv(reports, args.seed)
    else:
        payload = {"tool": "nczlab", "version": __version__, "seed": args.seed,
                   "passed": all(r.passed for r in reports), "reports": [r.to_dict() for r in reports]}
        if extra:
            payload.update(_jsonable(extra))
        text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    _write(args, text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECKS


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- verify --------------------------------------------------------------------------


def _input_function(args):
    if args.measure == "lebesgue":
        filt = build_dyadic(args.d, args.J)
    else:
        if args.d != 1:
            raise StructuralError("nondoubling measures are one-dimensional")
        filt = build_nondoubling_filtration_1d(reference_measure(args.measure, args.J))
    if args.input:
        f = nio.load(args.input)
        if not f.domain.same_as(filt.domain):
            raise StructuralError("input function lives on a different grid than the filtration")
    else:
        f = generate_test_function(args.seed, args.d, filt.domain.J, args.m, args.profile, domain=filt.domain)
    lam = args.lam if args.lam is not None else args.lam_factor * lambda_floor(f, filt)
    return f, filt, lam


def cmd_verify(args) -> int:
    f, filt, lam = _input_function(args)
    seq = run_cuculescu(f, lam, filt)
    tol = args.tol
    if args.kind == "cuculescu":
        reps = [verify_cuculescu(seq, f, tol=tol or 1e-9)]
    elif args.kind == "cz-regular":
        parts = decompose_regular(f, lam, filt, seq)
        reps = [verify_regular_lemma(parts, tol=tol or 1e-9), verify_sandwich_structure(parts)]
    elif args.kind == "cz-nonregular":
        parts = decompose_nonregular(f, lam, filt, seq)
        reps = [verify_nonregular_lemma(parts, tol=tol or 1e-9), verify_sandwich_structure(parts)]
    elif args.kind == "zeta":
        reps = [verify_zeta(build_zeta(seq), seq, f, tol=tol or 1e-10)]
    else:
        reps = [verify_vanishing_identities(seq, f, tol=tol or 1e-10)]
    return _emit(args, reps, {"lambda": lam, "filtration": filt.summary()})


# -- kernels and sweeps -------------------------------------------------------------------


def cmd_kernel_constants(args) -> int:
    k = kernel_by_name(args.kernel, args.d, args.theta)
    filt = None
    if args.measure != "lebesgue":
        filt = build_nondoubling_filtration_1d(reference_measure(args.measure, args.nd_J))
    rr = regularity_report(k, j_max=args.j_max, filt=filt)
    rep = Report(f"kernel[{args.kernel}]")
    rep.add("kernel.l2_hormander", bool(np.isfinite(rr.l2_hormander)), value=rr.l2_hormander)
    rep.add("kernel.l1_hormander", bool(np.isfinite(rr.l1_hormander)), value=rr.l1_hormander)
    if rr.nondoubling_l2 is not None:
        rep.add("kernel.nondoubling_l2", bool(np.isfinite(rr.nondoubling_l2)), value=rr.nondoubling_l2)
    return _emit(args, [rep], {"regularity": rr.to_dict()})


def cmd_sweep_weak11(args) -> int:
    dom = GridDomain.lebesgue(1, args.J)
    T = build_operator(kernel_by_name(args.kernel, 1, args.theta), dom)
    res = sweep_matrix_size(T, weak11_generator(args.seed, args.J, args.profile, dom), args.m_list, args.trials)
    rel = res.relative()
    rep = Report("weak11")
    for m in sorted(rel):
        rep.add(f"weak11.m_independence[m={m}]", rel[m] <= args.threshold, value=rel[m], bound=args.threshold)
    if args.format == "csv":
        _write(args, res.to_csv())
        return EXIT_OK if rep.passed else EXIT_CHECKS
    return _emit(args, [rep], {"K": res.K, "rows": res.rows})


# -- group ------------------------------------------------------------------------------


def _cocycle(args) -> CocycleData:
    if args.group == "zN":
        G = GroupModel.cyclic(args.order)
    elif args.group == "dihedral":
        G = GroupModel.dihedral(args.order)
    else:
        raise StructuralError(f"unknown group {args.group!r}")
    if args.cocycle == "regular":
        c = CocycleData.regular(G)
    elif args.cocycle == "rotation":
        c = CocycleData.rotation(args.order) if args.group == "zN" else CocycleData.dihedral(args.order)
    else:
        raise StructuralError(f"unknown cocycle {args.cocycle!r}")
    return c


def cmd_group(args) -> int:
    rng = np.random.default_rng(args.seed)
    c = _cocycle(args)
    m = symbol_by_name(args.symbol, theta=args.theta)
    eps = args.eps
    extra: dict = {"group": c.group.name, "cocycle": c.name, "symbol": m.name}
    if args.action == "cocycle":
        reps = [c.group.check_axioms(), verify_cocycle(c)]
    elif args.action == "negativity":
        reps = [verify_conditionally_negative(c.psi, c.group, trials=args.trials, rng=rng)]
    elif args.action == "intertwine":
        n = c.group.order
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        reps = [verify_intertwining(A, c, m, rng=rng)]
    elif args.action == "transfer":
        reps = [transference_consistency_check(m, c, trials=args.trials, seed=args.seed)]
    elif args.action == "folner":
        poly = {1: 1.0} if args.poly == "shift" else {
            k: complex(*rng.normal(size=2)) for k in range(-3, 4)}
        reps = [folner_convergence(poly, args.N_list, p, bound=(lambda N: 1.0 / N) if args.poly == "shift" else None)
                for p in args.p]
    elif args.action == "gaussian":
        reps = [gaussian_constants(eps, n) for n in (1, 2)]
        n = c.group.order
        for _ in range(args.trials):
            B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            reps.append(weak_lower_bound_check(B, c, eps, grid_eps=None))
    elif args.action == "localization":
        n = c.group.order
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        np.fill_diagonal(A, 0)
        reps = [localization_sweep(A, c, m, eps)]
    else:
        value, meta = hm_norm(m if c.n == 1 else lift_symbol(m, c.n), c.n, detail=True)
        rep = Report(f"hm_norm[{m.name},n={c.n}]")
        rep.add("group.hm_norm", bool(np.isfinite(value)), value=value)
        extra["hm"] = meta
        reps = [rep]
    return _emit(args, reps, extra)


# -- suite and filtrations -------------------------------------------------------------------


def cmd_suite_run(args) -> int:
    cfg = SuiteConfig.from_yaml(args.config) if args.config else SuiteConfig.from_dict({"seed": args.seed})
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    rep = run_suite(cfg, only)
    out = args.out or cfg["output"]["dir"]
    if out:
        formats = ("json", "csv") if args.format == "json" else ("csv",)
        rep.write(out, formats, svg=cfg["output"]["svg"] and not args.no_svg)
        s = rep.summary()
        print(f"{s['records']} records, {s['failed']} failed -> {out}")
    else:
        sys.stdout.write(rep.to_csv() if args.format == "csv" else rep.to_json() + "\n")
    return EXIT_OK if rep.passed else EXIT_CHECKS


def cmd_filtration(args) -> int:
    if args.action == "dump":
        if args.measure == "lebesgue":
            filt = build_dyadic(args.d, args.J)
        else:
            filt = build_nondoubling_filtration_1d(reference_measure(args.measure, args.J))
        if not args.out:
            raise StructuralError("filtration dump needs --out")
        nio.dump(filt, args.out)
        print(filt.summary())
        return EXIT_OK
    filt = nio.load(args.path)
    rep = verify_nested(filt)
    args.out = None
    return _emit(args, [rep], {"summary": filt.summary()})


# -- parser --------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [_fraction(t) for t in text.split(",") if t]


def _fraction(t: str) -> float:
    if "/" in t:
        a, b = t.split("/")
        return float(a) / float(b)
    return float(t)


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file, or directory for suite run")
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="nczlab", parents=[common],
                                description="Matrix-valued CZ decompositions, kernels and group multipliers.")
    p.add_argument("--version", action="version", version=f"nczlab {__version__}")
    p.set_defaults(seed=0, out=None, format="json")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run one verifier on a seeded or loaded function")
    v.add_argument("kind", choices=("cuculescu", "cz-regular", "cz-nonregular", "zeta", "identities"))
    v.add_argument("--d", type=int, default=1)
    v.add_argument("--J", type=int, default=4)
    v.add_argument("--m", type=int, default=2)
    v.add_argument("--profile", choices=PROFILES, default="spiky-psd")
    v.add_argument("--measure", choices=("lebesgue", "cubic", "two-bump"), default="lebesgue")
    v.add_argument("--lam", type=float, default=None, help="absolute height")
    v.add_argument("--lam-factor", type=float, default=2.0, help="height as a multiple of ||E_0 f||")
    v.add_argument("--input", help="function container written by nczlab.io.dump")
    v.add_argument("--tol", type=float, default=None)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("kernel", help="kernel regularity functionals")
    ksub = k.add_subparsers(dest="action", required=True)
    kc = ksub.add_parser("constants", parents=[common])
    kc.add_argument("--kernel", default="hilbert",
                    choices=("hilbert", "riesz1", "identity", "constant", "jump", "imaginary-power", "custom-symbol"))
    kc.add_argument("--d", type=int, default=1)
    kc.add_argument("--theta", type=float, default=0.7)
    kc.add_argument("--j-max", type=int, default=12)
    kc.add_argument("--measure", choices=("lebesgue", "cubic", "two-bump"), default="lebesgue")
    kc.add_argument("--nd-J", type=int, default=7)
    kc.set_defaults(func=cmd_kernel_constants)

    s = sub.add_parser("sweep", help="parameter sweeps")
    ssub = s.add_subparsers(dest="action", required=True)
    sw = ssub.add_parser("weak11", parents=[common])
    sw.add_argument("--kernel", default="hilbert")
    sw.add_argument("--theta", type=float, default=0.7)
    sw.add_argument("--J", type=int, default=10)
    sw.add_argument("--m-list", type=_ints, default=[1, 2, 4, 8, 16])
    sw.add_argument("--trials", type=int, default=20)
    sw.add_argument("--profile", choices=PROFILES, default="spiky-psd")
    sw.add_argument("--threshold", type=float, default=2.5)
    sw.set_defaults(func=cmd_sweep_weak11)

    g = sub.add_parser("group", parents=[common], help="group multiplier identities")
    g.add_argument("action", choices=("cocycle", "negativity", "intertwine", "transfer", "folner", "gaussian",
                                      "localization", "hm-norm"))
    g.add_argument("--group", choices=("zN", "dihedral"), default="zN")
    g.add_argument("--order", type=int, default=8)
    g.add_argument("--cocycle", choices=("rotation", "regular"), default="rotation")
    g.add_argument("--symbol", choices=("one", "heat", "imaginary-power"), default="heat")
    g.add_argument("--theta", type=float, default=0.7)
    g.add_argument("--eps", type=_floats, default=[1, 1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32])
    g.add_argument("--trials", type=int, default=20)
    g.add_argument("--N-list", type=_ints, default=[64, 128, 256, 512])
    g.add_argument("--p", type=_floats, default=[1.0, 2.0, 4.0])
    g.add_argument("--poly", choices=("shift", "random"), default="shift")
    g.set_defaults(func=cmd_group)

    su = sub.add_parser("suite", help="seeded verification suite")
    susub = su.add_subparsers(dest="action", required=True)
    sr = susub.add_parser("run", parents=[common])
    sr.add_argument("--config", help="YAML suite config (unknown keys rejected)")
    sr.add_argument("--only", help=f"comma list from {','.join(SECTIONS)}")
    sr.add_argument("--no-svg", action="store_true")
    sr.set_defaults(func=cmd_suite_run)

    fl = sub.add_parser("filtration", help="dump or load filtrations")
    flsub = fl.add_subparsers(dest="action", required=True)
    fd = flsub.add_parser("dump", parents=[common])
    fd.add_argument("--d", type=int, default=1)
    fd.add_argument("--J", type=int, default=4)
    fd.add_argument("--measure", choices=("lebesgue", "cubic", "two-bump"), default="lebesgue")
    fd.set_defaults(func=cmd_filtration)
    fo = flsub.add_parser("load", parents=[common])
    fo.add_argument("path")
    fo.set_defaults(func=cmd_filtration)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_STRUCTURAL if e.code else EXIT_OK
    try:
        return args.func(args)
    except (StructuralError, ConfigError, nio.FormatError, ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
