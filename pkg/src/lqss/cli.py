"""Command-line front end.

Exit codes: 0 ok, 1 parse or schema error, 2 realizability failure,
3 unstable system, 4 not quasi-balanceable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .exceptions import NotQuasiBalanceableError, UnstableSystemError, UnsupportedFeedthroughError
from .gramians import gramians, is_hurwitz
from .model import (
    DEFAULT_RTOL,
    check_realizability,
    complexify,
    dispersive_params,
    fixture,
    random_dispersive,
    recover_physical,
)
from .passivity import PURITY_TOL, is_pure_steady_state, log_negativity, passify
from .quasibalance import BLOCK_RTOL, GROUP_RTOL, is_quasi_balanceable, quasi_balance, truncate
from .symplectic import symplectic_eigenvalues

EXIT_OK, EXIT_PARSE, EXIT_UNREALIZABLE, EXIT_UNSTABLE, EXIT_NOT_QB = 0, 1, 2, 3, 4


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return f"{value:.6g}"
    if isinstance(value, np.ndarray):
        with np.printoptions(precision=6, suppress=False, linewidth=100):
            body = np.array2string(
                value,
                formatter={"float_kind": lambda x: f"{x:.6g}", "complex_kind": lambda z: f"{z:.6g}"},
            )
        return "\n    " + body.replace("\n", "\n    ")
    return str(value)


class Report:
    """Collects results for one command; printed as text and optionally as JSON."""

    def __init__(self, command: str, path: Path, tolerances: dict):
        self.data = {
            "command": command,
            "input": str(path),
            "input_sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            "tolerances": tolerances,
            "results": {},
        }

    def add(self, key, value):
        self.data["results"][key] = value

    def emit(self, json_path):
        print(f"{self.data['command']}: {self.data['input']}")
        for key, value in self.data["results"].items():
            if isinstance(value, dict):
                continue
            print(f"  {key}: {_fmt(value)}")
        if json_path:
            Path(json_path).write_text(json.dumps(_jsonable(self.data), indent=2) + "\n")


def _load(path):
    try:
        return io.as_quadrature(io.load_system(path))
    except (io.SystemFileError, OSError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None


def _realizable(report, g, tol):
    rr = check_realizability(g, tol)
    report.add("residual_ccr", rr.residual_ccr)
    report.add("residual_output", rr.residual_output)
    report.add("residual_D", rr.residual_D)
    report.add("realizability_tolerance", rr.tolerance)
    report.add("realizable", rr.passed)
    return rr.passed


def _stable(report, g):
    stable, abscissa = is_hurwitz(g.A)
    report.add("spectral_abscissa", abscissa)
    report.add("hurwitz", stable)
    return stable


def cmd_check(args) -> int:
    g = _load(args.file)
    if g is None:
        return EXIT_PARSE
    report = Report("check", Path(args.file), {"realizability": args.tol_realizability})
    ok = _realizable(report, g, args.tol_realizability)
    report.emit(args.json)
    return EXIT_OK if ok else EXIT_UNREALIZABLE


def cmd_gramians(args) -> int:
    g = _load(args.file)
    if g is None:
        return EXIT_PARSE
    report = Report("gramians", Path(args.file), {"realizability": args.tol_realizability})
    if not _realizable(report, g, args.tol_realizability):
        report.emit(args.json)
        return EXIT_UNREALIZABLE
    if not _stable(report, g):
        report.emit(args.json)
        return EXIT_UNSTABLE
    G = gramians(g)
    report.add("P", G.P)
    report.add("Q", G.Q)
    report.add("lyapunov_residual_P", G.residual_P)
    report.add("lyapunov_residual_Q", G.residual_Q)
    report.add("symplectic_eigenvalues_P", symplectic_eigenvalues(G.P).values)
    report.add("symplectic_eigenvalues_Q", symplectic_eigenvalues(G.Q).values)
    report.emit(args.json)
    return EXIT_OK


def cmd_qbal(args) -> int:
    g = _load(args.file)
    if g is None:
        return EXIT_PARSE
    tols = {"realizability": args.tol_realizability, "block": args.tol_block, "group": args.tol_group}
    report = Report("qbal", Path(args.file), tols)
    if not _realizable(report, g, args.tol_realizability):
        report.emit(args.json)
        return EXIT_UNREALIZABLE
    if not _stable(report, g):
        report.emit(args.json)
        return EXIT_UNSTABLE
    try:
        ok, diag = is_quasi_balanceable(g, tol=args.tol_block, start=args.start)
    except NotQuasiBalanceableError as exc:
        report.add("quasi_balanceable", False)
        report.add("reason", str(exc))
        report.emit(args.json)
        return EXIT_NOT_QB
    report.add("quasi_balanceable", ok)
    report.add("commutator_norm", diag.commutator_norm)
    report.add("commutator_condition", diag.commutator_ok)
    report.add("block_form_condition", diag.block_form_ok)
    report.add("criteria_agree", diag.agree)
    if not ok:
        report.add("block_violations", [list(v) for v in diag.block_violations])
        report.emit(args.json)
        return EXIT_NOT_QB
    qbr = quasi_balance(g, tol=args.tol_block, group_rtol=args.tol_group, start=diag.start)
    report.add("T", qbr.transform.T)
    report.add("sigma_P", qbr.sigma_P.values)
    report.add("sigma_Q", qbr.sigma_Q.values)
    report.add("hankel_values", qbr.hankel_values)
    report.add("gramian_residual_P", qbr.residual_P)
    report.add("gramian_residual_Q", qbr.residual_Q)
    if args.truncate is not None:
        red = truncate(qbr, args.truncate)
        report.add("r", red.r)
        report.add("discarded_hankel_values", red.discarded_hankel_values)
        report.add("error_hinf", red.error_hinf)
        report.add("reduced_realizable", red.realizability.passed)
        report.add("reduced_system", io.system_to_document(red.model))
        if args.output:
            io.dump_system(red.model, args.output)
    report.emit(args.json)
    return EXIT_OK


def cmd_gauss(args) -> int:
    g = _load(args.file)
    if g is None:
        return EXIT_PARSE
    tols = {"realizability": args.tol_realizability, "purity": args.tol_purity}
    report = Report("gauss", Path(args.file), tols)
    if not _realizable(report, g, args.tol_realizability):
        report.emit(args.json)
        return EXIT_UNREALIZABLE
    if not _stable(report, g):
        report.emit(args.json)
        return EXIT_UNSTABLE
    P = gramians(g).P
    purity = is_pure_steady_state(P, args.tol_purity)
    report.add("symplectic_eigenvalues_P", purity.spectrum.values)
    report.add("pure", purity.is_pure)
    if g.n == 2:
        report.add("log_negativity", log_negativity(P))
    if purity.is_pure:
        try:
            T, passive = passify(g, args.tol_purity)
        except UnsupportedFeedthroughError as exc:
            report.add("passify_error", str(exc))
        else:
            phys = recover_physical(passive)
            report.add("passifier_T", T.T)
            report.add("R_passive", phys.R)
            report.add("K_passive", phys.K)
    report.emit(args.json)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.name == "opo2":
        params = args.params or [1e6, -1e6, 5e6]
    elif args.params:
        params = args.params
    else:
        rng = np.random.default_rng(args.seed)
        p = random_dispersive(rng, args.n, args.p, args.k)
        H = complexify(p.R)
        M = p.K[: args.p, 0::2]
        u = p.K[args.p :: 2, 0::2]
        params = dispersive_params(H, M, u)
    try:
        system = fixture(args.name, params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.form == "quadrature":
        system = io.as_quadrature(system)
    doc = io.system_to_document(system)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lqss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="system JSON file")
        p.add_argument("--json", metavar="PATH", help="write the full report as JSON")
        p.add_argument(
            "--tol-realizability",
            type=float,
            default=None,
            help=f"absolute residual tolerance (default {DEFAULT_RTOL:g} * scale)",
        )

    p = sub.add_parser("check", help="physical realizability residuals")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gramians", help="controllability and observability Gramians")
    common(p)
    p.set_defaults(func=cmd_gramians)

    p = sub.add_parser("qbal", help="quasi-balanceability, balancing transform and truncation")
    common(p)
    p.add_argument("--truncate", type=int, metavar="R", help="number of mode pairs to keep")
    p.add_argument("--output", "-o", metavar="PATH", help="write the reduced system file")
    p.add_argument("--tol-block", type=float, default=BLOCK_RTOL)
    p.add_argument("--tol-group", type=float, default=GROUP_RTOL)
    p.add_argument("--start", choices=["auto", "P", "Q"], default="auto")
    p.set_defaults(func=cmd_qbal)

    p = sub.add_parser("gauss", help="steady-state purity, passive equivalent, log-negativity")
    common(p)
    p.add_argument("--tol-purity", type=float, default=PURITY_TOL)
    p.set_defaults(func=cmd_gauss)

    p = sub.add_parser("fixtures", help="emit an example system file")
    p.add_argument("name", choices=["opo2", "dispersive"])
    p.add_argument("--params", type=float, nargs="+", help="flat fixture parameter list")
    p.add_argument("--form", choices=["physical", "quadrature"], default="physical")
    p.add_argument("--n", type=int, default=2, help="dispersive: modes")
    p.add_argument("--p", type=int, default=1, help="dispersive: passive output fields")
    p.add_argument("--k", type=int, default=1, help="dispersive: dispersive field pairs")
    p.add_argument("--seed", type=int, default=0, help="dispersive: random seed")
    p.add_argument("--output", "-o", metavar="PATH")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
