"""Command-line interface: ``hsl <command> [options]``.

Every command prints a JSON summary with a provenance block (package version,
sha256 of the canonical configuration, seed) on stdout. Errors are printed
as ``{"error": {"code": ..., "message": ...}}`` on stderr and the process exits
with 2 for invalid parameters and 3 for numerical failures. Set ``HSL_LOG``
(DEBUG, INFO, WARNING, ...) to see solver progress on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from henon_symmetry_lab.asymptotics import fit_log_slope, geometric_alphas, read_level_csv, sweep_levels
from henon_symmetry_lab.config import RunConfig, SolverOptions, log_level_from_env
from henon_symmetry_lab.errors import FileAccessError, HenonLabError, InvalidParameter
from henon_symmetry_lab.exponents import (
    ProblemSpec,
    classify_point,
    classify_scalar,
    region_samples,
    theoretical_slopes,
)
from henon_symmetry_lab.grids import DiskGrid, RadialFunction, RadialGrid, load_function, radial_cells_for, save_function
from henon_symmetry_lab.scalar import ScanResult, find_alpha_star, minimize_disk, minimize_radial, scan_alpha
from henon_symmetry_lab.system import (
    SystemSpec,
    minimize_system_radial,
    pohozaev_report,
    system_symmetry_certificate,
)

logger = logging.getLogger(__name__)

REGION_COLUMNS = ("p_plus_1", "q_plus_1", "gap", "m_gap", "side")
SWEEP_COLUMNS = ("alpha", "rad_level", "bump_upper", "converged")

CSV_HELP = f"""CSV column order:
  classify --out     {",".join(REGION_COLUMNS)}
  scan --out         {",".join(ScanResult.CSV_COLUMNS)}
  asymptotics --out  {",".join(SWEEP_COLUMNS)}
  asymptotics --input needs columns alpha and the --column name (default level)
"""


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _config(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("handler", "command")}
    return RunConfig(command=args.command, params=params)


def _emit(config: RunConfig, result: Dict[str, Any]) -> Dict[str, Any]:
    document = {"provenance": config.provenance(), "result": result}
    print(json.dumps(document, indent=2, sort_keys=True))
    return document


def _comments(config: RunConfig) -> List[str]:
    provenance = config.provenance()
    return [f"henon-symmetry-lab {provenance['version']}", f"config_hash {provenance['config_hash']}", f"seed {provenance['seed']}"]


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config: RunConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as stream:
        for line in _comments(config):
            stream.write(f"# {line}\n")
        writer = csv.writer(stream)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _output_dir(args: argparse.Namespace) -> Optional[Path]:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        delta=getattr(args, "delta", 0.02),
        margin=getattr(args, "margin", 0.0),
    )


def _parse_alphas(text: str) -> List[float]:
    """``lo:step:hi`` (inclusive) or a comma-separated list."""
    try:
        parts = [float(x) for x in text.split(":" if ":" in text else ",") if x.strip()]
    except ValueError as exc:
        raise InvalidParameter(f"alphas must be numbers, got {text!r}") from exc
    if ":" not in text:
        return parts
    if len(parts) != 3 or parts[1] <= 0:
        raise InvalidParameter(f"alphas must look like lo:step:hi with step > 0, got {text!r}")
    lo, step, hi = parts
    return [float(a) for a in np.arange(lo, hi + 0.5 * step, step)]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(args: argparse.Namespace) -> int:
    config = _config(args)
    spec = ProblemSpec(N=args.N, alpha=args.alpha, beta=args.beta, p=args.p, q=args.q)
    report = classify_point(spec, args.tol)
    scalar = classify_scalar(args.N, args.p, args.alpha)
    result = {"spec": spec.to_dict(), **report.to_dict(), "scalar": asdict(scalar)}
    if args.out:
        axis = np.linspace(2.0, args.region_max, args.region_grid)
        rows = region_samples(args.N, args.alpha, args.beta, axis, axis, args.tol)
        _write_csv(Path(args.out), REGION_COLUMNS, rows, config)
        result["region_csv"] = str(args.out)
    _emit(config, result)
    return 0


def cmd_solve_scalar(args: argparse.Namespace) -> int:
    config = _config(args)
    options = _options(args)
    out = _output_dir(args)
    m = args.grid or radial_cells_for(args.N, args.alpha)
    radial = minimize_radial(args.N, args.p, args.alpha, RadialGrid(args.N, m), options)
    result: Dict[str, Any] = {
        "N": args.N,
        "p": args.p,
        "alpha": args.alpha,
        "level": radial.level,
        "level_rad": radial.level,
        "iters": radial.iterations,
        "grad_norm": radial.grad_norm,
        "converged": radial.converged,
    }
    if out:
        save_function(radial.minimizer, out / "u_radial.txt", _comments(config))
    if args.grid_theta:
        if args.N != 2:
            raise InvalidParameter(f"the disk solve needs N=2, got N={args.N}")
        disk = minimize_disk(args.p, args.alpha, DiskGrid(m, args.grid_theta), options, init=args.init or None)
        result.update(
            level_full=disk.level,
            ratio=radial.level / disk.level,
            iters_full=disk.iterations,
            init_full=disk.init,
            converged_full=disk.converged,
        )
        if out:
            save_function(disk.minimizer, out / "u_disk.txt", _comments(config))
    _emit(config, result)
    return 0


def cmd_solve_system(args: argparse.Namespace) -> int:
    config = _config(args)
    options = _options(args)
    out = _output_dir(args)
    spec = SystemSpec.of(args.N, args.p, args.q, alpha=args.alpha, beta=args.beta)
    grid = RadialGrid(args.N, args.grid or radial_cells_for(args.N, args.alpha))
    state = minimize_system_radial(spec, grid, options)
    result = {**state.to_dict(), "breaks": None}
    if args.certify:
        certificate = system_symmetry_certificate(spec, grid, options, radial=state)
        result.update(breaks=certificate.breaks, bump_upper=certificate.bump_upper, best_width=certificate.best_width)
    if out:
        save_function(state.u, out / "u.txt", _comments(config))
        save_function(state.v, out / "v.txt", _comments(config))
    _emit(config, result)
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    config = _config(args)
    grid = DiskGrid(args.grid, args.grid_theta)
    scan = scan_alpha(args.p, _parse_alphas(args.alphas), grid, _options(args), jobs=args.jobs)
    rows = [[getattr(row, c) for c in ScanResult.CSV_COLUMNS] for row in scan.rows]
    if args.out:
        _write_csv(Path(args.out), ScanResult.CSV_COLUMNS, rows, config)
    result = {
        "p": args.p,
        "grid": list(grid.shape),
        "rows": [dict(zip(ScanResult.CSV_COLUMNS, row)) for row in rows],
        "breaking_alphas": scan.breaking_alphas(args.delta),
    }
    _emit(config, result)
    return 0


def cmd_alpha_star(args: argparse.Namespace) -> int:
    config = _config(args)
    estimate = find_alpha_star(
        args.p,
        _options(args),
        grid=DiskGrid(args.grid, args.grid_theta),
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        refine=not args.no_refine,
    )
    result = {
        "p": args.p,
        "alpha_star": estimate.alpha_star,
        "coarse_alpha_star": estimate.coarse_alpha_star,
        "relative_change": estimate.relative_change,
        "grid": list(estimate.grid),
        "refined_grid": list(estimate.refined_grid) if estimate.refined_grid else None,
        "delta": estimate.delta,
        "evaluations": estimate.evaluations,
        "note": "grid-dependent estimate",
    }
    _emit(config, result)
    return 0


def cmd_asymptotics(args: argparse.Namespace) -> int:
    config = _config(args)
    theory = theoretical_slopes(args.N, args.p, args.q if args.kind == "system" else None)
    radial_theory = theory.scalar_rad if args.kind == "scalar" else theory.system_rad_lower
    upper_theory = theory.scalar_upper if args.kind == "scalar" else theory.system_upper
    result: Dict[str, Any] = {"kind": args.kind, "N": args.N, "p": args.p, "q": args.q, "beta": args.beta}
    result["theory"] = {"radial": radial_theory, "upper": upper_theory}

    if args.input:
        fit = fit_log_slope(read_level_csv(args.input, args.column))
        result["fit"] = fit.to_dict()
        _emit(config, result)
        return 0

    alphas = geometric_alphas(args.alpha_min, args.alpha_max, args.ratio)
    sweep = sweep_levels(args.kind, args.N, args.p, alphas, args.q, args.beta, _options(args), args.jobs)
    radial_fit, bump_fit = sweep.radial_fit(), sweep.bump_fit()
    result.update(
        radial_fit=radial_fit.to_dict(),
        bump_fit=bump_fit.to_dict(),
        points=[asdict(pt) for pt in sweep.points],
    )
    if args.out:
        rows = [[pt.alpha, pt.rad_level, pt.bump_upper, pt.converged] for pt in sweep.points]
        _write_csv(Path(args.out), SWEEP_COLUMNS, rows, config)
    _emit(config, result)
    return 0


def cmd_pohozaev(args: argparse.Namespace) -> int:
    config = _config(args)
    u, v = load_function(args.u), load_function(args.v)
    if not isinstance(u, RadialFunction) or not isinstance(v, RadialFunction):
        raise InvalidParameter("the Pohozaev check needs two radial grid functions")
    spec = SystemSpec.of(u.grid.N, args.p, args.q, alpha=args.alpha, beta=args.beta)
    report = pohozaev_report(u, v, spec, args.multiplier, el_tol=None if args.skip_el_check else args.el_tol)
    _emit(config, {"spec": spec.to_dict(), **asdict(report)})
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_problem(parser: argparse.ArgumentParser, *, q: bool = True, beta: bool = True, N: int = 3) -> None:
    parser.add_argument("--N", type=int, default=N, help="dimension (default %(default)s)")
    parser.add_argument("--p", type=float, default=3.0, help="exponent p (default %(default)s)")
    if q:
        parser.add_argument("--q", type=float, default=2.0, help="exponent q (default %(default)s)")
    parser.add_argument("--alpha", type=float, default=0.0, help="weight exponent of u (default %(default)s)")
    if beta:
        parser.add_argument("--beta", type=float, default=0.0, help="weight exponent of v (default %(default)s)")


def _add_solver(parser: argparse.ArgumentParser, grid: Optional[int] = None) -> None:
    if grid is not None:
        parser.add_argument("--grid", type=int, default=grid, help="radial cells; 0 sizes the grid from alpha")
    parser.add_argument("--tol", type=float, default=1e-6, help="relative KKT tolerance (default %(default)s)")
    parser.add_argument("--max-iter", type=int, default=50_000, help="iteration cap (default %(default)s)")
    parser.add_argument("--seed", type=int, default=0, help="seed for random starts (default %(default)s)")
    parser.add_argument("--out", default=None, help="output location")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsl",
        description="Ground states of Hénon/Hardy weighted elliptic problems on the unit ball.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    classify = sub.add_parser("classify", help="classify (N,p,q,alpha,beta) against the critical hyperbolas")
    _add_problem(classify)
    classify.add_argument("--tol", type=float, default=1e-12, help="on-hyperbola tolerance")
    classify.add_argument("--out", default=None, help="region CSV path")
    classify.add_argument("--region-grid", type=int, default=64, help="samples per axis of the region CSV")
    classify.add_argument("--region-max", type=float, default=12.0, help="largest p+1 and q+1 sampled")
    classify.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    classify.set_defaults(handler=cmd_classify)

    scalar = sub.add_parser("solve-scalar", help="radial (and disk) scalar ground state")
    _add_problem(scalar, q=False, beta=False)
    _add_solver(scalar, grid=256)
    scalar.add_argument("--grid-theta", type=int, default=0, help="angular cells; >0 adds the disk solve (N=2)")
    scalar.add_argument(
        "--init", action="append", choices=("radial", "boundary_bump", "random"), help="disk start (repeatable)"
    )
    scalar.set_defaults(handler=cmd_solve_scalar)

    system = sub.add_parser("solve-system", help="radial ground state of the weighted system")
    _add_problem(system)
    _add_solver(system, grid=256)
    system.add_argument("--certify", action="store_true", help="compare with boundary caps")
    system.add_argument("--margin", type=float, default=0.0, help="relative margin of the certificate")
    system.set_defaults(handler=cmd_solve_system)

    scan = sub.add_parser("scan", help="radial vs full disk levels over alpha (N=2)")
    scan.add_argument("--p", type=float, default=3.0)
    scan.add_argument("--alphas", default="0:25:200", help="lo:step:hi or a comma list")
    _add_solver(scan, grid=128)
    scan.add_argument("--grid-theta", type=int, default=128)
    scan.add_argument("--delta", type=float, default=0.02)
    scan.add_argument("--jobs", type=int, default=1)
    scan.set_defaults(handler=cmd_scan)

    star = sub.add_parser("alpha-star", help="bisect for the onset of symmetry breaking (N=2)")
    star.add_argument("--p", type=float, default=3.0)
    star.add_argument("--alpha-min", type=float, default=0.0)
    star.add_argument("--alpha-max", type=float, default=400.0)
    _add_solver(star, grid=128)
    star.add_argument("--grid-theta", type=int, default=128)
    star.add_argument("--delta", type=float, default=0.02)
    star.add_argument("--no-refine", action="store_true")
    star.set_defaults(handler=cmd_alpha_star)

    asym = sub.add_parser("asymptotics", help="slopes of radial levels and cap bounds in alpha")
    asym.add_argument("--kind", choices=("scalar", "system"), default="scalar")
    asym.add_argument("--N", type=int, default=2)
    asym.add_argument("--p", type=float, default=3.0)
    asym.add_argument("--q", type=float, default=2.0)
    asym.add_argument("--beta", type=float, default=0.0)
    asym.add_argument("--alpha-min", type=float, default=100.0)
    asym.add_argument("--alpha-max", type=float, default=1000.0)
    asym.add_argument("--ratio", type=float, default=2.0**0.5)
    asym.add_argument("--input", default=None, help="fit an existing (alpha, level) CSV instead")
    asym.add_argument("--column", default="level")
    asym.add_argument("--jobs", type=int, default=1)
    _add_solver(asym)
    asym.set_defaults(handler=cmd_asymptotics)

    poho = sub.add_parser("pohozaev", help="Pohozaev residual of a saved (u, v) pair")
    poho.add_argument("--u", required=True, help="grid file of u")
    poho.add_argument("--v", required=True, help="grid file of v")
    poho.add_argument("--p", type=float, default=3.0)
    poho.add_argument("--q", type=float, default=2.0)
    poho.add_argument("--alpha", type=float, default=0.0)
    poho.add_argument("--beta", type=float, default=0.0)
    poho.add_argument("--multiplier", type=float, default=1.0)
    poho.add_argument("--el-tol", type=float, default=1e-2)
    poho.add_argument("--skip-el-check", action="store_true")
    poho.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    poho.set_defaults(handler=cmd_pohozaev)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=log_level_from_env(), stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except HenonLabError as exc:
        failure = exc
    except OSError as exc:
        failure = FileAccessError(f"{exc.filename or 'file'}: {exc.strerror or exc}")
        failure.__cause__ = exc
    logger.debug("command %s failed", args.command, exc_info=failure)
    print(json.dumps({"error": failure.to_dict()}), file=sys.stderr)
    return failure.exit_code
