"""
Command-line interface.

    python -m qetlab sweep --out sweep.csv --svg sweep.svg
    python -m qetlab verify
    python -m qetlab slp --budget 5000 --seed 1

Exit codes: 0 success, 1 invariant or verification failure, 2 bad usage.
"""

import argparse
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from qetlab import __version__, config
from qetlab.exceptions import InvariantViolation, QETError
from qetlab.export import write_csv, write_svg
from qetlab.hamiltonian import ModelParams
from qetlab.noise import PerturbationSpec, perturbation_sweep
from qetlab.passivity import slp_probe
from qetlab.protocols import equivalence_report
from qetlab.sweeps import SweepConfig, SweepRow, run_sweep
from qetlab.timing import timing_check, timing_check_durations
from qetlab.verification import SUITES, run_suites

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qetlab", description="Quantum energy teleportation on SLP states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="logging level (default from QET_LOG_LEVEL)")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", type=Path, help="CSV output path (stdout when omitted)")

    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--svg", type=Path, help="optional SVG plot path")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--config", type=Path, help="TOML sweep configuration")
    grid.add_argument("--h-a", type=float, help="local field h_A")
    grid.add_argument("--h-b", type=float, help="local field h_B; sets h_b_ratio = h_B / h_A")
    grid.add_argument("--kappa", type=float, help=argparse.SUPPRESS)

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--h-a", type=float, help="local field h_A")
    point.add_argument("--h-b", type=float, help="local field h_B")
    point.add_argument("--kappa", type=float, help="coupling kappa")

    sub = parser.add_subparsers(dest="command", required=True)
    sweep = sub.add_parser("sweep", parents=[output, plot, grid], help="kappa/h sweep of the unitary protocol")
    sweep.add_argument("--mode", choices=["ideal", "noisy", "perturbed"], help="sweep mode")
    sweep.add_argument("--epsilon", type=float, help="field error of the perturbed mode")
    verify = sub.add_parser("verify", help="run the invariant suites")
    verify.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only this suite (repeatable)")
    sub.add_parser("equivalence", parents=[output, point], help="minimal vs fully unitary protocol")
    slp = sub.add_parser("slp", parents=[output, point], help="strong local passivity probe")
    slp.add_argument("--seed", type=int, default=0, help="seed of the multistart")
    slp.add_argument("--budget", type=int, default=5000, help="energy evaluations")
    sub.add_parser("noise", parents=[output, plot, grid], help="sweep with relaxation")
    perturb = sub.add_parser("perturb", parents=[output, grid], help="Hamiltonian perturbation sweep")
    perturb.add_argument("--epsilon", type=float, action="append", help="field error (repeatable)")
    perturb.add_argument("--sides", choices=["both", "A", "B"], default="both", help="fields carrying the error")

    timing = sub.add_parser("timing", parents=[output], help="protocol time against 1/J_AB")
    timing.add_argument("--j-ab", type=float, default=config.J_AB, help="J_AB in Hz")
    timing.add_argument("--j-ana", type=float, default=config.J_ANA, help="J_AnA in Hz")
    timing.add_argument("--j-ban", type=float, default=config.J_BAN, help="J_BAn in Hz")
    timing.add_argument("--t-pulse", type=float, default=config.T_PULSE, help="pulse time in seconds")

    serve = sub.add_parser("serve", help="run the JSON API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def load_config(args: argparse.Namespace, mode: str | None = None) -> SweepConfig:
    """
    Sweep configuration from ``--config`` and the grid flags.

    Raises:
        ValueError: for flags that have no meaning on a kappa grid
    """
    if args.kappa is not None:
        raise ValueError("--kappa sets a single point; use kappa_start/kappa_stop in --config for a grid")
    mode = mode or getattr(args, "mode", None)
    epsilon = getattr(args, "epsilon", None) if args.command == "sweep" else None
    overrides = {
        "mode": mode,
        "epsilon": epsilon,
        "output": args.out,
        "svg": getattr(args, "svg", None),
        "h_a": args.h_a,
    }
    if args.config is not None:
        cfg = SweepConfig.from_toml(args.config, **overrides)
    else:
        cfg = SweepConfig(**{k: v for k, v in overrides.items() if v is not None})
    if epsilon is not None and cfg.mode != "perturbed":
        raise ValueError("--epsilon needs the perturbed mode")
    if args.h_b is not None:
        cfg = SweepConfig.model_validate({**dict(cfg), "h_b_ratio": args.h_b / cfg.h_a})
    return cfg


def point_params(args: argparse.Namespace) -> ModelParams:
    values = {"h_a": args.h_a, "h_b": args.h_b, "kappa": args.kappa}
    return ModelParams(**{k: v for k, v in values.items() if v is not None})


def _plot(path: Path | None, x, series, title: str) -> None:
    if path is None:
        return
    try:
        write_svg(path, x, series, title=title)
    except OSError as exc:
        logger.warning("SVG not written to %s: %s", path, exc)


def cmd_sweep(args: argparse.Namespace, mode: str | None = None) -> int:
    cfg = load_config(args, mode)
    rows = run_sweep(cfg)
    write_csv(cfg.output, SweepRow.columns(), (row.values() for row in rows))
    x = [r.kappa_over_h for r in rows]
    _plot(
        cfg.svg,
        x,
        {
            "-dE_B": [r.energy_extracted for r in rows],
            "-lambda_min": [r.max_extractable for r in rows],
            "-<X_A X_B>": [r.neg_exp_xaxb for r in rows],
            "<Z_B>": [r.exp_zb for r in rows],
        },
        title=f"{cfg.mode}, h_B = {cfg.h_b_ratio:g} h_A",
    )
    return EXIT_OK


def cmd_noise(args: argparse.Namespace) -> int:
    return cmd_sweep(args, mode="noisy")


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_suites(args.suite)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}" + (f": {r.detail}" if r.detail else ""))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} suites failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def cmd_equivalence(args: argparse.Namespace) -> int:
    p = point_params(args)
    report = equivalence_report(p)
    columns = ["h_a", "h_b", "kappa", "rho_b_diff", "constant_plus", "constant_minus", "max_residual", "control_basis"]
    row = [
        p.h_a,
        p.h_b,
        p.kappa,
        report.rho_b_diff,
        report.projection_constants[1],
        report.projection_constants[-1],
        report.max_residual,
        report.control_basis,
    ]
    write_csv(args.out, columns, [row])
    if report.rho_b_diff > config.EIGEN_TOL:
        raise InvariantViolation("equivalence", f"rho_B differs by {report.rho_b_diff:.3e}")
    return EXIT_OK


def cmd_slp(args: argparse.Namespace) -> int:
    p = point_params(args)
    report = slp_probe(p, budget=args.budget, seed=args.seed)
    columns = ["h_a", "h_b", "kappa", "best_extraction", "evaluations", "certified_slp"]
    write_csv(args.out, columns, [[p.h_a, p.h_b, p.kappa, report.best_extraction, report.evaluations, report.certified_slp]])
    if not report.certified_slp:
        raise InvariantViolation("slp_certification", f"local channel extracted {report.best_extraction:.3e}")
    return EXIT_OK


def cmd_perturb(args: argparse.Namespace) -> int:
    cfg = load_config(args, mode="perturbed")
    spec = PerturbationSpec(sides=args.sides, **({"epsilons": tuple(args.epsilon)} if args.epsilon else {}))
    base = cfg.params_at(0.0)
    grid = [k * cfg.h_a for k in cfg.kappa_over_h()]
    rows = perturbation_sweep(base, spec, grid)
    columns = ["epsilon", "kappa_over_h", "extraction", "ideal", "relative_deviation"]
    write_csv(
        cfg.output,
        columns,
        ([r.epsilon, r.kappa / cfg.h_a, r.extraction, r.ideal, r.relative_deviation] for r in rows),
    )
    for r in rows:
        if r.kappa > 0 and r.extraction <= 0:
            raise InvariantViolation("robustness", f"no extraction at epsilon={r.epsilon:g}, kappa={r.kappa:g}")
    return EXIT_OK


def cmd_timing(args: argparse.Namespace) -> int:
    report = timing_check(args.j_ab, args.j_ana, args.j_ban, args.t_pulse)
    durations = timing_check_durations(args.j_ab)
    columns = ["variant", "t_total", "t_c", "margin", "passed"]
    rows = [
        ["couplings", report.t_total, report.t_c, report.margin, report.passed],
        ["gate_durations", durations.t_total, durations.t_c, durations.margin, durations.passed],
    ]
    write_csv(args.out, columns, rows)
    if not report.passed:
        raise InvariantViolation("timing", f"t_total={report.t_total:.4g} s exceeds t_c/{report.margin:g}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("qetlab.main:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "equivalence": cmd_equivalence,
    "slp": cmd_slp,
    "noise": cmd_noise,
    "perturb": cmd_perturb,
    "timing": cmd_timing,
    "serve": cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    config.configure_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValidationError, tomllib.TOMLDecodeError, OSError, ValueError) as exc:
        message = "; ".join(line.strip() for line in str(exc).splitlines()[:3]) or type(exc).__name__
        print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE
    except QETError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
