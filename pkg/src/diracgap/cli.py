"""Command-line front end.

    dirac-gap spectrum --dim 3d --nu 0.5 --kappa-max 1 --k-max 1 \\
        --mesh algebraic:rmax=200,n=8000,p=6 --tol 1e-10 --out json

Commands: spectrum, oracle, verify, converge-eps, converge-mesh,
pollution-demo. `--out` takes "json", "csv", or a file path (format from
the suffix); JSON is canonical, CSV is flat rows. A serialized RunConfig
can replace all flags via `--config file.json`.

Exit codes: 0 success, 1 computational failure, 2 invalid configuration,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import __version__
from .model import PotentialSpec, SpaceDim, make_sector
from .report import (
    ConfigError,
    RunConfig,
    converge_mesh,
    parse_mesh,
    wants_csv,
    write_output,
)
from .shooting import levels_csv, oracle_levels
from .solver import SolverError, spectrum
from .verify import pollution_demo, suite, truncation_convergence

POTENTIAL_CHOICES = ("coulomb", "truncated", "scaled", "coulomb_step")


def _add_spec_flags(sp: argparse.ArgumentParser, need_potential: bool) -> None:
    sp.add_argument("--dim", default="3d",
                    help="space dimension: 3d or 2d (default 3d)")
    sp.add_argument("--nu", type=float, required=True,
                    help="Coulomb coupling strength")
    if need_potential:
        sp.add_argument("--potential", default="coulomb",
                        choices=POTENTIAL_CHOICES,
                        help="potential shape (default coulomb)")
        sp.add_argument("--eps", type=float, default=None,
                        help="truncation/scaling parameter")
        sp.add_argument("--height", type=float, default=None,
                        help="step height for coulomb_step")
        sp.add_argument("--radius", type=float, default=None,
                        help="step radius for coulomb_step")


def _add_common_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--tol", type=float, default=1e-10,
                    help="energy tolerance (default 1e-10)")
    sp.add_argument("--order", type=int, default=6,
                    help="Gauss quadrature order per element (default 6)")
    sp.add_argument("--out", default=None,
                    help='"json", "csv", or an output path')


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-gap",
        description="Eigenvalues in the spectral gap of Dirac-Coulomb "
                    "operators via the min-max principle.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None,
                        help="JSON RunConfig file replacing all flags")
    sub = parser.add_subparsers(dest="command")

    sp = sub.add_parser("spectrum", help="gap levels over angular sectors")
    _add_spec_flags(sp, need_potential=True)
    sp.add_argument("--kappa-max", type=float, default=None,
                    help="largest |coupling| to include (default: minimal)")
    sp.add_argument("--k-max", type=int, default=1,
                    help="levels per sector (default 1)")
    sp.add_argument("--mesh", required=True,
                    help="kind:key=value,... e.g. algebraic:rmax=200,n=8000,p=6")
    sp.add_argument("--threads", type=int, default=None,
                    help="sector worker threads (default DIRAC_GAP_THREADS)")
    _add_common_flags(sp)

    sp = sub.add_parser("oracle", help="shooting levels, exact Coulomb only")
    _add_spec_flags(sp, need_potential=False)
    sp.add_argument("--kappa", type=float, default=None,
                    help="sector coupling (default: ground sector)")
    sp.add_argument("--count", type=int, default=3,
                    help="number of levels (default 3)")
    _add_common_flags(sp)

    sp = sub.add_parser("verify", help="run the property-check suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--hardy-trials", type=int, default=1000)
    sp.add_argument("--identity-trials", type=int, default=20)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("converge-eps",
                        help="lowest level along a truncation ladder")
    _add_spec_flags(sp, need_potential=False)
    sp.add_argument("--eps", required=True,
                    help="comma-separated decreasing ladder, e.g. 1,0.1,0.01")
    sp.add_argument("--mesh", required=True)
    sp.add_argument("--kappa-max", type=float, default=None)
    _add_common_flags(sp)

    sp = sub.add_parser("converge-mesh",
                        help="levels along a mesh refinement ladder")
    _add_spec_flags(sp, need_potential=True)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--k-max", type=int, default=1)
    sp.add_argument("--mesh", action="append", required=True,
                    help="repeat for each ladder mesh (need >= 3)")
    _add_common_flags(sp)

    sp = sub.add_parser("pollution-demo",
                        help="naive two-spinor Galerkin vs min-max")
    _add_spec_flags(sp, need_potential=False)
    sp.add_argument("--kappa", type=float, default=None)
    sp.add_argument("--dof", type=int, default=200)
    sp.add_argument("--threshold", type=float, default=0.05)
    _add_common_flags(sp)

    return parser


def _spec_from_args(args: argparse.Namespace) -> PotentialSpec:
    dim = SpaceDim.parse(args.dim)
    kind = getattr(args, "potential", "coulomb")
    return PotentialSpec(dim=dim, kind=kind, nu=args.nu,
                         eps=getattr(args, "eps", None),
                         height=getattr(args, "height", None),
                         radius=getattr(args, "radius", None))


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "verify":
        # the suite fixes its own potentials; the config spec is a stub
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9)
    else:
        try:
            spec = _spec_from_args(args)
        except ValueError as err:
            raise ConfigError(f"spec: {err}") from None
    kwargs = {
        "command": args.command,
        "spec": spec,
        "tol": getattr(args, "tol", 1e-10),
        "order": getattr(args, "order", 6),
        "out": getattr(args, "out", None),
        "seed": getattr(args, "seed", 0),
    }
    if args.command == "spectrum":
        kwargs.update(mesh=parse_mesh(args.mesh), k_max=args.k_max,
                      coupling_max=args.kappa_max, threads=args.threads)
    elif args.command == "oracle":
        kwargs.update(kappa=args.kappa, count=args.count)
    elif args.command == "verify":
        kwargs.update(hardy_trials=args.hardy_trials,
                      identity_trials=args.identity_trials)
    elif args.command == "converge-eps":
        try:
            ladder = tuple(float(e) for e in args.eps.split(","))
        except ValueError:
            raise ConfigError(f"eps_ladder: malformed {args.eps!r}") from None
        kwargs.update(mesh=parse_mesh(args.mesh), eps_ladder=ladder,
                      coupling_max=args.kappa_max)
    elif args.command == "converge-mesh":
        kwargs.update(mesh_ladder=tuple(parse_mesh(m) for m in args.mesh),
                      kappa=args.kappa, k_max=args.k_max)
    elif args.command == "pollution-demo":
        kwargs.update(kappa=args.kappa, dof=args.dof,
                      threshold=args.threshold)
    return RunConfig(**kwargs)


def _default_coupling_max(config: RunConfig) -> float:
    if config.coupling_max is not None:
        return config.coupling_max
    return config.spec.dim.nu_crit


def _run(config: RunConfig) -> int:
    spec = config.spec
    if config.command == "spectrum":
        report = spectrum(spec, config.mesh,
                          coupling_max=_default_coupling_max(config),
                          k_max=config.k_max, tol=config.tol,
                          order=config.order, threads=config.threads)
        text = report.to_csv() if wants_csv(config.out) else report.to_json()
        write_output(text, config.out)
        return 0

    if config.command == "oracle":
        sector = make_sector(spec.dim, config.default_kappa())
        levels = oracle_levels(sector, spec.nu, count=config.count)
        if wants_csv(config.out):
            text = levels_csv(levels)
        else:
            import json
            text = json.dumps(
                [{"kappa": lvl.sector.coupling, "n_index": lvl.n_index,
                  "E": lvl.energy, "residual": lvl.wronskian_residual}
                 for lvl in levels], indent=2, sort_keys=True)
        write_output(text, config.out)
        return 0

    if config.command == "verify":
        result = suite(seed=config.seed, hardy_trials=config.hardy_trials,
                       identity_trials=config.identity_trials)
        write_output(result.to_json(), config.out)
        if config.out not in (None, "json", "csv"):
            print(result.table())
        return 0 if result.passed else 3

    if config.command == "converge-eps":
        table = truncation_convergence(
            spec, config.eps_ladder, config.mesh,
            coupling_max=_default_coupling_max(config), tol=config.tol,
            order=config.order)
        text = table.to_csv() if wants_csv(config.out) else table.to_json()
        write_output(text, config.out)
        return 0

    if config.command == "converge-mesh":
        table = converge_mesh(spec, config.mesh_ladder,
                              kappa=config.default_kappa(),
                              k_max=config.k_max, tol=config.tol,
                              order=config.order)
        text = table.to_csv() if wants_csv(config.out) else table.to_json()
        write_output(text, config.out)
        return 0

    if config.command == "pollution-demo":
        sector = make_sector(spec.dim, config.default_kappa())
        report = pollution_demo(sector, spec.nu, dof=config.dof,
                                threshold=config.threshold, tol=config.tol,
                                order=config.order)
        import json
        write_output(json.dumps(report.to_dict(), indent=2, sort_keys=True),
                     config.out)
        return 0

    raise ConfigError(f"command: unknown command {config.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config is not None:
            with open(args.config, encoding="utf-8") as handle:
                config = RunConfig.from_json(handle.read())
        elif args.command is None:
            parser.print_usage(sys.stderr)
            print("dirac-gap: error: a command or --config is required",
                  file=sys.stderr)
            return 2
        else:
            config = _config_from_args(args)
        return _run(config)
    except ConfigError as err:
        print(f"dirac-gap: config error: {err}", file=sys.stderr)
        return 2
    except (SolverError, ValueError, RuntimeError) as err:
        print(f"dirac-gap: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
