"""Time the numeric kernels against the pure-python fallback.

Both implementations are imported side by side, so the comparison runs in
one process on identical inputs taken from a real assembled problem (the
nu = 0.9 ground sector on a geometric mesh), not on synthetic arrays with
unrepresentative branch behavior. An optional end-to-end row times the
full spectrum command in a subprocess per backend.

    python3 benchmarks/bench_kernels.py [--dof 16000] [--repeat 5]
        [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import timeit

from diracgap import _fallback
from diracgap.forms import TrialBasis, assemble
from diracgap.mesh import build_mesh
from diracgap.model import PotentialSpec, SpaceDim, make_sector

try:
    from diracgap import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _row(name: str, size: str, compiled: float, python: float) -> None:
    speedup = python / compiled if compiled > 0.0 else float("inf")
    print(f"{name:<18}{size:<14}{compiled * 1e3:>12.3f}{python * 1e3:>12.3f}"
          f"{speedup:>10.1f}x")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dof", type=int, default=16000,
                        help="mesh size for the kernel inputs")
    parser.add_argument("--repeat", type=int, default=5,
                        help="repetitions per timing (minimum is reported)")
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time a full spectrum solve per backend")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend not available; nothing to compare",
              file=sys.stderr)
        return 1

    sector = make_sector(SpaceDim.ThreeD, -1)
    spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9)
    mesh = build_mesh("geometric", rmax=200.0, n=args.dof, rmin=1e-8)
    forms = assemble(TrialBasis(mesh=mesh), sector, spec)
    qd, qo = forms.q(0.4)

    print(f"{'kernel':<18}{'size':<14}{'compiled ms':>12}{'python ms':>12}"
          f"{'speedup':>10}")

    _row("negcount", f"n={len(qd)}",
         _time(lambda: _kernels.negcount(qd, qo), args.repeat),
         _time(lambda: _fallback.negcount(qd, qo), args.repeat))

    cache_args = (forms._vq, forms._waa, forms._wdd, forms._wad, 0.4, 1)
    _row("weighted_tridiag", f"nel={forms._vq.shape[0]}",
         _time(lambda: _kernels.weighted_tridiag(*cache_args), args.repeat),
         _time(lambda: _fallback.weighted_tridiag(*cache_args), args.repeat))

    shoot_args = (-1.0, 0.9, 0.4, 1e-10, 1.0, 0.9, -0.5, 1e-12, 1e-12, True)
    _row("shoot (log leg)", "r 1e-10 -> 1",
         _time(lambda: _kernels.shoot(*shoot_args), args.repeat),
         _time(lambda: _fallback.shoot(*shoot_args), args.repeat))

    outer_args = (-1.0, 0.9, 0.4, 43.6, 1.0, 1.0, -0.655, 1e-12, 1e-12,
                  False)
    _row("shoot (outer leg)", "r 43.6 -> 1",
         _time(lambda: _kernels.shoot(*outer_args), args.repeat),
         _time(lambda: _fallback.shoot(*outer_args), args.repeat))

    if args.end_to_end:
        argv = [sys.executable, "-m", "diracgap.cli", "spectrum",
                "--nu", "0.9", "--kappa-max", "1", "--k-max", "2",
                "--mesh", f"geometric:rmax=200,n={args.dof},rmin=1e-8",
                "--out", os.devnull]
        times = {}
        for backend, flag in (("compiled", "0"), ("python", "1")):
            env = dict(os.environ, DIRAC_GAP_PURE=flag)
            times[backend] = _time(
                lambda: subprocess.run(argv, env=env, check=True,
                                       capture_output=True), args.repeat)
        _row("spectrum (e2e)", f"n={args.dof}", times["compiled"],
             times["python"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
