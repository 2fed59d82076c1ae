"""Independent ground truth for the exact Coulomb potential.

Gap eigenvalues of one radial sector are located by shooting: integrate

    u' = -(kappa/r) u + (1 + E + nu/r) v
    v' = +(kappa/r) v + (1 - E - nu/r) u

outward from the regular power-series start near the origin (in log-radius,
which tames the 1/r coefficients) and inward from an exponentially decaying
start at large radius, then find the energies where the two solutions are
proportional, i.e. where their Wronskian at r_match vanishes. No matrices
and no variational structure, so its failure modes are disjoint from the
min-max solver it cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _backend
from .model import Sector

R_OUT_CAP = 5000.0
NU_DEGENERATE = 1e-8
BRACKET_TOL = 1e-12


@dataclass(frozen=True)
class ShootingConfig:
    """Knobs for the shooting runs; the defaults suit all shipped checks."""

    r0: float = 1e-10
    r_match: float = 1.0
    r_out: Optional[float] = None  # None: 40/sqrt(1-E^2) per energy, capped
    ode_tol: float = 1e-12
    scan: int = 2000

    def __post_init__(self) -> None:
        if not 0.0 < self.r0 < self.r_match:
            raise ValueError("need 0 < r0 < r_match")
        if self.r_out is not None and self.r_out <= self.r_match:
            raise ValueError("need r_out > r_match")
        if self.ode_tol > 1e-10:
            raise ValueError("ode_tol must be <= 1e-10")
        if self.scan < 2:
            raise ValueError("scan grid needs at least 2 points")


@dataclass(frozen=True)
class OracleLevel:
    """One shooting eigenvalue, bracketed by a Wronskian sign change."""

    sector: Sector
    n_index: int
    energy: float
    wronskian_residual: float


def _outer_radius(energy: float, config: ShootingConfig) -> float:
    if config.r_out is not None:
        return config.r_out
    return min(40.0 / math.sqrt(1.0 - energy * energy), R_OUT_CAP)


def regular_start(sector: Sector, nu: float, energy: float,
                  r0: float) -> Tuple[float, float]:
    """Start vector at r0 on the regular branch, unit max magnitude.

    The indicial system gives (u, v) proportional to (nu, s + kappa) r0^s
    with s = sqrt(kappa^2 - nu^2); at s = 0 this degenerates gracefully to
    the constant branch (nu, kappa). Below |nu| = 1e-8 the direction itself
    degenerates and the free-field series takes over.
    """
    kappa = sector.coupling
    if nu > abs(kappa):
        raise ValueError(
            f"nu={nu} exceeds |kappa|={abs(kappa)}: no power-law branch")
    if r0 * (1.0 + abs(energy)) > 1e-6:
        raise ValueError("r0 too large for the first-order series start")
    if abs(nu) < NU_DEGENERATE:
        ak = abs(kappa)
        if kappa < 0:
            u = r0 ** ak
            v = (1.0 - energy) * r0 ** (ak + 1.0) / (2.0 * ak + 1.0)
        else:
            u = (1.0 + energy) * r0 ** (ak + 1.0) / (2.0 * ak + 1.0)
            v = r0 ** ak
    else:
        s = math.sqrt(kappa * kappa - nu * nu)
        scale = r0 ** s
        u = nu * scale
        v = (s + kappa) * scale
    m = max(abs(u), abs(v))
    return u / m, v / m


def decaying_start(energy: float, r_out: float) -> Tuple[float, float]:
    """Direction of the solution decaying as exp(-sqrt(1-E^2) r), unit max.

    At large r the system freezes to constant coefficients; the decaying
    eigenvector is (1, -sqrt((1-E)/(1+E))) independent of radius, so r_out
    only has to be large enough that the O(1/r) correction is damped out by
    the inward integration (it shrinks like exp(-2 sqrt(1-E^2) (r_out - r))).
    """
    if not -1.0 < energy < 1.0:
        raise ValueError(f"energy {energy} is outside the gap (-1, 1)")
    if r_out <= 0.0:
        raise ValueError("r_out must be positive")
    u = 1.0
    v = -math.sqrt((1.0 - energy) / (1.0 + energy))
    m = max(abs(u), abs(v))
    return u / m, v / m


def wronskian(sector: Sector, nu: float, energy: float,
              config: Optional[ShootingConfig] = None) -> float:
    """W(E) = u_L v_R - v_L u_R at r_match, scaled by the side magnitudes.

    Vanishes exactly at sector eigenvalues. The left leg runs in log-radius
    from r0, the right leg in plain radius down from the decay region.
    """
    cfg = config if config is not None else ShootingConfig()
    kappa = sector.coupling
    tol = cfg.ode_tol
    u0, v0 = regular_start(sector, nu, energy, cfg.r0)
    u_l, v_l, _ = _backend.shoot(kappa, nu, energy, cfg.r0, cfg.r_match,
                                 u0, v0, tol, tol, True)
    r_out = _outer_radius(energy, cfg)
    u1, v1 = decaying_start(energy, r_out)
    u_r, v_r, _ = _backend.shoot(kappa, nu, energy, r_out, cfg.r_match,
                                 u1, v1, tol, tol, False)
    n_l = math.hypot(u_l, v_l)
    n_r = math.hypot(u_r, v_r)
    if n_l == 0.0 or n_r == 0.0:
        raise RuntimeError("shooting leg collapsed to zero")
    return (u_l * v_r - v_l * u_r) / (n_l * n_r)


def _bisect_root(sector: Sector, nu: float, lo: float, w_lo: float,
                 hi: float, config: ShootingConfig) -> Tuple[float, float]:
    while hi - lo > BRACKET_TOL:
        mid = 0.5 * (lo + hi)
        w_mid = wronskian(sector, nu, mid, config)
        if w_mid == 0.0:
            return mid, 0.0
        if (w_mid > 0.0) == (w_lo > 0.0):
            lo, w_lo = mid, w_mid
        else:
            hi = mid
    energy = 0.5 * (lo + hi)
    return energy, abs(wronskian(sector, nu, energy, config))


def oracle_levels(sector: Sector, nu: float,
                  config: Optional[ShootingConfig] = None,
                  count: int = 1) -> Tuple[OracleLevel, ...]:
    """First `count` gap eigenvalues of the sector, ascending.

    Scans W(E) on a uniform grid over the gap, brackets sign changes, and
    bisects each to 1e-12. Returns fewer levels (possibly none) when the
    sector has fewer roots below the scan ceiling; roots closer together
    than the grid spacing can be missed, which is acceptable for the
    well-separated low levels this oracle certifies.
    """
    cfg = config if config is not None else ShootingConfig()
    if nu < 0.0:
        raise ValueError("nu must be nonnegative")
    if nu > abs(sector.coupling):
        raise ValueError("overcritical sector: no regular start available")
    energies = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, cfg.scan)
    found: List[OracleLevel] = []
    w_prev = wronskian(sector, nu, float(energies[0]), cfg)
    for i in range(1, cfg.scan):
        if len(found) >= count:
            break
        w_here = wronskian(sector, nu, float(energies[i]), cfg)
        lo, hi = float(energies[i - 1]), float(energies[i])
        if w_prev == 0.0:
            found.append(OracleLevel(sector, len(found) + 1, lo, 0.0))
        elif w_here != 0.0 and (w_here > 0.0) != (w_prev > 0.0):
            energy, residual = _bisect_root(sector, nu, lo, w_prev, hi, cfg)
            found.append(OracleLevel(sector, len(found) + 1, energy, residual))
        w_prev = w_here
    return tuple(found)


def fine_structure(nu: float, kappa: float, n_r: int) -> float:
    """Closed-form hydrogenic level E = (1 + nu^2/(n_r + s)^2)^(-1/2).

    Fast cross-check only: tests must validate it against oracle_levels
    before leaning on it. n_r = 0 exists only in the kappa < 0 sectors
    (where the shooting oracle finds the nodeless level).
    """
    if nu <= 0.0 or nu >= abs(kappa):
        raise ValueError("need 0 < nu < |kappa|")
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    if n_r == 0 and kappa > 0:
        raise ValueError("no nodeless level in the kappa > 0 sector")
    s = math.sqrt(kappa * kappa - nu * nu)
    return 1.0 / math.sqrt(1.0 + (nu / (n_r + s)) ** 2)


def levels_csv(levels: Sequence[OracleLevel]) -> str:
    """CSV export: kappa, n_index, E, residual."""
    lines = ["kappa,n_index,E,residual"]
    for lvl in levels:
        lines.append(f"{lvl.sector.coupling:.17g},{lvl.n_index},"
                     f"{lvl.energy:.17g},{lvl.wronskian_residual:.3e}")
    return "\n".join(lines) + "\n"
