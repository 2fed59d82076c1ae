"""Numerical certification of the inequalities behind the solver.

Four independent checks, each cheap and deterministic given a seed:

* hardy_check: the weighted Hardy inequality that makes the reduced form
  bounded below, evaluated on random compactly supported trials.
* sos_identity_check: the exact sum-of-squares rewriting of the Coulomb
  form at the critical coupling, radial channels in 3d and 2d.
* qshift_identity_check: the algebraic identity relating the form at
  spectral parameter lambda to the one at 0.
* truncation_convergence: monotonicity of the lowest level under
  truncation of the Coulomb singularity.

plus pollution_demo, the deliberately naive equal-basis two-spinor
Galerkin discretization that exhibits spurious gap eigenvalues, run next
to the min-max solver on the same mesh for contrast.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .forms import assemble, build_quadrature, tridiag_dense
from .mesh import RadialMesh, TrialBasis, build_mesh
from .model import (
    PotentialSpec,
    Sector,
    SpaceDim,
    gap_window,
    make_sector,
)
from .shooting import OracleLevel, oracle_levels
from .solver import level_root, spectrum

DISCREPANCY_TOL = 1e-10
HARDY_FLOOR = -1e-10


@dataclass(frozen=True)
class TrialFamily:
    """Seeded family of smooth bumps u(r) = r^2 (r-a)^2 (b-r)^2 p(r).

    Each trial lives on its own random support [a, b] away from the origin;
    the squared endpoint factors make u and u' vanish there, so composite
    quadrature over [a, b] sees a smooth integrand with no edge kinks.
    """

    seed: int = 0
    size: int = 20
    degree: int = 4
    support_lo: Tuple[float, float] = (0.05, 0.9)
    support_width: Tuple[float, float] = (0.5, 7.0)


class _Bump:
    def __init__(self, a: float, b: float, coeffs: np.ndarray) -> None:
        self.a = a
        self.b = b
        self.coeffs = coeffs

    def __call__(self, r: np.ndarray) -> np.ndarray:
        xi = (2.0 * r - self.a - self.b) / (self.b - self.a)
        w = r * r * (r - self.a) ** 2 * (self.b - r) ** 2
        return w * np.polynomial.polynomial.polyval(xi, self.coeffs)

    def deriv(self, r: np.ndarray) -> np.ndarray:
        a, b = self.a, self.b
        xi = (2.0 * r - a - b) / (b - a)
        p = np.polynomial.polynomial.polyval(xi, self.coeffs)
        dp = np.polynomial.polynomial.polyval(
            xi, np.polynomial.polynomial.polyder(self.coeffs))
        w = r * r * (r - a) ** 2 * (b - r) ** 2
        dw = (2.0 * r * (r - a) ** 2 * (b - r) ** 2
              + 2.0 * r * r * (r - a) * (b - r) ** 2
              - 2.0 * r * r * (r - a) ** 2 * (b - r))
        return dw * p + w * dp * 2.0 / (b - a)


def _trials(family: TrialFamily) -> List[_Bump]:
    rng = np.random.default_rng(family.seed)
    out = []
    for _ in range(family.size):
        a = rng.uniform(*family.support_lo)
        b = a + rng.uniform(*family.support_width)
        coeffs = rng.uniform(-1.0, 1.0, family.degree + 1)
        out.append(_Bump(a, b, coeffs))
    return out


def _panel_rule(a: float, b: float, panels: int,
                order: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def hardy_check(a: float, trials: TrialFamily, sector: Sector,
                panels: int = 192, order: int = 12) -> float:
    """Minimum of the normalized Hardy functional over the trial family.

    Sector reduction of the weighted inequality: with c the critical
    coupling of the dimension (1 in 3d, 1/2 in 2d) and |kappa| = c,

        integral (u' + kappa u/r)^2 / (a + c/r) dr
          + integral (a - c/r) u^2 dr  >=  0,

    normalized per trial by integral (a + c/r) u^2 dr. Anything at or
    above -1e-10 counts as a pass for the caller.
    """
    if a <= 0.0:
        raise ValueError("a must be positive")
    c = sector.dim.nu_crit
    if abs(sector.coupling) != c:
        raise ValueError(
            f"Hardy reduction needs |coupling| = {c} in {sector.dim.value}")
    kappa = sector.coupling
    worst = np.inf
    for bump in _trials(trials):
        r, w = _panel_rule(bump.a, bump.b, panels, order)
        u = bump(r)
        d = bump.deriv(r) + kappa * u / r
        weight = a + c / r
        value = float(np.dot(w, d * d / weight)
                      + np.dot(w, (a - c / r) * u * u))
        scale = float(np.dot(w, weight * u * u))
        worst = min(worst, 0.0 if scale == 0.0 else value / scale)
    return worst


def _coulomb_form_3d(r: np.ndarray, w: np.ndarray, phi: np.ndarray,
                     g: np.ndarray, lam: float) -> float:
    # g is the channel gradient: phi' for the radial channel, phi' + 2phi/r
    # for the companion channel.
    kin = r ** 3 / (1.0 + (1.0 + lam) * r)
    pot = (1.0 - lam - 1.0 / r) * r * r
    return 4.0 * math.pi * float(np.dot(w, kin * g * g + pot * phi * phi))


def _coulomb_form_2d(r: np.ndarray, w: np.ndarray, phi: np.ndarray,
                     g: np.ndarray, lam: float) -> float:
    kin = 2.0 * r * r / (1.0 + 2.0 * (1.0 + lam) * r)
    pot = (1.0 - lam - 0.5 / r) * r
    return 2.0 * math.pi * float(np.dot(w, kin * g * g + pot * phi * phi))


def sos_identity_check(trials: TrialFamily,
                       dim: SpaceDim = SpaceDim.ThreeD,
                       channel: int = 0, panels: int = 192,
                       order: int = 12) -> float:
    """Max relative discrepancy between the Coulomb form and its square.

    channel 0 is the radial function channel, channel 1 its image under
    the angular unitary; the completed square differs only in one sign.
    Both sides are evaluated with the same composite Gauss rule, so the
    discrepancy measures the exactness of the identity, not quadrature.
    """
    if channel not in (0, 1):
        raise ValueError("channel must be 0 or 1")
    sign = 1.0 if channel == 0 else -1.0
    worst = 0.0
    for bump in _trials(trials):
        r, w = _panel_rule(bump.a, bump.b, panels, order)
        phi = bump(r)
        dphi = bump.deriv(r)
        if dim is SpaceDim.ThreeD:
            g = dphi if channel == 0 else dphi + 2.0 * phi / r
            lhs = _coulomb_form_3d(r, w, phi, g, 0.0)
            sq = r * dphi + phi + sign * r * phi
            rhs = 4.0 * math.pi * float(np.dot(w, r / (1.0 + r) * sq * sq))
        else:
            g = dphi if channel == 0 else dphi + phi / r
            lhs = _coulomb_form_2d(r, w, phi, g, 0.0)
            sq = r * dphi + 0.5 * phi + sign * r * phi
            rhs = 4.0 * math.pi * float(
                np.dot(w, sq * sq / (1.0 + 2.0 * r)))
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0))
    return worst


def qshift_identity_check(trials: TrialFamily,
                          lambdas: Sequence[float] = (-0.9, -0.5, 0.0,
                                                      0.5, 0.9),
                          panels: int = 192, order: int = 12) -> float:
    """Max relative discrepancy of the lambda-shift identity (3d).

    The Coulomb form at parameter lambda equals the one at 0 minus
    lambda times a positive gradient correction and lambda times the mass,
    an algebraic rearrangement of the kinetic weight. Checked on both
    radial channels over the given lambda grid.
    """
    for lam in lambdas:
        if not -1.0 < lam < 1.0:
            raise ValueError("lambda grid must lie in (-1, 1)")
    worst = 0.0
    for bump in _trials(trials):
        r, w = _panel_rule(bump.a, bump.b, panels, order)
        phi = bump(r)
        dphi = bump.deriv(r)
        for channel in (0, 1):
            g = dphi if channel == 0 else dphi + 2.0 * phi / r
            q0 = _coulomb_form_3d(r, w, phi, g, 0.0)
            mass = 4.0 * math.pi * float(np.dot(w, phi * phi * r * r))
            for lam in lambdas:
                qlam = _coulomb_form_3d(r, w, phi, g, lam)
                grad = 4.0 * math.pi * float(np.dot(
                    w, r ** 4 * g * g
                    / ((1.0 + r) * (1.0 + (1.0 + lam) * r))))
                pred = q0 - lam * grad - lam * mass
                worst = max(worst, abs(qlam - pred)
                            / (abs(qlam) + abs(q0) + 1.0))
    return worst


@dataclass(frozen=True)
class TruncationTable:
    """Lowest level along a ladder of truncated potentials.

    A missing level (sector empty below the upper gap edge) is reported at
    the edge itself, which keeps the monotonicity statement meaningful.
    """

    nu: float
    eps: Tuple[float, ...]
    levels: Tuple[float, ...]
    base_level: float
    monotone: bool
    bounded_below: bool
    final_gap: float

    def to_csv(self) -> str:
        lines = ["eps,lambda1,gap_to_base"]
        for e, lvl in zip(self.eps, self.levels):
            eps_txt = "inf" if math.isinf(e) else f"{e:.17g}"
            lines.append(f"{eps_txt},{lvl:.17g},{lvl - self.base_level:.3e}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "eps": ["inf" if math.isinf(e) else e for e in self.eps],
            "levels": list(self.levels),
            "base_level": self.base_level,
            "monotone": self.monotone,
            "bounded_below": self.bounded_below,
            "final_gap": self.final_gap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _lowest_level(spec: PotentialSpec, mesh: RadialMesh, coupling_max: float,
                  tol: float, order: int) -> float:
    report = spectrum(spec, mesh, coupling_max=coupling_max, k_max=1,
                      tol=tol, order=order)
    if report.levels:
        return report.levels[0].energy
    return report.gap.upper


def truncation_convergence(spec: PotentialSpec, eps_ladder: Sequence[float],
                           mesh: RadialMesh, coupling_max: float = 1.0,
                           tol: float = 1e-10,
                           order: int = 6) -> TruncationTable:
    """Lowest level for each truncation depth, checked for monotonicity.

    The ladder must be decreasing; since every truncated potential
    dominates the next one pointwise, the level column is non-increasing
    and bounded below by the untruncated level, exactly, not just in the
    limit. eps = inf is a sentinel meaning "no truncation".
    """
    if spec.kind != "coulomb":
        raise ValueError("the truncation ladder starts from a pure Coulomb"
                         " spec")
    ladder = [float(e) for e in eps_ladder]
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    levels = []
    for eps in ladder:
        if math.isinf(eps):
            spec_eps = spec
        else:
            spec_eps = PotentialSpec(dim=spec.dim, kind="truncated",
                                     nu=spec.nu, eps=eps)
        levels.append(_lowest_level(spec_eps, mesh, coupling_max, tol, order))
    base = _lowest_level(spec, mesh, coupling_max, tol, order)
    slack = 4.0 * tol
    monotone = all(b <= a + slack for a, b in zip(levels, levels[1:]))
    bounded = all(lvl >= base - slack for lvl in levels)
    return TruncationTable(
        nu=spec.nu,
        eps=tuple(ladder),
        levels=tuple(levels),
        base_level=base,
        monotone=monotone,
        bounded_below=bounded,
        final_gap=levels[-1] - base,
    )


@dataclass(frozen=True)
class PollutionReport:
    """Naive two-spinor Galerkin levels next to min-max levels, equal dof."""

    sector: Sector
    naive_levels: Tuple[float, ...]
    oracle: Tuple[OracleLevel, ...]
    spurious: Tuple[float, ...]
    minmax_levels: Tuple[float, ...]
    threshold: float
    naive_mesh: RadialMesh
    minmax_mesh: RadialMesh

    def to_dict(self) -> dict:
        return {
            "sector": {"kappa": self.sector.coupling},
            "threshold": self.threshold,
            "naive_levels": list(self.naive_levels),
            "oracle_levels": [lvl.energy for lvl in self.oracle],
            "spurious": list(self.spurious),
            "minmax_levels": list(self.minmax_levels),
            "naive_mesh": self.naive_mesh.to_dict(),
            "minmax_mesh": self.minmax_mesh.to_dict(),
        }


def pollution_demo(sector: Sector, nu: float, dof: int = 200,
                   threshold: float = 0.05,
                   mesh: Optional[RadialMesh] = None,
                   naive_mesh: Optional[RadialMesh] = None, k_max: int = 3,
                   oracle_count: int = 6, tol: float = 1e-10,
                   order: int = 6) -> PollutionReport:
    """Exhibit spectral pollution of the equal-basis discretization.

    The full two-spinor radial operator is projected on hat functions with
    the SAME basis for both components, which violates the kinetic-balance
    relation between them and salts the gap with spurious eigenvalues. The
    dense symmetric pencil is solved outright (hence dof <= 400) and the
    gap eigenvalues farther than `threshold` from every shooting level are
    flagged. Min-max levels with the same number of dof are listed for
    contrast.

    Each method gets its own default mesh: the baseline runs on the
    uniform grid a naive setup would use (where its defect is plainly
    visible), the min-max solve on the graded mesh it needs for the
    Coulomb singularity. Pass `naive_mesh` / `mesh` to override either.
    """
    if dof > 400:
        raise ValueError("dense baseline is capped at dof = 400")
    if nu > abs(sector.coupling):
        raise ValueError("overcritical sector")
    spec = PotentialSpec(dim=sector.dim, kind="coulomb", nu=nu)
    if mesh is None:
        mesh = build_mesh("algebraic", rmax=30.0, n=dof + 1, p=6.0)
    if naive_mesh is None:
        naive_mesh = build_mesh("algebraic", rmax=200.0, n=dof + 1, p=1.0)
    basis = TrialBasis(mesh=mesh)
    naive_basis = TrialBasis(mesh=naive_mesh)
    for b in (basis, naive_basis):
        if b.dof != dof:
            raise ValueError(f"mesh has {b.dof} dof, expected {dof}")

    forms = assemble(basis, sector, spec, order=order)
    naive_forms = assemble(naive_basis, sector, spec, order=order)
    m_dense = tridiag_dense(naive_forms.m_diag, naive_forms.m_off)
    p_dense = tridiag_dense(naive_forms.p_diag, naive_forms.p_off)

    cache = build_quadrature(naive_basis, spec, order)
    kappa = sector.coupling
    d_asc = cache.inv_h + kappa * cache.asc * cache.inv_x
    d_desc = -cache.inv_h + kappa * cache.desc * cache.inv_x
    w = cache.w
    c_aa = (w * cache.asc * d_asc).sum(axis=1)
    c_dd = (w * cache.desc * d_desc).sum(axis=1)
    c_ad = (w * cache.asc * d_desc).sum(axis=1)  # row: asc, col: desc
    c_da = (w * cache.desc * d_asc).sum(axis=1)  # row: desc, col: asc
    c_dense = np.zeros((dof, dof))
    idx = np.arange(dof)
    c_dense[idx, idx] = c_aa[:dof] + c_dd[1:]
    if dof > 1:
        c_dense[idx[1:], idx[:-1]] = c_ad[1:dof]
        c_dense[idx[:-1], idx[1:]] = c_da[1:dof]

    h_dense = np.block([[m_dense + p_dense, c_dense.T],
                        [c_dense, -m_dense + p_dense]])
    mass = np.zeros((2 * dof, 2 * dof))
    mass[:dof, :dof] = m_dense
    mass[dof:, dof:] = m_dense
    evals = scipy.linalg.eigh(h_dense, mass, eigvals_only=True)

    gap = gap_window(spec)
    naive = tuple(float(e) for e in evals
                  if gap.lower < e < gap.upper)
    oracle = oracle_levels(sector, nu, count=oracle_count)
    spurious = tuple(
        e for e in naive
        if all(abs(e - lvl.energy) > threshold for lvl in oracle))
    minmax: List[float] = []
    for k in range(1, k_max + 1):
        lvl = level_root(forms, sector, k, tol=tol)
        if lvl is None:
            break
        minmax.append(lvl.energy)
    return PollutionReport(
        sector=sector,
        naive_levels=naive,
        oracle=oracle,
        spurious=spurious,
        minmax_levels=tuple(minmax),
        threshold=threshold,
        naive_mesh=naive_mesh,
        minmax_mesh=mesh,
    )


@dataclass(frozen=True)
class CheckOutcome:
    passed: bool
    worst: float
    config: dict


@dataclass(frozen=True)
class SuiteReport:
    checks: Dict[str, CheckOutcome]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        return {name: {"pass": c.passed, "worst": c.worst,
                       "config": c.config}
                for name, c in self.checks.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [f"{'check':<24}{'status':<8}worst value"]
        for name, c in self.checks.items():
            status = "pass" if c.passed else "FAIL"
            rows.append(f"{name:<24}{status:<8}{c.worst:.3e}")
        return "\n".join(rows)


def suite(seed: int = 0, hardy_trials: int = 1000,
          identity_trials: int = 20) -> SuiteReport:
    """Run every check at its shipped configuration.

    Deterministic given the seed; the whole run stays well under a minute.
    """
    checks: Dict[str, CheckOutcome] = {}

    worst_hardy = np.inf
    hardy_fam = TrialFamily(seed=seed, size=hardy_trials)
    for dim in (SpaceDim.ThreeD, SpaceDim.TwoD):
        c = dim.nu_crit
        for sgn in (-1.0, 1.0):
            sector = make_sector(dim, sgn * c)
            for a in (0.1, 1.0, 10.0):
                worst_hardy = min(worst_hardy,
                                  hardy_check(a, hardy_fam, sector))
    checks["hardy"] = CheckOutcome(
        passed=bool(worst_hardy >= HARDY_FLOOR),
        worst=float(worst_hardy),
        config={"seed": seed, "trials": hardy_trials,
                "a": [0.1, 1.0, 10.0]},
    )

    fam = TrialFamily(seed=seed + 1, size=identity_trials)
    worst_sos = 0.0
    for dim in (SpaceDim.ThreeD, SpaceDim.TwoD):
        for channel in (0, 1):
            worst_sos = max(worst_sos,
                            sos_identity_check(fam, dim, channel))
    checks["sum_of_squares"] = CheckOutcome(
        passed=bool(worst_sos <= DISCREPANCY_TOL),
        worst=float(worst_sos),
        config={"seed": seed + 1, "trials": identity_trials,
                "dims": ["3d", "2d"], "channels": [0, 1]},
    )

    worst_shift = qshift_identity_check(fam)
    checks["lambda_shift"] = CheckOutcome(
        passed=bool(worst_shift <= DISCREPANCY_TOL),
        worst=float(worst_shift),
        config={"seed": seed + 1, "trials": identity_trials,
                "lambdas": [-0.9, -0.5, 0.0, 0.5, 0.9]},
    )

    trunc_spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9)
    trunc_mesh = build_mesh("geometric", rmax=80.0, n=2000, rmin=1e-8)
    table = truncation_convergence(trunc_spec, (1.0, 0.1, 0.01, 0.001),
                                   trunc_mesh)
    checks["truncation"] = CheckOutcome(
        passed=bool(table.monotone and table.bounded_below),
        worst=float(table.final_gap),
        config={"nu": 0.9, "eps": [1.0, 0.1, 0.01, 0.001],
                "mesh": trunc_mesh.to_dict()},
    )

    sector = make_sector(SpaceDim.ThreeD, -1)
    report = pollution_demo(sector, nu=0.9, dof=200)
    worst_match = 0.0
    for e in report.minmax_levels:
        worst_match = max(worst_match,
                          min(abs(e - lvl.energy) for lvl in report.oracle))
    checks["pollution"] = CheckOutcome(
        passed=bool(report.spurious) and worst_match <= 1e-4,
        worst=float(worst_match),
        config={"nu": 0.9, "kappa": -1, "dof": 200,
                "spurious_found": len(report.spurious)},
    )

    return SuiteReport(checks=checks)
