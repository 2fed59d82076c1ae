"""Gap eigenvalues as roots of the k-th pencil eigenvalue of (Q(E), M).

For fixed k the map E -> mu_k(E) is strictly decreasing on the gap window
(Q'(E) is negative definite), so each level is the unique root of
mu_k(E) = 0. Sign tests use Sylvester inertia: mu_k(E) < 0 exactly when
Q(E) has at least k negative eigenvalues, an O(n) count on tridiagonal
matrices. Bisection localizes the root, Newton steps with the first-order
derivative mu_k'(E) = x_k^T Q'(E) x_k close it out, and the emitted level
carries a sign-bracketing certificate.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg.lapack import dgttrf, dgttrs

from . import _backend
from .forms import AssembledForms, assemble
from .mesh import RadialMesh, TrialBasis
from .model import (
    GapWindow,
    PotentialSpec,
    Sector,
    check_admissible,
    enumerate_sectors,
    evaluate_potential,
    gap_window,
)

NEWTON_GATE = 1e-4
DEFAULT_TOL = 1e-10
EDGE_MARGIN = 1e-9


class SolverError(RuntimeError):
    """Root search failed in a way that points at inconsistent inputs."""


class BracketError(SolverError):
    """The k-th level lies below the search window."""


class ConvergenceError(SolverError):
    """Eigenvector iteration stalled above the residual target."""


def inertia_negcount(diag: np.ndarray, off: Optional[np.ndarray] = None) -> int:
    """Number of eigenvalues < 0 of the symmetric tridiagonal (diag, off).

    Zero pivots in the LDL^T sweep are perturbed by +-1e-14*||T||_inf,
    keeping their sign, so the count is well defined on singular input.
    """
    diag = np.ascontiguousarray(diag, dtype=float)
    if off is None:
        off = np.zeros(max(len(diag) - 1, 0))
    off = np.ascontiguousarray(off, dtype=float)
    count, _ = _backend.negcount(diag, off)
    return int(count)


def _tri_mv(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = diag * x
    if len(x) > 1:
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
    return y


def pencil_eig_k(forms: AssembledForms, energy: float,
                 k: int) -> Tuple[float, np.ndarray]:
    """k-th smallest eigenvalue of Q(E) x = mu M x and its eigenvector.

    Bisection on inertia counts of Q - mu*M localizes mu_k inside a
    Gershgorin bound, inverse iteration recovers x, and the returned mu is
    the Rayleigh quotient of x. Guarantees x^T M x = 1 and a residual
    ||Qx - mu Mx|| <= 1e-10 ||Q|| ||x||; raises ConvergenceError otherwise.
    """
    qd, qo = forms.q(energy)
    md, mo = forms.m_diag, forms.m_off
    n = len(qd)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if n == 1:
        mu = float(qd[0] / md[0])
        return mu, np.array([1.0 / np.sqrt(md[0])])

    qrow = np.abs(qd).copy()
    qrow[:-1] += np.abs(qo)
    qrow[1:] += np.abs(qo)
    qnorm = float(qrow.max())
    mrow = md.copy()
    mrow[:-1] -= np.abs(mo)
    mrow[1:] -= np.abs(mo)
    mlow = float(mrow.min())
    if mlow <= 0.0:
        raise SolverError("mass matrix lost diagonal dominance")
    bound = qnorm / mlow + 1.0

    # The Gershgorin bound is astronomically wide on graded meshes (row
    # scales of Q and M differ by many orders), so the iteration count must
    # come from the width target, not a fixed budget: halving from the
    # largest finite bound down to relative machine width takes ~1100 steps.
    lo, hi = -bound, bound
    for _ in range(1200):
        mid = 0.5 * (lo + hi)
        c, _ = _backend.negcount(qd - mid * md, qo - mid * mo)
        if c >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 2.3e-16 * max(1.0, abs(mid)):
            break
    mu = 0.5 * (lo + hi)

    rng = np.random.default_rng(12345 + 7 * k)
    x = rng.standard_normal(n)
    shift = mu
    residual = np.inf
    for attempt in range(6):
        t_off = qo - shift * mo
        t_diag = qd - shift * md
        dl_f, d_f, du_f, du2, ipiv, info = dgttrf(t_off, t_diag, t_off)
        if info == 0:
            break
        # Exactly singular factorization: nudge the shift off the eigenvalue
        # by a few ulps. Anything scaled to the Gershgorin bound would land
        # on a different eigenvalue entirely.
        shift += 1e-13 * max(1.0, abs(shift)) * (attempt + 1)
    else:
        raise ConvergenceError("could not factor Q - mu*M near the shift")

    for _ in range(40):
        rhs = _tri_mv(md, mo, x)
        y, info = dgttrs(dl_f, d_f, du_f, du2, ipiv, rhs)
        if info != 0:
            raise ConvergenceError(f"tridiagonal solve failed (info={info})")
        ynorm = np.sqrt(float(y @ _tri_mv(md, mo, y)))
        if not np.isfinite(ynorm) or ynorm == 0.0:
            x = rng.standard_normal(n)
            continue
        x = y / ynorm
        mu_x = float(x @ _tri_mv(qd, qo, x))
        res = _tri_mv(qd, qo, x) - mu_x * _tri_mv(md, mo, x)
        residual = float(np.linalg.norm(res))
        if residual <= 1e-10 * qnorm * float(np.linalg.norm(x)):
            imax = int(np.argmax(np.abs(x)))
            if x[imax] < 0.0:
                x = -x
            return mu_x, x
    raise ConvergenceError(
        f"inverse iteration stalled, last residual {residual:.3e}")


@dataclass(frozen=True)
class MinMaxLevel:
    """One converged gap level of a single angular sector."""

    sector: Sector
    k_in_sector: int
    energy: float
    bracket_width: float
    residual: float
    u: np.ndarray = field(repr=False, compare=False)
    v: np.ndarray = field(repr=False, compare=False)
    shared_bracket: bool = False

    def to_dict(self) -> dict:
        kappa = self.sector.coupling
        return {
            "sector": {
                "kappa": int(kappa) if float(kappa).is_integer() else kappa,
                "degeneracy": self.sector.degeneracy,
            },
            "k": self.k_in_sector,
            "E": self.energy,
            "bracket": self.bracket_width,
            "residual": self.residual,
            "shared_bracket": self.shared_bracket,
        }


def recover_lower(u: np.ndarray, forms: AssembledForms,
                  sector: Optional[Sector] = None,
                  energy: float = 0.0) -> np.ndarray:
    """Lower radial component v = (u' + kappa*u/r) / (1 + E - V) on nodes.

    u' at a node is the mean of the adjacent element slopes (one-sided at
    the ends). At r = 0 the Coulomb denominator diverges and v(0) = 0; for
    potentials bounded at the origin the limit u/r -> u'(0) is used.
    """
    if sector is None:
        sector = forms.sector
    elif sector != forms.sector:
        raise ValueError("sector does not match the assembled forms")
    nodes = forms.basis.mesh.nodes
    kappa = sector.coupling
    full = np.zeros(len(nodes))
    full[1:-1] = np.asarray(u, dtype=float)
    slopes = np.diff(full) / np.diff(nodes)
    du = np.empty(len(nodes))
    du[0] = slopes[0]
    du[-1] = slopes[-1]
    du[1:-1] = 0.5 * (slopes[:-1] + slopes[1:])

    v = np.zeros(len(nodes))
    vr = evaluate_potential(forms.spec, nodes[1:])
    v[1:] = (du[1:] + kappa * full[1:] / nodes[1:]) / (1.0 + energy - vr)
    v0_den = 1.0 + energy - float(evaluate_potential(forms.spec, 1e-300))
    if np.isfinite(v0_den) and v0_den != 0.0:
        v[0] = du[0] * (1.0 + kappa) / v0_den
    return v


def level_root(forms: AssembledForms, sector: Optional[Sector] = None,
               k: int = 1, window: Optional[GapWindow] = None,
               tol: float = DEFAULT_TOL) -> Optional[MinMaxLevel]:
    """Solve mu_k(E) = 0 on the gap window for one sector.

    Returns None when the k-th level sits at or above the upper window edge
    (no bound state to report). Raises BracketError when it sits below the
    lower edge, and SolverError on a non-monotone inertia sequence, which
    can only come from a broken assembly.
    """
    if sector is None:
        sector = forms.sector
    elif sector != forms.sector:
        raise ValueError("sector does not match the assembled forms")
    if window is None:
        window = forms.gap
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if not 1 <= k <= forms.dof:
        raise ValueError(f"need 1 <= k <= {forms.dof}, got k={k}")

    def count(e: float) -> int:
        qd, qo = forms.q(e)
        c, _ = _backend.negcount(qd, qo)
        return c

    lo = window.lower + EDGE_MARGIN
    hi = window.upper - max(tol, EDGE_MARGIN)
    if hi <= lo:
        raise ValueError("window is narrower than the edge margins")
    c_hi = count(hi)
    if c_hi < k:
        return None
    c_lo = count(lo)
    if c_lo >= k:
        raise BracketError(
            f"mu_{k} already negative at the lower window edge "
            f"(count={c_lo}); inputs are outside the admissible regime")

    while hi - lo > max(NEWTON_GATE, tol):
        mid = 0.5 * (lo + hi)
        c = count(mid)
        if not c_lo <= c <= c_hi:
            raise SolverError(
                f"non-monotone inertia sequence at E={mid} "
                f"({c_lo} -> {c} -> {c_hi}); assembly is inconsistent")
        if c >= k:
            hi, c_hi = mid, c
        else:
            lo, c_lo = mid, c

    # Newton phase: mu_k'(E) = x^T Q'(E) x < 0 once x is M-normalized. The
    # bracket itself only ever moves on inertia counts; the Rayleigh
    # quotient steers the proposal but its sign is not trusted (its
    # absolute error scales with ||Q||, the count does not).
    energy = 0.5 * (lo + hi)
    for _ in range(60):
        if hi - lo <= tol:
            break
        mu, x = pencil_eig_k(forms, energy, k)
        qpd, qpo = forms.q_prime(energy)
        dmu = float(x @ _tri_mv(qpd, qpo, x))
        if dmu >= 0.0:
            raise SolverError("level derivative lost negativity")
        if count(energy) >= k:
            hi = min(hi, energy)
        else:
            lo = max(lo, energy)
        proposal = energy - mu / dmu
        if not lo < proposal < hi or proposal == energy:
            proposal = 0.5 * (lo + hi)
        if abs(proposal - energy) <= 0.125 * tol:
            half = 0.5 * tol
            if count(proposal - half) < k <= count(proposal + half):
                lo, hi = proposal - half, proposal + half
                break
        energy = proposal
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) >= k:
            hi = mid
        else:
            lo = mid

    energy = 0.5 * (lo + hi)
    width = hi - lo
    # Certificate: mu_k(E - w) > 0 > mu_k(E + w). Widen from below if the
    # root was hit too exactly for the final bracket to separate signs.
    width = max(width, 64.0 * 2.3e-16 * max(1.0, abs(energy)))
    for _ in range(60):
        c_minus = count(energy - width)
        c_plus = count(energy + width)
        if c_minus < k <= c_plus:
            break
        width *= 2.0
        if width > max(tol, 2.0 * (hi - lo)):
            raise SolverError("sign-bracketing certificate failed")
    shared = (c_plus - c_minus) >= 2

    mu, x = pencil_eig_k(forms, energy, k)
    v = recover_lower(x, forms, sector, energy)
    return MinMaxLevel(
        sector=sector,
        k_in_sector=k,
        energy=energy,
        bracket_width=width,
        residual=abs(mu),
        u=x,
        v=v,
        shared_bracket=shared,
    )


@dataclass(frozen=True)
class SpectrumReport:
    """All gap levels found below the upper window edge, sorted by energy."""

    spec: PotentialSpec
    gap: GapWindow
    mesh: RadialMesh
    levels: Tuple[MinMaxLevel, ...]
    walltime_s: float
    coupling_max: float
    k_max: int

    @property
    def expanded_levels(self) -> Tuple[MinMaxLevel, ...]:
        """Levels repeated according to their sector degeneracy."""
        out: List[MinMaxLevel] = []
        for lvl in self.levels:
            out.extend([lvl] * lvl.sector.degeneracy)
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "gap": [self.gap.lower, self.gap.upper],
            "levels": [lvl.to_dict() for lvl in self.levels],
            "mesh": self.mesh.to_dict(),
            "walltime_s": self.walltime_s,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["E,kappa,k,copy,degeneracy,bracket,residual"]
        for lvl in self.levels:
            kappa = lvl.sector.coupling
            deg = lvl.sector.degeneracy
            for copy in range(1, deg + 1):
                lines.append(
                    f"{lvl.energy:.17g},{kappa:.17g},{lvl.k_in_sector},"
                    f"{copy},{deg},{lvl.bracket_width:.3e},"
                    f"{lvl.residual:.3e}")
        return "\n".join(lines) + "\n"


def _thread_count(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get("DIRAC_GAP_THREADS", "1"))
    return max(1, threads)


def _sector_levels(spec: PotentialSpec, basis: TrialBasis, sector: Sector,
                   k_max: int, tol: float, order: int) -> List[MinMaxLevel]:
    forms = assemble(basis, sector, spec, order=order)
    found: List[MinMaxLevel] = []
    for k in range(1, min(k_max, forms.dof) + 1):
        try:
            lvl = level_root(forms, sector, k, tol=tol)
        except SolverError as err:
            raise SolverError(
                f"sector coupling={sector.coupling}, k={k}: {err}") from err
        if lvl is None:
            break  # mu_{k'} >= mu_k for k' > k, so nothing further below b
        found.append(lvl)
    return found


def spectrum(spec: PotentialSpec, mesh: RadialMesh, coupling_max: float = 1.0,
             k_max: int = 1, tol: float = DEFAULT_TOL, order: int = 6,
             threads: Optional[int] = None) -> SpectrumReport:
    """Collect levels over all sectors with |coupling| <= coupling_max.

    Sector solves are independent; with threads > 1 (or DIRAC_GAP_THREADS)
    they run on a thread pool. The report is deterministic either way,
    except for walltime_s.
    """
    verdict = check_admissible(spec)
    if not verdict:
        raise ValueError("; ".join(verdict.violations))
    started = time.perf_counter()
    basis = TrialBasis(mesh=mesh)
    sectors = enumerate_sectors(spec.dim, coupling_max)
    nthreads = _thread_count(threads)
    if nthreads > 1 and len(sectors) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            chunks = list(pool.map(
                lambda s: _sector_levels(spec, basis, s, k_max, tol, order),
                sectors))
    else:
        chunks = [_sector_levels(spec, basis, s, k_max, tol, order)
                  for s in sectors]
    levels = [lvl for chunk in chunks for lvl in chunk]
    levels.sort(key=lambda lvl: (lvl.energy, abs(lvl.sector.coupling),
                                 lvl.sector.coupling, lvl.k_in_sector))
    return SpectrumReport(
        spec=spec,
        gap=gap_window(spec),
        mesh=mesh,
        levels=tuple(levels),
        walltime_s=time.perf_counter() - started,
        coupling_max=coupling_max,
        k_max=k_max,
    )
