"""Per-sector assembly of the reduced quadratic form and its energy derivative.

After eliminating the lower spinor, the form in the sector with coupling
kappa reads, for a trial u vanishing at the origin,

    q_E(u) = int |u' + (kappa/r) u|^2 / (1 + E - V) dr
           + int (1 + V - E) |u|^2 dr.

With hat functions this produces symmetric tridiagonal matrices

    Q(E)  = A1(E) + M + P - E M,      Q'(E) = -A2(E) - M,

where M, P are the mass and potential matrices and A1/A2 carry the
energy-dependent kinetic weight 1/(1+E-V) resp. its square. M and P are
assembled once; A1(E)/A2(E) are produced on demand from cached quadrature
values in a single pass over elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import _backend
from .mesh import TrialBasis
from .model import GapWindow, PotentialSpec, Sector, evaluate_potential, gap_window

__all__ = [
    "AssemblyError",
    "QuadratureCache",
    "AssembledForms",
    "build_quadrature",
    "assemble",
    "form_value",
    "tridiag_dense",
]

DEFAULT_QUAD_ORDER = 6


class AssemblyError(RuntimeError):
    """The assembled form would be invalid (weight non-positive in the window)."""


@dataclass(frozen=True)
class QuadratureCache:
    """Gauss-Legendre data per element, shape (n_elements, order).

    asc/desc are the two hat functions alive on each element (rising toward
    the right node, falling from the left node); their derivatives are the
    constants +-1/h. V and 1/x are cached so repeated A1/A2 assemblies only
    recompute the scalar energy weight.
    """

    order: int
    x: np.ndarray
    w: np.ndarray
    vx: np.ndarray
    inv_x: np.ndarray
    asc: np.ndarray
    desc: np.ndarray
    inv_h: np.ndarray


def build_quadrature(basis: TrialBasis, spec: PotentialSpec,
                     order: int = DEFAULT_QUAD_ORDER) -> QuadratureCache:
    if order < 4:
        raise ValueError("quadrature order must be >= 4")
    nodes = basis.mesh.nodes
    left = nodes[:-1][:, None]
    h = np.diff(nodes)[:, None]
    t, wt = np.polynomial.legendre.leggauss(order)
    x = left + 0.5 * h * (t[None, :] + 1.0)
    w = 0.5 * h * wt[None, :] * np.ones_like(x)
    asc = (x - left) / h
    return QuadratureCache(
        order=order,
        x=x,
        w=w,
        vx=np.asarray(evaluate_potential(spec, x)),
        inv_x=1.0 / x,
        asc=asc,
        desc=1.0 - asc,
        inv_h=1.0 / h,
    )


@dataclass(frozen=True)
class AssembledForms:
    """Matrix builder for one (spec, sector, basis) triple.

    Tridiagonal matrices are stored as (diag, off) pairs. All produced
    matrices share the dof ordering of the interior mesh nodes. Construction
    is pure and instances are immutable, so concurrent sector solves can
    call A1/A2/Q freely.
    """

    basis: TrialBasis
    sector: Sector
    spec: PotentialSpec
    gap: GapWindow
    order: int
    m_diag: np.ndarray
    m_off: np.ndarray
    p_diag: np.ndarray
    p_off: np.ndarray
    _vq: np.ndarray = field(repr=False)
    _waa: np.ndarray = field(repr=False)
    _wdd: np.ndarray = field(repr=False)
    _wad: np.ndarray = field(repr=False)

    @property
    def dof(self) -> int:
        return self.basis.dof

    def a1(self, energy: float) -> Tuple[np.ndarray, np.ndarray]:
        """A1(E)_ij = int d_i d_j / (1 + E - V) dr."""
        return _backend.weighted_tridiag(self._vq, self._waa, self._wdd,
                                         self._wad, energy, 1)

    def a2(self, energy: float) -> Tuple[np.ndarray, np.ndarray]:
        """A2(E)_ij = int d_i d_j / (1 + E - V)^2 dr."""
        return _backend.weighted_tridiag(self._vq, self._waa, self._wdd,
                                         self._wad, energy, 2)

    def q(self, energy: float) -> Tuple[np.ndarray, np.ndarray]:
        """Q(E) = A1(E) + M + P - E M."""
        diag, off = self.a1(energy)
        c = 1.0 - energy
        diag += c * self.m_diag + self.p_diag
        off += c * self.m_off + self.p_off
        return diag, off

    def q_prime(self, energy: float) -> Tuple[np.ndarray, np.ndarray]:
        """Q'(E) = -A2(E) - M, negative definite throughout the window."""
        diag, off = self.a2(energy)
        np.negative(diag, out=diag)
        np.negative(off, out=off)
        diag -= self.m_diag
        off -= self.m_off
        return diag, off


def _scatter_tridiag(s_aa: np.ndarray, s_dd: np.ndarray,
                     s_ad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map per-element (asc,asc), (desc,desc), (asc,desc) sums to (diag, off).

    Element k spans [r_k, r_{k+1}]; its ascending hat belongs to dof k and
    its descending hat to dof k-1. Slices drop the boundary functions at the
    origin and at r_max.
    """
    ndof = len(s_aa) - 1
    diag = s_aa[:ndof] + s_dd[1:]
    off = s_ad[1:ndof]
    return diag, off


def assemble(basis: TrialBasis, sector: Sector, spec: PotentialSpec,
             order: int = DEFAULT_QUAD_ORDER) -> AssembledForms:
    """Assemble mass/potential matrices and the A1/A2 quadrature caches."""
    if sector.dim is not spec.dim:
        raise ValueError("sector and potential spec disagree on dimension")
    cache = build_quadrature(basis, spec, order)
    gap = gap_window(spec)
    wmin = 1.0 + gap.lower - cache.vx
    if np.min(wmin) <= 0.0:
        raise AssemblyError(
            "kinetic weight 1 + E - V is not positive at the window edge; "
            "potential spec is not admissible on this mesh"
        )

    w, asc, desc = cache.w, cache.asc, cache.desc
    m_diag, m_off = _scatter_tridiag(
        (w * asc * asc).sum(axis=1),
        (w * desc * desc).sum(axis=1),
        (w * asc * desc).sum(axis=1),
    )
    wv = w * cache.vx
    p_diag, p_off = _scatter_tridiag(
        (wv * asc * asc).sum(axis=1),
        (wv * desc * desc).sum(axis=1),
        (wv * asc * desc).sum(axis=1),
    )

    kappa = sector.coupling
    d_asc = cache.inv_h + kappa * asc * cache.inv_x
    d_desc = -cache.inv_h + kappa * desc * cache.inv_x
    forms = AssembledForms(
        basis=basis,
        sector=sector,
        spec=spec,
        gap=gap,
        order=order,
        m_diag=m_diag,
        m_off=m_off,
        p_diag=p_diag,
        p_off=p_off,
        _vq=np.ascontiguousarray(cache.vx),
        _waa=np.ascontiguousarray(w * d_asc * d_asc),
        _wdd=np.ascontiguousarray(w * d_desc * d_desc),
        _wad=np.ascontiguousarray(w * d_asc * d_desc),
    )
    return forms


def form_value(forms: AssembledForms, energy: float, u: np.ndarray) -> float:
    """q_E(u) = u^T Q(E) u for a coefficient vector u."""
    u = np.asarray(u, dtype=float)
    if u.shape != (forms.dof,):
        raise ValueError(f"expected coefficient vector of length {forms.dof}")
    diag, off = forms.q(energy)
    return float(np.dot(diag * u, u) + 2.0 * np.dot(off * u[:-1], u[1:]))


def tridiag_dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Dense copy of a symmetric tridiagonal (diag, off) pair, for small dof."""
    dense = np.diag(np.asarray(diag, dtype=float))
    n = len(diag)
    if n > 1:
        idx = np.arange(n - 1)
        dense[idx, idx + 1] = off
        dense[idx + 1, idx] = off
    return dense
