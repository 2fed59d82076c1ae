"""Potentials, angular sectors, and the spectral gap window.

Everything downstream (form assembly, the min-max solver, the shooting
oracle) consumes the radial reduction data defined here: a potential V(r),
a sector coupling kappa, and the energy window (a, b) inside the gap.

Units: hbar = c = m = 1, so the free gap is (-1, 1) and radii are measured
in Compton lengths.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

__all__ = [
    "SpaceDim",
    "PotentialSpec",
    "Sector",
    "GapWindow",
    "Admissibility",
    "evaluate_potential",
    "sup_potential",
    "check_admissible",
    "gap_window",
    "enumerate_sectors",
    "sector_degeneracy",
    "indicial_exponent",
]

POTENTIAL_KINDS = ("coulomb", "truncated", "scaled", "coulomb_step")


class SpaceDim(enum.Enum):
    """Spatial dimension of the Dirac operator (the radial machinery is shared)."""

    ThreeD = "3d"
    TwoD = "2d"

    @property
    def nu_crit(self) -> float:
        return 1.0 if self is SpaceDim.ThreeD else 0.5

    @classmethod
    def parse(cls, text: Union[str, "SpaceDim"]) -> "SpaceDim":
        if isinstance(text, SpaceDim):
            return text
        for dim in cls:
            if text in (dim.value, dim.value[0], dim.name):
                return dim
        raise ValueError(f"unknown dimension {text!r}, expected '3d' or '2d'")


@dataclass(frozen=True)
class PotentialSpec:
    """A radial potential V(r).

    kind:
      coulomb       V(r) = -nu/r
      truncated     V(r) = max(-nu/r, -1/eps)
      scaled        V(r) = -(1 - eps) nu/r
      coulomb_step  V(r) = -nu/r + height for r < radius, -nu/r otherwise

    The coupling convention is V = -nu/r in both dimensions, with critical
    coupling nu_crit = 1 (3d) and 1/2 (2d).
    """

    dim: SpaceDim
    kind: str
    nu: float
    eps: Optional[float] = None
    height: Optional[float] = None
    radius: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not self.nu > 0.0:
            raise ValueError("coupling nu must be positive")
        if self.kind == "truncated":
            if self.eps is None or self.eps <= 0.0:
                raise ValueError("truncated potential needs eps > 0")
        elif self.kind == "scaled":
            if self.eps is None or not 0.0 < self.eps < 1.0:
                raise ValueError("scaled potential needs eps in (0, 1)")
        elif self.kind == "coulomb_step":
            if self.height is None or self.radius is None or self.radius <= 0.0:
                raise ValueError("coulomb_step needs height and radius > 0")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        out = {"dim": self.dim.value, "kind": self.kind, "nu": self.nu}
        for name in ("eps", "height", "radius"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        return cls(
            dim=SpaceDim.parse(data["dim"]),
            kind=data["kind"],
            nu=float(data["nu"]),
            eps=float(data["eps"]) if data.get("eps") is not None else None,
            height=float(data["height"]) if data.get("height") is not None else None,
            radius=float(data["radius"]) if data.get("radius") is not None else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        return cls.from_dict(json.loads(text))


def evaluate_potential(spec: PotentialSpec, r):
    """Evaluate V(r) for r > 0. Accepts scalars or arrays."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("potential is evaluated at r > 0 only")
    coulomb = -spec.nu / r
    if spec.kind == "coulomb":
        out = coulomb
    elif spec.kind == "truncated":
        out = np.maximum(coulomb, -1.0 / spec.eps)
    elif spec.kind == "scaled":
        out = (1.0 - spec.eps) * coulomb
    else:  # coulomb_step
        out = coulomb + np.where(r < spec.radius, spec.height, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def sup_potential(spec: PotentialSpec) -> float:
    """Supremum of V over r > 0 (attained in the r -> inf limit for pure tails)."""
    if spec.kind == "coulomb_step":
        # On r < radius the branch -nu/r + height increases toward the jump;
        # beyond the jump the Coulomb tail increases toward 0.
        return max(spec.height - spec.nu / spec.radius, 0.0)
    # coulomb, truncated, scaled are all negative and tend to 0 at infinity.
    return 0.0


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    violations: tuple

    def __bool__(self) -> bool:
        return self.ok


def check_admissible(spec: PotentialSpec) -> Admissibility:
    """Check the two conditions every solver entry point relies on.

    1. V(r) >= -nu/r pointwise with nu at most the critical coupling of the
       dimension (all shipped kinds dominate their Coulomb tail by
       construction, so this reduces to the coupling bound).
    2. sup V < 1 + sqrt(1 - nu^2) in 3d, resp. 1 + sqrt(1 - 4 nu^2) in 2d,
       which keeps the window below the upper essential spectrum.
    """
    violations = []
    nu_crit = spec.dim.nu_crit
    if spec.nu > nu_crit:
        violations.append(
            f"nu = {spec.nu} exceeds critical coupling {nu_crit} for {spec.dim.value}"
        )
    else:
        sup_v = sup_potential(spec)
        ratio = spec.nu / nu_crit
        bound = 1.0 + math.sqrt(max(1.0 - ratio * ratio, 0.0))
        if not sup_v < bound:
            violations.append(
                f"sup V = {sup_v} not below upper admissibility bound {bound}"
            )
    if spec.kind == "coulomb_step" and spec.height < 0.0:
        violations.append(
            f"step height {spec.height} < 0 breaks the Coulomb lower bound V >= -nu/r"
        )
    return Admissibility(ok=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class GapWindow:
    """Energy window (lower, upper) searched for eigenvalues."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"empty gap window [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def gap_window(spec: PotentialSpec) -> GapWindow:
    """Window lower = max(sup V - 1, -1), upper = 1."""
    return GapWindow(lower=max(sup_potential(spec) - 1.0, -1.0), upper=1.0)


@dataclass(frozen=True)
class Sector:
    """One angular momentum channel of the radial reduction.

    coupling is the kappa entering d/dr + kappa/r: a nonzero integer in 3d,
    a half-odd-integer in 2d (the polar reduction of the 2d operator with
    the L2(r dr) -> L2(dr) substitution u = sqrt(r) f lands on the same
    radial system with kappa_eff = -(l + 1/2), l integer).
    """

    dim: SpaceDim
    coupling: float
    degeneracy: int

    def __post_init__(self) -> None:
        kappa = self.coupling
        if self.dim is SpaceDim.ThreeD:
            if kappa == 0 or kappa != int(kappa):
                raise ValueError("3d sector coupling must be a nonzero integer")
        else:
            if (kappa - 0.5) != int(kappa - 0.5):
                raise ValueError("2d sector coupling must be half-odd-integer")

    @property
    def kappa(self) -> float:
        return self.coupling


def sector_degeneracy(dim: SpaceDim, coupling: float) -> int:
    if dim is SpaceDim.ThreeD:
        return int(2 * abs(coupling))
    return 1


def make_sector(dim: SpaceDim, coupling: float) -> Sector:
    return Sector(dim=dim, coupling=coupling, degeneracy=sector_degeneracy(dim, coupling))


def enumerate_sectors(dim: SpaceDim, coupling_max: float) -> tuple:
    """All sectors with |coupling| <= coupling_max, sorted by |coupling| then sign.

    3d: coupling_max >= 1, couplings are +-1, +-2, ...
    2d: coupling_max >= 1/2, couplings are +-1/2, +-3/2, ...
    """
    dim = SpaceDim.parse(dim)
    if dim is SpaceDim.ThreeD:
        if coupling_max < 1:
            raise ValueError("3d needs coupling_max >= 1 (kappa = 0 does not occur)")
        magnitudes: Iterable[float] = range(1, int(math.floor(coupling_max)) + 1)
    else:
        if coupling_max < 0.5:
            raise ValueError("2d needs coupling_max >= 1/2")
        count = int(math.floor(coupling_max + 0.5))
        magnitudes = (m + 0.5 for m in range(count))
    sectors = []
    for mag in magnitudes:
        for sign in (-1.0, 1.0):
            sectors.append(make_sector(dim, sign * mag))
    return tuple(sectors)


def indicial_exponent(sector: Sector, nu: float) -> float:
    """Power-law exponent s = sqrt(coupling^2 - nu^2) of the regular solution at 0."""
    kappa = abs(sector.coupling)
    if nu > kappa:
        raise ValueError(
            f"nu = {nu} > |coupling| = {kappa}: complex exponent, overcritical sector"
        )
    return math.sqrt(kappa * kappa - nu * nu)
