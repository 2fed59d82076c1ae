"""Run configuration and reporting glue shared by the CLI.

Everything here is deliberately dumb plumbing: parse and validate a
RunConfig before any computation starts, drive the two convergence
studies, and write results as canonical JSON or flat CSV.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .forms import assemble
from .mesh import RadialMesh, TrialBasis, build_mesh
from .model import PotentialSpec, check_admissible, make_sector
from .solver import level_root

COMMANDS = ("spectrum", "oracle", "verify", "converge-eps", "converge-mesh",
            "pollution-demo")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def parse_mesh(text: str) -> RadialMesh:
    """Parse compound mesh syntax, e.g. "algebraic:rmax=200,n=8000,p=6"."""
    head, sep, body = text.partition(":")
    if not sep or not body:
        raise ConfigError(f"mesh: expected kind:key=value,... got {text!r}")
    kwargs: Dict[str, float] = {}
    for item in body.split(","):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"mesh: malformed entry {item!r}")
        try:
            kwargs[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"mesh: non-numeric value in {item!r}") from None
    allowed = {"rmax", "n", "p", "rmin"}
    unknown = set(kwargs) - allowed
    if unknown:
        raise ConfigError(f"mesh: unknown keys {sorted(unknown)}")
    if "rmax" not in kwargs or "n" not in kwargs:
        raise ConfigError("mesh: rmax and n are required")
    try:
        return build_mesh(head.strip(), rmax=kwargs["rmax"],
                          n=int(kwargs["n"]), p=kwargs.get("p"),
                          rmin=kwargs.get("rmin"))
    except ValueError as err:
        raise ConfigError(f"mesh: {err}") from None


@dataclass(frozen=True)
class RunConfig:
    """Fully validated parameters for one CLI invocation."""

    command: str
    spec: PotentialSpec
    mesh: Optional[RadialMesh] = None
    coupling_max: Optional[float] = None
    k_max: int = 1
    tol: float = 1e-10
    order: int = 6
    out: Optional[str] = None
    seed: int = 0
    threads: Optional[int] = None
    kappa: Optional[float] = None
    count: int = 3
    dof: int = 200
    threshold: float = 0.05
    eps_ladder: Tuple[float, ...] = ()
    mesh_ladder: Tuple[RadialMesh, ...] = ()
    hardy_trials: int = 1000
    identity_trials: int = 20

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if self.tol <= 0.0:
            raise ConfigError("tol: must be positive")
        if self.k_max < 1:
            raise ConfigError("k_max: must be >= 1")
        if self.order < 4:
            raise ConfigError("order: quadrature order must be >= 4")
        verdict = check_admissible(self.spec)
        if not verdict:
            raise ConfigError("spec: " + "; ".join(verdict.violations))
        if self.command in ("spectrum", "converge-eps") and self.mesh is None:
            raise ConfigError(f"mesh: required for {self.command}")
        if self.command == "converge-eps" and len(self.eps_ladder) < 1:
            raise ConfigError("eps_ladder: at least one eps value required")
        if self.command == "converge-mesh" and len(self.mesh_ladder) < 3:
            raise ConfigError("mesh_ladder: need a ladder of >= 3 meshes")
        if self.kappa is not None:
            try:
                make_sector(self.spec.dim, self.kappa)
            except ValueError as err:
                raise ConfigError(f"kappa: {err}") from None

    def default_kappa(self) -> float:
        if self.kappa is not None:
            return self.kappa
        return -self.spec.dim.nu_crit  # ground sector under this convention

    def to_dict(self) -> dict:
        out: Dict[str, object] = {
            "command": self.command,
            "spec": self.spec.to_dict(),
            "k_max": self.k_max,
            "tol": self.tol,
            "order": self.order,
            "seed": self.seed,
            "count": self.count,
            "dof": self.dof,
            "threshold": self.threshold,
            "hardy_trials": self.hardy_trials,
            "identity_trials": self.identity_trials,
        }
        if self.mesh is not None:
            out["mesh"] = self.mesh.to_dict()
        if self.coupling_max is not None:
            out["coupling_max"] = self.coupling_max
        if self.out is not None:
            out["out"] = self.out
        if self.threads is not None:
            out["threads"] = self.threads
        if self.kappa is not None:
            out["kappa"] = self.kappa
        if self.eps_ladder:
            out["eps_ladder"] = ["inf" if math.isinf(e) else e
                                 for e in self.eps_ladder]
        if self.mesh_ladder:
            out["mesh_ladder"] = [m.to_dict() for m in self.mesh_ladder]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            spec = PotentialSpec.from_dict(data["spec"])
        except KeyError:
            raise ConfigError("spec: missing from config") from None
        except (TypeError, ValueError) as err:
            raise ConfigError(f"spec: {err}") from None
        mesh = None
        if "mesh" in data:
            mesh = RadialMesh.from_dict(data["mesh"])
        ladder = tuple(RadialMesh.from_dict(m)
                       for m in data.get("mesh_ladder", ()))
        eps = tuple(float(e) for e in data.get("eps_ladder", ()))
        return cls(
            command=data.get("command", ""),
            spec=spec,
            mesh=mesh,
            coupling_max=data.get("coupling_max"),
            k_max=int(data.get("k_max", 1)),
            tol=float(data.get("tol", 1e-10)),
            order=int(data.get("order", 6)),
            out=data.get("out"),
            seed=int(data.get("seed", 0)),
            threads=data.get("threads"),
            kappa=data.get("kappa"),
            count=int(data.get("count", 3)),
            dof=int(data.get("dof", 200)),
            threshold=float(data.get("threshold", 0.05)),
            eps_ladder=eps,
            mesh_ladder=ladder,
            hardy_trials=int(data.get("hardy_trials", 1000)),
            identity_trials=int(data.get("identity_trials", 20)),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MeshTable:
    """Levels along a mesh refinement ladder, one column per k.

    The one-sided approximation property makes every column non-increasing
    down the ladder; `extrapolated` is an Aitken delta-squared limit from
    the last three rows, informational only.
    """

    kappa: float
    dofs: Tuple[int, ...]
    levels: Tuple[Tuple[float, ...], ...]  # levels[row][k-1]
    extrapolated: Tuple[float, ...]

    def to_csv(self) -> str:
        lines = ["dof,k,lambda,decrement"]
        for k in range(len(self.levels[0])):
            prev = None
            for dof, row in zip(self.dofs, self.levels):
                dec = "" if prev is None else f"{prev - row[k]:.3e}"
                lines.append(f"{dof},{k + 1},{row[k]:.17g},{dec}")
                prev = row[k]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "dofs": list(self.dofs),
            "levels": [list(row) for row in self.levels],
            "extrapolated": list(self.extrapolated),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def converge_mesh(spec: PotentialSpec, meshes: Sequence[RadialMesh],
                  kappa: float, k_max: int = 1,
                  tol: float = 1e-10, order: int = 6) -> MeshTable:
    """Solve one sector on each mesh of a refinement ladder."""
    if len(meshes) < 3:
        raise ConfigError("mesh_ladder: need a ladder of >= 3 meshes")
    sector = make_sector(spec.dim, kappa)
    rows: List[Tuple[float, ...]] = []
    for mesh in meshes:
        forms = assemble(TrialBasis(mesh=mesh), sector, spec, order=order)
        row = []
        for k in range(1, k_max + 1):
            lvl = level_root(forms, sector, k, tol=tol)
            row.append(forms.gap.upper if lvl is None else lvl.energy)
        rows.append(tuple(row))
    extrapolated = []
    for k in range(k_max):
        l1, l2, l3 = (rows[-3][k], rows[-2][k], rows[-1][k])
        denom = (l1 - l2) - (l2 - l3)
        if denom == 0.0:
            extrapolated.append(l3)
        else:
            extrapolated.append(l3 - (l2 - l3) ** 2 / denom)
    return MeshTable(
        kappa=kappa,
        dofs=tuple(m.dof for m in meshes),
        levels=tuple(rows),
        extrapolated=tuple(extrapolated),
    )


def write_output(text: str, out: Optional[str]) -> None:
    """Write to stdout for None/"json"/"csv", otherwise to the given path."""
    if out is None or out in ("json", "csv"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def wants_csv(out: Optional[str]) -> bool:
    if out is None:
        return False
    return out == "csv" or out.endswith(".csv")
