"""Simulated annealing that tries to thin out coverings of the cell.

The chain minimizes a grid proxy of the localized density (mean coverage
multiplicity over cells meeting the cell P): deletions and quantized
perturbations are proposed, moves that break the grid covering margin
are rejected outright, and the rest are accepted by the Metropolis rule.
Proposals are quantized to multiples of 1/64 so accepted states promote
to small exact rationals; the best state's density is recomputed on the
exact track at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .bodies import (
    LatticeBasis,
    TranslateSet,
    covering_lattice_nine_eighths,
    lattice_points_near,
    parallelohedron_p,
    verify_lattice_covering_exact,
)
from .covering import CoverageGrid, NotACovering, density
from .polytope import Polytope3
from .ratmath import Rat, rat, rat_str, vec3

#: proposal offsets are multiples of this grain
MOVE_GRAIN = Rat(1, 64)


class InitialNotCovering(Exception):
    pass


@dataclass
class SearchParams:
    initial: object = "lattice"  # "lattice" or a TranslateSet
    iterations: int = 10_000
    step_init: float = 0.5
    step_decay: float = 0.9997
    temp_init: float = 0.02
    temp_decay: float = 0.9995
    grid_step: "Rat" = Rat(1, 8)
    seed: int = 0
    delete_prob: float = 0.2

    def __post_init__(self):
        self.grid_step = rat(self.grid_step)
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        for name in ("step_init", "temp_init"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("step_decay", "temp_decay"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0,1)")


@dataclass
class TraceRecord:
    iteration: int
    theta_proxy: float
    accepted: bool
    move: str


@dataclass
class SearchTrace:
    params: SearchParams
    records: List[TraceRecord]
    best_translates: TranslateSet
    best_theta: "Rat"  # exact, recomputed for the best state
    best_proxy: float
    final_count: int

    def csv_lines(self) -> List[str]:
        lines = ["iteration,theta_float,accepted,move"]
        for r in self.records:
            lines.append(
                f"{r.iteration},{r.theta_proxy!r},{int(r.accepted)},{r.move}"
            )
        return lines


def lattice_start(grid_step: "Rat") -> TranslateSet:
    """A certifiable covering start: the 9/8 lattice shrunk to clear the margin.

    The tight lattice covers with zero slack, so grid certification at
    step h needs the lattice scaled by at most 1 - 3h/2; 3/4 (for the
    default h = 1/8) keeps a comfortable margin and stays on the 1/64
    grain.
    """
    scale = min(Rat(3, 4), 1 - 3 * rat(grid_step) / 2)
    basis = covering_lattice_nine_eighths().scaled(scale)
    return lattice_points_near(basis, parallelohedron_p(), margin=2)


def minimize_density(params: SearchParams) -> SearchTrace:
    cell = parallelohedron_p()
    if isinstance(params.initial, str) and params.initial == "lattice":
        pts = list(lattice_start(params.grid_step))
    else:
        pts = [vec3(x) for x in params.initial]

    grid = CoverageGrid(cell, params.grid_step)
    # translates whose stamp misses every region cell cannot help the
    # grid covering; dropping them up front can only lower the density
    pts = [x for x in pts if grid.stamp_size(x) > 0]
    for x in pts:
        grid.add(x)
    if grid.uncovered() > 0:
        raise InitialNotCovering(
            f"{grid.uncovered()} grid cells uncovered by the initial state"
        )

    rng = np.random.default_rng(params.seed)
    records: List[TraceRecord] = []
    alive = list(range(len(pts)))
    best_state = [tuple(x) for x in pts]
    best_proxy = grid.mean_multiplicity()
    step = params.step_init
    temp = params.temp_init

    def drop_alive(pos: int) -> None:
        alive[pos] = alive[-1]
        alive.pop()

    for it in range(params.iterations):
        accepted = False
        if rng.random() < params.delete_prob and len(alive) > 1:
            pos = int(rng.integers(len(alive)))
            k = alive[pos]
            move = f"delete[{k}]"
            x = pts[k]
            grid.remove(x)
            if grid.uncovered() > 0:
                grid.add(x)  # broke the covering
            else:
                # deletions only lower the proxy; always accept
                pts[k] = None
                drop_alive(pos)
                accepted = True
        else:
            pos = int(rng.integers(len(alive)))
            k = alive[pos]
            raw = rng.normal(scale=step, size=3)
            grains = [int(round(c * 64)) for c in raw]
            if not any(grains):
                grains[int(rng.integers(3))] = 1 if rng.random() < 0.5 else -1
            move = f"perturb[{k}]({grains[0]}/64,{grains[1]}/64,{grains[2]}/64)"
            old_x = pts[k]
            new_x = tuple(
                old_x[c] + Rat(grains[c], 64) for c in range(3)
            )
            before = grid.total_multiplicity()
            grid.remove(old_x)
            grid.add(new_x)
            if grid.uncovered() > 0:
                grid.remove(new_x)
                grid.add(old_x)
            else:
                delta = grid.total_multiplicity() - before
                if delta <= 0 or rng.random() < math.exp(
                    -delta / (grid.n_kept * max(temp, 1e-12))
                ):
                    pts[k] = new_x
                    if grid.stamp_size(new_x) == 0:
                        # drifted clear of the cell: prune outright
                        grid.remove(new_x)
                        pts[k] = None
                        drop_alive(pos)
                    accepted = True
                else:
                    grid.remove(new_x)
                    grid.add(old_x)

        cur = grid.mean_multiplicity()
        if accepted and cur < best_proxy:
            best_proxy = cur
            best_state = [tuple(x) for x in pts if x is not None]
        records.append(TraceRecord(it, cur, accepted, move))
        step *= params.step_decay
        temp *= params.temp_decay

    best_set = TranslateSet(best_state)
    best_theta = density(best_set, cell)
    return SearchTrace(
        params=params,
        records=records,
        best_translates=best_set,
        best_theta=best_theta,
        best_proxy=best_proxy,
        final_count=len(alive),
    )


@dataclass
class LatticeDensityReport:
    intrinsic: "Rat"  # vol(C3) / |det|
    region_theta: Optional["Rat"]

    def to_json_obj(self) -> dict:
        out = {
            "intrinsic": {
                "rational": rat_str(self.intrinsic),
                "float": float(self.intrinsic),
            }
        }
        out["region_theta"] = (
            None
            if self.region_theta is None
            else {
                "rational": rat_str(self.region_theta),
                "float": float(self.region_theta),
            }
        )
        return out


def lattice_density(
    basis: LatticeBasis, region: Optional[Polytope3] = None
) -> LatticeDensityReport:
    """Intrinsic lattice covering density vol(C3)/|det|, plus a region check.

    The covering precondition is proved exactly (the lattice's Voronoi
    cell must fit inside the octahedron), not by grid sampling.
    """
    if not verify_lattice_covering_exact(basis):
        raise NotACovering(
            "lattice Voronoi cell is not contained in the octahedron"
        )
    intrinsic = Rat(32, 3) / abs(basis.determinant)
    region_theta = None
    if region is not None:
        pts = lattice_points_near(basis, region, margin=2)
        region_theta = density(pts, region)
    return LatticeDensityReport(intrinsic=intrinsic, region_theta=region_theta)
