"""Horizontal cross-sections of translated octahedra.

A slice at height z0 of the octahedron at (x, y, z) is the L1 disk
{|u-x|+|v-y| <= t} with t = 2 - |z0 - z|; it exists for z0 in [z-2, z+2]
and its side length is t*sqrt(2).  To keep the rational track exact all
thresholds are phrased in t (side-length window [sqrt2/27, 53*sqrt2/27]
becomes t in [1/27, 53/27]) and side lengths are exposed squared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .bodies import TranslateSet
from .ratmath import Rat, rat, vec3

#: t-scale thresholds for the good-height side window
T_MIN = Rat(1, 27)
T_MAX = Rat(53, 27)


class HeightMismatch(Exception):
    pass


class NoFeasibleHeight(Exception):
    pass


@dataclass(frozen=True)
class SliceSquare:
    """One horizontal cross-section square.

    ``t`` is the L1 radius; the square's Euclidean side length is
    t*sqrt(2) (exposed via :meth:`side_length_sq`).  ``delta`` is +1 at or
    below the source's equator (slice grows with z0) and -1 above.
    """

    center_xy: Tuple["Rat", "Rat"]
    t: "Rat"
    z0: "Rat"
    source: int
    delta: int

    def side_length_sq(self):
        return 2 * self.t * self.t

    @property
    def center_uv(self) -> Tuple["Rat", "Rat"]:
        """Center in the rotated frame u = x+y, v = x-y."""
        x, y = self.center_xy
        return (x + y, x - y)

    def in_side_window(self) -> bool:
        return T_MIN <= self.t <= T_MAX

    def area(self):
        return 2 * self.t * self.t


@dataclass(frozen=True)
class HeightWindow:
    lo: "Rat"
    hi: "Rat"

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("window with lo > hi")

    def length(self):
        return self.hi - self.lo


def slice_at(translate: Sequence, z0, source: int = 0) -> Optional[SliceSquare]:
    """Slice of the octahedron at `translate` by the plane z = z0.

    Returns None outside [z-2, z+2]; a degenerate t=0 slice (the apex
    point) at the closed endpoints.
    """
    x, y, z = vec3(translate)
    h = rat(z0)
    t = 2 - abs(h - z)
    if t < 0:
        return None
    delta = 1 if h <= z else -1
    return SliceSquare((x, y), t, h, source, delta)


def bad_height_set(translate: Sequence) -> List[HeightWindow]:
    """Heights where the slice exists but its side falls out of the window.

    These are |z0 - z| <= 1/27 (side too long) and |z0 - z| >= 2 - 1/27
    (side too short), three windows of total length exactly 4/27.
    """
    _, _, z = vec3(translate)
    eps = Rat(1, 27)
    return [
        HeightWindow(z - 2, z - 2 + eps),
        HeightWindow(z - eps, z + eps),
        HeightWindow(z + 2 - eps, z + 2),
    ]


def _subtract_windows(
    lo, hi, windows: List[HeightWindow]
) -> List[Tuple["Rat", "Rat"]]:
    """Open interval (lo, hi) minus closed windows, as maximal pieces."""
    pieces = [(lo, hi)]
    for w in windows:
        nxt = []
        for a, b in pieces:
            if w.hi <= a or w.lo >= b:
                nxt.append((a, b))
                continue
            if w.lo > a:
                nxt.append((a, w.lo))
            if w.hi < b:
                nxt.append((w.hi, b))
        pieces = nxt
        if not pieces:
            break
    return pieces


def find_good_height(neighbors: TranslateSet, tol=Rat(1, 10**12)):
    """A height at which every existing slice is inside the side window.

    `neighbors` lists the anchor last.  Scans the open anchor window minus
    every translate's bad set and returns the midpoint of the lowest
    maximal feasible interval (deterministic).  Raises
    :class:`NoFeasibleHeight` when the feasible set has length below tol.
    """
    if len(neighbors) == 0:
        raise ValueError("empty neighbor set")
    anchor = neighbors[len(neighbors) - 1]
    z_a = anchor[2]
    bad: List[HeightWindow] = []
    for x in neighbors:
        bad.extend(bad_height_set(x))
    pieces = _subtract_windows(z_a - 2, z_a + 2, bad)
    pieces = [(a, b) for a, b in pieces if b - a > rat(tol)]
    if not pieces:
        raise NoFeasibleHeight(
            f"no feasible height in ({z_a - 2}, {z_a + 2}) for "
            f"{len(neighbors)} translates"
        )
    a, b = pieces[0]
    return (a + b) / 2


def delta_product(a: SliceSquare, b: SliceSquare) -> int:
    if a.z0 != b.z0:
        raise HeightMismatch(f"slices at different heights {a.z0} vs {b.z0}")
    return a.delta * b.delta
