"""Slice-square overlap classification and closed-form volume bounds.

All square geometry runs in the rotated frame u = x+y, v = x-y, where an
L1 slice of radius t is the axis-aligned square of half-side t and xy
areas pick up a factor 1/2.  Distances between parallel square sides are
kept in "t-scale" (the Euclidean distance divided by sqrt 2, i.e. half
the u/v gap), which makes every closed-form bound rational:

  config I   (4/3) (b + 2 - t_max)^3
  config II  (4/3) (2 - t_s + e)^2 (2 - t_s + t_p)
  config III (4/3) (g + 2 - t_out + t_in)^3   [same growth sign]
             (4/3) (g + t_in)^3               [opposite growth sign]

For axis-aligned squares a corner of one is covered per-axis, so the
covered-vertex count is always 0, 1, 2 or 4: the three-corner picture
collapses into full containment (config III).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

from .ratmath import Rat, vec3
from .slices import HeightMismatch, SliceSquare

FOUR_THIRDS = Rat(4, 3)
#: the proof's per-pair floor, 4/3^10
PAIR_FLOOR = Rat(4, 3**10)


class NotOverlapping(Exception):
    pass


def _uv_intervals(s: SliceSquare):
    cu, cv = s.center_uv
    return (cu - s.t, cu + s.t), (cv - s.t, cv + s.t)


def slice_intersection_area(a: SliceSquare, b: SliceSquare):
    """Exact xy-area of the overlap of two slices at the same height."""
    if a.z0 != b.z0:
        raise HeightMismatch(f"slices at heights {a.z0} vs {b.z0}")
    (au, av), (bu, bv) = _uv_intervals(a), _uv_intervals(b)
    ou = min(au[1], bu[1]) - max(au[0], bu[0])
    ov = min(av[1], bv[1]) - max(av[0], bv[0])
    if ou <= 0 or ov <= 0:
        return Rat(0)
    return ou * ov / 2


@dataclass
class OverlapConfig:
    """How one slice square meets the anchor slice square.

    ``distances`` are t-scale side distances with the conventional
    orderings (I: b <= a; II: c <= d; III: g <= h <= r <= s) obtained by
    relabeling; ``relabeled`` records whether relabeling swapped the
    paper's nominal side assignment.
    """

    kind: str  # "I", "II", "III", "Disjoint"
    covered_vertices: int
    distances: Dict[str, "Rat"] = field(default_factory=dict)
    relabeled: bool = False
    # internals used by the bound evaluation
    spanner_t: Optional["Rat"] = None
    spanned_t: Optional["Rat"] = None
    anchor_engulfed: bool = False


def classify(anchor: SliceSquare, other: SliceSquare) -> OverlapConfig:
    """Classify by the number of anchor-square vertices the other covers."""
    if anchor.z0 != other.z0:
        raise HeightMismatch(f"slices at heights {anchor.z0} vs {other.z0}")
    (au, av), (ou_i, ov_i) = _uv_intervals(anchor), _uv_intervals(other)
    ou = min(au[1], ou_i[1]) - max(au[0], ou_i[0])
    ov = min(av[1], ov_i[1]) - max(av[0], ov_i[0])
    if ou <= 0 or ov <= 0:
        return OverlapConfig("Disjoint", 0)

    cov_u = sum(1 for e in au if ou_i[0] <= e <= ou_i[1])
    cov_v = sum(1 for e in av if ov_i[0] <= e <= ov_i[1])
    covered = cov_u * cov_v

    if covered == 1:
        a_t = max(ou, ov) / 2
        b_t = min(ou, ov) / 2
        return OverlapConfig(
            "I", 1, {"a": a_t, "b": b_t}, relabeled=(ou < ov)
        )

    if covered == 4:
        margins = [
            au[0] - ou_i[0],
            ou_i[1] - au[1],
            av[0] - ov_i[0],
            ov_i[1] - av[1],
        ]
        g, h, r, s = sorted(m / 2 for m in margins)
        return OverlapConfig(
            "III",
            4,
            {"g": g, "h": h, "r": r, "s": s},
            relabeled=margins[0] / 2 != g,
            anchor_engulfed=True,
        )

    # covered in {0, 2}: one square spans the other along some axis
    span = _find_spanning(au, av, ou_i, ov_i, anchor.t, other.t, ou, ov)
    spanner_t, spanned_t, e_uv, over_lo, over_hi = span
    c, d = sorted((abs(over_lo) / 2, abs(over_hi) / 2))
    return OverlapConfig(
        "II",
        covered,
        {"c": c, "d": d, "e": e_uv / 2},
        relabeled=(abs(over_lo) / 2 != c),
        spanner_t=spanner_t,
        spanned_t=spanned_t,
    )


def _find_spanning(au, av, ou_i, ov_i, t_a, t_o, ou, ov):
    """Locate the axis along which one square spans the other.

    Returns (spanner half-side, spanned half-side, penetration extent in
    uv, spanner overhang low, spanner overhang high).  For every
    positive-area overlap covering 0 or 2 corners such an axis exists.
    """
    candidates = []
    if ou_i[0] <= au[0] and au[1] <= ou_i[1]:  # other spans anchor in u
        candidates.append((t_o, t_a, ov, au[0] - ou_i[0], ou_i[1] - au[1]))
    if ov_i[0] <= av[0] and av[1] <= ov_i[1]:  # other spans anchor in v
        candidates.append((t_o, t_a, ou, av[0] - ov_i[0], ov_i[1] - av[1]))
    if au[0] <= ou_i[0] and ou_i[1] <= au[1]:  # anchor spans other in u
        candidates.append((t_a, t_o, ov, ou_i[0] - au[0], au[1] - ou_i[1]))
    if av[0] <= ov_i[0] and ov_i[1] <= av[1]:  # anchor spans other in v
        candidates.append((t_a, t_o, ou, ov_i[0] - av[0], av[1] - ov_i[1]))
    if not candidates:
        raise NotOverlapping("no spanning axis for a 0/2-corner overlap")
    # prefer the larger spanner (ties broken by listing order)
    return max(candidates, key=lambda c: c[0])


@dataclass
class PairBound:
    value: "Rat"
    certificate: str  # DirectSameSign | DirectOppositeIII | ThirdSquareNeeded
    kind: str
    in_window: bool


def config_lower_bound(anchor: SliceSquare, other: SliceSquare) -> PairBound:
    """Closed-form lower bound on the two translates' intersection volume.

    Same growth sign: the kind-matched closed form.  Opposite sign and
    config III: the engulfment form.  Opposite sign, configs I/II: no
    direct number exists; the third-square argument applies (certificate
    ``ThirdSquareNeeded``, value 0).
    """
    cfg = classify(anchor, other)
    if cfg.kind == "Disjoint":
        raise NotOverlapping("slices do not overlap with positive area")
    in_window = anchor.in_side_window() and other.in_side_window()
    same_sign = anchor.delta * other.delta == 1

    if same_sign:
        if cfg.kind == "I":
            t_big = max(anchor.t, other.t)
            v = FOUR_THIRDS * (cfg.distances["b"] + 2 - t_big) ** 3
        elif cfg.kind == "II":
            t_s, t_p = cfg.spanner_t, cfg.spanned_t
            e = cfg.distances["e"]
            v = FOUR_THIRDS * (2 - t_s + e) ** 2 * (2 - t_s + t_p)
        else:  # III: other engulfs anchor
            g = cfg.distances["g"]
            v = FOUR_THIRDS * (g + 2 - other.t + anchor.t) ** 3
        return PairBound(v, "DirectSameSign", cfg.kind, in_window)

    if cfg.kind == "III":
        g = cfg.distances["g"]
        v = FOUR_THIRDS * (g + anchor.t) ** 3
        return PairBound(v, "DirectOppositeIII", cfg.kind, in_window)

    return PairBound(Rat(0), "ThirdSquareNeeded", cfg.kind, in_window)


# ---------------------------------------------------------------------------
# Exact pairwise intersection volume via slice integration
# ---------------------------------------------------------------------------


def exact_pair_volume(xi: Sequence, xj: Sequence):
    """vol((C3+xi) meet (C3+xj)), exactly, by integrating slice areas.

    The overlap area as a function of z is piecewise quadratic with
    breakpoints at the translate heights, the existence-window ends, and
    the heights where a clipped overlap extent changes linear piece; each
    piece integrates exactly by Simpson's rule.
    """
    p, q = vec3(xi), vec3(xj)
    u1, v1, z1 = p[0] + p[1], p[0] - p[1], p[2]
    u2, v2, z2 = q[0] + q[1], q[0] - q[1], q[2]
    lo = max(z1, z2) - 2
    hi = min(z1, z2) + 2
    if lo >= hi:
        return Rat(0)

    def area(z):
        t1 = 2 - abs(z - z1)
        t2 = 2 - abs(z - z2)
        if t1 < 0 or t2 < 0:
            return Rat(0)
        ou = min(u1 + t1, u2 + t2) - max(u1 - t1, u2 - t2)
        ov = min(v1 + t1, v2 + t2) - max(v1 - t1, v2 - t2)
        if ou <= 0 or ov <= 0:
            return Rat(0)
        return ou * ov / 2

    pts = {lo, hi}
    for zk in (z1, z2):
        if lo < zk < hi:
            pts.add(zk)
    base = sorted(pts)

    def add_breaks(a, b):
        """Breakpoints interior to (a, b), where t1 and t2 are linear."""
        mid = (a + b) / 2
        s1 = 1 if mid <= z1 else -1
        s2 = 1 if mid <= z2 else -1
        # t_k(z) = 2 + s_k (z - z_k): slope s_k, intercept 2 - s_k z_k
        out = set()
        # crossings between the min pair and between the max pair, per axis
        for (ca, sa), (cb, sb) in (
            ((u1 + 2 - s1 * z1, s1), (u2 + 2 - s2 * z2, s2)),
            ((u1 - 2 + s1 * z1, -s1), (u2 - 2 + s2 * z2, -s2)),
            ((v1 + 2 - s1 * z1, s1), (v2 + 2 - s2 * z2, s2)),
            ((v1 - 2 + s1 * z1, -s1), (v2 - 2 + s2 * z2, -s2)),
        ):
            if sa != sb:
                z = (cb - ca) / (sa - sb)
                if a < z < b:
                    out.add(z)
        return out

    refined = set(base)
    for a, b in zip(base, base[1:]):
        refined |= add_breaks(a, b)
    grid = sorted(refined)

    # zeros of the clipped extents, found by sign change on linear pieces
    zero_pts = set(grid)
    for a, b in zip(grid, grid[1:]):
        for f in (_extent_u(u1, v1, z1, u2, v2, z2, 0), _extent_u(u1, v1, z1, u2, v2, z2, 1)):
            fa, fb = f(a), f(b)
            if (fa > 0 > fb) or (fa < 0 < fb):
                z = a + (b - a) * fa / (fa - fb)
                if a < z < b:
                    zero_pts.add(z)
    grid = sorted(zero_pts)

    total = Rat(0)
    for a, b in zip(grid, grid[1:]):
        m = (a + b) / 2
        total += (b - a) * (area(a) + 4 * area(m) + area(b)) / 6
    return total


def _extent_u(u1, v1, z1, u2, v2, z2, axis):
    """Unclipped overlap extent along u (axis=0) or v (axis=1)."""
    c1 = u1 if axis == 0 else v1
    c2 = u2 if axis == 0 else v2

    def f(z):
        t1 = 2 - abs(z - z1)
        t2 = 2 - abs(z - z2)
        return min(c1 + t1, c2 + t2) - max(c1 - t1, c2 - t2)

    return f
