"""Covering certification, localized density, and the two-case bound.

The localized density of a translate family X over a region Q is

    theta(X, Q) = sum_i vol(Q meet (C3 + x_i)) / vol(Q),

computed on the exact rational track.  ``certify_covering`` proves
coverings by a grid-margin rule; ``localization_bound`` reproduces the
two-case argument (a crowded anchor gives 1 + 1/96; a sparse one yields
a per-pair overlap certificate of at least 4/3^10, i.e. a density of at
least 1 + 4/6^10 over the cell of volume 1024).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .bodies import TranslateSet, octahedron, octahedron_at, parallelohedron_p
from .overlap import NotOverlapping, config_lower_bound, exact_pair_volume
from .polytope import (
    EMPTY,
    HalfSpace,
    Polytope3,
    affine,
    contains_polytope,
    halfspace_intersection,
    intersect,
)
from .ratmath import FLOAT_TOL, Rat, l1norm, rat, rat_str, vec3, vsub
from .slices import NoFeasibleHeight, find_good_height, slice_at

#: exact rational lower bound of the theorem, 1 + 4/6^10
THETA_FLOOR = 1 + Rat(4, 6**10)
CASE1_FLOOR = 1 + Rat(1, 96)

_OCT_VOL = Rat(32, 3)


class NonPositiveStep(Exception):
    pass


class NotACovering(Exception):
    pass


class NoOriginTranslate(Exception):
    pass


# ---------------------------------------------------------------------------
# Grid-margin covering certification
# ---------------------------------------------------------------------------


@dataclass
class CoverageCertificate:
    region: Polytope3
    grid_step: "Rat"
    cells_checked: int
    margin_rule: str
    status: str  # "Certified" | "Gap"
    gap_witnesses: List[Tuple] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == "Certified"

    def to_json_obj(self) -> dict:
        return {
            "grid_step": rat_str(self.grid_step),
            "cells_checked": self.cells_checked,
            "margin_rule": self.margin_rule,
            "status": self.status,
            "gap_witnesses": [
                [rat_str(c) for c in w] for w in self.gap_witnesses
            ],
        }


def _grid_cell_slabs(region: Polytope3, h: "Rat", slab_cells: int = 500_000):
    """Bbox cells (L-inf radius h) that can meet region, in x-slabs.

    Cells are kept by the per-facet corner test (min over the cell's
    corners of n.x <= offset), a sound superset of the cells meeting the
    region.  Yields (index array, float center array) per slab; exact
    rational centers are reconstructed from indices and the bbox low.
    """
    lo, hi = region.bounding_box()
    step = 2 * h
    counts = [max(math.ceil((hi[k] - lo[k]) / step), 1) for k in range(3)]
    lo_f = np.array([float(c) for c in lo])
    hf = float(h)
    normals = [
        (np.array([float(c) for c in hs.normal]), float(hs.offset))
        for hs in region.facets
    ]
    per_slab = max(1, slab_cells // max(counts[1] * counts[2], 1))
    for x0 in range(0, counts[0], per_slab):
        axes = [
            np.arange(x0, min(x0 + per_slab, counts[0]), dtype=np.int64),
            np.arange(counts[1], dtype=np.int64),
            np.arange(counts[2], dtype=np.int64),
        ]
        ii, jj, kk = np.meshgrid(*axes, indexing="ij")
        idx = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
        centers = lo_f + hf + idx * float(step)
        keep = np.ones(len(idx), dtype=bool)
        for n, off in normals:
            slack = hf * np.abs(n).sum()
            keep &= centers @ n - slack <= off + FLOAT_TOL
        if keep.any():
            yield idx[keep], centers[keep]


def _grid_cells(region: Polytope3, h: "Rat"):
    """All kept cells at once (see :func:`_grid_cell_slabs`)."""
    lo, _ = region.bounding_box()
    parts = list(_grid_cell_slabs(region, h))
    if not parts:
        return np.empty((0, 3), dtype=np.int64), lo, np.empty((0, 3))
    idx = np.concatenate([p[0] for p in parts])
    centers = np.concatenate([p[1] for p in parts])
    return idx, lo, centers


def _exact_center(idx_row, lo, h: "Rat"):
    return tuple(lo[k] + h + 2 * h * int(idx_row[k]) for k in range(3))


def certify_covering(
    x_set: TranslateSet, region: Polytope3, h, max_witnesses: int = 200
) -> CoverageCertificate:
    """Prove that the octahedra at ``x_set`` cover ``region``.

    A cell of L-inf radius h lies inside the translate at x whenever its
    center p has ||p - x||_1 <= 2 - 3h, so checking that margin at every
    cell center meeting the region is a sound covering proof.  Gap
    status lists failing centers, which may be false alarms at coarse h.
    """
    h = rat(h)
    if h <= 0:
        raise NonPositiveStep(f"grid step must be positive, got {h}")
    margin = 2 - 3 * h
    if margin <= 0:
        raise NonPositiveStep(f"grid step {h} leaves no margin (2 - 3h <= 0)")
    lo, _ = region.bounding_box()
    pts = np.array([[float(c) for c in x] for x in x_set], dtype=float)
    tree = cKDTree(pts)
    margin_f = float(margin)
    translates = [vec3(x) for x in x_set]
    witnesses: List[Tuple] = []
    cells_checked = 0
    for idx, centers in _grid_cell_slabs(region, h):
        cells_checked += len(idx)
        dist, _ = tree.query(centers, k=1, p=1)
        for row in np.nonzero(dist > margin_f - 1e-7)[0]:
            p = _exact_center(idx[row], lo, h)
            best = None
            for x in translates:
                d = l1norm(vsub(p, x))
                if best is None or d < best:
                    best = d
                if best <= margin:
                    break
            if best > margin:
                witnesses.append(p)
                if len(witnesses) >= max_witnesses:
                    break
        if len(witnesses) >= max_witnesses:
            break
    status = "Certified" if not witnesses else "Gap"
    return CoverageCertificate(
        region=region,
        grid_step=h,
        cells_checked=cells_checked,
        margin_rule="min_i ||p - x_i||_1 <= 2 - 3h at every cell center",
        status=status,
        gap_witnesses=witnesses,
    )


class CoverageGrid:
    """Incrementally maintained per-cell coverage counts for one region.

    The float-track workhorse of the annealing loop.  Each translate
    stamps the cells whose centers pass the same L1 margin rule as
    :func:`certify_covering`; only a local window around the translate
    is touched, and the number of uncovered region cells plus the total
    multiplicity over region cells are maintained incrementally.  A
    small interior tolerance keeps the float track conservative rather
    than optimistic.
    """

    def __init__(self, region: Polytope3, h):
        self.h = rat(h)
        if self.h <= 0:
            raise NonPositiveStep(f"grid step must be positive, got {h}")
        self.margin = float(2 - 3 * self.h) - 1e-9
        lo, hi = region.bounding_box()
        step = 2 * self.h
        shape = tuple(
            max(math.ceil((hi[k] - lo[k]) / step), 1) for k in range(3)
        )
        self.shape = shape
        self._lo = np.array([float(c) + float(self.h) for c in lo])
        self._step = float(step)
        axes = [self._lo[k] + self._step * np.arange(shape[k])
                for k in range(3)]
        self._axes = axes
        kept = np.ones(shape, dtype=bool)
        hf = float(self.h)
        cx = axes[0][:, None, None]
        cy = axes[1][None, :, None]
        cz = axes[2][None, None, :]
        for hs in region.facets:
            n = [float(c) for c in hs.normal]
            slack = hf * sum(abs(c) for c in n)
            kept &= (
                n[0] * cx + n[1] * cy + n[2] * cz - slack
                <= float(hs.offset) + FLOAT_TOL
            )
        self.kept = kept
        self.n_kept = int(kept.sum())
        self.counts = np.zeros(shape, dtype=np.int32)
        self._uncovered = self.n_kept
        self._total = 0

    def _window(self, x):
        """Sub-box slices and the local L1-ball mask for a translate."""
        p = np.array([float(rat(c)) for c in x])
        r = self.margin
        los, his, locals_ = [], [], []
        for k in range(3):
            a = max(0, math.floor((p[k] - r - self._lo[k]) / self._step))
            b = min(
                self.shape[k] - 1,
                math.ceil((p[k] + r - self._lo[k]) / self._step),
            )
            if a > b:
                return None, None
            los.append(a)
            his.append(b + 1)
            locals_.append(self._axes[k][a:b + 1] - p[k])
        sl = tuple(slice(a, b) for a, b in zip(los, his))
        mask = (
            np.abs(locals_[0])[:, None, None]
            + np.abs(locals_[1])[None, :, None]
            + np.abs(locals_[2])[None, None, :]
        ) <= r
        return sl, mask

    def stamp_size(self, x) -> int:
        """Number of region cells the translate's stamp touches."""
        sl, mask = self._window(x)
        if sl is None:
            return 0
        return int((mask & self.kept[sl]).sum())

    def add(self, x) -> None:
        sl, mask = self._window(x)
        if sl is None:
            return
        c = self.counts[sl]
        kept = self.kept[sl]
        hit = mask & kept
        self._uncovered -= int((hit & (c == 0)).sum())
        self._total += int(hit.sum())
        c[mask] += 1

    def remove(self, x) -> None:
        sl, mask = self._window(x)
        if sl is None:
            return
        c = self.counts[sl]
        c[mask] -= 1
        kept = self.kept[sl]
        hit = mask & kept
        self._uncovered += int((hit & (c == 0)).sum())
        self._total -= int(hit.sum())

    def uncovered(self) -> int:
        return self._uncovered

    def total_multiplicity(self) -> int:
        return self._total

    def mean_multiplicity(self) -> float:
        return self._total / self.n_kept

    def rebuild(self, x_set) -> None:
        self.counts[:] = 0
        self._uncovered = self.n_kept
        self._total = 0
        for x in x_set:
            self.add(x)


# ---------------------------------------------------------------------------
# Localized density
# ---------------------------------------------------------------------------


def _region_separates(region: Polytope3, verts) -> bool:
    """True when some region facet puts the whole vertex set outside."""
    for hs in region.facets:
        if all(
            sum(hs.normal[k] * v[k] for k in range(3)) > hs.offset
            for v in verts
        ):
            return True
    return False


def density(x_set, region: Polytope3):
    """Exact localized density: sum_i vol(region meet C3+x_i) / vol(region)."""
    vol_r = region.volume()
    oct_verts = [vec3(v) for v in octahedron().vertices]
    total = Rat(0)
    rlo, rhi = region.bounding_box()
    for x in x_set:
        x = vec3(x)
        if any(x[k] + 2 < rlo[k] or x[k] - 2 > rhi[k] for k in range(3)):
            continue
        verts = [tuple(v[k] + x[k] for k in range(3)) for v in oct_verts]
        if all(region.contains_point(v) for v in verts):
            total += _OCT_VOL
            continue
        if _region_separates(region, verts):
            continue
        piece = intersect(region, octahedron_at(x))
        if piece is not EMPTY:
            total += piece.volume()
    return total / vol_r


@dataclass
class ExcessReport:
    density: "Rat"
    excess: "Rat"
    pairwise_sum: "Rat"
    residue: "Rat"

    def to_json_obj(self) -> dict:
        return {
            k: {"rational": rat_str(v), "float": float(v)}
            for k, v in (
                ("density", self.density),
                ("excess", self.excess),
                ("pairwise_sum", self.pairwise_sum),
                ("residue", self.residue),
            )
        }


def pairwise_overlap_sum(x_set, region: Polytope3, body: Polytope3 = None):
    """Exact sum over pairs of vol(region meet B+x_i meet B+x_j).

    ``body`` defaults to the octahedron; pairs farther apart than the
    body's bounding diameter are skipped exactly.
    """
    body = body or octahedron()
    pts = [vec3(x) for x in x_set]
    blo, bhi = body.bounding_box()
    reach = [bhi[k] - blo[k] for k in range(3)]
    total = Rat(0)
    for i in range(len(pts)):
        fi = [
            HalfSpace(hs.normal, hs.offset + sum(
                hs.normal[k] * pts[i][k] for k in range(3)))
            for hs in body.facets
        ]
        for j in range(i + 1, len(pts)):
            d = vsub(pts[j], pts[i])
            if any(abs(d[k]) > reach[k] for k in range(3)):
                continue
            fj = [
                HalfSpace(hs.normal, hs.offset + sum(
                    hs.normal[k] * pts[j][k] for k in range(3)))
                for hs in body.facets
            ]
            piece = halfspace_intersection(
                list(region.facets) + fi + fj
            )
            if piece is not EMPTY:
                total += piece.volume()
    return total


def multiplicity_excess(
    x_set, region: Polytope3, h=None, assume_covering: bool = False,
    body: Polytope3 = None,
) -> ExcessReport:
    """Density minus one, with the pairwise overlap sum and its residue.

    The covering precondition is enforced by grid certification at ``h``
    (default 1/32) unless ``assume_covering`` is set by a caller holding
    an independent covering proof.
    """
    if not assume_covering:
        cert = certify_covering(x_set, region, rat(h) if h else Rat(1, 32))
        if not cert.certified:
            raise NotACovering(
                f"{len(cert.gap_witnesses)} grid cells fail the margin rule"
            )
    if body is None:
        dens = density(x_set, region)
    else:
        vol_r = region.volume()
        dens = Rat(0)
        for x in x_set:
            piece = intersect(region, affine(body, 1, vec3(x)))
            if piece is not EMPTY:
                dens += piece.volume()
        dens = dens / vol_r
    pair = pairwise_overlap_sum(x_set, region, body) / region.volume()
    excess = dens - 1
    return ExcessReport(
        density=dens, excess=excess, pairwise_sum=pair,
        residue=excess - pair,
    )


# ---------------------------------------------------------------------------
# The two-case localization bound
# ---------------------------------------------------------------------------


@dataclass
class PairCertificate:
    anchor: Tuple
    other: Tuple
    kind: str
    certificate: str
    value: "Rat"
    in_window: bool

    def to_json_obj(self) -> dict:
        return {
            "anchor": [rat_str(c) for c in self.anchor],
            "other": [rat_str(c) for c in self.other],
            "kind": self.kind,
            "certificate": self.certificate,
            "value": {"rational": rat_str(self.value), "float": float(self.value)},
            "in_window": self.in_window,
        }


@dataclass
class DensityReport:
    theta: Optional["Rat"]
    excess: Optional["Rat"]
    case_used: str  # "Case1" | "Case2" | "NotLocalizable"
    certificates: List[PairCertificate]
    bound_value: Optional["Rat"]
    bound_satisfied: Optional[bool]
    anchor_index: Optional[int] = None
    neighbor_count: Optional[int] = None
    good_height: Optional["Rat"] = None
    coverage_status: Optional[str] = None
    notes: str = ""

    def to_json_obj(self) -> dict:
        def dual(v):
            return None if v is None else {
                "rational": rat_str(v), "float": float(v)
            }

        return {
            "theta": dual(self.theta),
            "excess": dual(self.excess),
            "case_used": self.case_used,
            "certificates": [c.to_json_obj() for c in self.certificates],
            "bound_value": dual(self.bound_value),
            "bound_satisfied": self.bound_satisfied,
            "anchor_index": self.anchor_index,
            "neighbor_count": self.neighbor_count,
            "good_height": dual(self.good_height),
            "coverage_status": self.coverage_status,
            "notes": self.notes,
        }


def _side_interval(side, s):
    """Closed interval of an anchor-square side covered by slice s.

    ``side`` is (axis, fixed value, lo, hi) in uv coordinates: axis 0
    means the side runs along u at v = fixed.  Returns None when s
    misses the side.
    """
    axis, fixed, lo, hi = side
    cu, cv = s.center_uv
    run_c, off_c = (cu, cv) if axis == 0 else (cv, cu)
    if not (off_c - s.t <= fixed <= off_c + s.t):
        return None
    a = max(lo, run_c - s.t)
    b = min(hi, run_c + s.t)
    if a > b:
        return None
    return (a, b)


def _interval_union_covers(lo, hi, intervals) -> bool:
    cur = lo
    for a, b in sorted(intervals):
        if a > cur:
            return False
        cur = max(cur, b)
        if cur >= hi:
            return True
    return cur >= hi


def _slice_contains_uv(s, u, v) -> bool:
    cu, cv = s.center_uv
    return abs(u - cu) <= s.t and abs(v - cv) <= s.t


def localization_bound(x_set) -> DensityReport:
    """The two-case lower-bound argument around an origin translate.

    The anchor is the smallest-index translate whose body contains the
    origin.  With m intersecting neighbors: m >= 27 gives the crowded
    chain 1 - 9/32 + (m+1)(32/3)/1024 >= 1 + 1/96; otherwise a good
    height exists, the anchor slice's boundary is scanned, and either a
    direct overlap certificate >= 4/3^10 or a third-square pair is
    produced, giving 1 + (certificate)/1024 >= 1 + 4/6^10.
    """
    pts = [vec3(x) for x in x_set]
    anchor_index = next(
        (i for i, x in enumerate(pts) if l1norm(x) <= 2), None
    )
    if anchor_index is None:
        raise NoOriginTranslate("no translate's octahedron contains the origin")
    xa = pts[anchor_index]

    cell = parallelohedron_p()
    if not contains_polytope(cell, affine(octahedron(), 3, xa)):
        return DensityReport(
            theta=None, excess=None, case_used="NotLocalizable",
            certificates=[], bound_value=None, bound_satisfied=None,
            anchor_index=anchor_index,
            notes="3C3 + anchor not contained in the cell",
        )

    neighbors = [
        (i, x) for i, x in enumerate(pts)
        if i != anchor_index and l1norm(vsub(x, xa)) <= 4
    ]
    m = len(neighbors)

    if m >= 27:
        value = 1 - Rat(9, 32) + (m + 1) * _OCT_VOL / 1024
        bound = max(value, CASE1_FLOOR)
        return DensityReport(
            theta=None, excess=None, case_used="Case1", certificates=[],
            bound_value=bound, bound_satisfied=bound >= CASE1_FLOOR,
            anchor_index=anchor_index, neighbor_count=m,
        )

    try:
        z0 = find_good_height([x for _, x in neighbors] + [xa])
    except NoFeasibleHeight as exc:
        return DensityReport(
            theta=None, excess=None, case_used="NotLocalizable",
            certificates=[], bound_value=None, bound_satisfied=None,
            anchor_index=anchor_index, neighbor_count=m,
            notes=f"no good height: {exc}",
        )

    anchor_slice = slice_at(xa, z0, source=anchor_index)
    nslices = [
        (i, slice_at(x, z0, source=i)) for i, x in neighbors
    ]
    nslices = [(i, s) for i, s in nslices if s is not None]

    ua, va = anchor_slice.center_uv
    t = anchor_slice.t
    sides = [
        (0, va - t, ua - t, ua + t),
        (0, va + t, ua - t, ua + t),
        (1, ua - t, va - t, va + t),
        (1, ua + t, va - t, va + t),
    ]
    boundary_cov = {}  # neighbor index -> covers positive boundary length
    for side in sides:
        ivs = []
        for i, s in nslices:
            iv = _side_interval(side, s)
            if iv is not None:
                ivs.append(iv)
                if iv[1] > iv[0]:
                    boundary_cov[i] = True
        if not _interval_union_covers(side[2], side[3], ivs):
            raise NotACovering(
                f"anchor slice boundary not covered at height {z0} "
                f"(side {side})"
            )

    slices_by_index = dict(nslices)
    certificates: List[PairCertificate] = []
    best = None
    for i in sorted(boundary_cov):
        s = slices_by_index[i]
        try:
            pb = config_lower_bound(anchor_slice, s)
        except NotOverlapping:
            continue
        if pb.value > 0:
            cert = PairCertificate(
                anchor=xa, other=pts[i], kind=pb.kind,
                certificate=pb.certificate, value=pb.value,
                in_window=pb.in_window,
            )
            certificates.append(cert)
            if best is None or pb.value > best:
                best = pb.value

    if best is None:
        # every boundary-covering slice is an opposite-sign config I/II;
        # follow a corner's coverer to the third square
        third = _third_square_value(
            xa, anchor_slice, sides, slices_by_index, boundary_cov, pts
        )
        if third is None:
            return DensityReport(
                theta=None, excess=None, case_used="NotLocalizable",
                certificates=[], bound_value=None, bound_satisfied=None,
                anchor_index=anchor_index, neighbor_count=m,
                good_height=z0,
                notes="no direct certificate and no third-square pair",
            )
        value, certs = third
        certificates.extend(certs)
        best = value

    bound = 1 + best / 1024
    return DensityReport(
        theta=None, excess=None, case_used="Case2",
        certificates=certificates, bound_value=bound,
        bound_satisfied=bound >= THETA_FLOOR,
        anchor_index=anchor_index, neighbor_count=m, good_height=z0,
    )


def _third_square_value(xa, anchor_slice, sides, slices_by_index,
                        boundary_cov, pts):
    """Locate a corner-coverer and the slice past its exit point.

    An opposite-sign slice i covering an anchor corner is followed along
    an incident side to the point where the side leaves square i; the
    slice j covering that point pairs with i, and the certificate is the
    sum of both exact pairwise volumes with the anchor.
    """
    ua, va = anchor_slice.center_uv
    t = anchor_slice.t
    corners = [
        (ua - t, va - t), (ua - t, va + t),
        (ua + t, va - t), (ua + t, va + t),
    ]
    for cu, cv in corners:
        for i in sorted(boundary_cov):
            si = slices_by_index[i]
            if not _slice_contains_uv(si, cu, cv):
                continue
            # walk each incident side from the corner to where it
            # leaves square i
            for side in sides:
                axis, fixed, lo, hi = side
                corner_run = cu if axis == 0 else cv
                corner_off = cv if axis == 0 else cu
                if corner_off != fixed:
                    continue
                iv = _side_interval(side, si)
                if iv is None:
                    continue
                exit_run = iv[1] if corner_run == iv[0] else iv[0]
                pu, pv = (exit_run, fixed) if axis == 0 else (fixed, exit_run)
                for j in sorted(boundary_cov):
                    if j == i:
                        continue
                    if _slice_contains_uv(slices_by_index[j], pu, pv):
                        value = (
                            exact_pair_volume(xa, pts[i])
                            + exact_pair_volume(xa, pts[j])
                        )
                        certs = [
                            PairCertificate(
                                anchor=xa, other=pts[k], kind="pair",
                                certificate="ThirdSquarePair",
                                value=exact_pair_volume(xa, pts[k]),
                                in_window=True,
                            )
                            for k in (i, j)
                        ]
                        return value, certs
    return None


def theorem_report(
    x_set, h=Rat(1, 32), assume_covering: bool = False
) -> DensityReport:
    """End-to-end check: certify, measure theta, run the localization.

    ``bound_satisfied`` is the exact comparison theta >= 1 + 4/6^10; it
    is left unset (None) when the covering could not be certified and
    was not assumed.
    """
    cell = parallelohedron_p()
    covered = assume_covering
    status = "Assumed" if assume_covering else None
    if not assume_covering:
        cert = certify_covering(x_set, cell, h)
        covered = cert.certified
        status = cert.status
    theta = density(x_set, cell)
    if not covered:
        return DensityReport(
            theta=theta, excess=theta - 1, case_used="NotLocalizable",
            certificates=[], bound_value=None, bound_satisfied=None,
            coverage_status=status,
            notes="covering not certified; bound not asserted",
        )
    report = localization_bound(x_set)
    report.theta = theta
    report.excess = theta - 1
    report.coverage_status = status
    report.bound_satisfied = bool(theta >= THETA_FLOOR)
    return report


def scaled_cell(r) -> Polytope3:
    """The region r*P used for the density-convergence experiments."""
    return affine(parallelohedron_p(), rat(r))
