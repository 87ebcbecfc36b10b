"""The specific bodies of the construction and their basic identities.

Provides the octahedron (L1 ball of radius 2), the parallelohedron cell P,
the localized neighbor-set machinery, and the 9/8 covering lattice whose
Voronoi cell is a truncated octahedron inscribed in the octahedron.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from . import polytope as pt
from .polytope import HalfSpace, Polytope3, halfspace
from .ratmath import Rat, Vec3, det3, dot, l1norm, rat, rat_str, vadd, vec3, vsub

OCTA_RADIUS = Rat(2)  # L1 radius of the octahedron


class DuplicateTranslate(Exception):
    pass


def octahedron() -> Polytope3:
    """The regular octahedron {|x|+|y|+|z| <= 2}."""
    verts = [
        (Rat(2), Rat(0), Rat(0)),
        (Rat(0), Rat(2), Rat(0)),
        (Rat(0), Rat(0), Rat(2)),
        (Rat(-2), Rat(0), Rat(0)),
        (Rat(0), Rat(-2), Rat(0)),
        (Rat(0), Rat(0), Rat(-2)),
    ]
    facets = [
        halfspace((sx, sy, sz), 2) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)
    ]
    return Polytope3(verts, facets)


def parallelohedron_p() -> Polytope3:
    """The tiling cell P: hull of (+-8,0,0), (0,+-8,0), (0,0,+-8), +-(8,8,8)."""
    return pt.hull_from_vertices(
        [
            (8, 0, 0),
            (-8, 0, 0),
            (0, 8, 0),
            (0, -8, 0),
            (0, 0, 8),
            (0, 0, -8),
            (8, 8, 8),
            (-8, -8, -8),
        ]
    )


def octahedron_at(x: Sequence, scale=1) -> Polytope3:
    return pt.affine(octahedron(), scale, x)


# ---------------------------------------------------------------------------
# Translate sets
# ---------------------------------------------------------------------------


class TranslateSet:
    """An ordered set of octahedron centers; duplicates rejected on load."""

    def __init__(self, translates: Iterable[Sequence]):
        xs: List[Vec3] = []
        seen = set()
        for p in translates:
            v = vec3(p)
            if v in seen:
                raise DuplicateTranslate(f"duplicate translate {v}")
            seen.add(v)
            xs.append(v)
        self.translates: Tuple[Vec3, ...] = tuple(xs)

    def __len__(self):
        return len(self.translates)

    def __iter__(self):
        return iter(self.translates)

    def __getitem__(self, i):
        return self.translates[i]

    def to_json_obj(self) -> dict:
        return {
            "translates": [[pt._coord_json(c) for c in v] for v in self.translates]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TranslateSet":
        return cls(obj["translates"])

    @classmethod
    def from_json(cls, text: str) -> "TranslateSet":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self):
        return f"TranslateSet({len(self.translates)} translates)"


# ---------------------------------------------------------------------------
# Section 2 identities
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    computed: str
    expected: str


def verify_basic_facts() -> List[CheckResult]:
    """Run the exact identities behind the construction; all rational track."""
    c3 = octahedron()
    p = parallelohedron_p()
    results = []

    def add(name, computed, expected):
        results.append(
            CheckResult(name, computed == expected, str(computed), str(expected))
        )

    add("vol(C3)", c3.volume(), Rat(32, 3))
    add("vol(P)", p.volume(), Rat(1024))
    add("4C3 subset of P", pt.contains_polytope(p, pt.affine(c3, 4)), True)
    # squared edge length between adjacent octahedron vertices
    add("edge(C3)^2", l1norm((4, 4, 0)), Rat(8))
    d = pt.difference_body(c3)
    add("D(C3) = 2C3", sorted(d.vertices) == sorted(pt.affine(c3, 2).vertices), True)
    m = pt.minkowski_sum(c3, d)
    add(
        "C3 + D(C3) = 3C3",
        sorted(m.vertices) == sorted(pt.affine(c3, 3).vertices),
        True,
    )
    add("vertex count of P", len(p.vertices), 8)
    return results


def neighbor_lemma_check(x: Sequence) -> dict:
    """Check `translates meet => translate inside 3C3` for one offset.

    Both predicates are evaluated exactly: two L1 balls of radius 2 meet
    iff the center offset has L1 norm <= 4, and C3+x lies in 3C3 iff every
    vertex does.
    """
    v = vec3(x)
    intersects = l1norm(v) <= 4
    contained = all(
        l1norm(vadd(v, w)) <= 6 for w in octahedron().vertices
    )
    return {"intersects": intersects, "contained_in_3C3": contained}


def neighbor_set(x_set: TranslateSet, anchor_index: int) -> TranslateSet:
    """Translates whose octahedron meets the anchor's, anchor placed last.

    Touching counts as meeting.  The anchor is listed last to match the
    role of the distinguished translate in the localization argument.
    """
    anchor = x_set[anchor_index]
    others = [
        v
        for i, v in enumerate(x_set)
        if i != anchor_index and l1norm(vsub(v, anchor)) <= 4
    ]
    return TranslateSet(others + [anchor])


# ---------------------------------------------------------------------------
# The 9/8 covering lattice
# ---------------------------------------------------------------------------


class LatticeBasis:
    def __init__(self, b1: Sequence, b2: Sequence, b3: Sequence):
        self.b1 = vec3(b1)
        self.b2 = vec3(b2)
        self.b3 = vec3(b3)
        d = det3(self.b1, self.b2, self.b3)
        if d == 0:
            raise ValueError("lattice basis is singular")
        self.determinant = abs(d)

    def rows(self) -> Tuple[Vec3, Vec3, Vec3]:
        return (self.b1, self.b2, self.b3)

    def scaled(self, s) -> "LatticeBasis":
        q = rat(s)
        return LatticeBasis(
            tuple(q * c for c in self.b1),
            tuple(q * c for c in self.b2),
            tuple(q * c for c in self.b3),
        )

    def point(self, n1: int, n2: int, n3: int) -> Vec3:
        return (
            n1 * self.b1[0] + n2 * self.b2[0] + n3 * self.b3[0],
            n1 * self.b1[1] + n2 * self.b2[1] + n3 * self.b3[1],
            n1 * self.b1[2] + n2 * self.b2[2] + n3 * self.b3[2],
        )

    def fundamental_cell(self) -> Polytope3:
        """The fundamental parallelepiped spanned by the basis at the origin."""
        corners = []
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    corners.append(
                        vadd(
                            vadd(
                                (a * self.b1[0], a * self.b1[1], a * self.b1[2]),
                                (b * self.b2[0], b * self.b2[1], b * self.b2[2]),
                            ),
                            (c * self.b3[0], c * self.b3[1], c * self.b3[2]),
                        )
                    )
        return pt.hull_from_vertices(corners)

    def to_json_obj(self) -> dict:
        return {
            "rows": [[pt._coord_json(c) for c in row] for row in self.rows()],
            "determinant": pt._coord_json(self.determinant),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "LatticeBasis":
        return cls(*obj["rows"])

    def __repr__(self):
        return f"LatticeBasis(det={rat_str(self.determinant)})"


def covering_lattice_nine_eighths() -> LatticeBasis:
    """The body-centered lattice for which the octahedron is a tight cover.

    Its Voronoi cell is the truncated octahedron [-4/3,4/3]^3 meet C3,
    inscribed in C3, so octahedron translates over this lattice cover
    space with density (32/3)/(256/27) = 9/8.
    """
    return LatticeBasis(
        (Rat(8, 3), 0, 0), (0, Rat(8, 3), 0), (Rat(4, 3), Rat(4, 3), Rat(4, 3))
    )


def lattice_points_near(
    basis: LatticeBasis, region: Polytope3, margin=OCTA_RADIUS
) -> TranslateSet:
    """Lattice points whose octahedron can meet `region` (bbox + L1 margin)."""
    lo, hi = region.bounding_box()
    m = rat(margin)
    inv_rows = _inverse_rows(basis)
    # integer coordinate ranges from the mapped bbox corners
    n_lo = [None] * 3
    n_hi = [None] * 3
    for cx in (lo[0] - m, hi[0] + m):
        for cy in (lo[1] - m, hi[1] + m):
            for cz in (lo[2] - m, hi[2] + m):
                for k in range(3):
                    t = inv_rows[k][0] * cx + inv_rows[k][1] * cy + inv_rows[k][2] * cz
                    if n_lo[k] is None or t < n_lo[k]:
                        n_lo[k] = t
                    if n_hi[k] is None or t > n_hi[k]:
                        n_hi[k] = t
    pts = []
    import math

    rngs = [
        range(math.floor(n_lo[k]) - 1, math.ceil(n_hi[k]) + 2) for k in range(3)
    ]
    for n1 in rngs[0]:
        for n2 in rngs[1]:
            for n3 in rngs[2]:
                x = basis.point(n1, n2, n3)
                clamped = tuple(
                    min(max(x[k], lo[k]), hi[k]) for k in range(3)
                )
                if l1norm(vsub(x, clamped)) <= m:
                    pts.append(x)
    pts.sort()
    return TranslateSet(pts)


def _inverse_rows(basis: LatticeBasis):
    """Rows of B^-1 where B has basis vectors as columns (x = B n)."""
    b1, b2, b3 = basis.rows()
    cols = (b1, b2, b3)
    rows = []
    for k in range(3):
        rhs = [Rat(1) if i == k else Rat(0) for i in range(3)]
        # solve B^T y = e_k  ->  y is row k of B^-1
        from .ratmath import solve3

        mat_rows = tuple(zip(*cols))  # B as row tuples
        mat_t = tuple(zip(*mat_rows))  # B^T rows
        y = solve3([vec3(r) for r in mat_t], rhs)
        rows.append(y)
    return rows


def voronoi_cell(basis: LatticeBasis, neighbor_range: int = 2) -> Polytope3:
    """Voronoi cell of the lattice at the origin (superset-safe).

    Built from the bisector half-spaces of all nonzero lattice points with
    coefficients in [-neighbor_range, neighbor_range]; omitting farther
    points can only enlarge the result, so any containment proved for this
    cell holds for the true Voronoi cell.
    """
    hss = []
    r = neighbor_range
    for n1 in range(-r, r + 1):
        for n2 in range(-r, r + 1):
            for n3 in range(-r, r + 1):
                if n1 == n2 == n3 == 0:
                    continue
                lam = basis.point(n1, n2, n3)
                hss.append(HalfSpace(lam, dot(lam, lam) / 2))
    cell = pt.halfspace_intersection(hss)
    if not isinstance(cell, Polytope3):
        raise pt.GeometryError("Voronoi cell degenerate; widen neighbor_range")
    return cell


def verify_lattice_covering_exact(basis: LatticeBasis) -> bool:
    """Exact proof that octahedron translates over `basis` cover space.

    Voronoi cells tile space, so `cell subset C3` (checked on vertices,
    exact) certifies the covering.  This is the sound alternative for
    tight coverings, which a margin-based grid check necessarily rejects.
    """
    cell = voronoi_cell(basis)
    c3 = octahedron()
    return pt.contains_polytope(c3, cell)
