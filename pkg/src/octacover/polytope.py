"""Exact 3-D convex polytope kernel.

Bodies are held in both vertex form and half-space form, with all
coordinates exact rationals.  Hulls are built incrementally; half-space
intersections by sequential clipping (double description refinement) in a
deterministic facet order.  Every operation here is pure; ``Polytope3``
values are immutable after construction.
"""

from __future__ import annotations

import json
from functools import cmp_to_key
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .ratmath import (
    Rat,
    Vec3,
    cross,
    det3,
    dot,
    mean,
    primitive,
    rat,
    rat_str,
    vadd,
    vec3,
    vscale,
    vsub,
)


class GeometryError(Exception):
    """Base class for geometric failures."""


class DegenerateInput(GeometryError):
    """Input points are coplanar/collinear; flat bodies are unsupported."""


class Unbounded(GeometryError):
    """Half-space intersection is unbounded."""


class NonPositiveScale(GeometryError):
    pass


class HalfSpace(NamedTuple):
    """The closed half-space {p : <normal, p> <= offset}."""

    normal: Vec3
    offset: "Rat"

    def key(self) -> tuple:
        """Canonical integer form of the bounding plane (orientation kept)."""
        return primitive((*self.normal, self.offset))


def halfspace(normal: Sequence, offset) -> HalfSpace:
    n = vec3(normal)
    if n == (0, 0, 0):
        raise GeometryError("half-space normal must be nonzero")
    return HalfSpace(n, rat(offset))


class EmptyIntersection:
    """Sentinel value for an empty intersection."""

    affine_dim = -1
    vertices: Tuple[Vec3, ...] = ()

    def volume(self):
        return Rat(0)

    def __repr__(self):
        return "EMPTY"


EMPTY = EmptyIntersection()


class LowerDimensional:
    """A touching intersection: nonempty but not full-dimensional.

    Volume is zero but the affine dimension (0, 1 or 2) is preserved so
    callers can tell touching translates from disjoint ones.
    """

    def __init__(self, vertices: Sequence[Vec3], affine_dim: int):
        self.vertices = tuple(vertices)
        self.affine_dim = affine_dim

    def volume(self):
        return Rat(0)

    def __repr__(self):
        return f"LowerDimensional(dim={self.affine_dim}, nverts={len(self.vertices)})"


IntersectionResult = Union["Polytope3", LowerDimensional, EmptyIntersection]


def _rank(vectors: Sequence[Vec3]) -> int:
    """Rank of a set of rational 3-vectors (0..3)."""
    base = None
    for v in vectors:
        if v != (0, 0, 0):
            base = v
            break
    if base is None:
        return 0
    second = None
    for v in vectors:
        if cross(base, v) != (0, 0, 0):
            second = v
            break
    if second is None:
        return 1
    for v in vectors:
        if det3(base, second, v) != 0:
            return 3
    return 2


def _affine_rank(points: Sequence[Vec3]) -> int:
    if not points:
        return -1
    p0 = points[0]
    return _rank([vsub(p, p0) for p in points[1:]])


class Polytope3:
    """A bounded full-dimensional convex polytope in E^3.

    Holds a minimal vertex list and an irredundant facet list that are
    mutually consistent.  Construct through :func:`hull_from_vertices` or
    :func:`halfspace_intersection`; the raw constructor trusts its inputs.
    """

    __slots__ = ("vertices", "facets", "_volume", "_np_cache")

    affine_dim = 3

    def __init__(self, vertices: Sequence[Vec3], facets: Sequence[HalfSpace]):
        self.vertices: Tuple[Vec3, ...] = tuple(vertices)
        self.facets: Tuple[HalfSpace, ...] = tuple(facets)
        self._volume = None
        self._np_cache = None

    # -- queries ---------------------------------------------------------

    def contains_point(self, p: Sequence, strict: bool = False) -> bool:
        q = vec3(p)
        if strict:
            return all(dot(n, q) < off for n, off in self.facets)
        return all(dot(n, q) <= off for n, off in self.facets)

    def bounding_box(self) -> Tuple[Vec3, Vec3]:
        lo = tuple(min(v[i] for v in self.vertices) for i in range(3))
        hi = tuple(max(v[i] for v in self.vertices) for i in range(3))
        return lo, hi  # type: ignore[return-value]

    def as_float_arrays(self):
        """(vertices, facet normals, facet offsets) as numpy float arrays."""
        if self._np_cache is None:
            verts = np.array([[float(c) for c in v] for v in self.vertices])
            normals = np.array([[float(c) for c in n] for n, _ in self.facets])
            offsets = np.array([float(off) for _, off in self.facets])
            self._np_cache = (verts, normals, offsets)
        return self._np_cache

    def volume(self):
        if self._volume is None:
            self._volume = self._compute_volume()
        return self._volume

    def _facet_polygon(self, facet: HalfSpace) -> List[Vec3]:
        n, off = facet
        pts = [v for v in self.vertices if dot(n, v) == off]
        return _order_convex_polygon(pts, n)

    def _compute_volume(self):
        c = mean(self.vertices)
        total = Rat(0)
        for facet in self.facets:
            poly = self._facet_polygon(facet)
            p0 = poly[0]
            for a, b in zip(poly[1:], poly[2:]):
                total += abs(det3(vsub(p0, c), vsub(a, c), vsub(b, c)))
        return total / 6

    def validate(self) -> None:
        """Check V-rep/H-rep mutual consistency; raise GeometryError if broken."""
        for v in self.vertices:
            for n, off in self.facets:
                if dot(n, v) > off:
                    raise GeometryError(f"vertex {v} violates facet {n} <= {off}")
        for n, off in self.facets:
            tight = [v for v in self.vertices if dot(n, v) == off]
            if len(tight) < 3 or _affine_rank(tight) < 2:
                raise GeometryError(f"facet {n} <= {off} not supported by 3 vertices")
        for v in self.vertices:
            tights = [n for n, off in self.facets if dot(n, v) == off]
            if _rank(tights) < 3:
                raise GeometryError(f"vertex {v} is not a basic solution")

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {"vertices": [[_coord_json(c) for c in v] for v in self.vertices]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Polytope3":
        pts = [vec3(p) for p in obj["vertices"]]
        return hull_from_vertices(pts)

    @classmethod
    def from_json(cls, text: str) -> "Polytope3":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self):
        return f"Polytope3({len(self.vertices)} vertices, {len(self.facets)} facets)"


def _coord_json(c):
    q = rat(c)
    if q.denominator == 1:
        return int(q.numerator)
    return rat_str(q)


def _order_convex_polygon(pts: List[Vec3], normal: Vec3) -> List[Vec3]:
    """Order coplanar points counterclockwise (seen from `normal` side), exactly."""
    if len(pts) < 3:
        raise GeometryError("facet polygon needs at least 3 points")
    c = mean(pts)
    d0 = vsub(pts[0], c)

    def angle_class(w: Vec3) -> int:
        s = dot(cross(d0, w), normal)
        if s > 0:
            return 1
        if s < 0:
            return 3
        return 0 if dot(d0, w) > 0 else 2

    def cmp(p: Vec3, q: Vec3) -> int:
        wp, wq = vsub(p, c), vsub(q, c)
        cp, cq = angle_class(wp), angle_class(wq)
        if cp != cq:
            return -1 if cp < cq else 1
        s = dot(cross(wp, wq), normal)
        if s > 0:
            return -1
        if s < 0:
            return 1
        return 0

    return sorted(pts, key=cmp_to_key(cmp))


# ---------------------------------------------------------------------------
# Convex hull (incremental, exact)
# ---------------------------------------------------------------------------


def hull_from_vertices(points: Iterable[Sequence]) -> Polytope3:
    """Exact convex hull of >= 4 points spanning 3-space.

    Returns the hull with a minimal vertex list and merged (polygonal)
    facets.  Raises :class:`DegenerateInput` for flat point sets.
    """
    pts: List[Vec3] = []
    seen = set()
    for p in points:
        q = vec3(p)
        if q not in seen:
            seen.add(q)
            pts.append(q)
    if len(pts) < 4:
        raise DegenerateInput("need at least 4 distinct points")

    order = _initial_simplex(pts)
    if order is None:
        raise DegenerateInput("points are coplanar or collinear")
    i0, i1, i2, i3 = order
    ref = mean([pts[i0], pts[i1], pts[i2], pts[i3]])

    tris: List[tuple] = []  # (ia, ib, ic, normal, offset)

    def make_tri(ia: int, ib: int, ic: int) -> tuple:
        n = cross(vsub(pts[ib], pts[ia]), vsub(pts[ic], pts[ia]))
        off = dot(n, pts[ia])
        if dot(n, ref) > off:
            n = vscale(Rat(-1), n)
            off = -off
        return (ia, ib, ic, n, off)

    for tri in ((i0, i1, i2), (i0, i1, i3), (i0, i2, i3), (i1, i2, i3)):
        tris.append(make_tri(*tri))

    used = {i0, i1, i2, i3}
    for idx, p in enumerate(pts):
        if idx in used:
            continue
        visible = [t for t in tris if dot(t[3], p) > t[4]]
        if not visible:
            continue
        visible_set = set(id(t) for t in visible)
        edge_count: dict = {}
        for t in visible:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                e = (a, b) if a < b else (b, a)
                edge_count[e] = edge_count.get(e, 0) + 1
        horizon = [e for e, cnt in edge_count.items() if cnt == 1]
        tris = [t for t in tris if id(t) not in visible_set]
        for a, b in horizon:
            tris.append(make_tri(a, b, idx))

    # merge coplanar triangles into polygonal facets
    plane_map: dict = {}
    for t in tris:
        hs = HalfSpace(t[3], t[4])
        plane_map.setdefault(hs.key(), []).append(t)
    facets = []
    for key, group in sorted(plane_map.items()):
        nx, ny, nz, off = key
        facets.append(HalfSpace((Rat(nx), Rat(ny), Rat(nz)), Rat(off)))

    vert_idx = sorted({i for t in tris for i in t[:3]})
    vertices = []
    for i in vert_idx:
        v = pts[i]
        tights = [n for n, off in facets if dot(n, v) == off]
        if _rank(tights) == 3:
            vertices.append(v)
    return Polytope3(vertices, facets)


def _initial_simplex(pts: List[Vec3]) -> Optional[Tuple[int, int, int, int]]:
    i0 = 0
    i1 = next((i for i in range(len(pts)) if pts[i] != pts[i0]), None)
    if i1 is None:
        return None
    d = vsub(pts[i1], pts[i0])
    i2 = next(
        (i for i in range(len(pts)) if cross(d, vsub(pts[i], pts[i0])) != (0, 0, 0)),
        None,
    )
    if i2 is None:
        return None
    n = cross(d, vsub(pts[i2], pts[i0]))
    i3 = next(
        (i for i in range(len(pts)) if dot(n, vsub(pts[i], pts[i0])) != 0), None
    )
    if i3 is None:
        return None
    return i0, i1, i2, i3


# ---------------------------------------------------------------------------
# Half-space intersection (sequential clipping)
# ---------------------------------------------------------------------------

_BOX_BOUND = Rat(2) ** 24


def halfspace_intersection(facets: Iterable[HalfSpace]) -> IntersectionResult:
    """Enumerate the vertices of an intersection of half-spaces.

    Returns a full-dimensional :class:`Polytope3`, a
    :class:`LowerDimensional` body (touching intersection), or ``EMPTY``.
    Raises :class:`Unbounded` when the intersection reaches the internal
    bounding box (side 2^25).
    """
    hss = [HalfSpace(vec3(n), rat(off)) for n, off in facets]
    # deterministic processing order
    hss.sort(key=lambda h: h.key())

    B = _BOX_BOUND
    box = [
        halfspace((1, 0, 0), B),
        halfspace((-1, 0, 0), B),
        halfspace((0, 1, 0), B),
        halfspace((0, -1, 0), B),
        halfspace((0, 0, 1), B),
        halfspace((0, 0, -1), B),
    ]
    normals: List[Vec3] = [h.normal for h in box] + [h.normal for h in hss]
    verts: List[Vec3] = []
    tights: List[set] = []
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                verts.append((sx * B, sy * B, sz * B))
                t = set()
                t.add(0 if sx > 0 else 1)
                t.add(2 if sy > 0 else 3)
                t.add(4 if sz > 0 else 5)
                tights.append(t)

    for k, (n, off) in enumerate(hss):
        idx = 6 + k
        s = [off - dot(n, v) for v in verts]
        if all(x >= 0 for x in s):
            for v_i, x in enumerate(s):
                if x == 0:
                    tights[v_i].add(idx)
            continue
        keep_v: List[Vec3] = []
        keep_t: List[set] = []
        inside = [i for i, x in enumerate(s) if x > 0]
        on = [i for i, x in enumerate(s) if x == 0]
        outside = [i for i, x in enumerate(s) if x < 0]
        for i in inside:
            keep_v.append(verts[i])
            keep_t.append(tights[i])
        for i in on:
            keep_v.append(verts[i])
            keep_t.append(tights[i] | {idx})
        for i in inside:
            for j in outside:
                common = tights[i] & tights[j]
                if len(common) < 2:
                    continue
                if _rank([normals[c] for c in common]) < 2:
                    continue
                lam = s[i] / (s[i] - s[j])
                p = vadd(verts[i], vscale(lam, vsub(verts[j], verts[i])))
                keep_v.append(p)
                keep_t.append(common | {idx})
        if not keep_v:
            return EMPTY
        # merge duplicate points, unioning their tight sets
        merged: dict = {}
        for v, t in zip(keep_v, keep_t):
            if v in merged:
                merged[v] |= t
            else:
                merged[v] = set(t)
        verts = list(merged.keys())
        tights = [merged[v] for v in verts]

    if not verts:
        return EMPTY
    if any(any(c in (0, 1, 2, 3, 4, 5) for c in t) for t in tights):
        raise Unbounded("intersection reaches the internal bounding box")

    dim = _affine_rank(verts)
    if dim < 3:
        return LowerDimensional(sorted(verts), dim)

    # irredundant facet list
    facet_list: List[HalfSpace] = []
    seen_keys = set()
    for n, off in hss:
        key = HalfSpace(n, off).key()
        if key in seen_keys:
            continue
        tight = [v for v in verts if dot(n, v) == off]
        if len(tight) >= 3 and _affine_rank(tight) == 2:
            seen_keys.add(key)
            facet_list.append(HalfSpace(n, off))
    return Polytope3(sorted(verts), facet_list)


# ---------------------------------------------------------------------------
# Derived operations
# ---------------------------------------------------------------------------


def intersect(p: Polytope3, q: Polytope3) -> IntersectionResult:
    """Exact intersection; the result's volume is the pairwise overlap."""
    return halfspace_intersection(tuple(p.facets) + tuple(q.facets))


def _vertex_list(body) -> List[Vec3]:
    if isinstance(body, (Polytope3, LowerDimensional)):
        return list(body.vertices)
    return [vec3(body)]


def minkowski_sum(p: Polytope3, q) -> Polytope3:
    """Hull of pairwise vertex sums; `q` may be a single point."""
    qv = _vertex_list(q)
    if len(qv) == 1:
        shift = qv[0]
        return affine(p, 1, shift)
    sums = [vadd(a, b) for a in p.vertices for b in qv]
    return hull_from_vertices(sums)


def difference_body(k: Polytope3) -> Polytope3:
    """D(K) = {x - y : x, y in K}; centrally symmetric about the origin."""
    diffs = [vsub(a, b) for a in k.vertices for b in k.vertices]
    return hull_from_vertices(diffs)


def contains_polytope(outer: Polytope3, inner) -> bool:
    return all(outer.contains_point(v) for v in _vertex_list(inner))


def affine(p: Polytope3, scale, shift: Sequence = (0, 0, 0)) -> Polytope3:
    """{scale * x + shift : x in P} for scale > 0."""
    s = rat(scale)
    if s <= 0:
        raise NonPositiveScale(f"scale must be positive, got {scale}")
    t = vec3(shift)
    verts = [vadd(vscale(s, v), t) for v in p.vertices]
    facets = [HalfSpace(n, s * off + dot(n, t)) for n, off in p.facets]
    return Polytope3(verts, facets)


class MCVolume(NamedTuple):
    estimate: float
    sigma: float
    hits: int
    samples: int


def monte_carlo_volume(
    p: Polytope3, samples: int, seed: int, chunk: int = 1 << 18
) -> MCVolume:
    """Hit-ratio volume estimate over the bounding box, with standard error.

    The sample stream is keyed off (seed, chunk index) so chunked and
    serial evaluation agree and parallel workers could share the stream.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    verts, normals, offsets = p.as_float_arrays()
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    box_vol = float(np.prod(hi - lo))
    hits = 0
    done = 0
    k = 0
    while done < samples:
        n = min(chunk, samples - done)
        rng = np.random.default_rng([seed, k])
        pts = rng.uniform(lo, hi, size=(n, 3))
        inside = np.all(pts @ normals.T <= offsets, axis=1)
        hits += int(inside.sum())
        done += n
        k += 1
    frac = hits / samples
    est = box_vol * frac
    sigma = box_vol * float(np.sqrt(max(frac * (1 - frac), 1e-300) / samples))
    return MCVolume(est, sigma, hits, samples)


def volume_of(body) -> "Rat":
    """Volume of any intersection result (0 for empty / lower-dimensional)."""
    return body.volume()
