"""Domain bodies: octahedron, cell, lattice, translate sets."""

import pytest

from octacover import (
    DuplicateTranslate,
    Rat,
    TranslateSet,
    affine,
    contains_polytope,
    covering_lattice_nine_eighths,
    lattice_points_near,
    neighbor_lemma_check,
    neighbor_set,
    octahedron,
    octahedron_at,
    parallelohedron_p,
    verify_basic_facts,
    verify_lattice_covering_exact,
    volume_of,
    voronoi_cell,
)
from octacover.ratmath import vec3


def test_basic_facts_all_pass():
    results = verify_basic_facts()
    assert len(results) >= 5
    for r in results:
        assert r.passed, f"{r.name}: {r.computed} != {r.expected}"


def test_octahedron_is_l1_ball():
    c = octahedron()
    assert c.contains_point((2, 0, 0))
    assert c.contains_point((Rat(2, 3), Rat(2, 3), Rat(2, 3)))
    assert not c.contains_point((Rat(2, 3), Rat(2, 3), 1))


def test_octahedron_at_translate_and_scale():
    c = octahedron_at((1, 0, 0), scale=Rat(1, 2))
    assert c.volume() == Rat(32, 3) / 8
    assert c.contains_point((1, 0, 0))
    assert c.contains_point((0, 0, 0))  # boundary point, closed body
    assert not c.contains_point((Rat(-1, 4), 0, 0))


def test_lemma_boundary_case():
    res = neighbor_lemma_check((4, 0, 0))
    assert res["intersects"]
    assert res["contained_in_3C3"]


def test_lemma_non_intersecting():
    res = neighbor_lemma_check((5, 0, 0))
    assert not res["intersects"]


def test_lemma_matches_polytope_oracle():
    big = affine(octahedron(), 3)
    for x in [(4, 0, 0), (1, 1, 1), (Rat(7, 2), Rat(1, 2), 0), (0, 0, 0)]:
        res = neighbor_lemma_check(x)
        assert res["contained_in_3C3"] == contains_polytope(
            big, octahedron_at(x)
        )


def test_translate_set_rejects_duplicates():
    with pytest.raises(DuplicateTranslate):
        TranslateSet([(0, 0, 0), (1, 0, 0), (Rat(0), 0, 0)])


def test_translate_set_json_round_trip():
    ts = TranslateSet([(Rat(1, 3), -2, 0), (0, 0, Rat(5, 7))])
    back = TranslateSet.from_json(ts.to_json())
    assert list(back) == list(ts)


def test_neighbor_set_anchor_last():
    ts = TranslateSet([(0, 0, 0), (3, 0, 0), (10, 0, 0), (1, 1, 0)])
    ns = neighbor_set(ts, 0)
    assert ns[len(ns) - 1] == vec3((0, 0, 0))
    assert vec3((10, 0, 0)) not in list(ns)
    assert vec3((3, 0, 0)) in list(ns)


def test_lattice_determinant_and_density():
    basis = covering_lattice_nine_eighths()
    assert abs(basis.determinant) == Rat(256, 27)
    assert Rat(32, 3) / abs(basis.determinant) == Rat(9, 8)


def test_voronoi_cell_volume_equals_determinant():
    basis = covering_lattice_nine_eighths()
    cell = voronoi_cell(basis)
    assert volume_of(cell) == abs(basis.determinant)


def test_lattice_covering_proof_exact():
    basis = covering_lattice_nine_eighths()
    assert verify_lattice_covering_exact(basis)
    # the covering is tight: any expansion stops covering
    assert not verify_lattice_covering_exact(basis.scaled(Rat(11, 10)))
    # and any shrink still covers
    assert verify_lattice_covering_exact(basis.scaled(Rat(9, 10)))


def test_fundamental_cell_volume():
    basis = covering_lattice_nine_eighths()
    assert basis.fundamental_cell().volume() == abs(basis.determinant)


def test_lattice_points_near_cover_margin():
    basis = covering_lattice_nine_eighths()
    region = parallelohedron_p()
    pts = lattice_points_near(basis, region, margin=2)
    assert len(pts) > 100
    lo, hi = region.bounding_box()
    for x in pts:
        # inside the margin-expanded bounding box of the region
        assert all(lo[k] - 2 <= x[k] <= hi[k] + 2 for k in range(3))


def test_parallelohedron_contains_4c3():
    assert contains_polytope(parallelohedron_p(), affine(octahedron(), 4))
    assert not contains_polytope(
        parallelohedron_p(), affine(octahedron(), Rat(9, 2))
    )
