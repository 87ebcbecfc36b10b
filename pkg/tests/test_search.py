"""Annealing search and lattice density reporting."""

import pytest

from octacover import (
    InitialNotCovering,
    NotACovering,
    Rat,
    SearchParams,
    THETA_FLOOR,
    TranslateSet,
    certify_covering,
    covering_lattice_nine_eighths,
    lattice_density,
    lattice_start,
    minimize_density,
    parallelohedron_p,
    scaled_cell,
)


def test_params_validation():
    with pytest.raises(ValueError):
        SearchParams(iterations=-1)
    with pytest.raises(ValueError):
        SearchParams(step_decay=1.5)
    with pytest.raises(ValueError):
        SearchParams(temp_init=0)


def test_lattice_start_certifies():
    pts = lattice_start(Rat(1, 8))
    cert = certify_covering(pts, parallelohedron_p(), Rat(1, 8))
    assert cert.certified


def test_zero_iterations_returns_initial():
    trace = minimize_density(SearchParams(iterations=0, seed=1))
    assert trace.records == []
    assert trace.best_theta >= 1
    assert len(trace.best_translates) == trace.final_count


def test_initial_not_covering():
    with pytest.raises(InitialNotCovering):
        minimize_density(
            SearchParams(initial=TranslateSet([(0, 0, 0)]), iterations=10)
        )


def test_short_run_properties():
    trace = minimize_density(SearchParams(iterations=400, seed=5))
    # best proxy is the running minimum over accepted states
    assert trace.best_proxy <= trace.records[0].theta_proxy
    # the best state is still a certified covering
    cert = certify_covering(
        trace.best_translates, parallelohedron_p(), Rat(1, 8)
    )
    assert cert.certified
    # and its exact density respects the theorem floor
    assert trace.best_theta >= THETA_FLOOR


def test_determinism_same_seed():
    a = minimize_density(SearchParams(iterations=300, seed=9))
    b = minimize_density(SearchParams(iterations=300, seed=9))
    assert a.best_theta == b.best_theta
    assert a.csv_lines() == b.csv_lines()
    assert list(a.best_translates) == list(b.best_translates)


def test_different_seeds_differ():
    a = minimize_density(SearchParams(iterations=300, seed=1))
    b = minimize_density(SearchParams(iterations=300, seed=2))
    assert a.csv_lines() != b.csv_lines()


def test_lattice_density_exact():
    rep = lattice_density(covering_lattice_nine_eighths())
    assert rep.intrinsic == Rat(9, 8)
    assert rep.region_theta is None


def test_lattice_density_with_region():
    rep = lattice_density(
        covering_lattice_nine_eighths(), scaled_cell(1)
    )
    assert rep.region_theta == Rat(9, 8)


def test_lattice_density_denser_scale():
    rep = lattice_density(covering_lattice_nine_eighths().scaled(Rat(99, 100)))
    assert rep.intrinsic == Rat(9, 8) / Rat(99, 100) ** 3
    assert rep.intrinsic > Rat(9, 8)


def test_lattice_density_sparser_scale_not_covering():
    with pytest.raises(NotACovering):
        lattice_density(covering_lattice_nine_eighths().scaled(Rat(6, 5)))
