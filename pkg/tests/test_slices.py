"""Slice squares, bad height windows, good heights."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from octacover import (
    HeightMismatch,
    NoFeasibleHeight,
    Rat,
    T_MAX,
    T_MIN,
    bad_height_set,
    delta_product,
    find_good_height,
    slice_at,
)


def test_slice_at_center():
    s = slice_at((0, 0, 0), 0)
    assert s.t == 2
    assert s.delta == 1
    assert s.area() == 8
    assert s.center_uv == (0, 0)


def test_slice_at_rotated_frame():
    s = slice_at((1, 2, 0), 0)
    assert s.center_uv == (3, -1)


def test_slice_existence_window():
    assert slice_at((0, 0, 0), Rat(5, 2)) is None
    assert slice_at((0, 0, 0), -3) is None
    top = slice_at((0, 0, 0), 2)
    assert top.t == 0 and top.area() == 0


def test_delta_sign():
    below = slice_at((0, 0, 5), 4)
    above = slice_at((0, 0, 5), 6)
    at = slice_at((0, 0, 5), 5)
    assert below.delta == 1
    assert above.delta == -1
    assert at.delta == 1
    below2 = slice_at((0, 0, 6), 4)
    assert delta_product(below, below2) == 1
    above2 = slice_at((0, 0, 3), 4)
    assert delta_product(below, above2) == -1


def test_delta_product_requires_same_height():
    with pytest.raises(HeightMismatch):
        delta_product(slice_at((0, 0, 0), 0), slice_at((0, 0, 0), 1))


def test_side_window_thresholds():
    assert T_MIN == Rat(1, 27)
    assert T_MAX == Rat(53, 27)
    s = slice_at((0, 0, 0), 2 - Rat(1, 27))
    assert s.t == T_MIN and s.in_side_window()
    s = slice_at((0, 0, 0), 2 - Rat(1, 28))
    assert not s.in_side_window()


def test_bad_height_measure_is_4_27():
    for x in [(0, 0, 0), (Rat(1, 3), -2, Rat(7, 5))]:
        windows = bad_height_set(x)
        assert len(windows) == 3
        assert sum(w.length() for w in windows) == Rat(4, 27)


def test_slice_area_integral_is_volume():
    """Exact piecewise-quadratic integration of 2t(z)^2 over [z-2, z+2]."""
    z_c = Rat(7, 3)

    def area(z):
        t = 2 - abs(z - z_c)
        return 2 * t * t

    total = Rat(0)
    for a, b in [(z_c - 2, z_c), (z_c, z_c + 2)]:
        m = (a + b) / 2
        total += (b - a) * (area(a) + 4 * area(m) + area(b)) / 6
    assert total == Rat(32, 3)


def test_good_height_single_translate():
    assert find_good_height([(0, 0, 0)]) == -1


def test_good_height_avoids_all_bad_windows():
    pts = [(0, 0, 0), (1, 0, Rat(1, 2)), (0, 1, -1), (2, 2, Rat(3, 4))]
    z0 = find_good_height(pts)
    for x in pts:
        s = slice_at(x, z0)
        if s is not None:
            assert s.in_side_window()


def test_good_height_infeasible():
    # middle bad windows (z - 1/27, z + 1/27) tile the anchor's range
    blockers = [
        (i, 0, Rat(-54 + 2 * k + 1, 27)) for k, i in zip(range(54), range(54))
    ]
    with pytest.raises(NoFeasibleHeight):
        find_good_height(blockers + [(0, 0, 0)])


@given(
    st.integers(min_value=-32, max_value=32),
    st.integers(min_value=-64, max_value=64),
)
def test_slice_t_matches_height_gap(zc16, z016):
    z_c = Rat(zc16, 16)
    z0 = Rat(z016, 16)
    s = slice_at((0, 0, z_c), z0)
    if abs(z0 - z_c) > 2:
        assert s is None
    else:
        assert s.t == 2 - abs(z0 - z_c)
        assert s.t >= 0
        assert s.delta == (1 if z0 <= z_c else -1)
