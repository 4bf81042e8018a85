import numpy as np
import pytest
from hypothesis import given, strategies as st

from geor.coords import ParseStatus, parse_strict
from geor.geodesy import GeoCoord, haversine_km
from geor.reward import composite_reward, distance_reward, format_reward


@pytest.mark.parametrize("d,expected", [
    (0, 1.0), (750, 0.5), (2500, 0.2), (20000, 0.0),
    (375, 0.75),
    (20015.09, 0.0),
    (1e9, 0.0),
])
def test_distance_reward_points(d, expected):
    assert distance_reward(d) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
def test_distance_reward_rejects(bad):
    with pytest.raises(ValueError):
        distance_reward(bad)


def test_branch_continuity():
    for knee, value in [(750.0, 0.5), (2500.0, 0.2)]:
        left = distance_reward(np.nextafter(knee, 0))
        right = distance_reward(np.nextafter(knee, np.inf))
        assert abs(left - value) < 1e-12 and abs(right - value) < 1e-12


def test_strictly_decreasing_grid():
    r = np.array([distance_reward(d) for d in range(0, 20001)])
    assert np.all(np.diff(r) < 0)


@given(st.floats(0, 1e6))
def test_range(d):
    assert 0.0 <= distance_reward(d) <= 1.0


def test_format_reward():
    assert format_reward("(48.8566, 2.3522)") == 1
    assert format_reward("I am unsure.") == 0
    assert format_reward("(10, 20) or (30, 40)") == 0


def test_composite_exact_hit():
    br = composite_reward("(48.8566, 2.3522)", GeoCoord(48.8566, 2.3522))
    assert (br.r_total, br.r_format, br.r_distance, br.distance_km) == (1.0, 1, 1.0, 0.0)


def test_composite_no_idea():
    br = composite_reward("no idea", GeoCoord(0, 0))
    assert br.r_format == 0 and br.r_total == 0.0
    assert br.distance_km is None and br.r_distance is None
    assert br.parse_status is ParseStatus.NO_PAIR_FOUND


def test_composite_paris_rome():
    # oracle: 40-digit spherical law of cosines gives 1105.2801487141 km
    br = composite_reward("(48.8566, 2.3522)", GeoCoord(41.9028, 12.4964))
    assert br.distance_km == pytest.approx(1105.2801487141, abs=1e-6)
    assert br.r_distance == pytest.approx(0.4390948316490, abs=1e-9)
    assert br.r_total == br.r_distance


def test_composite_accepts_tuple_truth():
    assert composite_reward("(1, 1)", (1, 1)).r_total == 1.0


@given(st.text())
def test_zero_product(text):
    br = composite_reward(text, GeoCoord(10, 10))
    if format_reward(text) == 0:
        assert br.r_total == 0.0
    else:
        c = parse_strict(text).coord
        assert br.r_total == distance_reward(haversine_km(c, GeoCoord(10, 10)))
    assert 0.0 <= br.r_total <= 1.0
