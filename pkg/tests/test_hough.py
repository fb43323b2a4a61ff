import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from houghface.errors import ConfigError, InvalidInputError
from houghface.hough import (HoughConfig, Peak, block_feature, hough_transform, peak_centroid,
                             round_half_away, select_nearest_two, top_peaks)

from oracles import hough_loop

blocks16 = arrays(np.uint8, (16, 16), elements=st.integers(0, 1))


def _dense(votes, offset, shape):
    out = np.zeros(shape, dtype=np.int64)
    for (i, j), v in votes.items():
        out[i, j] = v
    return out


def test_config_validation():
    with pytest.raises(ConfigError):
        HoughConfig(theta_step=0)
    with pytest.raises(ConfigError):
        HoughConfig(theta_bins=181)
    with pytest.raises(ConfigError):
        HoughConfig(rho_step=-1)


def test_accumulator_shape():
    acc = hough_transform(np.zeros((16, 16), np.uint8))
    # D = ceil(sqrt(2) * 16) = 23 -> 47 rho bins
    assert acc.votes.shape == (47, 180)
    assert acc.rho_offset == 23
    assert not acc.votes.any()


def _maxima(acc):
    return sorted((float(acc.rho_of(i)), float(acc.theta_of(j)))
                  for i, j in zip(*np.nonzero(acc.votes == acc.votes.max())))


def test_vertical_line_peak():
    b = np.zeros((16, 16), np.uint8)
    b[:, 5] = 1
    acc = hough_transform(b)
    assert acc.votes.max() == 16
    assert acc.cell(5, 0) == 16
    # 1-degree bins cannot separate the neighbours of the true angle for a 16-pixel line
    assert _maxima(acc) == [(5.0, -1.0), (5.0, 0.0), (5.0, 1.0)]


def test_diagonal_line_peak():
    acc = hough_transform(np.eye(16, dtype=np.uint8))
    assert acc.votes.max() == 16
    assert acc.cell(0, -45) == 16
    assert _maxima(acc) == [(0.0, -46.0), (0.0, -45.0), (0.0, -44.0)]


def test_rejects_non_square():
    with pytest.raises(InvalidInputError):
        hough_transform(np.zeros((4, 5), np.uint8))


def test_round_half_away():
    assert round_half_away([0.5, 1.5, -0.5, -1.5, 2.49, -2.51]).tolist() == [1, 2, -1, -2, 2, -3]


@given(blocks16)
def test_transform_matches_loop(b):
    acc = hough_transform(b)
    votes, offset = hough_loop(b.tolist())
    assert offset == acc.rho_offset
    np.testing.assert_array_equal(acc.votes, _dense(votes, offset, acc.votes.shape))


@given(blocks16)
def test_vote_conservation_and_bound(b):
    acc = hough_transform(b)
    white = int(b.sum())
    assert acc.votes.sum() == white * 180
    assert acc.votes.max(initial=0) <= white
    for p in top_peaks(acc, 16):
        assert 1 <= p.votes <= white
        assert abs(p.rho) <= math.ceil(math.sqrt(2) * 16)
        assert -90 <= p.theta < 90


@given(st.integers(4, 20), st.data())
def test_coarse_config_matches_loop(size, data):
    b = data.draw(arrays(np.uint8, (size, size), elements=st.integers(0, 1)))
    cfg = HoughConfig(theta_min=-90.0, theta_step=3.0, theta_bins=60, rho_step=2.0)
    acc = hough_transform(b, cfg)
    votes, offset = hough_loop(b.tolist(), -90.0, 3.0, 60, 2.0)
    np.testing.assert_array_equal(acc.votes, _dense(votes, offset, acc.votes.shape))


def test_top_peaks_empty_and_single():
    acc = hough_transform(np.zeros((16, 16), np.uint8))
    assert top_peaks(acc, 16) == []
    acc.votes[3, 7] = 2
    assert top_peaks(acc, 5) == [Peak(acc.rho_of(3), acc.theta_of(7), 2)]


@given(blocks16, st.integers(1, 40))
def test_top_peaks_matches_full_sort(b, m):
    acc = hough_transform(b)
    cells = [(int(acc.votes[i, j]), acc.rho_of(i), acc.theta_of(j))
             for i in range(acc.rho_bins) for j in range(acc.theta_bins) if acc.votes[i, j]]
    cells.sort(key=lambda c: (-c[0], c[1], c[2]))
    expected = [Peak(float(r), float(t), v) for v, r, t in cells[:m]]
    assert top_peaks(acc, m) == expected
    assert top_peaks(acc, m) == top_peaks(acc, m)


def test_top_peaks_rejects_zero_pool():
    with pytest.raises(ConfigError):
        top_peaks(hough_transform(np.ones((4, 4), np.uint8)), 0)


def test_centroid_examples():
    assert peak_centroid([Peak(7, 30, 1)]) == (7, 30)
    assert peak_centroid([Peak(0, 0, 1), Peak(10, 0, 1), Peak(20, 0, 1)]) == (10, 0)
    assert peak_centroid([Peak(3, -10, 1), Peak(5, 20, 1), Peak(10, 50, 1)]) == (6, 20)
    with pytest.raises(InvalidInputError):
        peak_centroid([])


def test_nearest_two_examples():
    a, b = Peak(1, 0, 3), Peak(9, 0, 3)
    assert select_nearest_two([b, a], (2, 0)) == [a, b]
    peaks = [Peak(0, 0, 5), Peak(10, 0, 5), Peak(20, 0, 5)]
    assert select_nearest_two(peaks[::-1], (10, 0)) == [Peak(10, 0, 5), Peak(0, 0, 5)]
    assert select_nearest_two([Peak(7, 30, 4)], (7, 30)) == [Peak(7, 30, 4)] * 2
    with pytest.raises(InvalidInputError):
        select_nearest_two([], (0, 0))


def test_nearest_two_prefers_more_votes_on_distance_tie():
    peaks = [Peak(0, 0, 2), Peak(20, 0, 9), Peak(10, 0, 1)]
    assert select_nearest_two(peaks, (10, 0))[1] == Peak(20, 0, 9)


@given(blocks16)
def test_nearest_two_are_the_two_smallest(b):
    peaks = top_peaks(hough_transform(b), 16)
    if not peaks:
        return
    c = peak_centroid(peaks)
    chosen = select_nearest_two(peaks, c)
    dists = sorted(math.hypot(p.rho - c[0], p.theta - c[1]) for p in peaks)
    got = [math.hypot(p.rho - c[0], p.theta - c[1]) for p in chosen]
    if len(peaks) == 1:
        assert got == [dists[0]] * 2
    else:
        assert got == dists[:2]


def test_block_feature_empty_block():
    assert block_feature(np.zeros((16, 16), np.uint8), 16) is None
