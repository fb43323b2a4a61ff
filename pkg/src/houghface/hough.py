"""Standard Hough transform of a square binary block and peak selection."""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, InvalidInputError
from .imageops import check_binary


@dataclass(frozen=True)
class HoughConfig:
    theta_min: float = -90.0
    theta_step: float = 1.0
    theta_bins: int = 180
    rho_step: float = 1.0

    def __post_init__(self):
        if not self.theta_step > 0:
            raise ConfigError(f"theta_step must be positive, got {self.theta_step}")
        if self.theta_bins < 1:
            raise ConfigError(f"theta_bins must be >= 1, got {self.theta_bins}")
        if self.theta_bins * self.theta_step > 180 + 1e-9:
            raise ConfigError("theta_bins * theta_step must not exceed 180 degrees")
        if not self.rho_step > 0:
            raise ConfigError(f"rho_step must be positive, got {self.rho_step}")

    def thetas(self):
        """Bin-centre angles in degrees."""
        return [self.theta_min + j * self.theta_step for j in range(self.theta_bins)]


def rho_limit(block_size):
    return math.ceil(math.sqrt(2) * block_size)


def trig_tables(cfg):
    # math.cos/sin on exact radians keeps every caller on bit-identical factors
    rad = [math.radians(t) for t in cfg.thetas()]
    return np.array([math.cos(r) for r in rad]), np.array([math.sin(r) for r in rad])


def round_half_away(values):
    v = np.asarray(values, dtype=np.float64)
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class HoughAccumulator:
    votes: np.ndarray        # (rho_bins, theta_bins) int64
    rho_offset: int
    cfg: HoughConfig

    @property
    def rho_bins(self):
        return self.votes.shape[0]

    @property
    def theta_bins(self):
        return self.votes.shape[1]

    def rho_of(self, i):
        return (i - self.rho_offset) * self.cfg.rho_step

    def theta_of(self, j):
        return self.cfg.theta_min + j * self.cfg.theta_step

    def cell(self, rho, theta):
        """Vote count of the bin whose centre is (rho, theta)."""
        i = int(round_half_away(rho / self.cfg.rho_step)) + self.rho_offset
        j = int(round((theta - self.cfg.theta_min) / self.cfg.theta_step))
        return int(self.votes[i, j])


class Peak(NamedTuple):
    rho: float
    theta: float
    votes: int


def hough_transform(block, cfg=None):
    """Vote every set pixel (block-local x, y) into each theta column."""
    cfg = cfg or HoughConfig()
    b = check_binary(block)
    if b.shape[0] != b.shape[1]:
        raise InvalidInputError(f"Hough block must be square, got {b.shape}")
    offset = math.ceil(rho_limit(b.shape[0]) / cfg.rho_step)
    votes = np.zeros((2 * offset + 1, cfg.theta_bins), dtype=np.int64)
    ys, xs = np.nonzero(b)
    if xs.size == 0:
        return HoughAccumulator(votes, offset, cfg)
    cos_t, sin_t = trig_tables(cfg)
    rho = xs[:, None] * cos_t[None, :] + ys[:, None] * sin_t[None, :]
    rows = round_half_away(rho / cfg.rho_step) + offset
    cols = np.broadcast_to(np.arange(cfg.theta_bins), rows.shape)
    np.add.at(votes, (rows.ravel(), cols.ravel()), 1)
    return HoughAccumulator(votes, offset, cfg)


def top_peaks(acc, m):
    """Up to ``m`` non-zero cells by votes desc, then rho asc, then theta asc."""
    if m < 1:
        raise ConfigError(f"peak pool size must be >= 1, got {m}")
    ri, ti = np.nonzero(acc.votes)
    if ri.size == 0:
        return []
    v = acc.votes[ri, ti]
    # rows grow with rho and columns with theta, so indices sort like the values
    order = np.lexsort((ti, ri, -v))[:m]
    return [Peak(float(acc.rho_of(ri[k])), float(acc.theta_of(ti[k])), int(v[k])) for k in order]


def peak_centroid(peaks):
    """Single-cluster k-means centre, i.e. the mean (rho, theta)."""
    if not peaks:
        raise InvalidInputError("centroid of an empty peak list")
    n = len(peaks)
    return (math.fsum(p.rho for p in peaks) / n, math.fsum(p.theta for p in peaks) / n)


def select_nearest_two(peaks, centroid):
    if not peaks:
        raise InvalidInputError("cannot select peaks from an empty list")
    rc, tc = centroid
    ranked = sorted(peaks, key=lambda p: (math.hypot(p.rho - rc, p.theta - tc),
                                          -p.votes, p.rho, p.theta))
    if len(ranked) == 1:
        return [ranked[0], ranked[0]]
    return ranked[:2]


def block_feature(block, m, cfg=None):
    """Two centroid-nearest peaks of a block, or ``None`` for an empty block."""
    peaks = top_peaks(hough_transform(block, cfg), m)
    if not peaks:
        return None
    return select_nearest_two(peaks, peak_centroid(peaks))
