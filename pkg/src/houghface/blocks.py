"""Random significant-block selection over a binary gradient map.

Candidates are square windows whose top-left corners are drawn uniformly
from a numpy ``PCG64`` generator seeded with the caller's seed: the whole
x sequence is drawn first, then the whole y sequence. A candidate is kept
when its white fraction beats the image's global white fraction and its
white count beats every already-kept block it overlaps (those are evicted).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, InvalidInputError
from .imageops import check_binary


class Block(NamedTuple):
    x: int
    y: int
    size: int
    white_count: int


def _span_overlap(a, alen, b, blen):
    return a < b + blen and b < a + alen


def blocks_overlap(a, b):
    return _span_overlap(a.x, a.size, b.x, b.size) and _span_overlap(a.y, a.size, b.y, b.size)


@dataclass(frozen=True)
class BlockSet:
    blocks: tuple
    width: int
    height: int

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def area(self):
        return sum(b.size * b.size for b in self.blocks)


class SummedAreaTable:
    """Inclusive-exclusive prefix sums: ``table[j, i]`` counts ``[0, i) x [0, j)``."""

    def __init__(self, binary):
        b = check_binary(binary)
        self.height, self.width = b.shape
        self.table = np.zeros((self.height + 1, self.width + 1), dtype=np.int64)
        np.cumsum(np.cumsum(b, axis=0, dtype=np.int64), axis=1, out=self.table[1:, 1:])

    def query(self, x, y, w, h):
        """Set pixels in columns ``[x, x+w)`` and rows ``[y, y+h)``."""
        if x < 0 or y < 0 or w < 0 or h < 0 or x + w > self.width or y + h > self.height:
            raise InvalidInputError(
                f"rectangle ({x}, {y}, {w}, {h}) outside {self.width}x{self.height} table")
        t = self.table
        return int(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def square_counts(self, xs, ys, size):
        """Vectorised white counts for many ``size`` x ``size`` windows."""
        t = self.table
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        return t[ys + size, xs + size] - t[ys, xs + size] - t[ys + size, xs] + t[ys, xs]

    def total(self):
        return int(self.table[-1, -1])


def build_sat(binary):
    return SummedAreaTable(binary)


def white_fraction(sat, block):
    count = sat.query(block.x, block.y, block.size, block.size)
    return count / (block.size * block.size)


def target_block_count(width, height, block_size, target_fraction):
    """Rounded (half up) share of the tiling count ``floor(W/s) * floor(H/s)``."""
    tiles = (width // block_size) * (height // block_size)
    return int(math.floor(target_fraction * tiles + 0.5))


def draw_candidates(rng_seed, num_candidates, width, height, block_size):
    """Top-left corners of the candidate stream, as two int arrays (xs, ys)."""
    if rng_seed < 0:
        raise ConfigError(f"rng_seed must be non-negative, got {rng_seed}")
    rng = np.random.default_rng(rng_seed)
    xs = rng.integers(0, width - block_size + 1, size=num_candidates)
    ys = rng.integers(0, height - block_size + 1, size=num_candidates)
    return xs, ys


def _check_params(shape, block_size, num_candidates, target_fraction):
    height, width = shape
    if block_size < 1:
        raise ConfigError(f"block_size must be >= 1, got {block_size}")
    if block_size > min(width, height):
        raise ConfigError(f"block_size {block_size} larger than image {width}x{height}")
    if num_candidates < 1:
        raise ConfigError(f"num_candidates must be >= 1, got {num_candidates}")
    if not 0 < target_fraction <= 1:
        raise ConfigError(f"target_fraction must lie in (0, 1], got {target_fraction}")


def trim_to_target(blocks, n_target):
    """Keep the ``n_target`` whitest blocks (ties: smaller (y, x)); sort by (y, x)."""
    ranked = sorted(blocks, key=lambda b: (-b.white_count, b.y, b.x))
    return sorted(ranked[:n_target], key=lambda b: (b.y, b.x))


class _CoverMap:
    """Per-corner maximum white count of the kept blocks a candidate would overlap.

    ``cover[y, x] == -1`` means a block at ``(x, y)`` overlaps nothing kept.
    """

    def __init__(self, width, height, size):
        self.size = size
        self.nx = width - size + 1
        self.ny = height - size + 1
        self.cover = np.full((self.ny, self.nx), -1, dtype=np.int64)
        self.kept = {}

    def _window(self, x, y):
        s = self.size
        return (max(0, x - s + 1), min(self.nx, x + s), max(0, y - s + 1), min(self.ny, y + s))

    def admit(self, x, y, count):
        s = self.size
        evicted = [(kx, ky) for (kx, ky) in self.kept if abs(kx - x) < s and abs(ky - y) < s]
        for key in evicted:
            del self.kept[key]
        self.kept[(x, y)] = count
        # refresh the union of the influence windows of every changed corner
        wins = [self._window(cx, cy) for cx, cy in evicted + [(x, y)]]
        x0 = min(w[0] for w in wins)
        x1 = max(w[1] for w in wins)
        y0 = min(w[2] for w in wins)
        y1 = max(w[3] for w in wins)
        region = self.cover[y0:y1, x0:x1]
        region.fill(-1)
        for (kx, ky), c in self.kept.items():
            wx0, wx1, wy0, wy1 = self._window(kx, ky)
            ix0, ix1 = max(wx0, x0), min(wx1, x1)
            iy0, iy1 = max(wy0, y0), min(wy1, y1)
            if ix0 < ix1 and iy0 < iy1:
                sub = self.cover[iy0:iy1, ix0:ix1]
                np.maximum(sub, c, out=sub)


def select_significant_blocks(binary, block_size=16, num_candidates=500_000,
                              target_fraction=0.25, rng_seed=0):
    b = check_binary(binary)
    _check_params(b.shape, block_size, num_candidates, target_fraction)
    height, width = b.shape
    sat = SummedAreaTable(b)
    area = block_size * block_size
    significance = sat.total() / (width * height)

    xs, ys = draw_candidates(rng_seed, num_candidates, width, height, block_size)
    counts = sat.square_counts(xs, ys, block_size)
    # criterion (a) is state-free, so it can be applied to the whole stream up front
    passing = counts / area > significance
    xs, ys, counts = xs[passing], ys[passing], counts[passing]

    cover = _CoverMap(width, height, block_size)
    n = counts.size
    i = 0
    chunk = 64
    while i < n:
        end = min(i + chunk, n)
        wins = counts[i:end] > cover.cover[ys[i:end], xs[i:end]]
        hit = np.flatnonzero(wins)
        if hit.size == 0:
            i = end
            chunk = min(chunk * 2, 65536)
            continue
        j = i + int(hit[0])
        cover.admit(int(xs[j]), int(ys[j]), int(counts[j]))
        i = j + 1
        chunk = 64

    kept = [Block(x, y, block_size, c) for (x, y), c in cover.kept.items()]
    n_target = target_block_count(width, height, block_size, target_fraction)
    return BlockSet(tuple(trim_to_target(kept, n_target)), width, height)
