"""Pipeline configuration, descriptor extraction and the ``.hfd`` text format.

A descriptor file looks like::

    HFD1 <config-fingerprint> <n>
    image <identifier>
    x y rho1 theta1 votes1 rho2 theta2 votes2     (n lines)

Floats are written with ``repr`` so reading them back is bit-exact.
"""

import dataclasses
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import blocks as _blocks
from .errors import ConfigError, ParseError
from .hough import HoughConfig, Peak, block_feature
from .imageops import (DEFAULT_HEIGHT, DEFAULT_WIDTH, binary_threshold, dilate_linear,
                       gradient_8dir, normalize_input)

MAGIC = "HFD"
VERSION = 1

AGGREGATIONS = ("min", "max")


@dataclass(frozen=True)
class PipelineConfig:
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    se_length: int = 3
    block_size: int = 16
    num_candidates: int = 500_000
    target_fraction: float = 0.25
    peak_pool: int | None = None          # None -> block_size
    hough: HoughConfig = field(default_factory=HoughConfig)
    rng_seed: int = 0
    th1: float | None = None              # None -> block_size
    aggregation: str = "min"
    empty_gate_penalty: float = 1000.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"target dimensions must be positive, got {self.width}x{self.height}")
        if self.se_length < 1 or self.se_length % 2 == 0:
            raise ConfigError(f"se_length must be a positive odd integer, got {self.se_length}")
        if self.block_size < 1:
            raise ConfigError(f"block_size must be >= 1, got {self.block_size}")
        if self.block_size > min(self.width, self.height):
            raise ConfigError(
                f"block_size {self.block_size} larger than image {self.width}x{self.height}")
        if self.num_candidates < 1:
            raise ConfigError(f"num_candidates must be >= 1, got {self.num_candidates}")
        if not 0 < self.target_fraction <= 1:
            raise ConfigError(f"target_fraction must lie in (0, 1], got {self.target_fraction}")
        if self.peak_pool is not None and self.peak_pool < 1:
            raise ConfigError(f"peak_pool must be >= 1, got {self.peak_pool}")
        if self.rng_seed < 0 or self.rng_seed >= 2**64:
            raise ConfigError(f"rng_seed must be a 64-bit unsigned value, got {self.rng_seed}")
        if self.th1 is not None and not self.th1 > 0:
            raise ConfigError(f"th1 must be positive, got {self.th1}")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {AGGREGATIONS}, got {self.aggregation!r}")
        if not self.empty_gate_penalty >= 0:
            raise ConfigError("empty_gate_penalty must be non-negative")

    @property
    def pool(self):
        return self.block_size if self.peak_pool is None else self.peak_pool

    @property
    def gate(self):
        return float(self.block_size if self.th1 is None else self.th1)

    def replace(self, **changes):
        hough_keys = {f.name for f in dataclasses.fields(HoughConfig)}
        hough_changes = {k: changes.pop(k) for k in list(changes) if k in hough_keys}
        if hough_changes:
            changes["hough"] = dataclasses.replace(self.hough, **hough_changes)
        return dataclasses.replace(self, **changes)

    def as_items(self):
        """Flat ``(key, value)`` pairs in file order."""
        items = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "hough":
                items.extend((h.name, getattr(value, h.name)) for h in dataclasses.fields(value))
            else:
                items.append((f.name, value))
        return items

    def fingerprint(self):
        """Hash of every setting that changes descriptor contents."""
        keys = EXTRACTION_KEYS
        text = "".join(f"{k}={_fmt_value(v)}\n" for k, v in self.as_items() if k in keys)
        text += f"resolved_pool={self.pool}\n"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


EXTRACTION_KEYS = frozenset({
    "width", "height", "se_length", "block_size", "num_candidates", "target_fraction",
    "peak_pool", "theta_min", "theta_step", "theta_bins", "rho_step", "rng_seed",
})

_INT_KEYS = {"width", "height", "se_length", "block_size", "num_candidates", "theta_bins",
             "rng_seed", "peak_pool"}
_FLOAT_KEYS = {"target_fraction", "theta_min", "theta_step", "rho_step", "th1",
               "empty_gate_penalty"}
_OPTIONAL_KEYS = {"peak_pool", "th1"}


def _fmt_value(v):
    if v is None:
        return "auto"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg):
    return "".join(f"{k} = {_fmt_value(v)}\n" for k, v in cfg.as_items())


def parse_config(text, source=None, base=None):
    """Parse flat ``key = value`` text on top of ``base`` (default config)."""
    base = base or PipelineConfig()
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key or not value:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if key in changes:
            raise ParseError(f"duplicate key {key!r}", lineno, source)
        try:
            if key in _OPTIONAL_KEYS and value == "auto":
                changes[key] = None
            elif key in _INT_KEYS:
                changes[key] = int(value)
            elif key in _FLOAT_KEYS:
                changes[key] = float(value)
            elif key == "aggregation":
                changes[key] = value
            else:
                raise ParseError(f"unknown config key {key!r}", lineno, source)
        except ValueError:
            raise ParseError(f"bad value {value!r} for {key!r}", lineno, source) from None
    return base.replace(**changes)


def load_config(path, base=None):
    path = Path(path)
    return parse_config(path.read_text(), source=str(path), base=base)


class DescriptorEntry(NamedTuple):
    x: int
    y: int
    peak1: Peak
    peak2: Peak


@dataclass(frozen=True)
class FaceDescriptor:
    identifier: str
    fingerprint: str
    entries: tuple = ()

    def __len__(self):
        return len(self.entries)

    @property
    def feature_size(self):
        return 2 * len(self.entries)


class Stages(NamedTuple):
    gray: np.ndarray
    gradient: np.ndarray
    binary: np.ndarray
    dilated: np.ndarray
    blocks: "_blocks.BlockSet"
    entries: tuple


def extract_stages(img, cfg=None):
    """Run the whole pipeline and keep every intermediate product."""
    cfg = cfg or PipelineConfig()
    gray = normalize_input(img, cfg.width, cfg.height)
    grad = gradient_8dir(gray)
    binary = binary_threshold(grad)
    dilated = dilate_linear(binary, cfg.se_length)
    selected = _blocks.select_significant_blocks(
        dilated, cfg.block_size, cfg.num_candidates, cfg.target_fraction, cfg.rng_seed)
    s = cfg.block_size
    entries = []
    for b in selected:
        feat = block_feature(dilated[b.y:b.y + s, b.x:b.x + s], cfg.pool, cfg.hough)
        if feat is None:
            continue
        entries.append(DescriptorEntry(b.x, b.y, feat[0], feat[1]))
    return Stages(gray, grad, binary, dilated, selected, tuple(entries))


def extract_descriptor(img, cfg=None, identifier=""):
    cfg = cfg or PipelineConfig()
    stages = extract_stages(img, cfg)
    return FaceDescriptor(_clean_identifier(identifier), cfg.fingerprint(), stages.entries)


def _clean_identifier(identifier):
    return " ".join(str(identifier).split())


def format_descriptor(d):
    lines = [f"{MAGIC}{VERSION} {d.fingerprint} {len(d.entries)}",
             f"image {d.identifier}".rstrip()]
    for e in d.entries:
        p, q = e.peak1, e.peak2
        lines.append(f"{e.x} {e.y} {float(p.rho)!r} {float(p.theta)!r} {p.votes} "
                     f"{float(q.rho)!r} {float(q.theta)!r} {q.votes}")
    return "\n".join(lines) + "\n"


def write_descriptor(d, sink):
    text = format_descriptor(d)
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


def parse_descriptor(text, source=None):
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty descriptor file", 1, source)
    head = lines[0].split()
    if len(head) != 3 or not head[0].startswith(MAGIC):
        raise ParseError("malformed header, expected 'HFD1 <fingerprint> <n>'", 1, source)
    if head[0] != f"{MAGIC}{VERSION}":
        raise ParseError(f"version mismatch: got {head[0]!r}, expected '{MAGIC}{VERSION}'",
                         1, source)
    fingerprint = head[1]
    try:
        n = int(head[2])
    except ValueError:
        raise ParseError(f"bad entry count {head[2]!r}", 1, source) from None
    if n < 0:
        raise ParseError(f"negative entry count {n}", 1, source)
    if len(lines) < 2 or not (lines[1] == "image" or lines[1].startswith("image ")):
        raise ParseError("missing 'image <identifier>' line", 2, source)
    identifier = lines[1][6:]
    entries = []
    for k in range(n):
        lineno = k + 3
        if lineno > len(lines):
            raise ParseError(f"truncated: expected {n} entries, found {k}", lineno, source)
        parts = lines[lineno - 1].split()
        if len(parts) != 8:
            raise ParseError(f"expected 8 fields, got {len(parts)}", lineno, source)
        try:
            x, y = int(parts[0]), int(parts[1])
            p1 = Peak(float(parts[2]), float(parts[3]), int(parts[4]))
            p2 = Peak(float(parts[5]), float(parts[6]), int(parts[7]))
        except ValueError:
            raise ParseError("non-numeric entry field", lineno, source) from None
        entries.append(DescriptorEntry(x, y, p1, p2))
    for extra in range(n + 2, len(lines)):
        if lines[extra].strip():
            raise ParseError(f"unexpected content after {n} entries", extra + 1, source)
    return FaceDescriptor(identifier, fingerprint, tuple(entries))


def read_descriptor(source):
    if isinstance(source, (str, Path)):
        path = Path(source)
        return parse_descriptor(path.read_text(), str(path))
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return parse_descriptor(source.read())
    raise TypeError(f"cannot read a descriptor from {type(source).__name__}")
