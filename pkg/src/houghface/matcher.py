"""Gated chi-square dissimilarity between face descriptors and nearest-class lookup."""

import math
from dataclasses import dataclass, field

import numpy as np

from .descriptor import PipelineConfig
from .errors import (CompatibilityError, ConfigError, DegenerateDescriptorError,
                     EncodingError)
from .hough import rho_limit


def chi_square(f1, f2):
    """Sum of ``(a - b)**2 / (a + b)**2``; terms with ``a + b == 0`` count 0."""
    a = np.asarray(f1, dtype=np.float64)
    b = np.asarray(f2, dtype=np.float64)
    if a.shape != b.shape:
        raise EncodingError(f"feature shapes differ: {a.shape} vs {b.shape}")
    if (a < 0).any() or (b < 0).any():
        raise EncodingError("chi-square features must be non-negative")
    return float(_chi_terms(a, b).sum())


def _chi_terms(a, b):
    # ratio first, then square: squaring a tiny sum would underflow to 0
    den = a + b
    out = np.zeros(np.broadcast(a, b).shape)
    np.divide(a - b, den, out=out, where=den > 0)
    return out * out


def chi_square_table(probe_feats, train_feats):
    """``(B_i, B_j)`` matrix of chi-square values between feature rows."""
    p = np.asarray(probe_feats, dtype=np.float64)[:, None, :]
    t = np.asarray(train_feats, dtype=np.float64)[None, :, :]
    return _chi_terms(p, t).sum(axis=2)


def block_gate(a, b, th1):
    if not th1 > 0:
        raise ConfigError(f"gate threshold must be positive, got {th1}")
    return math.hypot(a[0] - b[0], a[1] - b[1]) < th1


def encode_features(descriptor, cfg):
    """Per-entry 4-vectors ``(rho1', theta1', rho2', theta2')``, shifted non-negative.

    ``rho' = rho + rho_max`` and ``theta' = theta + 90``.
    """
    rho_max = math.ceil(rho_limit(cfg.block_size) / cfg.hough.rho_step) * cfg.hough.rho_step
    feats = np.array([[e.peak1.rho + rho_max, e.peak1.theta + 90.0,
                       e.peak2.rho + rho_max, e.peak2.theta + 90.0]
                      for e in descriptor.entries], dtype=np.float64).reshape(-1, 4)
    if (feats < 0).any():
        raise EncodingError(f"{descriptor.identifier or 'descriptor'}: peak outside the "
                            "encodable (rho, theta) range")
    return feats


def _origins(descriptor):
    return np.array([(e.x, e.y) for e in descriptor.entries], dtype=np.float64).reshape(-1, 2)


def check_compatible(a, b):
    if a.fingerprint != b.fingerprint:
        raise CompatibilityError(
            f"config fingerprint mismatch: {a.identifier or '?'} has {a.fingerprint}, "
            f"{b.identifier or '?'} has {b.fingerprint}")


def dissimilarity(probe, train, cfg=None, allow_mismatch=False):
    cfg = cfg or PipelineConfig()
    if not allow_mismatch:
        check_compatible(probe, train)
    if not probe.entries:
        raise DegenerateDescriptorError(f"probe {probe.identifier or '?'} has no blocks")
    if not train.entries:
        return float(cfg.empty_gate_penalty)
    chi = chi_square_table(encode_features(probe, cfg), encode_features(train, cfg))
    po, to = _origins(probe), _origins(train)
    dist = np.hypot(po[:, None, 0] - to[None, :, 0], po[:, None, 1] - to[None, :, 1])
    gated = dist < cfg.gate
    if cfg.aggregation == "min":
        per_block = np.where(gated, chi, np.inf).min(axis=1)
    else:
        per_block = np.where(gated, chi, -np.inf).max(axis=1)
    per_block = np.where(gated.any(axis=1), per_block, cfg.empty_gate_penalty)
    return float(per_block.mean())


@dataclass
class Gallery:
    entries: list = field(default_factory=list)    # (FaceDescriptor, class_id)

    def add(self, descriptor, class_id):
        if self.entries and descriptor.fingerprint != self.entries[0][0].fingerprint:
            raise CompatibilityError(
                f"gallery descriptors must share one fingerprint; "
                f"{descriptor.identifier or '?'} has {descriptor.fingerprint}")
        self.entries.append((descriptor, str(class_id)))

    def __len__(self):
        return len(self.entries)

    @property
    def fingerprint(self):
        return self.entries[0][0].fingerprint if self.entries else None


@dataclass
class MatchResult:
    class_id: str
    best_training_index: int
    distance: float
    per_gallery_distances: list


def classify(probe, gallery, cfg=None, allow_mismatch=False):
    cfg = cfg or PipelineConfig()
    if not len(gallery):
        raise ConfigError("cannot classify against an empty gallery")
    distances = [(idx, dissimilarity(probe, desc, cfg, allow_mismatch))
                 for idx, (desc, _) in enumerate(gallery.entries)]
    best, dist = min(distances, key=lambda item: (item[1], item[0]))
    return MatchResult(gallery.entries[best][1], best, dist, distances)
