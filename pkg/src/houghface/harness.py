"""Dataset manifests, the genuine/impostor protocol and its metrics.

Manifest lines are ``<class_id> <role> <path>`` with role one of ``train``,
``genuine`` or ``impostor``; relative paths resolve against the manifest's
directory. Every genuine or impostor probe is identified against the gallery
built from all train records (closed set, no distance threshold). A genuine
probe predicted as its own class is a TP, otherwise a FN. An impostor probe
assigned to class ``c`` is a FP when predicted as ``c``, otherwise a TN.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import NamedTuple

from .descriptor import PipelineConfig, extract_descriptor, read_descriptor, write_descriptor
from .errors import EmptyReportError, ParseError
from .matcher import Gallery, classify

log = logging.getLogger(__name__)

ROLES = ("train", "genuine", "impostor")
GALLERY_INDEX = "gallery.txt"


class ManifestRecord(NamedTuple):
    class_id: str
    role: str
    path: Path


@dataclass
class DatasetManifest:
    records: list

    def by_role(self, role):
        return [r for r in self.records if r.role == role]

    def classes(self):
        return sorted({r.class_id for r in self.records})


def parse_manifest(text, base_dir=Path("."), source=None):
    records = []
    seen = {}
    first_test_line = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) != 3:
            raise ParseError("expected '<class_id> <role> <path>'", lineno, source)
        class_id, role, rel = parts
        if role not in ROLES:
            raise ParseError(f"unknown role {role!r} (expected one of {', '.join(ROLES)})",
                             lineno, source)
        path = Path(rel)
        if not path.is_absolute():
            path = Path(base_dir) / path
        key = (class_id, role, str(path))
        if key in seen:
            raise ParseError(f"duplicate record (first seen on line {seen[key]})", lineno, source)
        seen[key] = lineno
        if role != "train":
            first_test_line.setdefault(class_id, lineno)
        records.append(ManifestRecord(class_id, role, path))
    trained = {r.class_id for r in records if r.role == "train"}
    for class_id, lineno in sorted(first_test_line.items(), key=lambda kv: kv[1]):
        if class_id not in trained:
            raise ParseError(f"class {class_id!r} has test records but no train record",
                             lineno, source)
    return DatasetManifest(records)


def load_manifest(path):
    path = Path(path)
    return parse_manifest(path.read_text(), path.parent, str(path))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Percentages; ``None`` where the ratio's denominator is zero."""
    sensitivity: float | None
    specificity: float | None
    accuracy: float | None
    false_positive_rate: float | None
    false_negative_rate: float | None


def metrics(c):
    if c.total == 0:
        raise EmptyReportError("all confusion counts are zero")
    sens = 100.0 * c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    spc = 100.0 * c.tn / (c.fp + c.tn) if c.fp + c.tn else None
    acc = 100.0 * (c.tp + c.tn) / c.total
    return MetricsReport(
        sensitivity=sens,
        specificity=spc,
        accuracy=acc,
        false_positive_rate=None if spc is None else 100.0 - spc,
        false_negative_rate=None if sens is None else 100.0 - sens,
    )


def format_percent(value):
    """Two decimals, round half up."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


REPORT_METRICS = (("sensitivity", "sensitivity"), ("specificity", "specificity"),
                  ("accuracy", "accuracy"), ("fpr", "false_positive_rate"),
                  ("fnr", "false_negative_rate"))


def format_report(counts, report=None):
    """Machine-readable ``key: value`` lines; undefined ratios are omitted."""
    report = report or metrics(counts)
    lines = [f"{k}: {getattr(counts, k)}" for k in ("tp", "fp", "tn", "fn")]
    for key, attr in REPORT_METRICS:
        value = getattr(report, attr)
        if value is not None:
            lines.append(f"{key}: {format_percent(value)}")
    return "\n".join(lines) + "\n"


def format_table(counts, report=None):
    report = report or metrics(counts)

    def pct(v):
        return "n/a" if v is None else f"{format_percent(v)}%"

    rows = [
        ("", "genuine", "impostor"),
        ("accepted", f"TP = {counts.tp}", f"FP = {counts.fp}"),
        ("rejected", f"FN = {counts.fn}", f"TN = {counts.tn}"),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    out = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    out.append("")
    out.append(f"sensitivity          {pct(report.sensitivity)}")
    out.append(f"specificity          {pct(report.specificity)}")
    out.append(f"accuracy             {pct(report.accuracy)}")
    out.append(f"false positive rate  {pct(report.false_positive_rate)}")
    out.append(f"false negative rate  {pct(report.false_negative_rate)}")
    return "\n".join(out) + "\n"


def parse_counts(text, source=None):
    """Read a ``key: value`` confusion fixture (tp, fp, tn, fn)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition(":"))
        if not sep:
            raise ParseError(f"expected 'key: value', got {raw.strip()!r}", lineno, source)
        if key not in ("tp", "fp", "tn", "fn"):
            # metric lines of a previous report are ignored
            continue
        try:
            values[key] = int(value)
        except ValueError:
            raise ParseError(f"bad count {value!r} for {key!r}", lineno, source) from None
        if values[key] < 0:
            raise ParseError(f"negative count for {key!r}", lineno, source)
    missing = [k for k in ("tp", "fp", "tn", "fn") if k not in values]
    if missing:
        raise ParseError(f"missing counts: {', '.join(missing)}", None, source)
    return ConfusionCounts(**values)


class Trial(NamedTuple):
    class_id: str
    role: str
    path: Path
    predicted: str | None
    distance: float | None

    @property
    def accepted(self):
        return self.predicted == self.class_id


def _extract(args):
    path, cfg = args
    return extract_descriptor(path, cfg, identifier=str(path))


def extract_many(paths, cfg, jobs=1):
    """Descriptors for ``paths`` in order; ``jobs > 1`` uses worker processes."""
    work = [(p, cfg) for p in paths]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_extract, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_extract(w) for w in work]


def build_gallery(manifest, cfg, jobs=1):
    train = manifest.by_role("train")
    gallery = Gallery()
    for rec, desc in zip(train, extract_many([r.path for r in train], cfg, jobs)):
        gallery.add(desc, rec.class_id)
    return gallery


def evaluate_trials(manifest, cfg=None, jobs=1, gallery=None):
    """Classify every genuine/impostor record; one :class:`Trial` per record."""
    cfg = cfg or PipelineConfig()
    if gallery is None:
        gallery = build_gallery(manifest, cfg, jobs)
    probes = [r for r in manifest.records if r.role != "train"]
    trials = []
    for rec, desc in zip(probes, extract_many([r.path for r in probes], cfg, jobs)):
        if not desc.entries:
            log.warning("%s: no significant blocks, counted as a miss", rec.path)
            trials.append(Trial(rec.class_id, rec.role, rec.path, None, None))
            continue
        result = classify(desc, gallery, cfg)
        trials.append(Trial(rec.class_id, rec.role, rec.path, result.class_id, result.distance))
    return trials


def tally(trials):
    tp = fp = tn = fn = 0
    for t in trials:
        if t.role == "genuine":
            if t.accepted:
                tp += 1
            else:
                fn += 1
        elif t.role == "impostor":
            if t.accepted:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def evaluate(manifest, cfg=None, jobs=1):
    return tally(evaluate_trials(manifest, cfg, jobs))


def save_gallery(gallery, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    index = []
    for k, (desc, class_id) in enumerate(gallery.entries):
        name = f"{k:05d}.hfd"
        write_descriptor(desc, directory / name)
        index.append(f"{class_id} {name}")
    (directory / GALLERY_INDEX).write_text("".join(line + "\n" for line in index))


def load_gallery(directory):
    directory = Path(directory)
    index = directory / GALLERY_INDEX
    gallery = Gallery()
    for lineno, raw in enumerate(index.read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected '<class_id> <file>'", lineno, str(index))
        gallery.add(read_descriptor(directory / parts[1]), parts[0])
    return gallery


def orl_manifest_text(root, train_per_class=2, impostors_per_class=5):
    """Manifest text for an ORL/AT&T tree (``s1/1.pgm`` ... ``s40/10.pgm``).

    The first ``train_per_class`` images of every subject train, the rest are
    genuine probes. Impostors of subject ``k`` are image ``train_per_class + 1``
    of the next ``impostors_per_class`` subjects, cyclically.
    """
    root = Path(root)
    subjects = sorted((d for d in root.iterdir() if d.is_dir() and d.name[1:].isdigit()),
                      key=lambda d: int(d.name[1:]))
    if not subjects:
        raise ParseError(f"no subject directories (s1, s2, ...) under {root}")
    images = {}
    for d in subjects:
        files = sorted((f for f in d.iterdir() if f.suffix.lower() in (".pgm", ".png")),
                       key=lambda f: (len(f.stem), f.stem))
        images[d.name] = files
    lines = []
    names = [d.name for d in subjects]
    for name in names:
        for k, f in enumerate(images[name]):
            role = "train" if k < train_per_class else "genuine"
            lines.append(f"{name} {role} {f.resolve()}")
    for i, name in enumerate(names):
        for k in range(1, impostors_per_class + 1):
            other = names[(i + k) % len(names)]
            if other == name or len(images[other]) <= train_per_class:
                continue
            lines.append(f"{name} impostor {images[other][train_per_class].resolve()}")
    return "\n".join(lines) + "\n"
