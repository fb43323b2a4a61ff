import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from houghface.descriptor import (DescriptorEntry, FaceDescriptor, PipelineConfig, dump_config,
                                  extract_descriptor, extract_stages, format_descriptor,
                                  parse_config, parse_descriptor, read_descriptor,
                                  write_descriptor)
from houghface.errors import ConfigError, ParseError
from houghface.hough import Peak
from houghface.imageops import dilate_linear, binary_threshold, gradient_8dir


def box_image():
    img = np.full((112, 92), 30, np.uint8)
    img[40, 30:60] = img[69, 30:60] = 220
    img[40:70, 30] = img[40:70, 59] = 220
    return img


peaks = st.builds(Peak,
                  st.integers(-23, 23).map(float),
                  st.integers(-90, 89).map(float),
                  st.integers(1, 300))
entries = st.builds(DescriptorEntry, st.integers(0, 76), st.integers(0, 96), peaks, peaks)
descriptors = st.builds(
    FaceDescriptor,
    st.text(st.characters(whitelist_categories=("L", "N"), whitelist_characters="/._-"),
            max_size=20),
    st.text("0123456789abcdef", min_size=16, max_size=16),
    st.lists(entries, max_size=12).map(tuple))


# config

def test_default_config():
    cfg = PipelineConfig()
    assert (cfg.width, cfg.height, cfg.block_size, cfg.num_candidates) == (92, 112, 16, 500000)
    assert cfg.pool == 16 and cfg.gate == 16.0
    assert cfg.aggregation == "min" and cfg.empty_gate_penalty == 1000.0


@pytest.mark.parametrize("changes", [
    dict(se_length=2), dict(block_size=0), dict(block_size=93), dict(num_candidates=0),
    dict(target_fraction=0), dict(peak_pool=0), dict(th1=0.0), dict(aggregation="mean"),
    dict(rng_seed=-1), dict(theta_step=0.0),
])
def test_config_rejects(changes):
    with pytest.raises(ConfigError):
        PipelineConfig().replace(**changes)


def test_config_text_round_trip():
    cfg = PipelineConfig().replace(block_size=12, th1=20.0, aggregation="max", theta_step=2.0,
                                   theta_bins=90, rng_seed=7)
    assert parse_config(dump_config(cfg)) == cfg
    assert parse_config(dump_config(PipelineConfig())) == PipelineConfig()


def test_config_parse_errors():
    with pytest.raises(ParseError, match="line 2"):
        parse_config("block_size = 8\nbogus = 1\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_config("block_size 8\n")
    with pytest.raises(ParseError):
        parse_config("block_size = eight\n")
    cfg = parse_config("# comment\n\nblock_size = 8   # inline\npeak_pool = auto\n")
    assert cfg.block_size == 8 and cfg.peak_pool is None


GRID = [
    dict(), dict(width=90), dict(height=110), dict(se_length=5), dict(block_size=12),
    dict(num_candidates=1000), dict(target_fraction=0.2), dict(peak_pool=8),
    dict(theta_min=-80.0), dict(theta_step=0.5), dict(theta_bins=120), dict(rho_step=2.0),
    dict(rng_seed=1), dict(rng_seed=2**63),
]


def test_fingerprint_distinct_over_grid():
    fps = [PipelineConfig().replace(**g).fingerprint() for g in GRID]
    assert len(set(fps)) == len(fps)


def test_fingerprint_ignores_matching_settings():
    base = PipelineConfig()
    for change in (dict(aggregation="max"), dict(th1=30.0), dict(empty_gate_penalty=5.0)):
        assert base.replace(**change).fingerprint() == base.fingerprint()


# file format

def test_empty_descriptor_round_trip():
    d = FaceDescriptor("img", "0123456789abcdef", ())
    text = format_descriptor(d)
    assert text == "HFD1 0123456789abcdef 0\nimage img\n"
    assert parse_descriptor(text) == d


def test_two_entry_round_trip(tmp_path):
    d = FaceDescriptor("a b.pgm", "ffff", (
        DescriptorEntry(3, 4, Peak(5.0, -45.0, 12), Peak(-2.0, 10.0, 9)),
        DescriptorEntry(40, 60, Peak(0.0, 0.0, 16), Peak(0.0, 0.0, 16)),
    ))
    path = tmp_path / "d.hfd"
    write_descriptor(d, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    assert lines[2] == "3 4 5.0 -45.0 12 -2.0 10.0 9"
    assert read_descriptor(path) == d
    buf = io.StringIO()
    write_descriptor(d, buf)
    buf.seek(0)
    assert read_descriptor(buf) == d


@given(descriptors)
def test_round_trip_property(d):
    assert parse_descriptor(format_descriptor(d)) == d


def test_truncated_file_reports_line():
    text = "HFD1 abcd 3\nimage x\n1 2 3.0 4.0 5 6.0 7.0 8\n1 2 3.0 4.0 5 6.0 7.0 8\n"
    with pytest.raises(ParseError, match="line 5") as exc:
        parse_descriptor(text)
    assert exc.value.line == 5


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("HFD1 abcd\nimage x\n", 1),
    ("HFD2 abcd 0\nimage x\n", 1),
    ("HFD1 abcd x\nimage x\n", 1),
    ("HFD1 abcd 0\n", 2),
    ("HFD1 abcd 1\nimage x\n1 2 3.0 4.0 5 6.0 7.0\n", 3),
    ("HFD1 abcd 1\nimage x\n1 2 3.0 4.0 five 6.0 7.0 8\n", 3),
    ("HFD1 abcd 0\nimage x\n1 2 3.0 4.0 5 6.0 7.0 8\n", 3),
])
def test_malformed_files(text, line):
    with pytest.raises(ParseError) as exc:
        parse_descriptor(text)
    assert exc.value.line == line


def test_version_mismatch_message():
    with pytest.raises(ParseError, match="version mismatch"):
        parse_descriptor("HFD7 abcd 0\nimage x\n")


# extraction

def test_constant_image_gives_empty_descriptor():
    d = extract_descriptor(np.full((112, 92), 128, np.uint8))
    assert d.entries == () and d.feature_size == 0


def test_box_image_blocks_sit_on_edge_band():
    img = box_image()
    cfg = PipelineConfig(num_candidates=50000)
    dil = dilate_linear(binary_threshold(gradient_8dir(img)), cfg.se_length)
    s = cfg.block_size
    sig = dil.mean()
    admissible = {(x, y) for y in range(112 - s + 1) for x in range(92 - s + 1)
                  if dil[y:y + s, x:x + s].sum() / s ** 2 > sig}
    d = extract_descriptor(img, cfg)
    assert 0 < len(d.entries) <= 9
    for e in d.entries:
        assert (e.x, e.y) in admissible
        assert dil[e.y:e.y + s, e.x:e.x + s].any()
        # the box outline spans columns 30..59 and rows 40..69, dilated by one pixel
        assert e.x < 61 and e.x + s > 29 and e.y < 71 and e.y + s > 39


def test_extraction_deterministic_bytes():
    img = box_image()
    cfg = PipelineConfig(num_candidates=20000, rng_seed=9)
    a = format_descriptor(extract_descriptor(img, cfg, "box"))
    b = format_descriptor(extract_descriptor(img, cfg, "box"))
    assert a == b


def test_entries_follow_blocks():
    img = box_image()
    cfg = PipelineConfig(num_candidates=20000)
    st_ = extract_stages(img, cfg)
    assert [(e.x, e.y) for e in st_.entries] == [(b.x, b.y) for b in st_.blocks]
    for e in st_.entries:
        assert e.peak1.votes >= 1 and e.peak2.votes >= 1


def test_extraction_resizes_input():
    big = np.kron(box_image(), np.ones((2, 2), np.uint8))
    d = extract_descriptor(big, PipelineConfig(num_candidates=20000))
    assert all(0 <= e.x <= 92 - 16 and 0 <= e.y <= 112 - 16 for e in d.entries)
