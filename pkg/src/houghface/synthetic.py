"""Seeded line-drawing faces for tests, demos and smoke runs.

``line_face(identity, variant)`` draws an outline, brows, eyes, nose and
mouth whose geometry depends only on ``identity``; ``variant > 0`` adds a
small shift and pixel noise so different variants of one identity are
similar but not identical.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from .imageops import DEFAULT_HEIGHT, DEFAULT_WIDTH


def draw_line(img, x0, y0, x1, y1, value=255, thickness=1):
    n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
    xs = np.rint(np.linspace(x0, x1, 2 * n)).astype(int)
    ys = np.rint(np.linspace(y0, y1, 2 * n)).astype(int)
    h, w = img.shape
    r = thickness // 2
    for dy in range(-r, thickness - r):
        for dx in range(-r, thickness - r):
            xx, yy = xs + dx, ys + dy
            ok = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
            img[yy[ok], xx[ok]] = value


def draw_ellipse(img, cx, cy, rx, ry, value=255, segments=48):
    t = np.linspace(0, 2 * np.pi, segments + 1)
    px = cx + rx * np.cos(t)
    py = cy + ry * np.sin(t)
    for k in range(segments):
        draw_line(img, px[k], py[k], px[k + 1], py[k + 1], value)


def line_face(identity, variant=0, width=DEFAULT_WIDTH, height=DEFAULT_HEIGHT):
    g = np.random.default_rng([0x5EED, identity])
    bg = int(g.integers(20, 60))
    ink = int(g.integers(170, 250))
    img = np.full((height, width), bg, dtype=np.int32)
    sx, sy = width / DEFAULT_WIDTH, height / DEFAULT_HEIGHT

    cx, cy = 46 + g.uniform(-3, 3), 58 + g.uniform(-3, 3)
    draw_ellipse(img, cx * sx, cy * sy, g.uniform(28, 38) * sx, g.uniform(38, 48) * sy, ink)

    eye_y = cy - g.uniform(10, 18)
    eye_dx = g.uniform(11, 17)
    eye_w = g.uniform(4, 8)
    brow_tilt = g.uniform(-4, 4)
    brow_gap = g.uniform(5, 9)
    for side in (-1, 1):
        ex = cx + side * eye_dx
        draw_ellipse(img, ex * sx, eye_y * sy, eye_w * sx, g.uniform(2, 4) * sy, ink, 16)
        draw_line(img, (ex - eye_w - 1) * sx, (eye_y - brow_gap + side * brow_tilt / 2) * sy,
                  (ex + eye_w + 1) * sx, (eye_y - brow_gap - side * brow_tilt / 2) * sy,
                  ink, thickness=2)

    nose_top = eye_y + g.uniform(2, 5)
    nose_len = g.uniform(12, 20)
    nose_skew = g.uniform(-4, 4)
    draw_line(img, cx * sx, nose_top * sy, (cx + nose_skew) * sx, (nose_top + nose_len) * sy, ink)
    draw_line(img, (cx + nose_skew - g.uniform(3, 7)) * sx, (nose_top + nose_len) * sy,
              (cx + nose_skew + g.uniform(3, 7)) * sx, (nose_top + nose_len) * sy, ink)

    mouth_y = nose_top + nose_len + g.uniform(7, 12)
    mouth_w = g.uniform(8, 15)
    mouth_bend = g.uniform(-4, 4)
    draw_line(img, (cx - mouth_w) * sx, mouth_y * sy, cx * sx, (mouth_y + mouth_bend) * sy,
              ink, thickness=2)
    draw_line(img, cx * sx, (mouth_y + mouth_bend) * sy, (cx + mouth_w) * sx, mouth_y * sy,
              ink, thickness=2)

    if variant:
        v = np.random.default_rng([0xFACE, identity, variant])
        img = np.roll(img, (int(v.integers(-1, 2)), int(v.integers(-1, 2))), axis=(0, 1))
        img = img + v.normal(0, 2, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_demo_dataset(directory, identities=5, train_per_class=2, genuine_per_class=3,
                       impostors_per_class=1, fmt="pgm"):
    """Write a small PGM/PNG dataset plus ``manifest.txt``; returns the manifest path.

    Impostors for class ``c`` are genuine-style images of the next identity.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    per_class = train_per_class + genuine_per_class
    for ident in range(identities):
        for v in range(per_class):
            name = f"s{ident:02d}_{v:02d}.{fmt}"
            Image.fromarray(line_face(ident, v)).save(directory / name)
            role = "train" if v < train_per_class else "genuine"
            lines.append(f"s{ident:02d} {role} {name}")
    for ident in range(identities):
        for k in range(impostors_per_class):
            other = (ident + 1 + k) % identities
            if other == ident:
                continue
            v = train_per_class + k % max(genuine_per_class, 1)
            lines.append(f"s{ident:02d} impostor s{other:02d}_{v:02d}.{fmt}")
    manifest = directory / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
