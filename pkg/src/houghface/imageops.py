"""Raster loading, normalization and the binary gradient map.

Images are plain numpy arrays indexed ``[row, column]`` (``[y, x]``):

* gray images are ``uint8`` arrays of shape ``(height, width)``
* gradient images are ``int32`` arrays with values in ``[0, 8 * 255]``
* binary images are ``uint8`` arrays holding only 0 and 1
"""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ConfigError, IngestionError, InputFormatError, InvalidInputError

DEFAULT_WIDTH = 92
DEFAULT_HEIGHT = 112
GRADIENT_MAX = 8 * 255

# (dy, dx) for N, NE, E, SE, S, SW, W, NW
NEIGHBORS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))

_LUMA = np.array([0.299, 0.587, 0.114])


def check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidInputError(f"gray image must be 2-D, got shape {img.shape}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise InvalidInputError(f"gray image has zero dimension {img.shape}")
    if img.dtype != np.uint8:
        if img.size and (img.min() < 0 or img.max() > 255):
            raise InvalidInputError("gray intensities must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def check_binary(img):
    img = np.asarray(img)
    if img.ndim != 2 or 0 in img.shape:
        raise InvalidInputError(f"binary image must be a non-empty 2-D array, got {img.shape}")
    if img.dtype == bool:
        return img.astype(np.uint8)
    if not np.isin(img, (0, 1)).all():
        raise InvalidInputError("binary image values must be exactly 0 or 1")
    return img.astype(np.uint8, copy=False)


def load_image(path):
    """Decode a PGM (P2/P5) or PNG file into a float or uint8 array.

    Color rasters come back as ``(h, w, 3)``; grayscale as ``(h, w)``.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("1", "L", "LA"):
                arr = np.asarray(im.convert("L"))
            elif mode.startswith("I"):
                # 16-bit gray
                arr = np.asarray(im, dtype=np.float64)
                top = 65535.0 if arr.max(initial=0) > 255 else 255.0
                arr = arr * (255.0 / top)
            else:
                arr = np.asarray(im.convert("RGB"))
    except FileNotFoundError:
        raise IngestionError(path, "no such file") from None
    except IsADirectoryError:
        raise IngestionError(path, "is a directory") from None
    except PermissionError:
        raise IngestionError(path, "permission denied") from None
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as exc:
        raise InputFormatError(path, f"cannot decode image ({exc})") from None
    return arr


def to_gray_float(raw):
    """Luma-weighted grayscale as float64 in [0, 255]."""
    arr = np.asarray(raw)
    if arr.dtype == bool:
        arr = arr.astype(np.float64) * 255.0
    elif arr.dtype == np.uint16:
        arr = arr.astype(np.float64) * (255.0 / 65535.0)
    else:
        arr = arr.astype(np.float64)
    if arr.ndim == 3:
        if arr.shape[2] in (3, 4):
            arr = arr[..., :3] @ _LUMA
        elif arr.shape[2] in (1, 2):
            arr = arr[..., 0]
        else:
            raise InvalidInputError(f"unsupported channel count {arr.shape[2]}")
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-D or 3-D raster, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError(f"image has zero dimension {arr.shape}")
    return np.clip(arr, 0.0, 255.0)


def _axis_weights(n_in, n_out):
    # pixel-center aligned sample positions
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = pos - lo
    return lo, hi, frac


def resize_bilinear(arr, width, height):
    """Bilinear resample of a 2-D float array to ``(height, width)``."""
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape
    if (h, w) == (height, width):
        return arr.copy()
    y0, y1, fy = _axis_weights(h, height)
    x0, x1, fx = _axis_weights(w, width)
    top = arr[y0][:, x0] * (1 - fx) + arr[y0][:, x1] * fx
    bottom = arr[y1][:, x0] * (1 - fx) + arr[y1][:, x1] * fx
    return top * (1 - fy)[:, None] + bottom * fy[:, None]


def normalize_input(raw, width=DEFAULT_WIDTH, height=DEFAULT_HEIGHT):
    """Turn any decodable raster (array, PIL image or path) into a gray image.

    Grayscale 8-bit input that already has the target size is returned as an
    unchanged copy; anything else goes through luma conversion and bilinear
    resampling, rounding half up.
    """
    if width <= 0 or height <= 0:
        raise ConfigError(f"target dimensions must be positive, got {width}x{height}")
    if isinstance(raw, (str, Path)):
        raw = load_image(raw)
    elif isinstance(raw, Image.Image):
        raw = np.asarray(raw.convert("RGB") if raw.mode not in ("L", "1") else raw.convert("L"))
    arr = np.asarray(raw)
    if arr.ndim == 2 and arr.dtype == np.uint8 and arr.shape == (height, width):
        return arr.copy()
    gray = to_gray_float(arr)
    out = resize_bilinear(gray, width, height)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def gradient_8dir(img):
    """Sum of absolute differences to the 8 compass neighbours.

    Neighbours outside the image contribute nothing.
    """
    img = check_gray(img)
    h, w = img.shape
    a = img.astype(np.int32)
    padded = np.pad(a, 1)
    inside = np.pad(np.ones((h, w), dtype=bool), 1)
    out = np.zeros((h, w), dtype=np.int32)
    for dy, dx in NEIGHBORS:
        nb = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        ok = inside[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        out += np.where(ok, np.abs(nb - a), 0)
    return out


def gradient_threshold(grad):
    """Midpoint of the mean and the median of the gradient values."""
    g = np.asarray(grad, dtype=np.float64)
    return (float(g.mean()) + float(np.median(g))) / 2.0


def binary_threshold(grad):
    grad = np.asarray(grad)
    if grad.ndim != 2 or 0 in grad.shape:
        raise InvalidInputError(f"gradient image must be a non-empty 2-D array, got {grad.shape}")
    if grad.min() < 0 or grad.max() > GRADIENT_MAX:
        raise InvalidInputError(f"gradient values must lie in [0, {GRADIENT_MAX}]")
    return (grad > gradient_threshold(grad)).astype(np.uint8)


def _dilate_axis(b, radius, axis):
    n = b.shape[axis]
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    p = np.pad(b, pad)
    out = np.zeros_like(b)
    for k in range(2 * radius + 1):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(k, k + n)
        out |= p[tuple(sl)]
    return out


def dilate_linear(binary, se_length=3):
    """Dilate with a horizontal then a vertical centred line element."""
    if int(se_length) != se_length or se_length < 1 or se_length % 2 == 0:
        raise ConfigError(f"se_length must be a positive odd integer, got {se_length}")
    b = check_binary(binary)
    r = int(se_length) // 2
    if r == 0:
        return b.copy()
    return _dilate_axis(_dilate_axis(b, r, axis=1), r, axis=0)


def binary_gradient_map(gray, se_length=3):
    """Gray image -> dilated binary gradient map (the block/Hough input)."""
    return dilate_linear(binary_threshold(gradient_8dir(gray)), se_length)


def write_pgm(path, arr, maxval=None, plain=False):
    """Write a 2-D non-negative integer array as PGM (P5, or P2 when ``plain``)."""
    a = np.asarray(arr)
    if a.ndim != 2:
        raise InvalidInputError("PGM data must be 2-D")
    a = a.astype(np.int64)
    if maxval is None:
        maxval = max(1, int(a.max(initial=0)))
    if not 0 < maxval < 65536 or a.min(initial=0) < 0 or a.max(initial=0) > maxval:
        raise InvalidInputError(f"PGM values must lie in [0, {maxval}] with maxval < 65536")
    h, w = a.shape
    header = f"{'P2' if plain else 'P5'}\n{w} {h}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if plain:
            for row in a:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
        elif maxval < 256:
            fh.write(a.astype(np.uint8).tobytes())
        else:
            fh.write(a.astype(">u2").tobytes())
