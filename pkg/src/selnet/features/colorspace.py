"""Color space conversions for 8-bit RGB tongue pixels.

Vectorized numpy implementations; the numba kernels in ``kernels.py`` carry
scalar twins of the same formulas.  Conventions:

* HSI: hue-geometry form, H in degrees [0, 360), S and I in [0, 1];
  achromatic pixels (S = 0) get H = 0.
* YCrCb: BT.601 full-range with 128 chroma offset, clamped to [0, 255].
* Lab: sRGB linearization, D65 XYZ, CIELAB; the white point is taken as
  the matrix row sums so pure white maps to exactly (100, 0, 0).
"""

import numpy as np

from ..errors import PreconditionError

# sRGB -> XYZ (D65, 2 degree observer)
_XYZ_M = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = _XYZ_M.sum(axis=1)  # row sums: white maps to L=100, a=b=0 exactly

_LAB_DELTA = 6.0 / 29.0


def rgb_to_hsi(r, g, b):
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    total = r + g + b
    intensity = total / (3.0 * 255.0)
    minimum = np.minimum(np.minimum(r, g), b)
    with np.errstate(invalid="ignore", divide="ignore"):
        saturation = np.where(total > 0, 1.0 - 3.0 * minimum / np.where(total > 0, total, 1.0), 0.0)
        num = 0.5 * ((r - g) + (r - b))
        den = np.sqrt((r - g) ** 2 + (r - b) * (g - b))
        theta = np.degrees(np.arccos(np.clip(num / np.where(den > 0, den, 1.0), -1.0, 1.0)))
    hue = np.where(b <= g, theta, 360.0 - theta)
    hue = np.where((saturation <= 0) | (den == 0), 0.0, hue)
    return hue % 360.0, saturation, intensity


def rgb_to_ycrcb(r, g, b):
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    return y, np.clip(cr, 0.0, 255.0), np.clip(cb, 0.0, 255.0)


def _srgb_linearize(c):
    return np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)


def _lab_f(t):
    cutoff = _LAB_DELTA**3
    return np.where(t > cutoff, np.cbrt(t), t / (3.0 * _LAB_DELTA**2) + 4.0 / 29.0)


def rgb_to_lab(r, g, b):
    rl = _srgb_linearize(np.asarray(r, dtype=np.float64) / 255.0)
    gl = _srgb_linearize(np.asarray(g, dtype=np.float64) / 255.0)
    bl = _srgb_linearize(np.asarray(b, dtype=np.float64) / 255.0)
    x = (_XYZ_M[0, 0] * rl + _XYZ_M[0, 1] * gl + _XYZ_M[0, 2] * bl) / _WHITE[0]
    y = (_XYZ_M[1, 0] * rl + _XYZ_M[1, 1] * gl + _XYZ_M[1, 2] * bl) / _WHITE[1]
    z = (_XYZ_M[2, 0] * rl + _XYZ_M[2, 1] * gl + _XYZ_M[2, 2] * bl) / _WHITE[2]
    fx, fy, fz = _lab_f(x), _lab_f(y), _lab_f(z)
    return 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)


def rgb_to_space(pixel, space: str):
    """Convert one (R, G, B) byte triple; returns the channel triple."""
    r, g, b = (float(c) for c in pixel)
    if space == "hsi":
        h, s, i = rgb_to_hsi(r, g, b)
    elif space == "ycrcb":
        h, s, i = rgb_to_ycrcb(r, g, b)
    elif space == "lab":
        h, s, i = rgb_to_lab(r, g, b)
    else:
        raise PreconditionError(f"unknown color space {space!r}")
    return float(h), float(s), float(i)


def convert_pixels(pixels: np.ndarray) -> np.ndarray:
    """(N, 3) uint8 RGB -> (N, 12) channels [R G B H S I Y Cr Cb L a b]."""
    r = pixels[:, 0].astype(np.float64)
    g = pixels[:, 1].astype(np.float64)
    b = pixels[:, 2].astype(np.float64)
    h, s, i = rgb_to_hsi(r, g, b)
    y, cr, cb = rgb_to_ycrcb(r, g, b)
    ll, la, lb = rgb_to_lab(r, g, b)
    return np.stack([r, g, b, h, s, i, y, cr, cb, ll, la, lb], axis=1)
