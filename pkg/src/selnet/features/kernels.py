"""Hot per-pixel kernels: numba loops with pure-numpy twins.

The public names (``glcm_counts``, ``color_channel_sums``) bind to one of
the two implementations at import time according to ``selnet.backend``.
Both twins are importable directly for parity tests and benchmarks.
"""

import math

import numpy as np

from .. import backend
from ..backend import njit
from . import colorspace

# ---------------------------------------------------------------------------
# gray-level co-occurrence counting
# ---------------------------------------------------------------------------

def glcm_counts_numpy(levels, region, offsets, n_levels: int) -> np.ndarray:
    """Symmetric co-occurrence counts over pairs fully inside the region."""
    h, w = levels.shape
    counts = np.zeros(n_levels * n_levels, dtype=np.float64)
    for di, dj in offsets:
        i0, i1 = max(0, -di), h - max(0, di)
        j0, j1 = max(0, -dj), w - max(0, dj)
        if i0 >= i1 or j0 >= j1:
            continue
        src = (slice(i0, i1), slice(j0, j1))
        dst = (slice(i0 + di, i1 + di), slice(j0 + dj, j1 + dj))
        pair = region[src] & region[dst]
        a = levels[src][pair].astype(np.int64)
        b = levels[dst][pair].astype(np.int64)
        if a.size:
            counts += np.bincount(a * n_levels + b, minlength=counts.size)
            counts += np.bincount(b * n_levels + a, minlength=counts.size)
    return counts.reshape(n_levels, n_levels)


def _glcm_counts_loop(levels, region, offsets, n_levels):
    h, w = levels.shape
    counts = np.zeros((n_levels, n_levels), dtype=np.float64)
    for i in range(h):
        for j in range(w):
            if not region[i, j]:
                continue
            a = levels[i, j]
            for k in range(offsets.shape[0]):
                ni = i + offsets[k, 0]
                nj = j + offsets[k, 1]
                if 0 <= ni < h and 0 <= nj < w and region[ni, nj]:
                    b = levels[ni, nj]
                    counts[a, b] += 1.0
                    counts[b, a] += 1.0
    return counts


# ---------------------------------------------------------------------------
# twelve-channel color sums (R G B H S I Y Cr Cb L a b)
# ---------------------------------------------------------------------------

def color_channel_sums_numpy(pixels: np.ndarray) -> np.ndarray:
    """Sum each of the 12 color channels over (N, 3) uint8 RGB pixels."""
    return colorspace.convert_pixels(pixels).sum(axis=0)


# same white point as the vectorized path (matrix row sums)
_W0 = float(colorspace._WHITE[0])
_W1 = float(colorspace._WHITE[1])
_W2 = float(colorspace._WHITE[2])


def _srgb_linearize_scalar(c):
    if c > 0.04045:
        return ((c + 0.055) / 1.055) ** 2.4
    return c / 12.92


def _lab_f_scalar(t):
    delta = 6.0 / 29.0
    if t > delta * delta * delta:
        return t ** (1.0 / 3.0)
    return t / (3.0 * delta * delta) + 4.0 / 29.0


def _color_sums_loop(pixels):
    sums = np.zeros(12, dtype=np.float64)
    for n in range(pixels.shape[0]):
        r = float(pixels[n, 0])
        g = float(pixels[n, 1])
        b = float(pixels[n, 2])

        total = r + g + b
        intensity = total / 765.0
        mn = min(r, min(g, b))
        if total > 0.0:
            sat = 1.0 - 3.0 * mn / total
        else:
            sat = 0.0
        num = 0.5 * ((r - g) + (r - b))
        den = math.sqrt((r - g) * (r - g) + (r - b) * (g - b))
        if sat <= 0.0 or den == 0.0:
            hue = 0.0
        else:
            c = num / den
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            theta = math.degrees(math.acos(c))
            hue = theta if b <= g else 360.0 - theta
            hue = hue % 360.0

        y = 0.299 * r + 0.587 * g + 0.114 * b
        cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
        cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
        cr = min(max(cr, 0.0), 255.0)
        cb = min(max(cb, 0.0), 255.0)

        rl = _srgb_linearize_scalar(r / 255.0)
        gl = _srgb_linearize_scalar(g / 255.0)
        bl = _srgb_linearize_scalar(b / 255.0)
        x = (0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl) / _W0
        yy = (0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl) / _W1
        z = (0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl) / _W2
        fx = _lab_f_scalar(x)
        fy = _lab_f_scalar(yy)
        fz = _lab_f_scalar(z)

        sums[0] += r
        sums[1] += g
        sums[2] += b
        sums[3] += hue
        sums[4] += sat
        sums[5] += intensity
        sums[6] += y
        sums[7] += cr
        sums[8] += cb
        sums[9] += 116.0 * fy - 16.0
        sums[10] += 500.0 * (fx - fy)
        sums[11] += 200.0 * (fy - fz)
    return sums


if backend.HAVE_NUMBA:
    _srgb_linearize_scalar = njit(cache=True)(_srgb_linearize_scalar)
    _lab_f_scalar = njit(cache=True)(_lab_f_scalar)
    glcm_counts_numba = njit(cache=True)(_glcm_counts_loop)
    color_channel_sums_numba = njit(cache=True)(_color_sums_loop)
else:  # pragma: no cover - only without numba installed
    glcm_counts_numba = _glcm_counts_loop
    color_channel_sums_numba = _color_sums_loop

if backend.USE_NUMBA:
    glcm_counts = glcm_counts_numba
    color_channel_sums = color_channel_sums_numba
else:
    glcm_counts = glcm_counts_numpy
    color_channel_sums = color_channel_sums_numpy
