"""Deterministic raster output: binary PPM (P6), optional PNG, and escape-time renderers."""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from . import kernels
from .fatou import GridSpec
from .poly import ComplexPolynomial

BOUNDED = (0, 0, 0)
UNDECIDED = (128, 128, 128)
BASIN_COLORS = ((40, 90, 200), (200, 60, 60), (60, 170, 80), (220, 180, 40))


def write_ppm(path: str | os.PathLike, rgb: np.ndarray) -> None:
    img = np.ascontiguousarray(rgb, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected an (height, width, 3) array")
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("only 8-bit binary PPM (P6) is supported")
    w, h = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos + 1)
    return pixels.reshape(h, w, 3).copy()


def write_png(path: str | os.PathLike, rgb: np.ndarray) -> None:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - optional extra
        raise RuntimeError("PNG output needs Pillow (pip install limitlab[png])") from exc
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), "RGB").save(path)


def escape_palette(steps: np.ndarray, max_iter: int) -> np.ndarray:
    t = np.sqrt(np.clip(steps, 0, max_iter) / max(max_iter, 1))
    r = 255 * np.clip(1.5 * t, 0, 1)
    g = 255 * np.clip(1.5 * t - 0.5, 0, 1)
    b = 255 * np.clip(0.4 + t, 0, 1)
    return np.stack([r, g, b], axis=-1).astype(np.uint8)


def render_julia(p: ComplexPolynomial, grid: GridSpec, max_iter: int = 256) -> np.ndarray:
    """Escaping pixels by escape time; pixels bounded for the whole budget in BOUNDED."""
    pts = grid.points()
    st, steps, _ = kernels.poly_classify(p.array, pts.ravel(), p.escape_radius(), max_iter)
    img = escape_palette(steps.reshape(pts.shape), max_iter)
    img[st.reshape(pts.shape) != 1] = BOUNDED
    return img


def render_basin(params, grid: GridSpec, y: complex | None = None,
                 budget: int = 300) -> np.ndarray:
    """Slice {y = const} of the Hénon phase space (default: y of the attracting fixed point)."""
    from .henon import attracting_fixed_point, basin_grid

    if y is None:
        y = attracting_fixed_point(params).point[1]
    st, steps, which = basin_grid(params, grid.points(), y, budget)
    img = escape_palette(steps, budget)
    img[st == 0] = UNDECIDED
    for i in np.unique(which[st == 2]):
        img[(st == 2) & (which == i)] = BASIN_COLORS[int(i) % len(BASIN_COLORS)]
    return img


__all__ = ["write_ppm", "read_ppm", "write_png", "render_julia", "render_basin", "escape_palette",
           "BOUNDED", "UNDECIDED", "BASIN_COLORS"]
