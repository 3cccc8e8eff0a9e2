"""Kernel dispatch: compiled Cython core when importable, numpy fallback otherwise.

Set ``LIMITLAB_PURE=1`` to force the fallback and ``LIMITLAB_THREADS`` to cap
the number of worker threads used for large batches.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

_backend = _pykernels
BACKEND = "python"
if not os.environ.get("LIMITLAB_PURE"):
    try:
        from . import _ckernels as _backend  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _backend = _pykernels

_CHUNK = 1 << 14


def backend_module(name: str | None = None):
    """Return the kernel module by name ("cython", "python") or the active one."""
    if name is None:
        return _backend
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def worker_count() -> int:
    raw = os.environ.get("LIMITLAB_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            return max(1, min(int(raw), cap))
        except ValueError:
            pass
    return cap


def _run_chunked(fn, n: int, backend) -> None:
    bounds = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]
    workers = worker_count()
    if backend is _pykernels or workers == 1 or len(bounds) == 1:
        for lo, hi in bounds:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda b: fn(*b), bounds))


def poly_classify(coeffs, z0, radius: float, max_iter: int, attractors=(), eps: float = 1e-9,
                  backend: str | None = None):
    """Classify polynomial orbits starting at the points ``z0``.

    Returns ``(status, steps, which)`` arrays; status 0 = undecided, 1 = escaped
    at ``steps``, 2 = within ``eps`` of ``attractors[which]`` at ``steps``.
    """
    mod = backend_module(backend)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z0 = np.ascontiguousarray(np.ravel(z0), dtype=np.complex128)
    att = np.ascontiguousarray(np.ravel(attractors), dtype=np.complex128)
    n = z0.shape[0]
    status = np.zeros(n, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int32)
    which = np.zeros(n, dtype=np.int32)

    def run(lo, hi):
        mod.poly_classify(coeffs, z0[lo:hi], float(radius), int(max_iter), att, float(eps),
                          status[lo:hi], steps[lo:hi], which[lo:hi])

    _run_chunked(run, n, mod)
    return status, steps, which


def henon_classify(coeffs, a: complex, x0, y0, radius: float, max_iter: int, fixed=(),
                   eps: float = 1e-9, backend: str | None = None):
    """Classify Hénon orbits of (p(x) - a*y, x); ``fixed`` is a sequence of (x, y) targets."""
    mod = backend_module(backend)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    x0 = np.ascontiguousarray(np.ravel(x0), dtype=np.complex128)
    y0 = np.ascontiguousarray(np.broadcast_to(np.ravel(y0), x0.shape), dtype=np.complex128)
    fixed = list(fixed)
    fx = np.ascontiguousarray([f[0] for f in fixed], dtype=np.complex128)
    fy = np.ascontiguousarray([f[1] for f in fixed], dtype=np.complex128)
    n = x0.shape[0]
    status = np.zeros(n, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int32)
    which = np.zeros(n, dtype=np.int32)

    def run(lo, hi):
        mod.henon_classify(coeffs, complex(a), x0[lo:hi], y0[lo:hi], float(radius), int(max_iter),
                           fx, fy, float(eps), status[lo:hi], steps[lo:hi], which[lo:hi])

    _run_chunked(run, n, mod)
    return status, steps, which


def track_nearest(roots, start: complex, backend: str | None = None):
    """Nearest-neighbour root tracking; returns (index, ambiguity ratio) per row."""
    mod = backend_module(backend)
    roots = np.ascontiguousarray(roots, dtype=np.complex128)
    index = np.zeros(roots.shape[0], dtype=np.int_)
    ratio = np.zeros(roots.shape[0], dtype=np.float64)
    mod.track_nearest(roots, complex(start), index, ratio)
    return index, ratio
