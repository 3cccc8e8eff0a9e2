"""Truncated histories of the natural extension: fibers, shift, continuation, labels."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .poly import ComplexPolynomial, solve_many

STEP_TOL = 1e-9
MERGE_TOL = 1e-6


class HistoryError(ValueError):
    pass


class ContinuationError(RuntimeError):
    def __init__(self, depth: int, location: complex, msg: str = ""):
        self.depth = depth
        self.location = location
        super().__init__(msg or f"continuation stalled at depth {depth} near {location}")


@dataclass(frozen=True)
class History:
    """(z0, z-1, ..., z-N) with p(z-(i+1)) = z-i."""

    entries: tuple[complex, ...]

    def __post_init__(self):
        if not self.entries:
            raise HistoryError("a history needs at least z0")
        object.__setattr__(self, "entries", tuple(complex(z) for z in self.entries))

    @classmethod
    def build(cls, p: ComplexPolynomial, entries: Iterable[complex], tol: float = STEP_TOL):
        h = cls(tuple(entries))
        h.check(p, tol)
        return h

    @classmethod
    def fixed(cls, z: complex, depth: int) -> "History":
        return cls((complex(z),) * (depth + 1))

    @property
    def depth(self) -> int:
        return len(self.entries) - 1

    @property
    def head(self) -> complex:
        return self.entries[0]

    def __getitem__(self, i: int) -> complex:
        """Entry z_{-i}."""
        return self.entries[i]

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.complex128)

    def step_residuals(self, p: ComplexPolynomial) -> np.ndarray:
        a = self.array()
        if a.size < 2:
            return np.zeros(0)
        return np.abs(p(a[1:]) - a[:-1]) / np.maximum(1.0, np.abs(a[:-1]))

    def check(self, p: ComplexPolynomial, tol: float = STEP_TOL) -> None:
        r = self.step_residuals(p)
        if r.size and r.max() > tol:
            i = int(np.argmax(r))
            raise HistoryError(f"p(z_-{i + 1}) misses z_-{i} by {r[i]:.3e} (relative)")

    def distance(self, other: "History") -> float:
        n = min(len(self.entries), len(other.entries))
        return float(np.abs(self.array()[:n] - other.array()[:n]).max())

    def to_dict(self) -> dict:
        return {"depth": self.depth, "entries": [[z.real, z.imag] for z in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "History":
        h = cls(tuple(complex(re, im) for re, im in doc["entries"]))
        if h.depth != doc.get("depth", h.depth):
            raise HistoryError("depth field disagrees with the entry count")
        return h

    @classmethod
    def from_json(cls, text: str) -> "History":
        return cls.from_dict(json.loads(text))


def shift(p: ComplexPolynomial, h: History) -> History:
    """(p(z0), z0, ..., z-N); the old entries are kept as they are."""
    return History((p(h.head),) + h.entries)


def unshift(p: ComplexPolynomial, h: History, branch: int | complex | None = None) -> History:
    """Drop z0; with ``branch`` also append a preimage of the deepest entry.

    ``branch`` is an index into the preimages sorted by (real, imag), or a
    complex value naming the preimage directly.
    """
    if h.depth < 1:
        raise HistoryError("unshift needs depth >= 1")
    tail = h.entries[1:]
    if branch is None:
        return History(tail)
    roots = solve_many(p.array, [tail[-1]])[0]
    if isinstance(branch, (int, np.integer)) and not isinstance(branch, bool):
        if not 0 <= branch < roots.size:
            raise HistoryError(f"branch index {branch} outside 0..{roots.size - 1}")
        pick = roots[branch]
    else:
        target = complex(branch)
        j = int(np.argmin(np.abs(roots - target)))
        if abs(roots[j] - target) > MERGE_TOL * max(1.0, abs(target)):
            raise HistoryError(f"{target} is not a preimage of {tail[-1]}")
        pick = target if abs(p(target) - tail[-1]) <= abs(p(roots[j]) - tail[-1]) else roots[j]
    return History(tail + (complex(pick),))


# --------------------------------------------------------------------------- fibers

def _merge_roots(row: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cluster nearly equal roots; returns cluster centres and multiplicities."""
    centres, mult = [], []
    used = np.zeros(row.size, dtype=bool)
    for i in range(row.size):
        if used[i]:
            continue
        close = (~used) & (np.abs(row - row[i]) <= tol * max(1.0, abs(row[i])))
        used |= close
        centres.append(row[close].mean())
        mult.append(int(close.sum()))
    return np.array(centres, dtype=np.complex128), np.array(mult, dtype=np.int64)


@dataclass(frozen=True)
class Fiber:
    """All depth-N histories over a base point, distinct up to MERGE_TOL."""

    base: complex
    depth: int
    entries: np.ndarray = field(repr=False)  # (count, depth + 1)
    multiplicity: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.entries.shape[0])

    @property
    def total_multiplicity(self) -> int:
        return int(self.multiplicity.sum())

    @property
    def ramified(self) -> np.ndarray:
        return self.multiplicity > 1

    def histories(self) -> list[History]:
        return [History(tuple(row)) for row in self.entries]

    def min_separation(self) -> float:
        """Smallest distance between deepest entries of distinct histories (a lower
        bound for their sup distance); inf for a single history."""
        if self.count < 2:
            return float("inf")
        deep = self.entries[:, -1]
        tree = cKDTree(np.column_stack([deep.real, deep.imag]))
        dist, _ = tree.query(np.column_stack([deep.real, deep.imag]), k=2)
        return float(dist[:, 1].min())

    def to_jsonl(self) -> str:
        lines = []
        for row, m in zip(self.entries, self.multiplicity):
            doc = History(tuple(row)).to_dict()
            doc["multiplicity"] = int(m)
            doc["ramified"] = bool(m > 1)
            lines.append(json.dumps(doc, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def fiber(p: ComplexPolynomial, z: complex, N: int, merge_tol: float = MERGE_TOL) -> Fiber:
    """The preimage tree of depth N over z, one level per batched root solve."""
    if N < 0:
        raise ValueError("depth must be >= 0")
    p.require_dynamic()
    paths = np.array([[complex(z)]], dtype=np.complex128)
    mult = np.ones(1, dtype=np.int64)
    for _ in range(N):
        roots = solve_many(p.array, paths[:, -1])
        gap = np.abs(roots[:, :, None] - roots[:, None, :])
        gap[:, np.arange(p.degree), np.arange(p.degree)] = np.inf
        scale = np.maximum(1.0, np.abs(roots))
        if (gap.min(axis=2) > merge_tol * scale).all():
            d = p.degree
            paths = np.column_stack([np.repeat(paths, d, axis=0), roots.ravel()])
            mult = np.repeat(mult, d)
            continue
        new_paths, new_mult = [], []
        for row_i in range(paths.shape[0]):
            centres, m = _merge_roots(roots[row_i], merge_tol)
            for c, k in zip(centres, m):
                new_paths.append(np.append(paths[row_i], c))
                new_mult.append(mult[row_i] * k)
        paths = np.array(new_paths, dtype=np.complex128)
        mult = np.array(new_mult, dtype=np.int64)
    return Fiber(complex(z), N, paths, mult)


# --------------------------------------------------------------------------- continuation

def continue_along_path(p: ComplexPolynomial, h: History, path: Sequence[complex],
                        ratio_limit: float = 0.5, min_step: float = 1e-12,
                        max_points: int = 1 << 20) -> History:
    """Analytic continuation of every entry of h as z0 moves along the polyline.

    Each depth follows the preimage nearest to its previous position. Segments
    where the choice is not clear (nearest/second-nearest distance above
    ``ratio_limit``) are halved until it is, or until they shrink below
    ``min_step``.
    """
    pts = np.asarray(path, dtype=np.complex128).ravel()
    if pts.size == 0:
        return h
    if abs(pts[0] - h.head) > 1e-9 * max(1.0, abs(h.head)):
        raise ValueError("path must start at the head of the history")
    N = h.depth
    if N == 0 or pts.size == 1:
        return History((complex(pts[-1]),) + h.entries[1:]) if N else History((complex(pts[-1]),))
    while True:
        bad = None
        track = [pts]
        for depth in range(1, N + 1):
            roots = solve_many(p.array, track[-1][1:])
            idx, ratio = kernels.track_nearest(roots, h.entries[depth])
            if ratio.size and ratio.max() > ratio_limit:
                bad = (depth, np.flatnonzero(ratio > ratio_limit))
                break
            chosen = np.concatenate([[h.entries[depth]], roots[np.arange(idx.size), idx]])
            track.append(chosen)
        if bad is None:
            break
        depth, rows = bad
        seg_len = np.abs(pts[rows + 1] - pts[rows])
        if seg_len.min() < min_step or pts.size + rows.size > max_points:
            j = int(rows[np.argmin(seg_len)])
            raise ContinuationError(depth, complex(pts[j + 1]),
                                    f"step collapsed at depth {depth} near {pts[j + 1]} "
                                    "(path too close to a critical value)")
        mids = 0.5 * (pts[rows] + pts[rows + 1])
        pts = np.insert(pts, rows + 1, mids)
    return History(tuple(complex(t[-1]) for t in track))


def densify(path: Sequence[complex], max_step: float) -> np.ndarray:
    """Subdivide a polyline so no segment is longer than max_step."""
    pts = np.asarray(path, dtype=np.complex128).ravel()
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil(abs(b - a) / max_step)))
        out.append(a + (b - a) * (np.arange(1, n + 1) / n))
    return np.concatenate(out)


def circle_path(center: complex, radius: float, start_angle: float = 0.0,
                steps: int = 1000, turns: int = 1) -> np.ndarray:
    t = start_angle + 2 * np.pi * np.arange(steps * turns + 1) / steps
    return center + radius * np.exp(1j * t)


# --------------------------------------------------------------------------- labels

@dataclass(frozen=True)
class ComponentLabel:
    """([w0], [w-1], ..., [w-M]) as atlas ids; ``cutoff`` is the first unresolved depth."""

    ids: tuple[int, ...]
    cutoff: int | None = None
    compatible: bool = True

    @property
    def complete(self) -> bool:
        return self.cutoff is None

    def is_constant(self) -> bool:
        return len(set(self.ids)) <= 1


def component_label(p: ComplexPolynomial, h: History, atlases) -> ComponentLabel:
    """Interior-component ids of each entry, checked against the induced component map.

    ``atlases`` is one ComponentAtlas reused at every depth or a sequence
    giving one atlas per depth.
    """
    from .fatou import component_map

    if not isinstance(atlases, (list, tuple)):
        atlases = [atlases] * (h.depth + 1)
    if len(atlases) < h.depth + 1:
        raise ValueError("atlas chain shorter than the history")
    ids: list[int] = []
    cutoff = None
    for i, z in enumerate(h.entries):
        cid = atlases[i].lookup(z)
        if cid < 0:
            cutoff = i
            break
        ids.append(cid)
    ok = True
    maps: dict[int, dict] = {}
    for i in range(1, len(ids)):
        key = id(atlases[i])
        if key not in maps:
            maps[key] = component_map(p, atlases[i])
        img = maps[key].get(ids[i])
        if img is None:
            continue
        same_atlas = atlases[i] is atlases[i - 1]
        if same_atlas and img != ids[i - 1]:
            ok = False
    return ComponentLabel(tuple(ids), cutoff, ok)


__all__ = [
    "History", "HistoryError", "ContinuationError", "Fiber", "fiber", "shift", "unshift",
    "continue_along_path", "densify", "circle_path", "ComponentLabel", "component_label",
]
