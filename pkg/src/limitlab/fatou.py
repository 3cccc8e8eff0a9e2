"""Filled Julia set geometry: orbit classes, interior components, equipotentials, γΩ.

The component atlas is a grid surrogate for the set of bounded Fatou
components: cells whose orbits settle on an attracting cycle are grouped by
(cycle, phase) and then 4-connected. Equipotentials use the Kœnigs coordinate
(or Böttcher at a superattracting point) in place of a Poincaré-metric circle;
only the property "encloses the critical values of Ω" is used downstream.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .poly import ComplexPolynomial, Cycle, critical_points, find_attracting_cycles, solve_many

log = logging.getLogger(__name__)

ATLAS_SCHEMA = "limitlab.atlas"
ATLAS_VERSION = 1


class ResolutionError(RuntimeError):
    """Grid too coarse: an attracting cycle point fell outside every kept component."""


class LiftError(RuntimeError):
    """Curve lifting failed (root tie or the lifted path did not close)."""


class CurveError(RuntimeError):
    pass


# --------------------------------------------------------------------------- orbits

@dataclass(frozen=True)
class OrbitClass:
    verdict: str  # "escaped" or "bounded"
    step: int | None
    escape_radius: float

    @property
    def escaped(self) -> bool:
        return self.verdict == "escaped"


def _check_radius(p: ComplexPolynomial, escape_radius: float) -> None:
    need = 2.0 * max(1.0, p.coefficient_bound())
    if escape_radius < need:
        raise ValueError(f"escape_radius {escape_radius} below the safe bound {need}")


def classify_point(p: ComplexPolynomial, z: complex, escape_radius: float | None = None,
                   max_iter: int = 256) -> OrbitClass:
    """Escaped(n) with the first n where |p^n(z)| > R, else Bounded (budget exhausted)."""
    radius = p.escape_radius() if escape_radius is None else float(escape_radius)
    _check_radius(p, radius)
    status, steps, _ = kernels.poly_classify(p.array, [z], radius, max_iter)
    if status[0] == 1:
        return OrbitClass("escaped", int(steps[0]), radius)
    return OrbitClass("bounded", None, radius)


def converges_to(p: ComplexPolynomial, z: complex, target: complex, max_iter: int = 2000,
                 eps: float = 1e-9) -> bool:
    status, _, _ = kernels.poly_classify(p.array, [z], p.escape_radius(), max_iter, [target], eps)
    return bool(status[0] == 2)


# --------------------------------------------------------------------------- atlas

@dataclass(frozen=True)
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    @classmethod
    def square(cls, half_width: float, n: int, center: complex = 0j) -> "GridSpec":
        return cls(center.real - half_width, center.real + half_width,
                   center.imag - half_width, center.imag + half_width, n, n)

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.nx

    @property
    def dy(self) -> float:
        return (self.ymax - self.ymin) / self.ny

    def points(self) -> np.ndarray:
        """Cell centres, shape (ny, nx); row 0 is the top edge (ymax)."""
        xs = self.xmin + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.ymax - (np.arange(self.ny) + 0.5) * self.dy
        return xs[None, :] + 1j * ys[:, None]

    def cell_of(self, z: complex) -> tuple[int, int] | None:
        j = math.floor((z.real - self.xmin) / self.dx)
        i = math.floor((self.ymax - z.imag) / self.dy)
        if 0 <= i < self.ny and 0 <= j < self.nx:
            return i, j
        return None

    def covers_disk(self, radius: float, center: complex = 0j) -> bool:
        return (self.xmin <= center.real - radius and self.xmax >= center.real + radius
                and self.ymin <= center.imag - radius and self.ymax >= center.imag + radius)

    def to_dict(self) -> dict:
        return {"xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax,
                "nx": self.nx, "ny": self.ny}


@dataclass(frozen=True)
class ComponentRecord:
    id: int
    representative: complex
    cells: int
    diameter: float
    degree: int
    cycle_point: tuple[int, int] | None = None  # (cycle index, point index)
    phase: tuple[int, int] = (0, 0)  # (cycle index, phase)


@dataclass(frozen=True)
class ComponentAtlas:
    grid: GridSpec
    labels: np.ndarray = field(repr=False, compare=False)
    components: tuple[ComponentRecord, ...]
    cycles: tuple[Cycle, ...] = ()
    polynomial: str = ""

    def lookup(self, z: complex) -> int:
        """Component id at z, -1 for exterior/unresolved/outside the grid."""
        cell = self.grid.cell_of(complex(z))
        if cell is None:
            return -1
        return int(self.labels[cell])

    def record(self, cid: int) -> ComponentRecord:
        return self.components[cid]

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.components]

    def fixed_components(self) -> list[int]:
        """Components containing a point of an attracting cycle (𝒳₀ when cycles are fixed)."""
        return [c.id for c in self.components if c.cycle_point is not None]

    def to_json(self) -> str:
        flat = self.labels.ravel()
        runs = []
        if flat.size:
            edges = np.flatnonzero(np.diff(flat)) + 1
            starts = np.concatenate(([0], edges))
            ends = np.concatenate((edges, [flat.size]))
            runs = [[int(flat[s]), int(e - s)] for s, e in zip(starts, ends)]
        doc = {
            "schema": ATLAS_SCHEMA,
            "version": ATLAS_VERSION,
            "polynomial": self.polynomial,
            "grid": self.grid.to_dict(),
            "labels_rle": runs,
            "components": [
                {"id": c.id, "representative": [c.representative.real, c.representative.imag],
                 "cells": c.cells, "diameter": c.diameter, "degree": c.degree,
                 "cycle_point": list(c.cycle_point) if c.cycle_point is not None else None,
                 "phase": list(c.phase)}
                for c in self.components
            ],
            "cycles": [
                {"points": [[w.real, w.imag] for w in cy.points],
                 "multiplier": [cy.multiplier.real, cy.multiplier.imag]}
                for cy in self.cycles
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ComponentAtlas":
        doc = json.loads(text)
        if doc.get("schema") != ATLAS_SCHEMA or doc.get("version") != ATLAS_VERSION:
            raise ValueError("not a limitlab atlas document (schema/version mismatch)")
        grid = GridSpec(**doc["grid"])
        flat = np.concatenate([np.full(n, v, dtype=np.int32) for v, n in doc["labels_rle"]]) \
            if doc["labels_rle"] else np.zeros(0, dtype=np.int32)
        labels = flat.reshape(grid.ny, grid.nx)
        comps = tuple(
            ComponentRecord(c["id"], complex(*c["representative"]), c["cells"], c["diameter"],
                            c["degree"], tuple(c["cycle_point"]) if c["cycle_point"] else None,
                            tuple(c["phase"]))
            for c in doc["components"]
        )
        cycles = tuple(Cycle(tuple(complex(*w) for w in cy["points"]), complex(*cy["multiplier"]))
                       for cy in doc["cycles"])
        return cls(grid, labels, comps, cycles, doc.get("polynomial", ""))


def interior_components(p: ComplexPolynomial, grid: GridSpec, max_iter: int = 1000,
                        min_cells: int = 2, cycles=None, eps: float = 1e-6) -> ComponentAtlas:
    """Grid labeling of the bounded Fatou components of a hyperbolic polynomial.

    Cells are grouped by the attracting cycle their orbit reaches and the phase
    at which it arrives, then split into 4-connected pieces; pieces under
    ``min_cells`` are dropped as noise.
    """
    p.require_dynamic()
    radius = p.escape_radius()
    if not grid.covers_disk(radius):
        raise ValueError("grid must cover the disk containing the filled Julia set")
    if cycles is None:
        cycles = find_attracting_cycles(p).cycles
    cycles = tuple(cycles)
    att, owner = [], []
    for ci, cy in enumerate(cycles):
        for pi, w in enumerate(cy.points):
            att.append(w)
            owner.append((ci, pi))
    pts = grid.points()
    status, steps, which = kernels.poly_classify(p.array, pts.ravel(), radius, max_iter, att,
                                                 eps)
    offsets = np.cumsum([0] + [cy.period for cy in cycles])
    cls = np.full(status.shape, -1, dtype=np.int64)
    conv = status == 2
    if conv.any():
        w = which[conv]
        cyc = np.array([owner[k][0] for k in range(len(owner))], dtype=np.int64)[w]
        pidx = np.array([owner[k][1] for k in range(len(owner))], dtype=np.int64)[w]
        per = np.array([cy.period for cy in cycles], dtype=np.int64)[cyc]
        phase = np.mod(pidx - steps[conv], per)
        cls[conv] = offsets[cyc] + phase
    cls = cls.reshape(grid.ny, grid.nx)

    pieces = []  # (first flat index, class code, mask slice info)
    for code in np.unique(cls[cls >= 0]):
        lab, n = ndimage.label(cls == code)
        if n == 0:
            continue
        sizes = np.bincount(lab.ravel())
        objs = ndimage.find_objects(lab)
        flat = lab.ravel()
        firsts = np.full(n + 1, flat.size, dtype=np.int64)
        nz = np.flatnonzero(flat)
        np.minimum.at(firsts, flat[nz], nz)
        for k in range(1, n + 1):
            if sizes[k] >= min_cells:
                pieces.append((int(firsts[k]), int(code), lab, k, objs[k - 1], int(sizes[k])))
    pieces.sort(key=lambda t: t[0])

    labels = np.full((grid.ny, grid.nx), -1, dtype=np.int32)
    code_to_cycle = {}
    for ci, cy in enumerate(cycles):
        for ph in range(cy.period):
            code_to_cycle[int(offsets[ci] + ph)] = (ci, ph)
    raw = []
    for cid, (_, code, lab, k, sl, size) in enumerate(pieces):
        mask = lab[sl] == k
        labels[sl][mask] = cid
        dist = ndimage.distance_transform_edt(np.pad(mask, 1))[1:-1, 1:-1]
        flat_best = int(np.argmax(dist))
        bi, bj = np.unravel_index(flat_best, mask.shape)
        rep = complex(pts[sl][bi, bj])
        ii, jj = np.nonzero(mask)
        ext_x = (jj.max() - jj.min() + 1) * grid.dx
        ext_y = (ii.max() - ii.min() + 1) * grid.dy
        raw.append([cid, rep, size, float(math.hypot(ext_x, ext_y)), code_to_cycle[code]])

    cycle_point = {}
    for ci, cy in enumerate(cycles):
        for pi, w in enumerate(cy.points):
            cell = grid.cell_of(w)
            cid = int(labels[cell]) if cell is not None else -1
            if cid < 0:
                raise ResolutionError(
                    f"attracting cycle point {w} lies in a discarded or unresolved region; "
                    "refine the grid")
            cycle_point.setdefault(cid, (ci, pi))
            raw[cid][1] = w

    partial = ComponentAtlas(grid, labels, tuple(
        ComponentRecord(r[0], r[1], r[2], r[3], 1, cycle_point.get(r[0]), r[4]) for r in raw
    ), cycles, p.to_string())
    cmap = component_map(p, partial)
    crit = critical_points(p)
    comps = []
    for rec in partial.components:
        if cmap[rec.id] == rec.id:
            degree = 1 + sum(1 for c in crit if partial.lookup(c) == rec.id)
        else:
            # heuristic: sheets of p over the image point that stay in this component
            pre = solve_many(p.array, [p(rec.representative)])[0]
            degree = max(1, sum(1 for w in pre if partial.lookup(complex(w)) == rec.id))
        comps.append(ComponentRecord(rec.id, rec.representative, rec.cells, rec.diameter, degree,
                                     rec.cycle_point, rec.phase))
    return ComponentAtlas(grid, labels, tuple(comps), cycles, p.to_string())


def component_map(p: ComplexPolynomial, atlas: ComponentAtlas) -> dict[int, int | None]:
    """Induced map on components: id -> id containing p(representative), None if unresolved."""
    out: dict[int, int | None] = {}
    for rec in atlas.components:
        target = atlas.lookup(p(rec.representative))
        out[rec.id] = target if target >= 0 else None
    return out


# --------------------------------------------------------------------------- curves

@dataclass(frozen=True)
class ClosedCurve:
    """Cyclically ordered samples c(j/M), j = 0..M-1, of a closed curve."""

    samples: np.ndarray = field(repr=False)
    center: complex = 0j
    level: float | None = None
    kind: str = "polyline"

    @property
    def resolution(self) -> int:
        return int(self.samples.shape[0])

    def winding_number(self, points) -> np.ndarray | int:
        pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
        rel = self.samples[:, None] - pts[None, :]
        nxt = np.roll(rel, -1, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ang = np.angle(nxt / rel).sum(axis=0)
        w = np.rint(ang / (2 * np.pi)).astype(int)
        return int(w[0]) if np.ndim(points) == 0 else w

    def contains(self, points):
        w = self.winding_number(points)
        return w != 0

    def distance(self, points) -> np.ndarray | float:
        """Euclidean distance from points to the closed polyline."""
        pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
        a = self.samples
        b = np.roll(a, -1)
        ab = b - a
        ab2 = np.maximum((ab.real ** 2 + ab.imag ** 2), 1e-300)
        out = np.empty(pts.shape)
        for lo in range(0, pts.size, 256):
            chunk = pts[lo:lo + 256]
            ap = chunk[None, :] - a[:, None]
            t = np.clip((ap.real * ab.real[:, None] + ap.imag * ab.imag[:, None])
                        / ab2[:, None], 0.0, 1.0)
            proj = a[:, None] + t * ab[:, None]
            out[lo:lo + 256] = np.abs(chunk[None, :] - proj).min(axis=0)
        return float(out[0]) if np.ndim(points) == 0 else out

    def __call__(self, theta):
        """Periodic linear interpolation at parameter(s) theta in R/Z."""
        M = self.resolution
        x = np.mod(np.asarray(theta, dtype=float), 1.0) * M
        i0 = np.floor(x).astype(int) % M
        f = x - np.floor(x)
        val = (1 - f) * self.samples[i0] + f * self.samples[(i0 + 1) % M]
        return complex(val) if np.ndim(theta) == 0 else val

    def min_spacing(self) -> float:
        return float(np.abs(np.roll(self.samples, -1) - self.samples).min())

    def validate(self) -> None:
        if self.min_spacing() <= 0:
            raise CurveError("curve samples are not pairwise distinct")
        if self.winding_number(self.center) != 1:
            raise CurveError("curve does not wind once about its base point")


def lift_curve(p: ComplexPolynomial, samples: np.ndarray, k: int, anchor: complex | None = None,
               max_refine: int = 6, tie_ratio: float = 0.5) -> np.ndarray:
    """Lift a closed curve through p as a degree-k cover: out[j] with p(out[j]) = samples[k*j mod M].

    The lift follows the nearest preimage along the curve traversed k times,
    starting from the preimage of samples[0] nearest to ``anchor``. Ambiguous
    steps are refined by inserting chord midpoints; the lifted path must close.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    M = samples.shape[0]
    path = np.concatenate([np.tile(samples, k), samples[:1]])
    density = 1
    for _ in range(max_refine + 1):
        roots = solve_many(p.array, path)
        a = samples[0] if anchor is None else anchor
        start = roots[0][np.argmin(np.abs(roots[0] - a))]
        idx, ratio = kernels.track_nearest(roots[1:], start)
        if ratio.max() <= tie_ratio:
            break
        mid = 0.5 * (path[:-1] + path[1:])
        dense = np.empty(2 * path.size - 1, dtype=np.complex128)
        dense[0::2] = path
        dense[1::2] = mid
        path = dense
        density *= 2
    else:
        worst = int(np.argmax(ratio))
        raise LiftError(f"root tie while lifting near {path[worst + 1]} (ratio {ratio.max():.3f})")
    chosen = np.concatenate([[start], roots[1:][np.arange(idx.size), idx]])
    end = chosen[-1]
    if abs(end - start) > 1e-8 * max(1.0, abs(start)):
        raise LiftError(f"lifted path does not close ({abs(end - start):.3e}); the curve may "
                        "enclose a critical value of the wrong multiplicity")
    return chosen[: k * M * density: k * density].copy()


# --------------------------------------------------------------------------- linearizing coordinates

@dataclass(frozen=True)
class LocalModel:
    """Normal-form data at an attracting fixed point."""

    z0: complex
    multiplier: complex
    local_degree: int  # 1 for Kœnigs, n >= 2 for Böttcher
    lead: complex  # leading local coefficient (b_n for Böttcher, b_2 for Kœnigs)

    @property
    def superattracting(self) -> bool:
        return self.local_degree >= 2

    @classmethod
    def at(cls, p: ComplexPolynomial, z0: complex) -> "LocalModel":
        b = p.taylor_at(z0)
        lam = complex(b[1]) if len(b) > 1 else 0j
        if abs(lam) >= 1:
            raise ValueError(f"{z0} is not attracting (|multiplier| = {abs(lam):.3g})")
        if abs(lam) > 1e-14:
            return cls(complex(z0), lam, 1, complex(b[2]) if len(b) > 2 else 0j)
        n = next(j for j in range(2, len(b)) if abs(b[j]) > 1e-14)
        return cls(complex(z0), 0j, n, complex(b[n]))

    def phi(self, p: ComplexPolynomial, z, max_iter: int = 5000):
        """Kœnigs (φ∘p = λφ) or Böttcher (φ∘p = φⁿ) coordinate, evaluated by forward iteration."""
        zs = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        out = np.array([self._phi1(p, complex(w), max_iter) for w in zs])
        return complex(out[0]) if np.ndim(z) == 0 else out

    def _phi1(self, p, z, max_iter):
        z0 = self.z0
        if not self.superattracting:
            lam = self.multiplier
            beta = self.lead / (lam - lam * lam)
            u = z - z0
            scale = 1 + 0j
            for _ in range(max_iter):
                if abs(u) <= 1e-7:
                    return (u + beta * u * u) * scale
                z = p(z)
                u = z - z0
                scale /= lam
                if not math.isfinite(abs(u)) or abs(u) > 1e6:
                    break
            raise ValueError(f"orbit of {z} does not converge to the fixed point")
        n = self.local_degree
        c = self.lead ** (1.0 / (n - 1))
        v = c * (z - z0)
        phi = v
        expo = 1.0
        for _ in range(max_iter):
            if v == 0 or abs(v) < 1e-200:
                return 0j if abs(phi) < 1e-300 else phi
            z = p(z)
            v_next = c * (z - z0)
            expo /= n
            factor = (v_next / v ** n) ** expo
            phi *= factor
            v = v_next
            if abs(v) < 1e-12 or abs(factor - 1) < 1e-17:
                return phi
            if abs(v) > 1e6:
                break
        raise ValueError(f"orbit of {z} does not converge to the fixed point")

    def inverse_near(self, v: np.ndarray) -> np.ndarray:
        """φ⁻¹ for tiny |v| from the first terms of the series."""
        if self.superattracting:
            c = self.lead ** (1.0 / (self.local_degree - 1))
            return self.z0 + v / c
        lam = self.multiplier
        beta = self.lead / (lam - lam * lam)
        return self.z0 + v - beta * v * v


def immediate_basin_test(p: ComplexPolynomial, z0: complex, n: int = 512):
    """Membership test for the immediate basin Ω of the attracting fixed point z0.

    A point belongs to Ω when its orbit converges to z0 and its grid cell lies
    in the same interior component as z0.
    """
    if abs(p(z0) - z0) > 1e-9 * max(1.0, abs(z0)):
        raise ValueError(f"{z0} is not a fixed point of p")
    half = p.escape_radius()
    atlas = interior_components(p, GridSpec.square(half, n), min_cells=1)
    home = atlas.lookup(z0)

    def test(z: complex) -> bool:
        if not converges_to(p, z, z0, max_iter=5000, eps=1e-9):
            return False
        return home < 0 or atlas.lookup(z) == home
    return test


_in_omega_default = immediate_basin_test


def _critical_data(p, model, omega):
    crit = [c for c in critical_points(p) if omega(c)]
    values = [p(c) for c in crit]
    return crit, values


def _level_curve(p: ComplexPolynomial, model: LocalModel, level: float, M: int) -> np.ndarray:
    theta = np.arange(M) / M
    circle = np.exp(2j * np.pi * theta)
    if model.superattracting:
        n = model.local_degree
        if not 0 < level < 1:
            raise ValueError("Böttcher level must lie in (0, 1)")
        K = 0
        while level ** (n ** K) > 1e-9:
            K += 1
        cur = model.inverse_near(level ** (n ** K) * circle)
        for _ in range(K):
            cur = lift_curve(p, cur, n, anchor=cur[0])
        return cur
    lam = model.multiplier
    K = 0
    while level * abs(lam) ** K > 1e-7:
        K += 1
    cur = model.inverse_near(level * lam ** K * circle)
    for _ in range(K):
        cur = lift_curve(p, cur, 1, anchor=cur[0])
    return cur


def equipotential(p: ComplexPolynomial, z0: complex, level: float | None = None, M: int = 1024,
                  auto_raise: bool = True, omega=None, max_raise: int = 60) -> ClosedCurve:
    """Level curve |φ| = level of the linearizing coordinate at the attracting fixed point z0.

    ``level`` is raised (logged) until every critical value of p lying in Ω is
    strictly inside; with ``level=None`` a level in the admissible window is chosen.
    ``omega`` is a membership test for Ω (default: orbit converges to z0).
    """
    p.require_dynamic()
    if p.is_model_monomial() and z0 == 0 and level is not None:
        if not 0 < level < 1:
            raise ValueError("level must lie in (0, 1) for z -> z^n")
        samples = level * np.exp(2j * np.pi * np.arange(M) / M)
        return ClosedCurve(samples, 0j, float(level), "bottcher")
    model = LocalModel.at(p, z0)
    omega = omega or _in_omega_default(p, z0)
    crit, values = _critical_data(p, model, omega)
    required = [v for v in values if abs(v - z0) > 1e-12]
    if level is None:
        if model.superattracting:
            level = 0.5
            if required:
                lo = max(abs(model.phi(p, v)) for v in required)
                level = min(0.5 * (1 + lo), lo ** 0.5)
        else:
            lo = max((abs(model.phi(p, v)) for v in required), default=0.0)
            inner = [abs(model.phi(p, c)) for c in crit if abs(model.phi(p, c)) > lo]
            hi = min(inner) if inner else None
            if lo == 0.0:
                level = 0.5 * hi if hi else 1e-2
            else:
                level = math.sqrt(lo * hi) if hi else 2 * lo
    if model.superattracting:
        factor_exp = 0.75
    else:
        factor = min(1.5, abs(model.multiplier) ** -0.5)
    for _ in range(max_raise):
        samples = _level_curve(p, model, level, M)
        curve = ClosedCurve(samples, complex(z0), float(level),
                            "bottcher" if model.superattracting else "koenigs")
        outside = [v for v in required if not curve.contains(v)]
        near = [v for v in required if curve.distance(v) < 1e-6 * max(1.0, abs(v))]
        if not outside and not near:
            return curve
        if not auto_raise:
            raise CurveError(f"level {level} leaves critical values {outside or near} uncovered")
        old = level
        if near and not outside:
            level = level * 1.05 if not model.superattracting else level ** 0.95
            log.info("critical value on the level curve; level nudged %.6g -> %.6g", old, level)
        else:
            level = level ** factor_exp if model.superattracting else level * factor
            log.info("level raised %.6g -> %.6g to enclose critical values in Omega", old, level)
    raise CurveError("auto-raise did not enclose the critical values")


def degree_on_component(p: ComplexPolynomial, z0: complex, omega=None) -> int:
    """Degree of p on the immediate basin Ω of z0: 1 + critical points in Ω (with multiplicity)."""
    omega = omega or _in_omega_default(p, z0)
    return 1 + sum(1 for c in critical_points(p) if omega(c))


# --------------------------------------------------------------------------- boundary parametrization

@dataclass(frozen=True)
class BoundaryParametrization:
    curve: ClosedCurve
    degree: int
    residual: float
    levels: int
    residual_history: tuple[float, ...] = ()

    def __call__(self, theta):
        return self.curve(theta)


def functional_residual(p: ComplexPolynomial, samples: np.ndarray, k: int) -> float:
    """max_j |p(γ(j/M)) - γ(k j/M)| on the sample grid."""
    M = samples.shape[0]
    img = p(samples)
    return float(np.abs(img - samples[(k * np.arange(M)) % M]).max())


def functional_residual_pair(p: ComplexPolynomial, lifted: np.ndarray, base: np.ndarray,
                             k: int) -> float:
    """max_j |p(lifted[j]) - base[k j mod M]|."""
    M = base.shape[0]
    return float(np.abs(p(lifted) - base[(k * np.arange(M)) % M]).max())


def boundary_parametrization(p: ComplexPolynomial, z0: complex, M: int = 4096,
                             max_levels: int = 40, target: float = 1e-9,
                             accept: float = 1e-3, omega=None) -> BoundaryParametrization:
    """γΩ: S¹ -> ∂Ω with γ(θ·k) = p(γ(θ)), as the limit of lifted equipotentials.

    Rotation convention: γ(0) is the limit of the lifts of the equipotential's
    angle-0 point, each lift anchored at the preimage nearest the previous one.
    """
    p.require_dynamic()
    if p.is_model_monomial() and abs(z0) == 0:
        k = p.degree
        samples = np.exp(2j * np.pi * np.arange(M) / M)
        res = functional_residual(p, samples, k)
        return BoundaryParametrization(ClosedCurve(samples, 0j, 1.0, "gamma"), k, res, 0, (res,))
    k = degree_on_component(p, z0, omega)
    cur = equipotential(p, z0, M=M, omega=omega).samples
    history = []
    res = math.inf
    levels = 0
    for levels in range(1, max_levels + 1):
        cur = lift_curve(p, cur, k, anchor=cur[0])
        res = functional_residual(p, cur, k)
        history.append(res)
        if res <= target:
            break
    if not res <= accept:
        raise CurveError(f"pullback tower did not converge in {max_levels} levels "
                         f"(worst residual {res:.3e})")
    return BoundaryParametrization(ClosedCurve(cur, complex(z0), None, "gamma"), k, res, levels,
                                   tuple(history))


def rotations(gamma: BoundaryParametrization) -> list[np.ndarray]:
    """All k-1 solutions θ ↦ γ(θ + j/(k-1)) of the same functional equation, as sample arrays."""
    k = gamma.degree
    M = gamma.curve.resolution
    out = []
    for j in range(max(k - 1, 0)):
        shift = j / (k - 1)
        out.append(gamma.curve(np.arange(M) / M + shift))
    return out
