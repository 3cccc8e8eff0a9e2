"""Conjugacy between the distinguished component of the natural extension and the cone model.

A0 is the annulus between Γ0 (an equipotential enclosing the critical values
in Ω) and Γ1 = p⁻¹(Γ0) ∩ Ω; deeper annuli A_j lie between Γ_j and Γ_{j+1}.
Points of A0 get coordinates (θ, t) from a bilinear grid in log(w - z*), and
ψ̄(θ, t) = r^{(1 + t(1/n - 1))/n^j} e(θ_j) on A_j, with the sheet θ_j tracked
through the lifted tables.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import fatou
from .fatou import ClosedCurve, lift_curve
from .natext import History
from .poly import ComplexPolynomial, solve_many
from .solenoid import ConePoint, SolenoidPoint, apex, cone_distance, cone_push, cone_shift

SCHEMA = "limitlab.conjugacy"
VERSION = 1


class ConjugacyError(RuntimeError):
    pass


class DepthInsufficientError(ConjugacyError):
    pass


class OutsideAnnulusError(ConjugacyError):
    pass


def _log_table(curve: np.ndarray, z_star: complex, ref: np.ndarray | None = None) -> np.ndarray:
    """Continuous log(curve - z*) over one turn, closed by one extra sample."""
    lg = np.log(curve - z_star)
    im = np.unwrap(lg.imag)
    if ref is not None:
        im += 2 * np.pi * np.round((ref[0].imag - im[0]) / (2 * np.pi))
    out = lg.real + 1j * im
    turn = out[0] + 2j * np.pi
    return np.append(out, turn)


@dataclass(frozen=True)
class AnnulusModel:
    z_star: complex
    n: int
    r: float
    outer: ClosedCurve  # Γ0, the inner boundary in the plane, mapped to |w| = r
    inner: ClosedCurve  # Γ1 = p⁻¹(Γ0) ∩ Ω, mapped to |w| = r^(1/n)
    residual: float

    @property
    def r_outer(self) -> float:
        return self.r ** (1.0 / self.n)


def build_annulus(p: ComplexPolynomial, z_star: complex, level: float | None = None,
                  r: float = 0.25, M: int = 4096, gamma: ClosedCurve | None = None,
                  omega=None) -> AnnulusModel:
    """Γ0 and its pullback Γ1 with p(Γ1(θ)) = Γ0(nθ), anchored at the preimage nearest Γ0(0)."""
    if not 0 < r < 1:
        raise ValueError("model radius must lie in (0, 1)")
    if gamma is None:
        gamma = fatou.equipotential(p, z_star, level=level, M=M, omega=omega)
    if p.is_model_monomial() and z_star == 0:
        n = p.degree
    else:
        n = fatou.degree_on_component(p, z_star, omega)
    if n < 2:
        raise ConjugacyError("p has degree 1 on Ω; no annulus cover to model")
    g0 = gamma.samples
    g1 = lift_curve(p, g0, n, anchor=g0[0])
    radius = p.escape_radius()
    status = fatou.kernels.poly_classify(p.array, g1, radius, 2000, [z_star], 1e-9)[0]
    if (status != 2).any():
        raise ConjugacyError("pullback of Γ leaves Ω; Γ must lie inside the basin")
    inner = ClosedCurve(g1, complex(z_star), None, "pullback")
    if not inner.contains(g0[0]):
        raise ConjugacyError("Γ1 does not enclose Γ0")
    res = fatou.functional_residual_pair(p, g1, g0, n)
    return AnnulusModel(complex(z_star), n, float(r), gamma, inner, res)


class _LogGrid:
    """Bilinear (θ, t) coordinates on the annulus between two log tables."""

    def __init__(self, lam0: np.ndarray, lam1: np.ndarray):
        self.a = lam0[:-1]
        self.b = lam0[1:]
        self.d = lam1[:-1]
        self.c = lam1[1:]
        self.M = self.a.size
        self.im0 = lam0[0].imag
        e1 = self.b - self.a
        e2 = self.d - self.a
        cross = e1.real * e2.imag - e1.imag * e2.real
        if not ((cross > 0).all() or (cross < 0).all()):
            raise ConjugacyError("annulus grid folds over itself; choose another level")
        self.orient = 1.0 if cross[0] > 0 else -1.0
        self.scale = float(np.abs(e1).max() + np.abs(e2).max())

    def point(self, theta, t):
        x = np.mod(np.asarray(theta, dtype=float), 1.0) * self.M
        j = np.minimum(np.floor(x).astype(int), self.M - 1)
        u = x - j
        t = np.asarray(t, dtype=float)
        lo = (1 - u) * self.a[j] + u * self.b[j]
        hi = (1 - u) * self.d[j] + u * self.c[j]
        return (1 - t) * lo + t * hi

    def _inside(self, q: complex, slack: float) -> np.ndarray:
        """Indices of cells whose (straight-edged) quadrilateral contains q."""
        ok = np.ones(self.M, dtype=bool)
        tol = -slack * self.scale
        for p0, p1 in ((self.a, self.b), (self.b, self.c), (self.c, self.d), (self.d, self.a)):
            e = p1 - p0
            f = q - p0
            ok &= self.orient * (e.real * f.imag - e.imag * f.real) >= tol * np.abs(e)
        return np.flatnonzero(ok)

    def invert(self, L: complex, slack: float = 1e-9) -> tuple[float, float]:
        for wrap in (0, 1, -1, 2):
            q = L + 2j * np.pi * wrap
            for j in self._inside(q, slack):
                sol = self._solve(int(j), q)
                if sol is not None:
                    u, t = sol
                    return ((j + u) / self.M) % 1.0, t
        raise OutsideAnnulusError("point is not in the annulus")

    def _solve(self, j: int, q: complex):
        a, b, c, d = self.a[j], self.b[j], self.c[j], self.d[j]
        u, t = 0.5, 0.5
        for _ in range(30):
            lo = (1 - u) * a + u * b
            hi = (1 - u) * d + u * c
            f = (1 - t) * lo + t * hi - q
            du = (1 - t) * (b - a) + t * (c - d)
            dt = hi - lo
            det = du.real * dt.imag - du.imag * dt.real
            if det == 0:
                return None
            su = (f.real * dt.imag - f.imag * dt.real) / det
            st = (du.real * f.imag - du.imag * f.real) / det
            u -= su
            t -= st
            if abs(su) + abs(st) < 1e-15:
                break
        eps = 1e-9
        if -eps <= u <= 1 + eps and -eps <= t <= 1 + eps:
            u = min(max(u, 0.0), 1.0)
            t = min(max(t, 0.0), 1.0)
            if t < 1e-12:
                t = 0.0
            elif t > 1 - 1e-12:
                t = 1.0
            return u, t
        return None


@dataclass
class ConjugacyMap:
    """Tower tables Γ0..Γ_{m+1} with the log-bilinear model on A0 and lifted sheets above."""

    p: ComplexPolynomial
    annulus: AnnulusModel
    curves: list[np.ndarray] = field(repr=False)
    residuals: list[float]
    interpolation: str = "log-bilinear"

    def __post_init__(self):
        z = self.annulus.z_star
        lam0 = _log_table(self.curves[0], z)
        lam1 = _log_table(self.curves[1], z, ref=lam0)
        self._grid = _LogGrid(lam0, lam1)
        self._closed = [ClosedCurve(c, z) for c in self.curves]

    @property
    def depth(self) -> int:
        """Number of lifted annuli above A0."""
        return len(self.curves) - 2

    @property
    def n(self) -> int:
        return self.annulus.n

    @property
    def r(self) -> float:
        return self.annulus.r

    @property
    def resolution(self) -> int:
        return int(self.curves[0].size)

    # -- level-0 map
    def psi0(self, w):
        """ψ̄0 on A0; vectorized over w."""
        ws = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        out = np.empty(ws.shape, dtype=np.complex128)
        for i, x in enumerate(ws):
            theta, t = self.coords0(complex(x))
            out[i] = self._model(theta, t, 0)
        return complex(out[0]) if np.ndim(w) == 0 else out

    def coords0(self, w: complex) -> tuple[float, float]:
        z = self.annulus.z_star
        if w == z:
            raise OutsideAnnulusError("z* is not in A0")
        return self._grid.invert(complex(np.log(w - z)))

    def point0(self, theta, t):
        return self.annulus.z_star + np.exp(self._grid.point(theta, t))

    def _model(self, theta: float, t: float, level: int) -> complex:
        n = self.n
        rad = self.r ** ((1 + t * (1.0 / n - 1)) / n ** level)
        return rad * np.exp(2j * np.pi * theta)

    def model_radius(self, t: float, level: int) -> float:
        return self.r ** ((1 + t * (1.0 / self.n - 1)) / self.n ** level)

    # -- tower
    def transversal(self, level: int, theta, t):
        a = ClosedCurve(self.curves[level])(theta)
        b = ClosedCurve(self.curves[level + 1])(theta)
        return (1 - np.asarray(t)) * a + np.asarray(t) * b

    def pick_sheet(self, level: int, w: complex, theta_prev: float, t: float,
                   tie_ratio: float = 0.5) -> tuple[float, int]:
        n = self.n
        cands = (theta_prev + np.arange(n)) / n
        dist = np.abs(self.transversal(level, cands, t) - w)
        order = np.argsort(dist)
        if n > 1 and dist[order[0]] > tie_ratio * dist[order[1]]:
            raise ConjugacyError(f"sheet choice ambiguous at level {level} near {w}")
        k = int(order[0])
        return float(cands[k]), k

    def level_of(self, w: complex, max_level: int | None = None) -> tuple[int, list[complex]]:
        """Level j with w in A_j and the orbit [w, p(w), ..., p^j(w)]; -1 if w is inside Γ0."""
        top = self.depth if max_level is None else max_level
        if self._closed[0].contains(w):
            return -1, [w]
        orbit = [complex(w)]
        for j in range(top + 1):
            cur = orbit[-1]
            if self._closed[1].contains(cur):
                if self._closed[0].contains(cur) and cur != self.annulus.z_star:
                    raise ConjugacyError(f"orbit of {w} skips A0; point is outside Ω")
                return j, orbit
            orbit.append(complex(self.p(cur)))
        raise DepthInsufficientError(f"{w} lies beyond the tower (depth {self.depth})")

    def locate(self, w: complex) -> tuple[int, float, float]:
        """(level j, sheet angle θ_j, t) of a point of the tower region."""
        j, orbit = self.level_of(w)
        if j < 0:
            raise OutsideAnnulusError("point is inside Γ0")
        theta, t = self.coords0(orbit[-1])
        for level in range(1, j + 1):
            theta, _ = self.pick_sheet(level, orbit[j - level], theta, t)
        return j, theta, t

    def psi_bar(self, w: complex) -> complex:
        j, theta, t = self.locate(w)
        return self._model(theta, t, j)

    def extend(self, levels: int) -> "ConjugacyMap":
        return extend_tower(self, levels)

    # -- serialization
    def to_json(self) -> str:
        a = self.annulus
        doc = {
            "schema": SCHEMA, "version": VERSION,
            "polynomial": self.p.to_string(),
            "z_star": [a.z_star.real, a.z_star.imag],
            "n": a.n, "r": a.r, "level": a.outer.level,
            "interpolation": self.interpolation,
            "residuals": list(self.residuals),
            "levels": [[[z.real, z.imag] for z in c] for c in self.curves],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConjugacyMap":
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA or doc.get("version") != VERSION:
            raise ValueError("not a limitlab conjugacy document (schema/version mismatch)")
        p = ComplexPolynomial.from_string(doc["polynomial"])
        z = complex(*doc["z_star"])
        curves = [np.array([complex(x, y) for x, y in c]) for c in doc["levels"]]
        ann = AnnulusModel(z, doc["n"], doc["r"], ClosedCurve(curves[0], z, doc["level"]),
                           ClosedCurve(curves[1], z), doc["residuals"][0])
        return cls(p, ann, curves, list(doc["residuals"]), doc["interpolation"])


def conjugacy_map(p: ComplexPolynomial, z_star: complex, levels: int = 6, **kw) -> ConjugacyMap:
    ann = build_annulus(p, z_star, **kw)
    base = ConjugacyMap(p, ann, [ann.outer.samples, ann.inner.samples], [ann.residual])
    return extend_tower(base, levels)


def extend_tower(c: ConjugacyMap, levels: int) -> ConjugacyMap:
    """Append lifted tables until there are ``levels`` annuli above A0."""
    curves = list(c.curves)
    residuals = list(c.residuals)
    n = c.n
    while len(curves) - 2 < levels:
        nxt = lift_curve(c.p, curves[-1], n, anchor=curves[-1][0])
        residuals.append(fatou.functional_residual_pair(c.p, nxt, curves[-1], n))
        curves.append(nxt)
    return ConjugacyMap(c.p, c.annulus, curves, residuals, c.interpolation)


def inner_boundary_residual(c: ConjugacyMap) -> float:
    """max over Γ1 samples of |ψ̄0(p(w)) - ψ̄0(w)^n|."""
    g1 = c.curves[1]
    img = c.psi0(c.p(g1))
    own = c.psi0(g1)
    return float(np.abs(img - own ** c.n).max())


# --------------------------------------------------------------------------- ψ on histories

def _decompose(c: ConjugacyMap, h: History):
    """(m, level j of entry m, t, [θ_m, θ_{m+1}, ...], digits) for a non-fixed history."""
    m = None
    for i, e in enumerate(h.entries):
        if not c._closed[0].contains(e):
            m = i
            break
    if m is None:
        raise DepthInsufficientError("history never leaves the disk bounded by Γ0")
    j, theta, t = c.locate(h.entries[m])
    if m >= 1 and j != 0:
        raise ConjugacyError("history is not in the distinguished component")
    thetas = [theta]
    digits = []
    for i in range(m + 1, h.depth + 1):
        level = j + (i - m)
        if level > c.depth:
            raise DepthInsufficientError(
                f"entry {i} sits at tower level {level} > depth {c.depth}")
        theta, k = c.pick_sheet(level, h.entries[i], theta, t)
        thetas.append(theta)
        digits.append(k)
    return m, j, t, thetas, digits


def psi_hat(c: ConjugacyMap, h: History) -> ConePoint:
    """ψ(h) = p̂0^m ψ̄ p̂^{-m}(h) with the smallest m whose entry lies outside the disk of Γ0."""
    if all(e == c.annulus.z_star for e in h.entries):
        return apex(c.n, h.depth)
    m, j, t, thetas, digits = _decompose(c, h)
    point = ConePoint(c.model_radius(t, j), SolenoidPoint(thetas[0], tuple(digits), c.n))
    for _ in range(m):
        point = cone_push(point)
    return point


def psi_entries(c: ConjugacyMap, h: History) -> np.ndarray:
    """Entrywise model values ψ(z_{-i}); deep entries stay O(r) where the cone radius underflows."""
    out = np.zeros(h.depth + 1, dtype=np.complex128)
    if all(e == c.annulus.z_star for e in h.entries):
        return out
    m, j, t, thetas, _ = _decompose(c, h)
    n = c.n
    for i, th in enumerate(thetas):
        out[m + i] = c.model_radius(t, j + i) * np.exp(2j * np.pi * th)
    log_r = math.log(c.model_radius(t, j))
    th = thetas[0]
    for i in range(m - 1, -1, -1):
        th = (n * th) % 1.0
        out[i] = math.exp(log_r * n ** (m - i)) * np.exp(2j * np.pi * th)
    return out


def psi_at_level(c: ConjugacyMap, w: complex, level: int) -> complex:
    """ψ̄(w) computed as if w were in A_level (used on the seams Γ_level, Γ_level+1)."""
    orbit = [complex(w)]
    for _ in range(level):
        orbit.append(complex(c.p(orbit[-1])))
    theta, t = c.coords0(orbit[-1])
    for lv in range(1, level + 1):
        theta, _ = c.pick_sheet(lv, orbit[level - lv], theta, t)
    return c._model(theta, t, level)


def seam_residual(c: ConjugacyMap, per_level: int = 64) -> float:
    """max |ψ̄ from A_{j-1} - ψ̄ from A_j| over samples of the shared boundary Γ_j."""
    worst = 0.0
    for j in range(1, c.depth + 1):
        curve = c.curves[j]
        idx = np.linspace(0, curve.size, per_level, endpoint=False).astype(int)
        for w in curve[idx]:
            worst = max(worst, float(abs(psi_at_level(c, w, j - 1) - psi_at_level(c, w, j))))
    return worst


def shift_equivariance(c: ConjugacyMap, h: History, p: ComplexPolynomial | None = None) -> float:
    from .natext import shift

    p = p or c.p
    a = psi_hat(c, shift(p, h))
    b = cone_shift(psi_hat(c, h))
    if a.is_apex and b.is_apex:
        return 0.0
    return cone_distance(a, b)


# --------------------------------------------------------------------------- sampling and checks

def sample_history(c: ConjugacyMap, rng: np.random.Generator, depth: int = 10,
                   max_level: int | None = None) -> History:
    """Random history whose deepest entry is a random point of A_j, j <= max_level."""
    top = c.depth if max_level is None else min(max_level, c.depth)
    j = int(rng.integers(0, top + 1))
    theta = float(rng.random())
    t = float(rng.random())
    n = c.n
    w = complex(c.point0((n ** j * theta) % 1.0, t))
    for level in range(1, j + 1):
        target_theta = (n ** (j - level) * theta) % 1.0
        roots = solve_many(c.p.array, [w])[0]
        guide = complex(c.transversal(level, target_theta, t))
        w = complex(roots[np.argmin(np.abs(roots - guide))])
    entries = [w]
    for _ in range(depth):
        entries.append(complex(c.p(entries[-1])))
    return History(tuple(reversed(entries)))


@dataclass(frozen=True)
class ConjugacyReport:
    max_residual: float
    mean_residual: float
    argmax: int
    samples: int
    fixed_to_apex: bool
    min_separation: float
    inner_boundary: float
    tower_residuals: tuple[float, ...]
    seam: float = 0.0

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual, "mean_residual": self.mean_residual,
            "argmax": self.argmax, "samples": self.samples, "fixed_to_apex": self.fixed_to_apex,
            "min_separation": self.min_separation, "inner_boundary": self.inner_boundary,
            "tower_residuals": list(self.tower_residuals), "seam": self.seam,
        }


def verify_conjugacy(c: ConjugacyMap, samples: list[History]) -> ConjugacyReport:
    res = np.array([shift_equivariance(c, h) for h in samples]) if samples else np.zeros(0)
    fixed = psi_hat(c, History.fixed(c.annulus.z_star, 10))
    sep = math.inf
    if len(samples) >= 2:
        vecs = [psi_entries(c, h) for h in samples]
        width = max(v.size for v in vecs)
        X = np.zeros((len(vecs), 2 * width))
        for i, v in enumerate(vecs):
            X[i, : v.size] = v.real
            X[i, width: width + v.size] = v.imag
        d, _ = cKDTree(X).query(X, k=2)
        sep = float(d[:, 1].min())
    return ConjugacyReport(
        float(res.max()) if res.size else 0.0,
        float(res.mean()) if res.size else 0.0,
        int(np.argmax(res)) if res.size else -1,
        len(samples), fixed == apex(c.n), sep, inner_boundary_residual(c),
        tuple(c.residuals), seam_residual(c),
    )


__all__ = [
    "AnnulusModel", "ConjugacyMap", "ConjugacyReport", "ConjugacyError", "DepthInsufficientError",
    "OutsideAnnulusError", "build_annulus", "conjugacy_map", "extend_tower", "psi_hat",
    "inner_boundary_residual", "shift_equivariance", "sample_history", "verify_conjugacy",
    "psi_entries", "psi_at_level", "seam_residual",
]
