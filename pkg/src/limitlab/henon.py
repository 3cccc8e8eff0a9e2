"""Hénon maps H(x, y) = (p(x) - a·y, x), solid-torus model maps and accessible-boundary probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .poly import ComplexPolynomial, find_attracting_cycles, solve_many

A_MAX = 0.05


class NestingError(ValueError):
    pass


class SingularDerivativeError(ValueError):
    pass


@dataclass(frozen=True)
class HenonParams:
    p: ComplexPolynomial
    a: complex
    alpha: complex = 0.1
    a_max: float = A_MAX

    def __post_init__(self):
        self.p.require_dynamic()
        if abs(self.a) > self.a_max:
            raise ValueError(f"|a| = {abs(self.a)} exceeds a_max = {self.a_max}")

    def escape_radius(self) -> float:
        return 2.0 * (1.0 + abs(self.a) + self.p.coefficient_bound())


def henon(params: HenonParams, x, y):
    x = np.asarray(x, dtype=np.complex128) if np.ndim(x) else complex(x)
    y = np.asarray(y, dtype=np.complex128) if np.ndim(y) else complex(y)
    return params.p(x) - params.a * y, x


def henon_inverse(params: HenonParams, x, y):
    """H⁻¹(x', y') = (y', (p(y') - x')/a); requires a != 0."""
    if params.a == 0:
        raise ZeroDivisionError("H is not invertible for a = 0")
    return y, (params.p(y) - x) / params.a


def jacobian(params: HenonParams, x: complex, y: complex = 0j) -> np.ndarray:
    return np.array([[params.p.derivative()(x), -params.a], [1.0, 0.0]], dtype=np.complex128)


@dataclass(frozen=True)
class HenonFixedPoint:
    point: tuple[complex, complex]
    eigenvalues: tuple[complex, complex]
    kind: str  # attracting | repelling | saddle | neutral

    @property
    def attracting(self) -> bool:
        return self.kind == "attracting"


def henon_fixed_points(params: HenonParams) -> list[HenonFixedPoint]:
    """Solutions of x = p(x) - a·x on the diagonal, with Jacobian eigenvalues."""
    coeffs = np.array(params.p.coefficients, dtype=np.complex128)
    coeffs[1] -= 1 + params.a
    xs = solve_many(coeffs, [0j])[0]
    dp = params.p.derivative()
    out = []
    for x in xs:
        tr = dp(complex(x))
        disc = np.sqrt(complex(tr * tr - 4 * params.a))
        lam = sorted(((tr + disc) / 2, (tr - disc) / 2), key=lambda v: (abs(v), v.real, v.imag))
        mods = [abs(v) for v in lam]
        if max(mods) < 1:
            kind = "attracting"
        elif min(mods) > 1:
            kind = "repelling"
        elif min(mods) < 1 < max(mods):
            kind = "saddle"
        else:
            kind = "neutral"
        out.append(HenonFixedPoint((complex(x), complex(x)), (complex(lam[0]), complex(lam[1])),
                                   kind))
    return out


def attracting_fixed_point(params: HenonParams) -> HenonFixedPoint:
    pts = [f for f in henon_fixed_points(params) if f.attracting]
    if not pts:
        raise ValueError("no attracting fixed point")
    return min(pts, key=lambda f: max(abs(v) for v in f.eigenvalues))


@dataclass(frozen=True)
class HenonOrbitClass:
    verdict: str  # escaped | bounded | converged
    step: int | None = None
    fixed_index: int | None = None


def classify_henon_orbit(params: HenonParams, x: complex, y: complex,
                         radius: float | None = None, budget: int = 500,
                         eps: float = 1e-9) -> HenonOrbitClass:
    R = params.escape_radius() if radius is None else float(radius)
    if R < params.escape_radius():
        raise ValueError(f"escape radius {R} below 2(1 + |a| + B) = {params.escape_radius()}")
    fixed = [f.point for f in henon_fixed_points(params) if f.attracting]
    st, steps, which = kernels.henon_classify(params.p.array, params.a, [x], [y], R, budget,
                                              fixed, eps)
    if st[0] == 1:
        return HenonOrbitClass("escaped", int(steps[0]))
    if st[0] == 2:
        return HenonOrbitClass("converged", int(steps[0]), int(which[0]))
    return HenonOrbitClass("bounded")


# --------------------------------------------------------------------------- solid tori

@dataclass(frozen=True)
class TorusPoint:
    zeta: complex
    z: complex
    rho: float

    def __post_init__(self):
        if self.rho <= 1:
            raise ValueError("fiber radius must exceed 1")
        if abs(abs(self.zeta) - 1) > 1e-12:
            raise ValueError("zeta must lie on the unit circle")
        if abs(self.z) > self.rho * (1 + 1e-12):
            raise ValueError("z outside the fiber disk")


def _unit(z):
    return z / np.abs(z)


@dataclass(frozen=True)
class TorusMap:
    """F(ζ, z) = (ζ^k, A(ζ) + B(ζ)·z) on S¹ × D_ρ."""

    k: int
    A: Callable = field(repr=False)
    B: Callable = field(repr=False)
    label: str = "torus-map"

    def __call__(self, zeta, z):
        zeta = np.asarray(zeta, dtype=np.complex128)
        z = np.asarray(z, dtype=np.complex128)
        return _unit(zeta ** self.k), self.A(zeta) + self.B(zeta) * z

    def apply(self, pt: TorusPoint) -> TorusPoint:
        zz, w = self(pt.zeta, pt.z)
        return TorusPoint(complex(zz), complex(w), pt.rho)

    def bound(self, rho: float, samples: int = 4096) -> float:
        """sup over a ζ grid of |A(ζ)| + |B(ζ)|ρ, an upper bound for |z'|."""
        zeta = np.exp(2j * np.pi * np.arange(samples) / samples)
        return float(np.max(np.abs(self.A(zeta)) + np.abs(self.B(zeta)) * rho))

    def nesting_radius(self, samples: int = 4096) -> float:
        """Smallest ρ with sup|A| + sup|B|·ρ ≤ ρ; inf when the fibers do not contract."""
        zeta = np.exp(2j * np.pi * np.arange(samples) / samples)
        a = float(np.max(np.abs(self.A(zeta))))
        b = float(np.max(np.abs(self.B(zeta) * np.ones(samples))))
        return a / (1 - b) if b < 1 else math.inf

    def partners(self, zeta, z):
        """For each ω ≠ 1 with ω^k = 1: z'' with F(ωζ, z'') = F(ζ, z)."""
        zeta = np.asarray(zeta, dtype=np.complex128)
        z = np.asarray(z, dtype=np.complex128)
        img = self.A(zeta) + self.B(zeta) * z
        out = []
        for j in range(1, self.k):
            w = zeta * np.exp(2j * np.pi * j / self.k)
            b = self.B(w) * np.ones_like(w)
            gap = img - self.A(w)
            # B = 0: the fiber collapses, so a partner exists only if the images agree
            zz = np.where(b == 0, np.where(gap == 0, 0j, np.inf),
                          gap / np.where(b == 0, 1.0, b))
            out.append((w, zz))
        return out


def solid_torus_map(d: int, alpha: complex) -> TorusMap:
    """f(ζ, z) = (ζ^d, ζ - α z / ζ^(d-1))."""
    return TorusMap(d, lambda zeta: zeta, lambda zeta: -alpha / zeta ** (d - 1),
                    f"solid-torus(d={d}, alpha={alpha})")


def f_solid_torus(d: int, alpha: complex, pt: TorusPoint, check: bool = True) -> TorusPoint:
    if check and not 1 + abs(alpha) * pt.rho < pt.rho:
        raise NestingError(f"1 + |alpha|·rho = {1 + abs(alpha) * pt.rho} is not below rho")
    return solid_torus_map(d, alpha).apply(pt)


def _gamma_eval(gamma) -> Callable:
    curve = getattr(gamma, "curve", gamma)

    def at(zeta):
        theta = np.mod(np.angle(zeta) / (2 * np.pi), 1.0)
        return curve(theta)
    return at


def gamma_torus_map(k: int, alpha: complex, gamma, p: ComplexPolynomial,
                    min_derivative: float = 1e-6) -> TorusMap:
    """(ζ, z) ↦ (ζ^k, γ(ζ) - α z / p'(γ(ζ))), γ interpolated from its table."""
    g = _gamma_eval(gamma)
    dp = p.derivative()
    samples = getattr(gamma, "curve", gamma).samples
    if np.abs(dp(samples)).min() < min_derivative:
        raise SingularDerivativeError("p' vanishes (numerically) on γΩ")

    def B(zeta):
        der = dp(g(zeta))
        if np.any(np.abs(der) < min_derivative):
            raise SingularDerivativeError("|p'(γ(ζ))| below 1e-6")
        return -alpha / der
    return TorusMap(k, g, B, f"gamma-torus(k={k}, alpha={alpha})")


def f_gamma(k: int, alpha: complex, gamma, p: ComplexPolynomial, pt: TorusPoint) -> TorusPoint:
    return gamma_torus_map(k, alpha, gamma, p).apply(pt)


@dataclass(frozen=True)
class TorusReport:
    nesting_margin: float
    bound_margin: float
    winding: int
    injective: bool
    collisions: int
    partner_collisions: int
    diameters: tuple[float, ...]
    decay: tuple[float, ...]
    monotone: bool
    cloud_gap: float
    cloud: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "nesting_margin": self.nesting_margin, "bound_margin": self.bound_margin,
            "winding": self.winding, "injective": self.injective, "collisions": self.collisions,
            "partner_collisions": self.partner_collisions, "diameters": list(self.diameters),
            "decay": list(self.decay), "monotone": self.monotone,
            "cloud_gap": self.cloud_gap,
        }


def winding_number(F: TorusMap, samples: int = 1 << 12) -> int:
    zeta = np.exp(2j * np.pi * np.arange(samples + 1) / samples)
    img, _ = F(zeta, np.zeros_like(zeta))
    lifted = np.unwrap(np.angle(img))
    return int(np.rint((lifted[-1] - lifted[0]) / (2 * np.pi)))


def random_torus_points(rng: np.random.Generator, n: int, rho: float):
    zeta = np.exp(2j * np.pi * rng.random(n))
    z = rho * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    return zeta, z


def torus_diagnostics(F: TorusMap, rho: float, samples: int = 10_000, iterations: int = 12,
                      seed: int = 0, inflate: float = 1e-6) -> TorusReport:
    """Nesting, winding, injectivity and cloud-shrinking checks on random samples."""
    rng = np.random.default_rng(seed)
    zeta, z = random_torus_points(rng, samples, rho)
    zeta1, z1 = F(zeta, z)
    margin = float(rho - np.abs(z1).max())
    bound_margin = float(rho - F.bound(rho))
    wind = winding_number(F)

    # sampled injectivity: images within 1e-9 must come from sources within 1e-7
    img = np.column_stack([zeta1.real, zeta1.imag, z1.real, z1.imag])
    src = np.column_stack([zeta.real, zeta.imag, z.real, z.imag])
    pairs = cKDTree(img).query_pairs(1e-9, output_type="ndarray")
    bad = 0
    if len(pairs):
        gap = np.linalg.norm(src[pairs[:, 0]] - src[pairs[:, 1]], axis=1)
        bad = int((gap > 1e-7).sum())
    # exact collisions: a second preimage of the same image inside the solid torus
    partner_bad = 0
    for _, zz in F.partners(zeta, z):
        partner_bad += int((np.abs(zz) <= rho).sum())

    # fiber diameters: pairs sharing ζ
    za, zb = z[: samples // 2], z[samples // 2: 2 * (samples // 2)]
    ze = zeta[: samples // 2]
    diam = [float(np.abs(za - zb).max())]
    cur_zeta, cur = zeta, z
    history = [(cur_zeta, cur)]
    pa, pb, pz = za, zb, ze
    for _ in range(iterations):
        pz2, pa = F(pz, pa)
        _, pb = F(pz, pb)
        pz = pz2
        diam.append(float(np.abs(pa - pb).max()))
        cur_zeta, cur = F(cur_zeta, cur)
        history.append((cur_zeta, cur))
    decay = tuple(diam[i + 1] / diam[i] if diam[i] > 0 else 0.0 for i in range(len(diam) - 1))

    # monotone clouds: each q in F^t(S) must lie within ``inflate`` of F^(t-1)(T). Pull q
    # back t-1 steps on the branch nearest the disk, clamp into T, then push forward again
    # (the forward map contracts fibers, so this distance is well conditioned)
    worst = 0.0
    for t in range(2, iterations + 1):
        qz, qw = history[t]
        for _ in range(t - 1):
            base = np.exp(1j * np.angle(qz) / F.k)
            roots = base[:, None] * np.exp(2j * np.pi * np.arange(F.k) / F.k)[None, :]
            b = F.B(roots) * np.ones_like(roots)
            safe = np.where(b == 0, 1.0, b)
            w = np.where(b == 0, 0j, (qw[:, None] - F.A(roots)) / safe)
            gap = np.abs(qw[:, None] - F.A(roots))
            score = np.where(b == 0, np.where(gap <= 1e-12 * (1 + np.abs(qw[:, None])), 0.0,
                                              np.inf + gap), np.abs(w))
            pick = np.argmin(score, axis=1)
            rows = np.arange(qz.size)
            qz, qw = roots[rows, pick], w[rows, pick]
        mod = np.abs(qw)
        qw = np.where(mod > rho, qw * (rho / np.maximum(mod, 1e-300)), qw)
        for _ in range(t - 1):
            qz, qw = F(qz, qw)
        gap = np.abs(qz - history[t][0]) + np.abs(qw - history[t][1])
        worst = max(worst, float(gap.max()))
    monotone = worst <= inflate
    return TorusReport(margin, bound_margin, wind, bad == 0 and partner_bad == 0, bad,
                       partner_bad, tuple(diam), decay, monotone, worst, np.array(history[-1]))


# --------------------------------------------------------------------------- accessible boundary

@dataclass(frozen=True)
class BoundaryCertificate:
    direction: float  # angle in turns
    point: tuple[complex, complex] | None
    bracket: float
    bounded: bool
    min_distance: float
    accumulation: float
    certified: bool
    flag: str = ""

    def to_dict(self) -> dict:
        pt = None if self.point is None else [[self.point[0].real, self.point[0].imag],
                                              [self.point[1].real, self.point[1].imag]]
        return {"direction": self.direction, "point": pt, "bracket": self.bracket,
                "bounded": self.bounded, "min_distance": self.min_distance,
                "accumulation": self.accumulation, "certified": self.certified,
                "flag": self.flag}


def _converged(params, fixed, xs, ys, budget):
    st, _, _ = kernels.henon_classify(params.p.array, params.a, xs, ys, params.escape_radius(),
                                      budget, [fixed], 1e-9)
    return st == 2


def accessible_boundary_sample(params: HenonParams, directions: int = 64, gamma=None,
                               refine: int = 80, budget: int = 30, basin_budget: int = 4000,
                               tol: float = 5e-2, scan_step: float = 1e-3,
                               search_radius: float | None = None,
                               tail: int = 10) -> list[BoundaryCertificate]:
    """Radial bisection from z(a) along (e^{iθ}, 0) for D equally spaced θ.

    The emitted point is the first non-basin end of the final bracket. For a > 0
    it is certified when its orbit stays bounded for ``budget`` steps, keeps
    1e-3 away from z(a), and the last ``tail`` x-values lie within ``tol`` of
    the boundary curve ``gamma`` of Ω. For a = 0 the bracket width itself (≤ 1e-6)
    certifies that x lies on ∂Ω.
    """
    fp = attracting_fixed_point(params)
    x0, y0 = fp.point
    if gamma is None:
        from .fatou import boundary_parametrization

        pfix = [c for c in find_attracting_cycles(params.p).cycles if c.period == 1]
        if not pfix:
            raise ValueError("p has no attracting fixed point")
        z_p = min(pfix, key=lambda c: abs(c.points[0] - x0)).points[0]
        gamma = boundary_parametrization(params.p, z_p)
    curve = getattr(gamma, "curve", gamma)
    R = search_radius or 2 * params.p.filled_radius()
    s_grid = np.arange(1, int(R / scan_step) + 1) * scan_step
    out = []
    for j in range(directions):
        theta = j / directions
        e = np.exp(2j * np.pi * theta)
        inside = _converged(params, (x0, y0), x0 + s_grid * e, np.full(s_grid.shape, y0),
                            basin_budget)
        first_out = np.flatnonzero(~inside)
        if first_out.size == 0:
            out.append(BoundaryCertificate(theta, None, math.inf, False, 0.0, math.inf, False,
                                           "ray never leaves the basin"))
            continue
        hi = s_grid[first_out[0]]
        lo = hi - scan_step if first_out[0] > 0 else 0.0
        for _ in range(refine):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _converged(params, (x0, y0), [x0 + mid * e], [y0], basin_budget)[0]:
                lo = mid
            else:
                hi = mid
        bx, by = complex(x0 + hi * e), complex(y0)
        bracket = float(hi - lo)
        xs, ys = [bx], [by]
        for _ in range(budget):
            nx, ny = henon(params, xs[-1], ys[-1])
            xs.append(complex(nx))
            ys.append(complex(ny))
        xs_a, ys_a = np.array(xs), np.array(ys)
        bounded = bool(np.all(np.maximum(np.abs(xs_a), np.abs(ys_a)) <= params.escape_radius()))
        dist = float(np.sqrt(np.abs(xs_a - x0) ** 2 + np.abs(ys_a - y0) ** 2).min())
        if params.a == 0:
            acc = bracket
            ok = bracket <= 1e-6
        else:
            acc = float(np.max(curve.distance(xs_a[-tail:]))) if bounded else math.inf
            ok = bounded and dist > 1e-3 and acc <= tol
        out.append(BoundaryCertificate(theta, (bx, by), bracket, bounded, dist, acc, ok))
    return out


@dataclass(frozen=True)
class CantorEndpoint:
    value: Fraction
    gap: tuple[Fraction, Fraction]
    stage: int

    def witness_path(self, steps: int = 8) -> list[Fraction]:
        """Points η(s), s = 1, 1/2, ..., approaching the endpoint from inside its gap."""
        mid = (self.gap[0] + self.gap[1]) / 2
        return [self.value + (mid - self.value) / 2 ** i for i in range(steps)]


def cantor_accessible(k: int) -> list[CantorEndpoint]:
    """Endpoints of the middle-third gaps removed in the first k stages, sorted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    intervals = [(Fraction(0), Fraction(1))]
    out = []
    for stage in range(1, k + 1):
        nxt = []
        for lo, hi in intervals:
            third = (hi - lo) / 3
            a, b = lo + third, hi - third
            out.append(CantorEndpoint(a, (a, b), stage))
            out.append(CantorEndpoint(b, (a, b), stage))
            nxt += [(lo, a), (b, hi)]
        intervals = nxt
    return sorted(out, key=lambda e: e.value)


def in_cantor_set(x: Fraction, depth: int = 64) -> bool:
    """Membership in the first ``depth`` stages of the middle-third set (exact)."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        return False
    for _ in range(depth):
        if Fraction(1, 3) < x < Fraction(2, 3):
            return False
        x = 3 * x if x <= Fraction(1, 3) else 3 * x - 2
    return True


# --------------------------------------------------------------------------- basin classification

def basin_grid(params: HenonParams, xs: np.ndarray, y: complex, budget: int = 300):
    """Classification over the slice {y = const}: (status, steps, fixed index) shaped like xs."""
    fixed = [f.point for f in henon_fixed_points(params) if f.attracting]
    st, steps, which = kernels.henon_classify(params.p.array, params.a, xs.ravel(),
                                              np.full(xs.size, y), params.escape_radius(), budget,
                                              fixed, 1e-6)
    return st.reshape(xs.shape), steps.reshape(xs.shape), which.reshape(xs.shape)


__all__ = [
    "HenonParams", "HenonFixedPoint", "HenonOrbitClass", "TorusPoint", "TorusMap", "TorusReport",
    "BoundaryCertificate", "CantorEndpoint", "NestingError", "SingularDerivativeError", "henon",
    "henon_inverse", "jacobian", "henon_fixed_points", "attracting_fixed_point",
    "classify_henon_orbit", "solid_torus_map", "f_solid_torus", "gamma_torus_map", "f_gamma",
    "winding_number", "random_torus_points", "torus_diagnostics", "accessible_boundary_sample",
    "cantor_accessible", "in_cantor_set", "basin_grid",
]
