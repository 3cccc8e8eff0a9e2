"""Complex polynomials: evaluation, preimages, critical points and attracting cycles.

Coefficients are stored lowest degree first. Root finding is a batched
Aberth-Ehrlich iteration (one polynomial, many right-hand sides) with a
perturbed-restart ladder and a companion-matrix fallback.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

MAX_DESK_DEGREE = 10


class RootFindingError(ArithmeticError):
    """Simultaneous iteration failed for right-hand side(s) ``c``."""

    def __init__(self, c, residual):
        self.c = c
        self.residual = residual
        super().__init__(f"root finding did not converge for c={c!r} (residual {residual:.3e})")


class DegreeError(ValueError):
    pass


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?:(?P<r>[+-]?{_NUM})|(?P<i>[+-]?(?:{_NUM})?)i|(?P<rr>[+-]?{_NUM})(?P<ii>[+-](?:{_NUM})?)i)$"
)


def _imag_part(txt: str) -> float:
    if txt in ("", "+"):
        return 1.0
    if txt == "-":
        return -1.0
    return float(txt)


def parse_complex(text: str) -> complex:
    """Parse a complex literal of the form ``x``, ``x+yi``, ``yi``, ``-i``.

    >>> parse_complex("-0.5+0.25i")
    (-0.5+0.25j)
    >>> parse_complex("i")
    1j
    """
    m = _COMPLEX_RE.match(text.strip())
    if m is None:
        raise ValueError(f"bad complex literal {text!r}")
    if m.group("r") is not None:
        return complex(float(m.group("r")), 0.0)
    if m.group("i") is not None:
        return complex(0.0, _imag_part(m.group("i")))
    return complex(float(m.group("rr")), _imag_part(m.group("ii")))


def format_complex(z: complex) -> str:
    """Inverse of :func:`parse_complex` (shortest round-trip float repr)."""
    z = complex(z)
    re_, im = z.real, z.imag
    if im == 0.0:
        return repr(re_ + 0.0)
    im_txt = repr(abs(im))
    if re_ == 0.0:
        return ("-" if im < 0 else "") + im_txt + "i"
    return f"{re_!r}{'-' if im < 0 else '+'}{im_txt}i"


def _horner(coeffs: np.ndarray, z):
    acc = np.full(np.shape(z), coeffs[-1], dtype=np.complex128)
    for a in coeffs[-2::-1]:
        acc = acc * z + a
    return acc


@dataclass(frozen=True)
class ComplexPolynomial:
    """p(z) = sum coefficients[i] * z**i, trailing zeros stripped."""

    coefficients: tuple[complex, ...]
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cs = [complex(c) for c in self.coefficients]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs or (len(cs) == 1 and cs[0] == 0):
            raise DegreeError("zero polynomial")
        object.__setattr__(self, "coefficients", tuple(cs))
        object.__setattr__(self, "_arr", np.array(cs, dtype=np.complex128))

    @classmethod
    def from_string(cls, text: str) -> "ComplexPolynomial":
        """Parse ``"a0,a1,...,ad"`` with complex literals ``x+yi``."""
        parts = [t for t in text.split(",")]
        if not parts or any(not t.strip() for t in parts):
            raise ValueError(f"bad coefficient list {text!r}")
        return cls(tuple(parse_complex(t) for t in parts))

    def to_string(self) -> str:
        return ",".join(format_complex(c) for c in self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def array(self) -> np.ndarray:
        return self._arr

    def __call__(self, z):
        if np.isscalar(z):
            acc = self.coefficients[-1]
            for a in self.coefficients[-2::-1]:
                acc = acc * z + a
            return complex(acc)
        return _horner(self._arr, np.asarray(z, dtype=np.complex128))

    def derivative(self) -> "ComplexPolynomial":
        if self.degree == 0:
            raise DegreeError("derivative of a constant is zero")
        return ComplexPolynomial(tuple(i * c for i, c in enumerate(self.coefficients) if i > 0))

    def compose(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        """self ∘ other."""
        acc = np.array([self.coefficients[-1]], dtype=np.complex128)
        inner = np.asarray(other.coefficients, dtype=np.complex128)
        for c in reversed(self.coefficients[:-1]):
            acc = np.convolve(acc, inner)
            acc[0] += c
        return ComplexPolynomial(tuple(complex(x) for x in acc))

    def iterate(self, n: int) -> "ComplexPolynomial":
        out = self
        for _ in range(n - 1):
            out = self.compose(out)
        return out

    def coefficient_bound(self) -> float:
        """Bound B with |z| > 2*max(1, B) forcing |p(z)| > |z| (escape criterion)."""
        d = self.degree
        lead = abs(self.coefficients[-1])
        rest = sum(abs(c) for c in self.coefficients[:-1]) / lead
        return max(rest, lead ** (-1.0 / (d - 1)) if d >= 2 else 0.0)

    def filled_radius(self) -> float:
        """Radius r* with |p(z)| > |z| for |z| > r*; the filled Julia set lies in |z| <= r*."""
        mags = np.abs(self._arr).astype(float)
        mags[:-1] *= -1.0
        if mags.size > 1:
            mags[1] -= 1.0
        roots = np.roots(mags[::-1])
        real = roots[np.abs(roots.imag) < 1e-9].real
        return float(real.max()) * (1 + 1e-12) if real.size else 0.0

    def escape_radius(self) -> float:
        return 2.0 * max(1.0, self.coefficient_bound())

    def is_model_monomial(self) -> bool:
        """True for p(z) = z**d exactly (the solenoid model p0)."""
        return all(c == 0 for c in self.coefficients[:-1]) and self.coefficients[-1] == 1

    def taylor_at(self, z0: complex) -> np.ndarray:
        """Coefficients b with p(z0 + u) = sum b[j] u**j."""
        b = list(self.coefficients)
        n = len(b)
        out = []
        for _ in range(n):
            acc = b[-1]
            quot = [acc]
            for a in b[-2::-1]:
                acc = acc * z0 + a
                quot.append(acc)
            out.append(quot[-1])
            b = quot[-2::-1]
            if not b:
                break
        return np.array(out, dtype=np.complex128)

    def require_dynamic(self) -> None:
        if self.degree < 2:
            raise DegreeError(f"dynamical operations need degree >= 2, got {self.degree}")
        if self.degree > MAX_DESK_DEGREE:
            raise DegreeError(f"desk limit is degree <= {MAX_DESK_DEGREE}, got {self.degree}")


def eval_poly(p: ComplexPolynomial, z):
    return p(z)


def _poly_and_deriv(coeffs: np.ndarray, w: np.ndarray, shift: np.ndarray):
    """Values of q(w) = p(w) - shift and q'(w); ``shift`` broadcasts over trailing axes."""
    val = np.full(w.shape, coeffs[-1], dtype=np.complex128)
    der = np.zeros(w.shape, dtype=np.complex128)
    for a in coeffs[-2::-1]:
        der = der * w + val
        val = val * w + a
    return val - shift, der


def _aberth(coeffs: np.ndarray, cs: np.ndarray, w: np.ndarray, max_iter: int = 200) -> np.ndarray:
    d = w.shape[1]
    shift = cs[:, None]
    live = np.arange(w.shape[0])
    for _ in range(max_iter):
        if live.size == 0:
            break
        wl = w[live]
        q, dq = _poly_and_deriv(coeffs, wl, shift[live])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = q / dq
            diff = wl[:, :, None] - wl[:, None, :]
            idx = np.arange(d)
            diff[:, idx, idx] = 1.0
            inv = 1.0 / diff
            inv[:, idx, idx] = 0.0
            s = inv.sum(axis=2)
            step = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        step[(q == 0)] = 0.0
        w[live] = wl - step
        scale = np.maximum(1.0, np.abs(wl))
        done = np.all(np.abs(step) <= 4e-16 * scale, axis=1)
        live = live[~done]
    return w


def _polish(coeffs: np.ndarray, cs: np.ndarray, w: np.ndarray, rounds: int = 3) -> np.ndarray:
    shift = cs[:, None]
    for _ in range(rounds):
        q, dq = _poly_and_deriv(coeffs, w, shift)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = w - q / dq
        ok = np.isfinite(cand)
        cand = np.where(ok, cand, w)
        qc, _ = _poly_and_deriv(coeffs, cand, shift)
        w = np.where(np.abs(qc) < np.abs(q), cand, w)
    return w


def _initial(coeffs: np.ndarray, cs: np.ndarray, rng=None) -> np.ndarray:
    d = len(coeffs) - 1
    lead = coeffs[-1]
    center = -coeffs[-2] / (d * lead)
    q0, _ = _poly_and_deriv(coeffs, np.full((cs.size, 1), center), cs[:, None])
    rad = (np.abs(q0[:, 0]) / abs(lead)) ** (1.0 / d)
    rad = np.maximum(rad, 1e-6 * (1.0 + abs(center)))
    phase = 0.4 + 2.0 * np.pi * np.arange(d) / d
    w = center + rad[:, None] * np.exp(1j * phase)[None, :]
    if rng is not None:
        w = w * (1.0 + 0.3 * (rng.random(w.shape) - 0.5)) + rad[:, None] * 0.1 * (
            rng.random(w.shape) - 0.5 + 1j * (rng.random(w.shape) - 0.5))
    return w


def _residual(coeffs, cs, w):
    q, _ = _poly_and_deriv(coeffs, w, cs[:, None])
    return np.abs(q).max(axis=1) / np.maximum(1.0, np.abs(cs))


def solve_many(coeffs, cs, tol: float = 1e-10) -> np.ndarray:
    """All roots of p(w) = c for every c in ``cs``; shape (len(cs), d).

    Each row is polished until |p(w) - c| <= tol * max(1, |c|); rows that fail
    the Aberth pass go through three perturbed restarts, then the companion
    matrix. Rows sorted by (real, imag) for determinism.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    cs = np.atleast_1d(np.asarray(cs, dtype=np.complex128))
    d = len(coeffs) - 1
    if d < 1:
        raise DegreeError("constant polynomial has no roots")
    if d == 1:
        w = ((cs - coeffs[0]) / coeffs[1])[:, None]
        return w
    w = _polish(coeffs, cs, _aberth(coeffs, cs, _initial(coeffs, cs)))
    res = _residual(coeffs, cs, w)
    bad = np.flatnonzero(~(res <= tol))
    rng = np.random.default_rng(20240917)
    for _ in range(3):
        if bad.size == 0:
            break
        sub = cs[bad]
        wb = _polish(coeffs, sub, _aberth(coeffs, sub, _initial(coeffs, sub, rng)))
        w[bad] = wb
        bad = bad[~(_residual(coeffs, sub, wb) <= tol)]
    for i in bad:
        comp = coeffs.copy()
        comp[0] -= cs[i]
        wb = _polish(coeffs, cs[i:i + 1], np.roots(comp[::-1])[None, :].astype(np.complex128))
        w[i] = wb[0]
    if bad.size:
        res = _residual(coeffs, cs[bad], w[bad])
        if not np.all(res <= tol):
            k = int(np.argmax(res))
            raise RootFindingError(complex(cs[bad][k]), float(res[k]))
    order = np.lexsort((w.imag, w.real), axis=1)
    return np.take_along_axis(w, order, axis=1)


def preimages(p: ComplexPolynomial, c: complex) -> list[complex]:
    """All d roots of p(w) = c with multiplicity."""
    return [complex(w) for w in solve_many(p.array, [c])[0]]


def preimages_many(p: ComplexPolynomial, cs) -> np.ndarray:
    return solve_many(p.array, cs)


def critical_points(p: ComplexPolynomial) -> list[complex]:
    """Roots of p' with multiplicity (d - 1 of them)."""
    p.require_dynamic()
    return [complex(w) for w in solve_many(p.derivative().array, [0.0])[0]]


def critical_values(p: ComplexPolynomial) -> list[complex]:
    return [p(c) for c in critical_points(p)]


@dataclass(frozen=True)
class Cycle:
    points: tuple[complex, ...]
    multiplier: complex

    @property
    def period(self) -> int:
        return len(self.points)

    @property
    def attracting(self) -> bool:
        return abs(self.multiplier) < 1.0

    def residual(self, p: ComplexPolynomial) -> float:
        q = self.period
        return max(abs(p(self.points[i]) - self.points[(i + 1) % q]) for i in range(q))

    def distance(self, other: "Cycle") -> float:
        """Hausdorff distance between the point sets."""
        a = np.array(self.points)
        b = np.array(other.points)
        dm = np.abs(a[:, None] - b[None, :])
        return float(max(dm.min(axis=1).max(), dm.min(axis=0).max()))


@dataclass(frozen=True)
class CycleSearch:
    cycles: tuple[Cycle, ...]
    incomplete: bool

    def __iter__(self):
        return iter(self.cycles)

    def __len__(self):
        return len(self.cycles)


def _polish_cycle(p: ComplexPolynomial, z: complex, q: int) -> complex:
    dp = p.derivative()
    for _ in range(50):
        w, der = z, 1.0 + 0j
        for _ in range(q):
            der *= dp(w)
            w = p(w)
        f = w - z
        g = der - 1.0
        if g == 0:
            break
        step = f / g
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _make_cycle(p: ComplexPolynomial, z: complex, q: int) -> Cycle:
    dp = p.derivative()
    pts = [z]
    for _ in range(q - 1):
        pts.append(p(pts[-1]))
    start = min(range(q), key=lambda i: (round(pts[i].real, 9), round(pts[i].imag, 9)))
    pts = pts[start:] + pts[:start]
    mult = complex(np.prod([dp(w) for w in pts]))
    return Cycle(tuple(pts), mult)


def find_attracting_cycles(p: ComplexPolynomial, max_period: int = 8, seed_count: int = 0,
                           budget: int = 2000, seed: int = 0) -> CycleSearch:
    """Attracting cycles reachable from the critical points (and extra random seeds).

    A seed that neither escapes nor settles on a cycle within ``budget``
    iterations marks the result incomplete.
    """
    p.require_dynamic()
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    radius = p.escape_radius()
    seeds = critical_points(p)
    if seed_count:
        rng = np.random.default_rng(seed)
        r = radius * np.sqrt(rng.random(seed_count))
        t = 2 * np.pi * rng.random(seed_count)
        seeds += list(r * np.exp(1j * t))
    found: list[Cycle] = []
    incomplete = False
    for s in seeds:
        hist = [complex(s)]
        z = complex(s)
        cycle = None
        for _ in range(budget):
            z = p(z)
            if abs(z) > radius:
                break
            hist.append(z)
            tol = 1e-10 * max(1.0, abs(z))
            period = next((q for q in range(1, max_period + 1)
                           if len(hist) > q and abs(hist[-1] - hist[-1 - q]) <= tol), None)
            if period is not None:
                zc = _polish_cycle(p, z, period)
                cand = _make_cycle(p, zc, period)
                if cand.attracting and cand.residual(p) <= 1e-9:
                    cycle = cand
                break
        else:
            incomplete = True
        if cycle is None:
            if abs(z) <= radius and not incomplete:
                incomplete = True
            continue
        if all(c.period != cycle.period or c.distance(cycle) > 1e-6 for c in found):
            found.append(cycle)
    found.sort(key=lambda c: (c.period, round(c.points[0].real, 9), round(c.points[0].imag, 9)))
    return CycleSearch(tuple(found), incomplete)


@dataclass(frozen=True)
class CriticalVerdict:
    critical_point: complex
    verdict: str  # "attracted", "escaped", "undecided"
    steps: int
    cycle_index: int | None = None


@dataclass(frozen=True)
class HyperbolicityReport:
    hyperbolic: bool
    verdicts: tuple[CriticalVerdict, ...]
    cycles: tuple[Cycle, ...]

    def __bool__(self):
        return self.hyperbolic


def is_desk_hyperbolic(p: ComplexPolynomial, budget: int = 500) -> HyperbolicityReport:
    """Desk proxy for hyperbolicity: every critical orbit lands near an attracting cycle."""
    p.require_dynamic()
    cycles = find_attracting_cycles(p, budget=max(budget, 100)).cycles
    radius = p.escape_radius()
    verdicts = []
    for c in critical_points(p):
        z = c
        verdict = CriticalVerdict(c, "undecided", budget)
        for n in range(budget + 1):
            if abs(z) > radius:
                verdict = CriticalVerdict(c, "escaped", n)
                break
            hit = next((i for i, cy in enumerate(cycles)
                        if min(abs(z - w) for w in cy.points) <= 1e-6), None)
            if hit is not None:
                verdict = CriticalVerdict(c, "attracted", n, hit)
                break
            z = p(z)
        verdicts.append(verdict)
    ok = all(v.verdict == "attracted" for v in verdicts)
    return HyperbolicityReport(ok, tuple(verdicts), cycles)


def forward_orbit(p: ComplexPolynomial, z: complex, n: int) -> list[complex]:
    out = [complex(z)]
    for _ in range(n):
        out.append(p(out[-1]))
    return out


def postcritical_points(p: ComplexPolynomial, n: int = 64) -> list[complex]:
    """First ``n`` forward images of every critical point (escaping orbits truncated)."""
    radius = p.escape_radius()
    pts = []
    for c in critical_points(p):
        z = c
        for _ in range(n):
            z = p(z)
            if abs(z) > radius:
                break
            pts.append(z)
    return pts


def cauchy_radius(p: ComplexPolynomial) -> float:
    return 1.0 + max(abs(c / p.coefficients[-1]) for c in p.coefficients[:-1])


__all__ = [
    "ComplexPolynomial", "Cycle", "CycleSearch", "CriticalVerdict", "HyperbolicityReport",
    "RootFindingError", "DegreeError", "parse_complex", "format_complex", "eval_poly",
    "preimages", "preimages_many", "solve_many", "critical_points", "critical_values",
    "find_attracting_cycles", "is_desk_hyperbolic", "forward_orbit", "postcritical_points",
    "cauchy_radius",
]
