"""Exact models for z -> z**n: the solenoid Σ_n and the cone over it.

Angles are measured in turns. A SolenoidPoint stores θ0 and digits
(k1, ..., kN) with θ_{-i} = (θ_{-i+1} + k_i) / n. Angles may be Fractions
(exact mode) or floats.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .natext import History

Angle = Fraction | float


def _frac(x: Angle) -> Angle:
    return x - math.floor(x)


def _fmt_angle(x: Angle):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _parse_angle(v) -> Angle:
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class SolenoidPoint:
    theta0: Angle
    digits: tuple[int, ...]
    base: int

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if not 0 <= self.theta0 < 1:
            raise ValueError(f"theta0 {self.theta0} outside [0, 1)")
        digits = tuple(int(k) for k in self.digits)
        if any(not 0 <= k < self.base for k in digits):
            raise ValueError(f"digits {digits} outside 0..{self.base - 1}")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def zero(cls, base: int, depth: int = 0, exact: bool = True) -> "SolenoidPoint":
        return cls(Fraction(0) if exact else 0.0, (0,) * depth, base)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def exact(self) -> bool:
        return isinstance(self.theta0, Fraction)

    def angles(self) -> list[Angle]:
        """[θ0, θ-1, ..., θ-N]."""
        out = [self.theta0]
        for k in self.digits:
            out.append((out[-1] + k) / self.base)
        return out

    def truncate(self, depth: int) -> "SolenoidPoint":
        return SolenoidPoint(self.theta0, self.digits[:depth], self.base)

    def to_dict(self) -> dict:
        return {"theta0": _fmt_angle(self.theta0), "digits": list(self.digits), "base": self.base}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SolenoidPoint":
        return cls(_parse_angle(doc["theta0"]), tuple(doc["digits"]), int(doc["base"]))

    @classmethod
    def from_json(cls, text: str) -> "SolenoidPoint":
        return cls.from_dict(json.loads(text))


def solenoid_shift(s: SolenoidPoint) -> SolenoidPoint:
    """Forward map induced by z -> z**n; the deepest digit falls off at fixed depth."""
    t = s.base * s.theta0
    lead = math.floor(t)
    digits = ((lead,) + s.digits)[: s.depth]
    return SolenoidPoint(_frac(t), digits, s.base)


def solenoid_push(s: SolenoidPoint) -> SolenoidPoint:
    """Like solenoid_shift but keeps every digit, so the depth grows by one."""
    t = s.base * s.theta0
    return SolenoidPoint(_frac(t), (math.floor(t),) + s.digits, s.base)


def solenoid_unshift(s: SolenoidPoint, k: int) -> SolenoidPoint:
    """Backward step: move to θ-1 and append k as the new deepest digit.

    With no recorded digits the step itself uses k: θ0' = (θ0 + k)/n.
    solenoid_shift(solenoid_unshift(s, k)) == s for every k.
    """
    if not 0 <= k < s.base:
        raise ValueError(f"digit {k} outside 0..{s.base - 1}")
    if s.depth == 0:
        return SolenoidPoint((s.theta0 + k) / s.base, (), s.base)
    return SolenoidPoint((s.theta0 + s.digits[0]) / s.base, s.digits[1:] + (k,), s.base)


@dataclass(frozen=True)
class ConePoint:
    """Point (r, s) of the cone over Σ_n; every r = 0 point is the cone point."""

    r: float
    s: SolenoidPoint

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("cone radius must be nonnegative")

    @property
    def is_apex(self) -> bool:
        return self.r == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConePoint):
            return NotImplemented
        if self.r == 0 and other.r == 0:
            return True
        return self.r == other.r and self.s == other.s

    def __hash__(self):
        return hash(0) if self.r == 0 else hash((self.r, self.s))

    def to_dict(self) -> dict:
        return {"r": self.r, "solenoid": self.s.to_dict()}


def apex(base: int, depth: int = 0) -> ConePoint:
    return ConePoint(0.0, SolenoidPoint.zero(base, depth))


def cone_shift(c: ConePoint) -> ConePoint:
    return ConePoint(c.r ** c.s.base, solenoid_shift(c.s))


def cone_push(c: ConePoint) -> ConePoint:
    return ConePoint(c.r ** c.s.base, solenoid_push(c.s))


def cone_unshift(c: ConePoint, k: int) -> ConePoint:
    return ConePoint(c.r ** (1.0 / c.s.base), solenoid_unshift(c.s, k))


def cone_distance(a: ConePoint, b: ConePoint, depth: int | None = None) -> float:
    """Sup distance between the decoded histories over the common depth."""
    n = min(a.s.depth, b.s.depth) if depth is None else depth
    za = decode(a, n).array()
    zb = decode(b, n).array()
    return float(np.abs(za - zb).max())


# --------------------------------------------------------------------------- histories of z**n

@dataclass(frozen=True)
class PolarHistory:
    """History of z**n in polar form with exact angles: entry i is radii[i]·e(angles[i])."""

    radii: tuple[float, ...]
    angles: tuple[Fraction, ...]

    @property
    def depth(self) -> int:
        return len(self.radii) - 1

    def to_history(self) -> History:
        return History(tuple(r * np.exp(2j * np.pi * float(a)) for r, a in zip(self.radii,
                                                                                 self.angles)))


def shift_polar(h: PolarHistory, n: int) -> PolarHistory:
    return PolarHistory((h.radii[0] ** n,) + h.radii, (_frac(n * h.angles[0]),) + h.angles)


def shift_history_p0(h: History, n: int) -> History:
    return History((h.head ** n,) + h.entries)


def encode_polar(h: PolarHistory, n: int) -> ConePoint:
    """Exact encoding; raises if the angle relations fail."""
    if all(r == 0 for r in h.radii):
        return apex(n, h.depth)
    if any(r == 0 for r in h.radii):
        raise ValueError("history mixes zero and nonzero entries")
    digits = []
    for prev, cur in zip(h.angles[:-1], h.angles[1:]):
        k = n * cur - prev
        if not isinstance(k, Fraction) or k.denominator != 1 or not 0 <= k < n:
            raise ValueError(f"angles {prev}, {cur} are not related by z -> z^{n}")
        digits.append(int(k))
    return ConePoint(h.radii[0], SolenoidPoint(Fraction(h.angles[0]), tuple(digits), n))


def decode_polar(c: ConePoint, depth: int) -> PolarHistory:
    n = c.s.base
    if c.is_apex:
        return PolarHistory((0.0,) * (depth + 1), (Fraction(0),) * (depth + 1))
    angles = c.s.angles()[: depth + 1]
    if len(angles) < depth + 1:
        raise ValueError(f"cone point carries only {c.s.depth} digits")
    radii = tuple(c.r ** (1.0 / n ** i) for i in range(depth + 1))
    return PolarHistory(radii, tuple(angles))


def encode_history_p0(h: History | Sequence[complex], n: int, tol: float = 1e-9) -> ConePoint:
    """Floating encoding: r = |z0|, digits from angle relations of consecutive entries."""
    if not isinstance(h, History):
        h = History(tuple(h))
    z = h.array()
    zero = z == 0
    if zero.all():
        return apex(n, h.depth)
    if zero.any():
        raise ValueError("history mixes zero and nonzero entries")
    if h.depth:
        res = np.abs(z[1:] ** n - z[:-1]) / np.maximum(1.0, np.abs(z[:-1]))
        if res.max() > tol:
            raise ValueError(f"entries do not form a history of z^{n} (residual {res.max():.2e})")
    theta = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    theta = np.where(theta >= 1.0, 0.0, theta)
    k = np.mod(np.rint(n * theta[1:] - theta[:-1]), n).astype(int)
    return ConePoint(float(abs(z[0])), SolenoidPoint(float(theta[0]), tuple(k.tolist()), n))


def decode(c: ConePoint, depth: int) -> History:
    n = c.s.base
    if c.is_apex:
        return History((0j,) * (depth + 1))
    angles = c.s.angles()
    if len(angles) < depth + 1:
        raise ValueError(f"cone point carries only {c.s.depth} digits")
    return History(tuple(c.r ** (1.0 / n ** i) * np.exp(2j * np.pi * float(angles[i]))
                         for i in range(depth + 1)))


def random_solenoid_point(rng: np.random.Generator, n: int, depth: int,
                          max_den: int = 997) -> SolenoidPoint:
    q = int(rng.integers(1, max_den + 1))
    return SolenoidPoint(Fraction(int(rng.integers(0, q)), q),
                         tuple(int(x) for x in rng.integers(0, n, depth)), n)


__all__ = [
    "SolenoidPoint", "ConePoint", "PolarHistory", "solenoid_shift", "solenoid_push", "solenoid_unshift", "apex",
    "cone_shift", "cone_push", "cone_unshift", "cone_distance", "shift_polar", "shift_history_p0",
    "encode_polar", "decode_polar", "encode_history_p0", "decode", "random_solenoid_point",
]
