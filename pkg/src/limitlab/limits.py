"""Exact bookkeeping for Z[1/m], direct limits of Z-towers, component graphs and coverings."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

SCHEMA = "limitlab.component-graph"
VERSION = 1


def _strip(num: int, exp: int, base: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    while exp > 0 and num % base == 0:
        num //= base
        exp -= 1
    return num, exp


@dataclass(frozen=True)
class LocalizedInteger:
    """numerator / base**exponent, stored in normal form."""

    numerator: int
    exponent: int = 0
    base: int = 2

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if self.exponent < 0:
            raise ValueError("exponent must be >= 0")
        num, exp = _strip(int(self.numerator), int(self.exponent), self.base)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def from_fraction(cls, q: Fraction | int, base: int) -> "LocalizedInteger":
        q = Fraction(q)
        den, exp = q.denominator, 0
        while den % base == 0 and den > 1:
            den //= base
            exp += 1
        scale = base ** exp
        if scale % q.denominator:
            raise ValueError(f"{q} is not in Z[1/{base}]")
        return cls(q.numerator * (scale // q.denominator), exp, base)

    def _same(self, other: "LocalizedInteger") -> None:
        if not isinstance(other, LocalizedInteger) or other.base != self.base:
            raise ValueError("operands must share the same base")

    def __add__(self, other: "LocalizedInteger") -> "LocalizedInteger":
        self._same(other)
        e = max(self.exponent, other.exponent)
        num = (self.numerator * self.base ** (e - self.exponent)
               + other.numerator * self.base ** (e - other.exponent))
        return LocalizedInteger(num, e, self.base)

    def __neg__(self) -> "LocalizedInteger":
        return LocalizedInteger(-self.numerator, self.exponent, self.base)

    def __sub__(self, other: "LocalizedInteger") -> "LocalizedInteger":
        return self + (-other)

    def __mul__(self, other) -> "LocalizedInteger":
        if isinstance(other, LocalizedInteger):
            self._same(other)
            return LocalizedInteger(self.numerator * other.numerator,
                                    self.exponent + other.exponent, self.base)
        if isinstance(other, int):
            return LocalizedInteger(self.numerator * other, self.exponent, self.base)
        return NotImplemented

    __rmul__ = __mul__

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.base ** self.exponent)

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{self.base}^{self.exponent}"


def localized_add(x: LocalizedInteger, y: LocalizedInteger) -> LocalizedInteger:
    return x + y


def localized_neg(x: LocalizedInteger) -> LocalizedInteger:
    return -x


def localized_scale(x: LocalizedInteger, y: LocalizedInteger | int) -> LocalizedInteger:
    return x * y


@dataclass(frozen=True)
class LimitGroupElement:
    """Class of (level, value) in the direct limit of Z --(×m)--> Z --(×m)--> ..."""

    level: int
    value: int
    m: int = 2

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("structure multiplier must be >= 2")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        value, level = _strip(int(self.value), int(self.level), self.m)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "level", level)

    def raise_to(self, level: int) -> int:
        """Representative value at a higher level (push along the structure maps)."""
        if level < self.level:
            raise ValueError("can only push forward to a higher level")
        return self.value * self.m ** (level - self.level)

    def to_localized(self) -> LocalizedInteger:
        return LocalizedInteger(self.value, self.level, self.m)

    def __add__(self, other: "LimitGroupElement") -> "LimitGroupElement":
        return limit_add(self, other)

    def __neg__(self) -> "LimitGroupElement":
        return LimitGroupElement(self.level, -self.value, self.m)


def limit_normalize(level: int, value: int, m: int) -> LimitGroupElement:
    return LimitGroupElement(level, value, m)


def limit_add(a: LimitGroupElement, b: LimitGroupElement) -> LimitGroupElement:
    if a.m != b.m:
        raise ValueError("operands must share the structure multiplier")
    top = max(a.level, b.level)
    return LimitGroupElement(top, a.raise_to(top) + b.raise_to(top), a.m)


def limit_equal(a: LimitGroupElement | tuple, b: LimitGroupElement | tuple, m: int | None = None
                ) -> bool:
    """Equality by pushing both representatives to a common level (no normalization used)."""
    la, va = (a.level, a.value) if isinstance(a, LimitGroupElement) else a
    lb, vb = (b.level, b.value) if isinstance(b, LimitGroupElement) else b
    mm = m or (a.m if isinstance(a, LimitGroupElement) else b.m)
    top = max(la, lb)
    return va * mm ** (top - la) == vb * mm ** (top - lb)


# --------------------------------------------------------------------------- H1 model

@dataclass(frozen=True)
class H1Model:
    """⊕_{X in X0} Z[1/k(X)], the image of the split injection; the cokernel is not modeled."""

    summands: tuple[tuple[str, int], ...]

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self.summands)

    def describe(self) -> str:
        return " ⊕ ".join(f"Z[1/{k}]" for _, k in self.summands)

    def zero(self) -> tuple[LocalizedInteger, ...]:
        return tuple(LocalizedInteger(0, 0, k) for _, k in self.summands)

    def inclusion(self, node: str, value: LocalizedInteger | int = 1) -> tuple[LocalizedInteger, ...]:
        """Image of `value` times the level-0 boundary-curve generator of `node`."""
        i = self.nodes.index(node)
        k = self.summands[i][1]
        v = value if isinstance(value, LocalizedInteger) else LocalizedInteger(value, 0, k)
        if v.base != k:
            raise ValueError(f"summand {node} is Z[1/{k}]")
        out = list(self.zero())
        out[i] = v
        return tuple(out)

    def projection(self, vec: Sequence[LocalizedInteger], node: str) -> LocalizedInteger:
        return vec[self.nodes.index(node)]

    @staticmethod
    def add(u: Sequence[LocalizedInteger], v: Sequence[LocalizedInteger]):
        return tuple(a + b for a, b in zip(u, v))

    def to_dict(self) -> dict:
        return {"group": self.describe(),
                "summands": [{"node": x, "k": k} for x, k in self.summands],
                "surjective": False}


# --------------------------------------------------------------------------- component graphs

@dataclass(frozen=True)
class ComponentGraph:
    nodes: tuple[str, ...]
    small: dict = field(hash=False)
    map: dict = field(hash=False)
    k: dict = field(hash=False)
    X0: tuple[str, ...] = ()

    def __post_init__(self):
        nodes = tuple(str(n) for n in self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node names")
        object.__setattr__(self, "nodes", nodes)
        for name, table in (("small", self.small), ("map", self.map), ("k", self.k)):
            missing = set(nodes) - set(table)
            if missing:
                raise ValueError(f"{name} is missing nodes {sorted(missing)}")
        bad = [x for x in nodes if self.map[x] not in set(nodes)]
        if bad:
            raise ValueError(f"p_* is not total: images of {bad} are not nodes")
        if any(int(self.k[x]) < 1 for x in nodes):
            raise ValueError("degrees must be >= 1")
        for x in self.X0:
            if x not in self.map or self.map[x] != x:
                raise ValueError(f"X0 node {x} is not fixed by p_*")

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": VERSION, "nodes": list(self.nodes),
                "small": {x: bool(self.small[x]) for x in self.nodes},
                "map": {x: self.map[x] for x in self.nodes},
                "k": {x: int(self.k[x]) for x in self.nodes}, "X0": list(self.X0)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "ComponentGraph":
        if doc.get("schema", SCHEMA) != SCHEMA or doc.get("version", VERSION) != VERSION:
            raise ValueError("unsupported component graph document")
        return cls(tuple(doc["nodes"]), dict(doc["small"]), dict(doc["map"]),
                   {x: int(v) for x, v in doc["k"].items()}, tuple(doc.get("X0", ())))

    @classmethod
    def from_json(cls, text: str) -> "ComponentGraph":
        return cls.from_dict(json.loads(text))

    def with_small(self, extra: Iterable[str]) -> "ComponentGraph":
        small = dict(self.small)
        for x in extra:
            small[x] = True
        return ComponentGraph(self.nodes, small, dict(self.map), dict(self.k), self.X0)

    @classmethod
    def from_atlas(cls, p, atlas, delta: float) -> "ComponentGraph":
        """Graph of the atlas components; nodes whose forward orbit leaves the atlas are dropped."""
        from .fatou import component_map

        cmap = component_map(p, atlas)
        alive = {i for i, j in cmap.items() if j is not None}
        while True:
            keep = {i for i in alive if cmap[i] in alive}
            if keep == alive:
                break
            alive = keep
        recs = {r.id: r for r in atlas.components if r.id in alive}
        name = lambda i: f"X{i}"
        nodes = tuple(name(i) for i in sorted(recs))
        x0 = tuple(name(i) for i in sorted(recs)
                   if recs[i].cycle_point is not None and cmap[i] == i)
        return cls(nodes, {name(i): recs[i].diameter < delta for i in recs},
                   {name(i): name(cmap[i]) for i in recs}, {name(i): recs[i].degree for i in recs},
                   x0)


def h1_model(g: ComponentGraph) -> H1Model:
    if not g.X0:
        raise ValueError("X0 is empty: no component contains an attracting fixed point")
    summands = []
    for x in g.X0:
        k = int(g.k[x])
        if k < 2:
            raise ValueError(f"component {x} has k = {k}; an attracting basin has k >= 2")
        summands.append((x, k))
    return H1Model(tuple(summands))


_SYMBOL = re.compile(r"e_?(\d+)(?:\^\{?(-?1)\}?)?")


def parse_word(text: str) -> list[int]:
    """'e1 e2 e1^-1' (spaces optional) -> [1, 2, -1]."""
    out = []
    pos = 0
    text = text.replace(" ", "")
    while pos < len(text):
        m = _SYMBOL.match(text, pos)
        if m is None:
            raise ValueError(f"bad loop word near {text[pos:]!r}")
        out.append(int(m.group(1)) * (-1 if m.group(2) == "-1" else 1))
        pos = m.end()
    return out


def winding_vector(word: Sequence[int] | str, N: int) -> tuple[int, ...]:
    """Signed count of e_i^{±1} per index i = 1..N; symbols are ±i."""
    if isinstance(word, str):
        word = parse_word(word)
    vec = [0] * N
    for s in word:
        i = abs(int(s))
        if s == 0 or i > N:
            raise ValueError(f"loop symbol {s} outside 1..{N}")
        vec[i - 1] += 1 if s > 0 else -1
    return tuple(vec)


@dataclass(frozen=True)
class CoveringVerdict:
    verdict: str  # TRIVIAL | INCONCLUSIVE
    witnesses: dict = field(hash=False)  # node -> (small source, k)
    unreachable: tuple[str, ...] = ()
    big: tuple[str, ...] = ()

    @property
    def trivial(self) -> bool:
        return self.verdict == "TRIVIAL"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict,
                "trace": {x: {"source": s, "k": k} for x, (s, k) in self.witnesses.items()},
                "unreachable": list(self.unreachable), "big": list(self.big)}


def covering_trivial(g: ComponentGraph, k0: int = 0) -> CoveringVerdict:
    """Every node must equal p_*^k(X') for some small X' and some k >= k0."""
    big = tuple(x for x in g.nodes if not g.small[x])
    sources = [x for x in g.nodes if g.small[x]]
    pos = {s: s for s in sources}
    for _ in range(k0):
        pos = {s: g.map[x] for s, x in pos.items()}
    witnesses: dict[str, tuple[str, int]] = {}
    # orbits in a finite graph repeat after at most |nodes| further steps
    for k in range(k0, k0 + len(g.nodes) + 1):
        for s in sources:
            witnesses.setdefault(pos[s], (s, k))
        pos = {s: g.map[x] for s, x in pos.items()}
    missing = tuple(x for x in g.nodes if x not in witnesses)
    ordered = {x: witnesses[x] for x in g.nodes if x in witnesses}
    return CoveringVerdict("TRIVIAL" if not missing else "INCONCLUSIVE", ordered, missing, big)


# --------------------------------------------------------------------------- sample graphs

def jordan_graph(k: int = 2) -> ComponentGraph:
    """A single invariant basin whose boundary is a Jordan curve."""
    return ComponentGraph(("X",), {"X": False}, {"X": "X"}, {"X": k}, ("X",))


def basilica_graph(depth: int = 6, small_from: int = 2) -> ComponentGraph:
    """Components of z^2 - 1 up to `depth` pullbacks; level >= small_from counts as small.

    U0 (critical) and U1 swap; every other component has two preimages.
    """
    nodes, small, fmap, k = ["U0", "U1"], {"U0": False, "U1": False}, {"U0": "U1", "U1": "U0"}, \
        {"U0": 2, "U1": 1}
    frontier = []
    # the second preimage of U0 (other than U1)
    nodes.append("V")
    small["V"], fmap["V"], k["V"] = small_from <= 1, "U0", 1
    frontier.append("V")
    for level in range(2, depth + 1):
        nxt = []
        for parent in frontier:
            for b in "ab":
                name = f"{parent}{b}"
                nodes.append(name)
                small[name], fmap[name], k[name] = level >= small_from, parent, 1
                nxt.append(name)
        frontier = nxt
    return ComponentGraph(tuple(nodes), small, fmap, k, ())


def random_component_graph(rng, n: int = 40, big: int = 3, k_max: int = 3) -> ComponentGraph:
    """Random functional graph in which every big node has a small ancestor."""
    names = [f"N{i}" for i in range(n)]
    bigs = set(names[:big])
    fmap = {x: names[int(rng.integers(0, n))] for x in names}
    small = {x: x not in bigs for x in names}
    k = {x: int(rng.integers(1, k_max + 1)) for x in names}
    smalls = [x for x in names if small[x]]

    def reached() -> set[str]:
        seen, cur = set(), set(smalls)
        for _ in range(n + 1):
            seen |= cur
            cur = {fmap[x] for x in cur}
        return seen

    # rewiring one orbit can cut another, so repeat until every big node is hit
    for _ in range(64 * n):
        missing = sorted(bigs - reached())
        if not missing:
            break
        fmap[smalls[int(rng.integers(0, len(smalls)))]] = missing[0]
    else:
        raise RuntimeError("could not build a fully reachable graph")
    x0 = tuple(x for x in names if fmap[x] == x and k[x] >= 2)
    return ComponentGraph(tuple(names), small, fmap, k, x0)


__all__ = [
    "LocalizedInteger", "LimitGroupElement", "H1Model", "ComponentGraph", "CoveringVerdict",
    "localized_add", "localized_neg", "localized_scale", "limit_normalize", "limit_add",
    "limit_equal", "h1_model", "parse_word", "winding_vector", "covering_trivial",
    "jordan_graph", "basilica_graph", "random_component_graph",
]
