"""Line-oriented ``key = value`` run configuration.

Grammar::

    file    := line*
    line    := blank | comment | entry
    comment := '#' any-text
    entry   := key ws? '=' ws? value
    key     := [a-z][a-z0-9_.-]*
    value   := any text without a newline (surrounding spaces are trimmed)

Complex literals are ``x``, ``yi``, ``x+yi`` or ``x-yi`` (``i`` alone is the
imaginary unit). A polynomial is a comma-separated coefficient list
``a0,a1,...,ad`` of such literals, lowest degree first. A grid is either a
single resolution ``N`` (square grid over the escape-radius disk) or
``xmin,xmax,ymin,ymax,nx,ny``.

Parsing keeps the original lines, so ``RunConfig.parse(text).serialize()``
returns ``text`` unchanged. Configurations built from values serialize in
canonical form: one ``key = value`` line per entry, in insertion order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .poly import ComplexPolynomial, format_complex, parse_complex

_KEY = re.compile(r"[a-z][a-z0-9_.-]*\Z")
KNOWN = (
    "command", "poly", "a", "alpha", "rho", "grid", "depth", "seed", "tol", "out", "json",
    "png", "z", "samples", "levels", "iterations", "directions", "budget", "graph", "degree",
    "model", "delta",
)


class ConfigError(ValueError):
    pass


def _check_key(key: str) -> None:
    if not _KEY.match(key):
        raise ConfigError(f"bad key {key!r}")
    if key not in KNOWN and not key.startswith("tol."):
        raise ConfigError(f"unknown key {key!r}")


@dataclass(frozen=True)
class RunConfig:
    entries: tuple[tuple[str, str], ...]
    source: str | None = None

    def __post_init__(self):
        seen = set()
        for k, v in self.entries:
            _check_key(k)
            if k in seen:
                raise ConfigError(f"duplicate key {k!r}")
            if "\n" in v or v != v.strip():
                raise ConfigError(f"value of {k!r} must be a single trimmed line")
            seen.add(k)

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        entries = []
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key = value")
            key, _, value = line.partition("=")
            entries.append((key.strip(), value.strip()))
        try:
            return cls(tuple(entries), text)
        except ConfigError as exc:
            raise ConfigError(f"{exc}") from None

    @classmethod
    def from_items(cls, items: Iterable[tuple[str, object]]) -> "RunConfig":
        out = []
        for k, v in items:
            if v is None:
                continue
            out.append((k, _format(v)))
        return cls(tuple(out))

    def serialize(self) -> str:
        if self.source is not None:
            return self.source
        return "".join(f"{k} = {v}\n" for k, v in self.entries)

    def canonical(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.entries)

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)

    def __contains__(self, key: str) -> bool:
        return any(k == key for k, _ in self.entries)

    def raw(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def merged(self, other: "RunConfig") -> "RunConfig":
        """Entries of ``other`` override ours; order follows ours, then new keys."""
        over = other.as_dict()
        out = [(k, over.pop(k, v)) for k, v in self.entries]
        out += [(k, v) for k, v in other.entries if k in over]
        return RunConfig(tuple(out))

    # typed accessors
    def get_str(self, key: str, default: str | None = None) -> str | None:
        return self.raw(key, default)

    def get_int(self, key: str, default: int | None = None) -> int | None:
        v = self.raw(key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {v!r}") from None

    def get_float(self, key: str, default: float | None = None) -> float | None:
        v = self.raw(key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"{key}: expected a real number, got {v!r}") from None

    def get_complex(self, key: str, default: complex | None = None) -> complex | None:
        v = self.raw(key)
        if v is None:
            return default
        try:
            return parse_complex(v)
        except ValueError:
            raise ConfigError(f"{key}: expected a complex literal, got {v!r}") from None

    def get_poly(self, key: str = "poly", default: str | None = None) -> ComplexPolynomial:
        v = self.raw(key, default)
        if v is None:
            raise ConfigError(f"missing {key}")
        try:
            return ComplexPolynomial.from_string(v)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    def get_grid(self, key: str = "grid", default: str | None = None, radius: float = 2.0):
        from .fatou import GridSpec

        v = self.raw(key, default)
        if v is None:
            raise ConfigError(f"missing {key}")
        parts = [s.strip() for s in v.split(",")]
        try:
            if len(parts) == 1:
                return GridSpec.square(radius, int(parts[0]))
            if len(parts) == 6:
                x0, x1, y0, y1 = map(float, parts[:4])
                return GridSpec(x0, x1, y0, y1, int(parts[4]), int(parts[5]))
        except ValueError:
            pass
        raise ConfigError(f"{key}: expected N or xmin,xmax,ymin,ymax,nx,ny, got {v!r}")

    def tol(self, name: str, default: float, primary: bool = False) -> float:
        """Override ``tol.<name>`` if set; the bare ``tol`` key applies to the primary check."""
        specific = self.get_float(f"tol.{name}")
        if specific is not None:
            return specific
        return self.get_float("tol", default) if primary else default


def _format(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, ComplexPolynomial):
        return v.to_string()
    return str(v).strip()


__all__ = ["RunConfig", "ConfigError", "KNOWN"]
