"""Command-line front end.

Every command reads a RunConfig (``--config FILE`` and/or flags; flags win),
runs one job, and prints a JSON report (or writes it to ``--json PATH``).
Reports carry ``schema``, ``version``, the canonical config text, a list of
named checks, and ``failures``. Exit status: 0 when every check passes, 1 when
a check fails, 2 on configuration errors.

Polynomials are coefficient lists ``a0,a1,...,ad`` (lowest degree first) of
complex literals ``x``, ``yi``, ``x+yi``; e.g. ``0.1,0,1`` is z^2 + 0.1 and
``-0.5+0.25i,0,1`` is z^2 - 0.5 + 0.25i.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig

SCHEMA = "limitlab.report"
VERSION = 1

COMMANDS = ("render-julia", "render-basin", "fibers", "solenoid-demo", "conjugacy-check",
            "torus-diagnostics", "accessible-boundary", "homology", "covering-check")

# flag -> (config key, help)
FLAGS = {
    "--poly": ("poly", "coefficient list a0,a1,...,ad"),
    "--a": ("a", "Hénon Jacobian parameter"),
    "--alpha": ("alpha", "solid-torus model parameter"),
    "--rho": ("rho", "fiber disk radius"),
    "--depth": ("depth", "history depth / Cantor stages / pullback depth"),
    "--grid": ("grid", "N, or xmin,xmax,ymin,ymax,nx,ny"),
    "--seed": ("seed", "random seed"),
    "--tol": ("tol", "tolerance of the primary check"),
    "--out": ("out", "output file (PPM, JSONL or JSON, by command)"),
    "--json": ("json", "write the report here instead of stdout"),
    "--png": ("png", "also write a PNG re-encode (needs Pillow)"),
    "--z": ("z", "base point"),
    "--samples": ("samples", "sample count"),
    "--levels": ("levels", "conjugacy tower depth"),
    "--iterations": ("iterations", "cloud iterations"),
    "--directions": ("directions", "number of ray directions"),
    "--budget": ("budget", "iteration budget"),
    "--graph": ("graph", "component graph JSON file"),
    "--degree": ("degree", "model degree"),
    "--model": ("model", "torus model: solid or gamma"),
    "--delta": ("delta", "smallness threshold for component diameters"),
}


class Report:
    def __init__(self, command: str, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.checks: list[dict] = []
        self.data: dict = {}
        self.outputs: dict = {}

    def check(self, name: str, passed: bool, value=None, threshold=None) -> bool:
        self.checks.append({"name": name, "pass": bool(passed), "value": value,
                            "threshold": threshold})
        return bool(passed)

    @property
    def failures(self) -> list[str]:
        return [c["name"] for c in self.checks if not c["pass"]]

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": VERSION, "command": self.command,
                "config": self.cfg.canonical(), "checks": self.checks, "data": self.data,
                "outputs": self.outputs, "passed": not self.failures,
                "failures": self.failures}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def dumps(doc) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False) + "\n"


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _fixed_point(p, cfg: RunConfig) -> complex:
    from .poly import find_attracting_cycles

    z = cfg.get_complex("z")
    if z is not None:
        return z
    fixed = [c for c in find_attracting_cycles(p).cycles if c.period == 1]
    if not fixed:
        raise ConfigError("p has no attracting fixed point; pass --z")
    return complex(min(fixed, key=lambda c: abs(c.multiplier)).points[0])


# --------------------------------------------------------------------------- commands

def cmd_render_julia(cfg: RunConfig, rep: Report) -> None:
    from .imaging import BOUNDED, render_julia, write_png, write_ppm

    p = cfg.get_poly(default="0,0,1")
    p.require_dynamic()
    grid = cfg.get_grid(default="512", radius=p.escape_radius())
    budget = cfg.get_int("budget", 256)
    img = render_julia(p, grid, budget)
    out = cfg.get_str("out", "julia.ppm")
    write_ppm(out, img)
    rep.outputs["ppm"] = {"path": out, "sha256": _sha256(out)}
    if cfg.get_str("png"):
        write_png(cfg.get_str("png"), img)
        rep.outputs["png"] = {"path": cfg.get_str("png")}
    bounded = int(np.all(img == BOUNDED, axis=2).sum())
    rep.data.update(width=grid.nx, height=grid.ny, bounded_pixels=bounded,
                    escape_radius=p.escape_radius())
    rep.check("image_shape", img.shape == (grid.ny, grid.nx, 3), list(img.shape))


def cmd_render_basin(cfg: RunConfig, rep: Report) -> None:
    from .henon import HenonParams, attracting_fixed_point
    from .imaging import BASIN_COLORS, render_basin, write_png, write_ppm

    params = HenonParams(cfg.get_poly(default="0.1,0,1"), cfg.get_complex("a", 0.05))
    grid = cfg.get_grid(default="512", radius=2.0)
    budget = cfg.get_int("budget", 300)
    fp = attracting_fixed_point(params)
    img = render_basin(params, grid, fp.point[1], budget)
    out = cfg.get_str("out", "basin.ppm")
    write_ppm(out, img)
    rep.outputs["ppm"] = {"path": out, "sha256": _sha256(out)}
    if cfg.get_str("png"):
        write_png(cfg.get_str("png"), img)
        rep.outputs["png"] = {"path": cfg.get_str("png")}
    rep.data.update(fixed_point=fp.point[0], eigenvalues=list(fp.eigenvalues),
                    width=grid.nx, height=grid.ny)
    cell = grid.cell_of(fp.point[0])
    if cell is not None:
        rep.check("fixed_point_pixel_in_basin", tuple(img[cell]) == BASIN_COLORS[0],
                  [int(v) for v in img[cell]])


def cmd_fibers(cfg: RunConfig, rep: Report) -> None:
    from .natext import fiber

    p = cfg.get_poly(default="0,0,1")
    z = cfg.get_complex("z", 1 + 0j)
    N = cfg.get_int("depth", 10)
    f = fiber(p, z, N)
    expected = p.degree ** N
    e = f.entries
    steps = np.abs(p(e[:, 1:]) - e[:, :-1]) / np.maximum(1.0, np.abs(e[:, :-1])) if N else \
        np.zeros(1)
    sep = f.min_separation()
    rep.data.update(count=f.count, total_multiplicity=f.total_multiplicity,
                    ramified=int(f.ramified.sum()), min_separation=sep, base=z, depth=N)
    rep.check("count_with_multiplicity", f.total_multiplicity == expected,
              f.total_multiplicity, expected)
    rep.check("step_residual", float(steps.max()) <= cfg.tol("step", 1e-9),
              float(steps.max()), cfg.tol("step", 1e-9))
    tol = cfg.tol("distinct", 1e-9, primary=True)
    rep.check("distinct_histories", sep > tol, sep, tol)
    out = cfg.get_str("out")
    if out:
        _write_text(out, f.to_jsonl())
        rep.outputs["jsonl"] = {"path": out, "sha256": _sha256(out)}


def cmd_solenoid_demo(cfg: RunConfig, rep: Report) -> None:
    from .solenoid import (ConePoint, cone_push, decode, decode_polar, encode_polar,
                           random_solenoid_point, shift_polar)

    n = cfg.get_int("degree", 2)
    count = cfg.get_int("samples", 10_000)
    depth = cfg.get_int("depth", 12)
    rng = np.random.default_rng(cfg.get_int("seed", 0))
    round_trip = conj = 0
    radius_err = 0.0
    relation_err = 0.0
    for _ in range(count):
        s = random_solenoid_point(rng, n, depth)
        c = ConePoint(float(np.exp(rng.normal())), s)
        ph = decode_polar(c, depth)
        round_trip += encode_polar(ph, n) == c
        conj += encode_polar(shift_polar(ph, n), n) == cone_push(c)
        law = np.array([c.r ** (1.0 / n ** i) for i in range(depth + 1)])
        radius_err = max(radius_err, float(np.abs(np.array(ph.radii) - law).max()))
        z = decode(c, depth).array()
        relation_err = max(relation_err, float(np.abs(z[1:] ** n - z[:-1]).max()
                                                / max(1.0, np.abs(z).max() ** n)))
    rep.data.update(samples=count, depth=depth, degree=n)
    rep.check("round_trip_exact", round_trip == count, round_trip, count)
    rep.check("shift_conjugacy_exact", conj == count, conj, count)
    tol = cfg.tol("radius", 1e-12, primary=True)
    rep.check("radius_law", radius_err <= tol, radius_err, tol)
    rep.check("history_relation", relation_err <= cfg.tol("relation", 1e-12), relation_err,
              cfg.tol("relation", 1e-12))


def cmd_conjugacy_check(cfg: RunConfig, rep: Report) -> None:
    from .conjugacy import conjugacy_map, sample_history, verify_conjugacy

    p = cfg.get_poly(default="0.1,0,1")
    z_star = _fixed_point(p, cfg)
    levels = cfg.get_int("levels", 6)
    depth = cfg.get_int("depth", 10)
    count = cfg.get_int("samples", 1000)
    rng = np.random.default_rng(cfg.get_int("seed", 0))
    c = conjugacy_map(p, z_star, levels)
    hs = [sample_history(c, rng, depth) for _ in range(count)]
    r = verify_conjugacy(c, hs)
    rep.data.update(r.to_dict())
    rep.data.update(z_star=z_star, n=c.n, levels=levels, depth=depth)
    tol = cfg.tol("equivariance", 1e-5, primary=True)
    rep.check("shift_equivariance", r.max_residual <= tol, r.max_residual, tol)
    rep.check("fixed_history_to_apex", r.fixed_to_apex, r.fixed_to_apex)
    sep_tol = cfg.tol("separation", 1e-9)
    rep.check("injectivity_proxy", r.min_separation > sep_tol, r.min_separation, sep_tol)
    seam_tol = cfg.tol("seam", 1e-9)
    rep.check("seam", r.seam <= seam_tol, r.seam, seam_tol)
    inner_tol = cfg.tol("inner", 1e-9)
    rep.check("inner_boundary", r.inner_boundary <= inner_tol, r.inner_boundary, inner_tol)
    tower_tol = cfg.tol("tower", 1e-3)
    rep.check("tower_residuals", max(r.tower_residuals) <= tower_tol, max(r.tower_residuals),
              tower_tol)
    out = cfg.get_str("out")
    if out:
        _write_text(out, c.to_json() + "\n")
        rep.outputs["map"] = {"path": out, "sha256": _sha256(out)}


def cmd_torus_diagnostics(cfg: RunConfig, rep: Report) -> None:
    from .henon import gamma_torus_map, solid_torus_map, torus_diagnostics

    alpha = cfg.get_complex("alpha", 0.1 + 0j)
    rho = cfg.get_float("rho", 1.2)
    model = cfg.get_str("model", "solid")
    if model == "solid":
        d = cfg.get_int("degree", 2)
        F = solid_torus_map(d, alpha)
    elif model == "gamma":
        from .fatou import boundary_parametrization

        p = cfg.get_poly(default="0.1,0,1")
        gamma = boundary_parametrization(p, _fixed_point(p, cfg))
        d = gamma.degree
        F = gamma_torus_map(d, alpha, gamma, p)
    else:
        raise ConfigError(f"model must be solid or gamma, got {model!r}")
    samples = cfg.get_int("samples", 10_000)
    iters = cfg.get_int("iterations", 12)
    r = torus_diagnostics(F, rho, samples, iters, cfg.get_int("seed", 0))
    rep.data.update(r.to_dict())
    rep.data.update(model=model, degree=d, contraction=_max_b(F))
    tol = cfg.tol("nesting", 0.0, primary=True)
    rep.check("nesting", r.nesting_margin > tol, r.nesting_margin, tol)
    rep.check("winding", r.winding == d, r.winding, d)
    rep.check("injectivity", r.injective, r.collisions + r.partner_collisions, 0)
    rep.check("monotone_clouds", r.monotone, r.cloud_gap, 1e-6)
    mb = _max_b(F)
    decays = [q for q, dm in zip(r.decay, r.diameters) if dm > 1e-8]
    worst = max(decays) if decays else 0.0
    rep.check("fiber_decay", worst <= mb * (1 + 1e-6) + 1e-15, worst, mb)


def _max_b(F, samples: int = 4096) -> float:
    zeta = np.exp(2j * np.pi * np.arange(samples) / samples)
    return float(np.max(np.abs(F.B(zeta) * np.ones(samples))))


def cmd_accessible_boundary(cfg: RunConfig, rep: Report) -> None:
    from .henon import HenonParams, accessible_boundary_sample, cantor_accessible, in_cantor_set

    params = HenonParams(cfg.get_poly(default="0.1,0,1"), cfg.get_complex("a", 0.05))
    D = cfg.get_int("directions", 64)
    tol = cfg.tol("accumulation", 5e-2, primary=True)
    certs = accessible_boundary_sample(params, D, tol=tol, budget=cfg.get_int("budget", 30))
    ok = sum(c.certified for c in certs)
    frac_tol = cfg.tol("fraction", 0.9)
    rep.data.update(directions=D, certified=ok,
                    worst_accumulation=max(c.accumulation for c in certs if c.certified)
                    if ok else None,
                    flagged=[c.direction for c in certs if c.flag])
    rep.check("certified_fraction", ok / D >= frac_tol, ok / D, frac_tol)
    if params.a == 0:
        worst = max(c.bracket for c in certs)
        rep.check("one_dimensional_bracket", worst <= 1e-6, worst, 1e-6)
    K = cfg.get_int("depth", 12)
    counts = {k: len(cantor_accessible(k)) for k in range(1, K + 1)}
    rep.data["cantor_counts"] = counts
    rep.check("cantor_counts", all(v == 2 ** (k + 1) - 2 for k, v in counts.items()),
              counts[K], 2 ** (K + 1) - 2)
    ends = cantor_accessible(min(K, 6))
    rep.check("cantor_paths_in_gaps",
              all(not in_cantor_set(q) for e in ends for q in e.witness_path()[1:]) and
              all(in_cantor_set(e.value) for e in ends), True)
    out = cfg.get_str("out")
    if out:
        _write_text(out, "".join(json.dumps(_clean(c.to_dict()), sort_keys=True) + "\n"
                                 for c in certs))
        rep.outputs["jsonl"] = {"path": out, "sha256": _sha256(out)}


def _load_graph(cfg: RunConfig):
    from .limits import ComponentGraph

    path = cfg.get_str("graph")
    if path:
        return ComponentGraph.from_json(Path(path).read_text(encoding="utf-8"))
    return None


def cmd_homology(cfg: RunConfig, rep: Report) -> None:
    from .fatou import interior_components
    from .limits import ComponentGraph, LimitGroupElement, LocalizedInteger, h1_model

    g = _load_graph(cfg)
    if g is None:
        p = cfg.get_poly(default="0,0,1")
        grid = cfg.get_grid(default="256", radius=p.escape_radius())
        atlas = interior_components(p, grid)
        g = ComponentGraph.from_atlas(p, atlas, cfg.get_float("delta", 0.1))
    rep.data["graph"] = g.to_dict()
    if not g.X0:
        rep.check("x0_nonempty", False, 0, 1)
        return
    h = h1_model(g)
    rep.data["h1"] = h.to_dict()
    rng = np.random.default_rng(cfg.get_int("seed", 0))
    count = cfg.get_int("samples", 1000)
    split = iso = 0
    for _ in range(count):
        for x, k in h.summands:
            v = LocalizedInteger(int(rng.integers(-10**6, 10**6)), int(rng.integers(0, 20)), k)
            split += h.projection(h.inclusion(x, v), x) == v
        x, k = h.summands[int(rng.integers(0, len(h.summands)))]
        a = LimitGroupElement(int(rng.integers(0, 20)), int(rng.integers(-10**6, 10**6)), k)
        b = LimitGroupElement(int(rng.integers(0, 20)), int(rng.integers(-10**6, 10**6)), k)
        val = lambda e: Fraction(e.value, k ** e.level)
        iso += (val(a + b) == val(a) + val(b)) and ((a == b) == (val(a) == val(b)))
    rep.check("x0_nonempty", True, len(h.summands), 1)
    rep.check("split_projection_inclusion", split == count * len(h.summands), split,
              count * len(h.summands))
    rep.check("tower_isomorphism", iso == count, iso, count)


def cmd_covering_check(cfg: RunConfig, rep: Report) -> None:
    from .limits import basilica_graph, covering_trivial, random_component_graph

    g = _load_graph(cfg) or basilica_graph(cfg.get_int("depth", 6))
    v = covering_trivial(g)
    rep.data.update(nodes=len(g.nodes), verdict=v.to_dict())
    rep.check("verdict_trivial", v.trivial, v.verdict, "TRIVIAL")
    mono = all(covering_trivial(g.with_small([x])).trivial or not v.trivial for x in g.nodes)
    rep.check("monotone_enlarging_small", mono, mono)
    count = cfg.get_int("samples", 0)
    if count:
        rng = np.random.default_rng(cfg.get_int("seed", 0))
        ok = sum(covering_trivial(random_component_graph(rng)).trivial for _ in range(count))
        rep.check("random_graphs_trivial", ok == count, ok, count)


HANDLERS = {
    "render-julia": cmd_render_julia, "render-basin": cmd_render_basin, "fibers": cmd_fibers,
    "solenoid-demo": cmd_solenoid_demo, "conjugacy-check": cmd_conjugacy_check,
    "torus-diagnostics": cmd_torus_diagnostics, "accessible-boundary": cmd_accessible_boundary,
    "homology": cmd_homology, "covering-check": cmd_covering_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="limitlab", description=__doc__.split("\n\n")[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value config file; flags override it")
        for flag, (key, text) in FLAGS.items():
            sp.add_argument(flag, dest=key, default=None, help=text)
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig(())
    if args.config:
        base = RunConfig.parse(Path(args.config).read_text(encoding="utf-8"))
        cmd = base.get_str("command")
        if cmd is not None and cmd != args.command:
            raise ConfigError(f"config is for {cmd!r}, not {args.command!r}")
    flags = RunConfig.from_items([("command", args.command)] +
                                 [(key, getattr(args, key)) for key, _ in FLAGS.values()])
    return base.merged(flags)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        rep = Report(args.command, cfg)
        HANDLERS[args.command](cfg, rep)
    except (ConfigError, ValueError, OSError) as exc:
        doc = {"schema": SCHEMA, "version": VERSION, "command": args.command,
               "error": f"{type(exc).__name__}: {exc}", "passed": False, "failures": ["config"]}
        sys.stderr.write(dumps(doc))
        return 2
    text = dumps(rep.to_dict())
    target = cfg.get_str("json")
    if target:
        _write_text(target, text)
    else:
        sys.stdout.write(text)
    return 0 if not rep.failures else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
