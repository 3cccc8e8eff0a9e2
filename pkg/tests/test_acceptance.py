"""Acceptance criteria 1 to 9, one PASS/FAIL line each.

Run with ``python3 -m pytest tests/test_acceptance.py`` (the lines are printed
with output capture disabled). Every criterion times its own work against its
runtime limit.
"""
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from limitlab.cli import COMMANDS, main
from limitlab.conjugacy import conjugacy_map, sample_history, shift_equivariance, verify_conjugacy
from limitlab.henon import (HenonParams, accessible_boundary_sample, cantor_accessible,
                            in_cantor_set, solid_torus_map, torus_diagnostics)
from limitlab.limits import (LimitGroupElement, LocalizedInteger, basilica_graph,
                             covering_trivial, h1_model, jordan_graph, limit_equal,
                             random_component_graph)
from limitlab.natext import History, circle_path, continue_along_path, fiber
from limitlab.solenoid import (ConePoint, cone_push, decode, decode_polar, encode_polar,
                               random_solenoid_point, shift_polar)

from conftest import Z_STAR_01, poly


@pytest.fixture
def verdict(capsys):
    def emit(number, title, checks, elapsed, limit):
        checks = dict(checks)
        checks[f"runtime {elapsed:.1f}s < {limit:g}s"] = elapsed < limit
        ok = all(checks.values())
        bad = [name for name, passed in checks.items() if not passed]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if bad:
            line += "  [failed: " + "; ".join(bad) + "]"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def test_criterion_1_fiber_counts(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    counts_ok = distinct_ok = True
    worst_sep = math.inf
    for text in ("0,0,1", "0.1,0,1"):
        p = poly(text)
        for z in 2 * np.sqrt(rng.random(100)) * np.exp(2j * np.pi * rng.random(100)):
            for N in range(11):
                f = fiber(p, complex(z), N)
                counts_ok &= f.count == 2 ** N == f.total_multiplicity
                if N:
                    sep = f.min_separation()
                    worst_sep = min(worst_sep, sep)
                    distinct_ok &= sep > 1e-9
    verdict(1, f"fiber counts 2^N, N<=10, min separation {worst_sep:.2e}",
            {"counts": counts_ok, "distinct > 1e-9": distinct_ok},
            time.perf_counter() - t0, 30)


def test_criterion_2_monodromy(verdict):
    t0 = time.perf_counter()
    z2 = poly("0,0,1")
    h = History((1, 1))
    out = continue_along_path(z2, h, circle_path(0, 1, steps=1000))
    err = max(abs(out[0] - 1), abs(out[1] + 1))
    null = continue_along_path(z2, h, circle_path(0.95, 0.05, steps=300))
    null_err = null.distance(h)
    verdict(2, f"monodromy (1,1)->(1,-1) err {err:.1e}, null loop err {null_err:.1e}",
            {"generator loop": err <= 1e-8, "null loop": null_err <= 1e-8},
            time.perf_counter() - t0, 5)


def test_criterion_3_solenoid(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    depth, count = 12, 10_000
    trips = conj = 0
    radius_err = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 5))
        c = ConePoint(float(np.exp(rng.normal())), random_solenoid_point(rng, n, depth))
        ph = decode_polar(c, depth)
        trips += encode_polar(ph, n) == c
        conj += encode_polar(shift_polar(ph, n), n) == cone_push(c)
        radii = np.abs(decode(c, depth).array())
        law = np.array([c.r ** (1.0 / n ** i) for i in range(depth + 1)])
        radius_err = max(radius_err, float(np.abs(radii - law).max()))
    verdict(3, f"solenoid round trips {trips}/{count}, conjugacy {conj}/{count}, "
               f"radius law err {radius_err:.1e}",
            {"round trip": trips == count, "shift conjugacy": conj == count,
             "radius law <= 1e-12": radius_err <= 1e-12},
            time.perf_counter() - t0, 10)


def test_criterion_4_conjugacy(verdict):
    t0 = time.perf_counter()
    c = conjugacy_map(poly("0.1,0,1"), Z_STAR_01, 6)
    rng = np.random.default_rng(4)
    rep = verify_conjugacy(c, [sample_history(c, rng, depth=10) for _ in range(1000)])
    c0 = conjugacy_map(poly("0,0,1"), 0j, 6)
    rng0 = np.random.default_rng(40)
    exact = max(shift_equivariance(c0, sample_history(c0, rng0, depth=10)) for _ in range(200))
    verdict(4, f"conjugacy residual {rep.max_residual:.1e}, z^2 residual {exact:.1e}, "
               f"seam {rep.seam:.1e}, min separation {rep.min_separation:.1e}",
            {"residual <= 1e-5": rep.max_residual <= 1e-5,
             "fixed history to apex": rep.fixed_to_apex,
             "injectivity proxy": rep.min_separation > 1e-9,
             "seam and inner boundary <= 1e-9": max(rep.seam, rep.inner_boundary) <= 1e-9,
             "z^2 residual <= 1e-12": exact <= 1e-12},
            time.perf_counter() - t0, 120)


def test_criterion_5_solid_torus(verdict):
    t0 = time.perf_counter()
    rep = torus_diagnostics(solid_torus_map(2, 0.1), 1.2, samples=10_000, iterations=12)
    verdict(5, f"solid torus margin {rep.nesting_margin:.3f}, winding {rep.winding}",
            {"margin >= 0.08": rep.nesting_margin >= 0.08, "winding 2": rep.winding == 2,
             "injective": rep.injective, "monotone clouds": rep.monotone},
            time.perf_counter() - t0, 60)


def test_criterion_6_accessible(verdict, gamma01):
    t0 = time.perf_counter()
    counts = all(len(cantor_accessible(k)) == 2 ** (k + 1) - 2 for k in range(1, 13))
    ends = cantor_accessible(6)
    paths = all(in_cantor_set(e.value) and
                not any(in_cantor_set(q) for q in e.witness_path()[1:]) for e in ends)
    p = poly("0.1,0,1")
    certs = accessible_boundary_sample(HenonParams(p, 0.05), directions=64, gamma=gamma01)
    ok = sum(c.certified for c in certs)
    flat = accessible_boundary_sample(HenonParams(p, 0), directions=64, gamma=gamma01)
    worst_flat = max(c.bracket for c in flat)
    verdict(6, f"Cantor counts k<=12, Henon certified {ok}/64, a=0 bracket {worst_flat:.1e}",
            {"Cantor counts": counts, "witness paths": paths, ">= 90% certified": ok >= 0.9 * 64,
             "a=0 within 1e-6": all(c.certified for c in flat) and worst_flat <= 1e-6},
            time.perf_counter() - t0, 180)


def test_criterion_7_limit_groups(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    iso = True
    for _ in range(10_000):
        a = LimitGroupElement(int(rng.integers(0, 30)), int(rng.integers(-10 ** 9, 10 ** 9)), 2)
        b = LimitGroupElement(int(rng.integers(0, 30)), int(rng.integers(-10 ** 9, 10 ** 9)), 2)
        if rng.random() < 0.5:
            up = int(rng.integers(0, 10))
            b = LimitGroupElement(a.level + up, a.value * 2 ** up, 2)
        fa, fb = Fraction(a.value, 2 ** a.level), Fraction(b.value, 2 ** b.level)
        s = (a + b).to_localized()
        iso &= Fraction(s.numerator, 2 ** s.exponent) == fa + fb
        iso &= limit_equal(a, b) == (fa == fb)
        iso &= (a.to_localized() == b.to_localized()) == (fa == fb)
    model = h1_model(jordan_graph(2))
    split = True
    for _ in range(1000):
        for node, k in model.summands:
            v = LocalizedInteger(int(rng.integers(-10 ** 6, 10 ** 6)), int(rng.integers(0, 20)), k)
            split &= model.projection(model.inclusion(node, v), node) == v
    verdict(7, f"limit group isomorphism on 10^4 pairs, Jordan case {model.describe()}",
            {"isomorphism": iso, "Jordan case Z[1/2]": model.describe() == "Z[1/2]",
             "projection after inclusion": split},
            time.perf_counter() - t0, 5)


def test_criterion_8_coverings(verdict):
    t0 = time.perf_counter()
    g = basilica_graph()
    basilica_ok = covering_trivial(g).trivial
    rng = np.random.default_rng(8)
    random_ok = mono = True
    for _ in range(1000):
        r = random_component_graph(rng)
        random_ok &= covering_trivial(r).trivial
        extra = [x for x in r.nodes if not r.small[x] and rng.random() < 0.5]
        mono &= covering_trivial(r.with_small(extra)).trivial
    mono &= all(covering_trivial(g.with_small([x])).trivial for x in g.nodes)
    verdict(8, "basilica and 1000 random component graphs TRIVIAL",
            {"basilica": basilica_ok, "random graphs": random_ok, "monotone": mono},
            time.perf_counter() - t0, 10)


def _outputs(cmd, d):
    argv = [cmd, "--json", str(d / "report.json")]
    if cmd in ("render-julia", "render-basin"):
        argv += ["--out", str(d / "image.ppm")]
    elif cmd in ("fibers", "accessible-boundary"):
        argv += ["--out", str(d / "out.jsonl")]
    elif cmd == "conjugacy-check":
        argv += ["--out", str(d / "map.json")]
    return argv


def test_criterion_9_cli_determinism(verdict, tmp_path, capsys):
    t0 = time.perf_counter()
    same = {}
    for cmd in COMMANDS:
        runs = []
        for tag in ("first", "second"):
            d = tmp_path / cmd / tag
            d.mkdir(parents=True)
            code = main(_outputs(cmd, d))
            capsys.readouterr()
            files = {}
            for f in sorted(d.iterdir()):
                text = f.read_bytes().replace(str(d).encode(), b"DIR")
                files[f.name] = text
            runs.append((code, files))
        same[cmd] = runs[0] == runs[1] and runs[0][0] == 0 and \
            json.loads(runs[0][1]["report.json"])["passed"]
    verdict(9, f"{sum(same.values())}/{len(same)} commands pass and re-run byte-identically",
            same, time.perf_counter() - t0, 600)
