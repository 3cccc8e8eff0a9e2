import logging
import math

import numpy as np
import pytest

from limitlab.fatou import (ClosedCurve, ComponentAtlas, ComponentRecord, CurveError, GridSpec,
                            LocalModel, ResolutionError, boundary_parametrization, classify_point,
                            component_map, degree_on_component, equipotential,
                            functional_residual, interior_components, lift_curve, rotations)

from conftest import BETA_01, Z_STAR_01, poly


# --- orbit classification

def test_classify_escapes_in_one_step(z2):
    out = classify_point(z2, 2, escape_radius=2.5)
    assert out.escaped and out.step == 1


def test_classify_bounded(z2):
    assert classify_point(z2, 0.5).verdict == "bounded"


def test_classify_escape_within_three_steps(z2c):
    out = classify_point(z2c, 3)
    assert out.escaped and out.step <= 3


def test_classify_rejects_unsafe_radius(z2):
    with pytest.raises(ValueError):
        classify_point(z2, 0.5, escape_radius=1.0)


@pytest.mark.parametrize("z", [0.3 + 0.6j, -0.7 + 0.2j, 0.45 + 0.3j, 0.5 + 0.5j])
def test_classify_monotone_in_budget(z2c, z):
    seen_escape = None
    for budget in (1, 2, 5, 10, 50, 200):
        out = classify_point(z2c, z, max_iter=budget)
        if seen_escape is not None:
            assert out.escaped and out.step == seen_escape
        if out.escaped:
            seen_escape = out.step


# --- brute force oracle for grid labeling

def _flood_components(mask):
    """Plain 4-connected flood fill, independent of the library's labeling."""
    seen = np.zeros_like(mask, dtype=bool)
    sizes = []
    ny, nx = mask.shape
    for i in range(ny):
        for j in range(nx):
            if mask[i, j] and not seen[i, j]:
                stack = [(i, j)]
                seen[i, j] = True
                n = 0
                while stack:
                    a, b = stack.pop()
                    n += 1
                    for c, d in ((a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)):
                        if 0 <= c < ny and 0 <= d < nx and mask[c, d] and not seen[c, d]:
                            seen[c, d] = True
                            stack.append((c, d))
                sizes.append(n)
    return sizes


def _bounded_mask(p, grid, n_iter=400):
    z = grid.points().copy()
    alive = np.ones(z.shape, dtype=bool)
    R = p.escape_radius()
    for _ in range(n_iter):
        z = np.where(alive, p(z), z)
        alive &= np.abs(z) <= R
    return alive


@pytest.mark.parametrize("text", ["0,0,1", "0.1,0,1"])
def test_atlas_single_component_degree_two(text):
    p = poly(text)
    grid = GridSpec.square(2.0, 128)
    atlas = interior_components(p, grid)
    assert len(atlas.components) == 1
    assert atlas.components[0].degree == 2
    assert atlas.fixed_components() == [0]
    oracle = _flood_components(_bounded_mask(p, grid))
    assert max(oracle) == pytest.approx(atlas.components[0].cells, rel=0.02)


def test_atlas_unit_disk_512():
    p = poly("0,0,1")
    grid = GridSpec.square(2.0, 512)
    atlas = interior_components(p, grid)
    (rec,) = atlas.components
    # cells with centres inside the unit disk
    inside = int((np.abs(grid.points()) < 1).sum())
    assert abs(rec.cells - inside) <= 4
    assert rec.degree == 2


def test_atlas_basilica_swap(basilica):
    atlas = interior_components(basilica, GridSpec.square(2.0, 128))
    c0 = atlas.lookup(0)
    cm1 = atlas.lookup(-1)
    assert c0 >= 0 and cm1 >= 0 and c0 != cm1
    cmap = component_map(basilica, atlas)
    assert cmap[c0] == cm1 and cmap[cm1] == c0
    assert sorted(atlas.fixed_components()) == sorted([c0, cm1])
    assert atlas.record(c0).degree == 2
    assert atlas.record(cm1).degree == 1
    # every resolved component is bounded and eventually lands on the cycle
    for rec in atlas.components:
        assert not classify_point(basilica, basilica(rec.representative), max_iter=500).escaped
        cid, steps = rec.id, 0
        while cid is not None and cid not in (c0, cm1) and steps < len(atlas.components):
            cid, steps = cmap[cid], steps + 1
        assert cid is None or cid in (c0, cm1)


def test_atlas_drops_small_pieces(basilica):
    grid = GridSpec.square(2.0, 128)
    fine = interior_components(basilica, grid, min_cells=2)
    coarse = interior_components(basilica, grid, min_cells=40)
    assert len(coarse.components) < len(fine.components)
    assert all(c.cells >= 40 for c in coarse.components)


def test_component_map_flags_unresolved_target():
    p = poly("-1,0,1")
    grid = GridSpec.square(2.0, 8)
    labels = np.full((8, 8), -1, dtype=np.int32)
    labels[3:5, 3:5] = 0  # only the cells around 0; its image -1 is left unlabeled
    rec = ComponentRecord(0, 0j, 4, 1.0, 2)
    atlas = ComponentAtlas(grid, labels, (rec,))
    assert component_map(p, atlas) == {0: None}


def test_coarse_grid_misses_cycle_point():
    with pytest.raises(ResolutionError):
        interior_components(poly("-1,0,1"), GridSpec.square(2.0, 6), min_cells=3)


def test_atlas_grid_must_cover_escape_disk(z2):
    with pytest.raises(ValueError):
        interior_components(z2, GridSpec.square(1.0, 32))


def test_atlas_json_round_trip(basilica):
    atlas = interior_components(basilica, GridSpec.square(2.0, 96))
    back = ComponentAtlas.from_json(atlas.to_json())
    assert back.to_json() == atlas.to_json()
    assert np.array_equal(back.labels, atlas.labels)
    assert back.components == atlas.components


def test_atlas_json_schema_check():
    with pytest.raises(ValueError):
        ComponentAtlas.from_json('{"schema": "other", "version": 1}')


# --- curves

def test_equipotential_bottcher_circle(z2):
    curve = equipotential(z2, 0j, level=0.5, M=256)
    assert curve.kind == "bottcher"
    assert np.allclose(np.abs(curve.samples), 0.5, atol=1e-15)
    assert curve.contains(0j)


def test_equipotential_auto_level_encloses_critical_value(z2c):
    curve = equipotential(z2c, Z_STAR_01, M=512)
    assert curve.kind == "koenigs"
    assert curve.contains(0.1)
    assert not curve.contains(0.0)  # the critical point itself stays outside
    curve.validate()


def test_equipotential_auto_raise_logged(z2c, caplog):
    with caplog.at_level(logging.INFO, logger="limitlab.fatou"):
        curve = equipotential(z2c, Z_STAR_01, level=1e-4, M=256)
    assert curve.level > 1e-4
    assert curve.contains(0.1)
    assert any("raised" in r.getMessage() for r in caplog.records)


def test_equipotential_tiny_level_without_auto_raise(z2c):
    with pytest.raises(CurveError):
        equipotential(z2c, Z_STAR_01, level=1e-4, M=256, auto_raise=False)


def test_koenigs_functional_equation_on_curve(z2c):
    curve = equipotential(z2c, Z_STAR_01, M=512)
    model = LocalModel.at(z2c, Z_STAR_01)
    phi_img = np.abs(model.phi(z2c, z2c(curve.samples)))
    expected = abs(model.multiplier) * curve.level
    assert np.max(np.abs(phi_img / expected - 1)) <= 1e-6


def test_koenigs_multiplier_oracle(z2c):
    model = LocalModel.at(z2c, Z_STAR_01)
    assert abs(model.multiplier - 2 * Z_STAR_01) < 1e-14
    assert not model.superattracting


def test_local_model_rejects_repelling(z2c):
    with pytest.raises(ValueError):
        LocalModel.at(z2c, BETA_01)


def test_lift_curve_functional_relation(z2c):
    curve = equipotential(z2c, Z_STAR_01, M=256).samples
    lifted = lift_curve(z2c, curve, 2, anchor=curve[0])
    M = curve.size
    assert np.abs(z2c(lifted) - curve[(2 * np.arange(M)) % M]).max() < 1e-12


def test_degree_on_component(z2c, z2):
    assert degree_on_component(z2c, Z_STAR_01) == 2
    assert degree_on_component(z2, 0j) == 2


def test_gamma_exact_for_z2(z2):
    g = boundary_parametrization(z2, 0j, M=1024)
    theta = np.arange(1024) / 1024
    assert np.abs(g.curve.samples - np.exp(2j * np.pi * theta)).max() < 1e-15
    assert g.residual < 1e-14


def test_gamma_residual_z2c(gamma01, z2c):
    assert gamma01.curve.resolution == 4096
    assert gamma01.residual <= 1e-3
    assert functional_residual(z2c, gamma01.curve.samples, 2) == gamma01.residual
    assert gamma01.degree == 2


def test_gamma_zero_is_boundary_fixed_point(gamma01):
    # γ(0) = p(γ(0)), and the only fixed point of z^2+0.1 on ∂Ω is the repelling one
    assert abs(gamma01(0.0) - BETA_01) < 1e-8


def test_gamma_lies_on_boundary(gamma01, z2c):
    # points slightly inside converge, points slightly outside escape
    pts = gamma01.curve.samples[::256]
    for w in pts:
        inward = Z_STAR_01 + 0.98 * (w - Z_STAR_01)
        outward = Z_STAR_01 + 1.02 * (w - Z_STAR_01)
        assert not classify_point(z2c, inward, max_iter=2000).escaped
        assert classify_point(z2c, outward, max_iter=2000).escaped


def test_gamma_rotations_single_for_degree_two(gamma01):
    (rot,) = rotations(gamma01)
    assert np.array_equal(rot, gamma01.curve(np.arange(4096) / 4096))


@pytest.mark.parametrize("text,z0", [("0.1,0,1", Z_STAR_01), ("0,0,1", 0j)])
def test_gamma_doubling_does_not_raise_residual(text, z0):
    p = poly(text)
    res = [boundary_parametrization(p, z0, M=M).residual for M in (1024, 2048, 4096)]
    for coarse, fine in zip(res, res[1:]):
        assert fine <= max(coarse, 1e-12)


def test_gamma_doubling_off_axis_stays_below_target():
    # the max over a finer sample is taken over more points of the same curve,
    # so only the convergence target is guaranteed here
    p = poly("-0.2+0.1i,0,1")
    from limitlab.poly import find_attracting_cycles

    (cycle,) = find_attracting_cycles(p).cycles
    res = [boundary_parametrization(p, cycle.points[0], M=M).residual for M in (1024, 2048)]
    assert all(r <= 1e-9 for r in res)


def test_closed_curve_interpolation_and_distance():
    M = 64
    circle = ClosedCurve(np.exp(2j * np.pi * np.arange(M) / M))
    assert circle(0.0) == 1
    assert circle(1.25) == pytest.approx(1j, abs=1e-15)
    assert circle.distance(0j) == pytest.approx(math.cos(math.pi / M), abs=1e-12)
    assert circle.winding_number(np.array([0j, 2 + 0j])).tolist() == [1, 0]
