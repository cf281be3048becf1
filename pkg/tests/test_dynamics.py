from __future__ import annotations

import math

import numpy as np
import pytest

from poncelet_lab import projective as pj
from poncelet_lab.centers import polygon_area
from poncelet_lab.degenerate import special_flags
from poncelet_lab.dynamics import (
    Flag,
    PonceletConfig,
    closure_residual,
    confocal_inner,
    family_start,
    find_family,
    inverse_step,
    is_nested,
    max_nested_scale,
    orbit,
    poncelet_step,
    rotation_number,
    sample_family,
    sigma,
    start_flag,
    tau,
    trace_polygon,
    validate_config,
)
from poncelet_lab.errors import BracketFailure, InvalidFlag, NotRealNested, VertexAtInfinity
from poncelet_lab.projective import Conic, HomLine, HomPoint

from conftest import concentric

SQ3 = math.sqrt(3.0)


def random_flag(cfg: PonceletConfig, rng, complex_point: bool = True) -> Flag:
    """A flag at a random (possibly complex) point of the outer conic."""
    while True:
        q = rng.normal(size=3) + (1j * rng.normal(size=3) if complex_point else 0)
        d = rng.normal(size=3) + (1j * rng.normal(size=3) if complex_point else 0)
        line = HomLine(np.cross(q, d))
        pts, _ = pj.line_conic_intersect(cfg.outer, line)
        p = pts[int(rng.integers(len(pts)))]
        if abs(pj.normalized(p.coords)[2]) < 1e-3 or cfg.inner.residual(p) < 1e-6:
            continue
        lines, _ = pj.tangents_from(cfg.inner, p)
        return Flag(p, lines[int(rng.integers(len(lines)))])


def random_complex_config(rng) -> PonceletConfig:
    def sym():
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        return Conic(a + a.T)

    return PonceletConfig(sym(), sym(), 5)


def upper_flag_half_circle():
    cfg = concentric(3, 0.5)
    p = HomPoint(1, 0, 1)
    line = pj.join(p, HomPoint(-0.5, SQ3 / 2, 1))
    return cfg, Flag(p, line)


# sigma / tau


def test_sigma_moves_along_chord():
    cfg, f = upper_flag_half_circle()
    assert cfg.inner.is_tangent(f.line)
    g = sigma(cfg, f)
    assert g.point.same(HomPoint(-0.5, SQ3 / 2, 1))
    assert g.line.same(f.line)


def test_sigma_fixes_line_tangent_to_outer(bicentric3):
    _, f = next(sf for sf in special_flags(bicentric3) if sf[0] == "gluing")
    assert sigma(bicentric3, f).same(f, 1e-7)


def test_tau_swaps_mirror_tangents():
    cfg, f = upper_flag_half_circle()
    g = tau(cfg, f)
    a, b, c = pj.normalized(f.line.coords)
    mirror = HomLine(a, -b, c)
    assert g.point.same(f.point) and g.line.same(mirror)


def test_tau_fixes_double_tangent(bicentric3):
    _, f = next(sf for sf in special_flags(bicentric3) if sf[0] == "bending")
    assert tau(bicentric3, f).same(f, 1e-7)


def test_invalid_flag_rejected():
    cfg = concentric(3)
    with pytest.raises(InvalidFlag):
        sigma(cfg, Flag(HomPoint(1, 0, 1), HomLine(0, 1, 0)))


@pytest.mark.parametrize("complex_cfg", [False, True])
def test_involutions_on_random_flags(complex_cfg, rng, elliptic3):
    cfg = random_complex_config(rng) if complex_cfg else elliptic3
    for _ in range(100):
        f = random_flag(cfg, rng)
        assert sigma(cfg, sigma(cfg, f), validate=False).distance(f) < 1e-10
        assert tau(cfg, tau(cfg, f), validate=False).distance(f) < 1e-10
        assert inverse_step(cfg, poncelet_step(cfg, f), validate=False).distance(f) < 1e-10


def test_step_does_not_backtrack(elliptic3, rng):
    for _ in range(50):
        f = random_flag(elliptic3, rng, complex_point=False)
        assert not poncelet_step(elliptic3, f).same(inverse_step(elliptic3, f), 1e-6)


# poncelet_step / trace_polygon


def test_step_advances_equilateral():
    cfg = concentric(3)
    f = start_flag(cfg, HomPoint(1, 0, 1))
    g = poncelet_step(cfg, f)
    x, y = g.point.to_affine().real
    assert math.atan2(y, x) == pytest.approx(2 * math.pi / 3, abs=1e-12)


def test_n_steps_close(bicentric4):
    f = family_start(bicentric4, 0.3)
    assert orbit(bicentric4, f, 4)[-1].distance(f) < 1e-9


def test_square_from_rightmost_point():
    cfg = concentric(4)
    poly = trace_polygon(cfg, start_flag(cfg, HomPoint(1, 0, 1)))
    expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert np.allclose(poly.vertices, expected, atol=1e-12)


def test_bicentric_triangles_close_from_random_starts(bicentric3, rng):
    for t in rng.random(50):
        start = family_start(bicentric3, float(t))
        assert trace_polygon(bicentric3, start).n == 3
        assert closure_residual(bicentric3, start) < 1e-9


def test_vertex_at_infinity_on_hyperbola():
    hyperbola = Conic.from_coefficients(0, 0, 1, 0, 0, -1)  # xy = 1
    cfg = PonceletConfig(hyperbola, Conic.circle(0.5, (2.0, 2.0)), 3)
    p = HomPoint(1, 0, 0)
    lines, _ = pj.tangents_from(cfg.inner, p)
    with pytest.raises(VertexAtInfinity) as info:
        trace_polygon(cfg, Flag(p, lines[0]))
    assert info.value.index == 0
    soft = trace_polygon(cfg, Flag(p, lines[0]), strict=False)
    assert 0 in soft.infinite and not soft.is_affine


# closure_residual


def test_closure_sensitivity(bicentric4):
    f = family_start(bicentric4, 0.0)
    assert closure_residual(bicentric4, f) < 1e-9
    s = bicentric4.scale * (1 + 1e-3)
    perturbed = PonceletConfig(bicentric4.outer, Conic.circle(s, (0.2, 0.0)), 4)
    assert closure_residual(perturbed, family_start(perturbed, 0.0)) > 1e-4
    shorter = bicentric4.with_n(3)
    assert closure_residual(shorter, family_start(shorter, 0.0)) > 0.1


# rotation number


@pytest.mark.parametrize("n", [3, 5])
def test_rotation_number_concentric(n):
    assert rotation_number(Conic.circle(1.0), Conic.circle(math.cos(math.pi / n))) == pytest.approx(1 / n, abs=1e-6)


def test_rotation_number_monotone_in_scale():
    outer = Conic.ellipse(2.0, 1.0)
    values = [rotation_number(outer, outer.scaled(s), 400) for s in (0.2, 0.35, 0.5, 0.65, 0.8)]
    assert all(0 < v < 0.5 for v in values)
    # a larger caustic means shorter chords, so the rotation number decreases
    assert all(b < a for a, b in zip(values, values[1:]))


def test_rotation_number_needs_nesting():
    with pytest.raises(NotRealNested):
        rotation_number(Conic.circle(1.0), Conic.circle(1.0, (1.5, 0.0)))


# find_family


def test_find_family_chapple_closed_form():
    cfg = find_family(Conic.circle(1.0), Conic.circle(1.0), 3)
    assert cfg.scale == pytest.approx(0.5, abs=1e-9)


def test_find_family_hexagon():
    cfg = find_family(Conic.circle(1.0), Conic.circle(1.0), 6)
    assert cfg.scale == pytest.approx(SQ3 / 2, abs=1e-9)


def test_find_family_euler(bicentric3):
    # d^2 = R^2 - 2 R r
    assert bicentric3.scale == pytest.approx((1 - 0.2**2) / 2, abs=1e-9)


def test_find_family_fuss(bicentric4):
    # (R^2 - d^2)^2 = 2 r^2 (R^2 + d^2)
    big, d = 1.0, 0.2
    r = (big**2 - d**2) / math.sqrt(2 * (big**2 + d**2))
    assert bicentric4.scale == pytest.approx(r, abs=1e-9)


def test_find_family_confocal_four_periodic_caustic():
    # 4-periodic billiard orbits in ellipse(a, b) touch the confocal caustic of
    # minor semi-axis b^2 / sqrt(a^2 + b^2)
    a, b = 2.0, 1.0
    cfg = find_family(Conic.ellipse(a, b), confocal_inner(a, b), 4, scale_range=(0.01, 0.99))
    assert cfg.scale == pytest.approx(b * b / math.hypot(a, b), abs=1e-9)
    assert validate_config(cfg, probes=5) < 1e-9


def test_find_family_winding_two():
    cfg = find_family(Conic.circle(1.0), Conic.circle(1.0), 5, k=2)
    assert cfg.scale == pytest.approx(math.cos(2 * math.pi / 5), abs=1e-9)
    assert rotation_number(cfg.outer, cfg.inner) == pytest.approx(0.4, abs=1e-6)


def test_find_family_bracket_failure():
    with pytest.raises(BracketFailure):
        find_family(Conic.circle(1.0), Conic.circle(1.0), 5, k=3)


def test_callable_family_needs_range():
    with pytest.raises(ValueError):
        find_family(Conic.ellipse(2.0, 1.0), confocal_inner(2.0, 1.0), 4)


def test_nesting_helpers():
    outer = Conic.ellipse(2.0, 1.0)
    assert is_nested(outer, Conic.circle(0.9))
    assert not is_nested(outer, Conic.circle(1.1))
    assert max_nested_scale(outer, Conic.circle(1.0)) == pytest.approx(1.0, abs=1e-9)


# sample_family


def test_sample_family_axis_square():
    poly = sample_family(concentric(4), 0.0)
    assert np.allclose(poly.vertices, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-12)


def test_sample_family_shift_is_rotation():
    cfg = concentric(4)
    t = 0.1
    base = sample_family(cfg, 0.0).vertices.real
    moved = sample_family(cfg, t).vertices.real
    rot = np.array([[math.cos(2 * math.pi * t), -math.sin(2 * math.pi * t)], [math.sin(2 * math.pi * t), math.cos(2 * math.pi * t)]])
    assert np.allclose(moved, base @ rot.T, atol=1e-12)
    # shifting by 1/n relabels the same square
    shifted = sample_family(cfg, t + 0.25).vertices.real
    assert np.allclose(shifted, np.roll(moved, -1, axis=0), atol=1e-12)


def test_family_is_counterclockwise(elliptic4):
    for t in np.linspace(0, 1, 7, endpoint=False):
        assert polygon_area(sample_family(elliptic4, float(t))).real > 0


def test_family_samples_close(elliptic4):
    assert max(closure_residual(elliptic4, family_start(elliptic4, t / 50)) for t in range(50)) < 1e-9
