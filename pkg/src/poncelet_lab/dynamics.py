"""Poncelet map on flags, closure probes and family search.

A flag is a point of the outer conic together with a tangent line of the
inner conic through it.  The Poncelet map is the composition of two
involutions: ``sigma`` swaps the point along the line, ``tau`` swaps the
line about the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import projective as pj
from .centers import Polygon
from .errors import BracketFailure, DegenerateInput, InvalidFlag, NotRealNested, VertexAtInfinity
from .projective import Conic, HomLine, HomPoint, normalized

TWO_PI = 2 * math.pi


@dataclass(frozen=True, eq=False)
class Flag:
    point: HomPoint
    line: HomLine

    @classmethod
    def raw(cls, p: np.ndarray, l: np.ndarray) -> "Flag":
        return cls(HomPoint(p), HomLine(l))

    def distance(self, other: "Flag") -> float:
        return max(
            pj.hom_distance(self.point.coords, other.point.coords),
            pj.hom_distance(self.line.coords, other.line.coords),
        )

    def same(self, other: "Flag", tol: float = pj.TOL) -> bool:
        return self.distance(other) <= tol


@dataclass(frozen=True, eq=False)
class PonceletConfig:
    """Outer conic, inner conic, period ``n`` and winding ``k``."""

    outer: Conic
    inner: Conic
    n: int
    k: int = 1
    tol: float = 1e-9
    scale: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("period n must be at least 3")
        if self.k < 1 or math.gcd(self.k, self.n) != 1:
            raise ValueError("winding k must be >= 1 and coprime to n")

    @cached_property
    def outer_matrix(self) -> np.ndarray:
        return self.outer.normalized_matrix

    @cached_property
    def inner_dual(self) -> np.ndarray:
        return pj.normalized_dual(self.inner)

    def with_n(self, n: int) -> "PonceletConfig":
        return PonceletConfig(self.outer, self.inner, n, 1 if math.gcd(self.k, n) != 1 else self.k, self.tol, self.scale)

    def flag_residuals(self, f: Flag) -> tuple[float, float, float]:
        p = normalized(f.point.coords)
        l = normalized(f.line.coords)
        return (
            float(abs(p @ self.outer_matrix @ p)),
            float(abs(l @ self.inner_dual @ l)),
            float(abs(l @ p)),
        )

    def check_flag(self, f: Flag, tol: float | None = None) -> None:
        tol = self.tol * 1e3 if tol is None else tol
        on_outer, tangent, incident = self.flag_residuals(f)
        if on_outer > tol or tangent > tol or incident > tol:
            raise InvalidFlag(
                f"invalid flag: outer residual {on_outer:.2g}, tangency {tangent:.2g}, incidence {incident:.2g}"
            )


# involutions ----------------------------------------------------------------


def _sigma_raw(cfg: PonceletConfig, p: np.ndarray, l: np.ndarray) -> np.ndarray:
    return pj.residual_point(cfg.outer_matrix, p, l)


def _tau_raw(cfg: PonceletConfig, p: np.ndarray, l: np.ndarray) -> np.ndarray:
    return pj.residual_point(cfg.inner_dual, l, p)


def sigma(cfg: PonceletConfig, f: Flag, validate: bool = True) -> Flag:
    """Keep the line, move to its other intersection with the outer conic."""
    if validate:
        cfg.check_flag(f)
    p, l = normalized(f.point.coords), normalized(f.line.coords)
    return Flag.raw(_sigma_raw(cfg, p, l), l)


def tau(cfg: PonceletConfig, f: Flag, validate: bool = True) -> Flag:
    """Keep the point, switch to the other tangent to the inner conic."""
    if validate:
        cfg.check_flag(f)
    p, l = normalized(f.point.coords), normalized(f.line.coords)
    return Flag.raw(p, _tau_raw(cfg, p, l))


def poncelet_step(cfg: PonceletConfig, f: Flag, validate: bool = True) -> Flag:
    return tau(cfg, sigma(cfg, f, validate), validate=False)


def inverse_step(cfg: PonceletConfig, f: Flag, validate: bool = True) -> Flag:
    return sigma(cfg, tau(cfg, f, validate), validate=False)


def orbit(cfg: PonceletConfig, start: Flag, steps: int, validate: bool = True) -> list[Flag]:
    """``[start, T start, ..., T^steps start]``."""
    if validate:
        cfg.check_flag(start)
    p, l = normalized(start.point.coords), normalized(start.line.coords)
    out = [start]
    for _ in range(steps):
        p = _sigma_raw(cfg, p, l)
        l = _tau_raw(cfg, p, l)
        out.append(Flag.raw(p, l))
    return out


def polygon_from_points(points: list[np.ndarray], strict: bool = True) -> Polygon:
    hom = np.array([normalized(np.asarray(p, dtype=complex)) for p in points])
    verts = np.full((len(points), 2), np.nan, dtype=complex)
    infinite = []
    for i, p in enumerate(hom):
        if abs(p[2]) < pj.TOL:
            if strict:
                raise VertexAtInfinity(i)
            infinite.append(i)
        else:
            verts[i] = p[:2] / p[2]
    return Polygon(verts, tuple(infinite), hom)


def trace_polygon(cfg: PonceletConfig, start: Flag, strict: bool = True) -> Polygon:
    """The n vertices visited by the orbit of ``start``.

    With ``strict=False`` a vertex at infinity does not raise; it is recorded
    in ``Polygon.infinite`` instead.
    """
    flags = orbit(cfg, start, cfg.n - 1)
    return polygon_from_points([f.point.coords for f in flags], strict)


def closure_residual(cfg: PonceletConfig, start: Flag) -> float:
    """Distance between ``start`` and its image after ``n`` Poncelet steps."""
    end = orbit(cfg, start, cfg.n)[-1]
    return start.distance(end)


# real ellipses ----------------------------------------------------------------


@dataclass(frozen=True)
class EllipseFrame:
    """Affine chart sending a real ellipse to the unit circle.

    ``u = lower.T @ (x - center)`` lies on the unit circle for points of the
    ellipse; ``lower`` has positive diagonal so orientation is preserved.
    """

    center: np.ndarray
    lower: np.ndarray

    def angle(self, xy) -> float:
        u = self.lower.T @ (np.real(np.asarray(xy)) - self.center)
        return math.atan2(u[1], u[0])

    def point(self, theta: float) -> np.ndarray:
        return self.center + np.linalg.solve(self.lower.T, np.array([math.cos(theta), math.sin(theta)]))

    def inside(self, xy) -> bool:
        u = self.lower.T @ (np.asarray(xy, dtype=float) - self.center)
        return float(u @ u) < 1.0


def ellipse_frame(conic: Conic) -> EllipseFrame:
    if not conic.is_real():
        raise NotRealNested("conic is not real")
    m = conic.normalized_matrix.real
    q = m[:2, :2]
    if np.linalg.det(q) <= 0:
        raise NotRealNested("conic is not an ellipse")
    if q[0, 0] < 0:
        m, q = -m, -q
    c = -np.linalg.solve(q, m[:2, 2])
    value = m[2, 2] + m[:2, 2] @ c
    if value >= 0:
        raise NotRealNested("ellipse has no real points")
    lower = np.linalg.cholesky(q / -value)
    return EllipseFrame(c, lower)


def is_nested(outer: Conic, inner: Conic, samples: int = 2048) -> bool:
    """Real ellipse ``inner`` lies strictly inside real ellipse ``outer``.

    Checked in the unit-circle chart of ``outer``: the image of ``inner`` is
    an ellipse whose farthest point from the origin must have norm < 1.
    """
    try:
        fo = ellipse_frame(outer)
        fi = ellipse_frame(inner)
    except NotRealNested:
        return False
    phi = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    ring = np.stack([np.cos(phi), np.sin(phi)])
    pts = fi.center[:, None] + np.linalg.solve(fi.lower.T, ring)
    u = fo.lower.T @ (pts - fo.center[:, None])
    r2 = np.sum(u * u, axis=0)
    i = int(np.argmax(r2))
    # parabolic refinement of the sampled maximum
    a, b, c = r2[i - 1], r2[i], r2[(i + 1) % samples]
    denom = a - 2 * b + c
    peak = b - (a - c) ** 2 / (8 * denom) if denom < 0 else b
    return bool(peak < 1.0 - 1e-12)


def _real_start_line(cfg: PonceletConfig, p: np.ndarray) -> np.ndarray:
    """Tangent from ``p`` that leaves the inner conic on the left (counterclockwise orbit)."""
    lines, _ = pj.tangents_from(cfg.inner, HomPoint(p))
    if len(lines) == 1:
        return normalized(lines[0].coords)
    ci = cfg.inner.center().real
    pa = (p[:2] / p[2]).real
    best = None
    for line in lines:
        l = normalized(line.coords)
        q = _sigma_raw(cfg, p, l)
        qa = (q[:2] / q[2]).real
        side = (qa[0] - pa[0]) * (ci[1] - pa[1]) - (qa[1] - pa[1]) * (ci[0] - pa[0])
        if best is None or side > best[0]:
            best = (side, l)
    return best[1]


def start_flag(cfg: PonceletConfig, p: HomPoint) -> Flag:
    """Flag at ``p`` with the deterministic tangent orientation.

    For real nested ellipses the tangent is the one giving a counterclockwise
    orbit; otherwise the first tangent returned by ``tangents_from``.
    """
    pv = normalized(p.coords)
    if cfg.outer.is_real() and cfg.inner.is_real() and abs(pv[2]) > pj.TOL and np.max(np.abs(pv.imag)) < 1e-12:
        try:
            cfg.inner.center()
            return Flag.raw(pv, _real_start_line(cfg, pv))
        except DegenerateInput:
            pass
    lines, _ = pj.tangents_from(cfg.inner, p)
    return Flag.raw(pv, normalized(lines[0].coords))


def outer_point(conic: Conic, t: float) -> HomPoint:
    """Point of the conic at family parameter ``t`` in [0, 1).

    Real ellipses use the angle ``2 pi t`` in their unit-circle chart (the
    rational parametrization from the antipode of ``t = 0``); other conics
    use the pencil of lines through a fixed base point.
    """
    try:
        frame = ellipse_frame(conic)
        x, y = frame.point(TWO_PI * t)
        return HomPoint(x, y, 1.0)
    except NotRealNested:
        pass
    base, _ = pj.line_conic_intersect(conic, HomLine(1, 0, 0))
    p0 = normalized(base[0].coords)
    i = int(np.argmax(np.abs(p0)))
    guide = np.zeros(3, dtype=complex)
    guide[i] = 1
    a, b = pj._points_on_line(guide)
    target = math.cos(math.pi * t) * normalized(a) + math.sin(math.pi * t) * normalized(b)
    line = pj._cross(p0, target)
    return HomPoint(pj.residual_point(conic.normalized_matrix, p0, normalized(line)))


def sample_family(cfg: PonceletConfig, t: float, strict: bool = True) -> Polygon:
    """Poncelet polygon whose first vertex sits at parameter ``t``."""
    return trace_polygon(cfg, start_flag(cfg, outer_point(cfg.outer, t)), strict)


def family_start(cfg: PonceletConfig, t: float) -> Flag:
    return start_flag(cfg, outer_point(cfg.outer, t))


# rotation number and family search --------------------------------------------


def _lift(cfg: PonceletConfig, frame: EllipseFrame, steps: int, theta0: float = 0.0) -> float:
    """Total counterclockwise angle swept in the outer chart over ``steps`` steps."""
    x, y = frame.point(theta0)
    p = np.array([x, y, 1.0], dtype=complex)
    l = _real_start_line(cfg, p)
    p, l = normalized(p), l
    theta = theta0
    total = 0.0
    for _ in range(steps):
        p = _sigma_raw(cfg, p, l)
        l = _tau_raw(cfg, p, l)
        new = frame.angle(p[:2] / p[2])
        total += (new - theta) % TWO_PI
        theta = new
    return total


def rotation_number(outer: Conic, inner: Conic, iterations: int = 1000) -> float:
    """Average counterclockwise advance per Poncelet step, in turns."""
    if not is_nested(outer, inner):
        raise NotRealNested("rotation number needs a real ellipse nested inside another")
    cfg = PonceletConfig(outer, inner, 3)
    return _lift(cfg, ellipse_frame(outer), iterations) / (TWO_PI * iterations)


def max_nested_scale(outer: Conic, inner_shape: Conic, iters: int = 60) -> float:
    """Largest homothety factor keeping ``inner_shape`` strictly inside ``outer``."""
    lo, hi = 0.0, 1.0
    while is_nested(outer, inner_shape.scaled(hi)):
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise NotRealNested("inner shape never leaves the outer conic")
    if lo == 0.0:
        lo = hi
        while not is_nested(outer, inner_shape.scaled(lo)):
            lo /= 2
            if lo < 1e-12:
                raise NotRealNested("inner shape is not inside the outer conic at any scale")
        hi = 2 * lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_nested(outer, inner_shape.scaled(mid)):
            lo = mid
        else:
            hi = mid
    return lo


def confocal_inner(a: float, b: float, center=(0.0, 0.0), angle: float = 0.0) -> Callable[[float], Conic]:
    """Ellipses confocal with ``ellipse(a, b)``, indexed by their minor semi-axis in (0, b)."""
    c2 = a * a - b * b
    if c2 < 0:
        raise ValueError("expected a >= b")
    return lambda s: Conic.ellipse(math.sqrt(s * s + c2), s, center, angle)


def find_family(
    outer: Conic,
    inner_shape: Conic | Callable[[float], Conic],
    n: int,
    k: int = 1,
    tol: float = 1e-9,
    scale_range: tuple[float, float] | None = None,
) -> PonceletConfig:
    """Scale ``inner_shape`` about its center until the pair closes after ``n`` steps with winding ``k``.

    ``inner_shape`` may instead be a one-parameter family ``s -> Conic``
    growing with ``s`` (for example ``confocal_inner``); ``scale_range``
    is then required.  Bisection on the n-step lift of the counterclockwise
    orbit from the point at angle 0; the lift decreases monotonically as the
    inner conic grows and equals ``2 pi k`` exactly at closure.
    """
    if not 2 * k < n:
        raise BracketFailure(f"winding {k}/{n} is not below 1/2")
    frame = ellipse_frame(outer)
    if isinstance(inner_shape, Conic):
        member = inner_shape.scaled
    elif scale_range is None:
        raise ValueError("a callable inner family needs an explicit scale_range")
    else:
        member = inner_shape
    if scale_range is None:
        smax = max_nested_scale(outer, inner_shape)
        lo, hi = smax * 1e-6, smax * (1 - 1e-9)
    else:
        lo, hi = scale_range

    def g(s: float) -> float:
        cfg = PonceletConfig(outer, member(s), n, k, tol)
        return _lift(cfg, frame, n) - TWO_PI * k

    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo > 0 > g_hi):
        raise BracketFailure(f"rotation number {k}/{n} not bracketed on scales [{lo:.6g}, {hi:.6g}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g_mid = g(mid)
        if g_mid == 0:
            lo = hi = mid
            break
        if g_mid > 0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    s = lo if abs(g_lo) <= abs(g_hi) else hi
    cfg = PonceletConfig(outer, member(s), n, k, tol, scale=s)
    res = closure_residual(cfg, family_start(cfg, 0.0))
    if res > tol:
        raise BracketFailure(f"bisection converged to s={s:.16g} but closure residual is {res:.3g}")
    return cfg


def validate_config(cfg: PonceletConfig, probes: int = 3, seed: int = 0) -> float:
    """Largest closure residual over probe orbits started at seeded random parameters."""
    rng = np.random.default_rng(seed)
    ts = [0.0, *rng.random(probes - 1)] if probes > 1 else [0.0]
    return max(closure_residual(cfg, family_start(cfg, float(t))) for t in ts)
