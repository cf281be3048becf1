"""Central projection between the northern hemisphere and the plane ``z = 1``.

Conics and geodesics correspond under the projection, so spherical Poncelet
triangles are planar ones lifted to the sphere.  The spherical center of
mass of a triangle is the normalized vertex sum; its locus over a family is
in general not a conic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .centers import cm2
from .dynamics import PonceletConfig, sample_family
from .errors import AntipodalDegeneracy, SouthernPoint, VertexAtInfinity, ZeroArea
from .invariants import conic_fit, uniform_grid

NORTH_POLE = np.array([0.0, 0.0, 1.0])


def as_sphere_point(p, tol: float = 1e-12) -> np.ndarray:
    """Validate a unit vector in R^3."""
    v = np.asarray(p, dtype=float).reshape(3)
    if abs(float(v @ v) - 1.0) > tol:
        raise ValueError(f"not a unit vector: |p|^2 = {float(v @ v)!r}")
    return v


def central_project(p) -> np.ndarray:
    """``(x, y, z) -> (x/z, y/z)`` for points of the open northern hemisphere."""
    x, y, z = np.asarray(p, dtype=float).reshape(3)
    if z <= 0:
        raise SouthernPoint(f"z = {z!r} is not in the open northern hemisphere")
    return np.array([x / z, y / z])


def lift(q) -> np.ndarray:
    """Inverse of ``central_project``: ``(x, y, 1)`` normalized."""
    x, y = np.asarray(q, dtype=float).reshape(2)
    v = np.array([x, y, 1.0])
    return v / np.linalg.norm(v)


def spherical_cm(a, b, c, tol: float = 1e-12) -> np.ndarray:
    """Normalized vertex sum, the meeting point of the three great-circle medians."""
    s = np.asarray(a, dtype=float) + np.asarray(b, dtype=float) + np.asarray(c, dtype=float)
    norm = np.linalg.norm(s)
    if norm <= tol:
        raise AntipodalDegeneracy("vertex sum vanishes; the center of mass is undefined")
    return s / norm


@dataclass
class SphericalLocusReport:
    points: np.ndarray
    residual: float
    control_residual: float
    flat_scan: list[tuple[float, float]]
    skipped: list[float] = field(default_factory=list)
    threshold: float = 1e3

    @property
    def ratio(self) -> float:
        return self.residual / max(self.control_residual, 1e-300)

    @property
    def non_conic(self) -> bool:
        """Residual exceeds ``threshold`` times the planar control residual."""
        return self.residual > self.threshold * self.control_residual

    @property
    def flat_limit_monotone(self) -> bool:
        res = [r for _, r in sorted(self.flat_scan, reverse=True)]
        return all(b < a for a, b in zip(res, res[1:]))

    def summary(self) -> dict:
        return {
            "samples": len(self.points),
            "skipped": len(self.skipped),
            "residual": self.residual,
            "control_residual": self.control_residual,
            "ratio": self.ratio,
            "non_conic": self.non_conic,
            "flat_scan": [{"scale": s, "residual": r} for s, r in self.flat_scan],
            "flat_limit_monotone": self.flat_limit_monotone,
        }


def spherical_center_locus(triangles: list[np.ndarray], scale: float = 1.0) -> np.ndarray:
    """Project the spherical CM of each lifted (and rescaled) planar triangle."""
    out = []
    for tri in triangles:
        a, b, c = (lift(scale * v) for v in tri)
        out.append(central_project(spherical_cm(a, b, c)))
    return np.array(out)


def spherical_locus_experiment(
    cfg: PonceletConfig,
    m: int = 50,
    scales: tuple[float, ...] = (1.0, 0.1, 0.01),
) -> SphericalLocusReport:
    """Fit a conic to the projected spherical-CM locus of a triangle family.

    The planar CM2 locus of the same samples is the control.  The flat scan
    shrinks the planar configuration about the projection center, which is
    the same as growing the sphere.
    """
    if cfg.n != 3:
        raise ValueError("the spherical experiment uses triangle families (n = 3)")
    triangles, planar, skipped = [], [], []
    for t in uniform_grid(m):
        poly = sample_family(cfg, float(t))
        try:
            planar.append(cm2(poly).real)
        except (ZeroArea, VertexAtInfinity):
            skipped.append(float(t))
            continue
        triangles.append(poly.vertices.real)
    control = conic_fit(np.array(planar)).residual
    scan = [(float(s), conic_fit(spherical_center_locus(triangles, s)).residual) for s in scales]
    points = spherical_center_locus(triangles)
    residual = conic_fit(points).residual
    return SphericalLocusReport(points, residual, control, scan, skipped)
