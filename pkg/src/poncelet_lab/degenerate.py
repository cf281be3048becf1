"""Degenerate Poncelet polygons and complex paths that approach them.

A polygon of the family degenerates when it "bends" at a common point of the
two conics or when two consecutive vertices "glue" along a common tangent.
Both kinds are reached by running the ordinary (complex) Poncelet map from
the corresponding special flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import projective as pj
from .centers import Polygon, polygon_area
from .dynamics import Flag, PonceletConfig, closure_residual, orbit, polygon_from_points
from .errors import CountMismatch, DegenerateInput
from .projective import HomLine, HomPoint, normalized

MATCH_TOL = 1e-7


@dataclass
class DegeneratePolygonReport:
    polygons: list[Polygon]
    count: int
    expected: int
    kinds: list[dict]
    max_area_magnitude: float
    structure_ok: bool
    closure_residual: float
    geometric: list[Polygon] = field(default_factory=list)
    geometric_kinds: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.count == self.expected and self.structure_ok

    def summary(self) -> dict:
        return {
            "count": self.count,
            "expected": self.expected,
            "geometric_polygons": len(self.geometric),
            "bending_type": sum(1 for k in self.kinds if k["origin"] == "bending"),
            "gluing_type": sum(1 for k in self.kinds if k["origin"] == "gluing"),
            "max_area_magnitude": self.max_area_magnitude,
            "structure_ok": self.structure_ok,
            "closure_residual": self.closure_residual,
        }


def _sequence_distance(a: np.ndarray, b: np.ndarray) -> float:
    return max(pj.hom_distance(u, v) for u, v in zip(a, b))


def _labelings(hom: np.ndarray) -> list[np.ndarray]:
    n = len(hom)
    out = []
    for seq in (hom, hom[::-1]):
        for c in range(n):
            out.append(np.roll(seq, -c, axis=0))
    return out


def classify(cfg: PonceletConfig, hom: np.ndarray, tol: float = MATCH_TOL) -> dict:
    """Bending vertices (on both conics) and gluing pairs (repeated consecutive vertices)."""
    n = len(hom)
    bending = [i for i in range(n) if cfg.inner.residual(HomPoint(hom[i])) <= tol]
    gluing = [i for i in range(n) if pj.hom_distance(hom[i], hom[(i + 1) % n]) <= tol]
    return {"bending": bending, "gluing": gluing}


def structure_matches(n: int, kinds: dict) -> bool:
    """Check the index pattern of bending vertices and gluing pairs.

    Even n: two bending vertices ``n/2`` apart, or two gluing pairs starting
    ``n/2`` apart.  Odd n: one bending vertex ``i`` and one gluing pair
    starting at ``i + (n-1)/2``.
    """
    b, g = kinds["bending"], kinds["gluing"]
    if n % 2 == 0:
        if len(b) == 2 and not g:
            return (b[1] - b[0]) % n == n // 2
        if len(g) == 2 and not b:
            return (g[1] - g[0]) % n == n // 2
        return False
    return len(b) == 1 and len(g) == 1 and g[0] == (b[0] + (n - 1) // 2) % n


def special_flags(cfg: PonceletConfig, tol: float | None = None) -> list[tuple[str, Flag]]:
    """The eight flags from which degenerate polygons start.

    Four flags ``(q, T_q inner)`` at the common points of the conics and four
    flags ``(contact point, L)`` for the common tangent lines ``L``.
    """
    tol = cfg.tol if tol is None else tol
    pts, mults = pj.conic_conic_intersect(cfg.outer, cfg.inner, tol)
    if len(pts) != 4 or any(m != 1 for m in mults):
        raise DegenerateInput("conics are not in general position")
    out = []
    for q in pts:
        out.append(("bending", Flag(q, HomLine(normalized(cfg.inner.matrix @ normalized(q.coords))))))
    for line in pj.dual_intersections(cfg.outer, cfg.inner, tol):
        out.append(("gluing", Flag(pj.contact_point(cfg.outer, line), line)))
    return out


def enumerate_degenerate(cfg: PonceletConfig, strict: bool = True) -> DegeneratePolygonReport:
    """All labeled degenerate polygons of a general-position family.

    Raises ``CountMismatch`` when ``strict`` and the count differs from ``4n``.
    """
    n = cfg.n
    labeled: list[np.ndarray] = []
    kinds: list[dict] = []
    geometric: list[np.ndarray] = []
    geo_kinds: list[dict] = []
    worst_closure = 0.0
    structure_ok = True
    for origin, flag in special_flags(cfg):
        worst_closure = max(worst_closure, closure_residual(cfg, flag))
        hom = np.array([normalized(f.point.coords) for f in orbit(cfg, flag, n - 1, validate=False)])
        if any(_sequence_distance(hom, g) <= MATCH_TOL for g in (lab for lab in labeled)):
            continue
        kind = classify(cfg, hom)
        structure_ok &= structure_matches(n, kind)
        geometric.append(hom)
        geo_kinds.append({**kind, "origin": origin})
        for seq in _labelings(hom):
            if not any(_sequence_distance(seq, lab) <= MATCH_TOL for lab in labeled):
                labeled.append(seq)
                kinds.append({**classify(cfg, seq), "origin": origin})
    polygons = [polygon_from_points(list(seq), strict=False) for seq in labeled]
    areas = [abs(polygon_area(p)) for p in polygons if p.is_affine]
    report = DegeneratePolygonReport(
        polygons=polygons,
        count=len(labeled),
        expected=4 * n,
        kinds=kinds,
        max_area_magnitude=max(areas, default=0.0),
        structure_ok=bool(structure_ok),
        closure_residual=worst_closure,
        geometric=[polygon_from_points(list(g), strict=False) for g in geometric],
        geometric_kinds=geo_kinds,
    )
    if strict and report.count != report.expected:
        raise CountMismatch(report.count, report.expected)
    return report


# paths approaching a degenerate polygon ---------------------------------------


def _near_point_on_conic(conic: pj.Conic, q: np.ndarray, t: complex) -> np.ndarray:
    """Point of ``conic`` near ``q`` depending analytically (to first order linearly) on ``t``.

    The line through ``q`` with direction ``tangent + t * normal`` meets the
    conic again at a point that tends to ``q`` linearly in ``t``.
    """
    m = conic.normalized_matrix
    qa = q / q[2]
    grad = (m @ qa)[:2]
    normal = grad / np.sqrt(np.sum(np.abs(grad) ** 2))
    tangent = np.array([-normal[1], normal[0]])
    direction = tangent + t * normal
    other = qa + np.array([direction[0], direction[1], 0.0])
    line = pj._cross(qa, other)
    return pj.residual_point(m, normalized(qa), normalized(line))


def _nearest(candidates, target: np.ndarray) -> np.ndarray:
    return min((normalized(c.coords) for c in candidates), key=lambda c: pj.hom_distance(c, target))


@dataclass
class DegenerationPath:
    """Analytic one-parameter family ``t -> P_t`` with ``P_0`` degenerate."""

    config: PonceletConfig
    origin: str
    limit: Polygon
    labels: list[int]
    flag_at: Callable[[complex], Flag]
    speed: float = 1.0

    def raw(self, u: complex) -> Polygon:
        flags = orbit(self.config, self.flag_at(u), self.config.n - 1, validate=False)
        return polygon_from_points([f.point.coords for f in flags])

    def __call__(self, t: float) -> Polygon:
        return self.raw(t / self.speed)


def limit_labels(poly: Polygon, tol: float = MATCH_TOL) -> list[int]:
    """Cluster ids: indices whose vertices coincide share a label."""
    labels: list[int] = []
    reps: list[np.ndarray] = []
    for v in poly.vertices:
        for idx, r in enumerate(reps):
            if np.max(np.abs(v - r)) <= tol * max(1.0, float(np.max(np.abs(r)))):
                labels.append(idx)
                break
        else:
            reps.append(v)
            labels.append(len(reps) - 1)
    return labels


def degeneration_path(cfg: PonceletConfig, origin: str = "bending", index: int | None = None) -> DegenerationPath:
    """Family of Poncelet polygons tending to a finite degenerate polygon as ``t -> 0``.

    ``origin`` selects the kind of special flag; ``index`` picks one of them,
    by default the first whose degenerate polygon has only finite vertices.
    Near a bending flag the line is the local coordinate (it moves as a
    tangent of the inner conic); near a gluing flag the point is.
    """
    specials = [f for kind, f in special_flags(cfg) if kind == origin]
    order = range(len(specials)) if index is None else [index]
    for i in order:
        flag = specials[i]
        flags = orbit(cfg, flag, cfg.n - 1, validate=False)
        limit = polygon_from_points([f.point.coords for f in flags], strict=False)
        if limit.is_affine:
            break
    else:
        raise DegenerateInput(f"no {origin} degenerate polygon with finite vertices")
    q = normalized(flag.point.coords)
    l0 = normalized(flag.line.coords)

    if origin == "bending":

        def flag_at(t: float) -> Flag:
            g = _near_point_on_conic(cfg.inner, q, t)
            line = normalized(cfg.inner.matrix @ g)
            pts, _ = pj.line_conic_intersect(cfg.outer, HomLine(line))
            return Flag.raw(_nearest(pts, q), line)

    else:

        def flag_at(t: float) -> Flag:
            p = _near_point_on_conic(cfg.outer, q, t)
            lines, _ = pj.tangents_from(cfg.inner, HomPoint(p))
            return Flag.raw(p, _nearest(lines, l0))

    path = DegenerationPath(cfg, origin, limit, limit_labels(limit), flag_at)
    # rescale t so that the fastest vertex leaves the limit at one polygon diameter per unit t
    h = 1e-7
    moved = np.abs(path.raw(h).vertices - limit.vertices)
    path.speed = float(np.max(np.sqrt(np.sum(moved**2, axis=1)))) / h / max(limit.diameter(), 1e-300)
    return path
