"""Areas, circumcenters of mass and lamina centroids of (complex) polygons.

All Euclidean notions use the complex-bilinear dot product ``x*x' + y*y'``
with no conjugation, so every formula stays polynomial in the vertex
coordinates and extends verbatim to complexified polygons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CollinearPoints, ZeroArea

ZERO_AREA_REL = 1e-12


@dataclass(frozen=True, eq=False)
class Polygon:
    """Ordered affine vertices ``V_0..V_{n-1}`` with cyclic indexing.

    ``infinite`` lists indices whose vertex lies on the line at infinity;
    those rows of ``vertices`` are NaN and ``hom`` keeps the projective
    coordinates of every vertex when available.
    """

    vertices: np.ndarray
    infinite: tuple[int, ...] = ()
    hom: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=complex)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (n, 2)")
        if v.shape[0] < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @property
    def is_affine(self) -> bool:
        return not self.infinite

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> np.ndarray:
        return self.vertices[i % self.n]

    def shifted(self, c: int) -> "Polygon":
        """Relabel so that new vertex ``i`` is old vertex ``i + c``."""
        return Polygon(np.roll(self.vertices, -c, axis=0))

    def reversed(self) -> "Polygon":
        return Polygon(self.vertices[::-1].copy())

    def translated(self, v) -> "Polygon":
        return Polygon(self.vertices + np.asarray(v, dtype=complex))

    def diameter(self) -> float:
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt(np.max(np.sum(np.abs(d) ** 2, axis=-1))))

    def labeled_equal(self, other: "Polygon", tol: float = 1e-9) -> bool:
        """Index-aligned equality (cyclic relabelings count as different)."""
        return self.n == other.n and bool(np.max(np.abs(self.vertices - other.vertices)) <= tol)

    @property
    def real(self) -> np.ndarray:
        return self.vertices.real


@dataclass(frozen=True)
class Triangulation:
    """Index triples into a polygon, each with an orientation sign."""

    triangles: tuple[tuple[int, int, int], ...]
    signs: tuple[int, ...] = ()

    def __post_init__(self):
        tris = tuple(tuple(int(i) for i in t) for t in self.triangles)
        object.__setattr__(self, "triangles", tris)
        if not self.signs:
            object.__setattr__(self, "signs", (1,) * len(tris))
        elif len(self.signs) != len(tris):
            raise ValueError("one sign per triangle required")

    def __len__(self):
        return len(self.triangles)


def fan_triangulation(n: int, apex: int = 0) -> Triangulation:
    return Triangulation(tuple(((apex) % n, (apex + m) % n, (apex + m + 1) % n) for m in range(1, n - 1)))


def strip_triangulation(n: int) -> Triangulation:
    """Zig-zag triangulation alternating between the two ends of the index range."""
    lo, hi = 0, n - 1
    tris = []
    left = True
    while hi - lo > 1:
        if left:
            tris.append((lo, lo + 1, hi))
            lo += 1
        else:
            tris.append((lo, hi - 1, hi))
            hi -= 1
        left = not left
    return Triangulation(tuple(tris))


def _cross2(u: np.ndarray, v: np.ndarray) -> complex:
    return u[0] * v[1] - u[1] * v[0]


def _bdot(u: np.ndarray, v: np.ndarray) -> complex:
    return u[0] * v[0] + u[1] * v[1]


def triangle_area(a, b, c) -> complex:
    a, b, c = (np.asarray(x, dtype=complex) for x in (a, b, c))
    return 0.5 * _cross2(b - a, c - a)


def polygon_area(poly: Polygon) -> complex:
    """Signed (algebraic) area ``1/2 sum (x_i y_{i+1} - x_{i+1} y_i)``."""
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    return complex(0.5 * np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def _scale(poly: Polygon) -> float:
    d = poly.diameter()
    return d if d > 0 else 1.0


def check_area(poly: Polygon, area: complex | None = None) -> complex:
    area = polygon_area(poly) if area is None else area
    if abs(area) < ZERO_AREA_REL * _scale(poly) ** 2:
        raise ZeroArea(f"polygon area {abs(area):.3g} is numerically zero")
    return area


def weighted_circumcenter(a, b, c) -> tuple[complex, np.ndarray]:
    """Return ``(A, A * C)`` for the triangle ``abc``.

    The product is formed without dividing by the area, so it stays bounded
    when the triangle collapses with a finite circumcenter.
    """
    a, b, c = (np.asarray(x, dtype=complex) for x in (a, b, c))
    u, v = b - a, c - a
    det = _cross2(u, v)
    ru, rv = _bdot(u, u) / 2, _bdot(v, v) / 2
    # [u; v] X = [ru, rv]  =>  det * X = (v_y ru - u_y rv, u_x rv - v_x ru)
    num = np.array([v[1] * ru - u[1] * rv, u[0] * rv - v[0] * ru], dtype=complex)
    area = det / 2
    return area, area * a + num / 2


def circumcenter(a, b, c, tol: float = 1e-12) -> np.ndarray:
    """Point equidistant (bilinear form) from ``a``, ``b``, ``c``."""
    area, weighted = weighted_circumcenter(a, b, c)
    pts = np.array([a, b, c], dtype=complex)
    scale = max(float(np.max(np.abs(pts[:, None] - pts[None, :]))), 1e-300)
    if abs(area) <= tol * scale**2:
        raise CollinearPoints()
    return weighted / area


def centroid(a, b, c) -> np.ndarray:
    return (np.asarray(a, dtype=complex) + np.asarray(b, dtype=complex) + np.asarray(c, dtype=complex)) / 3


def degenerate_centroid(doubled, other) -> np.ndarray:
    """Centroid of the collapsed triangle ``(V, V, W)``: ``(2V + W)/3``."""
    return (2 * np.asarray(doubled, dtype=complex) + np.asarray(other, dtype=complex)) / 3


def ccm(poly: Polygon) -> np.ndarray:
    """Circumcenter of mass from the vertex-coordinate formula."""
    area = check_area(poly)
    v = poly.vertices
    x, y = v[:, 0], v[:, 1]
    s = x * x + y * y
    diff = np.roll(s, 1) - np.roll(s, -1)
    return np.array([np.sum(y * diff), -np.sum(x * diff)]) / (4 * area)


def cm2(poly: Polygon) -> np.ndarray:
    """Center of mass of the polygon as a homogeneous lamina."""
    area = check_area(poly)
    v = poly.vertices
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    return np.array([np.sum(cross * (v[:, 0] + w[:, 0])), np.sum(cross * (v[:, 1] + w[:, 1]))]) / (6 * area)


def triangulated_area(poly: Polygon, tri: Triangulation) -> complex:
    v = poly.vertices
    return complex(sum(s * triangle_area(v[i], v[j], v[k]) for (i, j, k), s in zip(tri.triangles, tri.signs)))


def ccm_from_triangulation(poly: Polygon, tri: Triangulation, strict: bool = False) -> np.ndarray:
    """Area-weighted sum of triangle circumcenters.

    Each term ``A_i C_i`` is taken from :func:`weighted_circumcenter`, which is
    polynomial in the vertices and stays bounded when a triangle flattens.
    With ``strict`` a triangle of numerically zero area raises
    ``CollinearPoints`` carrying its index instead.
    """
    v = poly.vertices
    area = check_area(poly)
    total = np.zeros(2, dtype=complex)
    scale = _scale(poly)
    for idx, ((i, j, k), s) in enumerate(zip(tri.triangles, tri.signs)):
        a_i, weighted = weighted_circumcenter(v[i], v[j], v[k])
        if strict and abs(a_i) <= ZERO_AREA_REL * scale**2:
            raise CollinearPoints(triangle=idx)
        total += s * weighted
    return total / area


def cm2_from_triangulation(poly: Polygon, tri: Triangulation) -> np.ndarray:
    v = poly.vertices
    area = check_area(poly)
    total = np.zeros(2, dtype=complex)
    for (i, j, k), s in zip(tri.triangles, tri.signs):
        total += s * triangle_area(v[i], v[j], v[k]) * centroid(v[i], v[j], v[k])
    return total / area


CENTERS = {"ccm": ccm, "cm2": cm2}


def center(poly: Polygon, kind: str) -> np.ndarray:
    try:
        return CENTERS[kind.lower()](poly)
    except KeyError:
        raise ValueError(f"unknown center kind {kind!r}; expected one of {sorted(CENTERS)}") from None


def as_polygon(points: Sequence) -> Polygon:
    return Polygon(np.asarray(points, dtype=complex))
