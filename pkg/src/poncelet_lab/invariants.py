"""Experiments on Poncelet families: center loci, conic fits, area products, quadrilaterals."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import projective as pj
from .centers import Polygon, ccm, center, cm2, polygon_area
from .dynamics import PonceletConfig, sample_family
from .errors import (
    AllSamplesDegenerate,
    DegenerateInput,
    PonceletError,
    TooFewPoints,
    VertexAtInfinity,
    ZeroArea,
)
from .projective import Conic, normalized

# center loci -------------------------------------------------------------------


def uniform_grid(m: int) -> np.ndarray:
    return np.arange(m) / m


@dataclass
class Locus:
    kind: str
    ts: np.ndarray
    points: np.ndarray
    skipped: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.points)


def center_locus(cfg: PonceletConfig, kind: str, m: int) -> Locus:
    """Real centers of the family over the uniform grid ``t = j/m``.

    Samples whose polygon has numerically zero area (or a vertex at
    infinity) are skipped and listed in ``skipped``.
    """
    ts, pts, skipped = [], [], []
    for t in uniform_grid(m):
        try:
            c = center(sample_family(cfg, float(t)), kind)
        except (ZeroArea, VertexAtInfinity):
            skipped.append(float(t))
            continue
        ts.append(float(t))
        pts.append(c.real)
    if not pts:
        raise AllSamplesDegenerate(f"all {m} samples have zero area")
    return Locus(kind.lower(), np.array(ts), np.array(pts), skipped)


# conic fitting -----------------------------------------------------------------


@dataclass
class ConicFit:
    """Unit-norm coefficients ``(A, B, C, D, E, F)`` of ``Ax^2 + By^2 + Cxy + Dx + Ey + F``."""

    coeffs: np.ndarray
    residual: float
    degenerate: bool
    null_dim: int
    control_residual: float | None = None

    @property
    def conic(self) -> Conic:
        return Conic.from_coefficients(*self.coeffs)

    @property
    def control_gain(self) -> float | None:
        """How much adding an ``x^3`` column reduces the residual (ratio >= 1)."""
        if self.control_residual is None:
            return None
        return self.residual / max(self.control_residual, 1e-300)


def _design(u: np.ndarray, cubic: bool = False) -> np.ndarray:
    x, y = u[:, 0], u[:, 1]
    cols = [x * x, y * y, x * y, x, y, np.ones_like(x)]
    if cubic:
        cols.append(x**3)
    return np.stack(cols, axis=1)


def bbox_normalize(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Map points into [-1, 1]^2 with one common scale; return ``(u, center, half_extent)``."""
    lo, hi = points.min(axis=0), points.max(axis=0)
    mid = 0.5 * (lo + hi)
    half = 0.5 * float(np.max(hi - lo))
    if half <= 1e-12 * max(1.0, float(np.max(np.abs(mid)))):
        # a single point up to rounding: do not blow the jitter up to the unit box
        half = 1.0
    return (points - mid) / half, mid, half


def conic_fit(points: Sequence, control: bool = True, rank_tol: float = 1e-9) -> ConicFit:
    """Least-singular-vector conic through the points after bounding-box normalization.

    ``residual`` is the smallest singular value over ``sqrt(N)``.  The fit is
    reported degenerate when the null space has dimension above one or the
    conic matrix is singular.  With ``control`` the residual of the same fit
    with an extra ``x^3`` column is reported for overfitting checks.
    """
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (N, 2)")
    if len(pts) < 6:
        raise TooFewPoints(f"need at least 6 points, got {len(pts)}")
    if np.iscomplexobj(pts) and np.max(np.abs(pts.imag)) == 0:
        pts = pts.real
    u, mid, half = bbox_normalize(pts)
    root_n = np.sqrt(len(pts))
    _, sv, vh = np.linalg.svd(_design(u), full_matrices=False)
    v = vh[-1].conj()
    residual = float(sv[-1] / root_n)
    null_dim = int(np.sum(sv / root_n <= max(rank_tol, residual * 1e3) * max(sv[0] / root_n, 1.0)))

    # back to original coordinates: u = T x with T the normalizing affinity
    m_u = Conic.from_coefficients(*v).matrix
    t = np.array([[1 / half, 0, -mid[0] / half], [0, 1 / half, -mid[1] / half], [0, 0, 1]])
    m_x = t.T @ m_u @ t
    coeffs = np.array([m_x[0, 0], m_x[1, 1], 2 * m_x[0, 1], 2 * m_x[0, 2], 2 * m_x[1, 2], m_x[2, 2]])
    coeffs = coeffs / np.linalg.norm(coeffs)
    if not np.iscomplexobj(v):
        coeffs = coeffs.real
    sing = np.linalg.svd(m_u, compute_uv=False)
    degenerate = null_dim > 1 or sing[-1] <= rank_tol * sing[0]

    ctrl = None
    if control and len(pts) >= 7:
        sc = np.linalg.svd(_design(u, cubic=True), compute_uv=False)
        ctrl = float(sc[-1] / root_n)
    return ConicFit(coeffs, residual, bool(degenerate), max(null_dim, 1), ctrl)


# tangent polygon and area product ------------------------------------------------


def tangent_polygon(poly: Polygon, outer: Conic, tol: float = 1e-12) -> Polygon:
    """Polygon cut out by the tangents of ``outer`` at consecutive vertices of ``poly``."""
    m = outer.matrix
    lines = [normalized(m @ np.array([v[0], v[1], 1.0], dtype=complex)) for v in poly.vertices]
    verts = []
    for j in range(poly.n):
        q = normalized(pj._cross(lines[j], lines[(j + 1) % poly.n]))
        if abs(q[2]) <= tol:
            raise VertexAtInfinity(j, f"tangents at vertices {j} and {(j + 1) % poly.n} are parallel")
        verts.append(q[:2] / q[2])
    return Polygon(np.array(verts))


def area_product(poly: Polygon, outer: Conic) -> complex:
    return polygon_area(poly) * polygon_area(tangent_polygon(poly, outer))


@dataclass
class ScanReport:
    samples: list[tuple[float, float]]
    mean: float
    max_relative_deviation: float
    skipped: list[float] = field(default_factory=list)
    even: bool = True

    def summary(self) -> dict:
        return {
            "samples": len(self.samples),
            "skipped": len(self.skipped),
            "mean": self.mean,
            "max_relative_deviation": self.max_relative_deviation,
            "even_n": self.even,
        }


def _is_concentric(cfg: PonceletConfig, tol: float = 1e-9) -> bool:
    c1, c2 = cfg.outer.center(), cfg.inner.center()
    return bool(np.max(np.abs(c1 - c2)) <= tol * max(1.0, float(np.max(np.abs(c1)))))


def area_product_scan(cfg: PonceletConfig, samples: int = 64) -> ScanReport:
    """``A(P_t) * A(Q_t)`` over the uniform grid for a concentric family.

    Odd ``n`` is allowed as a control; the invariance only holds for even ``n``.
    Samples whose tangent polygon has a vertex at infinity are skipped.
    """
    if samples < 32:
        raise ValueError("area product scans need at least 32 samples")
    if not _is_concentric(cfg):
        raise DegenerateInput("area product scan needs concentric conics")
    rows, skipped = [], []
    for t in uniform_grid(samples):
        poly = sample_family(cfg, float(t))
        try:
            rows.append((float(t), float(area_product(poly, cfg.outer).real)))
        except VertexAtInfinity:
            skipped.append(float(t))
    if not rows:
        raise AllSamplesDegenerate("every tangent polygon had a vertex at infinity")
    vals = np.array([v for _, v in rows])
    mean = float(vals.mean())
    dev = float(np.max(np.abs(vals - mean)) / max(abs(mean), 1e-300))
    return ScanReport(rows, mean, dev, skipped, cfg.n % 2 == 0)


# quadrilaterals ------------------------------------------------------------------


def diagonal_cross(poly: Polygon) -> complex:
    """Cross product of the diagonal directions ``V2 - V0`` and ``V3 - V1``."""
    v = poly.vertices
    d1, d2 = v[2] - v[0], v[3] - v[1]
    return d1[0] * d2[1] - d1[1] * d2[0]


def diagonal_intersection(poly: Polygon) -> np.ndarray | None:
    v = poly.vertices
    h = [np.array([p[0], p[1], 1.0], dtype=complex) for p in v]
    q = pj._cross(pj._cross(h[0], h[2]), pj._cross(h[1], h[3]))
    if abs(q[2]) <= 1e-14 * np.max(np.abs(q)):
        return None
    return q[:2] / q[2]


def bowtie_agreement(poly: Polygon, tol: float = 1e-10) -> tuple[bool, bool]:
    """Return ``(area ~ 0, diagonals parallel)``, both scale-normalized by diameter^2."""
    scale = poly.diameter() ** 2 or 1.0
    return abs(polygon_area(poly)) / scale < tol, abs(diagonal_cross(poly)) / scale < tol


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _alignment(u: np.ndarray, w: np.ndarray) -> float:
    """|sin| of the angle between two real directions."""
    u, w = _unit(u), _unit(w)
    return float(abs(u[0] * w[1] - u[1] * w[0]))


def near_bowtie_directions(poly: Polygon) -> dict:
    """Directions of CM2 and CCM displacement for a near-zero-area quadrilateral.

    ``[a : b]`` is the common direction of the (nearly parallel) diagonals.
    As the area goes to zero CM2 escapes along ``[a : b]`` and CCM along
    ``[-b : a]``; the misalignments are reported as |sin| of the angle.
    """
    v = poly.vertices.real
    d = _unit(v[2] - v[0]) + np.sign(np.dot(v[2] - v[0], v[3] - v[1])) * _unit(v[3] - v[1])
    a, b = _unit(d)
    mid = v.mean(axis=0)
    c2, cc = cm2(poly).real - mid, ccm(poly).real - mid
    return {
        "direction": (float(a), float(b)),
        "cm2_misalignment": _alignment(c2, np.array([a, b])),
        "ccm_misalignment": _alignment(cc, np.array([-b, a])),
        "cm2_distance": float(np.linalg.norm(c2)),
        "ccm_distance": float(np.linalg.norm(cc)),
    }


def synthetic_near_bowtie(eps: float) -> Polygon:
    """Bowtie ``(0,0),(2,1),(1,0),(0,1)`` with the last vertex lifted so that ``A = eps/2``.

    The diagonals are horizontal at ``eps = 0`` and their perpendicular
    bisectors are distinct, so both centers escape to infinity.
    """
    return Polygon(np.array([[0, 0], [2, 1], [1, 0], [0, 1 + eps]], dtype=complex))


@dataclass
class QuadReport:
    samples: int
    equivalence_failures: int
    zero_area: int
    intersection_spread: float
    diameter: float
    near_zero: list[dict]
    errors: list[dict] = field(default_factory=list)

    @property
    def relative_spread(self) -> float:
        return self.intersection_spread / max(self.diameter, 1e-300)

    def summary(self) -> dict:
        return {
            "samples": self.samples,
            "equivalence_failures": self.equivalence_failures,
            "zero_area": self.zero_area,
            "intersection_spread": self.intersection_spread,
            "relative_spread": self.relative_spread,
            "near_zero_checked": len(self.near_zero),
        }


def quad_diagonal_tests(
    cfg: PonceletConfig,
    samples: int = 64,
    tol: float = 1e-10,
    near_zero: float = 1e-3,
) -> QuadReport:
    """Diagonal checks over an ``n = 4`` family.

    (a) area ~ 0 iff the diagonals are parallel, per sample;
    (b) spread of the diagonal intersection point across the family;
    (c) displacement directions of CM2/CCM for samples with relative area
    below ``near_zero``.
    """
    if cfg.n != 4:
        raise ValueError("quadrilateral tests need n = 4")
    failures = zeros = 0
    meets, near, errors = [], [], []
    diam = 0.0
    for t in uniform_grid(samples):
        poly = sample_family(cfg, float(t))
        diam = max(diam, poly.diameter())
        zero, parallel = bowtie_agreement(poly, tol)
        failures += zero != parallel
        zeros += zero
        q = diagonal_intersection(poly)
        if q is not None:
            meets.append(q.real)
        rel_area = abs(polygon_area(poly)) / poly.diameter() ** 2
        if rel_area < near_zero and not zero:
            try:
                near.append({"t": float(t), **near_bowtie_directions(poly)})
            except PonceletError as exc:
                errors.append(exc.to_dict())
    meets = np.array(meets)
    spread = float(np.max(np.linalg.norm(meets - meets.mean(axis=0), axis=1))) if len(meets) else float("nan")
    return QuadReport(samples, int(failures), int(zeros), spread, diam, near, errors)


def random_bowtie_check(count: int = 1000, seed: int = 0, tol: float = 1e-10) -> tuple[int, int]:
    """Bowtie equivalence on random quadrilaterals, half of them constructed with parallel diagonals.

    Returns ``(failures, zero_area_cases)``.
    """
    rng = np.random.default_rng(seed)
    failures = zeros = 0
    for i in range(count):
        v = rng.normal(size=(4, 2))
        if i % 2:
            # force V3 - V1 parallel to V2 - V0
            v[3] = v[1] + rng.normal() * (v[2] - v[0])
        poly = Polygon(v.astype(complex))
        zero, parallel = bowtie_agreement(poly, tol)
        failures += zero != parallel
        zeros += zero
    return int(failures), int(zeros)


__all__ = [
    "ConicFit",
    "Locus",
    "QuadReport",
    "ScanReport",
    "area_product",
    "area_product_scan",
    "bbox_normalize",
    "bowtie_agreement",
    "center_locus",
    "conic_fit",
    "diagonal_cross",
    "diagonal_intersection",
    "near_bowtie_directions",
    "quad_diagonal_tests",
    "random_bowtie_check",
    "synthetic_near_bowtie",
    "tangent_polygon",
    "uniform_grid",
]
