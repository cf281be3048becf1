"""Projective primitives over the complex numbers.

Points and lines of CP^2 are homogeneous 3-vectors, conics are symmetric
3x3 matrices.  Everything is complex double precision; comparisons are made
after normalizing by the coordinate of largest magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInput,
    IdenticalConics,
    NotOnConic,
    PencilSplitFailure,
    SingularConic,
)
from .roots import binary_quadratic_roots, cubic_roots

TOL = 1e-9


def _vec(values) -> np.ndarray:
    arr = np.asarray(values, dtype=complex).reshape(3)
    return arr


def normalized(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` so that its largest-magnitude entry equals 1."""
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0:
        raise DegenerateInput("zero homogeneous vector")
    return v / v[i]


def hom_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Scale-invariant distance between two homogeneous vectors.

    Each vector is divided by its entry at the other's dominant index and the
    max-norm difference is taken; the smaller of the two one-sided values is
    returned.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    vals = []
    for a, b in ((u, v), (v, u)):
        i = int(np.argmax(np.abs(a)))
        if b[i] != 0:
            vals.append(float(np.max(np.abs(a / a[i] - b / b[i]))))
    return min(vals) if vals else float("inf")


def same_hom(u: np.ndarray, v: np.ndarray, tol: float = TOL) -> bool:
    return hom_distance(u, v) <= tol


@dataclass(frozen=True, eq=False)
class _Hom:
    coords: np.ndarray

    def __init__(self, *values):
        if len(values) == 1:
            values = values[0]
        arr = _vec(values)
        if not np.any(arr):
            raise DegenerateInput(f"{type(self).__name__} with all coordinates zero")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    def normalized(self):
        return type(self)(normalized(self.coords))

    def same(self, other, tol: float = TOL) -> bool:
        return same_hom(self.coords, other.coords, tol)

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self):
        c = normalized(self.coords)
        body = ":".join(f"{z.real:.6g}{z.imag:+.6g}j" if abs(z.imag) > 1e-14 else f"{z.real:.6g}" for z in c)
        return f"{type(self).__name__}[{body}]"


class HomPoint(_Hom):
    """Point ``[x:y:z]`` of the complex projective plane."""

    @classmethod
    def affine(cls, x, y) -> "HomPoint":
        return cls(x, y, 1.0)

    @property
    def at_infinity(self) -> bool:
        c = normalized(self.coords)
        return abs(c[2]) < TOL

    def to_affine(self) -> np.ndarray:
        """Return ``(x/z, y/z)``; raises ``DegenerateInput`` at infinity."""
        if self.at_infinity:
            raise DegenerateInput("point at infinity has no affine coordinates")
        return self.coords[:2] / self.coords[2]


class HomLine(_Hom):
    """Line ``{p : coeffs . p = 0}``."""

    def contains(self, p: HomPoint, tol: float = TOL) -> bool:
        return incidence_residual(self, p) <= tol


LINE_AT_INFINITY = HomLine(0, 0, 1)


def incidence_residual(l: HomLine, p: HomPoint) -> float:
    return float(abs(normalized(l.coords) @ normalized(p.coords)))


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.array(
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]],
        dtype=complex,
    )


def _checked_cross(u: np.ndarray, v: np.ndarray, tol: float) -> np.ndarray:
    un, vn = normalized(u), normalized(v)
    w = _cross(un, vn)
    if np.max(np.abs(w)) <= tol:
        raise DegenerateInput("arguments coincide up to scale")
    return w


def join(p: HomPoint, q: HomPoint, tol: float = TOL) -> HomLine:
    """Line through two distinct points."""
    return HomLine(_checked_cross(p.coords, q.coords, tol))


def meet(l: HomLine, m: HomLine, tol: float = TOL) -> HomPoint:
    """Intersection point of two distinct lines."""
    return HomPoint(_checked_cross(l.coords, m.coords, tol))


def adjugate(m: np.ndarray) -> np.ndarray:
    """Classical adjoint of a 3x3 matrix (transpose of the cofactor matrix)."""
    c0, c1, c2 = m[:, 0], m[:, 1], m[:, 2]
    # rows of the adjugate are the cross products of columns
    return np.array([_cross(c1, c2), _cross(c2, c0), _cross(c0, c1)], dtype=complex)


def _points_on_line(l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # two independent points: meets of l with the coordinate lines not dominated by l
    i = int(np.argmax(np.abs(l)))
    j, k = [idx for idx in range(3) if idx != i]
    ej = np.zeros(3, dtype=complex)
    ek = np.zeros(3, dtype=complex)
    ej[j] = 1
    ek[k] = 1
    return _cross(l, ej), _cross(l, ek)


class Conic:
    """Conic ``{p : p^T M p = 0}`` given by a symmetric complex matrix (up to scale)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex).reshape(3, 3)
        if not np.array_equal(m, m.T):
            m = (m + m.T) / 2
        if not np.any(m):
            raise DegenerateInput("zero conic matrix")
        m.setflags(write=False)
        self.matrix = m

    # constructors -----------------------------------------------------------
    @classmethod
    def from_coefficients(cls, a, b, c, d, e, f) -> "Conic":
        """Conic ``a x^2 + b y^2 + c xy + d x + e y + f = 0``."""
        return cls([[a, c / 2, d / 2], [c / 2, b, e / 2], [d / 2, e / 2, f]])

    @classmethod
    def ellipse(cls, a: float, b: float, center=(0.0, 0.0), angle: float = 0.0) -> "Conic":
        """Ellipse with semi-axes ``a``, ``b`` rotated by ``angle`` radians about ``center``."""
        cth, sth = np.cos(angle), np.sin(angle)
        rot = np.array([[cth, -sth], [sth, cth]])
        q = rot @ np.diag([1 / a**2, 1 / b**2]) @ rot.T
        cx, cy = center
        ctr = np.array([cx, cy], dtype=float)
        m = np.zeros((3, 3))
        m[:2, :2] = q
        m[:2, 2] = m[2, :2] = -q @ ctr
        m[2, 2] = ctr @ q @ ctr - 1
        return cls(m)

    @classmethod
    def circle(cls, r: float, center=(0.0, 0.0)) -> "Conic":
        return cls.ellipse(r, r, center)

    # basic queries -----------------------------------------------------------
    @property
    def normalized_matrix(self) -> np.ndarray:
        return self.matrix / np.max(np.abs(self.matrix))

    def coefficients(self) -> np.ndarray:
        m = self.matrix
        return np.array([m[0, 0], m[1, 1], 2 * m[0, 1], 2 * m[0, 2], 2 * m[1, 2], m[2, 2]])

    def residual(self, p: HomPoint) -> float:
        """|p^T M p| with both the point and the matrix max-normalized."""
        v = normalized(p.coords)
        return float(abs(v @ self.normalized_matrix @ v))

    def contains(self, p: HomPoint, tol: float = TOL) -> bool:
        return self.residual(p) <= tol

    def line_residual(self, l: HomLine) -> float:
        """Tangency residual |l^T adj(M) l| (normalized)."""
        v = normalized(l.coords)
        return float(abs(v @ normalized_dual(self) @ v))

    def is_tangent(self, l: HomLine, tol: float = TOL) -> bool:
        return self.line_residual(l) <= tol

    def determinant(self) -> complex:
        return complex(np.linalg.det(self.normalized_matrix))

    def rank(self, tol: float = TOL) -> int:
        s = np.linalg.svd(self.normalized_matrix, compute_uv=False)
        return int(np.sum(s > tol * s[0]))

    def is_real(self, tol: float = 1e-12) -> bool:
        m = self.normalized_matrix
        return bool(np.max(np.abs(m.imag)) <= tol)

    def scaled(self, s: float, center=None) -> "Conic":
        """Homothetic copy scaled by ``s`` about ``center`` (default: the conic's center)."""
        if center is None:
            center = self.center()
        cx, cy = center
        # point x maps to c + s (x - c); pull back the quadratic form
        h = np.array([[1 / s, 0, -cx / s + cx], [0, 1 / s, -cy / s + cy], [0, 0, 1]], dtype=complex)
        return Conic(h.T @ self.matrix @ h)

    def transformed(self, h: np.ndarray) -> "Conic":
        """Image of the conic under the projective map ``p -> h p``."""
        hinv = np.linalg.inv(np.asarray(h, dtype=complex))
        return Conic(hinv.T @ self.matrix @ hinv)

    def center(self) -> np.ndarray:
        """Affine center (pole of the line at infinity)."""
        pole = adjugate(self.matrix) @ np.array([0, 0, 1], dtype=complex)
        if abs(pole[2]) < 1e-14 * np.max(np.abs(pole)):
            raise DegenerateInput("conic has no finite center")
        return pole[:2] / pole[2]

    def same(self, other: "Conic", tol: float = TOL) -> bool:
        a = self.matrix.ravel()
        b = other.matrix.ravel()
        return same_hom_vector(a, b, tol)

    def __repr__(self):
        coeffs = np.real_if_close(self.coefficients() / np.max(np.abs(self.coefficients())))
        return f"Conic({np.array2string(coeffs, precision=6)})"


def same_hom_vector(u: np.ndarray, v: np.ndarray, tol: float = TOL) -> bool:
    i = int(np.argmax(np.abs(u)))
    if v[i] == 0:
        return False
    return bool(np.max(np.abs(u / u[i] - v / v[i])) <= tol)


# operations ------------------------------------------------------------------


def tangent_at(conic: Conic, p: HomPoint, tol: float = TOL) -> HomLine:
    """Tangent line ``M p`` at a point of the conic."""
    if conic.residual(p) > tol:
        raise NotOnConic(f"{p} is not on {conic} (residual {conic.residual(p):.3g})")
    return HomLine(conic.matrix @ normalized(p.coords))


def polar(conic: Conic, p: HomPoint) -> HomLine:
    return HomLine(conic.matrix @ normalized(p.coords))


def line_conic_intersect(conic: Conic, l: HomLine, tol: float = TOL):
    """Intersection of a line with a conic.

    Returns ``(points, multiplicities)``; a tangency gives one point with
    multiplicity 2.  Raises ``DegenerateInput`` if the line lies on the conic.
    """
    a, b = _points_on_line(normalized(l.coords))
    a, b = normalized(a), normalized(b)
    m = conic.normalized_matrix
    qa, qab, qb = a @ m @ a, a @ m @ b, b @ m @ b
    try:
        roots, mult = binary_quadratic_roots(qa, 2 * qab, qb)
    except ValueError:
        raise DegenerateInput("line is contained in the conic") from None
    pts = [HomPoint(normalized(s * a + u * b)) for s, u in roots]
    return pts, mult


def residual_point(m: np.ndarray, p: np.ndarray, l: np.ndarray) -> np.ndarray:
    """Raw form of :func:`other_intersection` on normalized arrays."""
    b = normalized(_cross(l, np.conj(p)))
    out = (b @ m @ b) * p - 2 * (p @ m @ b) * b
    if not np.any(out):
        raise DegenerateInput("line is contained in the conic")
    return normalized(out)


def other_intersection(conic: Conic, l: HomLine, p: HomPoint) -> HomPoint:
    """Second intersection of ``l`` with ``conic`` given one intersection ``p``.

    With ``b`` any other point of ``l``, the residual intersection is
    ``(b M b) p - 2 (p M b) b``; a tangent line returns ``p`` itself.
    """
    return HomPoint(residual_point(conic.normalized_matrix, normalized(p.coords), normalized(l.coords)))


def normalized_dual(conic: Conic) -> np.ndarray:
    dual = adjugate(conic.normalized_matrix)
    return dual / np.max(np.abs(dual))


def other_tangent(conic: Conic, p: HomPoint, l: HomLine) -> HomLine:
    """The tangent to ``conic`` through ``p`` other than ``l``.

    This is :func:`other_intersection` in the dual plane: the pencil of lines
    through ``p`` meets the dual conic in the two tangents.
    """
    return HomLine(residual_point(normalized_dual(conic), normalized(l.coords), normalized(p.coords)))


def tangents_from(conic: Conic, p: HomPoint, tol: float = TOL):
    """Tangent lines to ``conic`` through ``p``.

    Contact points are found by intersecting the conic with the polar line of
    ``p``; returns ``(lines, multiplicities)``.  A point on the conic yields
    its tangent line with multiplicity 2.
    """
    if conic.residual(p) <= tol:
        return [tangent_at(conic, p, tol)], [2]
    contacts, mult = line_conic_intersect(conic, polar(conic, p), tol)
    lines = [join(p, c, tol) for c in contacts]
    if len(lines) == 1:
        return lines, [2]
    return lines, mult


def contact_point(conic: Conic, l: HomLine) -> HomPoint:
    """Point where a tangent line touches a nondegenerate conic (pole of ``l``)."""
    return HomPoint(normalized(adjugate(conic.normalized_matrix) @ normalized(l.coords)))


def dual_conic(conic: Conic, tol: float = TOL) -> Conic:
    """Adjugate conic, whose points are the tangent lines of ``conic``."""
    if abs(conic.determinant()) <= tol:
        raise SingularConic("dual of a singular conic")
    adj = adjugate(conic.normalized_matrix)
    return Conic(adj / np.max(np.abs(adj)))


def _split_degenerate(d: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Two lines whose product is the rank <= 2 symmetric matrix ``d``."""
    d = d / np.max(np.abs(d))
    adj = adjugate(d)
    scale = np.max(np.abs(adj))
    if scale <= 1e-7:
        # rank 1: d = l l^T
        j = int(np.argmax(np.abs(np.diag(d))))
        l = d[:, j] / np.sqrt(d[j, j])
        return l, l
    # adj(d) = -p p^T with p the singular point of the line pair
    i = int(np.argmax(np.abs(np.diag(adj))))
    p = adj[:, i] / np.sqrt(-adj[i, i])
    mp = np.array([[0, p[2], -p[1]], [-p[2], 0, p[0]], [p[1], -p[0], 0]], dtype=complex)
    best = None
    for sign in (1, -1):
        r1 = d + sign * mp
        s = np.linalg.svd(r1, compute_uv=False)
        if best is None or s[1] < best[0]:
            best = (s[1], r1)
    r1 = best[1]
    r, c = np.unravel_index(int(np.argmax(np.abs(r1))), r1.shape)
    return r1[r, :].copy(), r1[:, c].copy()


def conic_conic_intersect(c1: Conic, c2: Conic, tol: float = TOL):
    """The four intersection points of two conics, with multiplicity.

    A degenerate member of the pencil ``c1 + lam c2`` is split into two lines,
    each of which is intersected with one of the conics.  Returns
    ``(points, multiplicities)`` with multiplicities summing to 4.
    """
    if c1.same(c2, tol):
        raise IdenticalConics("conics coincide up to scale")
    a = c1.normalized_matrix
    b = c2.normalized_matrix
    # orthonormal pencil basis (Frobenius inner product), then shear the
    # leading member so that its determinant is well away from zero
    base = a / np.linalg.norm(a)
    w = b - np.vdot(base, b) * base
    if np.linalg.norm(w) <= tol:
        raise IdenticalConics("conics coincide up to scale")
    w = w / np.linalg.norm(w)
    shears = (0, 1, -1, 1j, -1j, 0.5, -0.5)
    lead = max((w + c * base for c in shears), key=lambda m: abs(np.linalg.det(m)) / np.linalg.norm(m) ** 3)
    # det(base + lam lead) = det(base) + lam tr(adj(base) lead) + lam^2 tr(base adj(lead)) + lam^3 det(lead)
    k3 = np.linalg.det(lead)
    k2 = np.trace(base @ adjugate(lead))
    k1 = np.trace(adjugate(base) @ lead)
    k0 = np.linalg.det(base)
    if abs(k3) > 1e-12:
        lams = [_refine_root((k3, k2, k1, k0), lam) for lam in cubic_roots(k3, k2, k1, k0)]
        candidates = [base + lam * lead for lam in lams]
        # a repeated root is poorly determined; the most isolated root is well conditioned
        sep = [
            min(abs(lams[i] - lams[j]) for j in range(3) if j != i) / (1 + abs(lams[i]))
            for i in range(3)
        ]
    else:
        candidates = [lead]
        sep = [1.0]

    def score(m):
        return abs(np.linalg.det(m / np.max(np.abs(m))))

    scores = [score(m) for m in candidates]
    usable = [i for i in range(len(candidates)) if scores[i] <= 1e-6]
    if not usable:
        raise PencilSplitFailure(f"no degenerate pencil member found (best |det| = {min(scores):.3g})")
    pick = max(usable, key=lambda i: (round(sep[i], 6), -scores[i]))
    l1, l2 = _split_degenerate(candidates[pick], tol)
    points: list[HomPoint] = []
    mults: list[int] = []
    for lv in (l1, l2):
        pts, mm = line_conic_intersect(c1, HomLine(lv), tol)
        for p, k in zip(pts, mm):
            points.append(p)
            mults.append(k)
    return _merge(points, mults, tol)


def _refine_root(coeffs, x: complex, max_iter: int = 12) -> complex:
    # clustered pencil roots leave Cardano's output inaccurate; iterate Newton while it helps
    poly = np.poly1d(coeffs)
    deriv = poly.deriv()
    fx = abs(poly(x))
    for _ in range(max_iter):
        d = deriv(x)
        if d == 0:
            break
        y = x - poly(x) / d
        fy = abs(poly(y))
        if fy >= fx:
            break
        x, fx = y, fy
    return x


def _merge(points: Sequence[HomPoint], mults: Sequence[int], tol: float):
    out_p: list[HomPoint] = []
    out_m: list[int] = []
    for p, k in zip(points, mults):
        for idx, q in enumerate(out_p):
            if hom_distance(p.coords, q.coords) <= max(tol, 1e-7):
                out_m[idx] += k
                break
        else:
            out_p.append(p)
            out_m.append(k)
    return out_p, out_m


def general_position_check(c1: Conic, c2: Conic, tol: float = TOL) -> bool:
    """True when the conics meet in four distinct points of CP^2."""
    _, mults = conic_conic_intersect(c1, c2, tol)
    return len(mults) == 4 and all(m == 1 for m in mults)


def dual_intersections(c1: Conic, c2: Conic, tol: float = TOL) -> list[HomLine]:
    """Common tangent lines of two nondegenerate conics (intersection of duals)."""
    pts, mults = conic_conic_intersect(dual_conic(c1, tol), dual_conic(c2, tol), tol)
    lines = []
    for p, m in zip(pts, mults):
        lines.extend([HomLine(p.coords)] * m)
    return lines
