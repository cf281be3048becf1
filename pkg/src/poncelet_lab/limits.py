"""Centers of mass along families that collapse onto a degenerate polygon."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .centers import (
    Polygon,
    Triangulation,
    center,
    centroid,
    polygon_area,
    triangle_area,
    weighted_circumcenter,
)
from .errors import InvalidPairing, NonConvergent

DEFAULT_TS = tuple(1e-2 * 2.0**-j for j in range(11))
# absolute area noise (relative to diameter^2) of vertices that come from tangent solves
AREA_NOISE = 1e-8


def _fold(labels: Sequence[int]) -> int:
    """The reflection ``j -> m - j`` (mod n) identifying coinciding indices."""
    n = len(labels)
    for m in range(n):
        if all(labels[j] == labels[(m - j) % n] for j in range(n)):
            # coinciding indices must be exactly the mirror pairs
            groups: dict[int, set[int]] = {}
            for j, lab in enumerate(labels):
                groups.setdefault(lab, set()).add(j)
            if all(g == {j, (m - j) % n} for j in range(n) for g in [groups[labels[j]]]):
                return m
    raise InvalidPairing(f"labels {list(labels)} do not describe a folded polygon")


def collapse_triangulation(poly: Polygon | int, pairing: Sequence[int]) -> Triangulation:
    """Triangulation in which every triangle has exactly two vertices with the same limit.

    ``pairing[j]`` is the cluster id of the limit vertex of ``W_j``.  The
    triangulation starts at a bending vertex ``b`` with ``(b-1, b, b+1)`` or at
    a gluing pair, then climbs the fold with the triangle pairs
    ``(i, i+1, j)`` and ``(j-1, j, i+1)`` for mirror indices ``i, j``.
    """
    n = poly if isinstance(poly, int) else poly.n
    if len(pairing) != n:
        raise InvalidPairing("pairing length differs from the number of vertices")
    m = _fold(pairing)
    fixed = [j for j in range(n) if (2 * j - m) % n == 0]
    glued = [j for j in range(n) if (m - j) % n == (j + 1) % n]
    tris: list[tuple[int, int, int]] = []
    if fixed:
        b = fixed[0]
        tris.append(((b - 1) % n, b, (b + 1) % n))
        i, j = b + 1, b - 1 + n
    elif glued:
        g = glued[0]
        i, j = g + 1, g + n
    else:
        raise InvalidPairing("fold has neither a bending vertex nor a gluing pair")
    while True:
        gap = j - i - 1
        if gap <= 0:
            break
        if gap == 1:
            tris.append((i % n, (i + 1) % n, j % n))
            break
        tris.append((i % n, (i + 1) % n, j % n))
        tris.append(((j - 1) % n, j % n, (i + 1) % n))
        i, j = i + 1, j - 1
    for tri in tris:
        labs = [pairing[v] for v in tri]
        if len(set(labs)) != 2:
            raise InvalidPairing(f"triangle {tri} does not collapse onto an edge")
    return Triangulation(tuple(tris))


@dataclass
class VanishingFit:
    """Quadratic fit ``c0 + c1 t + c2 t^2`` of a quantity that should vanish linearly."""

    c0: complex
    c1: complex
    c2: complex
    relative_residual: float

    t_min: float = 0.0
    floor: float = 0.0

    @property
    def linear(self) -> bool:
        """Constant term negligible against the linear one at the smallest ``t`` (or below noise)."""
        return abs(self.c1) > 0 and abs(self.c0) <= max(1e-2 * abs(self.c1) * self.t_min, self.floor)


def vanishing_fit(ts: Sequence[float], values: Sequence[complex], floor: float = 0.0) -> VanishingFit:
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=complex)
    scale = ts.max()
    design = np.stack([np.ones_like(ts), ts / scale, (ts / scale) ** 2], axis=1).astype(complex)
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    resid = vals - design @ coef
    rel = float(np.linalg.norm(resid) / max(np.linalg.norm(vals), 1e-300))
    return VanishingFit(complex(coef[0]), complex(coef[1] / scale), complex(coef[2] / scale**2), rel, float(ts.min()), floor)


@dataclass
class LimitReport:
    kind: str
    ts: np.ndarray
    values: np.ndarray
    limit: np.ndarray
    cauchy: np.ndarray
    ratios: np.ndarray
    t_ratios: np.ndarray
    area_fits: list[VanishingFit]
    triangulated: np.ndarray
    constant: bool = False

    @property
    def order(self) -> int:
        """Leading order ``p`` of ``C(t) - C(0) ~ t^p`` estimated from the ratios."""
        if self.constant or len(self.ratios) == 0:
            return 0
        est = np.median(np.log(self.ratios) / np.log(self.t_ratios))
        return max(1, int(round(float(est))))

    def ratio_error(self, order: int = 1) -> float:
        """Max relative deviation of the difference ratios from ``t_ratio ** order``."""
        if self.constant or len(self.ratios) == 0:
            return 0.0
        return float(np.max(np.abs(self.ratios / self.t_ratios**order - 1)))

    @property
    def max_ratio_error(self) -> float:
        return self.ratio_error(1)

    @property
    def order_ratio_error(self) -> float:
        return self.ratio_error(max(self.order, 1))

    @property
    def max_area_residual(self) -> float:
        return max((f.relative_residual for f in self.area_fits), default=0.0)

    def converged(self, ratio_tol: float = 0.2, area_tol: float = 1e-3, order: int | None = None) -> bool:
        """Ratios match ``t_ratio ** order`` (fitted order when None) and areas vanish linearly."""
        err = self.order_ratio_error if order is None else self.ratio_error(order)
        return (
            err <= ratio_tol
            and self.max_area_residual <= area_tol
            and all(f.linear for f in self.area_fits)
        )


def center_limit(
    sampler: Callable[[float], Polygon],
    kind: str,
    ts: Sequence[float] = DEFAULT_TS,
    pairing: Sequence[int] | None = None,
    strict: bool = True,
    noise_floor: float = 1e-7,
) -> LimitReport:
    """Evaluate a center along ``t -> 0`` and extrapolate its limit.

    Consecutive differences of the center should shrink like the steps of
    the ``t`` sequence.  With ``pairing`` the per-triangle areas of the
    collapse triangulation are fitted to confirm they vanish linearly, and
    the center is recomputed from that triangulation as a cross-check.
    Raises ``NonConvergent`` (when ``strict``) if the differences do not
    decrease.
    """
    ts = np.asarray(ts, dtype=float)
    polys = [sampler(float(t)) for t in ts]
    values = np.array([center(p, kind) for p in polys])
    steps = np.linalg.norm(np.diff(values, axis=0), axis=1)
    dt = np.abs(np.diff(ts))
    # steps under the noise floor carry no information (tangent-line solves lose
    # half the digits near tangency); a center constant along the path is converged
    floor = noise_floor * max(1.0, float(np.max(np.abs(values))))
    keep = int(np.argmax(steps < floor)) if np.any(steps < floor) else len(steps)
    constant = keep == 0
    ratios = steps[1:keep] / steps[: max(keep - 1, 0)]
    t_ratios = dt[1:keep] / dt[: max(keep - 1, 0)]
    if strict and not constant and not np.all(np.diff(steps[:keep]) < 0):
        raise NonConvergent(f"center differences do not decrease: {steps}")
    if constant or keep < 2:
        limit = values[-1]
    else:
        # Richardson on the leading term; along a fold the center is even in t
        p = np.median(np.log(steps[1:keep] / steps[: keep - 1]) / np.log(dt[1:keep] / dt[: keep - 1]))
        p = max(1, int(round(float(p))))
        r = (ts[keep] / ts[keep - 1]) ** p
        limit = (values[keep] - r * values[keep - 1]) / (1 - r)

    fits: list[VanishingFit] = []
    triangulated = np.full_like(values, np.nan)
    if pairing is not None:
        tri = collapse_triangulation(len(pairing), pairing)
        per_tri = []
        for idx, p in enumerate(polys):
            v = p.vertices
            areas = [triangle_area(v[a], v[b], v[c]) for a, b, c in tri.triangles]
            per_tri.append(areas)
            total = polygon_area(p)
            if kind.lower() == "ccm":
                acc = sum(weighted_circumcenter(v[a], v[b], v[c])[1] for a, b, c in tri.triangles)
            else:
                acc = sum(ar * centroid(v[a], v[b], v[c]) for ar, (a, b, c) in zip(areas, tri.triangles))
            triangulated[idx] = acc / total
        per_tri = np.array(per_tri)
        floor = AREA_NOISE * polys[-1].diameter() ** 2
        fits = [vanishing_fit(ts, per_tri[:, k], floor) for k in range(per_tri.shape[1])]
    return LimitReport(kind, ts, values, limit, steps, ratios, t_ratios, fits, triangulated, constant)


@dataclass
class DegenerationJet:
    """First-order expansion ``W_i(t) = base + direction t + O(t^2)``.

    ``multiplier`` relates a partner vertex converging to the same limit:
    ``W_j(t) = base + multiplier * direction * t + O(t^2)``.
    """

    index: int
    base: np.ndarray
    direction: np.ndarray
    multiplier: complex | None
    residual: float
    partner: int | None = None
    tangency: float | None = None


def _jet_fit(ts: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    design = np.stack([np.ones_like(ts), ts, ts**2], axis=1).astype(complex)
    coef, *_ = np.linalg.lstsq(design, pts, rcond=None)
    lin = design[:, :2] @ coef[:2]
    resid = float(np.max(np.abs(pts - lin)))
    return coef[0], coef[1], resid


def linear_model_residual(ts: Sequence[float], pts: np.ndarray) -> float:
    """Max deviation of samples from their least-squares line in ``t``."""
    ts = np.asarray(ts, dtype=float)
    design = np.stack([np.ones_like(ts), ts], axis=1).astype(complex)
    coef, *_ = np.linalg.lstsq(design, pts, rcond=None)
    return float(np.max(np.abs(pts - design @ coef)))


def fit_degeneration_jet(
    sampler: Callable[[float], Polygon],
    index: int,
    partner: int | None = None,
    outer=None,
    ts: Sequence[float] = DEFAULT_TS,
) -> DegenerationJet:
    """Least-squares jet of vertex ``index`` (and ``partner``) over small ``t``.

    With ``outer`` given, ``tangency`` is the normalized component of the
    direction along the outer conic's normal at the base point.
    """
    ts = np.asarray(ts, dtype=float)
    polys = [sampler(float(t)) for t in ts]
    w = np.array([p[index] for p in polys])
    base, direction, resid = _jet_fit(ts, w)
    mult = None
    if partner is not None:
        wj = np.array([p[partner] for p in polys])
        _, kj, rj = _jet_fit(ts, wj)
        mult = complex(np.vdot(direction, kj) / np.vdot(direction, direction))
        resid = max(resid, rj)
    tang = None
    if outer is not None:
        m = outer.normalized_matrix
        grad = (m @ np.array([base[0], base[1], 1.0]))[:2]
        tang = float(abs(grad @ direction) / (np.linalg.norm(grad) * np.linalg.norm(direction)))
    return DegenerationJet(index, base, direction, mult, resid, partner, tang)
