"""Closed-form polynomial roots over the complex numbers.

Quadratics are solved in homogeneous form so that roots at infinity need no
special casing; cubics use Cardano's formula. Every root gets one Newton step.
"""

from __future__ import annotations

import cmath

import numpy as np

DOUBLE_ROOT_TOL = 1e-9


def _newton_quadratic(a: complex, b: complex, c: complex, s: complex, u: complex) -> tuple[complex, complex]:
    # polish in whichever affine chart keeps the root bounded
    if abs(u) >= abs(s):
        x = s / u
        f = (a * x + b) * x + c
        df = 2 * a * x + b
        if df != 0:
            x -= f / df
        return x, 1.0 + 0j
    y = u / s
    f = (c * y + b) * y + a
    df = 2 * c * y + b
    if df != 0:
        y -= f / df
    return 1.0 + 0j, y


def binary_quadratic_roots(a: complex, b: complex, c: complex, double_tol: float = DOUBLE_ROOT_TOL):
    """Roots ``[s:u]`` of ``a s^2 + b s u + c u^2 = 0``.

    Returns ``(roots, multiplicities)`` where ``roots`` is a list of one or two
    complex pairs.  A double root is returned once with multiplicity 2.
    Raises ``ValueError`` when the form vanishes identically.
    """
    a, b, c = complex(a), complex(b), complex(c)
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        raise ValueError("quadratic form vanishes identically")
    a, b, c = a / scale, b / scale, c / scale
    disc = b * b - 4 * a * c
    if abs(disc) <= double_tol * (abs(b) ** 2 + 4 * abs(a * c)):
        if abs(a) >= abs(c):
            root = _newton_quadratic(a, b, c, -b, 2 * a) if abs(a) > 0 else (1.0 + 0j, 0j)
        else:
            root = _newton_quadratic(a, b, c, 2 * c, -b)
        return [root], [2]
    r = cmath.sqrt(disc)
    if abs(b + r) < abs(b - r):
        r = -r
    q = -(b + r) / 2
    roots = [_newton_quadratic(a, b, c, q, a), _newton_quadratic(a, b, c, c, q)]
    return roots, [1, 1]


def cubic_roots(a: complex, b: complex, c: complex, d: complex) -> np.ndarray:
    """The three complex roots of ``a x^3 + b x^2 + c x + d`` (``a != 0``)."""
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    if a == 0:
        raise ValueError("leading coefficient is zero")
    b, c, d = b / a, c / a, d / a
    d0 = b * b - 3 * c
    d1 = 2 * b**3 - 9 * b * c + 27 * d
    sq = cmath.sqrt(d1 * d1 - 4 * d0**3)
    big = d1 + sq if abs(d1 + sq) >= abs(d1 - sq) else d1 - sq
    if big == 0:
        roots = [-b / 3] * 3
    else:
        cc = (big / 2) ** (1 / 3)
        xi = complex(-0.5, np.sqrt(3) / 2)
        roots = []
        for k in range(3):
            ck = cc * xi**k
            roots.append(-(b + ck + d0 / ck) / 3)
    out = []
    for x in roots:
        f = ((x + b) * x + c) * x + d
        df = (3 * x + 2 * b) * x + c
        if df != 0:
            x = x - f / df
        out.append(x)
    return np.array(out, dtype=complex)
