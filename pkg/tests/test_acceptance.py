"""Acceptance criteria, one PASS/FAIL line each.

The lines are collected in ``RESULTS`` and printed in the pytest terminal
summary (see ``conftest.py``); ``python tests/test_acceptance.py`` prints
them directly.
"""

from __future__ import annotations

import math
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import CONFIGS, random_polygon  # noqa: E402

from poncelet_lab.centers import (  # noqa: E402
    ccm,
    ccm_from_triangulation,
    cm2,
    cm2_from_triangulation,
    fan_triangulation,
    strip_triangulation,
)
from poncelet_lab.cli import main as cli_main  # noqa: E402
from poncelet_lab.degenerate import degeneration_path, enumerate_degenerate  # noqa: E402
from poncelet_lab.dynamics import closure_residual, family_start, find_family  # noqa: E402
from poncelet_lab.invariants import (  # noqa: E402
    area_product_scan,
    center_locus,
    conic_fit,
    quad_diagonal_tests,
    random_bowtie_check,
    uniform_grid,
)
from poncelet_lab.limits import center_limit  # noqa: E402
from poncelet_lab.projective import Conic  # noqa: E402
from poncelet_lab.spherical import spherical_locus_experiment  # noqa: E402


@dataclass
class Verdict:
    label: str
    passed: bool
    detail: str
    seconds: float
    budget: float | None = None

    @property
    def line(self) -> str:
        budget = "" if self.budget is None else f" (budget {self.budget:.0f} s)"
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.label}: {self.detail}; {self.seconds:.2f} s{budget}"


RESULTS: dict[str, Verdict] = {}


def record(key: str, label: str, passed: bool, detail: str, start: float, budget: float | None) -> Verdict:
    seconds = time.perf_counter() - start
    ok = bool(passed) and (budget is None or seconds < budget)
    v = Verdict(label, ok, detail, seconds, budget)
    RESULTS[key] = v
    return v


R, D = 1.0, 0.2  # bicentric circles: outer radius, center offset
ELL_OUTER = Conic.ellipse(2.0, 1.0)
OFFSET_CIRCLE = Conic.circle(1.0, (0.3, 0.1))


def fuss4(big: float, d: float) -> float:
    return (big**2 - d**2) / math.sqrt(2 * (big**2 + d**2))


# 1 ------------------------------------------------------------------------------


def criterion_1() -> Verdict:
    start = time.perf_counter()
    cases = []
    for n in (3, 4, 5, 6):
        cases.append((f"circles n={n}", find_family(Conic.circle(1.0), Conic.circle(1.0), n), math.cos(math.pi / n)))
    for n in (4, 6):
        cases.append((f"ellipses n={n}", find_family(ELL_OUTER, ELL_OUTER, n), None))
    bic = Conic.circle(1.0, (D, 0.0))
    cases.append(("bicentric n=3", find_family(Conic.circle(R), bic, 3), (R * R - D * D) / (2 * R)))
    cases.append(("bicentric n=4", find_family(Conic.circle(R), bic, 4), fuss4(R, D)))
    worst, oracle_err = 0.0, 0.0
    for _, cfg, expected in cases:
        if expected is not None:
            oracle_err = max(oracle_err, abs(cfg.scale - expected))
        for t in uniform_grid(50):
            worst = max(worst, closure_residual(cfg, family_start(cfg, float(t))))
    ok = worst < 1e-9 and oracle_err < 1e-9
    detail = f"{len(cases)} families x 50 samples, max closure {worst:.2e} < 1e-9, max Euler/Fuss/Chapple scale error {oracle_err:.1e}"
    return record("1", "1 porism closure", ok, detail, start, 5.0)


# 2 ------------------------------------------------------------------------------


def criterion_2() -> Verdict:
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        poly = random_polygon(rng)
        n = poly.n
        tris = (fan_triangulation(n, int(rng.integers(n))), strip_triangulation(n))
        for formula, tri_form in ((ccm, ccm_from_triangulation), (cm2, cm2_from_triangulation)):
            ref = formula(poly)
            scale = max(1.0, float(np.max(np.abs(ref))))
            for tri in tris:
                worst = max(worst, float(np.max(np.abs(tri_form(poly, tri) - ref))) / scale)
    detail = f"1000 polygons (n <= 10, |A| > 0.1), coordinate vs fan and strip forms, max relative difference {worst:.1e} < 1e-10"
    return record("2", "2 center formula equivalence", worst < 1e-10, detail, start, 10.0)


# 3 ------------------------------------------------------------------------------


def criterion_3() -> Verdict:
    start = time.perf_counter()
    counts, area, ok = [], 0.0, True
    for n in (3, 4, 5, 6):
        cfg = find_family(Conic.circle(R), Conic.circle(1.0, (D, 0.0)), n)
        rep = enumerate_degenerate(cfg, strict=False)
        counts.append(f"n={n}: {rep.count}/{4 * n}")
        area = max(area, rep.max_area_magnitude)
        ok &= rep.count == 4 * n and rep.structure_ok
    ok &= area < 1e-9
    detail = f"{', '.join(counts)}, index structure ok, max |A| {area:.1e} < 1e-9"
    return record("3", "3 degenerate polygon count", ok, detail, start, 5.0)


# 4 ------------------------------------------------------------------------------


def criterion_4() -> Verdict:
    start = time.perf_counter()
    worst, gain, counts = 0.0, 0.0, []
    for n in (3, 4):
        cfg = find_family(ELL_OUTER, OFFSET_CIRCLE, n)
        for kind in ("ccm", "cm2"):
            loc = center_locus(cfg, kind, 50)
            fit = conic_fit(loc.points)
            counts.append(len(loc))
            worst = max(worst, fit.residual)
            gain = max(gain, fit.control_gain)
    ok = worst < 1e-7 and min(counts) == 50 and gain < 10
    detail = f"ellipse(2,1) / offset circle, n=3 and n=4, CCM and CM2, 50 samples, max residual {worst:.1e} < 1e-7, cubic control gain {gain:.2f} < 10"
    return record("4", "4 CCM/CM2 locus conicity", ok, detail, start, 5.0)


# 5 ------------------------------------------------------------------------------


def criterion_5() -> Verdict:
    start = time.perf_counter()
    pairs = {"homothetic": (ELL_OUTER, ELL_OUTER), "rotated": (ELL_OUTER, Conic.ellipse(1.0, 2.0))}
    worst = 0.0
    for outer, inner in pairs.values():
        for n in (4, 6, 8):
            worst = max(worst, area_product_scan(find_family(outer, inner, n), 64).max_relative_deviation)
    hexagon = area_product_scan(find_family(Conic.circle(1.0), Conic.circle(1.0), 6), 64)
    control = area_product_scan(find_family(*pairs["rotated"], 5), 64)
    ok = worst < 1e-8 and abs(hexagon.mean - 9) < 1e-9 and control.max_relative_deviation > 1e-2
    detail = (
        f"even n in {{4,6,8}} max deviation {worst:.1e} < 1e-8, circles n=6 mean {hexagon.mean:.12f} (9 +- 1e-9), "
        f"odd n=5 control deviation {control.max_relative_deviation:.3f} > 1e-2"
    )
    return record("5", "5 area product invariance", ok, detail, start, 5.0)


# 6 ------------------------------------------------------------------------------


def _limit_reports():
    cfg = find_family(ELL_OUTER, OFFSET_CIRCLE, 3)
    reports = []
    for origin in ("bending", "gluing"):
        path = degeneration_path(cfg, origin)
        for kind in ("ccm", "cm2"):
            reports.append(center_limit(path, kind, pairing=path.labels))
    return reports


def criterion_6() -> tuple[Verdict, Verdict]:
    start = time.perf_counter()
    reports = _limit_reports()
    area = max(r.max_area_residual for r in reports)
    linear = all(f.linear for r in reports for f in r.area_fits)
    literal = max(r.max_ratio_error for r in reports)
    orders = sorted({r.order for r in reports})
    fitted = max(r.order_ratio_error for r in reports)
    areas_ok = area < 1e-3 and linear
    lit = record(
        "6",
        "6 limit existence (criterion as written: differences shrink by the t-ratio)",
        literal <= 0.2 and areas_ok,
        f"ellipse(2,1) / offset circle n=3, bending and gluing paths, CCM and CM2: max |ratio / t-ratio - 1| = {literal:.3f} > 0.2; "
        f"the center is even in t along the fold so differences shrink by the squared t-ratio (see ledger); "
        f"collapse-triangle area quadratic residual {area:.1e} < 1e-3",
        start,
        5.0,
    )
    start2 = time.perf_counter()
    order = record(
        "6b",
        "6b limit existence (fitted order)",
        orders == [2] and fitted <= 0.2 and areas_ok,
        f"fitted order {orders}, max |ratio / t-ratio^2 - 1| = {fitted:.4f} <= 0.2, areas vanish linearly, residual {area:.1e} < 1e-3",
        start2,
        None,
    )
    order.seconds += lit.seconds
    return lit, order


# 7 ------------------------------------------------------------------------------


def criterion_7() -> Verdict:
    start = time.perf_counter()
    failures, zeros = random_bowtie_check(1000, seed=0)
    rep = quad_diagonal_tests(find_family(ELL_OUTER, OFFSET_CIRCLE, 4), 64)
    ok = failures == 0 and rep.equivalence_failures == 0 and rep.relative_spread < 1e-8
    detail = (
        f"1000 random quadrilaterals ({zeros} bowties): {failures} equivalence failures; "
        f"non-concentric n=4 family diagonal intersection spread {rep.relative_spread:.1e} of diameter < 1e-8"
    )
    return record("7", "7 quadrilateral structure", ok, detail, start, 5.0)


# 8 ------------------------------------------------------------------------------


def criterion_8() -> Verdict:
    start = time.perf_counter()
    cfg = find_family(Conic.ellipse(2.0, 1.0, (0.3, 0.2)), Conic.circle(1.0, (0.6, 0.3)), 3)
    rep = spherical_locus_experiment(cfg, 50)
    scan = ", ".join(f"{r:.1e}" for _, r in rep.flat_scan)
    ok = rep.non_conic and rep.flat_limit_monotone
    detail = (
        f"residual {rep.residual:.2e} vs planar control {rep.control_residual:.1e} (ratio {rep.ratio:.1e} > 1e3); "
        f"flat-limit scan at scales 1, 0.1, 0.01: {scan} (decreasing)"
    )
    return record("8", "8 spherical non-conicity", ok, detail, start, 5.0)


# 9 ------------------------------------------------------------------------------


def criterion_9() -> Verdict:
    start = time.perf_counter()
    expected = {"degenerate_bicentric_n3": 0, "malformed": 1, "nonclosing_scale": 2}
    codes, same, clean = {}, True, True
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for name in expected:
            codes[name] = cli_main(["run", str(CONFIGS / f"{name}.conf"), "--out", str(tmp / name)])
        clean = not (tmp / "malformed").exists()
        runs = []
        for rep in ("a", "b"):
            out = tmp / f"det_{rep}"
            cli_main(["run", str(CONFIGS / "ccm_locus_ellipse_n3.conf"), "--out", str(out), "--svg", "--seed", "1"])
            runs.append(out)
        for name in ("samples.csv", "figure.svg"):
            same &= (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()
    ok = codes == expected and same and clean
    detail = (
        "exit codes " + ", ".join(f"{k}={v}" for k, v in codes.items())
        + f" (expected 0/1/2), no output after input error: {clean}, byte-identical CSV and SVG: {same}"
    )
    return record("9", "9 CLI determinism and exit codes", ok, detail, start, None)


# pytest entry points ---------------------------------------------------------------


@pytest.mark.parametrize("key, fn", [("1", criterion_1), ("2", criterion_2), ("3", criterion_3), ("4", criterion_4),
                                     ("5", criterion_5), ("7", criterion_7), ("8", criterion_8), ("9", criterion_9)])
def test_criterion(key, fn):
    v = fn()
    print(v.line)
    assert v.passed, v.line


@pytest.fixture(scope="module")
def limit_verdicts():
    return criterion_6()


def test_criterion_6_fitted_order(limit_verdicts):
    _, order = limit_verdicts
    print(order.line)
    assert order.passed, order.line


@pytest.mark.xfail(
    strict=True,
    reason="center differences shrink by the squared t-ratio along a fold-symmetric path; "
    "the first-order ratio test cannot pass (documented in the decisions ledger)",
)
def test_criterion_6_first_order_ratio(limit_verdicts):
    literal, _ = limit_verdicts
    print(literal.line)
    assert literal.passed, literal.line


def report_lines() -> list[str]:
    order = ["1", "2", "3", "4", "5", "6", "6b", "7", "8", "9"]
    return [RESULTS[k].line for k in order if k in RESULTS]


if __name__ == "__main__":
    for fn in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9):
        fn()
    print("\n".join(report_lines()))
