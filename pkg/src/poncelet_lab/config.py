"""Flat ``key = value`` experiment configs with dotted section names.

Example::

    experiment = locus
    outer.ellipse = 2, 1, 0, 0, 0        # a, b, center x, center y, angle
    inner.ellipse = 1, 1, 0.3, 0.1, 0
    family.n = 3
    locus.kind = ccm

Conics are given either as ``*.coeffs = A, B, C, D, E, F`` for
``Ax^2 + By^2 + Cxy + Dx + Ey + F`` or with the ellipse shorthand.  Without
``inner.scale`` the inner conic is rescaled about its center until the pair
closes after ``family.n`` steps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .projective import Conic

EXPERIMENTS = ("find-family", "locus", "area-product", "degenerate", "quad-tests", "spherical-locus")
CENTER_KINDS = ("ccm", "cm2")

DEFAULT_SAMPLES = {
    "find-family": 50,
    "locus": 50,
    "area-product": 64,
    "degenerate": 0,
    "quad-tests": 64,
    "spherical-locus": 50,
}


@dataclass(frozen=True)
class ConicSpec:
    """Either six coefficients or an ellipse ``(a, b, cx, cy, angle)``."""

    form: str
    values: tuple[complex | float, ...]

    def build(self) -> Conic:
        if self.form == "coeffs":
            return Conic.from_coefficients(*self.values)
        a, b, cx, cy, angle = self.values
        return Conic.ellipse(a, b, (cx, cy), angle)

    def emit(self) -> str:
        return ", ".join(_fmt(v) for v in self.values)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    outer: ConicSpec
    inner: ConicSpec
    n: int = 3
    k: int = 1
    inner_scale: float | None = None
    samples: int | None = None
    tol: float = 1e-9
    check_tol: float | None = None
    seed: int = 0
    out_dir: str = "poncelet-out"
    svg: bool = False
    locus_kind: str = "ccm"

    @property
    def sample_count(self) -> int:
        return self.samples if self.samples is not None else DEFAULT_SAMPLES[self.experiment]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def digest(self) -> str:
        """sha256 of the canonical config text without the output directory."""
        text = emit_config(replace(self, out_dir=""))
        return hashlib.sha256(text.encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else repr(v).strip("()")
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _number(text: str, key: str) -> complex | float:
    text = text.strip()
    try:
        if "j" in text:
            return complex(text.replace(" ", ""))
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: {text!r} is not a number") from None


def _numbers(text: str, key: str, count: int) -> tuple:
    parts = [p for p in text.split(",")]
    if len(parts) != count:
        raise ConfigError(f"{key}: expected {count} comma-separated numbers, got {len(parts)}")
    return tuple(_number(p, key) for p in parts)


def _int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: {text!r} is not an integer") from None


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: {text!r} is not a boolean")


def _choice(text: str, key: str, options: tuple[str, ...]) -> str:
    t = text.strip().lower()
    if t not in options:
        raise ConfigError(f"{key}: {text!r} is not one of {', '.join(options)}")
    return t


def _pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _conic(kv: dict[str, str], name: str) -> ConicSpec:
    has_c, has_e = f"{name}.coeffs" in kv, f"{name}.ellipse" in kv
    if has_c == has_e:
        raise ConfigError(f"give exactly one of {name}.coeffs or {name}.ellipse")
    if has_c:
        return ConicSpec("coeffs", _numbers(kv.pop(f"{name}.coeffs"), f"{name}.coeffs", 6))
    vals = _numbers(kv.pop(f"{name}.ellipse"), f"{name}.ellipse", 5)
    if any(isinstance(v, complex) for v in vals):
        raise ConfigError(f"{name}.ellipse takes real numbers")
    if vals[0] <= 0 or vals[1] <= 0:
        raise ConfigError(f"{name}.ellipse: semi-axes must be positive")
    return ConicSpec("ellipse", vals)


def parse_config(text: str) -> ExperimentConfig:
    kv = _pairs(text)
    if "experiment" not in kv:
        raise ConfigError("missing key 'experiment'")
    experiment = _choice(kv.pop("experiment"), "experiment", EXPERIMENTS)
    outer, inner = _conic(kv, "outer"), _conic(kv, "inner")
    cfg = ExperimentConfig(
        experiment=experiment,
        outer=outer,
        inner=inner,
        n=_int(kv.pop("family.n", "3"), "family.n"),
        k=_int(kv.pop("family.k", "1"), "family.k"),
        inner_scale=float(_number(kv.pop("inner.scale"), "inner.scale").real) if "inner.scale" in kv else None,
        samples=_int(kv.pop("samples"), "samples") if "samples" in kv else None,
        tol=float(_number(kv.pop("tol", "1e-09"), "tol").real),
        check_tol=float(_number(kv.pop("check.tol"), "check.tol").real) if "check.tol" in kv else None,
        seed=_int(kv.pop("seed", "0"), "seed"),
        out_dir=kv.pop("output.dir", "poncelet-out"),
        svg=_bool(kv.pop("output.svg", "false"), "output.svg"),
        locus_kind=_choice(kv.pop("locus.kind", "ccm"), "locus.kind", CENTER_KINDS),
    )
    if kv:
        raise ConfigError(f"unknown keys: {', '.join(sorted(kv))}")
    if cfg.n < 3:
        raise ConfigError("family.n must be at least 3")
    required_n = {"quad-tests": 4, "spherical-locus": 3}.get(cfg.experiment)
    if required_n is not None and cfg.n != required_n:
        raise ConfigError(f"experiment {cfg.experiment} needs family.n = {required_n}")
    if cfg.samples is not None and cfg.samples < 0:
        raise ConfigError("samples must be non-negative")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc}") from None
    return parse_config(text)


def emit_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; ``parse_config(emit_config(c)) == c``."""
    lines = [
        f"experiment = {cfg.experiment}",
        f"outer.{cfg.outer.form} = {cfg.outer.emit()}",
        f"inner.{cfg.inner.form} = {cfg.inner.emit()}",
    ]
    if cfg.inner_scale is not None:
        lines.append(f"inner.scale = {cfg.inner_scale!r}")
    lines += [f"family.n = {cfg.n}", f"family.k = {cfg.k}"]
    if cfg.samples is not None:
        lines.append(f"samples = {cfg.samples}")
    lines.append(f"tol = {cfg.tol!r}")
    if cfg.check_tol is not None:
        lines.append(f"check.tol = {cfg.check_tol!r}")
    lines += [
        f"seed = {cfg.seed}",
        f"output.dir = {cfg.out_dir}",
        f"output.svg = {'true' if cfg.svg else 'false'}",
        f"locus.kind = {cfg.locus_kind}",
    ]
    return "\n".join(lines) + "\n"

