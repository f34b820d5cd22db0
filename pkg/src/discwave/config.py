"""Run configuration files.

A config is a flat, sectioned key = value text file::

    [scheme]
    d = 1
    p = 2.0
    N0 = 2
    R = 1
    h = 0.5            ; optional, defaults to delta * sqrt(d)
    step_budget = 1000000

    [f]
    kind = zero

    [g]
    kind = const_ball
    amplitude = 1.0

    [run]
    epsilon = 1.0
    monitors = true
    output_dir = out
    seed = 0
    plot = true

Reals are decimal literals parsed as float64.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .scheme import DEFAULT_STEP_BUDGET, SHAPE_KINDS, SchemeParams, ShapeSpec


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry as section.key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    params: SchemeParams
    f: ShapeSpec = field(default_factory=ShapeSpec)
    g: ShapeSpec = field(default_factory=ShapeSpec)
    epsilon: float = 1.0
    monitors: bool = True
    output_dir: str = "out"
    seed: int = 0
    plot: bool = True

    def with_value(self, axis: str, value) -> "RunConfig":
        """Copy with one sweep axis (p, epsilon, N0, h, R) replaced."""
        if axis == "epsilon":
            return replace(self, epsilon=float(value))
        if axis == "p":
            return replace(self, params=replace(self.params, p=float(value)))
        if axis == "h":
            return replace(self, params=replace(self.params, h=float(value)))
        if axis in ("N0", "R"):
            v = int(value)
            if v != value:
                raise ConfigError(f"scheme.{axis}", f"expected an integer, got {value!r}")
            return replace(self, params=replace(self.params, **{axis: v}))
        raise ConfigError("sweep.axis", f"unknown axis {axis!r}")


_SCHEME_KEYS = {"d", "p", "N0", "R", "h", "step_budget"}
_SHAPE_KEYS = {"kind", "amplitude", "radius", "sigma", "path"}
_RUN_KEYS = {"epsilon", "monitors", "output_dir", "seed", "plot"}


def _get(section, name: str, key: str, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{name}.{key}", "missing required key")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}.{key}", f"cannot parse {raw!r} ({exc})") from None


def _int(raw: str) -> int:
    return int(raw, 10)


def _real(raw: str) -> float:
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _check_keys(section, name: str, allowed: set[str]) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown key")


def _shape(cp, name: str, base_dir: Path | None) -> ShapeSpec:
    if not cp.has_section(name):
        return ShapeSpec()
    sec = cp[name]
    _check_keys(sec, name, _SHAPE_KEYS)
    kind = _get(sec, name, "kind", str, "zero")
    if kind not in SHAPE_KINDS:
        raise ConfigError(f"{name}.kind", f"unknown kind {kind!r}; expected one of {', '.join(SHAPE_KINDS)}")
    path = _get(sec, name, "path", str)
    if path and base_dir is not None and not Path(path).is_absolute():
        path = str(base_dir / path)
    kwargs = dict(kind=kind, amplitude=_get(sec, name, "amplitude", _real, 1.0),
                  radius=_get(sec, name, "radius", _int), sigma=_get(sec, name, "sigma", _real), path=path)
    try:
        return ShapeSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


def parse_config(text: str, base_dir: str | Path | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (N0 vs n0)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    for name in cp.sections():
        if name not in ("scheme", "f", "g", "run"):
            raise ConfigError(name, "unknown section")
    if not cp.has_section("scheme"):
        raise ConfigError("scheme", "missing section")
    sec = cp["scheme"]
    _check_keys(sec, "scheme", _SCHEME_KEYS)
    d = _get(sec, "scheme", "d", _int, required=True)
    p = _get(sec, "scheme", "p", _real, required=True)
    N0 = _get(sec, "scheme", "N0", _int, required=True)
    R = _get(sec, "scheme", "R", _int, 0)
    h = _get(sec, "scheme", "h", _real)
    budget = _get(sec, "scheme", "step_budget", _int, DEFAULT_STEP_BUDGET)
    checks = [
        ("d", 1 <= d <= 4, "must be an integer in 1..4"),
        ("p", p > 1, "must exceed 1"),
        ("N0", N0 >= 1, "must be a positive integer"),
        ("R", R >= 0, "must be nonnegative"),
        ("h", h is None or h > 0, "must be positive"),
        ("step_budget", budget >= 1, "must be positive"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"scheme.{key}", f"{msg} (got {sec[key].strip()})")
    params = SchemeParams(d=d, p=p, N0=N0, R=R, h=h, step_budget=budget)

    base = Path(base_dir) if base_dir is not None else None
    f = _shape(cp, "f", base)
    g = _shape(cp, "g", base)

    run = cp["run"] if cp.has_section("run") else {}
    if cp.has_section("run"):
        _check_keys(run, "run", _RUN_KEYS)
    return RunConfig(
        params=params, f=f, g=g,
        epsilon=_get(run, "run", "epsilon", _real, 1.0),
        monitors=_get(run, "run", "monitors", _bool, True),
        output_dir=_get(run, "run", "output_dir", str, "out"),
        seed=_get(run, "run", "seed", _int, 0),
        plot=_get(run, "run", "plot", _bool, True),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)


def _shape_lines(name: str, s: ShapeSpec) -> list[str]:
    lines = [f"[{name}]", f"kind = {s.kind}", f"amplitude = {s.amplitude!r}"]
    if s.radius is not None:
        lines.append(f"radius = {s.radius}")
    if s.sigma is not None:
        lines.append(f"sigma = {s.sigma!r}")
    if s.path is not None:
        lines.append(f"path = {s.path}")
    return lines


def render_config(cfg: RunConfig) -> str:
    p = cfg.params
    lines = ["[scheme]", f"d = {p.d}", f"p = {p.p!r}", f"N0 = {p.N0}", f"R = {p.R}"]
    if p.h is not None:
        lines.append(f"h = {p.h!r}")
    lines.append(f"step_budget = {p.step_budget}")
    lines.append("")
    lines += _shape_lines("f", cfg.f) + [""] + _shape_lines("g", cfg.g) + [""]
    lines += [
        "[run]",
        f"epsilon = {cfg.epsilon!r}",
        f"monitors = {'true' if cfg.monitors else 'false'}",
        f"output_dir = {cfg.output_dir}",
        f"seed = {cfg.seed}",
        f"plot = {'true' if cfg.plot else 'false'}",
    ]
    return "\n".join(lines) + "\n"
