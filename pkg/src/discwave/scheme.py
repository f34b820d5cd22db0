"""Time stepping for the discretized damped wave equation and blow-up detection.

Two explicit three-level rules share one linear stencil

    u[n+1] = lam * nb(u[n]) + (2 - 2*d*lam) * u[n] - u[n-1] + source(u[n], n)

with ``lam = delta**2 / h**2`` and ``nb`` the nearest-neighbour sum.  The
tangent rule (the main evolution) uses

    source = delta**(2-p) * |u|**(p-1) * tan(delta * |u| / n**(p-1))

and blows up at step N_b when some |u| reaches (pi/2) * N0 * N_b**(p-1), the
pole of the tangent.  The power rule is the plain central-difference
discretization with source ``delta**2 * |u|**p / t_n**(p-1)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import MAX_DIM, LatticeField, read_snapshot, support_radius

DEFAULT_STEP_BUDGET = 1_000_000
MAX_BOX_SITES = 1 << 27


class ResourceLimitError(RuntimeError):
    """The lattice box needed for the next step exceeds the memory cap."""


@dataclass(frozen=True)
class SchemeParams:
    d: int
    p: float
    N0: int
    R: int = 0
    h: float | None = None
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        if not isinstance(self.d, int) or not 1 <= self.d <= MAX_DIM:
            raise ValueError(f"d must be an integer in 1..{MAX_DIM}, got {self.d!r}")
        if not (self.p > 1 and math.isfinite(self.p)):
            raise ValueError(f"p must be a finite real > 1, got {self.p!r}")
        if not isinstance(self.N0, int) or self.N0 < 1:
            raise ValueError(f"N0 must be a positive integer, got {self.N0!r}")
        if not isinstance(self.R, int) or self.R < 0:
            raise ValueError(f"R must be a nonnegative integer, got {self.R!r}")
        if self.h is not None and not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"h must be a positive real, got {self.h!r}")
        if not isinstance(self.step_budget, int) or self.step_budget < 1:
            raise ValueError(f"step_budget must be a positive integer, got {self.step_budget!r}")

    @property
    def delta(self) -> float:
        return 1.0 / self.N0

    @property
    def grid_spacing(self) -> float:
        return self.h if self.h is not None else self.delta * math.sqrt(self.d)

    @property
    def lam(self) -> float:
        """delta^2 / h^2; exactly 1/d for the default spacing h = delta*sqrt(d)."""
        if self.h is None:
            return 1.0 / self.d
        return self.delta**2 / self.h**2

    @property
    def center(self) -> float:
        return 2.0 - 2.0 * self.d * self.lam

    @property
    def cfl_exceeded(self) -> bool:
        return self.d * self.lam > 1.0

    @property
    def in_theorem_range(self) -> bool:
        # p <= 1 + 2/d written as d(p-1) <= 2, with room for decimal round-off
        return self.d * (self.p - 1.0) <= 2.0 * (1.0 + 1e-12)

    @property
    def N1(self) -> int:
        return max(self.N0, self.R)

    @property
    def N2(self) -> int:
        return max(2 * self.N0, self.R)

    @property
    def N3(self) -> int:
        # ceil(e^3) = 21
        return max(self.N2**3, 21)


def blowup_threshold(params: SchemeParams, n: int) -> float:
    """(pi/2) * delta**-1 * n**(p-1), with delta**-1 taken as the integer N0."""
    return (math.pi / 2.0) * params.N0 * float(n) ** (params.p - 1.0)


# initial data -----------------------------------------------------------------

SHAPE_KINDS = ("zero", "const_ball", "spike", "gaussian", "random", "file")


@dataclass(frozen=True)
class ShapeSpec:
    """Recipe for an initial profile sampled at x_i = h*i.

    ``radius`` defaults to the scheme's R.  ``sigma`` (gaussian width, in x units)
    defaults to half the ball radius in x units.  ``random`` draws uniform values in
    [0, amplitude) on the ball from the run seed.
    """

    kind: str = "zero"
    amplitude: float = 1.0
    radius: int | None = None
    sigma: float | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {SHAPE_KINDS}")
        if not math.isfinite(self.amplitude):
            raise ValueError(f"amplitude must be finite, got {self.amplitude!r}")
        if self.radius is not None and self.radius < 0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "file" and not self.path:
            raise ValueError("file shapes need a path")


def sample_shape(spec: ShapeSpec | LatticeField, params: SchemeParams, scale: float = 1.0,
                 seed: int = 0) -> LatticeField:
    if isinstance(spec, LatticeField):
        if spec.dim != params.d:
            raise ValueError(f"field has dimension {spec.dim}, scheme has {params.d}")
        out = spec.copy()
        out.values *= scale
        return out

    d = params.d
    radius = params.R if spec.radius is None else spec.radius
    amp = spec.amplitude * scale
    kind = spec.kind
    if kind == "zero":
        return LatticeField.zeros(d, 0)
    if kind == "spike":
        return LatticeField.from_sites(d, {(0,) * d: amp})
    if kind == "file":
        loaded = read_snapshot(spec.path)
        if loaded.dim != d:
            raise ValueError(f"{spec.path}: snapshot has dimension {loaded.dim}, scheme has {d}")
        loaded.values *= amp
        return loaded

    field_ = LatticeField.zeros(d, radius)
    coords = np.indices(field_.values.shape) + np.array(field_.box_lo).reshape((d,) + (1,) * d)
    norm1 = np.abs(coords).sum(axis=0)
    inside = norm1 <= radius
    if kind == "const_ball":
        field_.values[inside] = amp
    elif kind == "gaussian":
        h = params.grid_spacing
        sigma = spec.sigma if spec.sigma is not None else max(radius, 1) * h / 2.0
        r2 = ((coords * h) ** 2).sum(axis=0)
        field_.values[inside] = amp * np.exp(-r2[inside] / (2.0 * sigma**2))
    elif kind == "random":
        rng = np.random.default_rng(seed)
        draws = rng.random(int(inside.sum()))
        field_.values[inside] = amp * draws
    return field_


# state and verdicts -------------------------------------------------------------


class Status(str, enum.Enum):
    BLEW_UP = "BlewUp"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    NUMERIC_FAILURE = "NumericFailure"


@dataclass(frozen=True)
class BlowUpVerdict:
    status: Status
    n: int
    N_b: int | None = None
    i_b: tuple[int, ...] | None = None
    value: float | None = None
    overflow_flag: bool = False

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "n": self.n,
            "N_b": self.N_b,
            "i_b": list(self.i_b) if self.i_b is not None else None,
            "value": self.value,
            "overflow_flag": self.overflow_flag,
        }


@dataclass(frozen=True)
class SimState:
    """Two consecutive levels u[n-1] (``prev``) and u[n] (``curr``) on a shared box."""

    prev: LatticeField
    curr: LatticeField
    n: int
    params: SchemeParams
    prev_supp: int | None = field(default=None, compare=False)
    curr_supp: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < self.params.N0 + 1:
            raise ValueError(f"state index {self.n} precedes N0+1 = {self.params.N0 + 1}")
        if self.prev.values.shape != self.curr.values.shape or self.prev.box_lo != self.curr.box_lo:
            raise ValueError("prev and curr must share one box")


class SupportViolation(ValueError):
    def __init__(self, which: str, site: tuple[int, ...], R: int):
        super().__init__(f"initial data {which} is nonzero at {site}, outside ||i||_1 <= {R}")
        self.which = which
        self.site = site


def _first_outside(field_: LatticeField, R: int) -> tuple[int, ...] | None:
    for site, _ in field_.nonzero_sites():
        if sum(abs(c) for c in site) > R:
            return site
    return None


def init_state(params: SchemeParams, f, g, epsilon: float = 1.0, seed: int = 0) -> SimState:
    """Levels N0 and N0+1: u = eps*f and u = eps*f + delta*eps*g."""
    ff = sample_shape(f, params, epsilon, seed)
    gg = sample_shape(g, params, epsilon, seed + 1)
    for which, fld in (("f", ff), ("g", gg)):
        bad = _first_outside(fld, params.R)
        if bad is not None:
            raise SupportViolation(which, bad, params.R)
    half = params.R + 2
    prev = ff.embedded(half)
    gg = gg.embedded(half)
    curr = LatticeField(prev.values + params.delta * gg.values, prev.box_lo)
    return SimState(prev, curr, params.N0 + 1, params,
                    support_radius(prev), support_radius(curr))


# stepping ------------------------------------------------------------------------


def check_blowup(state: SimState) -> BlowUpVerdict | None:
    """BlewUp at the lexicographically first site with |u_n| >= threshold(n)."""
    return check_level(state.curr, state.n, state.params)


def check_level(fld: LatticeField, n: int, params: SchemeParams) -> BlowUpVerdict | None:
    thr = blowup_threshold(params, n)
    mask = np.abs(fld.values) >= thr
    if not mask.any():
        return None
    flat = int(np.argmax(mask.ravel()))
    return hit_verdict(fld, flat, n)


def hit_verdict(fld: LatticeField, flat: int, n: int) -> BlowUpVerdict:
    idx = np.unravel_index(flat, fld.values.shape)
    site = tuple(int(k) + lo for k, lo in zip(idx, fld.box_lo))
    value = float(fld.values[idx])
    return BlowUpVerdict(Status.BLEW_UP, n=n, N_b=n, i_b=site, value=value,
                         overflow_flag=not math.isfinite(value))


@dataclass
class StepStats:
    total: float
    abs_total: float
    source_total: float
    max_abs: float
    supp: int | None
    hit: int
    nonfinite: bool


def _source_coefficients(params: SchemeParams, n: int, mode: int) -> tuple[float, float, float]:
    p, delta = params.p, params.delta
    if mode == _kernels.TAN:
        return delta ** (2.0 - p), delta / float(n) ** (p - 1.0), p - 1.0
    t_n = n * delta
    return delta**2 / t_n ** (p - 1.0), 0.0, p


def needed_radius(prev_supp: int | None, curr_supp: int | None) -> int | None:
    cand = []
    if curr_supp is not None:
        cand.append(curr_supp + 1)
    if prev_supp is not None:
        cand.append(prev_supp)
    return max(cand) if cand else None


def _half_width(fld: LatticeField) -> int:
    return -fld.box_lo[0]


def grow_box(prev: LatticeField, curr: LatticeField, r: int) -> tuple[LatticeField, LatticeField]:
    """prev/curr re-embedded so that a ball of radius r plus halo fits."""
    half = _half_width(curr)
    if r + 1 <= half:
        return prev, curr
    new_half = r + 1 + max(4, (r + 1) // 2)
    if (2 * new_half + 1) ** curr.dim > MAX_BOX_SITES:
        raise ResourceLimitError(
            f"box of half-width {new_half} in d={curr.dim} exceeds {MAX_BOX_SITES} sites")
    return prev.embedded(new_half), curr.embedded(new_half)


def advance_level(prev: LatticeField, curr: LatticeField, out: np.ndarray, n: int,
             params: SchemeParams, r: int | None, mode: int, out_supp: int | None) -> StepStats:
    """Fill ``out`` with level n+1.  ``out_supp`` is the support radius of stale data in out."""
    if r is None:
        if out_supp is not None:
            out.fill(0.0)
        return StepStats(0.0, 0.0, 0.0, 0.0, None, -1, False)
    if out_supp is not None and out_supp > r:
        out.fill(0.0)
    coef, scale, q = _source_coefficients(params, n, mode)
    thr = blowup_threshold(params, n + 1) if mode == _kernels.TAN else math.inf
    half = _half_width(curr)
    origin = [0] * (4 - params.d) + [half] * params.d
    res = _kernels.advance(
        _kernels.as4d(prev.values), _kernels.as4d(curr.values), _kernels.as4d(out),
        origin[0], origin[1], origin[2], origin[3], params.d, r,
        params.lam, params.center, mode, coef, scale, q, thr)
    total, abs_total, src_total, peak, supp, hit, nonfinite = res
    return StepStats(total, abs_total, src_total, peak, None if supp < 0 else int(supp),
                     int(hit), bool(nonfinite))


def _step(state: SimState, mode: int) -> tuple[SimState, StepStats]:
    params = state.params
    r = needed_radius(state.prev_supp, state.curr_supp)
    prev, curr = grow_box(state.prev, state.curr, r) if r is not None else (state.prev, state.curr)
    out = np.zeros_like(curr.values)
    stats = advance_level(prev, curr, out, state.n, params, r, mode, None)
    new = LatticeField(out, curr.box_lo)
    return SimState(curr, new, state.n + 1, params, state.curr_supp, stats.supp), stats


def step_tan(state: SimState) -> SimState | BlowUpVerdict:
    """Advance one level with the tangent rule.

    The current level is checked against the blow-up threshold first so the
    tangent is only evaluated strictly below its pole.
    """
    verdict = check_blowup(state)
    if verdict is not None:
        return verdict
    new, stats = _step(state, _kernels.TAN)
    if stats.nonfinite:
        return BlowUpVerdict(Status.NUMERIC_FAILURE, n=new.n, overflow_flag=True)
    return new


def step_power(state: SimState) -> SimState | BlowUpVerdict:
    """Advance one level with the plain central-difference rule."""
    new, stats = _step(state, _kernels.POWER)
    if stats.nonfinite:
        return BlowUpVerdict(Status.NUMERIC_FAILURE, n=new.n, overflow_flag=True)
    return new


def critical_exponents(d: int) -> dict:
    """Fujita and shifted Strauss exponents; reported as metadata only."""
    fujita = 1.0 + 2.0 / d
    k = d + 2
    strauss = ((k + 1) + math.sqrt((k + 1) ** 2 + 8 * (k - 1))) / (2 * (k - 1))
    return {"p_F(d)": fujita, "p_S(d+2)": strauss, "p_c(d)": max(fujita, strauss)}
