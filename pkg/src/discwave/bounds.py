"""Growth-bound oracles for convex sequences and the monitors run on traces.

Every monitor compares a left side against a right side on an index range and
records the first index where the left side falls short (beyond a small
floating tolerance) and the smallest margin seen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import LatticeField
from .observables import ProofConstants, Trace, lattice_sum
from .scheme import SchemeParams

REL_TOL = 1e-10


@dataclass(frozen=True)
class SequenceWindow:
    start: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a sequence window needs at least two values")
        object.__setattr__(self, "values", vals)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.values.size)

    @property
    def end(self) -> int:
        return self.start + self.values.size - 1


@dataclass
class MonitorReport:
    bound_id: str
    lo: int | None
    hi: int | None
    violated_at: int | None = None
    min_margin: float | None = None
    checked: int = 0
    kind: str = "lower"
    note: str = ""
    hypotheses: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.checked == 0

    @property
    def ok(self) -> bool:
        # a ceiling breach corroborates blow-up rather than signalling an error
        return self.violated_at is None or self.kind == "ceiling"

    def to_json(self) -> dict:
        out = {
            "bound_id": self.bound_id,
            "range": [self.lo, self.hi] if self.checked else None,
            "violated_at": self.violated_at,
            "min_margin": self.min_margin,
            "checked": self.checked,
            "kind": self.kind,
        }
        if self.note:
            out["note"] = self.note
        if self.hypotheses:
            out["hypotheses"] = self.hypotheses
        return out


def _compare(bound_id: str, ns: np.ndarray, lhs: np.ndarray, rhs: np.ndarray,
             slack: np.ndarray | float | None = None, kind: str = "lower", note: str = "") -> MonitorReport:
    """Check lhs >= rhs - slack element-wise over the index array ``ns``."""
    ns = np.asarray(ns)
    if ns.size == 0:
        return MonitorReport(bound_id, None, None, kind=kind, note=note or "empty range")
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if slack is None:
        slack = REL_TOL * np.maximum(np.abs(lhs), np.abs(rhs))
    margin = lhs - rhs
    bad = ~(margin >= -slack)
    violated = int(ns[np.argmax(bad)]) if bad.any() else None
    return MonitorReport(bound_id, int(ns[0]), int(ns[-1]), violated, float(np.min(margin)),
                         int(ns.size), kind, note)


# convex-sequence growth ------------------------------------------------------------


def _convex_hypotheses(w: SequenceWindow, I: float) -> dict:
    U = w.values
    d2 = U[2:] - 2.0 * U[1:-1] + U[:-2]
    tol = REL_TOL * np.maximum(1.0, np.abs(U[1:-1]))
    return {
        "convex": bool(np.all(d2 >= -tol)),
        "first_increment_ge_I": bool(U[1] - U[0] >= I * (1.0 - REL_TOL)),
        "start_nonnegative": bool(U[0] >= 0.0),
    }


def convex_linear_bound(w: SequenceWindow, I: float) -> MonitorReport:
    """U_n - U_{n-1} > 0 and U_n >= I (n - N0) for n > N0."""
    if not I > 0:
        raise ValueError(f"I must be positive, got {I}")
    ns = w.indices[1:]
    U = w.values[1:]
    lin = _compare("convex-linear", ns, U, I * (ns - w.start))
    inc = w.values[1:] - w.values[:-1]
    nonpos = np.nonzero(~(inc > 0.0))[0]
    if nonpos.size:
        first = int(ns[nonpos[0]])
        if lin.violated_at is None or first < lin.violated_at:
            lin.violated_at = first
    lin.hypotheses = _convex_hypotheses(w, I)
    return lin


def nlogn_threshold(Ntilde: int) -> int:
    """max{Ntilde**3, e**3} with e**3 rounded up to 21."""
    return max(Ntilde**3, 21)


def convex_nlogn_bound(w: SequenceWindow, C: float, Ntilde: int) -> MonitorReport:
    """U_n >= (C/3) n log n for n > max{Ntilde**3, 21}."""
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    N = nlogn_threshold(Ntilde)
    ns = w.indices
    sel = ns > N
    rep = _compare("convex-nlogn", ns[sel], w.values[sel], C / 3.0 * ns[sel] * np.log(ns[sel]))
    U = w.values
    n_mid = ns[1:-1]
    d2 = U[2:] - 2.0 * U[1:-1] + U[:-2]
    need = n_mid >= Ntilde
    tol = REL_TOL * np.maximum(1.0, np.abs(U[1:-1][need]))
    rep.hypotheses = {
        "second_difference_ge_C_over_n": bool(np.all(d2[need] >= C / n_mid[need] - tol)),
        "convex": bool(np.all(d2 >= -REL_TOL * np.maximum(1.0, np.abs(U[1:-1])))),
    }
    if not rep.checked:
        rep.note = f"window ends at {w.end} <= N = {N}"
    return rep


# hypotheses of the blow-up theorem -------------------------------------------------


@dataclass
class HypothesisReport:
    support_ok: bool
    offending_site: tuple[int, ...] | None
    U_N0: float
    sum_nonnegative: bool
    U_N0_zero: bool
    I: float
    increment_positive: bool
    p_in_range: bool

    @property
    def applicable(self) -> bool:
        return self.support_ok and self.sum_nonnegative and self.increment_positive and self.p_in_range

    def reasons(self) -> list[str]:
        out = []
        if not self.support_ok:
            out.append(f"support violation at {self.offending_site}")
        if not self.sum_nonnegative:
            out.append(f"initial lattice sum {self.U_N0} is negative")
        if not self.increment_positive:
            out.append(f"increment I={self.I} is not positive")
        if not self.p_in_range:
            out.append("p exceeds 1 + 2/d")
        return out

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "verdict": "blow-up theorem applicable" if self.applicable else "blow-up theorem not applicable",
            "reasons": self.reasons(),
            "support_ok": self.support_ok,
            "offending_site": list(self.offending_site) if self.offending_site else None,
            "U_N0": self.U_N0,
            "sum_nonnegative": self.sum_nonnegative,
            "U_N0_zero": self.U_N0_zero,
            "I": self.I,
            "increment_positive": self.increment_positive,
            "p_in_range": self.p_in_range,
        }


def check_hypotheses(params: SchemeParams, level0: LatticeField, level1: LatticeField) -> HypothesisReport:
    """Check support, nonnegative initial sum and positive increment on levels N0, N0+1."""
    offending = None
    for fld in (level0, level1):
        for site, _ in fld.nonzero_sites():
            if sum(abs(c) for c in site) > params.R:
                offending = site
                break
        if offending is not None:
            break
    U0 = lattice_sum(level0)
    I = lattice_sum(level1) - U0
    return HypothesisReport(
        support_ok=offending is None,
        offending_site=offending,
        U_N0=U0,
        sum_nonnegative=U0 >= 0.0,
        U_N0_zero=U0 == 0.0,
        I=I,
        increment_positive=I > 0.0,
        p_in_range=params.in_theorem_range,
    )


# trace monitors --------------------------------------------------------------------


def _levels(trace: Trace, lo_excl: int, hi_incl: int) -> np.ndarray:
    lo = max(lo_excl + 1, trace.first)
    hi = min(hi_incl, trace.last)
    return np.arange(lo, hi + 1) if hi >= lo else np.arange(0)


def identity_monitors(params: SchemeParams, trace: Trace) -> list[MonitorReport]:
    """Checks that hold for every run regardless of the theorem's hypotheses."""
    reports = []
    # a non-finite final level is excluded from every check
    last = trace.last - 1 if trace.verdict == "NumericFailure" else trace.last
    N0 = params.N0
    ns = _levels(trace, N0, last - 1)
    k = ns - trace.first
    U = trace.U
    reports.append(_compare("convexity", ns, trace.d2U[k], np.zeros(k.size), slack=1e-12 * np.abs(U[k]),
                            note="U_{n+1} - 2U_n + U_{n-1} >= 0"))
    # the Laplacian telescopes out of the lattice sum, leaving the source sum
    slack = 1e-10 * (trace.abs_sum[k + 1] + 2.0 * trace.abs_sum[k] + trace.abs_sum[k - 1])
    gap = -np.abs(trace.d2U[k] - trace.source_sum[k])
    reports.append(_compare("telescoping", ns, gap, np.zeros(k.size), slack=slack,
                            note="second difference of U equals the lattice sum of the source"))
    nsall = _levels(trace, N0 - 1, last)
    kall = nsall - trace.first
    supp = trace.supp[kall].astype(np.float64)
    supp[trace.supp[kall] < 0] = -1.0
    reports.append(_compare("finite-propagation", nsall, (params.R + nsall - N0).astype(np.float64), supp,
                            slack=0.0, note="support radius <= R + (n - N0)"))
    return reports


def growth_monitors(params: SchemeParams, trace: Trace, constants: ProofConstants) -> list[MonitorReport]:
    """Lower bounds of the argument, each on its own range, stopping before the verdict level."""
    N0, N1, N2, N3, p, d = params.N0, constants.N1, constants.N2, constants.N3, params.p, params.d
    I, C1, C2, C = constants.I, constants.C1, constants.C2, constants.C
    last = trace.last
    hi = last - 1 if trace.verdict is not None else last
    U = trace.U
    reports = []

    def col(ns, arr):
        return arr[ns - trace.first]

    ns = _levels(trace, N0, hi)
    reports.append(_compare("linear-growth", ns, col(ns, U), I * (ns - N0), note="U_n >= I (n - N0)"))

    ns = _levels(trace, 2 * N0, hi)
    reports.append(_compare("half-slope-growth", ns, col(ns, U), I / 2.0 * ns, note="U_n >= (I/2) n"))

    ns = _levels(trace, N1, min(hi, last - 1))
    Un = col(ns, U)
    reports.append(_compare("second-difference", ns, col(ns, trace.d2U), C1 * ns ** (-(p + 1.0)) * np.abs(Un) ** p,
                            note="U_{n+1} - 2U_n + U_{n-1} >= C1 n^-(p+1) U_n^p"))

    ns = _levels(trace, N3, hi)
    reports.append(_compare("nlogn-growth", ns, col(ns, U), C2 / 3.0 * ns * np.log(ns), note="U_n >= (C2/3) n log n"))

    ns = _levels(trace, N2, min(hi, last - 1))
    Un = col(ns, U)
    lhs = (col(ns + 1, U) - Un) ** 2
    reports.append(_compare("increment-energy", ns, lhs, C / (p + 1.0) * (Un / ns) ** (p + 1.0),
                            note="(U_{n+1} - U_n)^2 >= C/(p+1) (U_n/n)^(p+1)"))

    ns = _levels(trace, N2, min(hi, last - 1))
    E0 = col(ns, trace.E)
    E1 = col(ns + 1, trace.E)
    reports.append(_compare("energy-monotone", ns, E1, E0, slack=1e-12 * np.maximum(1.0, np.abs(E0)),
                            note="E_{n+1} >= E_n"))

    N4 = constants.N4
    if N4 is not None and trace.covers(N4):
        start = max(N3, N4)
        ns = _levels(trace, start, hi)
        coef = trace.U_at(N4) / (N4 + p + d - 1.0) ** (p + d)
        reports.append(_compare("final-polynomial", ns, col(ns, U), coef * ns.astype(np.float64) ** (p + d),
                                note="U_n >= U_{N4}/(N4+p+d-1)^(p+d) n^(p+d)"))
    else:
        reports.append(MonitorReport("final-polynomial", None, None,
                                     note="N4 not reached" if N4 is not None else "N4 beyond 2^62"))

    ns = _levels(trace, N1 - 1, hi)
    ceiling = (math.pi / 2.0) * N0 * 2.0 ** (3 * d + 1) * ns.astype(np.float64) ** (p + d - 1.0)
    reports.append(_compare("growth-ceiling", ns, ceiling, col(ns, U), kind="ceiling",
                            note="U_n <= (pi/2) delta^-1 2^(3d+1) n^(p+d-1); a breach corroborates blow-up"))
    return reports


# lifespan --------------------------------------------------------------------------


@dataclass(frozen=True)
class LifespanFit:
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


def lifespan_fit(runs: Sequence[tuple[float, int | None]]) -> LifespanFit:
    """Least-squares line through (log eps, log N_b); ``residual`` is the RMS misfit."""
    runs = list(runs)
    if len(runs) < 3:
        raise ValueError(f"lifespan fit needs at least 3 runs, got {len(runs)}")
    failed = [eps for eps, nb in runs if nb is None]
    if failed:
        raise ValueError(f"runs without blow-up for epsilon {failed}")
    eps = np.array([e for e, _ in runs], dtype=np.float64)
    if np.any(eps <= 0):
        raise ValueError("epsilons must be positive")
    if np.log10(eps.max() / eps.min()) < 2.0 - 1e-12:
        raise ValueError("epsilons must span at least two decades")
    x = np.log(eps)
    y = np.log(np.array([nb for _, nb in runs], dtype=np.float64))
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return LifespanFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))
