"""Run loop: threshold check, observables, tangent step, until a verdict."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .bounds import HypothesisReport, MonitorReport, check_hypotheses, growth_monitors, identity_monitors
from .lattice import LatticeField
from .observables import ConstantsUnavailable, ProofConstants, Trace, compute_constants, lattice_sum
from .scheme import (
    BlowUpVerdict,
    SchemeParams,
    Status,
    advance_level,
    blowup_threshold,
    check_level,
    critical_exponents,
    grow_box,
    hit_verdict,
    init_state,
    needed_radius,
)

log = logging.getLogger(__name__)


@dataclass
class RunReport:
    verdict: BlowUpVerdict
    hypotheses: HypothesisReport
    params: SchemeParams
    epsilon: float
    steps: int
    constants: ProofConstants | None = None
    constants_note: str = ""
    monitors: list[MonitorReport] = field(default_factory=list)

    @property
    def monitor_failures(self) -> list[MonitorReport]:
        return [m for m in self.monitors if not m.ok]

    def to_dict(self) -> dict:
        p = self.params
        warnings = []
        if not p.in_theorem_range:
            warnings.append("p > 1 + 2/d: outside the range covered by the blow-up theorem")
        if p.cfl_exceeded:
            warnings.append("d*delta^2/h^2 > 1: centre coefficient is negative")
        if not self.hypotheses.applicable:
            warnings.append("blow-up theorem not applicable: " + "; ".join(self.hypotheses.reasons()))
        if self.hypotheses.U_N0_zero:
            warnings.append("initial lattice sum is exactly zero (boundary case)")
        return {
            "verdict": self.verdict.to_dict(),
            "steps": self.steps,
            "epsilon": self.epsilon,
            "params": {**asdict(p), "delta": p.delta, "h_effective": p.grid_spacing,
                       "lam": p.lam, "center": p.center},
            "hypotheses": self.hypotheses.to_dict(),
            "constants": self.constants.to_dict() if self.constants else None,
            "constants_note": self.constants_note,
            "monitors": [m.to_json() for m in self.monitors],
            "monitor_failures": [m.bound_id for m in self.monitor_failures],
            "critical_exponents": critical_exponents(p.d),
            "warnings": warnings,
        }


class _Recorder:
    def __init__(self, params: SchemeParams):
        self.params = params
        self.n: list[int] = []
        self.U: list[float] = []
        self.max_abs: list[float] = []
        self.supp: list[int] = []
        self.src: list[float] = []
        self.abs_sum: list[float] = []

    def add(self, n, U, max_abs, supp, abs_sum):
        self.n.append(n)
        self.U.append(U)
        self.max_abs.append(max_abs)
        self.supp.append(-1 if supp is None else supp)
        self.abs_sum.append(abs_sum)
        self.src.append(np.nan)

    def add_field(self, n, fld: LatticeField, supp):
        a = np.abs(fld.values)
        self.add(n, lattice_sum(fld), float(a.max()), supp, float(_kernels.ordered_sum(a.ravel())))

    def trace(self) -> Trace:
        p = self.params
        ns = np.asarray(self.n, dtype=np.int64)
        t = ns * p.delta
        thr = [blowup_threshold(p, int(k)) for k in ns]
        return Trace(ns, t, self.U, self.max_abs, thr, self.supp, self.src, self.abs_sum)


def run(params: SchemeParams, f, g, monitors: bool = True, epsilon: float = 1.0,
        seed: int = 0) -> tuple[Trace, RunReport]:
    """Evolve with the tangent rule until blow-up, numeric failure or the step budget."""
    state = init_state(params, f, g, epsilon, seed)
    hyp = check_hypotheses(params, state.prev, state.curr)
    if not hyp.applicable:
        log.info("blow-up theorem not applicable: %s", "; ".join(hyp.reasons()))

    rec = _Recorder(params)
    N0 = params.N0
    rec.add_field(N0, state.prev, state.prev_supp)
    rec.add_field(N0 + 1, state.curr, state.curr_supp)

    verdict = check_level(state.prev, N0, params) or check_level(state.curr, N0 + 1, params)
    if verdict is not None and verdict.n == N0:
        # level N0+1 is part of the initial data but lies past the verdict
        for col in (rec.n, rec.U, rec.max_abs, rec.supp, rec.src, rec.abs_sum):
            col.pop()

    prev, curr = state.prev, state.curr
    out = np.zeros_like(curr.values)
    prev_supp, curr_supp, out_supp = state.prev_supp, state.curr_supp, None
    n = N0 + 1
    steps = 0
    while verdict is None and steps < params.step_budget:
        r = needed_radius(prev_supp, curr_supp)
        if r is not None and r + 1 > -curr.box_lo[0]:
            prev, curr = grow_box(prev, curr, r)
            out = np.zeros_like(curr.values)
            out_supp = None
        stats = advance_level(prev, curr, out, n, params, r, _kernels.TAN, out_supp)
        rec.src[-1] = stats.source_total
        n += 1
        steps += 1
        new = LatticeField(out, curr.box_lo)
        out, out_supp = prev.values, prev_supp
        prev, curr = curr, new
        prev_supp, curr_supp = curr_supp, stats.supp
        rec.add(n, stats.total, stats.max_abs, stats.supp, stats.abs_total)
        if stats.nonfinite:
            verdict = BlowUpVerdict(Status.NUMERIC_FAILURE, n=n, overflow_flag=True)
        elif stats.hit >= 0:
            verdict = hit_verdict(curr, stats.hit, n)
    if verdict is None:
        verdict = BlowUpVerdict(Status.BUDGET_EXHAUSTED, n=n)

    trace = rec.trace()
    if verdict.status is not Status.BUDGET_EXHAUSTED:
        trace.verdict = verdict.status.value
    report = RunReport(verdict, hyp, params, epsilon, steps)
    if monitors:
        _attach_monitors(params, trace, report)
    log.info("run finished: %s at n=%d after %d steps", verdict.status.value, verdict.n, steps)
    return trace, report


def _attach_monitors(params: SchemeParams, trace: Trace, report: RunReport) -> None:
    report.monitors.extend(identity_monitors(params, trace))
    if not report.hypotheses.applicable:
        report.constants_note = "hypotheses not satisfied; growth monitors disabled"
        return
    try:
        consts = compute_constants(params, trace)
    except ConstantsUnavailable as exc:
        report.constants_note = f"constants unavailable: {exc}; growth monitors disabled"
        return
    report.constants = consts
    trace.fill_energy(consts.C, params.p, consts.N2)
    report.monitors.extend(growth_monitors(params, trace, consts))
