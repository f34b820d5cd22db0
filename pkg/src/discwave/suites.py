"""Self-checking oracle suites: L1-ball counting and the convex-sequence growth lemma.

Each suite returns a list of ``CaseResult`` rows; the CLI prints them as a table
and exits nonzero if any row failed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import SequenceWindow, convex_linear_bound, convex_nlogn_bound, nlogn_threshold
from .lattice import MAX_DIM, count_l1_ball, l1_ball_bound

PASS, FAIL, VACUOUS = "PASS", "FAIL", "VACUOUS"

DEFAULT_SEEDS = 1000
DEFAULT_MAX_R = 50
MAX_WINDOW = 10_000


@dataclass(frozen=True)
class CaseResult:
    suite: str
    case: str
    status: str
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == FAIL


# counting -----------------------------------------------------------------------


_CLOSED_FORMS = {
    1: ("2R+1", lambda R: 2 * R + 1),
    2: ("2R^2+2R+1", lambda R: 2 * R * R + 2 * R + 1),
}


def counting_suite(max_d: int = MAX_DIM, max_R: int = DEFAULT_MAX_R) -> list[CaseResult]:
    """count <= 2^(2d+1) R^d for 1 <= d <= max_d, 1 <= R <= max_R, plus closed forms."""
    if not 1 <= max_d <= MAX_DIM:
        raise ValueError(f"max_d must be in 1..{MAX_DIM}, got {max_d}")
    if max_R < 0:
        raise ValueError(f"max_R must be nonnegative, got {max_R}")
    if max_R == 0:
        return [CaseResult("counting", "all", VACUOUS, "max-R = 0: the bound needs R >= 1, nothing checked")]
    rows = []
    for d in range(1, max_d + 1):
        bad = []
        for R in range(1, max_R + 1):
            c, b = count_l1_ball(d, R), l1_ball_bound(d, R)
            if c > b:
                bad.append(f"R={R}: {c} > {b}")
        rows.append(CaseResult("counting", f"bound d={d} R=1..{max_R}", FAIL if bad else PASS,
                               "; ".join(bad[:3]) or f"{max_R} radii"))
        if d in _CLOSED_FORMS:
            name, form = _CLOSED_FORMS[d]
            bad = [f"R={R}: {count_l1_ball(d, R)} != {form(R)}"
                   for R in range(1, max_R + 1) if count_l1_ball(d, R) != form(R)]
            rows.append(CaseResult("counting", f"closed form {name} R=1..{max_R}", FAIL if bad else PASS,
                                   "; ".join(bad[:3]) or "exact match"))
    return rows


# convex sequences ---------------------------------------------------------------


@dataclass(frozen=True)
class ConvexSample:
    """A generated sequence and the constants its hypotheses were built with."""

    window: SequenceWindow
    I: float
    C: float
    Ntilde: int


def convex_sample(rng: np.random.Generator, max_len: int = MAX_WINDOW) -> ConvexSample:
    """Random sequence with U_N0 >= 0, first increment >= I, second differences >= 0
    everywhere and >= C/n from n = Ntilde on."""
    N0 = int(rng.integers(0, 16))
    I = float(rng.uniform(1e-3, 10.0))
    C = float(rng.uniform(1e-3, 10.0))
    Ntilde = N0 + 1 + int(rng.integers(0, 5))
    # half the windows are long enough to reach past the n log n threshold
    reach = nlogn_threshold(Ntilde) - N0 + 2
    lo = reach if rng.random() < 0.5 and reach < max_len else 2
    length = int(rng.integers(lo, max_len + 1))
    U0 = 0.0 if rng.random() < 0.2 else float(rng.exponential(10.0))
    first = I * (1.0 + (0.0 if rng.random() < 0.2 else float(rng.exponential(0.5))))

    ns = np.arange(N0, N0 + length)
    # d2[k] is the second difference centred at ns[k+1]
    d2 = rng.exponential(1.0, size=max(length - 2, 0)) * (rng.random(max(length - 2, 0)) < 0.5)
    d2 *= float(rng.choice([1e-3, 1.0, 1e2]))
    centres = ns[1:-1]
    d2 = np.where(centres >= Ntilde, np.maximum(d2, C / np.maximum(centres, 1)), d2)
    inc = first + np.concatenate(([0.0], np.cumsum(d2)))
    U = U0 + np.concatenate(([0.0], np.cumsum(inc)))[:length]
    return ConvexSample(SequenceWindow(N0, U), I, C, Ntilde)


def _extremal_cases() -> list[tuple[str, SequenceWindow, float, float | None, int]]:
    """(name, window, I, C, Ntilde); C is None when only the linear part applies."""
    out = []
    # equality in the linear bound: U_n = I (n - N0) with U_N0 = 0
    N0, I = 3, 0.75
    out.append(("linear equality", SequenceWindow(N0, I * np.arange(0, 200, dtype=float)), I, None, N0 + 1))
    # squares from n = 0: increment 1 at the start, second difference 2 >= 2/n for n >= 1
    out.append(("n^2 from 0", SequenceWindow(0, np.arange(0, 500, dtype=float) ** 2), 1.0, 2.0, 1))
    # slowest admissible growth for the n log n part: second difference exactly C/n
    N0, C, Nt = 1, 1.0, 2
    ns = np.arange(N0, N0 + 5000)
    d2 = np.where(ns[1:-1] >= Nt, C / ns[1:-1], 0.0)
    inc = 1e-9 + np.concatenate(([0.0], np.cumsum(d2)))
    U = np.concatenate(([0.0], np.cumsum(inc)))
    out.append(("minimal C/n growth", SequenceWindow(N0, U), 1e-9, C, Nt))
    return out


def fault_sequence(N0: int = 4, I: float = 1.0, length: int = 60) -> tuple[SequenceWindow, int]:
    """Linear sequence with U_{N0+5} pushed below I*5; returns (window, faulty index)."""
    U = I * np.arange(length, dtype=float)
    U[5] -= 0.5 * I
    return SequenceWindow(N0, U), N0 + 5


def nlogn_fault_sequence(C: float = 2.0, Ntilde: int = 2, length: int = 80) -> tuple[SequenceWindow, int]:
    """U_n = n^2 except one value past N dropped to zero; returns (window, faulty index)."""
    U = np.arange(length, dtype=float) ** 2
    bad = nlogn_threshold(Ntilde) + 5
    U[bad] = 0.0
    return SequenceWindow(0, U), bad


def convex_suite(seeds: int = DEFAULT_SEEDS, seed: int = 0) -> list[CaseResult]:
    rows = []
    rng = np.random.default_rng(seed)
    lin_bad, nlog_bad, hyp_bad, nlog_checked = [], [], [], 0
    for k in range(seeds):
        s = convex_sample(rng)
        lin = convex_linear_bound(s.window, s.I)
        nl = convex_nlogn_bound(s.window, s.C, s.Ntilde)
        if not (all(lin.hypotheses.values()) and all(nl.hypotheses.values())):
            hyp_bad.append(k)
        if lin.violated_at is not None:
            lin_bad.append((k, lin.violated_at))
        if nl.violated_at is not None:
            nlog_bad.append((k, nl.violated_at))
        nlog_checked += nl.checked > 0
    rows.append(CaseResult("convex", f"generator hypotheses ({seeds} samples)", FAIL if hyp_bad else PASS,
                           f"samples {hyp_bad[:5]}" if hyp_bad else "all hold"))
    rows.append(CaseResult("convex", f"linear growth ({seeds} samples)", FAIL if lin_bad else PASS,
                           f"(sample, n) {lin_bad[:5]}" if lin_bad else "0 violations"))
    rows.append(CaseResult("convex", f"n log n growth ({seeds} samples)", FAIL if nlog_bad else PASS,
                           f"(sample, n) {nlog_bad[:5]}" if nlog_bad else
                           f"0 violations, {nlog_checked} windows past N"))

    for name, w, I, C, Nt in _extremal_cases():
        reps = [convex_linear_bound(w, I)]
        if C is not None:
            reps.append(convex_nlogn_bound(w, C, Nt))
        bad = [r.bound_id + f"@{r.violated_at}" for r in reps if r.violated_at is not None]
        margins = ", ".join(f"{r.min_margin:.3g}" for r in reps)
        rows.append(CaseResult("convex", name, FAIL if bad else PASS, ", ".join(bad) or f"min margins {margins}"))

    w, at = fault_sequence()
    got = convex_linear_bound(w, 1.0).violated_at
    rows.append(CaseResult("convex", "injected fault (linear)", PASS if got == at else FAIL,
                           f"expected n={at}, reported {got}"))
    w, at = nlogn_fault_sequence()
    got = convex_nlogn_bound(w, 2.0, 2).violated_at
    rows.append(CaseResult("convex", "injected fault (n log n)", PASS if got == at else FAIL,
                           f"expected n={at}, reported {got}"))
    return rows


def format_table(rows: list[CaseResult]) -> str:
    w_suite = max([len(r.suite) for r in rows] + [5])
    w_case = max([len(r.case) for r in rows] + [4])
    lines = [f"{'suite':<{w_suite}}  {'case':<{w_case}}  status   detail"]
    for r in rows:
        lines.append(f"{r.suite:<{w_suite}}  {r.case:<{w_case}}  {r.status:<7}  {r.detail}")
    return "\n".join(lines)
