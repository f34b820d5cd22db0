"""Aggregate quantities along a run: lattice sums, the energy functional and
the constants and index thresholds of the blow-up argument."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels
from .lattice import LatticeField
from .scheme import SchemeParams

TRACE_COLUMNS = ("n", "t_n", "U", "dU", "d2U", "maxAbs", "threshold", "E", "supp")


def lattice_sum(field: LatticeField, compensated: bool = False) -> float:
    """Sum of all site values.

    The default sums sequentially in lexicographic site order, which is the
    order the stepping kernel uses, so results agree bit for bit.  With
    ``compensated`` the correctly rounded sum is returned instead.
    """
    flat = field.values.ravel()
    if compensated:
        return math.fsum(flat.tolist())
    return float(_kernels.ordered_sum(flat))


def energy(n: int, U_prev: float, U: float, C: float, p: float) -> float:
    """E_n = (U_n - U_{n-1})**2 - C/(p+1) * (U_{n-1}/(n-1))**(p+1)."""
    if n < 2:
        raise ValueError(f"energy needs n >= 2, got {n}")
    return (U - U_prev) ** 2 - C / (p + 1.0) * (U_prev / (n - 1)) ** (p + 1.0)


@dataclass(frozen=True)
class TraceRecord:
    n: int
    t_n: float
    U: float
    dU: float | None
    d2U: float | None
    maxAbs: float
    threshold: float
    E: float | None
    supp: int | None


class Trace:
    """Per-level observables stored column-wise.

    Missing values (dU at the first level, d2U at the last, E before N2+1) are NaN
    in the float columns; an empty support is -1 in ``supp``.  ``source_sum`` and
    ``abs_sum`` hold the lattice sums of the nonlinear source applied at level n
    and of |u_n|; they feed the identity monitors and are not written to CSV.
    """

    def __init__(self, n, t_n, U, max_abs, threshold, supp, source_sum=None, abs_sum=None):
        self.n = np.asarray(n, dtype=np.int64)
        self.t_n = np.asarray(t_n, dtype=np.float64)
        self.U = np.asarray(U, dtype=np.float64)
        self.max_abs = np.asarray(max_abs, dtype=np.float64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.supp = np.asarray(supp, dtype=np.int64)
        k = len(self.n)
        self.source_sum = np.full(k, np.nan) if source_sum is None else np.asarray(source_sum, dtype=np.float64)
        self.abs_sum = np.full(k, np.nan) if abs_sum is None else np.asarray(abs_sum, dtype=np.float64)
        self.dU = np.full(k, np.nan)
        self.d2U = np.full(k, np.nan)
        if k >= 2:
            self.dU[1:] = self.U[1:] - self.U[:-1]
        if k >= 3:
            self.d2U[1:-1] = (self.U[2:] - self.U[1:-1]) - (self.U[1:-1] - self.U[:-2])
        self.E = np.full(k, np.nan)
        # status of the final level: "BlewUp", "NumericFailure" or None
        self.verdict: str | None = None

    @property
    def first(self) -> int:
        return int(self.n[0])

    @property
    def last(self) -> int:
        return int(self.n[-1])

    def __len__(self) -> int:
        return len(self.n)

    def pos(self, n: int) -> int:
        """Row of level n."""
        k = n - self.first
        if not 0 <= k < len(self):
            raise IndexError(f"level {n} outside trace [{self.first}, {self.last}]")
        return k

    def U_at(self, n: int) -> float:
        return float(self.U[self.pos(n)])

    def covers(self, n: int) -> bool:
        return self.first <= n <= self.last

    def __getitem__(self, k: int) -> TraceRecord:
        def opt(x):
            return None if math.isnan(x) else float(x)

        s = int(self.supp[k])
        return TraceRecord(int(self.n[k]), float(self.t_n[k]), float(self.U[k]), opt(self.dU[k]),
                           opt(self.d2U[k]), float(self.max_abs[k]), float(self.threshold[k]),
                           opt(self.E[k]), None if s < 0 else s)

    def __iter__(self) -> Iterator[TraceRecord]:
        for k in range(len(self)):
            yield self[k]

    def fill_energy(self, C: float, p: float, N2: int) -> None:
        """E_n for every recorded n > N2."""
        self.E[:] = np.nan
        for k in range(1, len(self)):
            n = int(self.n[k])
            if n > N2:
                self.E[k] = energy(n, self.U[k - 1], self.U[k], C, p)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for rec in self:
                row = asdict(rec)
                w.writerow(["" if row[c] is None else repr(row[c]) for c in TRACE_COLUMNS])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trace":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
                raise ValueError(f"{path}: unexpected trace header {reader.fieldnames}")
            rows = list(reader)
        col = {c: [r[c] for r in rows] for c in TRACE_COLUMNS}
        tr = cls([int(x) for x in col["n"]], [float(x) for x in col["t_n"]],
                 [float(x) for x in col["U"]], [float(x) for x in col["maxAbs"]],
                 [float(x) for x in col["threshold"]],
                 [int(x) if x else -1 for x in col["supp"]])
        tr.E[:] = [float(x) if x else np.nan for x in col["E"]]
        if len(tr):
            if not np.isfinite(tr.max_abs[-1]):
                tr.verdict = "NumericFailure"
            elif tr.max_abs[-1] >= tr.threshold[-1]:
                tr.verdict = "BlewUp"
        return tr


class ConstantsUnavailable(ValueError):
    """The trace cannot supply the constants (too short, or a non-positive sum)."""


@dataclass(frozen=True)
class ProofConstants:
    I: float
    C1: float
    C2: float
    C: float
    C3: float | None
    N1: int
    N2: int
    N3: int
    N4: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def c1_constant(params: SchemeParams) -> float:
    """delta**(3-p) * 2**(-(3d+1)(p-1))."""
    return params.delta ** (3.0 - params.p) * 2.0 ** (-(3 * params.d + 1) * (params.p - 1.0))


def max_admissible_C(C1: float, U_N2: float, U_N2p1: float, N2: int, p: float) -> float:
    """Largest C with C <= C1 and (U_{N2+1}-U_{N2})**2 >= C/(p+1) * (U_{N2}/N2)**(p+1)."""
    return min(C1, (p + 1.0) * (U_N2p1 - U_N2) ** 2 * (N2 / U_N2) ** (p + 1.0))


def c3_constant(C: float, C2: float, p: float, N4: int) -> float:
    return math.sqrt(C / (p + 1.0)) * (C2 / 3.0 * math.log(N4)) ** ((p - 1.0) / 2.0)


_N4_CAP = 2**62


def smallest_N4(C: float, C2: float, p: float, d: int) -> int | None:
    """Smallest integer N4 >= 2 with C3(N4) >= p + d, or None beyond 2**62."""
    target = p + d
    # C3 >= p+d  <=>  log N4 >= (3/C2) * ((p+d)**2 (p+1)/C)**(1/(p-1))
    try:
        log_needed = 3.0 / C2 * (target**2 * (p + 1.0) / C) ** (1.0 / (p - 1.0))
    except OverflowError:
        return None
    if not math.isfinite(log_needed) or log_needed >= math.log(_N4_CAP):
        return None
    N4 = max(2, math.ceil(math.exp(log_needed)))
    while N4 > 2 and c3_constant(C, C2, p, N4 - 1) >= target:
        N4 -= 1
    while c3_constant(C, C2, p, N4) < target:
        N4 += 1
    return N4


def compute_constants(params: SchemeParams, trace: Trace) -> ProofConstants:
    """Constants of the blow-up argument from the measured start of a run.

    I is U_{N0+1} - U_{N0}; C2 = C1*(I/2)**p comes from inserting U_n >= (I/2) n
    into the second-difference lower bound; C is the largest value meeting both
    smallness conditions; N4 is the first index where C3 reaches p + d.
    """
    N0, N2, p, d = params.N0, params.N2, params.p, params.d
    if not (trace.covers(N0) and trace.covers(N2 + 1)):
        raise ConstantsUnavailable(f"trace [{trace.first}, {trace.last}] does not cover N0={N0} and N2+1={N2 + 1}")
    I = trace.U_at(N0 + 1) - trace.U_at(N0)
    U_N2, U_N2p1 = trace.U_at(N2), trace.U_at(N2 + 1)
    if not U_N2 > 0:
        raise ConstantsUnavailable(f"U at N2={N2} is {U_N2}, not positive")
    if not I > 0:
        raise ConstantsUnavailable(f"initial increment I={I} is not positive")
    C1 = c1_constant(params)
    C2 = C1 * (I / 2.0) ** p
    C = max_admissible_C(C1, U_N2, U_N2p1, N2, p)
    if not C > 0:
        raise ConstantsUnavailable(f"no positive C satisfies the smallness conditions (C={C})")
    N4 = smallest_N4(C, C2, p, d)
    C3 = c3_constant(C, C2, p, N4) if N4 is not None else None
    return ProofConstants(I=I, C1=C1, C2=C2, C=C, C3=C3, N1=params.N1, N2=N2, N3=params.N3, N4=N4)
