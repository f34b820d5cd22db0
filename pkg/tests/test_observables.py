import math
from fractions import Fraction

import numpy as np
import pytest

from discwave.lattice import L1Ball, LatticeField
from discwave.observables import (
    TRACE_COLUMNS,
    ConstantsUnavailable,
    Trace,
    c1_constant,
    c3_constant,
    compute_constants,
    energy,
    lattice_sum,
    max_admissible_C,
    smallest_N4,
)
from discwave.scheme import SchemeParams, ShapeSpec, blowup_threshold
from discwave.simulation import run


def synthetic_trace(params, U):
    ns = np.arange(params.N0, params.N0 + len(U))
    return Trace(ns, ns * params.delta, U, np.abs(U), [blowup_threshold(params, int(n)) for n in ns],
                 np.zeros(len(U), dtype=int))


def test_lattice_sum_examples():
    assert lattice_sum(LatticeField.zeros(3, 2)) == 0.0
    assert lattice_sum(LatticeField.from_sites(2, {s: 1.0 for s in L1Ball(2, 1)})) == 5.0


def test_lattice_sum_against_exact_rational_sum():
    rng = np.random.default_rng(7)
    sites = {s: float(v) for s, v in zip(L1Ball(2, 6), rng.normal(scale=1e3, size=85))}
    fld = LatticeField.from_sites(2, sites)
    exact = sum(Fraction(v) for v in sites.values())
    assert lattice_sum(fld, compensated=True) == float(exact)
    # sequential summation error is at most (n-1) eps * sum |x|
    n = len(sites)
    bound = (n - 1) * np.finfo(float).eps * sum(abs(v) for v in sites.values())
    assert abs(lattice_sum(fld) - float(exact)) <= bound


def test_energy_examples():
    assert energy(5, 0.0, 0.0, 1.0, 2.0) == 0.0
    assert energy(5, 1.0, 3.0, 0.0, 2.5) == 4.0
    assert math.isclose(energy(4, 3.0, 5.0, 1.0, 2.0), 11 / 3, rel_tol=1e-15)
    with pytest.raises(ValueError):
        energy(1, 0.0, 1.0, 1.0, 2.0)


def test_c1_examples():
    assert c1_constant(SchemeParams(d=1, p=3.0, N0=1)) == 1 / 256
    assert c1_constant(SchemeParams(d=1, p=2.0, N0=2)) == 0.03125


def test_smallness_conditions_synthetic():
    # U_{N2} = 4, U_{N2+1} = 6, N2 = 4, p = 2: (p+1) dU^2 (N2/U)^(p+1) = 12
    assert max_admissible_C(100.0, 4.0, 6.0, 4, 2.0) == 12.0
    params = SchemeParams(d=1, p=2.0, N0=2, R=0)
    tr = synthetic_trace(params, [0.0, 1.0, 2.5, 4.0, 6.0])
    c = compute_constants(params, tr)
    assert c.I == 1.0 and c.N2 == 4
    assert c.C == min(c.C1, 12.0) == 0.03125
    assert c.C2 == c.C1 * 0.5**2
    # both conditions hold at the chosen C
    assert c.C <= c.C1
    assert (6.0 - 4.0) ** 2 >= c.C / 3 * (4.0 / 4) ** 3


def test_constants_unavailable():
    params = SchemeParams(d=1, p=2.0, N0=2, R=0)
    with pytest.raises(ConstantsUnavailable):
        compute_constants(params, synthetic_trace(params, [0.0, 1.0, 2.0]))
    with pytest.raises(ConstantsUnavailable):
        compute_constants(params, synthetic_trace(params, [0.0, -1.0, -2.0, -3.0, -4.0]))


def test_smallest_N4_is_minimal():
    C, C2, p, d = 1.0, 3.0, 2.0, 1
    N4 = smallest_N4(C, C2, p, d)

    def c3(N):
        return math.sqrt(C / 3.0) * math.sqrt(math.log(N))

    assert c3(N4) >= 3.0 > c3(N4 - 1)
    assert math.isclose(c3_constant(C, C2, p, N4), c3(N4), rel_tol=1e-14)
    assert smallest_N4(1e-3, 1e-3, 2.0, 1) is None


def test_reference_run_constants():
    params = SchemeParams(d=1, p=2.0, N0=2, R=1, h=0.5)
    _, rep = run(params, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    c = rep.constants
    assert (c.I, c.C1, c.C2, c.C) == (1.5, 0.03125, 0.017578125, 0.03125)
    assert (c.N1, c.N2, c.N3, c.N4) == (2, 4, 64, None)


def test_trace_csv_round_trip(tmp_path):
    params = SchemeParams(d=1, p=2.0, N0=2, R=1, h=0.5)
    tr, _ = run(params, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    first = lines[1].split(",")
    assert first[3] == "" and first[7] == ""  # no dU at the first level, no E before N2+1
    back = Trace.from_csv(path)
    assert back.verdict == "BlewUp"
    for col in ("n", "U", "max_abs", "threshold", "supp"):
        np.testing.assert_array_equal(getattr(back, col), getattr(tr, col))
    np.testing.assert_array_equal(back.E, tr.E)
    assert back[2].t_n == 4 * 0.5


def test_trace_records():
    params = SchemeParams(d=1, p=2.0, N0=2, R=0)
    tr = synthetic_trace(params, [0.0, 1.0, 3.0])
    assert tr[0].dU is None and tr[1].dU == 1.0 and tr[1].d2U == 1.0 and tr[2].d2U is None
    assert [r.n for r in tr] == [2, 3, 4]
    assert tr[0].threshold > 0
