import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discwave.bounds import (
    MonitorReport,
    SequenceWindow,
    check_hypotheses,
    convex_linear_bound,
    convex_nlogn_bound,
    growth_monitors,
    identity_monitors,
    lifespan_fit,
)
from discwave.lattice import LatticeField, count_l1_ball
from discwave.observables import Trace
from discwave.scheme import SchemeParams, ShapeSpec, blowup_threshold, init_state
from discwave.simulation import run
from discwave.suites import convex_sample

REF = SchemeParams(d=1, p=2.0, N0=2, R=1, h=0.5)


def test_window_needs_two_values():
    with pytest.raises(ValueError):
        SequenceWindow(0, [1.0])


def test_linear_equality_boundary():
    N0, I = 3, 0.5
    rep = convex_linear_bound(SequenceWindow(N0, I * np.arange(40.0)), I)
    assert rep.violated_at is None and rep.min_margin == 0.0 and rep.checked == 39
    assert all(rep.hypotheses.values())


def test_linear_squares():
    rep = convex_linear_bound(SequenceWindow(0, np.arange(100.0) ** 2), 1.0)
    assert rep.violated_at is None


def test_linear_rejects_nonpositive_I():
    with pytest.raises(ValueError):
        convex_linear_bound(SequenceWindow(0, [0.0, 1.0]), 0.0)


def test_linear_reports_failed_hypotheses():
    rep = convex_linear_bound(SequenceWindow(0, [0.0, 2.0, 3.0, 3.5]), 1.0)
    assert rep.hypotheses["convex"] is False and rep.hypotheses["first_increment_ge_I"] is True


def test_nlogn_squares():
    rep = convex_nlogn_bound(SequenceWindow(0, np.arange(200.0) ** 2), 2.0, 2)
    assert rep.violated_at is None and rep.lo == 22 and rep.hi == 199


def test_nlogn_vacuous_window():
    rep = convex_nlogn_bound(SequenceWindow(0, np.arange(20.0) ** 2), 2.0, 2)
    assert rep.vacuous and rep.to_json()["range"] is None and "21" in rep.note


def test_nlogn_rejects_nonpositive_C():
    with pytest.raises(ValueError):
        convex_nlogn_bound(SequenceWindow(0, [0.0, 1.0]), -1.0, 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generator_sequences_never_violate(seed):
    s = convex_sample(np.random.default_rng(seed))
    lin = convex_linear_bound(s.window, s.I)
    nl = convex_nlogn_bound(s.window, s.C, s.Ntilde)
    assert all(lin.hypotheses.values()) and all(nl.hypotheses.values())
    assert lin.violated_at is None and nl.violated_at is None


def test_hypotheses_constant_velocity():
    params = SchemeParams(d=2, p=2.0, N0=4, R=3)
    st0 = init_state(params, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    hyp = check_hypotheses(params, st0.prev, st0.curr)
    assert hyp.applicable and hyp.U_N0_zero
    assert hyp.I == 0.25 * count_l1_ball(2, 3)


def test_hypotheses_zero_velocity():
    params = SchemeParams(d=1, p=2.0, N0=2, R=1)
    st0 = init_state(params, ShapeSpec("const_ball", 1.0), ShapeSpec("zero"))
    hyp = check_hypotheses(params, st0.prev, st0.curr)
    assert not hyp.applicable and not hyp.increment_positive
    assert hyp.to_dict()["verdict"] == "blow-up theorem not applicable"


def test_hypotheses_support_violation():
    params = SchemeParams(d=2, p=2.0, N0=2, R=1)
    f = LatticeField.from_sites(2, {(0, 0): 1.0, (2, 0): 1.0})
    g = LatticeField.from_sites(2, {(0, 0): 1.0}).embedded(3)
    hyp = check_hypotheses(params, f.embedded(3), f.embedded(3).copy())
    assert not hyp.applicable and hyp.offending_site == (2, 0)
    assert any("support" in r for r in hyp.reasons())
    assert check_hypotheses(params, g, g).support_ok


def test_hypotheses_out_of_range_p():
    params = SchemeParams(d=2, p=2.5, N0=2, R=1)
    st0 = init_state(params, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    assert not check_hypotheses(params, st0.prev, st0.curr).applicable


def test_reference_run_monitors_clean():
    tr, rep = run(REF, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    ids = {m.bound_id: m for m in rep.monitors}
    assert set(ids) >= {"convexity", "telescoping", "finite-propagation", "linear-growth", "half-slope-growth",
                        "second-difference", "nlogn-growth", "increment-energy", "energy-monotone",
                        "final-polynomial", "growth-ceiling"}
    assert not rep.monitor_failures
    for m in rep.monitors:
        if m.checked:
            assert m.hi <= tr.last - 1 or m.bound_id == "finite-propagation"
    assert ids["nlogn-growth"].vacuous  # N3 = 64 lies beyond N_b = 18


def test_zero_run_disables_growth_monitors():
    _, rep = run(SchemeParams(d=1, p=2.0, N0=2, R=1, step_budget=30), ShapeSpec(), ShapeSpec())
    assert rep.constants is None and "disabled" in rep.constants_note
    assert {m.bound_id for m in rep.monitors} == {"convexity", "telescoping", "finite-propagation"}
    assert not rep.monitor_failures


def test_injected_fault_reported_at_its_index():
    tr, rep = run(REF, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0))
    U = tr.U.copy()
    bad = REF.N0 + 5
    U[bad - tr.first] = 0.0
    faulty = Trace(tr.n, tr.t_n, U, tr.max_abs, tr.threshold, tr.supp)
    faulty.verdict = tr.verdict
    reps = {m.bound_id: m for m in growth_monitors(REF, faulty, rep.constants)}
    assert reps["linear-growth"].violated_at == bad


def test_nlogn_oracle_agrees_with_trace_monitor():
    # eps = 0.1 runs past N3 = 64 before blowing up
    params = REF
    tr, rep = run(params, ShapeSpec("zero"), ShapeSpec("const_ball", 1.0), epsilon=0.1)
    consts = rep.constants
    assert tr.last > consts.N3 + 1
    mon = next(m for m in rep.monitors if m.bound_id == "nlogn-growth")
    hi = tr.last - 1
    w = SequenceWindow(tr.first, tr.U[: hi - tr.first + 1])
    orc = convex_nlogn_bound(w, consts.C2, consts.N2)
    assert (orc.lo, orc.hi, orc.violated_at, orc.checked) == (mon.lo, mon.hi, mon.violated_at, mon.checked)
    assert orc.min_margin == mon.min_margin


def test_identity_monitor_catches_nonconvex_trace():
    params = SchemeParams(d=1, p=2.0, N0=2, R=0)
    U = np.array([0.0, 1.0, 3.0, 4.0, 4.5])
    ns = np.arange(2, 7)
    tr = Trace(ns, ns * 0.5, U, U, [blowup_threshold(params, int(n)) for n in ns], [0] * 5, source_sum=np.ones(5),
               abs_sum=U)
    reps = {m.bound_id: m for m in identity_monitors(params, tr)}
    assert reps["convexity"].violated_at == 4


def test_monitor_json_shape():
    rep = MonitorReport("x", 3, 9, violated_at=5, min_margin=-1.0, checked=7)
    js = json.loads(json.dumps(rep.to_json()))
    assert js["bound_id"] == "x" and js["range"] == [3, 9] and js["violated_at"] == 5 and js["min_margin"] == -1.0


def test_lifespan_fit_synthetic():
    eps = [1e-1, 1e-2, 1e-3, 1e-4]
    fit = lifespan_fit([(e, round(1 / e)) for e in eps])
    assert abs(fit.slope + 1.0) < 1e-12 and fit.residual < 1e-12
    fit = lifespan_fit([(e, 100 * e**-0.5) for e in eps])
    assert abs(fit.slope + 0.5) < 1e-12


def test_lifespan_fit_rejections():
    with pytest.raises(ValueError):
        lifespan_fit([(0.1, 10), (0.01, 100)])
    with pytest.raises(ValueError):
        lifespan_fit([(0.1, 10), (0.01, None), (0.001, 1000)])
    with pytest.raises(ValueError):
        lifespan_fit([(0.1, 10), (0.05, 20), (0.02, 50)])
