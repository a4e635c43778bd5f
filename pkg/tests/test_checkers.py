import math

import numpy as np
import pytest

from shiftlab import (
    ExponentSequence,
    KoetheMatrix,
    Outcome,
    ShiftKind,
    ShiftOperatorSpec,
    SpaceSpec,
    TruncationBudget,
    WeightSequence,
    check_cesaro_bounded,
    check_continuity,
    check_continuity_power_series,
    check_mean_ergodic,
    check_montel,
    check_power_bounded,
    check_power_bounded_generic,
    check_power_bounded_power_series,
    check_topologizable,
    check_topologizable_power_series,
    full_report,
    limsup_along_n_plus_m,
    make_power_series_space,
)
from shiftlab.checkers import PowerSeriesPrecondition, PowerSeriesTagMissing
from shiftlab.spaces import PNorm

BUDGET = TruncationBudget(n_max=500, m_max=64, k_max=4, l_max=12)
SMALL = TruncationBudget(n_max=200, m_max=32, k_max=3, l_max=8)

SP_INF = make_power_series_space(ExponentSequence.linear(), "infinite", 1.0)
SP_FIN = make_power_series_space(ExponentSequence.linear(), "finite", 1.0)
SP_LOG = make_power_series_space(ExponentSequence.logarithmic(), "infinite", 1.0)


def op(kind, w, space):
    return ShiftOperatorSpec(kind, w, space)


# --- continuity -----------------------------------------------------------


def test_continuity_ddz_holds():
    v = check_continuity(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), BUDGET)
    assert v.outcome is Outcome.HOLDS


def test_continuity_zero_weights_holds_everywhere():
    for space in (SP_INF, SP_FIN, SpaceSpec(KoetheMatrix.power_matrix(), PNorm(1.0))):
        v = check_continuity(op(ShiftKind.BACKWARD, WeightSequence.constant(0.0), space), SMALL)
        assert v.outcome is Outcome.HOLDS


def test_continuity_doubly_exponential_fails():
    w = WeightSequence(
        lambda ns: (np.exp(np.minimum(ns.astype(float), 600.0)), np.ones(len(ns), dtype=np.int64)),
        name="exp-exp",
    )
    v = check_continuity(op(ShiftKind.BACKWARD, w, SP_INF), SMALL)
    assert v.outcome is Outcome.FAILS
    # the same verdict must come out of the generic sweep on an untagged copy
    untagged = SpaceSpec(SP_INF.matrix, PNorm(1.0))
    v2 = check_continuity(op(ShiftKind.BACKWARD, w, untagged), SMALL)
    assert v2.outcome is Outcome.FAILS
    assert v2.witness is not None


def test_continuity_power_series_gates():
    lin = ExponentSequence.linear()
    for type_, expected in (("infinite", Outcome.HOLDS), ("finite", Outcome.FAILS)):
        sp = make_power_series_space(lin, type_, 1.0)
        o = op(ShiftKind.BACKWARD, WeightSequence.exp_of_alpha(2.0, lin), sp)
        v = check_continuity_power_series(o, BUDGET)
        assert v.outcome is expected
        assert v.estimate == pytest.approx(2.0, abs=1e-9)
    for type_ in ("infinite", "finite"):
        sp = make_power_series_space(lin, type_, 1.0)
        o = op(ShiftKind.FORWARD, WeightSequence.exp_of_alpha(-1.0, lin), sp)
        v = check_continuity_power_series(o, BUDGET)
        assert v.outcome is Outcome.HOLDS


def test_continuity_power_series_sqrt_estimate():
    o = op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG)
    v = check_continuity_power_series(o, TruncationBudget())
    assert v.outcome is Outcome.HOLDS
    assert abs(v.estimate - 0.5) <= 0.02


def test_continuity_power_series_requires_tag():
    untagged = SpaceSpec(KoetheMatrix.power_matrix(), PNorm(1.0))
    with pytest.raises(PowerSeriesTagMissing):
        check_continuity_power_series(
            op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), untagged), SMALL
        )


# --- topologizability -----------------------------------------------------


def test_topologizable_ddz_holds():
    # the 1/n transients need the default index budget to settle
    v = check_topologizable(
        op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), TruncationBudget()
    )
    assert v.outcome is Outcome.HOLDS


def test_topologizable_unweighted_on_increasing_columns_certifies_same_grade():
    space = SpaceSpec(KoetheMatrix.power_matrix(), PNorm(1.0))
    v = check_topologizable(op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), space), SMALL)
    assert v.outcome is Outcome.HOLDS
    # the analytic certificate is l = k (ratio <= 1); the recorded one may sit
    # one grade higher because the un-attained sup keeps creeping in-grid
    assert all(cert.l <= k + 1 for k, cert in v.certificates.items())


def test_topologizable_sqrt_backward_fails():
    v = check_topologizable(op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG), BUDGET)
    assert v.outcome is Outcome.FAILS
    assert v.witness is not None


def test_topologizable_power_series_examples():
    v = check_topologizable_power_series(
        op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), TruncationBudget()
    )
    assert v.outcome is Outcome.HOLDS
    v = check_topologizable_power_series(
        op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG), BUDGET
    )
    assert v.outcome is Outcome.FAILS
    v = check_topologizable_power_series(
        op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_FIN), BUDGET
    )
    assert v.outcome is Outcome.HOLDS


def test_topologizable_forward_sqrt_fails_via_start_normalised_family():
    v = check_topologizable_power_series(
        op(ShiftKind.FORWARD, WeightSequence.sqrt(), SP_LOG), BUDGET
    )
    assert v.outcome is Outcome.FAILS


# --- power boundedness ----------------------------------------------------


def test_power_bounded_examples():
    assert check_power_bounded(
        op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET
    ).outcome is Outcome.HOLDS
    assert check_power_bounded(
        op(ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(), SP_FIN), BUDGET
    ).outcome is Outcome.HOLDS
    v = check_power_bounded(op(ShiftKind.BACKWARD, WeightSequence.constant(2.0), SP_FIN), BUDGET)
    assert v.outcome is Outcome.FAILS


def test_power_bounded_constant_two_fails_generic_sweep_too():
    # every candidate grade shows slope about ln 2 on the untagged sweep
    untagged = SpaceSpec(SP_FIN.matrix, PNorm(1.0))
    v = check_power_bounded_generic(
        op(ShiftKind.BACKWARD, WeightSequence.constant(2.0), untagged), SMALL
    )
    assert v.outcome is Outcome.FAILS
    assert v.growth_fit is not None and v.growth_fit > math.log(2.0) / 2


def test_power_bounded_power_series_examples():
    v = check_power_bounded_power_series(
        op(ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(), SP_INF), TruncationBudget()
    )
    assert v.outcome is Outcome.HOLDS
    v = check_power_bounded_power_series(
        op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET
    )
    assert v.outcome is Outcome.HOLDS
    v = check_power_bounded_power_series(
        op(ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(), SP_FIN), BUDGET
    )
    assert v.outcome is Outcome.HOLDS


def test_power_bounded_power_series_needs_positive_first_exponent():
    with pytest.raises(PowerSeriesPrecondition):
        check_power_bounded_power_series(
            op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_LOG), SMALL
        )
    # the public checker falls back to the generic sweep instead of erroring
    v = check_power_bounded(op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG), BUDGET)
    assert v.outcome is Outcome.FAILS


# --- limsup helper --------------------------------------------------------


def test_limsup_along_n_plus_m_examples():
    b = TruncationBudget(n_max=200, m_max=100, k_max=3, l_max=8)
    est = limsup_along_n_plus_m(lambda n, m: 1.0 / (n + m), b)
    assert 0.0 < est.estimate < 0.01
    est = limsup_along_n_plus_m(lambda n, m: m / (n + m), b)
    # oracle: enumerate the triangle directly at a tiny budget
    tiny = TruncationBudget(n_max=20, m_max=12, k_max=2, l_max=4)
    direct = max(
        m / (n + m)
        for d in range(tiny.n_max + tiny.m_max // 2, tiny.n_max + tiny.m_max + 1)
        for n in range(d)
        for m in [d - n]
    )
    est_tiny = limsup_along_n_plus_m(lambda n, m: m / (n + m), tiny)
    assert est_tiny.estimate == pytest.approx(direct)
    assert est.estimate == pytest.approx(1.0)
    est = limsup_along_n_plus_m(lambda n, m: np.full(np.shape(n), 3.25), b)
    assert est.estimate == pytest.approx(3.25)
    assert est.slope == pytest.approx(0.0, abs=1e-12)


# --- Cesaro boundedness ---------------------------------------------------


def test_cesaro_bounded_examples():
    v = check_cesaro_bounded(op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET)
    assert v.outcome is Outcome.HOLDS
    assert any("power boundedness" in note for note in v.notes)
    v = check_cesaro_bounded(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), BUDGET)
    assert v.outcome is Outcome.FAILS
    assert v.witness is not None
    v = check_cesaro_bounded(op(ShiftKind.BACKWARD, WeightSequence.constant(0.0), SP_FIN), BUDGET)
    assert v.outcome is Outcome.HOLDS


def test_cesaro_bounded_signed_weights_routes_through_bracket():
    signs = WeightSequence.from_values(
        lambda ns: np.where(ns % 2 == 0, 1.0, -1.0), name="alternating"
    )
    v = check_cesaro_bounded(op(ShiftKind.BACKWARD, signs, SP_INF), SMALL)
    assert v.outcome in (Outcome.HOLDS, Outcome.INCONCLUSIVE)


# --- mean ergodicity ------------------------------------------------------


def test_mean_ergodic_examples():
    v = check_mean_ergodic(op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET)
    assert v.outcome is Outcome.HOLDS
    v = check_mean_ergodic(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_FIN), BUDGET)
    assert v.outcome is Outcome.FAILS
    v = check_mean_ergodic(
        op(ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(), SP_INF), BUDGET
    )
    assert v.outcome is Outcome.HOLDS


def test_mean_ergodic_signed_weights_inconclusive():
    signs = WeightSequence.from_values(
        lambda ns: np.where(ns % 2 == 0, 1.0, -1.0), name="alternating"
    )
    v = check_mean_ergodic(op(ShiftKind.BACKWARD, signs, SP_INF), SMALL)
    assert v.outcome is Outcome.INCONCLUSIVE
    assert any("signed" in note for note in v.notes)


def test_mean_ergodic_forward_unweighted_fails_by_limit_condition():
    # unweighted forward iterates grow like a(r+n, k)/n in every positive grade
    v = check_mean_ergodic(op(ShiftKind.FORWARD, WeightSequence.constant(1.0), SP_INF), BUDGET)
    assert v.outcome is Outcome.FAILS
    assert any("vanish" in note for note in v.notes)


# --- Montel heuristic -----------------------------------------------------


def test_montel_examples():
    assert check_montel(SP_INF.matrix, SMALL).outcome is Outcome.HOLDS  # tag short-circuit
    v = check_montel(KoetheMatrix.power_matrix(), BUDGET)
    assert v.outcome is Outcome.HOLDS
    assert all(cert.l == k + 1 for k, cert in v.certificates.items())
    assert check_montel(KoetheMatrix.constant_matrix(), BUDGET).outcome is Outcome.FAILS


# --- structural properties ------------------------------------------------


def test_verdict_fails_always_has_witness_and_holds_has_certificates():
    cases = [
        check_power_bounded(op(ShiftKind.BACKWARD, WeightSequence.constant(2.0), SP_FIN), BUDGET),
        check_cesaro_bounded(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), BUDGET),
        check_topologizable(op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG), BUDGET),
        check_power_bounded(op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET),
        check_continuity(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), BUDGET),
    ]
    for v in cases:
        if v.outcome is Outcome.FAILS:
            assert v.witness is not None
        if v.outcome is Outcome.HOLDS:
            assert v.certificates


def test_checkers_are_deterministic():
    o = op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF)
    a = check_cesaro_bounded(o, BUDGET).to_json_dict()
    b = check_cesaro_bounded(o, BUDGET).to_json_dict()
    assert a == b


def test_specialization_agreement_on_tagged_spaces():
    # public generic-entry checkers and their power-series forms never return
    # contradictory definite verdicts on the same tagged operator and budget
    pairs = [
        (check_continuity, check_continuity_power_series),
        (check_topologizable, check_topologizable_power_series),
        (check_power_bounded, check_power_bounded_power_series),
    ]
    ops = [
        op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF),
        op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF),
        op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_FIN),
        op(ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(), SP_INF),
        op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG),
    ]
    for o in ops:
        for generic, fast in pairs:
            try:
                vf = fast(o, BUDGET)
            except PowerSeriesPrecondition:
                continue
            vg = generic(o, BUDGET)
            definite = {Outcome.HOLDS, Outcome.FAILS}
            if vg.outcome in definite and vf.outcome in definite:
                assert vg.outcome is vf.outcome


def test_monotone_budgets_never_flip_definite_verdicts():
    from shiftlab.catalog import catalog_entries

    small = TruncationBudget(n_max=250, m_max=32, k_max=3, l_max=8)
    large = TruncationBudget(n_max=500, m_max=64, k_max=3, l_max=8)
    definite = {Outcome.HOLDS, Outcome.FAILS}
    for entry in catalog_entries():
        r1 = full_report(entry.op, small)
        r2 = full_report(entry.op, large)
        for prop, v1 in r1.verdicts().items():
            v2 = r2.verdicts()[prop]
            if v1.outcome in definite and v2.outcome in definite:
                assert v1.outcome is v2.outcome, f"{entry.name}/{prop} flipped"


def test_zero_weights_absorb_everything():
    zero = WeightSequence.constant(0.0)
    for kind in (ShiftKind.BACKWARD, ShiftKind.FORWARD):
        for space in (SP_INF, SP_FIN):
            rep = full_report(op(kind, zero, space), SMALL)
            for prop in ("topologizability", "power_boundedness",
                         "cesaro_boundedness", "mean_ergodicity"):
                assert rep.verdicts()[prop].outcome is Outcome.HOLDS, prop


def test_full_report_catalog_rows():
    rep = full_report(op(ShiftKind.BACKWARD, WeightSequence.constant(1.0), SP_INF), BUDGET)
    assert all(v.outcome is Outcome.HOLDS for v in rep.verdicts().values())
    assert rep.implication_consistent

    rep = full_report(op(ShiftKind.BACKWARD, WeightSequence.polynomial(1.0), SP_INF), BUDGET)
    assert rep.continuity.outcome is Outcome.HOLDS
    assert rep.power_boundedness.outcome is Outcome.FAILS
    assert rep.mean_ergodicity.outcome is Outcome.FAILS
    assert rep.implication_consistent

    rep = full_report(op(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), SP_LOG), BUDGET)
    assert rep.topologizability.outcome is Outcome.FAILS
    assert rep.power_boundedness.outcome is Outcome.FAILS
    assert rep.mean_ergodicity.outcome is Outcome.FAILS
