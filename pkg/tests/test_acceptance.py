"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Tolerances and budgets are pinned here, not configurable.
"""

import json
import math
import time

import numpy as np
import pytest

import shiftlab as sl
from shiftlab import (
    ExponentSequence,
    FiniteVector,
    Outcome,
    ShiftKind,
    ShiftOperatorSpec,
    TruncationBudget,
    WeightSequence,
    cesaro_mean,
    cesaro_seminorm,
    check_cesaro_bounded,
    check_continuity_power_series,
    cross_validate,
    forward_limit_sequence,
    full_report,
    iterate,
    iterate_seminorm,
    make_power_series_space,
    seminorm,
)
from shiftlab.catalog import catalog_entries, entry_by_name
from shiftlab.cli import cmd_catalog


def _report(criterion: int, text: str) -> None:
    print(f"[PASS] criterion {criterion}: {text}")


def _weight_families():
    return [
        WeightSequence.constant(1.0),
        WeightSequence.constant(2.0),
        WeightSequence.polynomial(1.0),
        WeightSequence.sqrt_shifted(),
        WeightSequence.reciprocal_factorial(),
    ]


def _spaces():
    out = []
    for alpha in (ExponentSequence.linear(), ExponentSequence.logarithmic()):
        for type_ in ("infinite", "finite"):
            for p in (1.0, 2.0, math.inf):
                out.append(make_power_series_space(alpha, type_, p))
    return out


def test_criterion_1_closed_form_oracle_equivalence():
    rng = np.random.default_rng(20240801)
    spaces = _spaces()
    weights = _weight_families()
    started = time.perf_counter()
    checked = 0
    worst = 0.0
    for case in range(500):
        op = ShiftOperatorSpec(
            ShiftKind.BACKWARD if rng.random() < 0.5 else ShiftKind.FORWARD,
            weights[rng.integers(len(weights))],
            spaces[rng.integers(len(spaces))],
        )
        x = FiniteVector(rng.standard_normal(rng.integers(1, 14)))
        k = int(rng.integers(0, 7))
        m = int(rng.integers(0, 51))
        n = int(rng.integers(1, 51))
        got_it = iterate_seminorm(op, x, m, k)
        ref_it = seminorm(iterate(op, x, m), k, op.space)
        got_ce = cesaro_seminorm(op, x, n, k)
        ref_ce = seminorm(cesaro_mean(op, x, n), k, op.space)
        for got, ref in ((got_it, ref_it), (got_ce, ref_ce)):
            if ref == 0.0 or not math.isfinite(ref):
                assert got == ref or (math.isinf(ref) and math.isinf(got))
                continue
            rel = abs(got - ref) / ref
            worst = max(worst, rel)
            assert rel <= 1e-10, (case, rel)
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    assert checked >= 700
    _report(1, f"500 randomized cases agree to {worst:.2e} relative "
               f"(limit 1e-10) in {elapsed:.2f}s (limit 10s)")


def test_criterion_2_cesaro_identity():
    rng = np.random.default_rng(20240802)
    spaces = _spaces()
    weights = _weight_families()
    worst = 0.0
    for _ in range(200):
        op = ShiftOperatorSpec(
            ShiftKind.BACKWARD if rng.random() < 0.5 else ShiftKind.FORWARD,
            weights[rng.integers(len(weights))],
            spaces[rng.integers(len(spaces))],
        )
        x = FiniteVector(rng.standard_normal(rng.integers(1, 10)))
        n = int(rng.integers(2, 32))
        lhs = iterate(op, x, n).coefficients / n
        mean_n = cesaro_mean(op, x, n).coefficients
        mean_p = cesaro_mean(op, x, n - 1).coefficients
        width = max(len(lhs), len(mean_n), len(mean_p))

        def pad(v):
            out = np.zeros(width)
            out[: len(v)] = v
            return out

        rhs = pad(mean_n) - (n - 1) / n * pad(mean_p)
        scale = max(1.0, float(np.max(np.abs(pad(mean_n)))), float(np.max(np.abs(pad(lhs)))))
        err = float(np.max(np.abs(pad(lhs) - rhs))) / scale
        worst = max(worst, err)
        assert err <= 1e-12
    _report(2, f"200 randomized Cesaro recurrences agree coordinatewise to "
               f"{worst:.2e} (limit 1e-12)")


def test_criterion_3_catalog_verdict_table(tmp_path):
    started = time.perf_counter()
    out = tmp_path / "catalog.json"
    exit_code = cmd_catalog(out=str(out))
    elapsed = time.perf_counter() - started
    assert exit_code == 0, "catalog reported contradictions"
    payload = json.loads(out.read_text())
    assert not payload["contradictions"]
    verdicts = {
        e["entry"]: {p: v["outcome"] for p, v in e["report"]["properties"].items()}
        for e in payload["entries"]
    }
    for name in ("delta0-infinite", "delta0-finite", "volterra-infinite", "volterra-finite"):
        assert verdicts[name]["power_boundedness"] == "Holds", name
        assert verdicts[name]["mean_ergodicity"] == "Holds", name
    for name in ("ddz-infinite", "ddz-finite"):
        assert verdicts[name]["topologizability"] == "Holds", name
        assert verdicts[name]["mean_ergodicity"] == "Fails", name
        assert verdicts[name]["power_boundedness"] in ("Fails", "Inconclusive"), name
    for name in ("sqrt-backward-s", "sqrt-forward-s"):
        assert verdicts[name]["topologizability"] == "Fails", name
    assert elapsed < 60.0, f"took {elapsed:.2f}s"
    _report(3, f"catalog table reproduced with zero contradictions in "
               f"{elapsed:.2f}s (limit 60s)")


def test_criterion_4_continuity_gates():
    lin = ExponentSequence.linear()
    budget = TruncationBudget()
    grown = WeightSequence.exp_of_alpha(2.0, lin)
    shrunk = WeightSequence.exp_of_alpha(-1.0, lin)
    sp_inf = make_power_series_space(lin, "infinite", 1.0)
    sp_fin = make_power_series_space(lin, "finite", 1.0)
    v = check_continuity_power_series(ShiftOperatorSpec(ShiftKind.BACKWARD, grown, sp_inf), budget)
    assert v.outcome is Outcome.HOLDS
    v = check_continuity_power_series(ShiftOperatorSpec(ShiftKind.BACKWARD, grown, sp_fin), budget)
    assert v.outcome is Outcome.FAILS
    for sp in (sp_inf, sp_fin):
        v = check_continuity_power_series(ShiftOperatorSpec(ShiftKind.FORWARD, shrunk, sp), budget)
        assert v.outcome is Outcome.HOLDS
    sp_log = make_power_series_space(ExponentSequence.logarithmic(), "infinite", 1.0)
    v = check_continuity_power_series(
        ShiftOperatorSpec(ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(), sp_log), budget
    )
    assert v.outcome is Outcome.HOLDS
    assert abs(v.estimate - 0.5) <= 0.02
    _report(4, f"continuity gates match; sqrt-weight trend estimate "
               f"{v.estimate:.4f} within 0.02 of 0.5")


def test_criterion_5_divergence_detection():
    entry = entry_by_name("ddz-infinite")
    budget = TruncationBudget()
    # the averaged-sum quantity at the lowest grade pair inside the default grid
    r = n = 12
    acc = 0.0
    for m in range(1, n + 1):
        acc += math.exp(
            entry.op.weights.window_log_product(r - m, r).log_magnitude
        ) * entry.op.space.matrix.entry(r - m, 0)
    quantity = acc / (n * entry.op.space.matrix.entry(r, 0))
    assert quantity > 1e6
    verdict = check_cesaro_bounded(entry.op, budget)
    assert verdict.outcome is Outcome.FAILS
    assert verdict.witness is not None
    assert verdict.witness.log_value > math.log(1e6)
    _report(5, f"averaged-sum quantity reaches {quantity:.3e} by start index 12 "
               f"(threshold 1e6); checker Fails with witness at start index "
               f"{verdict.witness.n}")


def test_criterion_6_implication_consistency():
    budget = TruncationBudget(n_max=256, m_max=32, k_max=4, l_max=8)
    rng = np.random.default_rng(20240806)
    weights = _weight_families() + [
        WeightSequence.constant(-1.0),
        WeightSequence.constant(0.0),
        WeightSequence.sqrt(),
        WeightSequence.polynomial(0.5),
        WeightSequence.polynomial(-0.5),
    ]
    spaces = _spaces() + [
        sl.SpaceSpec(sl.KoetheMatrix.power_matrix(), sl.PNorm(1.0)),
        sl.SpaceSpec(sl.KoetheMatrix.constant_matrix(), sl.PNorm(2.0)),
    ]
    reports = []
    for entry in catalog_entries():
        reports.append((entry.name, full_report(entry.op, budget)))
    for i in range(50):
        op = ShiftOperatorSpec(
            ShiftKind.BACKWARD if rng.random() < 0.5 else ShiftKind.FORWARD,
            weights[rng.integers(len(weights))],
            spaces[rng.integers(len(spaces))],
        )
        reports.append((f"random-{i}", full_report(op, budget)))
    for name, rep in reports:
        assert rep.power_bounded_implies_topologizable, name
        assert rep.mean_ergodic_implies_cesaro_bounded, name
    _report(6, f"{len(reports)} reports (catalog + 50 randomized) respect both "
               f"verdict implications")


def test_criterion_7_simulator_cross_validation():
    budget = TruncationBudget()
    for entry in catalog_entries():
        result = cross_validate(entry.op, budget)
        assert result.ok, (entry.name, result.hard_mismatches)
    for name in ("volterra-infinite", "volterra-finite"):
        entry = entry_by_name(name)
        for r in range(6):
            for k in range(4):
                seq = forward_limit_sequence(entry.op, r, k, 200)
                assert seq[-1] < 1e-8, (name, r, k, seq[-1])
    _report(7, "zero hard mismatches across the catalog; forward limit "
               "sequences fall below 1e-8 by step 200 for r <= 5, k <= 3")


def test_criterion_8_determinism(tmp_path):
    out1 = tmp_path / "run1.json"
    out2 = tmp_path / "run2.json"
    assert cmd_catalog(out=str(out1)) == 0
    assert cmd_catalog(out=str(out2)) == 0
    b1 = out1.read_bytes()
    assert b1 == out2.read_bytes()
    assert len(b1) > 1000
    _report(8, f"two default-budget catalog runs produced byte-identical JSON "
               f"({len(b1)} bytes)")
