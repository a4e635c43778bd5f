import math

import numpy as np
import pytest

from shiftlab import (
    ConvergenceKind,
    ExponentSequence,
    ShiftKind,
    ShiftOperatorSpec,
    TruncationBudget,
    WeightSequence,
    basis_vector,
    cesaro_mean,
    classify,
    classify_sequence,
    cross_validate,
    entry_by_name,
    forward_limit_sequence,
    make_power_series_space,
    run_trajectory,
    seminorm,
)
from shiftlab.simulator import export_csv, mixed_probe

SP_INF = make_power_series_space(ExponentSequence.linear(), "infinite", 1.0)
BUDGET = TruncationBudget(n_max=400, m_max=64, k_max=3, l_max=10)


def test_trajectory_unweighted_backward_example():
    entry = entry_by_name("delta0-infinite")
    traj = run_trajectory(entry.op, basis_vector(5), [1], 10)
    # by step 10 the mean averages the five surviving basis vectors
    oracle = sum(math.exp(j + 1) for j in range(5)) / 10.0
    assert traj.cesaro[1][-1] == pytest.approx(oracle, rel=1e-12)
    assert traj.cesaro[1][-1] == pytest.approx(23.3204, rel=1e-4)


def test_trajectory_zero_weights_all_zero():
    op = ShiftOperatorSpec(ShiftKind.BACKWARD, WeightSequence.constant(0.0), SP_INF)
    traj = run_trajectory(op, basis_vector(4), [0, 2], 12)
    for k in (0, 2):
        assert np.all(traj.cesaro[k] == 0.0)
        assert np.all(traj.power_over_n[k] == 0.0)


def test_backward_annihilation_hits_exact_zero():
    entry = entry_by_name("ddz-infinite")
    r0 = 5
    traj = run_trajectory(entry.op, basis_vector(r0), [0, 1], 16)
    for k in (0, 1):
        assert np.all(traj.power_over_n[k][r0 + 1 :] == 0.0)
        assert traj.power_over_n[k][r0 - 1] != 0.0


def test_support_width_bounds():
    entry = entry_by_name("volterra-infinite")
    x0 = basis_vector(3)
    traj = run_trajectory(entry.op, x0, [0], 20)
    assert np.all(traj.support_width <= x0.support_width + traj.steps)
    entry = entry_by_name("delta0-infinite")
    traj = run_trajectory(entry.op, basis_vector(6), [0], 20)
    assert np.all(np.diff(traj.support_width) <= 0)


def test_classify_sequence_examples():
    ns = np.arange(1, 65, dtype=float)
    assert classify_sequence(1.0 / ns).kind is ConvergenceKind.CONVERGES_TO_ZERO
    assert classify_sequence(np.ones(64)).kind is ConvergenceKind.CONVERGES_TO_NONZERO
    import scipy.special as sc

    factorials = np.exp(sc.gammaln(ns + 1))
    assert classify_sequence(factorials).kind is ConvergenceKind.DIVERGES
    assert classify_sequence(np.zeros(16)).kind is ConvergenceKind.CONVERGES_TO_ZERO
    bounded = 1.0 + 0.5 * np.sin(ns)
    assert classify_sequence(bounded).kind in (
        ConvergenceKind.BOUNDED,
        ConvergenceKind.CONVERGES_TO_NONZERO,
    )
    with pytest.raises(ValueError):
        classify_sequence([1.0, 2.0])


def test_classification_reproducible_from_record():
    entry = entry_by_name("volterra-infinite")
    traj = run_trajectory(entry.op, mixed_probe(), [0, 1], 32)
    assert classify(traj) == classify(traj)


def test_trajectory_matches_fresh_recomputation():
    entry = entry_by_name("volterra-infinite")
    x0 = mixed_probe()
    traj = run_trajectory(entry.op, x0, [0, 2], 24)
    rng = np.random.default_rng(9)
    for n in rng.choice(np.arange(1, 25), size=10, replace=False):
        mean = cesaro_mean(entry.op, x0, int(n))
        for k in (0, 2):
            fresh = seminorm(mean, k, entry.op.space)
            stored = traj.cesaro[k][int(n) - 1]
            assert stored == pytest.approx(fresh, rel=1e-10)


def test_forward_limit_sequences_vanish_for_volterra():
    for name in ("volterra-infinite", "volterra-finite"):
        entry = entry_by_name(name)
        for r in range(6):
            for k in range(4):
                seq = forward_limit_sequence(entry.op, r, k, 200)
                assert seq[-1] < 1e-8
                tail = seq[24:]
                assert np.all(np.diff(tail) <= 1e-300 + tail[:-1] * 1e-12)


def test_cross_validate_catalog_smoke():
    for name in ("delta0-infinite", "ddz-infinite", "volterra-finite", "sqrt-forward-s"):
        entry = entry_by_name(name)
        result = cross_validate(entry.op, BUDGET)
        assert result.ok, (name, result.hard_mismatches)


def test_cross_validate_zero_weights_trivially_consistent():
    op = ShiftOperatorSpec(ShiftKind.BACKWARD, WeightSequence.constant(0.0), SP_INF)
    result = cross_validate(op, TruncationBudget(n_max=200, m_max=32, k_max=2, l_max=6))
    assert result.ok


def test_export_csv_schema(tmp_path):
    entry = entry_by_name("delta0-infinite")
    traj = run_trajectory(entry.op, basis_vector(2), [0, 1], 8)
    path = tmp_path / "traj.csv"
    export_csv(traj, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,k,cesaro_seminorm,power_over_n_seminorm,support_width"
    assert len(lines) == 1 + 8 * 2
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "0"
