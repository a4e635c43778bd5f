"""Brute-force dynamics oracle.

Runs iterates and Cesaro means of a shift operator on finitely supported
vectors, records seminorm trajectories, and classifies their long-run
behaviour independently of the condition checkers.  Each step is recomputed
from the closed-form window products instead of incrementally, so there is no
error accumulation across steps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .checkers import PropertyReport, TruncationBudget, full_report
from .shifts import ShiftKind, ShiftOperatorSpec, cesaro_mean, iterate
from .spaces import FiniteVector, basis_vector, seminorm

# classification constants: dyadic blocks of length n_max/4, slope threshold
# shared with the checkers' default growth tolerance
SLOPE_TOL = 0.05
DEFAULT_ZERO_TOL = 1e-6

MIXED_PROBE_COEFFS = {0: 1.0, 3: 0.5, 7: 0.25}


def mixed_probe() -> FiniteVector:
    coeff = np.zeros(8)
    for i, c in MIXED_PROBE_COEFFS.items():
        coeff[i] = c
    return FiniteVector(coeff)


class ConvergenceKind(Enum):
    CONVERGES_TO_ZERO = "ConvergesToZero"
    CONVERGES_TO_NONZERO = "ConvergesToNonzero"
    BOUNDED = "Bounded"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ConvergenceClass:
    kind: ConvergenceKind
    rate: float

    def to_json_dict(self) -> dict:
        return {"kind": self.kind.value, "rate": self.rate}


@dataclass
class TrajectoryRecord:
    """Per-step seminorm data for the Cesaro means and the normalised iterates.

    cesaro[k][i] = k-th seminorm of the (i+1)-st Cesaro mean of x0;
    power_over_n[k][i] = k-th seminorm of T^(i+1) x0 / (i+1);
    support_width[i] = support width of the (i+1)-st Cesaro mean.
    """

    kind: ShiftKind
    x0: FiniteVector
    k_list: tuple[int, ...]
    steps: np.ndarray
    cesaro: dict[int, np.ndarray]
    power_over_n: dict[int, np.ndarray]
    support_width: np.ndarray

    @property
    def n_max(self) -> int:
        return int(self.steps[-1])


def run_trajectory(
    op: ShiftOperatorSpec,
    x0: FiniteVector,
    k_list: Sequence[int],
    n_max: int,
) -> TrajectoryRecord:
    """Exact per-step evaluation of Cesaro-mean and normalised-iterate seminorms.

    Overflowing seminorms are recorded as +inf and the trajectory continues.
    """
    if n_max < 2:
        raise ValueError("need n_max >= 2")
    k_list = tuple(k_list)
    steps = np.arange(1, n_max + 1, dtype=np.int64)
    cesaro = {k: np.zeros(n_max) for k in k_list}
    power = {k: np.zeros(n_max) for k in k_list}
    width = np.zeros(n_max, dtype=np.int64)
    for i, n in enumerate(steps):
        mean = cesaro_mean(op, x0, int(n))
        it = iterate(op, x0, int(n))
        width[i] = mean.support_width
        for k in k_list:
            cesaro[k][i] = seminorm(mean, k, op.space)
            power[k][i] = seminorm(it, k, op.space) / n
    return TrajectoryRecord(
        kind=op.kind,
        x0=x0,
        k_list=k_list,
        steps=steps,
        cesaro=cesaro,
        power_over_n=power,
        support_width=width,
    )


def classify_sequence(values: Iterable[float], tol: float = DEFAULT_ZERO_TOL) -> ConvergenceClass:
    """Classify the long-run behaviour of a nonnegative sequence.

    Dyadic-block comparison with blocks of a quarter of the length: a last
    block below tol times the first block (or exactly zero) converges to
    zero, as does a decisively negative log-log trend; a positive trend
    diverges; a flat last block pinned to the first is a nonzero limit.
    """
    vals = np.asarray(list(values), dtype=float)
    if len(vals) < 8:
        raise ValueError("need at least 8 trajectory points to classify")
    block = max(2, len(vals) // 4)
    first = vals[:block]
    last = vals[-block:]
    if np.isinf(last).any():
        return ConvergenceClass(ConvergenceKind.DIVERGES, math.inf)
    first_max = float(np.max(first))
    last_max = float(np.max(last))
    if last_max == 0.0 or (first_max > 0 and last_max < tol * first_max):
        return ConvergenceClass(ConvergenceKind.CONVERGES_TO_ZERO, -math.inf)
    ns = np.arange(1, len(vals) + 1, dtype=float)
    half = len(vals) // 2
    # fit the upper envelope (chunk maxima) so oscillations do not skew the trend
    tail_vals = vals[half:]
    tail_ns = ns[half:]
    chunks = np.array_split(np.arange(len(tail_vals)), min(8, max(2, len(tail_vals) // 2)))
    env_x, env_y = [], []
    for chunk in chunks:
        v = float(np.max(tail_vals[chunk]))
        if v > 0:
            env_x.append(math.log(float(np.mean(tail_ns[chunk]))))
            env_y.append(math.log(v))
    if len(env_x) >= 3:
        x = np.asarray(env_x)
        y = np.asarray(env_y)
        xc = x - x.mean()
        slope = float((xc * (y - y.mean())).sum() / max((xc * xc).sum(), 1e-30))
    else:
        slope = 0.0
    if slope > SLOPE_TOL:
        return ConvergenceClass(ConvergenceKind.DIVERGES, slope)
    if slope < -SLOPE_TOL and last_max < first_max:
        return ConvergenceClass(ConvergenceKind.CONVERGES_TO_ZERO, slope)
    last_min = float(np.min(last))
    settled = (
        first_max > 0
        and abs(last_max - first_max) <= 0.05 * first_max
        and (last_max - last_min) <= 0.05 * max(last_max, 1e-300)
    )
    if settled:
        return ConvergenceClass(ConvergenceKind.CONVERGES_TO_NONZERO, slope)
    if abs(slope) <= SLOPE_TOL:
        return ConvergenceClass(ConvergenceKind.BOUNDED, slope)
    return ConvergenceClass(ConvergenceKind.INCONCLUSIVE, slope)


def classify(traj: TrajectoryRecord, tol: float = DEFAULT_ZERO_TOL) -> dict[int, dict[str, ConvergenceClass]]:
    """Per-grade classification of both recorded series; reproducible from the record."""
    out: dict[int, dict[str, ConvergenceClass]] = {}
    for k in traj.k_list:
        out[k] = {
            "cesaro": classify_sequence(traj.cesaro[k], tol),
            "power_over_n": classify_sequence(traj.power_over_n[k], tol),
        }
    return out


def forward_limit_sequence(op: ShiftOperatorSpec, r: int, k: int, n_hi: int) -> np.ndarray:
    """Values |prod_{s=1..n} w_{r+s}| a(r+n, k) / n for n = 1..n_hi."""
    ns = np.arange(1, n_hi + 1, dtype=np.int64)
    wlog, _ = op.weights.window_log(np.full(len(ns), r + 1, dtype=np.int64), r + 1 + ns)
    col = op.space.matrix.log_column(k, r + n_hi + 1)
    with np.errstate(over="ignore"):
        return np.exp(wlog + col[r + ns] - np.log(ns))


def export_csv(traj: TrajectoryRecord, path: str) -> None:
    """Long-format CSV: one row per (step, grade)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "k", "cesaro_seminorm", "power_over_n_seminorm", "support_width"])
        for i, n in enumerate(traj.steps):
            for k in traj.k_list:
                writer.writerow(
                    [
                        int(n),
                        k,
                        repr(float(traj.cesaro[k][i])),
                        repr(float(traj.power_over_n[k][i])),
                        int(traj.support_width[i]),
                    ]
                )


@dataclass
class CrossValidation:
    report: PropertyReport
    classes: dict[str, dict[int, dict[str, ConvergenceClass]]]
    hard_mismatches: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.hard_mismatches

    def to_json_dict(self) -> dict:
        return {
            "hard_mismatches": list(self.hard_mismatches),
            "warnings": list(self.warnings),
            "classes": {
                probe: {
                    str(k): {series: c.to_json_dict() for series, c in per_k.items()}
                    for k, per_k in per_probe.items()
                }
                for probe, per_probe in self.classes.items()
            },
        }


def cross_validate(
    op: ShiftOperatorSpec,
    budget: TruncationBudget | None = None,
    report: PropertyReport | None = None,
) -> CrossValidation:
    """Compare simulated trajectory classes against the checker verdicts.

    A mean-ergodicity Holds verdict must not coexist with a diverging Cesaro
    trajectory, and a power-boundedness Holds verdict must not coexist with a
    diverging iterate-seminorm trajectory.  Mismatches are reported, never
    auto-resolved.
    """
    budget = budget or TruncationBudget()
    if report is None:
        report = full_report(op, budget)
    probes = {
        "e0": basis_vector(0),
        "e3": basis_vector(3),
        "e10": basis_vector(10),
        "mixed": mixed_probe(),
    }
    n_max = max(16, budget.m_max)
    k_list = list(range(min(3, budget.k_max) + 1))
    classes: dict[str, dict[int, dict[str, ConvergenceClass]]] = {}
    result = CrossValidation(report=report, classes=classes)
    for name, x0 in probes.items():
        traj = run_trajectory(op, x0, k_list, n_max)
        classes[name] = classify(traj)
        for k in k_list:
            cesaro_class = classes[name][k]["cesaro"]
            power_norms = traj.power_over_n[k] * traj.steps
            power_class = classify_sequence(power_norms)
            if report.mean_ergodicity.holds and cesaro_class.kind is ConvergenceKind.DIVERGES:
                result.hard_mismatches.append(
                    f"mean ergodicity Holds but Cesaro trajectory diverges (x={name}, k={k})"
                )
            if report.power_boundedness.holds and power_class.kind is ConvergenceKind.DIVERGES:
                result.hard_mismatches.append(
                    f"power boundedness Holds but iterate seminorms diverge (x={name}, k={k})"
                )
            if (
                report.mean_ergodicity.fails
                and cesaro_class.kind is ConvergenceKind.DIVERGES
            ):
                result.warnings.append(
                    f"divergent Cesaro trajectory matches the failing verdict (x={name}, k={k})"
                )
    if op.kind is ShiftKind.FORWARD and report.mean_ergodicity.holds:
        for r in range(6):
            for k in k_list:
                seq = forward_limit_sequence(op, r, k, n_max)
                cls = classify_sequence(seq)
                if cls.kind is ConvergenceKind.DIVERGES:
                    result.hard_mismatches.append(
                        f"mean ergodicity Holds but the normalised forward iterates "
                        f"diverge (r={r}, k={k})"
                    )
    return result
