"""Finite-budget verdicts for shift-operator dynamics conditions.

Every condition tested here has the shape "for every grade k there is a grade
l such that a supremum over an infinite index set is finite", or is a limsup
comparison.  A finite sweep cannot prove such a statement, so checkers return
three-valued verdicts:

* Holds   -- for every tested k some l <= l_max gives a running sup that is
             finite and moves by less than ``stability_tol`` (relative) when
             the index budgets are doubled once;
* Fails   -- for some k, every candidate l produces a running sup whose log
             grows along the sweep with fitted slope above ``growth_tol``
             (least squares of log-sup against log-index over the last two
             dyadic blocks), or an equivalent scalar criterion is violated
             decisively;
* Inconclusive otherwise.

On power-series graded spaces the (k, l) search is replaced by structurally
equivalent scalar conditions obtained by normalising log weight products with
the grading exponent.  Those reformulations see divergences whose onset lies
far beyond any feasible (k, l) grid (the onset scale grows exponentially with
the candidate grade), so the generic checkers defer to them whenever the
space carries the power-series tag and the scalar verdict is definite.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .spaces import (
    LOG_NEGLIGIBLE,
    NEG_INF,
    ExponentSequence,
    KoetheMatrix,
    PowerSeriesType,
    ShiftLabError,
)
from .shifts import ShiftKind, ShiftOperatorSpec

INF = float("inf")


class PowerSeriesTagMissing(ShiftLabError):
    pass


class PowerSeriesPrecondition(ShiftLabError):
    pass


class Outcome(Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class TruncationBudget:
    """Grid bounds for the sweeps.

    ``n_max`` bounds sequence indices, ``m_max`` iterate counts.  Stability of
    a verdict is always measured against a once-doubled grid, so arrays of
    roughly twice these sizes are materialised internally.
    """

    n_max: int = 2000
    m_max: int = 200
    k_max: int = 8
    l_max: int = 32
    growth_tol: float = 0.05
    stability_tol: float = 0.01

    def __post_init__(self) -> None:
        for name in ("n_max", "m_max", "k_max", "l_max"):
            if getattr(self, name) < 1:
                raise ShiftLabError(f"budget bound {name} must be >= 1")
        if self.growth_tol <= 0 or self.stability_tol <= 0:
            raise ShiftLabError("budget tolerances must be positive")

    def scaled(self, factor: float) -> "TruncationBudget":
        return replace(
            self,
            n_max=max(8, int(self.n_max * factor)),
            m_max=max(8, int(self.m_max * factor)),
        )

    def to_json_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "m_max": self.m_max,
            "k_max": self.k_max,
            "l_max": self.l_max,
            "growth_tol": self.growth_tol,
            "stability_tol": self.stability_tol,
        }


@dataclass(frozen=True)
class Witness:
    k: int | None = None
    l: int | None = None
    n: int | None = None
    m: int | None = None
    log_value: float = NEG_INF

    @property
    def value(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_value))

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "n": self.n,
            "m": self.m,
            "log_value": self.log_value,
            "value": self.value,
        }


@dataclass(frozen=True)
class Certificate:
    k: int
    l: int | None
    sup_log: float

    def to_json_dict(self) -> dict:
        return {"k": self.k, "l": self.l, "sup_log": self.sup_log}


@dataclass
class Verdict:
    outcome: Outcome
    quantity_name: str
    budget: TruncationBudget
    witness: Witness | None = None
    growth_fit: float | None = None
    estimate: float | None = None
    certificates: dict[int, Certificate] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    @property
    def fails(self) -> bool:
        return self.outcome is Outcome.FAILS

    def with_note(self, note: str) -> "Verdict":
        self.notes.append(note)
        return self

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "quantity": self.quantity_name,
            "witness": self.witness.to_json_dict() if self.witness else None,
            "growth_fit": self.growth_fit,
            "estimate": self.estimate,
            "certificates": {str(k): c.to_json_dict() for k, c in sorted(self.certificates.items())},
            "notes": list(self.notes),
            "budget": self.budget.to_json_dict(),
        }


PROPERTIES = (
    "continuity",
    "topologizability",
    "power_boundedness",
    "cesaro_boundedness",
    "mean_ergodicity",
    "montel_space",
)


@dataclass
class PropertyReport:
    continuity: Verdict
    topologizability: Verdict
    power_boundedness: Verdict
    cesaro_boundedness: Verdict
    mean_ergodicity: Verdict
    montel_space: Verdict

    def verdicts(self) -> dict[str, Verdict]:
        return {name: getattr(self, name) for name in PROPERTIES}

    @property
    def power_bounded_implies_topologizable(self) -> bool:
        return not (self.power_boundedness.holds and self.topologizability.fails)

    @property
    def mean_ergodic_implies_cesaro_bounded(self) -> bool:
        return not (self.mean_ergodicity.holds and self.cesaro_boundedness.fails)

    @property
    def implication_consistent(self) -> bool:
        return self.power_bounded_implies_topologizable and self.mean_ergodic_implies_cesaro_bounded

    def to_json_dict(self) -> dict:
        properties = {}
        for name, v in self.verdicts().items():
            d = v.to_json_dict()
            d["property"] = name
            properties[name] = d
        return {
            "properties": properties,
            "consistency": {
                "power_bounded_implies_topologizable": self.power_bounded_implies_topologizable,
                "mean_ergodic_implies_cesaro_bounded": self.mean_ergodic_implies_cesaro_bounded,
            },
        }


# ---------------------------------------------------------------------------
# sweep statistics
# ---------------------------------------------------------------------------


def _stable(full: float, base: float, tol: float) -> bool:
    if full == NEG_INF and base == NEG_INF:
        return True
    if not (np.isfinite(full) and np.isfinite(base)):
        return False
    return abs(full - base) <= tol * max(1.0, abs(base))


def _fit_slope(idx: np.ndarray, vals: np.ndarray) -> float:
    """Least-squares slope of vals against ln(idx); 0 if underdetermined."""
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    mask = np.isfinite(vals) & (idx > 0)
    if int(mask.sum()) < 4:
        return 0.0
    x = np.log(idx[mask])
    y = vals[mask]
    xc = x - x.mean()
    denom = float((xc * xc).sum())
    if denom <= 1e-30:
        return 0.0
    return float((xc * (y - y.mean())).sum() / denom)


def _subsample(positions: np.ndarray, cap: int = 64) -> np.ndarray:
    if len(positions) <= cap:
        return positions
    picks = np.unique(np.geomspace(1, len(positions), cap).astype(int) - 1)
    return positions[picks]


def _not_decelerating(r_quarter: float, r_half: float, r_full: float) -> bool:
    """A rising running sup counts as divergence only if the per-block rises
    do not shrink: a bounded sup approached from below decelerates (each
    doubling adds less), while genuine growth keeps or grows its increments.
    """
    r_quarter, r_half, r_full = float(r_quarter), float(r_half), float(r_full)
    rise1 = r_half - r_quarter
    rise2 = r_full - r_half
    if not np.isfinite(rise1):
        return True
    if not np.isfinite(rise2):
        return rise2 > 0
    return rise2 > 0.6 * max(rise1, 0.0)


@dataclass
class SupSweep:
    """Running-sup diagnostics for a sup-finiteness condition."""

    sup_base: float
    sup_full: float
    slope: float
    arg_index: int
    budget: TruncationBudget
    sustained: bool = True

    @property
    def diverging(self) -> bool:
        return self.sup_full == INF or (self.slope > self.budget.growth_tol and self.sustained)

    @property
    def certifies(self) -> bool:
        return (
            self.sup_full < INF
            and not self.diverging
            and _stable(self.sup_full, self.sup_base, self.budget.stability_tol)
        )


def _sup_sweep(idx: np.ndarray, vals: np.ndarray, base_hi: int, budget: TruncationBudget) -> SupSweep:
    idx = np.asarray(idx)
    vals = np.asarray(vals, dtype=float)
    if len(vals) == 0:
        return SupSweep(NEG_INF, NEG_INF, 0.0, 0, budget)
    order = np.argsort(idx, kind="stable")
    s_idx = idx[order]
    s_vals = vals[order]
    running = np.maximum.accumulate(s_vals)
    sup_full = float(running[-1])
    sup_base = float(s_vals[s_idx <= base_hi].max(initial=NEG_INF))
    hi = float(s_idx.max())
    sel = _subsample(np.nonzero(s_idx > hi / 4)[0])
    slope = _fit_slope(s_idx[sel], running[sel])
    arg = int(np.argmax(vals))
    marks = [float(s_vals[s_idx <= hi / 4].max(initial=NEG_INF)),
             float(s_vals[s_idx <= hi / 2].max(initial=NEG_INF)), sup_full]
    sustained = _not_decelerating(*marks)
    return SupSweep(sup_base, sup_full, slope, arg, budget, sustained)


@dataclass
class TailSweep:
    """Dyadic tail-block diagnostics for a limsup estimate."""

    est_base: float
    est_full: float
    prev_block: float
    arg_index: int
    budget: TruncationBudget

    @property
    def block_slope(self) -> float:
        if not (np.isfinite(self.est_full) and np.isfinite(self.prev_block)):
            return INF if self.est_full == INF else 0.0
        return (self.est_full - self.prev_block) / math.log(2.0)

    @property
    def rising(self) -> bool:
        return self.block_slope > self.budget.growth_tol

    @property
    def falling(self) -> bool:
        # any decay beyond the stability tolerance means the estimate has not
        # settled yet, so a positive value is not evidence of a positive limit
        return self.block_slope < -self.budget.stability_tol

    @property
    def stable_estimate(self) -> bool:
        return _stable(self.est_full, self.est_base, self.budget.stability_tol)


def _tail_sweep(idx: np.ndarray, vals: np.ndarray, base_hi: int, budget: TruncationBudget) -> TailSweep:
    idx = np.asarray(idx, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if len(vals) == 0:
        return TailSweep(NEG_INF, NEG_INF, NEG_INF, 0, budget)
    hi = float(idx.max())
    top_mask = idx > hi / 2
    est_full = float(vals[top_mask].max(initial=NEG_INF))
    prev_block = float(vals[(idx > hi / 4) & ~top_mask].max(initial=NEG_INF))
    est_base = float(vals[(idx > base_hi / 2) & (idx <= base_hi)].max(initial=NEG_INF))
    arg = int(np.argmax(np.where(top_mask, vals, NEG_INF)))
    return TailSweep(est_base, est_full, prev_block, arg, budget)


def _bound_mode_outcome(tail: TailSweep, budget: TruncationBudget, strict: bool) -> Outcome:
    """Verdict for a limsup-vs-zero comparison (strict '< 0' or loose '<= 0')."""
    est = tail.est_full
    if est == INF:
        return Outcome.FAILS
    if strict:
        if est < 0.0:
            return Outcome.HOLDS
    elif est <= budget.stability_tol:
        return Outcome.HOLDS
    if est > budget.stability_tol and not tail.falling:
        return Outcome.FAILS
    return Outcome.INCONCLUSIVE


# ---------------------------------------------------------------------------
# prefix machinery
# ---------------------------------------------------------------------------


def _prefix_lse(psi: np.ndarray) -> np.ndarray:
    """E with E[t] = log sum exp(psi[0..t)); E[0] = -inf."""
    if len(psi) == 0:
        return np.array([NEG_INF])
    acc = np.logaddexp.accumulate(psi)
    return np.concatenate([[NEG_INF], acc])


def _log_diff(b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """log(exp(b) - exp(a)) elementwise for b >= a; equal inputs give -inf."""
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)
    out = np.full(b.shape, NEG_INF)
    mask = b > a
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = np.exp(np.where(mask, a - b, 0.0))
        out[mask] = b[mask] + np.log1p(-diff[mask])
    return out


def _last_zero_before(signs: np.ndarray) -> np.ndarray:
    """lz[r] = largest j < r with w_j = 0, or -1; length len(signs)+1."""
    marks = np.where(signs == 0, np.arange(len(signs)), -1)
    return np.concatenate([[-1], np.maximum.accumulate(marks)])


def _next_zero_from(signs: np.ndarray) -> np.ndarray:
    """nz[i] = smallest j >= i with w_j = 0, or len(signs); length len(signs)+1."""
    n = len(signs)
    marks = np.where(signs == 0, np.arange(n), n)
    rev = np.minimum.accumulate(marks[::-1])[::-1]
    return np.concatenate([rev, [n]])


def _dyadic(limit: int) -> list[int]:
    out = []
    v = 1
    while v <= limit:
        out.append(v)
        v *= 2
    return out


def _sliding_extreme(g: np.ndarray, lo: np.ndarray, hi: np.ndarray, maximize: bool = True) -> np.ndarray:
    """max (or min) of g over index windows [lo[t], hi[t]], both edges nondecreasing."""
    sign = 1.0 if maximize else -1.0
    vals = sign * np.asarray(g, dtype=float)
    out = np.full(len(lo), NEG_INF)
    dq: deque[int] = deque()
    ptr = 0
    for t in range(len(lo)):
        h = int(hi[t])
        while ptr <= h:
            while dq and vals[dq[-1]] <= vals[ptr]:
                dq.pop()
            dq.append(ptr)
            ptr += 1
        while dq and dq[0] < lo[t]:
            dq.popleft()
        if dq and lo[t] <= hi[t]:
            out[t] = vals[dq[0]]
    return sign * out


# ---------------------------------------------------------------------------
# generic (k, l) checkers
# ---------------------------------------------------------------------------


def _forall_exists(
    pair_sweep: Callable[[int, int], SupSweep],
    budget: TruncationBudget,
    quantity: str,
    witness_of: Callable[[int, int, SupSweep], Witness],
) -> Verdict:
    """Assemble a Verdict from per-(k, l) running-sup sweeps."""
    certificates: dict[int, Certificate] = {}
    overall = Outcome.HOLDS
    open_witness: Witness | None = None
    open_slope: float | None = None
    for k in range(budget.k_max + 1):
        certified = False
        all_diverge = True
        best: tuple[float, int, SupSweep] | None = None
        for l in range(budget.l_max + 1):
            st = pair_sweep(k, l)
            if st.certifies:
                certificates[k] = Certificate(k, l, st.sup_full)
                certified = True
                all_diverge = False
                break
            if not st.diverging:
                all_diverge = False
            if best is None or st.slope > best[0]:
                best = (st.slope, l, st)
        if certified:
            continue
        if all_diverge and best is not None:
            slope, l, st = best
            return Verdict(
                Outcome.FAILS,
                quantity,
                budget,
                witness=witness_of(k, l, st),
                growth_fit=slope,
                certificates=certificates,
            )
        overall = Outcome.INCONCLUSIVE
        if best is not None and (open_slope is None or best[0] > open_slope):
            open_slope = best[0]
            open_witness = witness_of(k, best[1], best[2])
    if overall is Outcome.HOLDS:
        return Verdict(overall, quantity, budget, certificates=certificates)
    return Verdict(
        overall, quantity, budget,
        witness=open_witness, growth_fit=open_slope, certificates=certificates,
    )


def _defer_to_power_series(
    op: ShiftOperatorSpec,
    budget: TruncationBudget,
    fast: Callable[[ShiftOperatorSpec, TruncationBudget], Verdict],
) -> Verdict | None:
    """On tagged spaces the structural reformulation wins outright.

    The bounded-(k, l) grid is provably blind there in both directions: a
    stable sup can hide a divergence whose onset grows exponentially with the
    candidate grade, and a rising sweep can hide a finite peak just past the
    grid.  Only an unsatisfied precondition sends the query back to the
    generic sweep.
    """
    if not op.space.is_power_series:
        return None
    try:
        verdict = fast(op, budget)
    except PowerSeriesPrecondition:
        return None
    return verdict.with_note("evaluated via the power-series form of the condition")


def check_continuity(op: ShiftOperatorSpec, budget: TruncationBudget | None = None) -> Verdict:
    """Does the shift map the graded space into itself continuously?

    Tested condition: for every k there are l and C with
    |w_n| a(n,k) <= C a(n+1,l) for all n (backward; forward uses a(n-1,l)).
    """
    budget = budget or TruncationBudget()
    deferred = _defer_to_power_series(op, budget, check_continuity_power_series)
    if deferred is not None:
        return deferred
    n2 = 2 * budget.n_max
    lw = op.weights.log_abs(n2)
    ns = np.arange(1 if op.kind is ShiftKind.FORWARD else 0, n2, dtype=np.int64)
    rows = ns + 1 if op.kind is ShiftKind.BACKWARD else ns - 1
    cols: dict[int, np.ndarray] = {}

    def col(k: int) -> np.ndarray:
        if k not in cols:
            cols[k] = op.space.matrix.log_column(k, n2 + 1)
        return cols[k]

    def pair(k: int, l: int) -> SupSweep:
        num = lw[ns] + col(k)[ns]
        vals = np.where(num == NEG_INF, NEG_INF, num - col(l)[rows])
        return _sup_sweep(ns + 1, vals, budget.n_max, budget)

    def witness(k: int, l: int, st: SupSweep) -> Witness:
        n = int(ns[st.arg_index])
        return Witness(k=k, l=l, n=n, m=1, log_value=st.sup_full)

    return _forall_exists(pair, budget, "single-step weight/grade ratio", witness)


def _iterate_ratio_grid(
    op: ShiftOperatorSpec, budget: TruncationBudget
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int]:
    """(winlog[m, n], grade rows for k and l, n index, n2, m2).

    winlog[m, n] is the log window product of the m-th iterate at free index
    n (m = 0 rows are the empty product); windows containing a zero weight
    are -inf.
    """
    n2, m2 = 2 * budget.n_max, 2 * budget.m_max
    w = op.weights
    W, Z, _ = w.prefix_arrays(n2 + m2 + 1)
    ns = np.arange(n2, dtype=np.int64)
    idx = np.arange(m2 + 1, dtype=np.int64)[:, None] + ns[None, :]
    if op.kind is ShiftKind.BACKWARD:
        winlog = np.where((Z[idx] - Z[ns][None, :]) > 0, NEG_INF, W[idx] - W[ns][None, :])
        row_k, row_l = np.broadcast_to(ns[None, :], idx.shape), idx
    else:
        winlog = np.where(
            (Z[idx + 1] - Z[ns + 1][None, :]) > 0, NEG_INF, W[idx + 1] - W[ns + 1][None, :]
        )
        row_k, row_l = idx, np.broadcast_to(ns[None, :], idx.shape)
    return winlog, row_k, row_l, ns, n2, m2


def check_topologizable(
    op: ShiftOperatorSpec,
    budget: TruncationBudget | None = None,
    _continuity: Verdict | None = None,
) -> Verdict:
    """Is the family of iterates tameable with per-iterate constants?

    Tested condition: for every k there is one l such that for each iterate
    count m the ratio |prod w| a(.,k)/a(.,l) stays bounded over the free
    index.  The certifying l is chosen once per k and reused for every m.
    """
    budget = budget or TruncationBudget()
    deferred = _defer_to_power_series(op, budget, check_topologizable_power_series)
    if deferred is not None:
        if _continuity is not None and _continuity.fails:
            deferred.with_note("warning: continuity already fails")
        return deferred
    grid_parts = _iterate_ratio_grid(op, budget)
    winlog, row_k, row_l, ns, n2, m2 = grid_parts
    cols: dict[int, np.ndarray] = {}

    def col(k: int) -> np.ndarray:
        if k not in cols:
            cols[k] = op.space.matrix.log_column(k, n2 + m2 + 2)
        return cols[k]

    tail_sel = _subsample(np.nonzero(ns + 1 > n2 / 4)[0], cap=48)
    tail_x = np.log(ns[tail_sel] + 1.0)
    tail_xc = tail_x - tail_x.mean()
    tail_den = float((tail_xc * tail_xc).sum())
    quarter_col = np.searchsorted(ns, n2 // 4)
    half_col = np.searchsorted(ns, n2 // 2)
    base_cache: dict[int, np.ndarray] = {}

    def grid(k: int, l: int) -> np.ndarray:
        if k not in base_cache:
            base_cache[k] = np.where(winlog == NEG_INF, NEG_INF, winlog + col(k)[row_k])
        return np.where(winlog == NEG_INF, NEG_INF, base_cache[k] - col(l)[row_l])

    certificates: dict[int, Certificate] = {}
    overall = Outcome.HOLDS
    open_witness: Witness | None = None
    open_slope: float | None = None
    for k in range(budget.k_max + 1):
        certified = False
        all_diverge = True
        best: tuple[float, int, int] | None = None
        for l in range(budget.l_max + 1):
            V = grid(k, l)
            running = np.maximum.accumulate(V, axis=1)
            sup_full = running[:, -1]
            sup_base = running[:, budget.n_max - 1]
            y = running[:, tail_sel]
            finite = np.isfinite(y).all(axis=1)
            with np.errstate(invalid="ignore"):
                yc = np.where(finite[:, None], y - y.mean(axis=1, keepdims=True), 0.0)
                slopes = np.where(finite, (yc * tail_xc).sum(axis=1) / tail_den, 0.0)
            stable = np.array(
                [_stable(f, b, budget.stability_tol) for f, b in zip(sup_full, sup_base)]
            )
            sustained = np.array(
                [
                    _not_decelerating(q, h, f)
                    for q, h, f in zip(running[:, quarter_col], running[:, half_col], sup_full)
                ]
            )
            diverging = ((slopes > budget.growth_tol) & sustained) | np.isposinf(sup_full)
            if bool((stable & ~diverging).all()):
                certificates[k] = Certificate(k, l, float(sup_full.max()))
                certified = True
                all_diverge = False
                break
            if not diverging.any():
                all_diverge = False
            div_slopes = np.where(diverging, slopes, -INF)
            worst_m = int(np.argmax(div_slopes if diverging.any() else slopes))
            if best is None or slopes[worst_m] > best[0]:
                best = (float(slopes[worst_m]), l, worst_m)
        if certified:
            continue
        if all_diverge and best is not None:
            slope, l, m_star = best
            V = grid(k, l)
            n_star = int(np.argmax(V[m_star]))
            verdict = Verdict(
                Outcome.FAILS,
                "per-iterate weight-product/grade ratio family",
                budget,
                witness=Witness(k=k, l=l, n=n_star, m=m_star, log_value=float(V[m_star, n_star])),
                growth_fit=slope,
                certificates=certificates,
            )
            if _continuity is not None and _continuity.fails:
                verdict.with_note("warning: continuity already fails")
            return verdict
        overall = Outcome.INCONCLUSIVE
        if best is not None and (open_slope is None or best[0] > open_slope):
            open_slope = best[0]
            V = grid(k, best[1])
            n_star = int(np.argmax(V[best[2]]))
            open_witness = Witness(
                k=k, l=best[1], n=n_star, m=best[2], log_value=float(V[best[2], n_star])
            )
    verdict = Verdict(
        overall,
        "per-iterate weight-product/grade ratio family",
        budget,
        witness=open_witness if overall is not Outcome.HOLDS else None,
        growth_fit=open_slope if overall is not Outcome.HOLDS else None,
        certificates=certificates,
    )
    if _continuity is not None and _continuity.fails:
        verdict.with_note("warning: continuity already fails")
    return verdict


def _joint_diag(
    op: ShiftOperatorSpec,
    col_k: np.ndarray,
    col_l: np.ndarray,
    n_cap: int,
    m_cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Anti-diagonal maxima of the joint iterate ratio over n <= n_cap, 1 <= m <= m_cap.

    Backward: |prod_{[n, n+m)} w| a(n,k)/a(n+m,l) splits as f(n+m) + g(n);
    forward uses windows (n, n+m] with the grade rows swapped.  Windows that
    contain a zero weight produce the zero product and never attain the max.
    """
    w = op.weights
    d_hi = n_cap + m_cap
    W, _, _ = w.prefix_arrays(d_hi + 1)
    signs = w.signs(d_hi + 1)
    ds = np.arange(1, d_hi + 1, dtype=np.int64)
    lz = _last_zero_before(signs)
    if op.kind is ShiftKind.BACKWARD:
        f = W[ds] - col_l[ds]
        g = col_k[: n_cap + 1] - W[: n_cap + 1]
        lo = np.maximum.reduce([np.zeros_like(ds), ds - m_cap, lz[ds] + 1])
    else:
        f = W[ds + 1] + col_k[ds]
        g = -(W[1 : n_cap + 2] + col_l[: n_cap + 1])
        lo = np.maximum.reduce([np.zeros_like(ds), ds - m_cap, lz[ds + 1]])
    hi = np.minimum(ds - 1, n_cap)
    peak = _sliding_extreme(g, lo, hi, maximize=True)
    diag = np.where(peak == NEG_INF, NEG_INF, f + peak)
    return ds, diag


def check_power_bounded_generic(
    op: ShiftOperatorSpec, budget: TruncationBudget | None = None
) -> Verdict:
    """Joint-sup sweep over (free index, iterate count) for each grade pair.

    Divergence is looked for along both grid directions: anti-diagonals
    (via the f(n+m) + g(n) decomposition) and the iterate-count axis
    (per-iterate row maxima), since either direction alone can hide growth
    that lives in the other.
    """
    budget = budget or TruncationBudget()
    winlog, row_k, row_l, ns, n2, m2 = _iterate_ratio_grid(op, budget)
    cols: dict[int, np.ndarray] = {}

    def col(k: int) -> np.ndarray:
        if k not in cols:
            cols[k] = op.space.matrix.log_column(k, n2 + m2 + 2)
        return cols[k]

    base_cache: dict[int, np.ndarray] = {}
    ms = np.arange(1, m2 + 1, dtype=np.int64)

    def pair(k: int, l: int) -> SupSweep:
        if k not in base_cache:
            base_cache[k] = np.where(winlog == NEG_INF, NEG_INF, winlog + col(k)[row_k])
        V = np.where(winlog == NEG_INF, NEG_INF, base_cache[k] - col(l)[row_l])[1:]
        sup_full = float(V.max(initial=NEG_INF))
        sup_base = float(V[: budget.m_max, : budget.n_max].max(initial=NEG_INF))
        ds, diag = _joint_diag(op, col(k), col(l), n2, m2)
        d_sweep = _sup_sweep(ds, diag, n2 + m2, budget)
        row_max = V.max(axis=1)
        m_sweep = _sup_sweep(ms, row_max, budget.m_max, budget)
        return SupSweep(
            sup_base,
            sup_full,
            max(d_sweep.slope, m_sweep.slope),
            int(np.argmax(row_max)),
            budget,
            sustained=d_sweep.diverging or m_sweep.diverging,
        )

    def witness(k: int, l: int, st: SupSweep) -> Witness:
        return Witness(k=k, l=l, n=None, m=st.arg_index + 1, log_value=st.sup_full)

    return _forall_exists(pair, budget, "joint iterate weight-product/grade ratio", witness)


def check_power_bounded(op: ShiftOperatorSpec, budget: TruncationBudget | None = None) -> Verdict:
    """Is the family of iterates equicontinuous with one constant?

    Tested condition: for every k there is l with the iterate ratio bounded
    jointly over the free index and the iterate count.
    """
    budget = budget or TruncationBudget()
    deferred = _defer_to_power_series(op, budget, check_power_bounded_power_series)
    if deferred is not None:
        return deferred
    return check_power_bounded_generic(op, budget)


# ---------------------------------------------------------------------------
# Cesaro machinery
# ---------------------------------------------------------------------------


def _cesaro_max_series(
    op: ShiftOperatorSpec,
    col_k: np.ndarray,
    q: float,
    r_hi: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per start-index maxima of log((1/n) sum_m |prod w|^q a(.,k)^q).

    Backward start r sums windows [r-m, r) for m <= n <= r; forward start r
    sums windows (r, r+m] for m <= n <= r_hi-1-r.  The averaging depth n is
    sampled dyadically plus its extreme value, a 2-approximation of the true
    sup over n (a constant log offset that no verdict rule can see).  Returns
    (start_indices, values).
    """
    w = op.weights
    W, _, _ = w.prefix_arrays(r_hi + 1)
    signs = w.signs(r_hi + 1)
    if op.kind is ShiftKind.BACKWARD:
        psi = q * (col_k[:r_hi] - W[:r_hi])
        E = _prefix_lse(psi)
        lz = _last_zero_before(signs)
        vals = np.full(r_hi + 1, NEG_INF)
        rs_all = np.arange(1, r_hi + 1, dtype=np.int64)
        for n in _dyadic(r_hi):
            rs = rs_all[rs_all >= n]
            j0 = np.maximum(rs - n, lz[rs] + 1)
            s = q * W[rs] + _log_diff(E[rs], E[j0])
            vals[rs] = np.maximum(vals[rs], s - math.log(n))
        j0 = np.maximum(0, lz[rs_all] + 1)
        s = q * W[rs_all] + _log_diff(E[rs_all], E[j0])
        vals[rs_all] = np.maximum(vals[rs_all], s - np.log(rs_all))
        return rs_all, vals[1:]
    psi = q * (W[1 : r_hi + 1] + col_k[:r_hi])
    E = _prefix_lse(psi)
    nz = _next_zero_from(signs)
    r_top = max(1, r_hi // 2)
    rs = np.arange(0, r_top + 1, dtype=np.int64)
    vals = np.full(len(rs), NEG_INF)
    for n in _dyadic(r_hi) + [None]:
        n_vec = np.maximum(1, r_hi - 1 - rs) if n is None else np.full(len(rs), n, dtype=np.int64)
        jend = np.minimum(np.minimum(rs + n_vec, r_hi - 1), nz[rs + 1] - 1)
        valid = jend >= rs + 1
        if not valid.any():
            continue
        s = -q * W[rs[valid] + 1] + _log_diff(E[jend[valid] + 1], E[rs[valid] + 1])
        vals[valid] = np.maximum(vals[valid], s - np.log(n_vec[valid]))
    return rs, vals


def _forward_depth_divergence(
    op: ShiftOperatorSpec, budget: TruncationBudget, q: float, col_k: np.ndarray, k: int
) -> Witness | None:
    """Averaging-depth divergence at a fixed start index.

    If the forward averaged sums grow without bound in the depth n at some
    fixed start r, no grade on the start side can tame them (the start grade
    enters as a constant factor), so the condition fails for every l.
    """
    n2 = 2 * budget.n_max
    w = op.weights
    W, _, _ = w.prefix_arrays(n2 + 1)
    signs = w.signs(n2 + 1)
    psi = q * (W[1 : n2 + 1] + col_k[:n2])
    E = _prefix_lse(psi)
    nz = _next_zero_from(signs)
    for r in range(min(budget.k_max, n2 // 4) + 1):
        ns = np.array(_dyadic(n2 - 2 - r), dtype=np.int64)
        if len(ns) < 4:
            continue
        jend = np.minimum(np.minimum(r + ns, n2 - 1), nz[r + 1] - 1)
        valid = jend >= r + 1
        if int(valid.sum()) < 4:
            continue
        b = E[jend[valid] + 1]
        t = -q * W[r + 1] + _log_diff(b, np.full(len(b), E[r + 1])) - np.log(ns[valid])
        slope = _fit_slope(ns[valid], t)
        if slope > budget.growth_tol:
            n_star = int(ns[valid][np.argmax(t)])
            return Witness(k=k, l=None, n=r, m=n_star, log_value=float(np.max(t)))
    return None


def _cesaro_condition_generic(
    op: ShiftOperatorSpec, budget: TruncationBudget, q: float, quantity: str
) -> Verdict:
    n2 = 2 * budget.n_max
    cols = {
        k: op.space.matrix.log_column(k, n2 + 2)
        for k in range(max(budget.k_max, budget.l_max) + 1)
    }
    if op.kind is ShiftKind.FORWARD:
        for k in range(budget.k_max + 1):
            wit = _forward_depth_divergence(op, budget, q, cols[k], k)
            if wit is not None:
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit, growth_fit=INF)
    series_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}

    def series(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if k not in series_cache:
            rs, vals = _cesaro_max_series(op, cols[k], q, n2)
            if op.kind is ShiftKind.FORWARD:
                # forward depths reach to the grid edge, so the base grid
                # needs its own, genuinely shallower, series
                rs_b, vals_b = _cesaro_max_series(op, cols[k], q, budget.n_max)
            else:
                keep = rs <= budget.n_max
                rs_b, vals_b = rs[keep], vals[keep]
            series_cache[k] = (rs, vals, rs_b, vals_b)
        return series_cache[k]

    def pair(k: int, l: int) -> SupSweep:
        rs, vals, rs_b, vals_b = series(k)
        st = _sup_sweep(rs, vals - q * cols[l][rs], budget.n_max, budget)
        sup_base = float((vals_b - q * cols[l][rs_b]).max(initial=NEG_INF))
        return SupSweep(sup_base, st.sup_full, st.slope, st.arg_index, budget, st.sustained)

    def witness(k: int, l: int, st: SupSweep) -> Witness:
        rs, _, _, _ = series(k)
        return Witness(k=k, l=l, n=int(rs[st.arg_index]), m=None, log_value=st.sup_full)

    return _forall_exists(pair, budget, quantity, witness)


def _cesaro_condition_reduction(
    op: ShiftOperatorSpec, budget: TruncationBudget, q: float, quantity: str
) -> Verdict:
    """Power-series route: compare log Cesaro sums against the grading exponent.

    On an infinite-type grading "some l tames the sums" is equivalent to a
    finite upper trend of the exponent-normalised log maxima; on finite type
    the available damping is bounded and the normalised trend must stay
    strictly below zero.
    """
    tag = op.space.power_series
    assert tag is not None
    n2 = 2 * budget.n_max
    alpha = tag.alpha.values(n2 + 1)
    infinite = tag.type is PowerSeriesType.INFINITE
    certificates: dict[int, Certificate] = {}
    outcome = Outcome.HOLDS
    worst: tuple[float, Witness] | None = None
    for k in range(budget.k_max + 1):
        col_k = op.space.matrix.log_column(k, n2 + 2)
        if op.kind is ShiftKind.FORWARD:
            wit = _forward_depth_divergence(op, budget, q, col_k, k)
            if wit is not None:
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit, growth_fit=INF)
        rs, vals = _cesaro_max_series(op, col_k, q, n2)
        pos = alpha[rs] > 0
        rs, vals = rs[pos], vals[pos]
        with np.errstate(invalid="ignore"):
            y = np.where(vals == NEG_INF, NEG_INF, vals / (q * alpha[rs]))
        tail = _tail_sweep(rs, y, budget.n_max, budget)
        if op.kind is ShiftKind.FORWARD:
            # measure the base estimate on a genuinely shallower grid
            rs_b, vals_b = _cesaro_max_series(op, col_k, q, budget.n_max)
            pos_b = alpha[rs_b] > 0
            with np.errstate(invalid="ignore"):
                y_b = np.where(vals_b[pos_b] == NEG_INF, NEG_INF,
                               vals_b[pos_b] / (q * alpha[rs_b[pos_b]]))
            base_tail = _tail_sweep(rs_b[pos_b], y_b, budget.n_max, budget)
            tail = TailSweep(base_tail.est_full, tail.est_full, tail.prev_block,
                             tail.arg_index, budget)
        # witness carries the raw averaged-sum value at the lowest grade pair
        if len(rs):
            r_star = int(rs[tail.arg_index])
            raw = float(vals[tail.arg_index])
            if not infinite:
                raw += q * float(alpha[r_star])
        else:
            r_star, raw = None, NEG_INF
        wit = Witness(k=k, l=0, n=r_star, m=None, log_value=raw)
        if infinite:
            if tail.est_full == INF or tail.rising:
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                               growth_fit=tail.block_slope)
            if tail.stable_estimate or tail.est_full == NEG_INF:
                l_cert = 0 if tail.est_full == NEG_INF else max(0, math.ceil(tail.est_full)) + 1
                certificates[k] = Certificate(k, l_cert, tail.est_full)
            else:
                outcome = Outcome.INCONCLUSIVE
        else:
            sub = _bound_mode_outcome(tail, budget, strict=True)
            if sub is Outcome.FAILS:
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                               growth_fit=tail.block_slope)
            if sub is Outcome.HOLDS:
                l_cert = int(math.ceil(-1.0 / tail.est_full)) if tail.est_full < 0 else 0
                certificates[k] = Certificate(k, l_cert, tail.est_full)
            else:
                outcome = Outcome.INCONCLUSIVE
        if outcome is Outcome.INCONCLUSIVE and worst is None:
            worst = (tail.block_slope, wit)
    verdict = Verdict(
        outcome,
        quantity,
        budget,
        witness=worst[1] if (worst and outcome is not Outcome.HOLDS) else None,
        growth_fit=worst[0] if (worst and outcome is not Outcome.HOLDS) else None,
        certificates=certificates,
    )
    return verdict.with_note("exponent-normalised form of the averaged-sum condition")


def _cesaro_condition(
    op: ShiftOperatorSpec, budget: TruncationBudget, q: float, quantity: str
) -> Verdict:
    if op.space.is_power_series:
        return _cesaro_condition_reduction(op, budget, q, quantity)
    return _cesaro_condition_generic(op, budget, q, quantity)


def _signed_necessary_condition(
    op: ShiftOperatorSpec, budget: TruncationBudget, quantity: str
) -> Verdict:
    """Signed averaged-sum necessary condition, with per-start rescaling.

    Cancellation must happen in linear scale; each start index gets its own
    scale factor so partial sums stay representable.
    """
    n2 = 2 * budget.n_max
    w = op.weights
    W, _, _ = w.prefix_arrays(n2 + 1)
    signs = w.signs(n2 + 1)
    cols = {
        k: op.space.matrix.log_column(k, n2 + 2)
        for k in range(max(budget.k_max, budget.l_max) + 1)
    }
    backward = op.kind is ShiftKind.BACKWARD
    series_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def base_series(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(start, depth-max log |avg|, start index for grade-l lookup)."""
        if k in series_cache:
            return series_cache[k]
        col_k = cols[k]
        starts: list[int] = []
        logs: list[float] = []
        r_range = range(1, n2 + 1) if backward else range(0, n2 // 2 + 1)
        for r in r_range:
            if backward:
                ms = np.arange(1, r + 1, dtype=np.int64)
                seg = signs[:r][::-1]
                term_log = W[r] - W[r - ms] + col_k[r - ms]
            else:
                cap = n2 - 1 - r
                if cap < 1:
                    continue
                ms = np.arange(1, cap + 1, dtype=np.int64)
                seg = signs[r + 1 : r + cap + 1]
                term_log = W[r + ms + 1] - W[r + 1] + col_k[r + ms]
            zero_mask = np.cumsum(seg == 0) > 0
            parity = np.cumsum(seg < 0) % 2
            term_sign = np.where(zero_mask, 0, np.where(parity == 0, 1, -1))
            term_log = np.where(zero_mask, NEG_INF, term_log)
            finite = term_log[np.isfinite(term_log)]
            scale = float(finite.max()) if len(finite) else 0.0
            with np.errstate(over="ignore"):
                partial = np.cumsum(term_sign * np.exp(term_log - scale))
            n_samples = np.unique(np.array(_dyadic(len(ms)) + [len(ms)], dtype=np.int64))
            mag = np.abs(partial[n_samples - 1])
            with np.errstate(divide="ignore"):
                v = np.where(mag == 0.0, NEG_INF, np.log(mag) + scale) - np.log(n_samples)
            starts.append(r)
            logs.append(float(np.max(v)))
        out = (np.asarray(starts, dtype=np.int64), np.asarray(logs, dtype=float), None)
        series_cache[k] = out
        return out

    def pair(k: int, l: int) -> SupSweep:
        rs, logs, _ = base_series(k)
        return _sup_sweep(rs, logs - cols[l][rs], budget.n_max, budget)

    def witness(k: int, l: int, st: SupSweep) -> Witness:
        rs, _, _ = base_series(k)
        return Witness(k=k, l=l, n=int(rs[st.arg_index]), m=None, log_value=st.sup_full)

    return _forall_exists(pair, budget, quantity, witness)


def check_cesaro_bounded(
    op: ShiftOperatorSpec,
    budget: TruncationBudget | None = None,
    _power_bounded: Verdict | None = None,
) -> Verdict:
    """Are the Cesaro means an equicontinuous family?

    Power boundedness dominates the question.  Nonnegative weights with p in
    {0, 1, inf} admit an exact averaged-sum characterization; otherwise a
    sufficient condition (p-powered absolute sums) and a necessary signed-sum
    condition bracket the property.
    """
    budget = budget or TruncationBudget()
    n2 = 2 * budget.n_max
    pb = _power_bounded if _power_bounded is not None else check_power_bounded(op, budget)
    w = op.weights
    nonneg = w.is_nonnegative(n2 + 2)
    quantity = "averaged weight-product/grade sums"
    if pb.holds:
        v = Verdict(Outcome.HOLDS, quantity, budget, certificates=dict(pb.certificates))
        return v.with_note("dominated by power boundedness")
    contractive = nonneg and w.max_abs_leq_one(n2)
    if contractive and pb.fails and (
        (op.kind is ShiftKind.BACKWARD and op.space.matrix.columns_increasing_in_n)
        or (op.kind is ShiftKind.FORWARD and op.space.matrix.columns_decreasing_in_n)
    ):
        v = Verdict(Outcome.FAILS, quantity, budget, witness=pb.witness, growth_fit=pb.growth_fit)
        return v.with_note(
            "equivalent to power boundedness for contractive weights with monotone columns"
        )
    p = op.space.p.value
    if nonneg and (p in (0.0, 1.0) or math.isinf(p)):
        return _cesaro_condition(op, budget, 1.0, quantity)
    q = p if (1.0 <= p < INF) else 1.0
    sufficient = _cesaro_condition(op, budget, q, quantity + " (p-powered sufficient form)")
    if sufficient.holds:
        return sufficient.with_note("sufficient condition holds")
    if nonneg:
        necessary = _cesaro_condition(op, budget, 1.0, quantity + " (necessary form)")
    else:
        necessary = _signed_necessary_condition(op, budget, quantity + " (signed necessary form)")
    if necessary.fails:
        return necessary.with_note("necessary condition fails")
    out = Verdict(Outcome.INCONCLUSIVE, quantity, budget,
                  witness=necessary.witness, growth_fit=necessary.growth_fit)
    return out.with_note("sufficient condition not established; necessary condition not refuted")


def _forward_limit_verdict(
    op: ShiftOperatorSpec, budget: TruncationBudget, quantity: str
) -> Verdict:
    """Per-start vanishing of normalised forward iterates over the step count.

    Tests lim_n |prod_{s=1..n} w_{r+s}| a(r+n, k) / n = 0 for sampled r, k.
    """
    n2 = 2 * budget.n_max
    w = op.weights
    all_hold = True
    worst: Witness | None = None
    worst_slope: float | None = None
    for k in range(budget.k_max + 1):
        col = op.space.matrix.log_column(k, n2 + 1)
        for r in range(budget.k_max + 1):
            ns = np.arange(1, n2 - r, dtype=np.int64)
            wlog, _ = w.window_log(np.full(len(ns), r + 1, dtype=np.int64), r + 1 + ns)
            t = wlog + col[r + ns] - np.log(ns)
            hi = len(ns)
            top = t[hi // 2 :]
            prev = t[hi // 4 : hi // 2]
            top_max = float(top.max(initial=NEG_INF))
            prev_max = float(prev.max(initial=NEG_INF))
            slope = _fit_slope(ns[hi // 4 :], t[hi // 4 :])
            if top_max <= LOG_NEGLIGIBLE or (slope <= -budget.growth_tol and top_max <= prev_max):
                continue
            if slope >= budget.growth_tol or (
                abs(top_max - prev_max) <= budget.stability_tol * max(1.0, abs(prev_max))
                and top_max > LOG_NEGLIGIBLE
            ):
                n_star = int(ns[hi // 2 :][np.argmax(top)]) if len(top) else None
                wit = Witness(k=k, l=None, n=r, m=n_star, log_value=top_max)
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit, growth_fit=slope)
            all_hold = False
            if worst is None:
                worst = Witness(k=k, l=None, n=r, m=None, log_value=top_max)
                worst_slope = slope
    if all_hold:
        return Verdict(Outcome.HOLDS, quantity, budget)
    return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=worst, growth_fit=worst_slope)


def check_mean_ergodic(
    op: ShiftOperatorSpec,
    budget: TruncationBudget | None = None,
    _power_bounded: Verdict | None = None,
    _montel: Verdict | None = None,
) -> Verdict:
    """Do the Cesaro means converge pointwise?

    Requires nonnegative weights (the available characterizations assume
    them).  Power boundedness on a Montel-certified space settles the
    question affirmatively; otherwise the averaged-sum conditions decide it
    on Montel-certified spaces, bracket it for 1 < p < inf, and provide only
    the necessary side elsewhere.  Forward shifts additionally need the
    normalised iterates to vanish per start index.
    """
    budget = budget or TruncationBudget()
    n2 = 2 * budget.n_max
    quantity = "Cesaro-mean convergence conditions"
    if not op.weights.is_nonnegative(n2 + 2):
        v = Verdict(Outcome.INCONCLUSIVE, quantity, budget)
        return v.with_note("signed weights: the averaged-sum characterizations require w_n >= 0")
    montel = _montel if _montel is not None else check_montel(op.space.matrix, budget)
    pb = _power_bounded if _power_bounded is not None else check_power_bounded(op, budget)
    if pb.holds and montel.holds:
        v = Verdict(Outcome.HOLDS, quantity, budget, certificates=dict(pb.certificates))
        return v.with_note("power bounded on a Montel-certified space: uniformly mean ergodic")
    limit_part: Verdict | None = None
    if op.kind is ShiftKind.FORWARD:
        limit_part = _forward_limit_verdict(op, budget, "normalised iterate vanishing")
        if limit_part.fails:
            return Verdict(
                Outcome.FAILS, quantity, budget,
                witness=limit_part.witness, growth_fit=limit_part.growth_fit,
            ).with_note("normalised forward iterates do not vanish")
    sums_plain = _cesaro_condition(op, budget, 1.0, "averaged weight-product/grade sums")
    p = op.space.p.value
    if 1.0 < p < INF:
        sufficient = _cesaro_condition(
            op, budget, p, "averaged weight-product/grade sums (p-powered sufficient form)"
        )
        if sufficient.holds and (limit_part is None or limit_part.holds):
            return Verdict(Outcome.HOLDS, quantity, budget,
                           certificates=dict(sufficient.certificates)).with_note(
                "sufficient condition for the reflexive range"
            )
        if sums_plain.fails:
            return Verdict(Outcome.FAILS, quantity, budget, witness=sums_plain.witness,
                           growth_fit=sums_plain.growth_fit).with_note("necessary condition fails")
        return Verdict(Outcome.INCONCLUSIVE, quantity, budget,
                       witness=sums_plain.witness).with_note(
            "between the sufficient and necessary conditions for 1 < p < inf"
        )
    if montel.holds:
        if sums_plain.fails:
            return Verdict(Outcome.FAILS, quantity, budget,
                           witness=sums_plain.witness, growth_fit=sums_plain.growth_fit)
        if sums_plain.holds and (limit_part is None or limit_part.holds):
            return Verdict(Outcome.HOLDS, quantity, budget,
                           certificates=dict(sums_plain.certificates))
        return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=sums_plain.witness)
    if sums_plain.fails:
        return Verdict(Outcome.FAILS, quantity, budget,
                       witness=sums_plain.witness, growth_fit=sums_plain.growth_fit).with_note(
            "necessary averaged-sum condition fails"
        )
    return Verdict(Outcome.INCONCLUSIVE, quantity, budget).with_note(
        "space not certified Montel: only necessary conditions are available"
    )


def check_montel(matrix: KoetheMatrix, budget: TruncationBudget | None = None) -> Verdict:
    """Heuristic sufficient test of the compact-grading (Montel) property.

    Looks for, per grade k, a higher grade l with a(n,k)/a(n,l) -> 0 along
    the full index sweep (block maxima decreasing below ``stability_tol``).
    Failure of this uniform-l heuristic is definite only when the tested
    ratios are constant in n; power-series grades hold by construction.
    """
    budget = budget or TruncationBudget()
    quantity = "grade-ratio decay"
    if getattr(matrix, "power_series", False):
        v = Verdict(Outcome.HOLDS, quantity, budget,
                    certificates={0: Certificate(0, 1, NEG_INF)})
        return v.with_note("power-series grading: compact grading holds by construction")
    n2 = 2 * budget.n_max
    cols = {k: matrix.log_column(k, n2) for k in range(budget.l_max + 1)}
    threshold = math.log(budget.stability_tol)
    certificates: dict[int, Certificate] = {}
    undecided: list[int] = []
    undecided_definite: list[bool] = []
    witness: Witness | None = None
    for k in range(budget.k_max + 1):
        certified = False
        constant_high = True
        for l in range(k + 1, budget.l_max + 1):
            ratio = cols[k] - cols[l]
            finite = ratio[np.isfinite(ratio)]
            top = float(ratio[n2 // 2 :].max(initial=NEG_INF))
            prev = float(ratio[n2 // 4 : n2 // 2].max(initial=NEG_INF))
            if top < threshold and top <= prev:
                certificates[k] = Certificate(k, l, top)
                certified = True
                break
            if len(finite) == 0 or np.ptp(finite) > 1e-12 or top < threshold:
                constant_high = False
        if not certified:
            undecided.append(k)
            undecided_definite.append(constant_high)
            if witness is None:
                witness = Witness(k=k, l=budget.l_max, n=n2 - 1,
                                  log_value=float(cols[k][-1] - cols[budget.l_max][-1]))
    if not undecided:
        return Verdict(Outcome.HOLDS, quantity, budget, certificates=certificates)
    if any(undecided_definite):
        return Verdict(Outcome.FAILS, quantity, budget, witness=witness,
                       certificates=certificates).with_note(
            "grade ratios constant in n and bounded away from zero"
        )
    return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=witness,
                   certificates=certificates).with_note(
        "uniform-l decay heuristic inconclusive; leaning towards failure but the "
        "subset quantifier cannot be swept"
    )


# ---------------------------------------------------------------------------
# power-series fast paths
# ---------------------------------------------------------------------------


def _require_tag(op: ShiftOperatorSpec) -> tuple[ExponentSequence, PowerSeriesType]:
    if op.space.power_series is None:
        raise PowerSeriesTagMissing("operator space carries no power-series tag")
    return op.space.power_series.alpha, op.space.power_series.type


def _weight_over_alpha_tail(op: ShiftOperatorSpec, budget: TruncationBudget) -> TailSweep:
    n2 = 2 * budget.n_max
    alpha, _ = _require_tag(op)
    a = alpha.values(n2)
    lw = op.weights.log_abs(n2)
    pos = a > 0
    ns = np.arange(n2, dtype=np.int64)[pos]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(lw[pos] == NEG_INF, NEG_INF, lw[pos] / a[pos])
    return _tail_sweep(ns + 1, vals, budget.n_max, budget)


def _alpha_ratio_estimate(alpha: ExponentSequence, n2: int) -> float:
    a = alpha.values(n2 + 1)
    pos = a[:-1] > 0
    if not pos.any():
        return INF
    ratios = a[1:][pos] / a[:-1][pos]
    return float(np.max(ratios[len(ratios) // 2 :]))


def check_continuity_power_series(
    op: ShiftOperatorSpec, budget: TruncationBudget | None = None
) -> Verdict:
    """Continuity on a power-series graded space via limsup ln|w_n| / alpha_n.

    Infinite type requires a finite upper trend of the ratio; finite type
    requires the trend to sit at or below zero.
    """
    budget = budget or TruncationBudget()
    alpha, type_ = _require_tag(op)
    tail = _weight_over_alpha_tail(op, budget)
    ratio = _alpha_ratio_estimate(alpha, 2 * budget.n_max)
    quantity = "log-weight over grading exponent"
    est = tail.est_full
    notes = [f"alpha step-ratio tail estimate: {ratio:.6g}"]
    wit = Witness(k=None, l=None, n=tail.arg_index, m=None, log_value=est)
    if type_ is PowerSeriesType.INFINITE:
        if est == INF or tail.rising:
            return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                           growth_fit=tail.block_slope, estimate=est, notes=notes)
        if tail.stable_estimate or est == NEG_INF:
            return Verdict(Outcome.HOLDS, quantity, budget, estimate=est, notes=notes,
                           certificates={0: Certificate(0, None, est)})
        return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=wit,
                       growth_fit=tail.block_slope, estimate=est, notes=notes)
    outcome = _bound_mode_outcome(tail, budget, strict=False)
    if outcome is Outcome.HOLDS:
        return Verdict(Outcome.HOLDS, quantity, budget, estimate=est, notes=notes,
                       certificates={0: Certificate(0, None, est)})
    if outcome is Outcome.FAILS:
        return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                       growth_fit=tail.block_slope, estimate=est, notes=notes)
    return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=wit, estimate=est, notes=notes)


def _per_iterate_tail_grid(
    op: ShiftOperatorSpec, budget: TruncationBudget, k_rate: int | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Free-index tail estimates of the normalised per-iterate log products.

    For each iterate count m: with ``k_rate`` None the quantity is
    (window log product)/alpha_{n+m}; otherwise it is
    (window log product + k_rate * alpha_{n+m})/alpha_n (start-normalised).
    Returns (ms, top_block_max, previous_block_max, base_budget_block_max).
    """
    alpha, _ = _require_tag(op)
    n2, m2 = 2 * budget.n_max, 2 * budget.m_max
    a = alpha.values(n2 + m2 + 2)
    W, Z, _ = op.weights.prefix_arrays(n2 + m2 + 2)
    ns = np.arange(n2, dtype=np.int64)
    ms = np.arange(1, m2 + 1, dtype=np.int64)
    est = np.full(m2, NEG_INF)
    prev = np.full(m2, NEG_INF)
    base = np.full(m2, NEG_INF)
    top_sel = ns >= n2 // 2
    prev_sel = (ns >= n2 // 4) & (ns < n2 // 2)
    base_sel = (ns >= budget.n_max // 2) & (ns < budget.n_max)
    for i, m in enumerate(ms):
        if op.kind is ShiftKind.BACKWARD:
            win = np.where((Z[ns + m] - Z[ns]) > 0, NEG_INF, W[ns + m] - W[ns])
        else:
            win = np.where((Z[ns + m + 1] - Z[ns + 1]) > 0, NEG_INF, W[ns + m + 1] - W[ns + 1])
        if k_rate is None:
            denom = a[ns + m]
            num = win
        else:
            denom = a[ns]
            num = np.where(win == NEG_INF, NEG_INF, win + k_rate * a[ns + m])
        with np.errstate(invalid="ignore"):
            vals = np.where((denom > 0) & (num > NEG_INF), num / np.where(denom > 0, denom, 1.0),
                            NEG_INF)
        est[i] = float(vals[top_sel].max(initial=NEG_INF))
        prev[i] = float(vals[prev_sel].max(initial=NEG_INF))
        base[i] = float(vals[base_sel].max(initial=NEG_INF))
    return ms, est, prev, base


@dataclass
class _FamilyStats:
    m_slope: float
    m_growth: bool
    n_stable_all: bool
    sup_est: float
    arg_m: int | None
    has_inf: bool


def _family_analysis(
    ms: np.ndarray, est: np.ndarray, prev: np.ndarray, base: np.ndarray, budget: TruncationBudget
) -> _FamilyStats:
    n_stable = np.array(
        [_stable(e, b, budget.stability_tol) for e, b in zip(est, base)]
    )
    hi = len(ms)
    tail = slice(hi // 4, hi)
    m_slope = _fit_slope(ms[tail], est[tail]) if hi >= 8 else 0.0
    # growth that weakens when the free-index grid is refined is a truncation
    # transient, not family divergence: decaying transients lose >= a quarter
    # of their slope per grid doubling, genuine growth keeps it
    m_slope_base = _fit_slope(ms[tail], base[tail]) if hi >= 8 else 0.0
    m_growth = m_slope > budget.growth_tol and m_slope >= 0.8 * m_slope_base
    return _FamilyStats(
        m_slope=m_slope,
        m_growth=m_growth,
        n_stable_all=bool(n_stable.all()),
        sup_est=float(np.max(est, initial=NEG_INF)),
        arg_m=int(ms[int(np.argmax(est))]) if len(ms) else None,
        has_inf=bool(np.isposinf(est).any()),
    )


def check_topologizable_power_series(
    op: ShiftOperatorSpec, budget: TruncationBudget | None = None
) -> Verdict:
    """Iterate-family growth on power-series graded spaces.

    Per iterate count m the normalised log weight product is estimated along
    the free-index tail; the family verdict follows from the growth of those
    estimates in m.  When the single-step trend ln|w_n|/alpha_n sits at or
    below zero, every per-iterate tail limit is <= 0 as well, which settles
    the slow transients a bare grid cannot resolve.
    """
    budget = budget or TruncationBudget()
    alpha, type_ = _require_tag(op)
    n2 = 2 * budget.n_max
    v_tail = _weight_over_alpha_tail(op, budget)
    v_est = v_tail.est_full
    quantity = "per-iterate normalised log weight products"
    backward = op.kind is ShiftKind.BACKWARD
    notes = [f"single-step trend estimate: {v_est:.6g}"]
    if (not backward) and type_ is PowerSeriesType.INFINITE:
        modes: list[int | None] = list(range(budget.k_max + 1))
    else:
        modes = [None]
    certificates: dict[int, Certificate] = {}
    outcome = Outcome.HOLDS
    open_witness: Witness | None = None
    open_slope: float | None = None
    bound_mode = type_ is PowerSeriesType.FINITE
    for k_rate in modes:
        ms, est, prev, base = _per_iterate_tail_grid(op, budget, k_rate)
        fam = _family_analysis(ms, est, prev, base, budget)
        k_label = k_rate if k_rate is not None else 0
        # in bound mode a family rising within negative territory may still
        # respect the zero bound, so growth alone is not decisive there
        grown_past_bound = not bound_mode or fam.sup_est > budget.stability_tol
        if fam.has_inf or (fam.m_growth and grown_past_bound):
            wit = Witness(k=k_label, l=None, n=None, m=fam.arg_m, log_value=fam.sup_est)
            return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                           growth_fit=fam.m_slope, estimate=fam.sup_est, notes=notes)
        if bound_mode:
            if v_est > budget.stability_tol and not v_tail.falling:
                wit = Witness(k=k_label, l=None, n=v_tail.arg_index, m=1, log_value=v_est)
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                               growth_fit=v_tail.block_slope, estimate=v_est, notes=notes)
            if v_est <= budget.stability_tol:
                certificates[k_label] = Certificate(k_label, None, fam.sup_est)
            else:
                outcome = Outcome.INCONCLUSIVE
                open_witness = Witness(k=k_label, l=None, n=None, m=fam.arg_m,
                                       log_value=fam.sup_est)
        else:
            if k_rate is None:
                ok = v_est <= budget.stability_tol or fam.n_stable_all
            else:
                ratio = _alpha_ratio_estimate(alpha, n2)
                ok = fam.n_stable_all or (
                    v_est <= budget.stability_tol and ratio <= 1.0 + budget.stability_tol
                )
            if ok:
                certificates[k_label] = Certificate(k_label, None, fam.sup_est)
            else:
                outcome = Outcome.INCONCLUSIVE
                open_witness = Witness(k=k_label, l=None, n=None, m=fam.arg_m,
                                       log_value=fam.sup_est)
                open_slope = fam.m_slope
    if backward and bound_mode and outcome is Outcome.HOLDS:
        a = alpha.values(n2 + 1)
        incr = np.diff(a)
        half = len(incr) // 2
        incr_top = float(incr[half:].max(initial=0.0))
        incr_prev = float(incr[half // 2 : half].max(initial=0.0))
        if incr_top > incr_prev + budget.stability_tol * max(1.0, incr_prev):
            notes.append(
                "necessary condition satisfied; the bounded-exponent-increment side "
                "condition is not established, so sufficiency stays open"
            )
            return Verdict(Outcome.INCONCLUSIVE, quantity, budget, estimate=v_est, notes=notes)
        notes.append(f"exponent increments bounded on the sweep (max {incr_top:.6g})")
    return Verdict(outcome, quantity, budget, witness=open_witness, growth_fit=open_slope,
                   certificates=certificates, estimate=v_est, notes=notes)


def _forward_end_normalised_decay(
    op: ShiftOperatorSpec, budget: TruncationBudget
) -> tuple[bool, bool, Witness | None]:
    """Trend of end-normalised forward log products at small start indices.

    Returns (to_minus_inf, refuted, witness): decay to -inf certifies the
    unbounded damping the start-normalised joint condition needs for every
    grade rate; a finite stable or rising trend refutes it.
    """
    alpha, _ = _require_tag(op)
    n2, m2 = 2 * budget.n_max, 2 * budget.m_max
    d_hi = n2 + m2
    a = alpha.values(d_hi + 2)
    W, Z, _ = op.weights.prefix_arrays(d_hi + 2)
    all_down = True
    refuted = False
    wit: Witness | None = None
    for n in range(min(8, budget.k_max) + 1):
        ms = np.array(_dyadic(d_hi - n - 1), dtype=np.int64)
        if len(ms) < 4:
            continue
        win = np.where((Z[n + ms + 1] - Z[n + 1]) > 0, NEG_INF, W[n + ms + 1] - W[n + 1])
        denom = a[n + ms]
        with np.errstate(invalid="ignore"):
            vals = np.where((denom > 0) & (win > NEG_INF),
                            win / np.where(denom > 0, denom, 1.0), NEG_INF)
        finite = np.isfinite(vals)
        if int(finite.sum()) < 4:
            continue
        slope = _fit_slope(ms[finite], vals[finite])
        top = float(vals[finite][-1])
        if slope <= -budget.growth_tol or top <= -abs(LOG_NEGLIGIBLE):
            continue
        all_down = False
        refuted = True
        if wit is None:
            wit = Witness(k=None, l=None, n=n, m=int(ms[finite][-1]), log_value=top)
    return all_down, refuted, wit


def check_power_bounded_power_series(
    op: ShiftOperatorSpec, budget: TruncationBudget | None = None
) -> Verdict:
    """Uniform iterate bounds on power-series graded spaces.

    Backward/infinite: joint normalised log products must show a finite
    stable trend.  Forward/infinite: the rate-zero start-normalised products
    must stay bounded while the end-normalised products decay to -inf.
    Backward/finite: grade-deflated limsup along n+m strictly below zero.
    Forward/finite: end-normalised limsup along n+m at or below zero.
    """
    budget = budget or TruncationBudget()
    alpha, type_ = _require_tag(op)
    if float(alpha.values(1)[0]) <= 0.0:
        raise PowerSeriesPrecondition(
            "the power-series iterate-bound criterion requires alpha_0 > 0"
        )
    n2, m2 = 2 * budget.n_max, 2 * budget.m_max
    d2 = n2 + m2
    a = alpha.values(d2 + 2)
    W, _, _ = op.weights.prefix_arrays(d2 + 2)
    signs = op.weights.signs(d2 + 2)
    quantity = "joint normalised log weight products"
    backward = op.kind is ShiftKind.BACKWARD
    ds = np.arange(1, d2 + 1, dtype=np.int64)
    lz = _last_zero_before(signs)

    if backward and type_ is PowerSeriesType.INFINITE:
        lo = np.maximum(np.zeros_like(ds), lz[ds] + 1)
        hi = ds - 1
        peak = _sliding_extreme(-W[: d2 + 1], lo, hi, maximize=True)
        with np.errstate(invalid="ignore"):
            diag = np.where(peak == NEG_INF, NEG_INF, (W[ds] + peak) / a[ds])
        sweep = _sup_sweep(ds, diag, budget.n_max + budget.m_max, budget)
        wit = Witness(k=None, l=None, n=None, m=int(ds[sweep.arg_index]), log_value=sweep.sup_full)
        if sweep.diverging:
            return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                           growth_fit=sweep.slope, estimate=sweep.sup_full)
        if sweep.certifies:
            return Verdict(Outcome.HOLDS, quantity, budget, estimate=sweep.sup_full,
                           certificates={0: Certificate(0, None, sweep.sup_full)})
        return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=wit,
                       growth_fit=sweep.slope, estimate=sweep.sup_full)

    if (not backward) and type_ is PowerSeriesType.INFINITE:
        # segmented suffix max of W[d+1] over window ends d reachable from n
        R = np.full(d2 + 2, NEG_INF)
        for j in range(d2, 0, -1):
            if signs[j] == 0:
                R[j] = NEG_INF
            else:
                R[j] = max(W[j + 1], R[j + 1])
        ns = np.arange(0, n2, dtype=np.int64)
        pos = a[ns] > 0
        with np.errstate(invalid="ignore"):
            q0 = np.where(pos & (R[ns + 1] > NEG_INF),
                          (R[ns + 1] - W[ns + 1]) / np.where(pos, a[ns], 1.0), NEG_INF)
        sweep = _sup_sweep(ns + 1, q0, budget.n_max, budget)
        down, refuted, corner_wit = _forward_end_normalised_decay(op, budget)
        if sweep.diverging or refuted:
            wit = corner_wit or Witness(k=None, l=None, n=sweep.arg_index, m=None,
                                        log_value=sweep.sup_full)
            v = Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                        growth_fit=sweep.slope, estimate=sweep.sup_full)
            return v.with_note(
                "end-normalised products do not decay" if refuted else "joint trend grows"
            )
        if sweep.certifies and down:
            return Verdict(Outcome.HOLDS, quantity, budget, estimate=sweep.sup_full,
                           certificates={0: Certificate(0, None, sweep.sup_full)})
        return Verdict(Outcome.INCONCLUSIVE, quantity, budget, estimate=sweep.sup_full)

    if backward:
        certificates: dict[int, Certificate] = {}
        est_worst = NEG_INF
        for k in range(budget.k_max + 1):
            g = W[: d2 + 1] + a[: d2 + 1] / (k + 1.0)
            lo = np.maximum(np.zeros_like(ds), lz[ds] + 1)
            hi = ds - 1
            trough = _sliding_extreme(g, lo, hi, maximize=False)
            with np.errstate(invalid="ignore"):
                diag = np.where(trough == NEG_INF, NEG_INF, (W[ds] - trough) / a[ds])
            tail = _tail_sweep(ds, diag, budget.n_max + budget.m_max, budget)
            sub = _bound_mode_outcome(tail, budget, strict=True)
            wit = Witness(k=k, l=None, n=None, m=int(ds[tail.arg_index]), log_value=tail.est_full)
            if sub is Outcome.FAILS:
                return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                               growth_fit=tail.block_slope, estimate=tail.est_full)
            if sub is Outcome.INCONCLUSIVE:
                return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=wit,
                               estimate=tail.est_full)
            certificates[k] = Certificate(k, None, tail.est_full)
            est_worst = max(est_worst, tail.est_full)
        return Verdict(Outcome.HOLDS, quantity, budget, certificates=certificates,
                       estimate=est_worst)

    lo = np.maximum(np.ones_like(ds), lz[ds + 1] + 1)
    hi = ds
    trough = _sliding_extreme(W[: d2 + 2], lo, hi, maximize=False)
    with np.errstate(invalid="ignore"):
        diag = np.where(trough == NEG_INF, NEG_INF, (W[ds + 1] - trough) / a[ds])
    tail = _tail_sweep(ds, diag, budget.n_max + budget.m_max, budget)
    sub = _bound_mode_outcome(tail, budget, strict=False)
    wit = Witness(k=None, l=None, n=None, m=int(ds[tail.arg_index]), log_value=tail.est_full)
    if sub is Outcome.HOLDS:
        return Verdict(Outcome.HOLDS, quantity, budget, estimate=tail.est_full,
                       certificates={0: Certificate(0, None, tail.est_full)})
    if sub is Outcome.FAILS:
        return Verdict(Outcome.FAILS, quantity, budget, witness=wit,
                       growth_fit=tail.block_slope, estimate=tail.est_full)
    return Verdict(Outcome.INCONCLUSIVE, quantity, budget, witness=wit, estimate=tail.est_full)


@dataclass(frozen=True)
class LimsupEstimate:
    estimate: float
    slope: float
    argmax: tuple[int, int]

    def __float__(self) -> float:
        return self.estimate


def limsup_along_n_plus_m(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    budget: TruncationBudget | None = None,
) -> LimsupEstimate:
    """Tail estimate of inf_t sup_{n+m >= t} f(n, m) on the triangle n+m <= N+M.

    ``f`` must accept index arrays (n >= 0, m >= 1).  The estimate is the
    maximum of the anti-diagonal maxima over the top dyadic block of
    diagonals, with the slope across the last two blocks as stability
    evidence.
    """
    budget = budget or TruncationBudget()
    d_hi = budget.n_max + budget.m_max
    diag = np.full(d_hi + 1, NEG_INF)
    args: list[tuple[int, int]] = [(0, 0)] * (d_hi + 1)
    for d in range(1, d_hi + 1):
        ns = np.arange(0, d, dtype=np.int64)
        vals = np.asarray(f(ns, d - ns), dtype=float)
        i = int(np.argmax(vals))
        diag[d] = float(vals[i])
        args[d] = (int(ns[i]), int(d - ns[i]))
    ds = np.arange(1, d_hi + 1)
    tail = _tail_sweep(ds, diag[1:], d_hi, budget)
    d_star = int(ds[tail.arg_index])
    return LimsupEstimate(tail.est_full, tail.block_slope, args[d_star])


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------


def full_report(op: ShiftOperatorSpec, budget: TruncationBudget | None = None) -> PropertyReport:
    """Run all applicable checkers on one operator and bundle the verdicts."""
    budget = budget or TruncationBudget()
    montel = check_montel(op.space.matrix, budget)
    continuity = check_continuity(op, budget)
    topologizable = check_topologizable(op, budget, _continuity=continuity)
    power_bounded = check_power_bounded(op, budget)
    cesaro = check_cesaro_bounded(op, budget, _power_bounded=power_bounded)
    mean_ergodic = check_mean_ergodic(op, budget, _power_bounded=power_bounded, _montel=montel)
    return PropertyReport(
        continuity=continuity,
        topologizability=topologizable,
        power_boundedness=power_bounded,
        cesaro_boundedness=cesaro,
        mean_ergodicity=mean_ergodic,
        montel_space=montel,
    )
