"""Built-in classical operators with analytic window products and expected verdicts.

Eight shift conjugates of classical operators on function spaces: the
difference-quotient operator and the differentiation operator on entire
functions and on the disk (backward shifts with weights 1 and n+1 on the
linear-exponent spaces of infinite and finite type), the Volterra integration
operator (forward shift with weights 1/max(1,n) on the same spaces), and the
ladder pair on the rapidly-decreasing space (backward sqrt(n+1) and forward
sqrt(n) shifts on the infinite-type space with logarithmic exponents).

The analytic window products go through lgamma, which serves as an
independent check on the prefix-sum machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .checkers import Outcome, PropertyReport, TruncationBudget, full_report
from .shifts import ShiftKind, ShiftOperatorSpec
from .spaces import ExponentSequence, WeightSequence, make_power_series_space


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    display_name: str
    op: ShiftOperatorSpec
    expected: dict[str, Outcome]
    # closed form of ln|prod over the shift's m-window at start n|
    analytic_log_product: "AnalyticLogProduct"
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class AnalyticLogProduct:
    """ln|window product| = scale * (lgamma(n+m+1) - lgamma(n+1))."""

    scale: float

    def __call__(self, n: np.ndarray | int, m: np.ndarray | int) -> np.ndarray | float:
        n = np.asarray(n, dtype=float)
        m = np.asarray(m, dtype=float)
        out = self.scale * (gammaln(n + m + 1.0) - gammaln(n + 1.0))
        return float(out) if out.ndim == 0 else out


_EXPECT_ALL_GOOD = {
    "continuity": Outcome.HOLDS,
    "topologizability": Outcome.HOLDS,
    "power_boundedness": Outcome.HOLDS,
    "cesaro_boundedness": Outcome.HOLDS,
    "mean_ergodicity": Outcome.HOLDS,
    "montel_space": Outcome.HOLDS,
}

_EXPECT_DIFFERENTIATION = {
    "continuity": Outcome.HOLDS,
    "topologizability": Outcome.HOLDS,
    "power_boundedness": Outcome.FAILS,
    "cesaro_boundedness": Outcome.FAILS,
    "mean_ergodicity": Outcome.FAILS,
    "montel_space": Outcome.HOLDS,
}

_EXPECT_LADDER = {
    "continuity": Outcome.HOLDS,
    "topologizability": Outcome.FAILS,
    "power_boundedness": Outcome.FAILS,
    "cesaro_boundedness": Outcome.FAILS,
    "mean_ergodicity": Outcome.FAILS,
    "montel_space": Outcome.HOLDS,
}

_LADDER_NOTE = (
    "some summaries label this sqrt-weighted shift pair as tameable; the explicit "
    "window-product growth (about (m/2)*log factors per iterate) forces the opposite "
    "verdict, which these expectations encode"
)


def catalog_entries() -> list[CatalogEntry]:
    """The eight built-in operators, in a fixed order."""
    linear = ExponentSequence.linear
    log = ExponentSequence.logarithmic
    entries = [
        CatalogEntry(
            name="delta0-infinite",
            display_name="difference quotient on entire functions",
            op=ShiftOperatorSpec(
                ShiftKind.BACKWARD, WeightSequence.constant(1.0),
                make_power_series_space(linear(), "infinite", 1.0),
            ),
            expected=dict(_EXPECT_ALL_GOOD),
            analytic_log_product=AnalyticLogProduct(0.0),
        ),
        CatalogEntry(
            name="delta0-finite",
            display_name="difference quotient on the disk",
            op=ShiftOperatorSpec(
                ShiftKind.BACKWARD, WeightSequence.constant(1.0),
                make_power_series_space(linear(), "finite", 1.0),
            ),
            expected=dict(_EXPECT_ALL_GOOD),
            analytic_log_product=AnalyticLogProduct(0.0),
        ),
        CatalogEntry(
            name="volterra-infinite",
            display_name="Volterra integration on entire functions",
            op=ShiftOperatorSpec(
                ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(),
                make_power_series_space(linear(), "infinite", 1.0),
            ),
            expected=dict(_EXPECT_ALL_GOOD),
            analytic_log_product=AnalyticLogProduct(-1.0),
        ),
        CatalogEntry(
            name="volterra-finite",
            display_name="Volterra integration on the disk",
            op=ShiftOperatorSpec(
                ShiftKind.FORWARD, WeightSequence.reciprocal_factorial(),
                make_power_series_space(linear(), "finite", 1.0),
            ),
            expected=dict(_EXPECT_ALL_GOOD),
            analytic_log_product=AnalyticLogProduct(-1.0),
        ),
        CatalogEntry(
            name="ddz-infinite",
            display_name="differentiation on entire functions",
            op=ShiftOperatorSpec(
                ShiftKind.BACKWARD, WeightSequence.polynomial(1.0),
                make_power_series_space(linear(), "infinite", 1.0),
            ),
            expected=dict(_EXPECT_DIFFERENTIATION),
            analytic_log_product=AnalyticLogProduct(1.0),
        ),
        CatalogEntry(
            name="ddz-finite",
            display_name="differentiation on the disk",
            op=ShiftOperatorSpec(
                ShiftKind.BACKWARD, WeightSequence.polynomial(1.0),
                make_power_series_space(linear(), "finite", 1.0),
            ),
            expected=dict(_EXPECT_DIFFERENTIATION),
            analytic_log_product=AnalyticLogProduct(1.0),
        ),
        CatalogEntry(
            name="sqrt-backward-s",
            display_name="annihilation-like backward sqrt-shift on the rapidly-decreasing space",
            op=ShiftOperatorSpec(
                ShiftKind.BACKWARD, WeightSequence.sqrt_shifted(),
                make_power_series_space(log(), "infinite", 1.0),
            ),
            expected=dict(_EXPECT_LADDER),
            analytic_log_product=AnalyticLogProduct(0.5),
            notes=(_LADDER_NOTE,),
        ),
        CatalogEntry(
            name="sqrt-forward-s",
            display_name="creation-like forward sqrt-shift on the rapidly-decreasing space",
            op=ShiftOperatorSpec(
                ShiftKind.FORWARD, WeightSequence.sqrt(),
                make_power_series_space(log(), "infinite", 1.0),
            ),
            expected=dict(_EXPECT_LADDER),
            analytic_log_product=AnalyticLogProduct(0.5),
            notes=(_LADDER_NOTE,),
        ),
    ]
    return entries


def entry_by_name(name: str) -> CatalogEntry:
    for entry in catalog_entries():
        if entry.name == name:
            return entry
    known = ", ".join(e.name for e in catalog_entries())
    raise KeyError(f"unknown catalog entry '{name}'; known entries: {known}")


def analytic_log_product(entry: CatalogEntry, n: int, m: int) -> float:
    """ln|product over the m-window starting at n| for the entry's shift kind.

    Backward entries use the window [n, n+m); forward entries use (n, n+m].
    Both reduce to a multiple of lgamma(n+m+1) - lgamma(n+1).
    """
    if n < 0 or m < 1:
        raise ValueError("need n >= 0 and m >= 1")
    return float(entry.analytic_log_product(n, m))


def prefix_log_product(entry: CatalogEntry, n: int, m: int) -> float:
    """Same window product from the weight prefix sums (the checked route)."""
    if entry.op.kind is ShiftKind.BACKWARD:
        return entry.op.weights.window_log_product(n, n + m).log_magnitude
    return entry.op.weights.window_log_product(n + 1, n + m + 1).log_magnitude


@dataclass
class EntryComparison:
    entry: CatalogEntry
    report: PropertyReport
    contradictions: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.contradictions

    def to_json_dict(self) -> dict:
        return {
            "entry": self.entry.name,
            "display_name": self.entry.display_name,
            "contradictions": list(self.contradictions),
            "warnings": list(self.warnings),
            "expected": {k: v.value for k, v in sorted(self.entry.expected.items())},
            "report": self.report.to_json_dict(),
        }


def verify_entry(entry: CatalogEntry, budget: TruncationBudget | None = None) -> EntryComparison:
    """Diff the numeric report against the entry's expected outcomes.

    A definite numeric verdict contradicting the expected one is a
    contradiction; an Inconclusive verdict against a definite expectation is
    only a warning.
    """
    budget = budget or TruncationBudget()
    report = full_report(entry.op, budget)
    comparison = EntryComparison(entry=entry, report=report)
    for prop, expected in entry.expected.items():
        got = getattr(report, prop).outcome
        if got is Outcome.INCONCLUSIVE:
            comparison.warnings.append(f"{prop}: expected {expected.value}, got Inconclusive")
        elif got is not expected:
            comparison.contradictions.append(f"{prop}: expected {expected.value}, got {got.value}")
    return comparison
