"""Sequence spaces in log scale.

Weighted shifts on echelon spaces involve matrix entries like exp(k*(n+1))
that overflow floats long before the index budgets are exhausted, so every
sequence object here hands out natural-log magnitudes plus integer signs.
The convention throughout is ln(0) = -inf, sign(0) = 0, and x at negative
indices is 0.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

NEG_INF = float("-inf")

# ln(1e-12): below this a log-scale quantity is treated as vanished.
LOG_NEGLIGIBLE = math.log(1e-12)


class ShiftLabError(Exception):
    """Base class for user-facing errors."""


class ValidationError(ShiftLabError):
    """A sequence or matrix violated its structural requirements."""


@dataclass(frozen=True)
class LogReal:
    """A real number stored as (ln|x|, sign) with sign in {-1, 0, +1}."""

    log_magnitude: float
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValidationError(f"sign must be -1, 0 or +1, got {self.sign}")
        if (self.sign == 0) != (self.log_magnitude == NEG_INF):
            raise ValidationError("sign 0 must pair with log magnitude -inf and vice versa")

    @staticmethod
    def from_float(x: float) -> "LogReal":
        if x == 0.0:
            return LOG_ZERO
        return LogReal(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogReal") -> "LogReal":
        s = self.sign * other.sign
        if s == 0:
            return LOG_ZERO
        return LogReal(self.log_magnitude + other.log_magnitude, s)


LOG_ZERO = LogReal(NEG_INF, 0)
LOG_ONE = LogReal(0.0, 1)


def _as_index_array(n_hi: int) -> np.ndarray:
    return np.arange(n_hi, dtype=np.int64)


class WeightSequence:
    """Signed weight sequence with O(1) window-product queries.

    ``log_fn(ns)`` must return ``(log_abs, sign)`` arrays for the requested
    indices.  Prefix sums of ln|w_j| are cached (zero weights excluded from
    the sum, tracked by a separate zero count) so the product over any window
    [a, b) is one subtraction; the product is zero iff the window contains a
    zero weight.
    """

    def __init__(
        self,
        log_fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
        name: str = "custom",
        max_index: int | None = None,
    ) -> None:
        self._log_fn = log_fn
        self.name = name
        self.max_index = max_index
        self._log_abs = np.empty(0)
        self._sign = np.empty(0, dtype=np.int64)
        # prefix arrays have length len(values)+1
        self._prefix_log = np.zeros(1)
        self._prefix_zero = np.zeros(1, dtype=np.int64)
        self._prefix_neg = np.zeros(1, dtype=np.int64)
        self._lock = threading.Lock()

    def _ensure(self, n_hi: int) -> None:
        if n_hi <= len(self._log_abs):
            return
        with self._lock:
            self._ensure_locked(n_hi)

    def _ensure_locked(self, n_hi: int) -> None:
        have = len(self._log_abs)
        if n_hi <= have:
            return
        if self.max_index is not None and n_hi > self.max_index + 1:
            raise ValidationError(
                f"weight table '{self.name}' covers indices 0..{self.max_index}, "
                f"but index {n_hi - 1} was requested; extrapolation is not allowed"
            )
        target = max(n_hi, 2 * have, 64)
        if self.max_index is not None:
            target = min(target, self.max_index + 1)
        ns = np.arange(have, target, dtype=np.int64)
        log_abs, sign = self._log_fn(ns)
        log_abs = np.asarray(log_abs, dtype=float)
        sign = np.asarray(sign, dtype=np.int64)
        self._log_abs = np.concatenate([self._log_abs, log_abs])
        self._sign = np.concatenate([self._sign, sign])
        contributions = np.where(sign == 0, 0.0, log_abs)
        self._prefix_log = np.concatenate(
            [self._prefix_log, self._prefix_log[-1] + np.cumsum(contributions)]
        )
        self._prefix_zero = np.concatenate(
            [self._prefix_zero, self._prefix_zero[-1] + np.cumsum(sign == 0)]
        )
        self._prefix_neg = np.concatenate(
            [self._prefix_neg, self._prefix_neg[-1] + np.cumsum(sign < 0)]
        )

    def log_abs(self, n_hi: int) -> np.ndarray:
        self._ensure(n_hi)
        return self._log_abs[:n_hi]

    def signs(self, n_hi: int) -> np.ndarray:
        self._ensure(n_hi)
        return self._sign[:n_hi]

    def values(self, n_hi: int) -> np.ndarray:
        """Weights in linear scale; overflow saturates to +-inf."""
        self._ensure(n_hi)
        with np.errstate(over="ignore"):
            return self._sign[:n_hi] * np.exp(self._log_abs[:n_hi])

    def prefix_arrays(self, n_hi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(W, Z, G): prefix log-sum over nonzero weights, zero count, negative count."""
        self._ensure(n_hi)
        return (
            self._prefix_log[: n_hi + 1],
            self._prefix_zero[: n_hi + 1],
            self._prefix_neg[: n_hi + 1],
        )

    def window_log(self, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Log magnitude and sign of prod_{j in [a, b)} w_j, elementwise.

        Empty windows (a >= b) give the empty product 1.
        """
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        hi = int(b.max(initial=0))
        W, Z, G = self.prefix_arrays(hi)
        log = W[b] - W[a]
        sign = np.where((G[b] - G[a]) % 2 == 0, 1, -1)
        has_zero = (Z[b] - Z[a]) > 0
        log = np.where(has_zero, NEG_INF, log)
        sign = np.where(has_zero, 0, sign)
        empty = a >= b
        log = np.where(empty, 0.0, log)
        sign = np.where(empty, 1, sign)
        return log, sign

    def window_log_product(self, a: int, b: int) -> LogReal:
        log, sign = self.window_log(np.array([a]), np.array([b]))
        if sign[0] == 0:
            return LOG_ZERO
        return LogReal(float(log[0]), int(sign[0]))

    def is_nonnegative(self, n_hi: int) -> bool:
        return bool(np.all(self.signs(n_hi) >= 0))

    def is_identically_zero(self, n_hi: int) -> bool:
        return bool(np.all(self.signs(n_hi) == 0))

    def max_abs_leq_one(self, n_hi: int) -> bool:
        return bool(np.all(self.log_abs(n_hi) <= 1e-15))

    # ---- constructors -------------------------------------------------

    @staticmethod
    def from_values(fn: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> "WeightSequence":
        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            vals = np.asarray(fn(ns), dtype=float)
            sign = np.sign(vals).astype(np.int64)
            with np.errstate(divide="ignore"):
                log_abs = np.where(vals == 0.0, NEG_INF, np.log(np.abs(vals)))
            return log_abs, sign

        return WeightSequence(log_fn, name=name)

    @staticmethod
    def constant(c: float) -> "WeightSequence":
        return WeightSequence.from_values(
            lambda ns: np.full(len(ns), float(c)), name=f"constant({c})"
        )

    @staticmethod
    def polynomial(theta: float) -> "WeightSequence":
        """w_n = (n+1)**theta."""

        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return theta * np.log(ns + 1.0), np.ones(len(ns), dtype=np.int64)

        return WeightSequence(log_fn, name=f"polynomial({theta})")

    @staticmethod
    def sqrt_shifted() -> "WeightSequence":
        """w_n = sqrt(n+1)."""

        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return 0.5 * np.log(ns + 1.0), np.ones(len(ns), dtype=np.int64)

        return WeightSequence(log_fn, name="sqrt-shifted")

    @staticmethod
    def sqrt() -> "WeightSequence":
        """w_n = sqrt(n); w_0 = 0."""

        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            with np.errstate(divide="ignore"):
                log_abs = np.where(ns == 0, NEG_INF, 0.5 * np.log(np.maximum(ns, 1)))
            sign = np.where(ns == 0, 0, 1).astype(np.int64)
            return log_abs, sign

        return WeightSequence(log_fn, name="sqrt")

    @staticmethod
    def reciprocal_factorial() -> "WeightSequence":
        """w_n = 1 / max(1, n)."""

        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return -np.log(np.maximum(ns, 1).astype(float)), np.ones(len(ns), dtype=np.int64)

        return WeightSequence(log_fn, name="reciprocal-factorial")

    @staticmethod
    def exp_of_alpha(gamma: float, alpha: "ExponentSequence") -> "WeightSequence":
        """w_n = exp(gamma * alpha_n), supplied directly in log scale."""

        def log_fn(ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            hi = int(ns.max(initial=-1)) + 1
            vals = alpha.values(hi)[ns]
            return gamma * vals, np.ones(len(ns), dtype=np.int64)

        return WeightSequence(log_fn, name=f"exp-alpha({gamma})")

    @staticmethod
    def from_table(values: Sequence[float], name: str = "table") -> "WeightSequence":
        arr = np.asarray(list(values), dtype=float)

        def fn(ns: np.ndarray) -> np.ndarray:
            return arr[ns]

        ws = WeightSequence.from_values(fn, name=name)
        ws.max_index = len(arr) - 1
        return ws


class ExponentSequence:
    """Nondecreasing nonnegative sequence tending to infinity.

    Grading exponent for power series spaces.  Growth is only checked on the
    sampled prefix (alpha_{2N} > alpha_N); table-backed sequences refuse to
    extrapolate past their last entry.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        name: str = "custom",
        max_index: int | None = None,
    ) -> None:
        self._fn = fn
        self.name = name
        self.max_index = max_index
        self._cache = np.empty(0)
        self._lock = threading.Lock()

    def values(self, n_hi: int) -> np.ndarray:
        have = len(self._cache)
        if n_hi > have:
            if self.max_index is not None and n_hi > self.max_index + 1:
                raise ValidationError(
                    f"exponent table '{self.name}' covers indices 0..{self.max_index}, "
                    f"but index {n_hi - 1} was requested; extrapolation is not allowed"
                )
            target = max(n_hi, 2 * have, 64)
            if self.max_index is not None:
                target = min(target, self.max_index + 1)
            with self._lock:
                have = len(self._cache)
                if n_hi > have:
                    ns = np.arange(have, target, dtype=np.int64)
                    self._cache = np.concatenate(
                        [self._cache, np.asarray(self._fn(ns), dtype=float)]
                    )
        return self._cache[:n_hi]

    def validate_sample(self, n_probe: int = 64) -> None:
        if self.max_index is not None:
            n_probe = min(n_probe, (self.max_index + 1) // 2)
        vals = self.values(2 * n_probe)
        if np.any(vals < 0):
            raise ValidationError(f"exponent sequence '{self.name}' has negative entries")
        if np.any(np.diff(vals) < 0):
            raise ValidationError(f"exponent sequence '{self.name}' is not monotonically increasing")
        if not vals[2 * n_probe - 1] > vals[n_probe - 1]:
            raise ValidationError(
                f"exponent sequence '{self.name}' shows no growth on the sampled prefix"
            )

    @staticmethod
    def linear() -> "ExponentSequence":
        return ExponentSequence(lambda ns: ns + 1.0, name="linear")

    @staticmethod
    def logarithmic() -> "ExponentSequence":
        return ExponentSequence(lambda ns: np.log(ns + 1.0), name="logarithmic")

    @staticmethod
    def power(theta: float) -> "ExponentSequence":
        return ExponentSequence(lambda ns: (ns + 1.0) ** theta, name=f"power({theta})")

    @staticmethod
    def from_table(values: Sequence[float], name: str = "table") -> "ExponentSequence":
        arr = np.asarray(list(values), dtype=float)
        seq = ExponentSequence(lambda ns: arr[ns], name=name, max_index=len(arr) - 1)
        return seq

    @staticmethod
    def builtin(name: str, theta: float | None = None) -> "ExponentSequence":
        if name == "linear":
            return ExponentSequence.linear()
        if name == "logarithmic":
            return ExponentSequence.logarithmic()
        if name == "power":
            if theta is None:
                raise ValidationError("power exponent family needs a theta parameter")
            return ExponentSequence.power(theta)
        raise ValidationError(f"unknown exponent family '{name}'")


class KoetheMatrix:
    """Grading matrix a_{n,k} >= 0, nondecreasing in k, stored as ln a.

    ``log_fn(ns, k)`` returns ln a_{n,k} for an index array (−inf encodes a
    zero entry).  Columns are cached per k.
    """

    K_PROBE = 12

    def __init__(
        self,
        log_fn: Callable[[np.ndarray, int], np.ndarray],
        name: str = "custom",
        columns_increasing_in_n: bool = False,
        columns_decreasing_in_n: bool = False,
    ) -> None:
        self._log_fn = log_fn
        self.name = name
        self.columns_increasing_in_n = columns_increasing_in_n
        self.columns_decreasing_in_n = columns_decreasing_in_n
        self.power_series = False
        self._columns: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def log_column(self, k: int, n_hi: int) -> np.ndarray:
        col = self._columns.get(k)
        if col is None or len(col) < n_hi:
            with self._lock:
                col = self._columns.get(k)
                if col is None or len(col) < n_hi:
                    have = 0 if col is None else len(col)
                    target = max(n_hi, 2 * have, 64)
                    col = np.asarray(self._log_fn(_as_index_array(target), k), dtype=float)
                    self._columns[k] = col
        return col[:n_hi]

    def entry(self, n: int, k: int) -> float:
        """a_{n,k} in linear scale (may overflow to +inf)."""
        log = self.log_column(k, n + 1)[n]
        with np.errstate(over="ignore"):
            return float(np.exp(log))

    def validate_sample(self, n_probe: int = 32, k_probe: int | None = None) -> None:
        k_probe = self.K_PROBE if k_probe is None else k_probe
        cols = [self.log_column(k, n_probe) for k in range(k_probe + 1)]
        stack = np.vstack(cols)  # shape (k, n)
        if np.any(np.diff(stack, axis=0) < -1e-12):
            raise ValidationError(f"matrix '{self.name}' is not nondecreasing in the grading index")
        if np.any(np.all(np.isneginf(stack), axis=0)):
            raise ValidationError(
                f"matrix '{self.name}' has a row with no positive entry below grading {k_probe}"
            )

    @staticmethod
    def from_power_series(alpha: ExponentSequence, type_: "PowerSeriesType") -> "KoetheMatrix":
        if type_ is PowerSeriesType.INFINITE:

            def log_fn(ns: np.ndarray, k: int) -> np.ndarray:
                return float(k) * alpha.values(int(ns.max(initial=-1)) + 1)[ns]

            matrix = KoetheMatrix(
                log_fn,
                name=f"power-series-infinite({alpha.name})",
                columns_increasing_in_n=True,
            )
        else:

            def log_fn(ns: np.ndarray, k: int) -> np.ndarray:
                return -alpha.values(int(ns.max(initial=-1)) + 1)[ns] / (k + 1.0)

            matrix = KoetheMatrix(
                log_fn,
                name=f"power-series-finite({alpha.name})",
                columns_decreasing_in_n=True,
            )
        matrix.power_series = True
        return matrix

    @staticmethod
    def power_matrix() -> "KoetheMatrix":
        """a_{n,k} = (n+1)**k."""
        return KoetheMatrix(
            lambda ns, k: float(k) * np.log(ns + 1.0),
            name="power",
            columns_increasing_in_n=True,
        )

    @staticmethod
    def constant_matrix() -> "KoetheMatrix":
        """a_{n,k} = 1; grades sequences into plain ell_p."""
        return KoetheMatrix(lambda ns, k: np.zeros(len(ns)), name="constant")


class PowerSeriesType(Enum):
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class PNorm:
    """p in {0} U [1, inf]; 0 and inf share the sup-seminorm formula."""

    value: float

    def __post_init__(self) -> None:
        v = self.value
        if not (v == 0.0 or v >= 1.0):
            raise ValidationError(f"p must lie in {{0}} or [1, inf], got {v}")

    @property
    def is_sup(self) -> bool:
        return self.value == 0.0 or math.isinf(self.value)

    @staticmethod
    def parse(text: str) -> "PNorm":
        text = text.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return PNorm(math.inf)
        return PNorm(float(text))


@dataclass(frozen=True)
class PowerSeriesTag:
    type: PowerSeriesType
    alpha: ExponentSequence


@dataclass(frozen=True)
class SpaceSpec:
    matrix: KoetheMatrix
    p: PNorm
    power_series: PowerSeriesTag | None = None

    @property
    def is_power_series(self) -> bool:
        return self.power_series is not None


def make_power_series_space(
    alpha: ExponentSequence,
    type_: PowerSeriesType | str,
    p: PNorm | float = 1.0,
) -> SpaceSpec:
    """Build the canonical graded space for an exponent sequence.

    Infinite type uses a_{n,k} = exp(k*alpha_n); finite type uses
    a_{n,k} = exp(-alpha_n/(k+1)).
    """
    if isinstance(type_, str):
        type_ = PowerSeriesType(type_)
    if not isinstance(p, PNorm):
        p = PNorm(float(p))
    alpha.validate_sample()
    matrix = KoetheMatrix.from_power_series(alpha, type_)
    return SpaceSpec(matrix=matrix, p=p, power_series=PowerSeriesTag(type_, alpha))


class FiniteVector:
    """Finitely supported sequence; coordinates outside [0, N) are zero."""

    def __init__(self, coefficients: Iterable[float]) -> None:
        self.coefficients = np.asarray(list(coefficients), dtype=float)

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, n: int) -> float:
        if 0 <= n < len(self.coefficients):
            return float(self.coefficients[n])
        return 0.0

    @property
    def support_width(self) -> int:
        nz = np.nonzero(self.coefficients)[0]
        return int(nz[-1]) + 1 if len(nz) else 0

    def trimmed(self) -> "FiniteVector":
        return FiniteVector(self.coefficients[: self.support_width])

    def scaled(self, c: float) -> "FiniteVector":
        return FiniteVector(c * self.coefficients)

    def __repr__(self) -> str:
        return f"FiniteVector({self.coefficients.tolist()!r})"


def basis_vector(r: int) -> FiniteVector:
    if r < 0:
        raise ValidationError("basis index must be nonnegative")
    coeff = np.zeros(r + 1)
    coeff[r] = 1.0
    return FiniteVector(coeff)


def log_sum_exp(terms: np.ndarray) -> float:
    """log(sum exp(terms)) with max extraction; empty or all -inf gives -inf."""
    terms = np.asarray(terms, dtype=float)
    if len(terms) == 0:
        return NEG_INF
    m = float(np.max(terms))
    if m == NEG_INF:
        return NEG_INF
    if math.isinf(m):
        return math.inf
    return m + math.log(float(np.sum(np.exp(terms - m))))


def seminorm(x: FiniteVector, k: int, space: SpaceSpec) -> float:
    """k-th graded seminorm of x.

    For finite p this is (sum |x_n a_{n,k}|^p)^(1/p); for p in {0, inf} it is
    sup |x_n a_{n,k}|.  Computed in log scale with log-sum-exp.
    """
    if k < 0:
        raise ValidationError("seminorm index must be nonnegative")
    coeff = x.coefficients
    nz = np.nonzero(coeff)[0]
    if len(nz) == 0:
        return 0.0
    col = space.matrix.log_column(k, int(nz[-1]) + 1)
    terms = np.log(np.abs(coeff[nz])) + col[nz]
    p = space.p.value
    if space.p.is_sup:
        log_value = float(np.max(terms))
    else:
        log_value = log_sum_exp(p * terms) / p
    with np.errstate(over="ignore"):
        return float(np.exp(log_value))
