"""Weighted shift operators, their iterates and Cesaro means.

Backward shift: y_n = w_n * x_{n+1}.  Forward shift: y_n = w_n * x_{n-1}.
Iterates are evaluated through window products over weight prefix sums, never
by repeated application; the *_seminorm functions evaluate the re-indexed
closed forms without materialising the iterated vector, so they can serve as
an independent route against the vector-then-seminorm computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .spaces import (
    NEG_INF,
    FiniteVector,
    SpaceSpec,
    WeightSequence,
    log_sum_exp,
    seminorm,
)


class ShiftKind(Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class ShiftOperatorSpec:
    kind: ShiftKind
    weights: WeightSequence
    space: SpaceSpec

    def apply(self, x: FiniteVector) -> FiniteVector:
        return apply(self, x)

    def iterate(self, x: FiniteVector, m: int) -> FiniteVector:
        return iterate(self, x, m)

    def cesaro_mean(self, x: FiniteVector, n: int) -> FiniteVector:
        return cesaro_mean(self, x, n)


def _window_values(w: WeightSequence, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """prod_{j in [a,b)} w_j in linear scale, saturating overflow to +-inf."""
    log, sign = w.window_log(a, b)
    with np.errstate(over="ignore"):
        return sign * np.exp(log)


def apply(op: ShiftOperatorSpec, x: FiniteVector) -> FiniteVector:
    return iterate(op, x, 1)


def iterate(op: ShiftOperatorSpec, x: FiniteVector, m: int) -> FiniteVector:
    """m-th iterate applied to x, via window products (m >= 0)."""
    if m < 0:
        raise ValueError("iterate count must be nonnegative")
    if m == 0:
        return FiniteVector(x.coefficients.copy())
    N = len(x)
    if op.kind is ShiftKind.BACKWARD:
        # y_n = x_{n+m} * prod_{j in [n, n+m)} w_j
        if N <= m:
            return FiniteVector([])
        ns = np.arange(N - m, dtype=np.int64)
        products = _window_values(op.weights, ns, ns + m)
        return FiniteVector(products * x.coefficients[m:])
    # forward: y_{r+m} = x_r * prod_{j in [r+1, r+m+1)} w_j
    rs = np.arange(N, dtype=np.int64)
    products = _window_values(op.weights, rs + 1, rs + m + 1)
    out = np.zeros(N + m)
    out[m:] = products * x.coefficients
    return FiniteVector(out)


def iterate_seminorm(op: ShiftOperatorSpec, x: FiniteVector, m: int, k: int) -> float:
    """Seminorm of the m-th iterate from the closed form.

    Backward, p finite: (sum_{n>=m} |x_n * prod_{j=1..m} w_{n-j} * a_{n-m,k}|^p)^(1/p);
    forward replaces the window by [n+1, n+m+1) and the grade row by n+m.
    p in {0, inf} takes the sup of the same terms.
    """
    if m < 0:
        raise ValueError("iterate count must be nonnegative")
    if m == 0:
        return seminorm(x, k, op.space)
    coeff = x.coefficients
    nz = np.nonzero(coeff)[0]
    if op.kind is ShiftKind.BACKWARD:
        nz = nz[nz >= m]
        if len(nz) == 0:
            return 0.0
        wlog, _ = op.weights.window_log(nz - m, nz)
        rows = nz - m
    else:
        if len(nz) == 0:
            return 0.0
        wlog, _ = op.weights.window_log(nz + 1, nz + m + 1)
        rows = nz + m
    col = op.space.matrix.log_column(k, int(rows.max()) + 1)
    terms = np.log(np.abs(coeff[nz])) + wlog + col[rows]
    p = op.space.p.value
    if op.space.p.is_sup:
        log_value = float(np.max(terms)) if len(terms) else NEG_INF
    else:
        log_value = log_sum_exp(p * terms) / p
    with np.errstate(over="ignore"):
        return float(np.exp(log_value))


def cesaro_mean(op: ShiftOperatorSpec, x: FiniteVector, n: int) -> FiniteVector:
    """(1/n) * sum_{m=1}^{n} T^m x, summed pairwise per coordinate."""
    if n < 1:
        raise ValueError("Cesaro order must be >= 1")
    N = len(x)
    width = N if op.kind is ShiftKind.BACKWARD else N + n
    rows = np.zeros((n, width))
    for m in range(1, n + 1):
        it = iterate(op, x, m).coefficients
        rows[m - 1, : len(it)] = it
    return FiniteVector(np.sum(rows, axis=0) / n)


def cesaro_seminorm(op: ShiftOperatorSpec, x: FiniteVector, n: int, k: int) -> float:
    """Seminorm of the n-th Cesaro mean from the double-sum identity.

    For each output coordinate j the inner sum over m = 1..n is accumulated in
    plain arithmetic after exponentiating per-term log values (signed
    cancellation cannot be resolved purely in log scale); terms beyond the
    float range saturate to +-inf.  The outer p-sum over j runs in log scale.
    """
    if n < 1:
        raise ValueError("Cesaro order must be >= 1")
    coeff = x.coefficients
    N = len(coeff)
    if N == 0:
        return 0.0
    inner: list[float] = []
    rows: list[int] = []
    if op.kind is ShiftKind.BACKWARD:
        # coordinate j collects terms x_{j+m} * prod_{t in [j, j+m)} w
        for j in range(N):
            ms = np.arange(1, min(n, N - 1 - j) + 1, dtype=np.int64)
            ms = ms[coeff[j + ms] != 0.0]
            if len(ms) == 0:
                continue
            wlog, wsign = op.weights.window_log(np.full(len(ms), j, dtype=np.int64), j + ms)
            with np.errstate(over="ignore"):
                terms = wsign * np.exp(wlog) * coeff[j + ms]
            inner.append(float(np.sum(terms)))
            rows.append(j)
    else:
        # coordinate j collects terms x_{j-m} * prod_{t in (j-m, j]} w
        for j in range(1, N + n):
            ms = np.arange(1, min(n, j) + 1, dtype=np.int64)
            ms = ms[(j - ms < N) & (coeff[np.minimum(j - ms, N - 1)] != 0.0)]
            if len(ms) == 0:
                continue
            wlog, wsign = op.weights.window_log(j - ms + 1, np.full(len(ms), j + 1, dtype=np.int64))
            with np.errstate(over="ignore"):
                terms = wsign * np.exp(wlog) * coeff[j - ms]
            inner.append(float(np.sum(terms)))
            rows.append(j)
    if not rows:
        return 0.0
    rows_arr = np.asarray(rows, dtype=np.int64)
    inner_arr = np.asarray(inner, dtype=float) / n
    col = op.space.matrix.log_column(k, int(rows_arr.max()) + 1)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(inner_arr))
    terms = logs + col[rows_arr]
    p = op.space.p.value
    if op.space.p.is_sup:
        log_value = float(np.max(terms))
    else:
        log_value = log_sum_exp(p * terms) / p
    with np.errstate(over="ignore"):
        return float(np.exp(log_value))
