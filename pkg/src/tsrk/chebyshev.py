"""Chebyshev polynomials of the first kind: values, derivatives, cosh form.

Everything runs through the three-term recurrence, which is plain polynomial
arithmetic and therefore valid for arguments inside and outside [-1, 1]
(and for complex arguments, which the stability scans rely on).  Derivatives
come from the differentiated recurrences, so each call is O(s) and stays
stable for degrees up to about 10^3, where the monomial expansion would have
long since become useless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ChebEval", "cheb_t", "cheb_t_derivs", "cheb_t_cosh"]


@dataclass(frozen=True)
class ChebEval:
    """T_s(x) together with its first two derivatives at x."""

    value: float
    first_derivative: float
    second_derivative: float


def _validate_degree(s) -> int:
    if not isinstance(s, (int, np.integer)) or isinstance(s, bool):
        raise ValueError(f"degree must be an integer, got {s!r}")
    if s < 0:
        raise ValueError(f"degree must be >= 0, got {s}")
    return int(s)


def cheb_t_derivs(s: int, x, order: int = 2) -> np.ndarray:
    """Derivatives 0..order of T_s at x, as an array of length order + 1.

    Differentiating T_j = 2 x T_{j-1} - T_{j-2} k times gives

        T_j^(k) = 2 k T_{j-1}^(k-1) + 2 x T_{j-1}^(k) - T_{j-2}^(k),

    and all orders are carried jointly through one pass over j.  ``x`` may be
    a scalar or an ndarray, real or complex; the result has shape
    ``(order + 1,) + shape(x)``.
    """
    s = _validate_degree(s)
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("argument of T_s must be finite")
    dtype = np.result_type(x.dtype, np.float64)
    shape = (order + 1,) + x.shape

    prev = np.zeros(shape, dtype=dtype)
    prev[0] = 1.0
    if s == 0:
        return prev
    curr = np.zeros(shape, dtype=dtype)
    curr[0] = x
    if order >= 1:
        curr[1] = 1.0
    for _ in range(2, s + 1):
        nxt = np.empty(shape, dtype=dtype)
        nxt[0] = 2.0 * x * curr[0] - prev[0]
        for k in range(1, order + 1):
            nxt[k] = 2.0 * k * curr[k - 1] + 2.0 * x * curr[k] - prev[k]
        prev, curr = curr, nxt
    return curr


def cheb_t(s: int, x: float) -> ChebEval:
    """T_s(x), T'_s(x) and T''_s(x) for a finite scalar x."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument of T_s must be finite, got {x!r}")
    d = cheb_t_derivs(s, x, order=2)
    return ChebEval(float(d[0]), float(d[1]), float(d[2]))


def cheb_t_cosh(s: int, x: float) -> float:
    """T_s(x) = cosh(s * arccosh(x)) for x >= 1.

    Cheaper than the recurrence when only the value at a single large-degree
    point is needed.
    """
    s = _validate_degree(s)
    x = float(x)
    if not math.isfinite(x) or x < 1.0:
        raise ValueError(f"cosh form of T_s requires x >= 1, got {x!r}")
    return float(np.cosh(s * np.arccosh(x)))
