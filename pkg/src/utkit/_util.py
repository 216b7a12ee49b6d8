"""Small numeric helpers used across modules."""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteValue


def tree_sum(values) -> complex:
    """Sum an array by pairwise folding over a fixed power-of-two shape.

    The reduction tree depends only on the input length, so results are
    bit-reproducible run to run and independent of chunking.
    """
    a = np.asarray(values).ravel()
    if a.size == 0:
        return a.dtype.type(0) if a.dtype.kind in "fc" else 0.0
    n = 1
    while n < a.size:
        n *= 2
    if n != a.size:
        b = np.zeros(n, dtype=a.dtype)
        b[: a.size] = a
        a = b
    while a.size > 1:
        half = a.size // 2
        a = a[:half] + a[half:]
    return a[0]


def check_finite(values, what: str = "value"):
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr.view(float) if arr.dtype.kind == "c" else arr)):
        raise NonFiniteValue(f"non-finite {what} encountered")
    return values


def pairwise_dot(weights, values) -> complex:
    """tree_sum of an elementwise product, with a finiteness check."""
    prod = np.asarray(weights) * np.asarray(values)
    check_finite(prod, "integrand sample")
    return tree_sum(prod)
