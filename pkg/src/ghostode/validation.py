"""Argument checks shared by the estimator and the command line."""

from __future__ import annotations

import re
from typing import Sequence

import numpy as np
from sklearn.utils.validation import check_array

DISTANCES = ("d1", "d2")


def check_distance(kind: str) -> str:
    if kind not in DISTANCES:
        raise ValueError(f"distance must be one of {DISTANCES}, got {kind!r}")
    return kind


def check_order(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValueError(f"order must be a non-negative integer, got {n!r}")
    return int(n)


def parse_orders(spec) -> list[int]:
    """``7``, ``"5..20"``, ``[5, 20]`` (inclusive range) or an explicit list of three or more."""
    if isinstance(spec, str):
        m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", spec)
        if not m:
            raise ValueError(f"order must look like 'n' or 'lo..hi', got {spec!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) else lo
    elif isinstance(spec, (list, tuple)):
        if len(spec) == 2:
            lo, hi = (check_order(v) for v in spec)
        else:
            return sorted({check_order(v) for v in spec})
    else:
        lo = hi = check_order(spec)
    if hi < lo:
        raise ValueError(f"empty order range {lo}..{hi}")
    return list(range(lo, hi + 1))


def check_interval(interval: Sequence[float]) -> tuple[float, float]:
    a, b = (float(v) for v in interval)
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ValueError(f"interval must satisfy a < b, got {interval!r}")
    return a, b


def check_points(X, interval: Sequence[float]) -> np.ndarray:
    """Evaluation points as a 1-D array inside ``interval``.

    Accepts shape ``(n,)`` or ``(n, 1)``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected one feature (x), got {X.shape[1]}")
    x = X[:, 0]
    a, b = interval
    slack = 1e-12 * max(1.0, abs(a), abs(b))
    if np.any(x < a - slack) or np.any(x > b + slack):
        raise ValueError(f"points outside [{a}, {b}]")
    return np.clip(x, a, b)
