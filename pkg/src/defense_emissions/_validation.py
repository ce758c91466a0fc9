"""Small input-validation helpers in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def check_finite_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_square(x, name: str) -> np.ndarray:
    arr = check_finite_array(x, name, ndim=2)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_nonnegative(x, name: str, tol: float = 0.0) -> np.ndarray:
    arr = check_finite_array(x, name)
    if np.any(arr < -tol):
        raise ValidationError(f"{name} has negative entries (min {arr.min():.3g})")
    return arr


def check_positive(x, name: str) -> np.ndarray:
    arr = check_finite_array(x, name)
    if np.any(arr <= 0):
        raise ValidationError(f"{name} must be strictly positive")
    return arr


def check_fraction(value: float, name: str, *, open_low=False, open_high=False) -> float:
    value = float(value)
    lo_ok = value > 0 if open_low else value >= 0
    hi_ok = value < 1 if open_high else value <= 1
    if not (np.isfinite(value) and lo_ok and hi_ok):
        raise ValidationError(f"{name}={value} outside its admissible range")
    return value


def check_sums_to_one(x, name: str, axis=None, tol: float = 1e-10) -> None:
    sums = np.asarray(x, dtype=float).sum(axis=axis)
    gap = np.max(np.abs(sums - 1.0))
    if gap > tol:
        raise ValidationError(f"{name} does not sum to one (max gap {gap:.3g})")


def check_matching_length(n: int, **arrays) -> None:
    for name, arr in arrays.items():
        if len(arr) != n:
            raise ValidationError(f"{name} has length {len(arr)}, expected {n}")
