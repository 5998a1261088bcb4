"""Small input-validation helpers used by estimators and numerical routines."""

from __future__ import annotations

import numpy as np

from .errors import UserInputError


def as_float_array(values, name: str, ndim: int | None = None) -> np.ndarray:
    """Coerce to a float ndarray and reject non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise UserInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise UserInputError(f"{name} contains non-finite values")
    return arr


def as_count_array(values, name: str) -> np.ndarray:
    """Coerce to a 1-D nonnegative integer array."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise UserInputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    as_float = np.asarray(arr, dtype=float)
    if arr.size and (not np.all(np.isfinite(as_float)) or np.any(as_float < 0)):
        raise UserInputError(f"{name} must be nonnegative and finite")
    as_int = as_float.astype(np.int64)
    if arr.size and np.any(as_int != as_float):
        raise UserInputError(f"{name} must contain integer counts")
    return as_int


def check_same_length(a, b, name_a: str, name_b: str) -> None:
    if len(a) != len(b):
        raise UserInputError(
            f"{name_a} and {name_b} must have equal length ({len(a)} != {len(b)})"
        )
