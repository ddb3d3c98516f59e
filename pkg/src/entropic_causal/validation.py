"""Input validation helpers shared across the package.

Tolerance policy:

* ``EPS_SUM`` (1e-9) is the stochasticity tolerance. Vectors or matrix
  columns whose mass deviates from 1 by more than this are rejected at
  construction; anything closer is treated as float noise and kept as-is.
* ``EPS_ZERO`` (1e-12) separates "genuinely zero" from arithmetic residue
  when counting support sizes or building support graphs.
* ``EPS_RESIDUAL`` (1e-12) is the termination threshold for mass-splitting
  loops; leftover dust below it is folded into the final chunk instead of
  spawning spurious atoms.
"""

from __future__ import annotations

import numpy as np

EPS_SUM = 1e-9
EPS_ZERO = 1e-12
EPS_RESIDUAL = 1e-12


def as_float_array(x, *, name: str = "array") -> np.ndarray:
    """Coerce to a float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_prob_vector(x, *, name: str = "distribution") -> np.ndarray:
    """Validate and return a probability vector as a fresh float64 array.

    Requirements: 1-D, length >= 1, entries >= 0, total mass within
    ``EPS_SUM`` of 1.
    """
    arr = np.array(as_float_array(x, name=name), copy=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValueError(f"{name} must have at least one state")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative mass at state {int(np.argmin(arr))}")
    total = float(arr.sum())
    if abs(total - 1.0) > EPS_SUM:
        raise ValueError(f"{name} mass sums to {total!r}, not 1 within {EPS_SUM}")
    return arr


def as_nonneg_matrix(x, *, name: str = "matrix") -> np.ndarray:
    """Validate a 2-D nonnegative float matrix (no mass constraint)."""
    arr = np.array(as_float_array(x, name=name), copy=True)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if np.any(arr < 0):
        i, j = np.unravel_index(int(np.argmin(arr)), arr.shape)
        raise ValueError(f"{name} has negative entry at ({i}, {j})")
    return arr


def freeze(arr: np.ndarray) -> np.ndarray:
    """Mark an array immutable so frozen dataclasses stay value-safe."""
    arr.setflags(write=False)
    return arr
