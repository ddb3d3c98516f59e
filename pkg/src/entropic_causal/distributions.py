"""Finite distributions, joint and conditional matrices, and entropy functionals.

All entropies are reported in bits (logarithm base 2) and follow the
continuity convention 0 * log 0 = 0. Every container is immutable after
construction, so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import (
    EPS_SUM,
    EPS_ZERO,
    as_nonneg_matrix,
    as_prob_vector,
    freeze,
)

__all__ = [
    "Distribution",
    "JointMatrix",
    "ConditionalMatrix",
    "shannon_entropy",
    "renyi_entropy",
    "conditionals_from_joint",
]


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector over labeled states.

    Parameters
    ----------
    masses : array-like
        Nonnegative reals summing to 1 within ``EPS_SUM``.
    labels : sequence, optional
        One identifier per state.
    """

    masses: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        arr = freeze(as_prob_vector(self.masses, name="distribution"))
        object.__setattr__(self, "masses", arr)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != arr.size:
                raise ValueError(
                    f"got {len(labels)} labels for {arr.size} states"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.masses.size)

    @property
    def support_size(self) -> int:
        """Number of states with mass above ``EPS_ZERO``."""
        return int(np.count_nonzero(self.masses > EPS_ZERO))


@dataclass(frozen=True, eq=False)
class JointMatrix:
    """A joint probability mass assignment over two finite state spaces.

    ``cells[i, j]`` is the probability of (row state i, column state j);
    the total mass must be 1 within ``EPS_SUM``. Orientation is up to the
    caller; :func:`conditionals_from_joint` reads rows as Y and columns as X.
    """

    cells: np.ndarray
    row_labels: tuple | None = None
    col_labels: tuple | None = None

    def __post_init__(self):
        arr = as_nonneg_matrix(self.cells, name="joint matrix")
        total = float(arr.sum())
        if abs(total - 1.0) > EPS_SUM:
            raise ValueError(
                f"joint matrix mass sums to {total!r}, not 1 within {EPS_SUM}"
            )
        object.__setattr__(self, "cells", freeze(arr))
        for attr, n in (("row_labels", arr.shape[0]), ("col_labels", arr.shape[1])):
            val = getattr(self, attr)
            if val is not None:
                val = tuple(val)
                if len(val) != n:
                    raise ValueError(f"{attr}: got {len(val)} labels for {n} states")
                object.__setattr__(self, attr, val)

    @property
    def n_rows(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.cells.shape[1])


@dataclass(frozen=True, eq=False)
class ConditionalMatrix:
    """A column-stochastic matrix; column j is P(output | input = j).

    Columns listed in ``degenerate_cols`` correspond to zero-probability
    inputs: they carry no mass, are excluded from the stochasticity check,
    and downstream consumers must skip them rather than condition on them.
    """

    cells: np.ndarray
    degenerate_cols: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        arr = as_nonneg_matrix(self.cells, name="conditional matrix")
        degenerate = frozenset(int(j) for j in self.degenerate_cols)
        for j in degenerate:
            if not 0 <= j < arr.shape[1]:
                raise ValueError(f"degenerate column index {j} out of range")
        col_sums = arr.sum(axis=0)
        for j in range(arr.shape[1]):
            if j in degenerate:
                if col_sums[j] > EPS_ZERO:
                    raise ValueError(
                        f"column {j} flagged degenerate but carries mass {col_sums[j]!r}"
                    )
            elif abs(col_sums[j] - 1.0) > EPS_SUM:
                raise ValueError(
                    f"column {j} sums to {col_sums[j]!r}, not 1 within {EPS_SUM}"
                )
        object.__setattr__(self, "cells", freeze(arr))
        object.__setattr__(self, "degenerate_cols", degenerate)

    @property
    def n_outputs(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.cells.shape[1])

    def column(self, j: int) -> np.ndarray:
        return self.cells[:, j]

    def active_columns(self) -> list[int]:
        """Indices of non-degenerate columns, in order."""
        return [j for j in range(self.n_inputs) if j not in self.degenerate_cols]


def _masses_of(d) -> np.ndarray:
    if isinstance(d, Distribution):
        return d.masses
    return as_prob_vector(d)


def entropy_bits(masses: np.ndarray) -> float:
    """Shannon entropy in bits of a raw nonnegative mass array (no validation)."""
    pos = masses[masses > 0]
    if pos.size == 0:
        return 0.0
    return float(-(pos * np.log2(pos)).sum())


def shannon_entropy(d) -> float:
    """Shannon entropy of a distribution, in bits.

    Accepts a :class:`Distribution` or any array-like probability vector.
    Zero-mass states contribute nothing (0 * log 0 = 0); the result lies
    in [0, log2(number of states)].
    """
    return entropy_bits(_masses_of(d))


def renyi_entropy(d, a: float) -> float:
    """Renyi entropy of order ``a`` in bits.

    ``a = 0`` returns the log2 support size, counting only states with mass
    above ``EPS_ZERO``. ``a = 1`` is rejected; use :func:`shannon_entropy`
    for the Shannon limit. The value is nonincreasing in ``a``.
    """
    a = float(a)
    if a < 0:
        raise ValueError(f"Renyi order must be nonnegative, got {a}")
    if a == 1.0:
        raise ValueError("Renyi order 1 is the Shannon limit; use shannon_entropy")
    masses = _masses_of(d)
    if a == 0.0:
        support = int(np.count_nonzero(masses > EPS_ZERO))
        return float(np.log2(max(support, 1)))
    pos = masses[masses > 0]
    return float(np.log2((pos**a).sum()) / (1.0 - a))


def conditionals_from_joint(
    j: JointMatrix,
) -> tuple[ConditionalMatrix, ConditionalMatrix, Distribution, Distribution]:
    """Split a joint over (Y, X) into both conditionals and both marginals.

    ``j.cells[y, x]`` is read as P(Y = y, X = x). Returns
    ``(y_given_x, x_given_y, p_x, p_y)`` where ``y_given_x`` has one column
    per X state and ``x_given_y`` one column per Y state. Zero-probability
    marginal states yield degenerate-flagged (all-zero) columns rather than
    an error.
    """
    cells = j.cells
    p_x = cells.sum(axis=0)
    p_y = cells.sum(axis=1)

    def _split(mat: np.ndarray, marginal: np.ndarray) -> ConditionalMatrix:
        cols = np.zeros_like(mat)
        degenerate = []
        for k in range(mat.shape[1]):
            if marginal[k] > EPS_ZERO:
                cols[:, k] = mat[:, k] / marginal[k]
            else:
                degenerate.append(k)
        return ConditionalMatrix(cols, degenerate_cols=frozenset(degenerate))

    y_given_x = _split(cells, p_x)
    x_given_y = _split(cells.T, p_y)
    # Renormalize away float residue so marginals pass strict construction.
    return (
        y_given_x,
        x_given_y,
        Distribution(p_x / p_x.sum(), labels=j.col_labels),
        Distribution(p_y / p_y.sum(), labels=j.row_labels),
    )
