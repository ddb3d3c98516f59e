"""Cause-effect pair evaluation on real-valued sample files.

Reads a directory of two-column sample files plus a metadata file with
ground-truth directions, quantizes each pair onto a common grid, builds the
empirical joint, and sweeps the direction test's abstention threshold to
trade decision rate against accuracy, with exact binomial confidence
intervals on the accuracy of the decided subset.

Expected layout: files named ``pair0001.txt`` etc. with whitespace-separated
numeric columns (first column the candidate cause X, second the candidate
effect Y), and a ``pairmeta.txt`` whose lines read ``id dir weight`` with
``dir`` one of ``->`` (X causes Y) or ``<-``. Files with more than two
columns are skipped with a warning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import beta as _beta

from .distributions import JointMatrix
from .inference import DECISION_XY, DECISION_YX, infer_direction
from .parallel import fan_out

__all__ = [
    "PairsError",
    "MissingMetadataError",
    "MissingPairFileError",
    "UnparsableRowError",
    "EmptyDatasetError",
    "CauseEffectPair",
    "PairDataset",
    "EvalPoint",
    "EvalCurve",
    "load_pairs",
    "quantize_pair",
    "empirical_joint",
    "clopper_pearson",
    "evaluate_dataset",
    "curve_csv",
]

MIN_SAMPLES = 20
MAX_STATES = 512
METADATA_NAME = "pairmeta.txt"


class PairsError(Exception):
    """Base error for cause-effect pair datasets."""


class MissingMetadataError(PairsError):
    pass


class MissingPairFileError(PairsError):
    pass


class UnparsableRowError(PairsError):
    pass


class EmptyDatasetError(PairsError):
    pass


@dataclass(frozen=True, eq=False)
class CauseEffectPair:
    pair_id: str
    x: np.ndarray
    y: np.ndarray
    ground_truth: str  # DECISION_XY or DECISION_YX
    weight: float

    def __post_init__(self):
        if self.ground_truth not in (DECISION_XY, DECISION_YX):
            raise ValueError(f"bad ground truth {self.ground_truth!r}")
        if not self.weight > 0:
            raise ValueError(f"pair {self.pair_id}: weight must be > 0")
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"pair {self.pair_id}: x and y must be equal-length 1-D")
        if x.size < MIN_SAMPLES:
            raise ValueError(
                f"pair {self.pair_id}: {x.size} samples, need >= {MIN_SAMPLES}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True, eq=False)
class PairDataset:
    pairs: tuple[CauseEffectPair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise EmptyDatasetError("dataset contains no pairs")
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


def _normalize_id(token: str) -> str:
    token = token.strip()
    if token.lower().startswith("pair"):
        token = token[4:]
    try:
        return f"{int(token):04d}"
    except ValueError as exc:
        raise UnparsableRowError(f"cannot parse pair id {token!r}") from exc


def load_pairs(path, metadata_name: str = METADATA_NAME) -> PairDataset:
    """Load a pair directory into a :class:`PairDataset`.

    Multivariate files (more than two columns) are skipped with a warning.
    Raises :class:`MissingMetadataError`, :class:`MissingPairFileError`,
    :class:`UnparsableRowError`, or :class:`EmptyDatasetError`.
    """
    root = Path(path)
    if not root.is_dir():
        raise MissingPairFileError(f"{root} is not a directory")
    meta_path = root / metadata_name
    if not meta_path.is_file():
        raise MissingMetadataError(f"metadata file {meta_path} not found")

    pairs: list[CauseEffectPair] = []
    for lineno, line in enumerate(meta_path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3 or fields[1] not in ("->", "<-"):
            raise UnparsableRowError(
                f"{meta_path.name} line {lineno}: expected 'id dir weight', got {line!r}"
            )
        pair_id = _normalize_id(fields[0])
        truth = DECISION_XY if fields[1] == "->" else DECISION_YX
        try:
            weight = float(fields[2])
        except ValueError as exc:
            raise UnparsableRowError(
                f"{meta_path.name} line {lineno}: bad weight {fields[2]!r}"
            ) from exc
        data_path = root / f"pair{pair_id}.txt"
        if not data_path.is_file():
            raise MissingPairFileError(
                f"metadata names pair {pair_id} but {data_path.name} is missing"
            )
        try:
            data = np.loadtxt(data_path, ndmin=2)
        except ValueError as exc:
            raise UnparsableRowError(f"{data_path.name}: {exc}") from exc
        if data.shape[1] > 2:
            warnings.warn(
                f"skipping multivariate pair {pair_id} "
                f"({data.shape[1]} columns)",
                stacklevel=2,
            )
            continue
        if data.shape[1] < 2:
            raise UnparsableRowError(
                f"{data_path.name}: expected 2 columns, got {data.shape[1]}"
            )
        try:
            pairs.append(
                CauseEffectPair(
                    pair_id=pair_id,
                    x=data[:, 0],
                    y=data[:, 1],
                    ground_truth=truth,
                    weight=weight,
                )
            )
        except ValueError as exc:
            raise UnparsableRowError(str(exc)) from exc
    if not pairs:
        raise EmptyDatasetError(f"no usable pairs found under {root}")
    return PairDataset(tuple(pairs))


def _quantize_axis(values: np.ndarray, n: int) -> np.ndarray:
    """Equal-width bins over [min, max] into states 0..n-1.

    The top edge folds into the last bin; a constant axis collapses to
    state 0. Monotone: larger values never get a smaller state.
    """
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.zeros(values.size, dtype=np.int64)
    states = np.floor((values - lo) / (hi - lo) * n).astype(np.int64)
    return np.clip(states, 0, n - 1)


def quantize_pair(samples, n_override: int | None = None) -> tuple[np.ndarray, int]:
    """Quantize real-valued (x, y) samples onto a common n-state grid.

    ``n`` defaults to max(2, min(floor(N / 10), 512)) so every state holds
    10 samples on average. Returns an (N, 2) integer state array and ``n``.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"samples must have shape (N, 2), got {arr.shape}")
    n_samples = arr.shape[0]
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"{n_samples} samples, need >= {MIN_SAMPLES}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples contain NaN or infinite values")
    if n_override is not None:
        n = int(n_override)
        if n < 2:
            raise ValueError(f"n_override must be >= 2, got {n}")
    else:
        n = max(2, min(n_samples // 10, MAX_STATES))
    discrete = np.column_stack(
        [_quantize_axis(arr[:, 0], n), _quantize_axis(arr[:, 1], n)]
    )
    return discrete, n


def empirical_joint(discrete: np.ndarray, n: int) -> JointMatrix:
    """Empirical joint from quantized states: cell[y, x] = count(x, y) / N.

    Unvisited states are retained as zero-probability rows and columns.
    """
    arr = np.asarray(discrete, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"discrete pairs must have shape (N, 2), got {arr.shape}")
    if arr.min() < 0 or arr.max() >= n:
        raise ValueError(f"state indices must lie in [0, {n})")
    flat = arr[:, 1] * n + arr[:, 0]  # row y, column x
    counts = np.bincount(flat, minlength=n * n).reshape(n, n)
    return JointMatrix(counts / arr.shape[0])


def clopper_pearson(k: int, n: int, alpha: float = 0.05) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval via Beta quantiles.

    Returns (low, high) for ``k`` successes in ``n`` trials at level
    ``1 - alpha``; boundaries are exact (low = 0 at k = 0, high = 1 at
    k = n).
    """
    k, n = int(k), int(n)
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    low = 0.0 if k == 0 else float(_beta.ppf(alpha / 2, k, n - k + 1))
    high = 1.0 if k == n else float(_beta.ppf(1 - alpha / 2, k + 1, n - k))
    return low, high


@dataclass(frozen=True)
class EvalPoint:
    """Aggregate outcome at one threshold value.

    ``accuracy`` is weight-adjusted; ``accuracy_unweighted`` and the
    confidence interval come from raw decided counts (the weighted CI is
    approximated by the unweighted one).
    """

    t: float
    decision_rate: float
    accuracy: float
    ci_low: float
    ci_high: float
    n_decided: int
    accuracy_unweighted: float


@dataclass(frozen=True, eq=False)
class EvalCurve:
    points: tuple[EvalPoint, ...]


def _pair_stats(args: tuple) -> tuple[float, float, int, bool]:
    """Scores for one pair: (score_xy, score_yx, n_states, correct_at_0)."""
    pair, n_override = args
    discrete, n = quantize_pair(np.column_stack([pair.x, pair.y]), n_override)
    joint = empirical_joint(discrete, n)
    verdict = infer_direction(joint, t=0.0)
    return (
        verdict.score_xy_bits,
        verdict.score_yx_bits,
        verdict.n_states,
        verdict.decision == pair.ground_truth,
    )


def evaluate_dataset(
    ds: PairDataset,
    t_grid: Sequence[float],
    alpha: float = 0.05,
    n_override: int | None = None,
    jobs: int | None = 1,
) -> EvalCurve:
    """Sweep the abstention threshold over a pair dataset.

    For each ``t``: a pair is decided when its score gap exceeds
    t * log2(n_states); decision rate is the weighted decided fraction of
    all pairs, accuracy the weighted correct fraction of decided pairs.
    Thresholds where nothing is decided produce no point. ``t_grid`` must
    be sorted ascending and include 0.

    The per-pair direction scores do not depend on ``t``, so each pair is
    quantized and coupled once and the grid reuses its scores.
    """
    grid = [float(t) for t in t_grid]
    if not grid or grid != sorted(grid) or grid[0] != 0.0:
        raise ValueError("t_grid must be sorted ascending and start at 0")
    if any(t < 0 for t in grid):
        raise ValueError("thresholds must be nonnegative")

    stats = fan_out([(p, n_override) for p in ds.pairs], _pair_stats, jobs)

    total_weight = sum(p.weight for p in ds.pairs)
    points: list[EvalPoint] = []
    for t in grid:
        w_decided = w_correct = 0.0
        k_correct = n_decided = 0
        for pair, (s_xy, s_yx, n_states, correct) in zip(ds.pairs, stats):
            gap = abs(s_xy - s_yx)
            if gap > t * math.log2(n_states):
                n_decided += 1
                w_decided += pair.weight
                if correct:
                    k_correct += 1
                    w_correct += pair.weight
        if n_decided == 0:
            continue
        ci_low, ci_high = clopper_pearson(k_correct, n_decided, alpha)
        points.append(
            EvalPoint(
                t=t,
                decision_rate=w_decided / total_weight,
                accuracy=w_correct / w_decided,
                ci_low=ci_low,
                ci_high=ci_high,
                n_decided=n_decided,
                accuracy_unweighted=k_correct / n_decided,
            )
        )
    return EvalCurve(points=tuple(points))


def curve_csv(curve: EvalCurve) -> str:
    """CSV with columns t, decision_rate, accuracy, ci_low, ci_high, n_decided."""
    lines = ["t,decision_rate,accuracy,ci_low,ci_high,n_decided"]
    for p in curve.points:
        lines.append(
            f"{p.t!r},{p.decision_rate!r},{p.accuracy!r},"
            f"{p.ci_low!r},{p.ci_high!r},{p.n_decided}"
        )
    return "\n".join(lines) + "\n"
