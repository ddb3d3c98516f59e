"""Seeded generators and drivers for the synthetic experiments.

Two harnesses:

* a coupling benchmark: couple n random n-state marginals and track how far
  the greedy joint entropy sits above the max-marginal lower bound;
* an identifiability experiment: draw a random causal model (uniform cause
  distribution, low-entropy exogenous distribution, uniform random function
  table), keep only models whose exogenous entropy is below a cap, and
  measure how often the direction test scores the true direction lower.

Randomness comes from numpy ``SeedSequence`` spawning: one child stream per
(unit, trial), so results are independent of execution order and the
drivers may fan units out across processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coupling import greedy_coupling
from .distributions import Distribution, entropy_bits
from .inference import DirectionVerdict, FunctionTable, infer_direction, joint_from_model
from .parallel import fan_out

__all__ = [
    "SynthConfig",
    "TrialRecord",
    "SigmaSummary",
    "IdentifiabilitySummary",
    "BenchmarkRow",
    "sample_simplex_uniform",
    "sample_low_entropy",
    "sample_random_function",
    "run_identifiability_experiment",
    "run_greedy_benchmark",
    "identifiability_csv",
    "benchmark_csv",
]

MAX_REJECTION_DRAWS = 100_000
_REJECTION_BATCH = 256


def sample_simplex_uniform(n: int, rng: np.random.Generator) -> Distribution:
    """Uniform draw from the probability simplex on ``n`` states.

    Normalizing n i.i.d. unit-exponential draws is uniform on the simplex.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    raw = rng.exponential(scale=1.0, size=n)
    return Distribution(raw / raw.sum())


def sample_low_entropy(n: int, sigma: float, rng: np.random.Generator) -> Distribution:
    """Low-entropy draw: normalized i.i.d. log-normal(0, sigma^2) coordinates.

    The heavy tail concentrates mass on few states; larger ``sigma`` gives
    lower typical entropy. ``sigma`` is the standard deviation of the
    underlying zero-mean normal.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    raw = rng.lognormal(mean=0.0, sigma=sigma, size=n)
    return Distribution(raw / raw.sum())


def sample_random_function(n: int, theta: int, rng: np.random.Generator) -> FunctionTable:
    """Uniform random function table from [n] x [theta] to [n].

    Each (input, exogenous) entry is drawn uniformly and independently
    from the n output states.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    table = rng.integers(0, n, size=(n, theta))
    return FunctionTable(table, n_outputs=n)


@dataclass(frozen=True)
class SynthConfig:
    """Configuration of one identifiability run.

    ``sigma`` may be a single value or a sweep; ``trials`` is the number of
    kept (cap-passing) trials requested per sigma. ``entropy_cap_bits``
    defaults to log2(n), the strict version of the low-entropy filter.
    """

    n: int
    theta: int
    sigma: float | Sequence[float]
    trials: int
    seed: int
    entropy_cap_bits: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.theta < 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        sigmas = (
            (float(self.sigma),)
            if isinstance(self.sigma, (int, float))
            else tuple(float(s) for s in self.sigma)
        )
        if not sigmas or any(not s > 0 for s in sigmas):
            raise ValueError(f"sigma values must be > 0, got {sigmas}")
        object.__setattr__(self, "sigma", sigmas)
        cap = self.entropy_cap_bits
        object.__setattr__(
            self, "entropy_cap_bits", math.log2(self.n) if cap is None else float(cap)
        )

    @property
    def sigmas(self) -> tuple[float, ...]:
        return self.sigma  # normalized to a tuple in __post_init__


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """One kept trial: cause entropy, true exogenous entropy, verdict."""

    h_x: float
    h_e_true: float
    verdict: DirectionVerdict
    success: bool


@dataclass(frozen=True, eq=False)
class SigmaSummary:
    sigma: float
    trials_kept: int
    successes: int
    starved: bool
    records: tuple[TrialRecord, ...]

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials_kept if self.trials_kept else math.nan


@dataclass(frozen=True, eq=False)
class IdentifiabilitySummary:
    config: SynthConfig
    per_sigma: tuple[SigmaSummary, ...]

    @property
    def trials_kept(self) -> int:
        return sum(s.trials_kept for s in self.per_sigma)

    @property
    def success_rate(self) -> float:
        kept = self.trials_kept
        if kept == 0:
            return math.nan
        return sum(s.successes for s in self.per_sigma) / kept

    @property
    def starved_sigmas(self) -> tuple[float, ...]:
        return tuple(s.sigma for s in self.per_sigma if s.starved)


def _sample_capped(
    theta: int, sigma: float, cap_bits: float, rng: np.random.Generator
) -> np.ndarray | None:
    """Rejection-sample a low-entropy distribution with H <= cap_bits.

    Draws in batches for speed; the accepted sample is the first passing
    draw in stream order. Returns None after ``MAX_REJECTION_DRAWS``
    attempts (starvation).
    """
    drawn = 0
    while drawn < MAX_REJECTION_DRAWS:
        batch = min(_REJECTION_BATCH, MAX_REJECTION_DRAWS - drawn)
        raw = rng.lognormal(mean=0.0, sigma=sigma, size=(batch, theta))
        dists = raw / raw.sum(axis=1, keepdims=True)
        # lognormal draws are strictly positive; guard only underflow to 0
        ents = -(dists * np.log2(np.where(dists > 0, dists, 1.0))).sum(axis=1)
        hits = np.flatnonzero(ents <= cap_bits)
        if hits.size:
            return dists[hits[0]]
        drawn += batch
    return None


def _run_sigma_block(args: tuple) -> SigmaSummary:
    n, theta, sigma, cap_bits, trials, seed_seq = args
    records: list[TrialRecord] = []
    starved = False
    for trial_seq in seed_seq.spawn(trials):
        rng = np.random.default_rng(trial_seq)
        p_x = sample_simplex_uniform(n, rng)
        e_masses = _sample_capped(theta, sigma, cap_bits, rng)
        if e_masses is None:
            starved = True
            break
        p_e = Distribution(e_masses / e_masses.sum())
        f = sample_random_function(n, theta, rng)
        joint = joint_from_model(p_x, p_e, f)
        verdict = infer_direction(joint, t=0.0)
        records.append(
            TrialRecord(
                h_x=entropy_bits(p_x.masses),
                h_e_true=entropy_bits(p_e.masses),
                verdict=verdict,
                success=verdict.score_xy_bits < verdict.score_yx_bits,
            )
        )
    return SigmaSummary(
        sigma=sigma,
        trials_kept=len(records),
        successes=sum(r.success for r in records),
        starved=starved,
        records=tuple(records),
    )


def run_identifiability_experiment(
    cfg: SynthConfig, jobs: int | None = 1
) -> IdentifiabilitySummary:
    """Run the direction-recovery experiment described by ``cfg``.

    Per kept trial: sample the cause distribution uniformly on the simplex,
    the exogenous distribution by capped low-entropy rejection sampling,
    and a uniform random function table; form the induced joint; score both
    directions at t = 0; record success when the true-direction score is
    strictly smaller. A sigma whose rejection sampler exhausts its draw
    budget is reported as starved with however many trials it kept.
    """
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(len(cfg.sigmas))
    tasks = [
        (cfg.n, cfg.theta, sigma, cfg.entropy_cap_bits, cfg.trials, child)
        for sigma, child in zip(cfg.sigmas, children)
    ]
    summaries = fan_out(tasks, _run_sigma_block, jobs)
    return IdentifiabilitySummary(config=cfg, per_sigma=tuple(summaries))


@dataclass(frozen=True)
class BenchmarkRow:
    """Excess-bits statistics of the greedy coupler at one size."""

    n: int
    trials: int
    mean_excess: float
    max_excess: float
    min_excess: float


def _run_bench_block(args: tuple) -> BenchmarkRow:
    n, trials, seed_seq = args
    excesses = np.empty(trials)
    for k, trial_seq in enumerate(seed_seq.spawn(trials)):
        rng = np.random.default_rng(trial_seq)
        marginals = [sample_simplex_uniform(n, rng) for _ in range(n)]
        excesses[k] = greedy_coupling(marginals).excess_bits
    return BenchmarkRow(
        n=n,
        trials=trials,
        mean_excess=float(excesses.mean()),
        max_excess=float(excesses.max()),
        min_excess=float(excesses.min()),
    )


def run_greedy_benchmark(
    n_values: Sequence[int], trials: int, seed: int, jobs: int | None = 1
) -> list[BenchmarkRow]:
    """Couple n uniform n-state marginals per trial and aggregate excess bits."""
    n_values = [int(n) for n in n_values]
    if any(n < 2 for n in n_values):
        raise ValueError(f"every n must be >= 2, got {n_values}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(n_values))
    tasks = [(n, trials, child) for n, child in zip(n_values, children)]
    return fan_out(tasks, _run_bench_block, jobs)


def identifiability_csv(summary: IdentifiabilitySummary) -> str:
    """One row per (n, sigma): n, sigma, trials_kept, success_rate."""
    lines = ["n,sigma,trials_kept,success_rate"]
    n = summary.config.n
    for s in summary.per_sigma:
        lines.append(f"{n},{s.sigma!r},{s.trials_kept},{s.success_rate!r}")
    return "\n".join(lines) + "\n"


def benchmark_csv(rows: Sequence[BenchmarkRow]) -> str:
    """One row per n: n, trials, mean_excess, max_excess, min_excess."""
    lines = ["n,trials,mean_excess,max_excess,min_excess"]
    for r in rows:
        lines.append(
            f"{r.n},{r.trials},{r.mean_excess!r},{r.max_excess!r},{r.min_excess!r}"
        )
    return "\n".join(lines) + "\n"
