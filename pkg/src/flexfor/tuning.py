"""Randomized hyperparameter search scored against a benchmark region.

The benchmark region is a high-resolution two-stage Dirichlet hull
(100000 samples by default). Each trial draws a hyperparameter
combination uniformly from the search space, runs a few boundary sweeps
with it, and is scored by the mean Jaccard similarity of the swept
regions against the benchmark. Sweeps that fail to produce a region
score zero, which penalizes unreliable configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from . import powerflow
from .feeder import FeederModel
from .geometry import DegenerateRegionError, ForPolygon, jaccard
from .revol import RevolConfig, sweep
from .sampling import DirichletConfig, feasible_hull, sample_dirichlet_two_stage
from .seeds import seed_sequence, substream

_INT_PARAMS = (
    "population_size",
    "elite_size",
    "max_epochs",
    "max_no_success_epochs",
    "t",
    "start_ttl",
)
_REAL_PARAMS = (
    "gradient_weight",
    "success_weight",
    "target_success",
    "max_scatter_relative",
)


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive sampling ranges per hyperparameter."""

    population_size: tuple[int, int] = (20, 40)
    elite_size: tuple[int, int] = (2, 5)
    max_epochs: tuple[int, int] = (500, 20000)
    max_no_success_epochs: tuple[int, int] = (20, 20000)
    t: tuple[int, int] = (10, 20000)
    start_ttl: tuple[int, int] = (80, 20000)
    gradient_weight: tuple[float, float] = (0.0, 3.0)
    success_weight: tuple[float, float] = (0.0, 3.0)
    target_success: tuple[float, float] = (0.1, 0.4)
    max_scatter_relative: tuple[float, float] = (0.2, 3.0)

    def validate(self) -> None:
        for f in fields(self):
            lo, hi = getattr(self, f.name)
            if lo > hi:
                raise ValueError(f"empty range for {f.name}: ({lo}, {hi})")

    def contains(self, cfg: RevolConfig) -> bool:
        for name in _INT_PARAMS + _REAL_PARAMS:
            lo, hi = getattr(self, name)
            if not lo <= getattr(cfg, name) <= hi:
                return False
        return True


def sample_config(space: SearchSpace, rng: np.random.Generator, seed: int = 0) -> RevolConfig:
    """One uniform draw from the search space (integers inclusive)."""
    space.validate()
    values: dict = {"seed": seed}
    for name in _INT_PARAMS:
        lo, hi = getattr(space, name)
        values[name] = int(rng.integers(lo, hi + 1))
    for name in _REAL_PARAMS:
        lo, hi = getattr(space, name)
        values[name] = float(rng.uniform(lo, hi))
    # elite must stay below population size for any draw
    values["elite_size"] = min(values["elite_size"], values["population_size"] - 1)
    cfg = RevolConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class TrialRecord:
    index: int
    config: RevolConfig
    scores: list[float]
    pf_calls: int

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.scores))

    @property
    def std_score(self) -> float:
        return float(np.std(self.scores, ddof=1)) if len(self.scores) > 1 else 0.0


def build_benchmark(
    model: FeederModel, n: int = 100000, alpha: float = 1.2, seed: int = 0
) -> ForPolygon:
    """High-resolution Dirichlet region used as the tuning reference."""
    cloud = sample_dirichlet_two_stage(
        model, DirichletConfig(sample_size=n, alpha=alpha, seed=seed)
    )
    return feasible_hull(cloud)


def score_sweep(model: FeederModel, cfg: RevolConfig, benchmark: ForPolygon) -> float:
    """Jaccard of one sweep against the benchmark; 0.0 for failed sweeps."""
    try:
        result = sweep(model, cfg)
        return jaccard(result.polygon, benchmark)
    except DegenerateRegionError:
        return 0.0


def random_search(
    space: SearchSpace,
    trials: int,
    runs_per_trial: int,
    model: FeederModel,
    benchmark: ForPolygon,
    seed: int = 0,
) -> list[TrialRecord]:
    """Uniformly sampled trials, ranked by mean Jaccard (best first)."""
    if trials < 1 or runs_per_trial < 1:
        raise ValueError("trials and runs_per_trial must be >= 1")
    records = []
    for trial in range(trials):
        rng = substream(seed, "tune-trial", trial)
        cfg = sample_config(space, rng)
        scores = []
        calls_before = powerflow.pf_call_count()
        for run in range(runs_per_trial):
            run_seed = int(seed_sequence(seed, "tune-run", trial, run).generate_state(1)[0])
            run_cfg = replace(cfg, seed=run_seed)
            try:
                result = sweep(model, run_cfg)
                scores.append(jaccard(result.polygon, benchmark))
            except DegenerateRegionError:
                scores.append(0.0)
        pf_calls = powerflow.pf_call_count() - calls_before
        records.append(TrialRecord(index=trial, config=cfg, scores=scores, pf_calls=pf_calls))
    records.sort(key=lambda r: (-r.mean_score, r.index))
    return records
