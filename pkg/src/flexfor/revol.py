"""Multi-part evolutionary strategy and the eight-direction boundary sweep.

Each individual carries a parameter vector (the normalized set-values
for all DERs), a scatter vector bounding per-component mutation, and a
three-entry restrictions vector: fitness first, then the largest voltage
band violation and the largest thermal overload. Individuals compare
lexicographically on the violations, with fitness only breaking ties, so
constraint compliance always dominates objective value.

Two mechanisms steer reproduction. A PT1-low-passed success rate widens
the mutation spread when children are accepted more often than the
target rate and narrows it otherwise; the spread multiplier is applied
to the population scatter every epoch, which closes the control loop
fast enough that the spread settles where acceptance matches the target
rate. An implicit gradient shifts the child's center from the elite
parent toward the better of the two parents. Children are drawn
uniformly per component inside the scatter-defined box around that
shifted center.

The boundary sweep maximizes alpha * P + beta * Q at the interconnection
for the eight compass directions and returns the convex hull of the
feasible optima as the identified flexibility region.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import powerflow
from .feeder import FeederModel
from .geometry import DegenerateRegionError, ForPolygon, convex_hull
from .inverter import apply_setpoints, renormalize
from .seeds import substream

# restrictions entries for a power flow that did not converge: such an
# individual loses every comparison
NONCONVERGED_VIOLATION = 1e9
NONCONVERGED_FITNESS = -1e9


@dataclass(frozen=True)
class Direction:
    """Objective weights (alpha, beta) for max(alpha*P + beta*Q)."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha not in (-1, 0, 1) or self.beta not in (-1, 0, 1):
            raise ValueError("direction components must be in {-1, 0, 1}")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("direction (0, 0) is not a search direction")


COMPASS_DIRECTIONS = tuple(
    Direction(a, b)
    for a, b in [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
)
# the direction list exactly as printed in the source publication, which
# repeats (-1, 0) and omits (0, -1); kept selectable for comparison runs
PRINTED_DIRECTIONS = tuple(
    Direction(a, b)
    for a, b in [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (-1, 0), (1, -1)]
)


@dataclass
class Individual:
    params: np.ndarray
    scatter: np.ndarray
    restrictions: np.ndarray  # [fitness, max_v_violation, max_i_violation]
    ttl: int
    p_pcc_kw: float = 0.0
    q_pcc_kvar: float = 0.0

    def copy(self) -> "Individual":
        return Individual(
            params=self.params.copy(),
            scatter=self.scatter.copy(),
            restrictions=self.restrictions.copy(),
            ttl=self.ttl,
            p_pcc_kw=self.p_pcc_kw,
            q_pcc_kvar=self.q_pcc_kvar,
        )

    @property
    def fitness(self) -> float:
        return float(self.restrictions[0])

    @property
    def violations(self) -> np.ndarray:
        return self.restrictions[1:]

    @property
    def feasible(self) -> bool:
        return bool((self.restrictions[1:] == 0.0).all())


@dataclass(frozen=True)
class RevolConfig:
    """Hyperparameters; defaults are the best combination from the search."""

    population_size: int = 37
    elite_size: int = 3
    max_epochs: int = 16245
    max_no_success_epochs: int = 9281
    t: int = 5338  # PT1 averaging horizon for the success rate
    start_ttl: int = 763
    gradient_weight: float = 2.87
    success_weight: float = 2.18
    target_success: float = 0.29
    max_scatter_relative: float = 1.74
    min_scatter: float = 1e-6
    seed: int = 0

    def validate(self) -> None:
        if not 0 < self.elite_size < self.population_size:
            raise ValueError("need 0 < elite_size < population_size")
        if not 0.0 < self.target_success < 1.0:
            raise ValueError("target_success must be in (0, 1)")
        if self.gradient_weight < 0 or self.success_weight < 0:
            raise ValueError("weights must be non-negative")
        if self.max_epochs < 1 or self.start_ttl < 1:
            raise ValueError("max_epochs and start_ttl must be >= 1")
        if not 0.0 < self.min_scatter <= self.max_scatter_relative:
            raise ValueError("need 0 < min_scatter <= max_scatter_relative")

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RevolConfig":
        cfg = cls(**d)
        cfg.validate()
        return cfg


def pt1(y: float, u: float, t: float) -> float:
    """Discrete first-order low-pass: u for t = 0, else y + (u - y) / t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return u
    return y + (u - y) / t


def is_better_than(a: Individual, b: Individual) -> bool:
    """Strictly better: lexicographic on violations, fitness breaks ties."""
    for av, bv in zip(a.restrictions[1:], b.restrictions[1:]):
        if av < bv:
            return True
        if av > bv:
            return False
    return a.restrictions[0] > b.restrictions[0]


def _rank_key(ind: Individual):
    return (ind.restrictions[1], ind.restrictions[2], -ind.restrictions[0])


@dataclass(frozen=True)
class Evaluation:
    """Outcome of one fitness evaluation (one power flow)."""

    params: np.ndarray
    restrictions: np.ndarray
    p_pcc_kw: float = 0.0
    q_pcc_kvar: float = 0.0


def evaluate_setpoint(params: np.ndarray, model: FeederModel, direction: Direction) -> Evaluation:
    """Denormalize, project, solve; return restrictions and write-back params.

    The applied (post-projection) setpoint replaces the parameter vector,
    so inverter limits never show up as violations.
    """
    k = model.n_der
    applied = apply_setpoints(params[:k], params[k:], model)
    p_n, q_n = renormalize(applied, model)
    params_out = np.concatenate([p_n, q_n])
    res = powerflow.solve(model, applied.p_kw, applied.q_kvar)
    if not res.converged:
        return Evaluation(
            params=params_out,
            restrictions=np.array(
                [NONCONVERGED_FITNESS, NONCONVERGED_VIOLATION, NONCONVERGED_VIOLATION]
            ),
        )
    report = powerflow.evaluate_constraints(res, model.spec)
    fitness = direction.alpha * res.p_pcc_kw + direction.beta * res.q_pcc_kvar
    thermal = max(report.max_i_violation, report.trafo_violation)
    return Evaluation(
        params=params_out,
        restrictions=np.array([fitness, report.max_v_violation, thermal]),
        p_pcc_kw=res.p_pcc_kw,
        q_pcc_kvar=res.q_pcc_kvar,
    )


def evaluate_individual(
    ind: Individual, model: FeederModel, direction: Direction
) -> Individual:
    """Evaluated copy of ``ind`` (restrictions filled, params written back)."""
    ev = evaluate_setpoint(ind.params, model, direction)
    return replace(
        ind,
        params=ev.params,
        restrictions=ev.restrictions,
        p_pcc_kw=ev.p_pcc_kw,
        q_pcc_kvar=ev.q_pcc_kvar,
    )


@dataclass
class OptimizerResult:
    best: Individual
    epochs_used: int
    evaluations: int
    trace: list = field(default_factory=list)  # (epoch, fitness, v_viol, i_viol)
    population: list = field(default_factory=list)


def run_optimizer(evaluate_fn, n_params: int, cfg: RevolConfig, rng: np.random.Generator) -> OptimizerResult:
    """Core evolution loop, independent of the grid problem.

    ``evaluate_fn(params) -> Evaluation`` is called once for the initial
    population members and once per epoch, so the evaluation budget is
    exactly population_size + epochs_used.
    """
    cfg.validate()
    # population-wide mutation spread; every individual is born with the
    # spread current at its birth, and the success controller rescales the
    # spread each epoch, so all live scatter vectors share one history
    spread = np.full(n_params, cfg.max_scatter_relative)
    pop: list[Individual] = []
    for _ in range(cfg.population_size):
        ev = evaluate_fn(rng.uniform(size=n_params))
        pop.append(
            Individual(
                params=ev.params,
                scatter=spread.copy(),
                restrictions=ev.restrictions,
                ttl=cfg.start_ttl,
                p_pcc_kw=ev.p_pcc_kw,
                q_pcc_kvar=ev.q_pcc_kvar,
            )
        )
    evaluations = cfg.population_size
    best = min(pop, key=_rank_key).copy()

    # neutral controller start: the spread only moves once measured success
    # actually deviates from the target rate
    success_avg = cfg.target_success
    no_success = 0
    epoch = 0
    trace: list = []

    while epoch < cfg.max_epochs and no_success < cfg.max_no_success_epochs:
        epoch += 1
        order = sorted(range(len(pop)), key=lambda i: _rank_key(pop[i]))
        elite_parent = pop[order[rng.integers(0, cfg.elite_size)]]
        other_parent = pop[rng.integers(0, cfg.population_size)]
        if is_better_than(other_parent, elite_parent):
            better, worse = other_parent, elite_parent
        else:
            better, worse = elite_parent, other_parent

        spread_factor = 1.0 + cfg.success_weight * (success_avg - cfg.target_success)
        np.clip(spread * spread_factor, cfg.min_scatter, cfg.max_scatter_relative, out=spread)
        center = elite_parent.params + cfg.gradient_weight * (better.params - worse.params)
        draw = rng.uniform(-1.0, 1.0, size=n_params)
        child_params = np.clip(center + draw * spread, 0.0, 1.0)

        ev = evaluate_fn(child_params)
        evaluations += 1
        child = Individual(
            params=ev.params,
            scatter=spread.copy(),
            restrictions=ev.restrictions,
            ttl=cfg.start_ttl,
            p_pcc_kw=ev.p_pcc_kw,
            q_pcc_kvar=ev.q_pcc_kvar,
        )

        for ind in pop:
            ind.ttl -= 1
        expired = [i for i in range(len(pop)) if pop[i].ttl <= 0]
        if expired:
            # one expired slot is refreshed per epoch, worst one first
            target = max(expired, key=lambda i: _rank_key(pop[i]))
            accepted = is_better_than(child, pop[target])
            pop[target] = child
        else:
            target = order[-1]
            accepted = is_better_than(child, pop[target])
            if accepted:
                pop[target] = child

        if is_better_than(child, best):
            best = child.copy()
        success_avg = pt1(success_avg, 1.0 if accepted else 0.0, cfg.t)
        no_success = 0 if accepted else no_success + 1
        trace.append(
            (
                epoch,
                float(best.restrictions[0]),
                float(best.restrictions[1]),
                float(best.restrictions[2]),
            )
        )

    return OptimizerResult(
        best=best, epochs_used=epoch, evaluations=evaluations, trace=trace, population=pop
    )


@dataclass
class DirectionResult:
    direction: Direction
    best: Individual
    epochs_used: int
    pf_calls: int
    trace: list


def run_direction(
    model: FeederModel,
    direction: Direction,
    cfg: RevolConfig,
    rng: np.random.Generator | None = None,
) -> DirectionResult:
    """Optimize one boundary direction; returns the best individual found.

    The best individual has zero violations whenever any feasible point
    was encountered; otherwise it is the least-violating one (check
    ``best.feasible``).
    """
    if rng is None:
        rng = substream(cfg.seed, "revol", direction.alpha, direction.beta)
    out = run_optimizer(
        lambda params: evaluate_setpoint(params, model, direction),
        2 * model.n_der,
        cfg,
        rng,
    )
    return DirectionResult(
        direction=direction,
        best=out.best,
        epochs_used=out.epochs_used,
        pf_calls=out.evaluations,
        trace=out.trace,
    )


@dataclass
class SweepResult:
    polygon: ForPolygon
    reports: list[DirectionResult]
    pf_calls: int

    def boundary_points(self) -> np.ndarray:
        return np.array(
            [[r.best.p_pcc_kw, r.best.q_pcc_kvar] for r in self.reports if r.best.feasible]
        )


def sweep(
    model: FeederModel, cfg: RevolConfig, literal_directions: bool = False
) -> SweepResult:
    """Run all eight directions and hull the feasible boundary points."""
    directions = PRINTED_DIRECTIONS if literal_directions else COMPASS_DIRECTIONS
    reports = [
        run_direction(
            model, d, cfg, rng=substream(cfg.seed, "revol-dir", i, d.alpha, d.beta)
        )
        for i, d in enumerate(directions)
    ]
    points = [
        (r.best.p_pcc_kw, r.best.q_pcc_kvar) for r in reports if r.best.feasible
    ]
    if len(points) < 3:
        raise DegenerateRegionError(
            f"only {len(points)} feasible boundary points; no region identifiable"
        )
    polygon = convex_hull(np.array(points))
    return SweepResult(
        polygon=polygon, reports=reports, pf_calls=sum(r.pf_calls for r in reports)
    )
