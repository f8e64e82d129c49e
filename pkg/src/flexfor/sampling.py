"""Random-sampling identification of the feasible operation region.

Two samplers produce labelled clouds of interconnection power flows:

* ``sample_uniform`` draws every normalized set-value independently from
  U[0, 1]. With many DERs the aggregate concentrates in the middle of
  the region (sums of independent uniforms convolve toward a bell), so
  the hull of the feasible points collapses as the node count grows.
* ``sample_dirichlet_two_stage`` first draws aggregate targets for P and
  Q from U[0, 1], then splits each aggregate over the units with a
  Dirichlet share vector. The per-unit value is the aggregate times K
  times its share, clamped into [0, 1]; clamping bias is reduced by
  reflecting three quarters of the sample across the axes (p -> 1-p,
  q -> 1-q, both).

Both samplers push the set-values through the inverter model, solve the
power flows in one vectorized batch, and classify each point by the type
of grid-constraint violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import powerflow
from .feeder import FeederModel
from .geometry import ForPolygon, convex_hull
from .inverter import apply_setpoints

LABELS = ("feasible", "voltage", "current", "both", "non-converged")
_LABEL_CODE = {name: i for i, name in enumerate(LABELS)}


@dataclass(frozen=True)
class DirichletConfig:
    """Two-stage sampler settings; alpha may be a scalar or per-DER vector."""

    sample_size: int = 10000
    alpha: float = 1.2
    seed: int = 0

    def alpha_vector(self, k: int) -> np.ndarray:
        alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (k,)).copy()
        if not (alpha > 0).all():
            raise ValueError("every alpha component must be positive")
        return alpha


@dataclass
class LabelledCloud:
    """Interconnection power flows with per-point classification."""

    p_kw: np.ndarray
    q_kvar: np.ndarray
    labels: np.ndarray  # int codes into LABELS
    label_names: tuple[str, ...] = field(default=LABELS, repr=False)

    def __len__(self) -> int:
        return len(self.p_kw)

    @property
    def feasible_count(self) -> int:
        return int((self.labels == _LABEL_CODE["feasible"]).sum())

    def feasible_points(self) -> np.ndarray:
        mask = self.labels == _LABEL_CODE["feasible"]
        return np.column_stack([self.p_kw[mask], self.q_kvar[mask]])

    def label_counts(self) -> dict[str, int]:
        return {name: int((self.labels == i).sum()) for i, name in enumerate(LABELS)}

    def to_csv(self) -> str:
        rows = ["p_kw,q_kvar,label"]
        for p, q, code in zip(self.p_kw, self.q_kvar, self.labels):
            rows.append(f"{float(p)!r},{float(q)!r},{LABELS[code]}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "LabelledCloud":
        lines = text.strip().splitlines()
        p, q, codes = [], [], []
        for row in lines[1:]:
            a, b, name = row.split(",")
            p.append(float(a))
            q.append(float(b))
            codes.append(_LABEL_CODE[name])
        return cls(
            p_kw=np.array(p), q_kvar=np.array(q), labels=np.array(codes, dtype=np.int8)
        )


def dirichlet_shares(k: int, alpha, rng: np.random.Generator) -> np.ndarray:
    """One share vector on the k-simplex via normalized Gamma(alpha_i, 1) draws."""
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (k,))
    if not (alpha > 0).all():
        raise ValueError("every alpha component must be positive")
    g = rng.standard_gamma(alpha)
    return g / g.sum()


def _dirichlet_shares_batch(n: int, alpha: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_gamma(alpha, size=(n, len(alpha)))
    return g / g.sum(axis=1, keepdims=True)


def transform_subsets(p_n: np.ndarray, q_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reflect three quarters of the sample to counter clipping bias.

    Quarter 1 is untouched, quarter 2 reflects the active values
    (p -> 1 - p), quarter 3 the reactive values, quarter 4 both. When
    the sample size is not divisible by four, the final quarter absorbs
    the remainder rows.
    """
    p_n = np.array(p_n, dtype=float, copy=True)
    q_n = np.array(q_n, dtype=float, copy=True)
    n = p_n.shape[0]
    quarter = n // 4
    p_n[quarter : 2 * quarter] = 1.0 - p_n[quarter : 2 * quarter]
    q_n[2 * quarter : 3 * quarter] = 1.0 - q_n[2 * quarter : 3 * quarter]
    p_n[3 * quarter :] = 1.0 - p_n[3 * quarter :]
    q_n[3 * quarter :] = 1.0 - q_n[3 * quarter :]
    return p_n, q_n


def evaluate_cloud(model: FeederModel, p_n: np.ndarray, q_n: np.ndarray) -> LabelledCloud:
    """Project, solve and classify a batch of normalized setpoints."""
    applied = apply_setpoints(p_n, q_n, model)
    batch = powerflow.solve_many(model, applied.p_kw, applied.q_kvar)
    v_viol, i_viol, t_viol = powerflow.violation_arrays(batch, model.spec)

    voltage = v_viol > 0.0
    thermal = (i_viol > 0.0) | (t_viol > 0.0)
    codes = np.select(
        [voltage & thermal, voltage, thermal],
        [
            _LABEL_CODE["both"],
            _LABEL_CODE["voltage"],
            _LABEL_CODE["current"],
        ],
        default=_LABEL_CODE["feasible"],
    ).astype(np.int8)
    codes[~batch.converged] = _LABEL_CODE["non-converged"]
    return LabelledCloud(p_kw=batch.p_pcc_kw, q_kvar=batch.q_pcc_kvar, labels=codes)


def sample_uniform(model: FeederModel, n: int, seed: int) -> LabelledCloud:
    """Independent U[0, 1] set-values for every DER, solved and classified."""
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    k = model.n_der
    p_n = rng.uniform(size=(n, k))
    q_n = rng.uniform(size=(n, k))
    return evaluate_cloud(model, p_n, q_n)


def sample_dirichlet_two_stage(model: FeederModel, cfg: DirichletConfig) -> LabelledCloud:
    """Aggregate-first sampling: U[0,1] targets split by Dirichlet shares."""
    n = cfg.sample_size
    if n < 1:
        raise ValueError("sample size must be >= 1")
    k = model.n_der
    alpha = cfg.alpha_vector(k)
    rng = np.random.default_rng(cfg.seed)

    a_p = rng.uniform(size=(n, 1))
    a_q = rng.uniform(size=(n, 1))
    x_p = _dirichlet_shares_batch(n, alpha, rng)
    x_q = _dirichlet_shares_batch(n, alpha, rng)
    p_n = np.clip(a_p * k * x_p, 0.0, 1.0)
    q_n = np.clip(a_q * k * x_q, 0.0, 1.0)
    p_n, q_n = transform_subsets(p_n, q_n)
    return evaluate_cloud(model, p_n, q_n)


def feasible_hull(cloud: LabelledCloud) -> ForPolygon:
    """Convex hull of the feasible points: the identified region."""
    return convex_hull(cloud.feasible_points())
