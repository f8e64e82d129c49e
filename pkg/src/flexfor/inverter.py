"""Inverter model: normalized set-values to feasible PQ injections.

Batteries are four-quadrant devices, so the normalized range [0, 1] maps
affinely onto [-p_inst, p_inst] for active and [-s_max, s_max] for
reactive power (0.5 is zero power). Set points outside the apparent
power circle are moved to the closest admissible point: active power is
clamped to its own limit first, then the pair is scaled radially onto
the circle. The applied (possibly moved) point is what the caller feeds
back to the optimizer, so inverter limits never appear as a separate
constraint downstream.

All operations broadcast over leading axes: inputs of shape (..., n_der)
are processed sample-wise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .feeder import FeederModel

# feasibility slack (kVA) absorbing float rounding on the circle boundary
S_MAX_SLACK_KVA = 1e-9


@dataclass(frozen=True)
class AppliedSetpoint:
    """Injections actually applied after limit enforcement."""

    p_kw: np.ndarray
    q_kvar: np.ndarray
    clipped: np.ndarray  # bool, True where the raw point was moved


def _limits(model: FeederModel) -> tuple[np.ndarray, np.ndarray]:
    p_inst = np.array([d.p_inst_kw for d in model.ders])
    s_max = np.array([d.s_max_kva for d in model.ders])
    return p_inst, s_max


def denormalize(p_n, q_n, model: FeederModel) -> tuple[np.ndarray, np.ndarray]:
    """Map normalized set-values in [0, 1] to raw kW / kvar per DER."""
    p_inst, s_max = _limits(model)
    p = (2.0 * np.asarray(p_n, dtype=float) - 1.0) * p_inst
    q = (2.0 * np.asarray(q_n, dtype=float) - 1.0) * s_max
    return p, q


def project(p_kw, q_kvar, model: FeederModel) -> AppliedSetpoint:
    """Move raw injections onto the per-DER feasible set.

    Clamp P into [-p_inst, p_inst], then scale (P, Q) radially onto the
    s_max circle if the pair still lies outside. Idempotent; never
    increases apparent power.
    """
    p_inst, s_max = _limits(model)
    p = np.clip(np.asarray(p_kw, dtype=float), -p_inst, p_inst)
    q = np.asarray(q_kvar, dtype=float).copy()
    s = np.hypot(p, q)
    outside = s > s_max + S_MAX_SLACK_KVA
    scale = np.where(outside, s_max / np.where(outside, s, 1.0), 1.0)
    p = p * scale
    q = q * scale
    clipped = outside | (np.abs(p - np.asarray(p_kw, dtype=float)) > 0.0)
    return AppliedSetpoint(p_kw=p, q_kvar=q, clipped=clipped)


def renormalize(applied: AppliedSetpoint, model: FeederModel) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of denormalize, applied to the enforced injections."""
    p_inst, s_max = _limits(model)
    p_n = (applied.p_kw / p_inst + 1.0) / 2.0
    q_n = (applied.q_kvar / s_max + 1.0) / 2.0
    return p_n, q_n


def apply_setpoints(p_n, q_n, model: FeederModel) -> AppliedSetpoint:
    """denormalize followed by project, the full set-value pipeline."""
    p, q = denormalize(p_n, q_n, model)
    return project(p, q, model)
