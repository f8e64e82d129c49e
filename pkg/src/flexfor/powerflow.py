"""Balanced AC power flow on the radial feeder, Newton-Raphson in polar form.

Per-unit system: 0.4 MVA power base, voltage bases equal to the
transformer's rated voltages (20 kV / 0.4 kV), so the ideal winding ratio
is 1.0 pu. The transformer is a series impedance derived from (vk, vkr)
with the magnetizing branch (from pfe, i0) attached at the MV terminal;
lines are pi sections including their (tiny, at 400 V) charging
capacitance. The slack bus holds 1.0 pu.

Sign convention at the point of common coupling: p_pcc > 0 means power
flows from the feeder toward the transmission grid, so full DER export
lands at positive P. The PCC is the MV side of the transformer, hence
transformer losses (including no-load losses) reduce the exported power.

Everything is vectorized over a batch axis; a single solve is a batch of
one. The Jacobian is assembled from the complex power flow derivatives
dS/d(angle), dS/d(magnitude) restricted to the non-slack buses, which on
these feeders are all PQ.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .feeder import FeederModel, FeederSpec

S_BASE_MVA = 0.4
S_BASE_KW = S_BASE_MVA * 1000.0
F_HZ = 50.0
MISMATCH_TOL_PU = 1e-8
MAX_ITERATIONS = 25

_pf_lock = threading.Lock()
_pf_calls = 0


def pf_call_count() -> int:
    """Power-flow solves since the last reset (one per batch element)."""
    return _pf_calls


def reset_pf_calls() -> None:
    global _pf_calls
    with _pf_lock:
        _pf_calls = 0


def _count_calls(n: int) -> None:
    global _pf_calls
    with _pf_lock:
        _pf_calls += n


class NonConvergedError(RuntimeError):
    """Constraint evaluation requested on a non-converged power flow."""


@dataclass(frozen=True)
class InterchangeResult:
    """Power-flow outcome for one setpoint vector."""

    p_pcc_kw: float
    q_pcc_kvar: float
    v_pu: np.ndarray
    line_loading: np.ndarray
    trafo_loading: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class PowerFlowBatch:
    """Stacked power-flow outcomes; arrays share the leading batch axis."""

    p_pcc_kw: np.ndarray
    q_pcc_kvar: np.ndarray
    v_pu: np.ndarray
    line_loading: np.ndarray
    trafo_loading: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray

    def __len__(self) -> int:
        return len(self.p_pcc_kw)

    def result(self, i: int) -> InterchangeResult:
        return InterchangeResult(
            p_pcc_kw=float(self.p_pcc_kw[i]),
            q_pcc_kvar=float(self.q_pcc_kvar[i]),
            v_pu=self.v_pu[i],
            line_loading=self.line_loading[i],
            trafo_loading=float(self.trafo_loading[i]),
            converged=bool(self.converged[i]),
            iterations=int(self.iterations[i]),
        )


@dataclass(frozen=True)
class ConstraintReport:
    """Violation magnitudes and the §-style classification label.

    Transformer overload counts toward the "current" label: it is a
    thermal limit like the line ampacity (it never binds on the
    benchmark feeders, whose total DER capacity is far below the
    transformer rating).
    """

    max_v_violation: float
    max_i_violation: float
    trafo_violation: float
    label: str


@dataclass(frozen=True)
class _Prepared:
    ybus: np.ndarray
    n_buses: int
    der_buses: np.ndarray
    line_from: np.ndarray
    line_to: np.ndarray
    line_y_series: np.ndarray
    line_b_half: np.ndarray
    line_i_max_pu: np.ndarray
    trafo_y_series: complex
    trafo_s_rated_pu: float


@lru_cache(maxsize=32)
def _prepare(model: FeederModel) -> _Prepared:
    n = model.n_buses
    trafo = model.transformer
    v_base_lv = trafo.vn_lv_kv
    z_base_lv = v_base_lv**2 / S_BASE_MVA
    i_base_ka = S_BASE_MVA / (np.sqrt(3.0) * v_base_lv)

    vk = trafo.vk_percent / 100.0
    vkr = trafo.vkr_percent / 100.0
    z_t = (vkr + 1j * np.sqrt(max(vk**2 - vkr**2, 0.0))) * (S_BASE_MVA / trafo.sn_mva)
    y_t = 1.0 / z_t

    g_mag = trafo.pfe_kw / 1000.0 / trafo.sn_mva
    y_mag_abs = trafo.i0_percent / 100.0
    b_mag = -np.sqrt(max(y_mag_abs**2 - g_mag**2, 0.0))
    y_mag = (g_mag + 1j * b_mag) * (trafo.sn_mva / S_BASE_MVA)

    ybus = np.zeros((n, n), dtype=complex)
    ybus[0, 0] += y_t + y_mag
    ybus[1, 1] += y_t
    ybus[0, 1] -= y_t
    ybus[1, 0] -= y_t

    n_lines = len(model.lines)
    line_from = np.empty(n_lines, dtype=int)
    line_to = np.empty(n_lines, dtype=int)
    y_series = np.empty(n_lines, dtype=complex)
    b_half = np.empty(n_lines, dtype=float)
    i_max_pu = np.empty(n_lines, dtype=float)
    for k, line in enumerate(model.lines):
        length_km = line.length_m / 1000.0
        z = (line.r_ohm_per_km + 1j * line.x_ohm_per_km) * length_km / z_base_lv
        b_tot = 2.0 * np.pi * F_HZ * line.c_nf_per_km * 1e-9 * length_km * z_base_lv
        line_from[k] = line.from_bus
        line_to[k] = line.to_bus
        y_series[k] = 1.0 / z
        b_half[k] = b_tot / 2.0
        i_max_pu[k] = line.max_i_ka / i_base_ka
        f, t = line.from_bus, line.to_bus
        ybus[f, f] += y_series[k] + 1j * b_half[k]
        ybus[t, t] += y_series[k] + 1j * b_half[k]
        ybus[f, t] -= y_series[k]
        ybus[t, f] -= y_series[k]

    return _Prepared(
        ybus=ybus,
        n_buses=n,
        der_buses=np.array([d.bus for d in model.ders], dtype=int),
        line_from=line_from,
        line_to=line_to,
        line_y_series=y_series,
        line_b_half=b_half,
        line_i_max_pu=i_max_pu,
        trafo_y_series=complex(y_t),
        trafo_s_rated_pu=trafo.sn_mva / S_BASE_MVA,
    )


def _nr_solve(prep: _Prepared, s_spec: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Newton-Raphson on a batch of injection vectors.

    s_spec: (B, n) complex per-unit injections (slack column ignored).
    Returns (V complex (B, n), converged (B,), iterations (B,)).
    """
    yb = prep.ybus
    n = prep.n_buses
    b_size = s_spec.shape[0]

    theta = np.zeros((b_size, n))
    vm = np.ones((b_size, n))
    converged = np.zeros(b_size, dtype=bool)
    dead = np.zeros(b_size, dtype=bool)
    iterations = np.full(b_size, MAX_ITERATIONS, dtype=int)

    for it in range(MAX_ITERATIONS + 1):
        v = vm * np.exp(1j * theta)
        i_bus = v @ yb.T
        ds = s_spec - v * np.conj(i_bus)
        mism = np.maximum(
            np.abs(ds.real[:, 1:]).max(axis=1), np.abs(ds.imag[:, 1:]).max(axis=1)
        )
        newly = ~converged & ~dead & (mism < MISMATCH_TOL_PU)
        iterations[newly] = it
        converged |= newly
        active = ~converged & ~dead
        if it == MAX_ITERATIONS or not active.any():
            break

        va = v[active]
        ia = i_bus[active]
        vnorm = va / np.abs(va)
        y_v = yb[None, :, :] * va[:, None, :]
        diag_i = np.zeros_like(y_v)
        idx = np.arange(n)
        diag_i[:, idx, idx] = ia
        ds_dva = 1j * va[:, :, None] * np.conj(diag_i - y_v)
        ds_dvm = va[:, :, None] * np.conj(yb[None, :, :] * vnorm[:, None, :])
        ds_dvm[:, idx, idx] += vnorm * np.conj(ia)

        top = np.concatenate(
            [ds_dva.real[:, 1:, 1:], ds_dvm.real[:, 1:, 1:]], axis=2
        )
        bot = np.concatenate(
            [ds_dva.imag[:, 1:, 1:], ds_dvm.imag[:, 1:, 1:]], axis=2
        )
        jac = np.concatenate([top, bot], axis=1)
        rhs = np.concatenate([ds[active].real[:, 1:], ds[active].imag[:, 1:]], axis=1)
        try:
            dx = np.linalg.solve(jac, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            # singular Jacobian for some batch members: fall back sample-wise
            dx = np.empty_like(rhs)
            bad = np.zeros(len(rhs), dtype=bool)
            for i in range(len(rhs)):
                try:
                    dx[i] = np.linalg.solve(jac[i], rhs[i])
                except np.linalg.LinAlgError:
                    dx[i] = 0.0
                    bad[i] = True
            dead[np.flatnonzero(active)[bad]] = True

        m = n - 1
        theta_act = theta[active]
        vm_act = vm[active]
        theta_act[:, 1:] += dx[:, :m]
        vm_act[:, 1:] += dx[:, m:]
        theta[active] = theta_act
        vm[active] = vm_act

        bad_state = ~np.isfinite(vm).all(axis=1) | (vm.min(axis=1) < 0.05) | (
            vm.max(axis=1) > 5.0
        )
        dead |= bad_state & ~converged

    v = vm * np.exp(1j * theta)
    return v, converged, iterations


def _branch_quantities(prep: _Prepared, v: np.ndarray):
    i_bus = v @ prep.ybus.T
    s_slack = v[:, 0] * np.conj(i_bus[:, 0])
    p_pcc = -s_slack.real * S_BASE_KW
    q_pcc = -s_slack.imag * S_BASE_KW

    vf = v[:, prep.line_from]
    vt = v[:, prep.line_to]
    i_from = (vf - vt) * prep.line_y_series + 1j * prep.line_b_half * vf
    i_to = (vt - vf) * prep.line_y_series + 1j * prep.line_b_half * vt
    i_max_end = np.maximum(np.abs(i_from), np.abs(i_to))
    loading = i_max_end / prep.line_i_max_pu

    i_t = (v[:, 0] - v[:, 1]) * prep.trafo_y_series
    s_hv = np.abs(v[:, 0] * np.conj(i_t))
    s_lv = np.abs(v[:, 1] * np.conj(i_t))
    trafo_loading = np.maximum(s_hv, s_lv) / prep.trafo_s_rated_pu
    return p_pcc, q_pcc, loading, trafo_loading


def solve_many(
    model: FeederModel, p_kw: np.ndarray, q_kvar: np.ndarray, chunk_size: int = 2048
) -> PowerFlowBatch:
    """Solve a batch of injection vectors, shape (B, n_der) each."""
    prep = _prepare(model)
    p_kw = np.atleast_2d(np.asarray(p_kw, dtype=float))
    q_kvar = np.atleast_2d(np.asarray(q_kvar, dtype=float))
    if p_kw.shape != q_kvar.shape or p_kw.shape[1] != len(prep.der_buses):
        raise ValueError("injection arrays must both be (B, n_der)")
    b_size = p_kw.shape[0]

    out_p = np.empty(b_size)
    out_q = np.empty(b_size)
    out_v = np.empty((b_size, prep.n_buses))
    out_load = np.empty((b_size, len(prep.line_from)))
    out_trafo = np.empty(b_size)
    out_conv = np.empty(b_size, dtype=bool)
    out_iter = np.empty(b_size, dtype=int)

    for start in range(0, b_size, chunk_size):
        sl = slice(start, min(start + chunk_size, b_size))
        s_spec = np.zeros((sl.stop - sl.start, prep.n_buses), dtype=complex)
        s_spec[:, prep.der_buses] = (p_kw[sl] + 1j * q_kvar[sl]) / S_BASE_KW
        v, conv, iters = _nr_solve(prep, s_spec)
        p_pcc, q_pcc, loading, trafo = _branch_quantities(prep, v)
        out_p[sl] = p_pcc
        out_q[sl] = q_pcc
        out_v[sl] = np.abs(v)
        out_load[sl] = loading
        out_trafo[sl] = trafo
        out_conv[sl] = conv
        out_iter[sl] = iters

    _count_calls(b_size)
    return PowerFlowBatch(
        p_pcc_kw=out_p,
        q_pcc_kvar=out_q,
        v_pu=out_v,
        line_loading=out_load,
        trafo_loading=out_trafo,
        converged=out_conv,
        iterations=out_iter,
    )


def solve(model: FeederModel, p_kw, q_kvar) -> InterchangeResult:
    """Power flow for one per-DER injection vector (kW, kvar)."""
    batch = solve_many(
        model, np.asarray(p_kw, dtype=float)[None, :], np.asarray(q_kvar, dtype=float)[None, :]
    )
    return batch.result(0)


def violation_arrays(
    batch: PowerFlowBatch, spec: FeederSpec
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-sample violation magnitudes (voltage pu, line fraction, trafo fraction).

    Values are reported for every batch element, converged or not; the
    caller is responsible for handling non-converged entries.
    """
    v_min, v_max = spec.v_band
    v = batch.v_pu[:, 1:]
    v_viol = np.maximum(
        np.maximum(v - v_max, 0.0).max(axis=1), np.maximum(v_min - v, 0.0).max(axis=1)
    )
    i_viol = np.maximum(batch.line_loading - 1.0, 0.0).max(axis=1)
    t_viol = np.maximum(batch.trafo_loading - 1.0, 0.0)
    return v_viol, i_viol, t_viol


def evaluate_constraints(result: InterchangeResult, spec: FeederSpec) -> ConstraintReport:
    """Violation magnitudes and classification for one converged result."""
    if not result.converged:
        raise NonConvergedError("power flow did not converge; cannot classify")
    v_min, v_max = spec.v_band
    v = result.v_pu[1:]
    v_viol = float(max(np.maximum(v - v_max, 0.0).max(), np.maximum(v_min - v, 0.0).max()))
    i_viol = float(np.maximum(result.line_loading - 1.0, 0.0).max())
    t_viol = float(max(result.trafo_loading - 1.0, 0.0))

    thermal = i_viol > 0.0 or t_viol > 0.0
    if v_viol > 0.0 and thermal:
        label = "both"
    elif v_viol > 0.0:
        label = "voltage"
    elif thermal:
        label = "current"
    else:
        label = "feasible"
    return ConstraintReport(
        max_v_violation=v_viol,
        max_i_violation=i_viol,
        trafo_violation=t_viol,
        label=label,
    )
