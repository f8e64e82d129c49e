"""Closed-form power flow for the single-DER feeder, used as test oracle.

Independent of the package solver: works straight from the feeder data,
reduces the linear network (transformer series branch, line pi section,
magnetizing shunt) to a Thevenin two-bus equivalent seen from the DER
bus, and solves the constant-power bus with the classic quadratic in
|V|^2. No iteration anywhere.

Derivation, with V0 = 1 (slack), V1 (LV trafo bus), V2 (DER bus):

  bus 1 balance:  (y_t + y_l + j*b_h) V1 = y_t V0 + y_l V2
  bus 2 current:  I2 = (y_l + j*b_h) V2 - y_l V1 = Y_eq V2 - Y_src V0
  power at 2:     S2 = V2 conj(I2) = |V2|^2 conj(Y_eq) - V2 conj(Y_src)

With W = |V2|^2 this closes to A W^2 - B W + C = 0 where A = |Y_eq|^2,
B = 2 Re(conj(Y_eq) conj(S2)) + |Y_src|^2, C = |S2|^2; the high-voltage
root gives W, then V2 follows directly from the power equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

S_BASE_MVA = 0.4
F_HZ = 50.0


@dataclass(frozen=True)
class TwoBusSolution:
    v1_pu: float
    v2_pu: float
    p_pcc_kw: float
    q_pcc_kvar: float


def solve_two_bus(model, p_kw: float, q_kvar: float) -> TwoBusSolution:
    assert len(model.ders) == 1, "oracle only covers the single-DER feeder"
    trafo = model.transformer
    line = model.lines[0]

    z_base = trafo.vn_lv_kv**2 / S_BASE_MVA
    vk = trafo.vk_percent / 100.0
    vkr = trafo.vkr_percent / 100.0
    z_t = complex(vkr, math.sqrt(max(vk**2 - vkr**2, 0.0))) * (S_BASE_MVA / trafo.sn_mva)
    y_t = 1.0 / z_t

    g_m = trafo.pfe_kw / 1000.0 / trafo.sn_mva
    y_abs = trafo.i0_percent / 100.0
    y_m = complex(g_m, -math.sqrt(max(y_abs**2 - g_m**2, 0.0))) * (
        trafo.sn_mva / S_BASE_MVA
    )

    length_km = line.length_m / 1000.0
    z_l = complex(line.r_ohm_per_km, line.x_ohm_per_km) * length_km / z_base
    y_l = 1.0 / z_l
    b_h = 2.0 * math.pi * F_HZ * line.c_nf_per_km * 1e-9 * length_km * z_base / 2.0

    d = y_t + y_l + 1j * b_h
    y_eq = y_l + 1j * b_h - y_l**2 / d
    y_src = y_l * y_t / d

    s2 = complex(p_kw, q_kvar) / (S_BASE_MVA * 1000.0)
    a = abs(y_eq) ** 2
    b = 2.0 * (y_eq.conjugate() * s2.conjugate()).real + abs(y_src) ** 2
    c = abs(s2) ** 2
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise ValueError("no power-flow solution exists for this injection")
    w = (b + math.sqrt(disc)) / (2.0 * a)
    if abs(s2) == 0.0:
        v2 = y_src / y_eq
    else:
        v2 = (w * y_eq.conjugate() - s2) / y_src.conjugate()
    v1 = (y_t + y_l * v2) / d

    i_t = y_t * (1.0 - v1)
    s_slack = i_t.conjugate() + y_m.conjugate()
    return TwoBusSolution(
        v1_pu=abs(v1),
        v2_pu=abs(v2),
        p_pcc_kw=-s_slack.real * S_BASE_MVA * 1000.0,
        q_pcc_kvar=-s_slack.imag * S_BASE_MVA * 1000.0,
    )
