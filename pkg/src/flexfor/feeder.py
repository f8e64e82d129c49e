"""Synthetic 0.4 kV radial benchmark feeders.

A feeder is a single chain hanging off a 20/0.4 kV transformer: the MV
slack bus (index 0), the LV transformer bus (index 1) and ``n_der`` chain
buses (2 .. n_der+1), one inverter-connected battery per chain bus. All
feeders of the benchmark family share the total installed power and the
mean transformer-node distance, so their aggregated flexibility regions
are directly comparable regardless of the node count.

Line and transformer electrical constants come from a small embedded
catalogue (``data/std_types.json``); see the ``_source`` note in that
file for provenance.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources


class UnknownStandardType(ValueError):
    """Requested catalogue entry does not exist."""


def _load_catalogue() -> dict:
    with resources.files("flexfor.data").joinpath("std_types.json").open() as fh:
        return json.load(fh)


_CATALOGUE = _load_catalogue()


@dataclass(frozen=True)
class LineParams:
    r_ohm_per_km: float
    x_ohm_per_km: float
    c_nf_per_km: float
    max_i_ka: float


@dataclass(frozen=True)
class TrafoParams:
    sn_mva: float
    vn_hv_kv: float
    vn_lv_kv: float
    vk_percent: float
    vkr_percent: float
    pfe_kw: float = 0.0
    i0_percent: float = 0.0


def standard_line_params(name: str) -> LineParams:
    """Per-km constants of a catalogued cable type."""
    try:
        entry = _CATALOGUE["line"][name]
    except KeyError:
        known = ", ".join(sorted(_CATALOGUE["line"]))
        raise UnknownStandardType(
            f"unknown line type {name!r}; catalogue has: {known}"
        ) from None
    return LineParams(**entry)


def standard_trafo_params(name: str) -> TrafoParams:
    """Rating and short-circuit constants of a catalogued transformer type."""
    try:
        entry = _CATALOGUE["trafo"][name]
    except KeyError:
        known = ", ".join(sorted(_CATALOGUE["trafo"]))
        raise UnknownStandardType(
            f"unknown trafo type {name!r}; catalogue has: {known}"
        ) from None
    return TrafoParams(**entry)


@dataclass(frozen=True)
class FeederSpec:
    """User-facing description of one synthetic feeder."""

    n_der: int
    p_inst_total_kw: float = 200.0
    cos_phi_min: float = 0.9
    v_band: tuple[float, float] = (0.9, 1.1)
    line_type: str = "NAYY 4x150 SE"
    trafo_type: str = "0.4 MVA 20/0.4 kV"
    mean_trafo_node_distance_m: float = 400.0

    def validate(self) -> None:
        if self.n_der < 1:
            raise ValueError("n_der must be >= 1")
        if self.p_inst_total_kw <= 0:
            raise ValueError("p_inst_total_kw must be positive")
        if not 0.0 < self.cos_phi_min <= 1.0:
            raise ValueError("cos_phi_min must be in (0, 1]")
        v_min, v_max = self.v_band
        if not 0.0 < v_min < v_max:
            raise ValueError("voltage band must satisfy 0 < v_min < v_max")
        if self.mean_trafo_node_distance_m <= 0:
            raise ValueError("mean transformer-node distance must be positive")

    def to_json(self) -> str:
        d = asdict(self)
        d["v_band"] = list(self.v_band)
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeederSpec":
        d = json.loads(text)
        d["v_band"] = tuple(d["v_band"])
        return cls(**d)


@dataclass(frozen=True)
class Der:
    bus: int
    p_inst_kw: float
    s_max_kva: float


@dataclass(frozen=True)
class LineSegment:
    from_bus: int
    to_bus: int
    length_m: float
    r_ohm_per_km: float
    x_ohm_per_km: float
    c_nf_per_km: float
    max_i_ka: float


@dataclass(frozen=True)
class FeederModel:
    """Immutable grid model consumed by the power-flow solver.

    Bus 0 is the MV slack bus (held at 1.0 pu), bus 1 the LV transformer
    bus, buses 2 .. n_buses-1 the chain buses carrying one DER each.
    Line lengths are kept at full float precision; whole-metre rounding
    happens only in the tabular presentation (``table_row``).
    """

    spec: FeederSpec
    n_buses: int
    lines: tuple[LineSegment, ...]
    transformer: TrafoParams
    ders: tuple[Der, ...]

    @property
    def n_der(self) -> int:
        return len(self.ders)

    @property
    def line_length_m(self) -> float:
        return self.lines[0].length_m

    @property
    def feeder_length_m(self) -> float:
        return sum(line.length_m for line in self.lines)

    def mean_trafo_node_distance_m(self) -> float:
        dist, total = 0.0, 0.0
        for line in self.lines:
            dist += line.length_m
            total += dist
        return total / len(self.lines)


def build_feeder(spec: FeederSpec) -> FeederModel:
    """Construct the radial chain feeder described by ``spec``.

    The common line length solves mean_distance = l * (N + 1) / 2 for a
    uniform chain of N nodes. Installed power is split evenly with the
    float remainder assigned to the last DER so the sum is exact.
    """
    spec.validate()
    n = spec.n_der
    line_par = standard_line_params(spec.line_type)
    trafo = standard_trafo_params(spec.trafo_type)

    length = 2.0 * spec.mean_trafo_node_distance_m / (n + 1)
    lines = tuple(
        LineSegment(
            from_bus=1 + k,
            to_bus=2 + k,
            length_m=length,
            r_ohm_per_km=line_par.r_ohm_per_km,
            x_ohm_per_km=line_par.x_ohm_per_km,
            c_nf_per_km=line_par.c_nf_per_km,
            max_i_ka=line_par.max_i_ka,
        )
        for k in range(n)
    )

    p_each = spec.p_inst_total_kw / n
    p_values = [p_each] * (n - 1)
    # remainder to the last DER, using the same left-to-right accumulation
    # a later sum() performs, so the total reproduces exactly
    p_values.append(spec.p_inst_total_kw - sum(p_values))
    ders = tuple(
        Der(bus=2 + k, p_inst_kw=p, s_max_kva=p / spec.cos_phi_min)
        for k, p in enumerate(p_values)
    )

    return FeederModel(
        spec=spec, n_buses=n + 2, lines=lines, transformer=trafo, ders=ders
    )


def table_row(model: FeederModel) -> dict:
    """Published-style summary row: powers to 0.1, lengths to whole metres."""
    return {
        "n_der": model.n_der,
        "p_inst_der_kw": round(model.ders[0].p_inst_kw, 1),
        "s_max_der_kva": round(model.ders[0].s_max_kva, 1),
        "feeder_length_m": round(model.feeder_length_m),
        "line_length_m": round(model.line_length_m),
        "line_type": model.spec.line_type,
        "v_band": model.spec.v_band,
        "trafo_type": model.spec.trafo_type,
    }


def standard_feeder(n_der: int) -> FeederModel:
    """Benchmark feeder with the shared defaults (200 kW, cos phi 0.9, 400 m)."""
    return build_feeder(FeederSpec(n_der=n_der))
