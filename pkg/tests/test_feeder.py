import pytest

from flexfor.feeder import (
    FeederSpec,
    UnknownStandardType,
    build_feeder,
    standard_feeder,
    standard_line_params,
    standard_trafo_params,
    table_row,
)

# published configuration of the four benchmark feeders
TABLE_ROWS = [
    (1, 200.0, 222.2, 400, 400),
    (3, 66.7, 74.1, 600, 200),
    (9, 22.2, 24.7, 720, 80),
    (27, 7.4, 8.2, 771, 29),
]


@pytest.mark.parametrize("n,p_inst,s_max,l_feeder,l_line", TABLE_ROWS)
def test_table_rows_reproduced(n, p_inst, s_max, l_feeder, l_line):
    row = table_row(standard_feeder(n))
    assert row["n_der"] == n
    assert abs(row["p_inst_der_kw"] - p_inst) <= 0.1
    assert abs(row["s_max_der_kva"] - s_max) <= 0.1
    assert abs(row["feeder_length_m"] - l_feeder) <= 0.1
    assert abs(row["line_length_m"] - l_line) <= 0.1


@pytest.mark.parametrize("n", [1, 3, 9, 27, 7])
def test_geometry_invariants(n):
    model = standard_feeder(n)
    lengths = [line.length_m for line in model.lines]
    assert len(set(lengths)) == 1
    assert sum(lengths) == pytest.approx(model.feeder_length_m)
    assert model.mean_trafo_node_distance_m() == pytest.approx(400.0)


def test_radial_chain_topology():
    model = standard_feeder(9)
    for k, line in enumerate(model.lines):
        assert (line.from_bus, line.to_bus) == (1 + k, 2 + k)
    assert model.n_buses == 11
    assert [d.bus for d in model.ders] == list(range(2, 11))


@pytest.mark.parametrize("n", [1, 3, 9, 27, 7, 13])
def test_installed_power_sums_exactly(n):
    model = standard_feeder(n)
    assert sum(d.p_inst_kw for d in model.ders) == 200.0
    for d in model.ders:
        assert d.s_max_kva == pytest.approx(d.p_inst_kw / 0.9, abs=1e-12)


def test_line_catalogue_values():
    par = standard_line_params("NAYY 4x150 SE")
    assert par.r_ohm_per_km == 0.208
    assert par.x_ohm_per_km == 0.080
    assert par.c_nf_per_km == 261
    assert par.max_i_ka == 0.270
    assert standard_line_params("NAYY 4x150 SE") == par  # immutable catalogue


def test_trafo_catalogue_values():
    par = standard_trafo_params("0.4 MVA 20/0.4 kV")
    assert par.sn_mva == 0.4
    assert (par.vn_hv_kv, par.vn_lv_kv) == (20, 0.4)
    assert par.vk_percent == 6.0
    assert par.vkr_percent == 1.425
    assert standard_trafo_params("0.4 MVA 20/0.4 kV") == par


def test_unknown_types_rejected():
    with pytest.raises(UnknownStandardType, match="NAYY 4x150 SE"):
        standard_line_params("XYZ")
    with pytest.raises(UnknownStandardType, match="0.4 MVA 20/0.4 kV"):
        standard_trafo_params("nope")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_der": 0},
        {"n_der": 3, "p_inst_total_kw": -1.0},
        {"n_der": 3, "cos_phi_min": 0.0},
        {"n_der": 3, "cos_phi_min": 1.2},
        {"n_der": 3, "v_band": (1.1, 0.9)},
        {"n_der": 3, "mean_trafo_node_distance_m": 0.0},
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        build_feeder(FeederSpec(**kwargs))


def test_spec_json_round_trip():
    spec = FeederSpec(n_der=9, p_inst_total_kw=150.0, v_band=(0.92, 1.08))
    assert FeederSpec.from_json(spec.to_json()) == spec
