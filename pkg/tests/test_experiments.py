import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nwss.channel import ScenarioConfig, build_bundle, symmetric_config
from nwss.errors import ConfigError
from nwss.experiments import (CSV_COLUMNS, ResultRow, SweepSpec, config_at, emit_eigen,
                              load_document, parse_list, parse_rows, read_rows, rows_to_csv,
                              run_sweep)


def pv_desk():
    # n = 4 with three PV clusters split over two sub-arrays and one WV cluster
    return ScenarioConfig(M=4, K=4, S=4, g=2, s_p_per_group=(2, 1), r_per_group=(2, 2), s_w=1,
                          rho_p_per_group=(0.5, 0.5), rho_w=0.5, a_p=0.85, a_w=0.85, a_s=0.6,
                          snr_mu=10 ** 1.5 / 4)


def test_rho_sweep_is_unimodal_with_max_near_cluster_share():
    spec = SweepSpec(pv_desk(), "rho_p", (0, 0.25, 0.5, 0.75, 1), ("mc_capacity",),
                     trials=10_000, seed=1)
    vals = [r.value_bits for r in run_sweep(spec, timing=False)]
    best = int(np.argmax(vals))
    assert spec.grid[best] == 0.75
    assert all(np.diff(vals[:best + 1]) > 0) and all(np.diff(vals[best:]) < 0)


def test_group_sweep_closed_form_nondecreasing():
    base = symmetric_config(4, 4, 4, 1, 4, 1.0, a_p=0.85, a_s=0.6, snr_mu=10.0)
    rows = run_sweep(SweepSpec(base, "g", (1, 2, 4), ("closed_form",)), timing=False)
    vals = [r.value_bits for r in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_empty_grid_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    rows = run_sweep(SweepSpec(pv_desk(), "snr_db", (), ("closed_form",)), out)
    assert rows == []
    assert out.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_rows_present_exactly_for_requested_methods():
    methods = ("closed_form", "eigen_spread", "mmse_rate")
    rows = run_sweep(SweepSpec(pv_desk(), "snr_db", (0, 10), methods, trials=50))
    assert [r.method for r in rows] == list(methods) * 2
    assert [r.value for r in rows] == [0.0] * 3 + [10.0] * 3
    for r in rows:
        assert (r.std_error is None) == (r.method != "mmse_rate")
        assert r.wall_time_ms >= 0 and r.error == ""


def test_budget_errors_recorded_and_sweep_continues():
    base = symmetric_config(4, 4, 4, 2, 4, 1.0, a_p=0.5, snr_mu=1.0)
    spec = SweepSpec(base, "n_joint", (4, 8), ("closed_form", "eigen_spread"), budget=1000)
    rows = run_sweep(spec)
    assert rows[0].error == "" and rows[0].value_bits > 0
    assert "BudgetExceededError" in rows[2].error and math.isnan(rows[2].value_bits)
    assert rows[3].error == ""


def test_high_snr_structural_error_recorded():
    spec = SweepSpec(pv_desk().replace(K=2), "snr_db", (10,), ("high_snr",))
    assert "M = S = K" in run_sweep(spec)[0].error


def test_sweep_bytes_identical_across_reruns_and_workers(tmp_path):
    spec = SweepSpec(pv_desk(), "rho_p", (0.2, 0.5, 0.8),
                     ("mc_capacity", "mc_jensen", "closed_form", "mmse_rate"), trials=3000, seed=42)
    paths = []
    for w in (1, 3, 1):
        p = tmp_path / f"run{len(paths)}.csv"
        run_sweep(spec, p, workers=w, timing=False)
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_common_random_numbers_across_grid():
    # same seed at every point: snr only rescales identical channel draws
    spec = SweepSpec(pv_desk(), "snr_db", (0.0, 0.0), ("mc_capacity",), trials=500, seed=3)
    a, b = run_sweep(spec)
    assert a.value_bits == b.value_bits


def test_csv_round_trip(tmp_path):
    spec = SweepSpec(pv_desk(), "snr_db", (-3.3, 7.1), ("mc_jensen", "closed_form"), trials=200)
    rows = run_sweep(spec, tmp_path / "s.csv")
    assert read_rows(tmp_path / "s.csv") == rows


finite = st.floats(allow_nan=False, allow_infinity=True)


@given(st.lists(st.tuples(finite, finite, st.none() | st.floats(0, 1e3), st.none() | st.integers(1, 10**7)),
                max_size=6))
def test_csv_round_trip_is_bit_exact(items):
    rows = [ResultRow("snr_db", v, "mc_capacity", bits, se, n, None, "") for v, bits, se, n in items]
    back = parse_rows(rows_to_csv(rows))
    assert [(r.value, r.value_bits, r.std_error, r.trials) for r in back] == \
        [(r.value, r.value_bits, r.std_error, r.trials) for r in rows]


def test_parse_rejects_foreign_header():
    with pytest.raises(ValueError):
        parse_rows("a,b\n1,2\n")


# -- grid points ---------------------------------------------------------------------

def test_config_at_rho_p_keeps_energy_normalized():
    cfg = config_at(pv_desk(), "rho_p", 0.3)
    assert cfg.rho_p_per_group == (0.3, 0.3) and cfg.rho_w == pytest.approx(0.7)
    assert cfg.is_normalized()


def test_config_at_s_p():
    base = symmetric_config(6, 6, 6, 2, 2, 1 / 3)
    cfg = config_at(base, "s_p", 4)
    assert cfg.s_p_per_group == (2, 2) and cfg.s_w == 2
    assert cfg.rho_p_per_group == (4 / 6, 4 / 6)
    wv = config_at(base, "s_p", 0)
    assert wv.g == 0 and wv.rho_w == 1.0
    pv = config_at(base, "s_p", 6)
    assert pv.s_w == 0 and pv.rho_w == 0.0


def test_config_at_scaling_params():
    base = symmetric_config(4, 4, 4, 2, 2, 0.5, snr_mu=8.0)
    n8 = config_at(base, "n_joint", 8)
    assert (n8.M, n8.S, n8.K, n8.g, n8.s_w) == (8, 8, 8, 4, 4)
    assert n8.snr_mu * n8.K == base.snr_mu * base.K
    m8 = config_at(base, "m_fixed_k", 8)
    assert (m8.M, m8.S, m8.K, m8.g) == (8, 8, 4, 4)
    assert m8.snr_mu * m8.K == base.snr_mu * base.K
    assert config_at(base, "snr_db", 20).snr_mu == pytest.approx(100.0)


@pytest.mark.parametrize("param,grid", [("g", (3,)), ("s_p", (7,)), ("n_joint", (5,)),
                                        ("rho_p", (-0.5,)), ("g", (1.5,)), ("bogus", (1,))])
def test_invalid_grid_points_rejected(param, grid):
    base = symmetric_config(4, 4, 4, 2, 2, 0.5)
    with pytest.raises(ConfigError):
        SweepSpec(base, param, grid, ("closed_form",))


@pytest.mark.parametrize("methods", [(), ("closed_form", "closed_form"), ("magic",)])
def test_invalid_methods_rejected(methods):
    with pytest.raises(ConfigError):
        SweepSpec(pv_desk(), "snr_db", (1,), methods)


def test_rho_sweep_needs_pv_groups():
    with pytest.raises(ConfigError):
        SweepSpec(symmetric_config(3, 3, 3, 0, 0, 0.0), "rho_p", (0.5,), ("closed_form",))


# -- eigenvalues -------------------------------------------------------------------

def test_emit_eigen_identity(tmp_path):
    cfg = symmetric_config(4, 4, 3, 0, 0, 0.0)
    out = tmp_path / "e.csv"
    eigs = emit_eigen(cfg, out)
    np.testing.assert_allclose(eigs, 3.0)
    lines = out.read_text().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert [int(l.split(",")[0]) for l in lines[1:]] == [1, 2, 3, 4]
    np.testing.assert_allclose([float(l.split(",")[1]) for l in lines[1:]], 3.0)


def test_more_subarrays_lower_condition_number():
    conds = []
    for g in (1, 2):
        e = emit_eigen(symmetric_config(4, 4, 4, g, 4, 1.0, a_p=0.85))
        conds.append(e[0] / e[-1])
    assert conds[1] < conds[0]


def test_full_pv_energy_lifts_fourth_eigenvalue():
    e = [emit_eigen(symmetric_config(8, 8, 8, 4, 4, rho, a_p=0.85, a_w=0.85)) for rho in (0.0, 1.0)]
    assert e[1][3] > e[0][3]


# -- documents ---------------------------------------------------------------------

def test_load_document_with_sweep_block(tmp_path, desk_cfg):
    p = tmp_path / "c.json"
    p.write_text(desk_cfg.to_json()[:-1] + ', "sweep": {"param": "snr_db", "grid": [1, 2]}}')
    cfg, sweep = load_document(p)
    assert cfg == desk_cfg and sweep == {"param": "snr_db", "grid": [1, 2]}
    p.write_text(desk_cfg.to_json()[:-1] + ', "sweep": {"prm": "snr_db"}}')
    with pytest.raises(ConfigError, match="prm"):
        load_document(p)
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_document(p)


def test_parse_list():
    assert parse_list("") == []
    assert parse_list("1, 2.5", float) == [1.0, 2.5]
    with pytest.raises(ConfigError):
        parse_list("1,x", float)
