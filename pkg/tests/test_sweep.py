import json
import time

import numpy as np
import pytest

from anisodicke.basis import ModelParams
from anisodicke.model import ground_energy
from anisodicke.sweep import (
    OBSERVABLES,
    ConfigError,
    PhaseGrid,
    RunConfig,
    axis,
    convergence_scan,
    evaluate_cell,
    parse_range,
    run_scan,
)


def small(observable="gs_energy_density", **kw):
    base = dict(observable=observable, g1=(0.0, 1.0, 2), g2=(0.0, 1.0, 2), N=4, n_max=10)
    base.update(kw)
    return RunConfig(**base)


def test_parse_range():
    assert parse_range("0:2:5") == (0.0, 2.0, 5)
    assert parse_range("1.5") == (1.5, 1.5, 1)
    with pytest.raises(ConfigError):
        parse_range("0:1")
    assert np.array_equal(axis((0.0, 1.0, 3)), [0.0, 0.5, 1.0])
    with pytest.raises(ConfigError):
        axis((0.0, 1.0, 0))


@pytest.mark.parametrize("kw", [
    dict(observable="nonsense"),
    dict(g1=(0.0, 1.0, 0)),
    dict(g2=(-1.0, 1.0, 3)),
    dict(N=3),
    dict(observable="mi_grid"),
    dict(workers=0),
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        small(**kw)


def test_smoke_scan(tmp_path):
    cfg = small(out=str(tmp_path))
    t0 = time.perf_counter()
    grid = run_scan(cfg)
    assert time.perf_counter() - t0 < 1.0
    rows = (tmp_path / "gs_energy_density.csv").read_text().splitlines()
    assert rows[0] == "g1,g2,value"
    assert len(rows) == 5
    p = ModelParams(g1=1.0, g2=0.0, N=4, n_max=10)
    assert grid.values[1, 0] == ground_energy(p) / 4
    assert float(rows[3].split(",")[2]) == grid.values[1, 0]


def test_bit_identical_and_worker_independent(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run_scan(small("ipr_gs", out=str(a)))
    run_scan(small("ipr_gs", out=str(b)))
    run_scan(small("ipr_gs", out=str(c), workers=2))
    ref = (a / "ipr_gs.csv").read_bytes()
    assert (b / "ipr_gs.csv").read_bytes() == ref
    assert (c / "ipr_gs.csv").read_bytes() == ref
    ma = json.loads((a / "ipr_gs.manifest.json").read_text())
    mc = json.loads((c / "ipr_gs.manifest.json").read_text())
    ma["config"].pop("out"), mc["config"].pop("out")
    ma["config"].pop("workers"), mc["config"].pop("workers")
    assert ma == mc


def test_manifest_round_trip(tmp_path):
    cfg = small("pr_state_k", state="middle", out=str(tmp_path))
    run_scan(cfg)
    meta = json.loads((tmp_path / "pr_state_k.manifest.json").read_text())
    assert RunConfig.from_dict(meta["config"]) == cfg
    assert meta["n_max"] == 10 and meta["state_selector"] == "middle" and "version" in meta
    grid = PhaseGrid.read_csv(tmp_path / "pr_state_k.csv")
    assert grid.metadata == meta


def test_csv_round_trip_full_precision(tmp_path):
    g = PhaseGrid(np.array([0.1, 0.2]), np.array([0.3]), np.array([[1 / 3], [np.nan]]))
    g.write_csv(tmp_path / "x.csv")
    assert (tmp_path / "x.csv").read_text().splitlines()[2] == "0.2,0.3,"
    back = PhaseGrid.read_csv(tmp_path / "x.csv")
    assert back.values[0, 0] == 1 / 3
    assert np.isnan(back.values[1, 0])


def test_missing_cells_recorded(tmp_path):
    cfg = RunConfig(observable="tc_curve", g1=(0.0, 2.0, 3), g2=(0.0, 0.0, 1), out=str(tmp_path))
    grid = run_scan(cfg)
    assert np.isnan(grid.values[0, 0]) and np.isnan(grid.values[1, 0])
    assert grid.values[2, 0] == pytest.approx(0.5 / np.arctanh(1 / 4))
    reasons = (tmp_path / "tc_curve.reasons.csv").read_text().splitlines()
    assert reasons[0] == "g1,g2,reason"
    assert len(reasons) == 3 and "no transition" in reasons[1]


def test_out_of_range_state_is_missing():
    grid = run_scan(small("pr_state_k", state="100000"), write=False)
    assert grid.missing == 4 and len(grid.reasons) == 4


def test_unwritable_output_fails_before_compute(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        run_scan(small(out=str(blocker / "sub")))


def test_resume_skips_done_cells(tmp_path, monkeypatch):
    cfg = small("photon_density", out=str(tmp_path))
    first = run_scan(cfg)
    import anisodicke.sweep as sweep_mod
    calls = []
    original = sweep_mod.evaluate_cell
    monkeypatch.setattr(sweep_mod, "evaluate_cell", lambda *a: calls.append(a) or original(*a))
    again = run_scan(small("photon_density", out=str(tmp_path), resume=True))
    assert calls == []
    assert np.array_equal(first.values, again.values)


def test_layered_quench_grid(tmp_path):
    cfg = small("quench_pr", g1=(1.0, 1.0, 1), g2=(0.5, 0.5, 1), out=str(tmp_path), times=(0.0, 1.0))
    grid = run_scan(cfg)
    assert grid.values.shape == (1, 1, 2)
    assert grid.values[0, 0, 0] == 1.0
    rows = (tmp_path / "quench_pr.csv").read_text().splitlines()
    assert rows[0] == "g1,g2,t,value" and len(rows) == 3
    back = PhaseGrid.read_csv(tmp_path / "quench_pr.csv")
    assert back.layer_name == "t" and np.array_equal(back.values, grid.values)


def test_mi_grid_header(tmp_path):
    cfg = RunConfig(observable="mi_grid", g1=(0.2, 0.2, 1), g2=(0.2, 0.2, 1), N=2, n_max=4,
                    temps=(0.0, 1.0, 3), out=str(tmp_path))
    run_scan(cfg)
    rows = (tmp_path / "mi_grid.csv").read_text().splitlines()
    assert rows[0] == "g1,g2,T,value" and len(rows) == 4


def test_vnee_profile_files(tmp_path):
    cfg = small("vnee_profile", g1=(1.0, 1.0, 1), g2=(1.1, 1.1, 1), out=str(tmp_path))
    grid = run_scan(cfg)
    prof = (tmp_path / "vnee_profile_0_0.csv").read_text().splitlines()
    assert prof[0] == "E,S" and len(prof) == 1 + 5 * 11
    assert grid.values[0, 0] == max(float(r.split(",")[1]) for r in prof[1:])


@pytest.mark.parametrize("obs", OBSERVABLES)
def test_every_observable_evaluates(obs):
    kw = {}
    if obs == "mi_grid":
        kw = dict(N=2, n_max=4, temps=(0.0, 1.0, 2))
    cfg = small(obs, **kw)
    value = evaluate_cell(cfg, 1.2, 0.9)
    if isinstance(value, tuple):
        value = value[0]
    assert np.all(np.isfinite(value))


def test_convergence_normal_phase(tmp_path):
    cfg = RunConfig(observable="gs_energy_density", g1=(0.1, 0.3, 2), g2=(0.1, 0.2, 2), N=4,
                    out=str(tmp_path))
    report = convergence_scan(cfg, [20, 40])
    assert report.differences[0] < 1e-10
    assert report.converged
    assert (tmp_path / "nmax_20" / "gs_energy_density.csv").exists()
    data = json.loads((tmp_path / "convergence.json").read_text())
    assert data["n_max_values"] == [20, 40]
    with pytest.raises(ConfigError):
        convergence_scan(cfg, [20])


def test_convergence_flags_growth():
    cfg = RunConfig(observable="photon_density", g1=(1.5, 1.5, 1), g2=(1.0, 1.0, 1), N=8)
    report = convergence_scan(cfg, [2, 3, 30])
    assert not report.converged


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"observable": "ipr_gs", "g1": [0, 1, 3], "N": 6, "n_max": 8}))
    cfg = RunConfig.load(path, n_max=12)
    assert cfg.observable == "ipr_gs" and cfg.N == 6 and cfg.n_max == 12 and cfg.g1 == (0, 1, 3)
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        RunConfig.load(path)
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.json")
