import json
import math

import numpy as np
import pytest

import eet


def test_fcn_baseline():
    net = eet.complete_network(6)
    assert net.edge_count() == 15
    assert (net.injection, net.sink) == (1, 6)
    assert eet.predicted_efficiency(net) == pytest.approx(0.2, abs=1e-10)
    assert eet.dark_dimension(net) == 4
    out = eet.simulate(net, integrator=eet.Integrator(t_max=150.0, sample_step=1.0))
    assert out["levels"][-1] == "sink"
    pops = out["populations"]
    assert pops.shape == (len(out["times"]), 7)
    assert pops[-1, -1] == pytest.approx(0.2, abs=1e-5)
    assert pops[-1, 0] == pytest.approx(0.64, abs=1e-5)
    np.testing.assert_allclose(pops.sum(axis=1), 1.0, atol=1e-8)


def test_edge_deletion_removes_localization():
    net = eet.delete_edge(eet.complete_network(6), 1, 6)
    assert net == eet.parse_network("fcn:6~1,6")
    assert eet.predicted_efficiency(net) == pytest.approx(1.0, abs=1e-10)


def test_dark_projector_is_projector():
    p = eet.dark_projector(eet.complete_network(5))
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    np.testing.assert_allclose(p, p.conj().T, atol=1e-12)


def test_liouvillian_preserves_trace():
    s = eet.liouvillian(eet.complete_network(3), eet.Noise(gamma_deph=0.1))
    assert s.shape == (16, 16)
    # Row sums of the trace functional vanish: tr(d rho/dt) = 0.
    trace_rows = s[[0, 5, 10, 15], :].sum(axis=0)
    np.testing.assert_allclose(trace_rows, 0.0, atol=1e-12)


def test_exact_and_integrated_agree():
    net = eet.complete_network(4)
    noise = eet.Noise(gamma_deph=0.05)
    out = eet.simulate(net, noise, eet.Integrator(t_max=5.0, sample_step=1.0))
    exact = eet.propagate_exact(net, noise, 5.0)
    np.testing.assert_allclose(out["final_state"], exact, atol=1e-6)


def test_disorder_sweep_is_deterministic():
    net = eet.complete_network(4)
    cfg = eet.Integrator(t_max=60.0, sample_step=1.0)
    a = eet.disorder_sweep(net, [0.0, 0.2], 3, 7, integrator=cfg)
    b = eet.disorder_sweep(net, [0.0, 0.2], 3, 7, integrator=cfg, workers=2)
    assert a["summary_csv"] == b["summary_csv"]
    assert len(a["rows"]) == 6
    assert a["aggregates"][0]["mean_eta"] == pytest.approx(1.0 / 3.0, abs=1e-4)


def test_errors_map_to_python():
    with pytest.raises(eet.InvalidArgument):
        eet.complete_network(6, 1, 7)
    with pytest.raises(eet.Error):
        eet.delete_edge(eet.complete_network(3), 0, 2)


def test_run_config(tmp_path):
    cfg = json.loads(eet.default_config("simulate"))
    cfg["output_dir"] = str(tmp_path)
    cfg["integrator"]["t_max"] = 150.0
    code, line = eet.run(json.dumps(cfg))
    assert code == 0
    assert "eta_inf=0.2000" in line
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert math.isclose(summary["eta_inf"], 0.2, abs_tol=1e-5)
