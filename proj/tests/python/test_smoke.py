"""Smoke tests for the Python module against numpy oracles."""

import math

import numpy as np
import pytest

import spectralkit as sk


def test_solver_registry():
    solvers = sk.registered_solvers()
    assert {"trivial", "ad1d", "ns2d", "ns3d"} <= set(solvers)


def test_params_round_trip():
    p = sk.create_default_params("ns2d")
    p.set("nu_2", 0.125)
    p.set("oper.nx", 32)
    q = sk.ParamTree.deserialize(p.serialize())
    assert q == p
    assert q.get("nu_2") == 0.125
    assert q.get("oper.nx") == 32
    with pytest.raises(sk.ConfigError):
        p.set("no.such.leaf", 1.0)


@pytest.mark.parametrize("shape", [(64,), (32, 16), (8, 12, 10)])
def test_fft_matches_numpy(shape):
    rng = np.random.default_rng(7)
    u = rng.standard_normal(shape)
    uhat = sk.fft_forward(u)
    ref = np.fft.rfftn(u) / u.size  # forward carries the 1/N amplitude factor
    assert uhat.shape == ref.shape
    assert np.max(np.abs(uhat - ref)) < 1e-14
    back = sk.fft_inverse(uhat, list(shape))
    assert np.max(np.abs(back - u)) < 1e-13


def test_taylor_green_energy_and_decay():
    p = sk.create_default_params("ns2d")
    p.set("output.enable_files", False)
    p.set("oper.nx", 64)
    p.set("oper.ny", 64)
    p.set("nu_2", 0.01)
    p.set("init_fields.type", "constant")
    p.set("init_fields.constant.value", 0.0)
    p.set("time_stepping.fixed_dt", 0.01)
    p.set("time_stepping.t_end", 0.5)
    sim = sk.Simulation(p)
    sim.set_quiet(True)

    x = np.arange(64) * 2 * math.pi / 64
    w0 = 2.0 * np.sin(x)[:, None] * np.sin(x)[None, :]
    sim.set_phys("rot", w0)
    assert sim.energy() == pytest.approx(0.25, rel=1e-12)
    assert sim.enstrophy() == pytest.approx(0.5, rel=1e-12)

    sim.run()
    w = sim.get_phys("rot")
    assert np.max(np.abs(w - w0 * math.exp(-2 * 0.01 * 0.5))) < 1e-10
    ux = sim.get_phys("ux")  # derived velocity, cos x sin y up to sign convention
    assert ux.shape == (64, 64)
    assert np.max(np.abs(ux)) > 0.1


def test_viscous_run_dissipates():
    p = sk.create_default_params("ns2d")
    p.set("output.enable_files", False)
    p.set("nu_2", 0.05)
    p.set("time_stepping.t_end", -1.0)
    p.set("time_stepping.n_iters", 10)
    sim = sk.Simulation(p)
    sim.set_quiet(True)
    e0 = sim.energy()
    summary = sim.run()
    assert summary["iterations"] == 10
    assert sim.energy() < e0
    assert sim.dissipation_rate() > 0
    assert "fft" in summary["kernel_seconds"]


def test_divergence_raises():
    p = sk.create_default_params("ns2d")
    p.set("output.enable_files", False)
    p.set("nu_2", 0.0)
    p.set("time_stepping.fixed_dt", 10.0)
    p.set("time_stepping.t_end", -1.0)
    p.set("time_stepping.n_iters", 10)
    sim = sk.Simulation(p)
    sim.set_quiet(True)
    with pytest.raises(sk.DivergenceError):
        sim.run()


def test_bench_dict():
    r = sk.run_bench("ad1d", [64], iters=3, seed=5)
    assert r["iterations"] == 3
    assert r["elapsed_per_iter"] == r["elapsed_total"] / 3
    assert len(r["state_checksum"]) == 16
