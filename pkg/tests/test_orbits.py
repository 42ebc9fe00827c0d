import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw

from itad.counting import Dirac, DomainError, Poisson
from itad.fluxes import INF, mean_flux
from itad.kernels import Central, Decentral
from itad.orbits import (ChaosFactorError, OrbitConfig, OrbitConfigError, chaos_factor,
                         chaos_factor_closed_form, chaotic_orbit, deactivation_orbit,
                         detect_period, fixed_point_sweep, hysteresis_loop,
                         iterations_to_tolerance, logistic_config, mean_fluxes, orbit, sis_config,
                         sis_step)

LAW, KER = Poisson(50.0), Decentral(0.1)
XI0 = 0.1438


def test_first_step_by_hand():
    cfg = OrbitConfig(LAW, KER, l=1, xi0=XI0, n_steps=1)
    q = 1 - 0.9 * math.exp(-5 * XI0)
    expected = XI0 + q * (1 - XI0)
    tr = orbit(cfg)
    assert tr.xi[1] == pytest.approx(expected, rel=1e-14)
    assert tr.xi[1] == pytest.approx(0.624543, abs=1e-6)


def test_default_start_is_mean_induction():
    cfg = OrbitConfig(LAW, KER, l=3, k=8, n_steps=0)
    assert cfg.initial == pytest.approx(0.14381616036571251, rel=1e-13)


def test_mean_fluxes_match_flux_module():
    cfg = OrbitConfig(LAW, Central(43.49969618756), l=2, m=4, xi0=0.3, n_steps=0)
    us = np.array([0.0, 0.2, 0.7, 1.0])
    g, d = mean_fluxes(cfg, us)
    for u, gi, di in zip(us, g, d):
        assert gi == pytest.approx(mean_flux(cfg.law, cfg.kernel, 2, u), rel=1e-12, abs=1e-15)
        assert di == pytest.approx(mean_flux(cfg.law, cfg.kernel, 4, u, kind="r"),
                                   rel=1e-12, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_sis_reduction(beta, r, xi0):
    tr = orbit(sis_config(beta, r, xi0, 60))
    for a, b in zip(tr.xi[:-1], tr.xi[1:]):
        assert abs(b - sis_step(a, beta, r)) <= 1e-15


def test_logistic_reduction():
    tr = orbit(logistic_config(0.123, 50))
    assert tr.scale == 4.0
    x, ref = 0.123, [0.123]
    for _ in range(50):
        x = 4.0 * x * (1.0 - x)
        ref.append(x)
    assert np.max(np.abs(tr.xi - np.array(ref))) <= 1e-12


def test_bifurcation_jump_in_deactivation():
    cfg = OrbitConfig(LAW, KER, l=3, xi0=XI0)
    rs = np.round(np.arange(0.285, 0.3001, 0.001), 3)
    entries = fixed_point_sweep(cfg, "r", rs)
    vals = np.array([e.last for e in entries])
    assert all(e.converged for e in entries)
    jumps = np.abs(np.diff(vals))
    j = int(np.argmax(jumps))
    assert jumps[j] > 0.1
    assert 0.285 <= rs[j] and rs[j + 1] <= 0.300


def test_hysteresis_loop():
    cfg = OrbitConfig(LAW, KER, l=3, xi0=XI0)
    values, up, down, area = hysteresis_loop(cfg, "r", np.linspace(0.2, 0.8, 61))
    differ = np.abs(up - down) > 1e-6
    assert differ.any()
    assert area > 0.0
    assert np.all(up >= down - 1e-9)


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(DomainError):
        fixed_point_sweep(OrbitConfig(LAW, KER, xi0=0.1), "q", [0.1])


def test_threshold_sweep_handles_infinity():
    cfg = OrbitConfig(LAW, KER, l=3, xi0=XI0)
    entries = fixed_point_sweep(cfg, "m", [2, 5, INF])
    assert entries[-1].value == INF
    assert all(0.0 <= e.last <= 1.0 for e in entries)


def test_deactivation_orbit_is_dual():
    cfg = OrbitConfig(LAW, KER, l=3, m=5, r=0.05, s=0.01, xi0=XI0, n_steps=200)
    xi = orbit(cfg).xi
    d = deactivation_orbit(cfg)
    assert np.max(np.abs(xi + d - 1.0)) <= 1e-12


def test_chaos_factor_anchor_and_closed_form():
    f = chaos_factor(LAW, KER)
    assert f == pytest.approx(1.7849, abs=1e-3)
    closed = chaos_factor_closed_form(50.0, 0.1, 0.1)
    assert abs(closed - f) <= 1e-9
    w = lambertw(math.exp(6.0) / 0.9).real
    assert closed == pytest.approx(5.0 * w / (w - 1) ** 2, rel=1e-14)


@pytest.mark.parametrize("c,p,si", [(10.0, 0.3, False), (50.0, 0.02, True), (3.0, 0.5, True)])
def test_chaos_factor_closed_form_matches_scan(c, p, si):
    f = chaos_factor(Poisson(c), Decentral(p), self_interaction=si, check_closed_form=False)
    assert f == pytest.approx(chaos_factor_closed_form(c, p, p if si else 0.0), abs=1e-9)


def test_chaos_factor_undefined():
    with pytest.raises(ChaosFactorError):
        chaos_factor(LAW, KER, l=INF)
    with pytest.raises(ChaosFactorError):
        chaos_factor(Dirac(0), KER, self_interaction=False)


def test_chaotic_orbit_peak_and_range():
    ch = chaotic_orbit(OrbitConfig(LAW, KER, l=1, xi0=XI0, n_steps=500, renormalize=True))
    assert abs(ch.map_values.max() - 1.0) <= 1e-6
    assert ch.trace.xi.min() >= 0.0 and ch.trace.xi.max() <= 1.0
    assert ch.trace.scale == ch.scale


def test_period_two_cycle_detected():
    cfg = OrbitConfig(Dirac(1), Decentral(1.0), l=1, self_interaction=False,
                      renormalize=True, xi0=0.3, n_steps=3000, scale=3.2)
    tr = orbit(cfg)
    assert not tr.converged
    assert detect_period(tr.xi) == 2
    assert detect_period(np.linspace(0, 1, 2000)) is None


def test_convergence_stops_early():
    tr = orbit(OrbitConfig(LAW, KER, l=1, xi0=XI0, n_steps=10_000), stop_on_converge=True)
    assert tr.converged and tr.xi.size < 10_000
    assert tr.fixed_point == tr.xi[-1]
    assert tr.fluxes.shape == (tr.xi.size - 1, 2)


def test_iterations_to_tolerance_monotone():
    cfg = OrbitConfig(LAW, KER, l=1, xi0=0.0)
    starts = np.linspace(0.0, 0.99, 12)
    entries = iterations_to_tolerance(cfg, 1e-8, starts)
    ns = [e.n_required for e in entries]
    assert None not in ns
    assert all(b <= a for a, b in zip(ns, ns[1:]))
    stalled = iterations_to_tolerance(OrbitConfig(LAW, KER, l=3, r=0.5, xi0=0.0), 1e-3, [0.1])
    assert stalled[0].flagged and stalled[0].n_required is None


def test_orbit_config_validation():
    with pytest.raises(OrbitConfigError):
        OrbitConfig(LAW, KER, r=1.5, xi0=0.1)
    with pytest.raises(OrbitConfigError):
        OrbitConfig(LAW, KER)
    with pytest.raises(OrbitConfigError):
        OrbitConfig(LAW, KER, l=1, s=0.5, xi0=0.1)
    with pytest.raises(OrbitConfigError):
        OrbitConfig(LAW, KER, l=0, xi0=0.1)
    cfg = OrbitConfig(LAW, KER, l=3, m=INF, xi0=0.1)
    assert cfg.to_dict()["m"] == "inf"
