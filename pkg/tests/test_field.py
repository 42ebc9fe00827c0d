import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_kernels, reference_laws
from itad.counting import Dirac, Poisson
from itad.field import (ConfigError, FieldConfig, IntegrationError, derived_fields, entropy,
                        frontier, initial_field, march_to_steady, omega_limit, solve,
                        solve_discrete, solve_spatiotemporal, solve_temporal, solve_transport,
                        telegrapher_check)
from itad.fluxes import INF, FluxSpec, mean_induction
from itad.kernels import Decentral, Subcentral

THRESHOLDS = [(8, 1, INF), (8, 3, 5), (4, 2, 2)]
MATRIX = list(itertools.product(reference_kernels(), reference_laws(), THRESHOLDS))


def _ids(case):
    kname, lname, (k, l, m) = case
    return f"{kname}-{lname}-k{k}l{l}m{m}"


def matrix_config(case, **kw):
    kname, lname, (k, l, m) = case
    opts = dict(grid_points=41, t_end=5.0, dt=0.01)
    opts.update(kw)
    return FieldConfig(reference_laws()[lname], reference_kernels()[kname],
                       FluxSpec(k=k, l=l, m=m), **opts)


@pytest.mark.parametrize("case", MATRIX, ids=[_ids(c) for c in MATRIX])
def test_field_matrix_invariants(case):
    cfg = matrix_config(case)
    sol = solve_spatiotemporal(cfg)
    assert sol.P.min() >= -1e-9 and sol.P.max() <= 1 + 1e-9
    if case[2][2] == INF:
        assert np.all(np.diff(sol.P, axis=0) >= -1e-12)
    steady = omega_limit(cfg)
    assert steady.residual <= 1e-10
    assert steady.P.min() >= 0 and steady.P.max() <= 1
    disc = solve_discrete(matrix_config(case, t_end=40))
    assert disc.P.min() >= 0.0 and disc.P.max() <= 1.0


@pytest.mark.parametrize("case", MATRIX[:3] + MATRIX[-3:], ids=[_ids(c) for c in MATRIX[:3] + MATRIX[-3:]])
def test_steady_state_agrees_with_marching(case):
    cfg = matrix_config(case, dt=0.5, t_end=1.0)
    limit = omega_limit(cfg)
    marched = march_to_steady(cfg, tol=1e-12, max_steps=200_000)
    assert marched.converged
    assert np.max(np.abs(limit.P - marched.P)) <= 1e-8


def test_transport_at_zero_velocity_is_spatiotemporal():
    cfg = matrix_config(MATRIX[4])
    a, b = solve_transport(cfg), solve_spatiotemporal(cfg)
    assert np.array_equal(a.P, b.P) and np.array_equal(a.times, b.times)
    assert np.array_equal(solve(cfg).P, b.P)


def test_temporal_matches_spatiotemporal_for_decentral():
    cfg = FieldConfig(Poisson(50.0), Decentral(0.1), FluxSpec(k=8, l=3, m=5),
                      grid_points=11, t_end=20.0, dt=0.01, save_every=1)
    sol = solve_spatiotemporal(cfg)
    temporal = solve_temporal(cfg)
    assert sol.P.shape[0] == temporal.P.size
    assert np.max(np.abs(sol.P - temporal.P[:, None])) <= 1e-10


def test_logistic_analytic_solution():
    beta, p0 = 1.0, 0.05
    cfg = FieldConfig(Dirac(1), Decentral(beta), FluxSpec(k=1, l=1, m=INF,
                                                          self_interaction=False),
                      grid_points=3, t_end=10.0, dt=1e-3, initial=p0, save_every=1)
    sol = solve_spatiotemporal(cfg)
    e = np.exp(beta * sol.times)
    exact = p0 * e / (1 - p0 + p0 * e)
    assert np.max(np.abs(sol.P - exact[:, None])) <= 1e-6


def test_dt_refinement():
    base = dict(grid_points=21, t_end=4.0)
    case = MATRIX[5]
    coarse = solve_spatiotemporal(matrix_config(case, dt=0.02, **base))
    fine = solve_spatiotemporal(matrix_config(case, dt=0.01, **base))
    assert np.max(np.abs(coarse.P[-1] - fine.P[-1])) <= 1e-6


def test_initial_field_is_induction_probability():
    cfg = FieldConfig(Poisson(50.0), Decentral(0.1), FluxSpec(k=8), grid_points=5)
    assert initial_field(cfg) == pytest.approx(np.full(5, mean_induction(Poisson(50.0),
                                                                         Decentral(0.1), 8)),
                                               rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(1, 6), st.integers(1, 6),
       st.sampled_from(list(reference_kernels())))
def test_discrete_map_stays_in_unit_interval(a, b, frac, l, m, kname):
    spec = FluxSpec(k=3, l=l, m=m, a=a * frac, alpha=1 - a * frac, b=b * frac, beta=1 - b * frac)
    cfg = FieldConfig(Poisson(10.0), reference_kernels()[kname], spec, grid_points=21,
                      t_end=30, mode="discrete")
    P = solve(cfg).P
    assert P.min() >= 0.0 and P.max() <= 1.0


def test_discrete_requires_integer_steps():
    with pytest.raises(ConfigError):
        FieldConfig(Poisson(1.0), Decentral(0.1), FluxSpec(k=1), mode="discrete", t_end=2.5)


def test_config_rejections():
    law, ker = Poisson(50.0), Decentral(0.1)
    with pytest.raises(ConfigError, match="CFL"):
        FieldConfig(law, ker, FluxSpec(k=8), grid_points=101, C1=1.0, dt=0.1, t_end=1.0)
    with pytest.raises(ConfigError):
        FieldConfig(law, ker, FluxSpec(k=8), C1=-1.0)
    with pytest.raises(ConfigError):
        FieldConfig(law, ker, FluxSpec(k=8), dt=2.0, t_end=1.0)
    with pytest.raises(ConfigError):
        FieldConfig(law, ker, FluxSpec(k=8, l=1, a=0.5))
    with pytest.raises(ConfigError):
        solve_spatiotemporal(FieldConfig(law, ker, FluxSpec(k=8), C1=0.1, dt=0.01, t_end=1.0))


def test_transport_blowup_is_flagged():
    cfg = FieldConfig(Poisson(50.0), Decentral(0.1), FluxSpec(k=8, l=INF, m=INF, a=1.0),
                      grid_points=11, C1=0.01, dt=3.0, t_end=30.0)
    sol = solve_transport(cfg)
    assert sol.blowup_time == pytest.approx(3.0)


def test_strict_solver_raises_on_excursion():
    cfg = FieldConfig(Poisson(50.0), Decentral(0.1), FluxSpec(k=8, l=INF, m=INF, a=1.0),
                      grid_points=5, dt=3.0, t_end=30.0)
    with pytest.raises(IntegrationError):
        solve_spatiotemporal(cfg)


def test_transport_carries_profile_downstream():
    spec = FluxSpec(k=8, l=INF, m=INF)
    cfg = FieldConfig(Poisson(50.0), Decentral(0.1), spec, grid_points=101, C1=1.0, dt=0.01,
                      t_end=0.5, initial=np.where(np.linspace(0, 1, 101) < 0.2, 1.0, 0.0),
                      save_every=10)
    P = solve_transport(cfg).P
    # pure upwind advection at CFL 1 is an exact shift
    assert np.array_equal(P[-1, 50:70], np.ones(20))
    assert np.all(P[-1, 71:] == 0.0)


def test_derived_fields_without_transport():
    cfg = matrix_config(MATRIX[0], save_every=10)
    sol = derived_fields(solve(cfg), cfg)
    assert np.all(sol.Q == 0.0) and np.all(sol.G == 0.0)
    assert np.array_equal(sol.H, entropy(sol.P))


def test_derived_fields_with_transport_are_nonnegative_energy():
    cfg = FieldConfig(Poisson(50.0), Subcentral(3.0057), FluxSpec(k=8, l=2, m=INF),
                      grid_points=51, C1=0.5, dt=0.02, t_end=1.0)
    sol = derived_fields(solve(cfg), cfg)
    assert np.all(sol.G >= 0.0) and np.all(np.diff(sol.G, axis=0) >= -1e-15)
    assert sol.Q.shape == sol.P.shape


def test_entropy_limits():
    assert np.array_equal(entropy([0.0, 1.0]), [0.0, 0.0])
    assert entropy(np.exp(-1.0)) == pytest.approx(np.exp(-1.0))


def test_frontier_crossings():
    xs = np.linspace(0, 1, 11)
    P = np.vstack([xs, 1 - np.abs(2 * xs - 1), np.full(11, 0.2)])
    out = frontier([0.0, 1.0, 2.0], xs, P)
    assert out[0] == (0.0, 0.5, 0)
    assert [c[1] for c in out if c[0] == 1.0] == pytest.approx([0.25, 0.75])
    assert [c[2] for c in out if c[0] == 1.0] == [0, 1]
    assert not [c for c in out if c[0] == 2.0]


def test_telegrapher_reduction_first_order():
    levels = telegrapher_check(Poisson(50.0), Subcentral(3.0057), 8, 0.5, 0.5)
    ratios = [lv.ratio_to_dx for lv in levels]
    assert all(r <= 5.0 for r in ratios)
    res = [lv.residual_first for lv in levels]
    assert all(b < a for a, b in zip(res, res[1:]))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 0.8)


def test_telegrapher_rejects_bad_forcing():
    with pytest.raises(ConfigError):
        telegrapher_check(Poisson(50.0), Decentral(0.1), 8, 0.0, 0.5)
