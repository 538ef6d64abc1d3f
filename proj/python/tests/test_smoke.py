import math

import numpy as np
import pytest

import toda_harmonic as th

SMALL_PLAN = {"n_radii": 4, "n_r_finest": 129, "n_theta": 16, "epsilons": [0.1, 0.0], "extrapolation_points": 3}


def test_grid_layout():
    g = th.make_grid(0.5, 9, 16)
    assert len(g) == 1 + 8 * 16
    assert g.rho()[0] == 0.0
    assert g.rho()[-1] == 0.5


def test_fuchsian_zero_data_gives_zero():
    g = th.make_grid(0.6, 17, 32)
    k = th.TodaCoefficients.fuchsian(g, 3)
    zero = th.TodaState(g, 3)
    u, report = th.solve_dirichlet(k, zero, th.constant_subsolution(k), th.torsion_supersolution(k, 0.0))
    assert report["converged"]
    for f in u.u:
        assert np.max(np.abs(f)) < 1e-8


def test_bubble_boundary_data_reproduce_the_bubble():
    errors = []
    for n_r in (33, 65):
        g = th.make_grid(0.45, n_r, 2 * (n_r - 1))
        k = th.TodaCoefficients.constant(g, [1.0])
        exact = th.exact_bubble(g, 0.5, 1.0, 2)
        top = float(np.max(exact.u[0]))
        u, _ = th.solve_dirichlet(k, exact, th.constant_subsolution(k), th.torsion_supersolution(k, top))
        errors.append(th.sup_difference(u, exact))
    # second order in h
    assert errors[0] < 5e-3
    assert 3.2 < errors[0] / errors[1] < 4.8


def test_arrays_round_trip():
    g = th.make_grid(0.5, 5, 8)
    values = np.linspace(-1.0, 1.0, len(g))
    s = th.TodaState.from_arrays(g, [values])
    np.testing.assert_array_equal(s.u[0], values)
    with pytest.raises(th.ConfigError):
        th.TodaState.from_arrays(g, [values[:-1]])


def test_bergman_z():
    r = th.bergman_integral({"kind": "poly", "coeffs": [0, 1]})
    assert abs(r["estimate"] - math.pi / 6) < 1e-6


def test_maximal_norm_stays_below_bound():
    g = th.plan_grid(SMALL_PLAN)
    k = th.TodaCoefficients.fuchsian(g, 2)
    state, limit, trace = th.maximal_solution(k, SMALL_PLAN)
    assert len(trace["radii"]) == 4
    centers = [r["center"][0] for r in trace["radii"]]
    assert all(b < a for a, b in zip(centers, centers[1:]))
    # finite radii sit above the limit 0, so the raw norm exceeds the bound
    assert state.center()[0] > 0.0
    assert th.higgs_norm(state, k)[0] > th.fuchsian_norm(2)
    assert abs(limit.center()[0]) < abs(state.center()[0])


def test_run_reports_status(tmp_path):
    status, report, log = th.run({"command": "bergman", "f": {"kind": "poly", "coeffs": [1]}, "output_dir": str(tmp_path)})
    assert status == 0
    assert (tmp_path / "bergman.json").exists()
    status, report, _ = th.run({"command": "dirichlet", "output_dir": str(tmp_path)})
    assert status == 2
    with pytest.raises(th.ConfigError):
        th.run({"command": "dirichlet", "colour": 1})


def test_errors_are_typed():
    with pytest.raises(th.PreconditionError):
        th.TodaCoefficients.from_higgs({"n": 2, "gammas": [{"kind": "poly", "coeffs": [0, 0]}]}, th.make_grid(0.5, 5, 8))
