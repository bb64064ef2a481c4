import numpy as np
import pytest

from ifl.pde import (solve_coupled, solve_height, heat_reference,
                     solve_coupled_semi_implicit, grid_values)


def cos_profile(M, amp=0.3, k=1):
    u = np.arange(M) / M
    return 0.5 + amp * np.cos(2 * np.pi * k * u)


def test_linear_decay_and_absorption():
    M = 256
    traj = solve_coupled(np.full(M, 0.5), 1.0, 2.2, M,
                         time_grid=np.linspace(0, 2.2, 23))
    ref = np.maximum(1 - traj.times / 2, 0.0)
    assert np.abs(traj.Y - ref).max() <= 1e-6
    assert abs(traj.tau0 - 2.0) <= 1e-4
    # after absorption Y stays exactly 0 and rho stays exactly 1/2
    post = traj.times > traj.tau0
    assert np.all(traj.Y[post] == 0.0)
    assert np.all(traj.absorbed[post])
    assert np.abs(traj.rho[post] - 0.5).max() == 0.0


def test_mirror_symmetry():
    M = 128
    rho0 = cos_profile(M)
    up = solve_coupled(rho0, 0.5, 1.0, M, time_grid=np.linspace(0, 1, 6))
    dn = solve_coupled(rho0, -0.5, 1.0, M, time_grid=np.linspace(0, 1, 6))
    assert np.abs(up.Y + dn.Y).max() < 1e-12


def test_heat_reference_properties():
    modes = [(0, 0.5, 0.0), (1, 0.3, 0.0), (2, 0.0, 0.1)]
    M = 64
    assert np.allclose(heat_reference(modes, 0.0, M),
                       0.5 + 0.3 * np.cos(2 * np.pi * np.arange(M) / M)
                       + 0.1 * np.sin(4 * np.pi * np.arange(M) / M))
    one = heat_reference([(0, 0.5, 0.0)], 3.0, M)
    assert np.all(one == 0.5)
    amp = heat_reference([(1, 1.0, 0.0)], 1.0, M).max()
    assert amp == pytest.approx(np.exp(-2 * np.pi ** 2), rel=1e-10)


def test_heat_case_second_order_convergence():
    errs = {}
    for M in (128, 256, 512):
        tr = solve_coupled(cos_profile(M), 0.0, 0.1, M,
                           time_grid=np.array([0.0, 0.1]))
        exact = heat_reference([(0, 0.5, 0), (1, 0.3, 0)], 0.1, M)
        errs[M] = float(np.sqrt(np.mean((tr.rho[-1] - exact) ** 2)))
    assert 3.2 <= errs[128] / errs[256] <= 4.8
    assert 3.2 <= errs[256] / errs[512] <= 4.8


def test_mass_conservation():
    M = 256
    tr = solve_coupled(cos_profile(M), 0.5, 1.0, M, time_grid=np.linspace(0, 1, 11))
    mass = tr.rho.mean(axis=1)
    assert np.abs(mass - mass[0]).max() <= 1e-10


def test_range_preserved():
    M = 128
    tr = solve_coupled(cos_profile(M, amp=0.49), 0.3, 0.5, M,
                       time_grid=np.linspace(0, 0.5, 6))
    assert tr.rho.min() >= -1e-12 and tr.rho.max() <= 1 + 1e-12


def test_height_consistency_with_coupled():
    M = 256
    u = np.arange(M) / M
    h0 = 0.5 + (0.3 / np.pi) * np.sin(2 * np.pi * u)
    th = solve_height(h0, 0.5, M, time_grid=np.linspace(0, 0.5, 6))
    tc = solve_coupled(cos_profile(M), 0.5, 0.5, M, time_grid=np.linspace(0, 0.5, 6))
    rho_h = (np.roll(th.rho[-1], -1) - np.roll(th.rho[-1], 1)) * (M / 2) / 2 + 0.5
    tol = 5 * ((1 / M) ** 2 + 0.4 / M ** 2)
    assert np.abs(rho_h - tc.rho[-1]).max() <= tol
    assert th.Y[-1] == pytest.approx(tc.Y[-1], abs=tol)


def test_constant_height_closed_form():
    M = 64
    tr = solve_height(np.full(M, 0.3), 0.7, M, time_grid=np.linspace(0, 0.7, 8))
    ref = np.maximum(0.3 - tr.times / 2, 0.0)
    assert np.abs(tr.Y - ref).max() <= 1e-9
    assert abs(tr.tau0 - 0.6) <= 1e-6
    # spatial constancy is preserved exactly; the mean tracks Y to the
    # crossing tolerance (Y snaps to exactly 0 at absorption)
    assert (np.ptp(tr.rho, axis=1) == 0.0).all()
    assert np.abs(tr.rho.mean(axis=1) - tr.Y).max() <= 1e-9


def test_height_slope_gate():
    M = 128
    u = np.arange(M) / M
    with pytest.raises(ValueError, match="gate"):
        solve_height(np.sin(2 * np.pi * u) / (2 * np.pi) * 2 * np.pi, 0.1, M)


def test_semi_implicit_comparison():
    M = 256
    tc = solve_coupled(cos_profile(M), 0.5, 0.5, M, time_grid=np.linspace(0, 0.5, 6))
    ts = solve_coupled_semi_implicit(cos_profile(M), 0.5, 0.5, M,
                                     time_grid=np.linspace(0, 0.5, 6))
    tol = 5 * ((1 / M) ** 2 + 0.4 / M ** 2)
    assert np.abs(tc.rho[-1] - ts.rho[-1]).max() <= tol


def test_validation_errors():
    with pytest.raises(ValueError, match="power of two"):
        solve_coupled(np.full(100, 0.5), 1.0, 1.0, 100)
    with pytest.raises(ValueError, match="T must be positive"):
        solve_coupled(np.full(64, 0.5), 1.0, -1.0, 64)
    with pytest.raises(ValueError, match="dt_safety"):
        solve_coupled(np.full(64, 0.5), 1.0, 1.0, 64, dt_safety=2.0)
    with pytest.raises(ValueError, match="values in"):
        solve_coupled(np.full(64, 1.5), 1.0, 1.0, 64)


def test_csv_and_summary():
    M = 16
    tr = solve_coupled(np.full(M, 0.5), 0.2, 0.1, M, time_grid=np.array([0.0, 0.1]))
    csv = tr.to_csv()
    header = csv.splitlines()[0].split(",")
    assert header[:3] == ["t", "Y", "absorbed"]
    assert header[3] == "rho_0" and len(header) == 3 + M
    s = tr.summary()
    assert set(s) == {"tau0", "Y0", "M", "dt_safety"}
    assert grid_values(lambda u: np.asarray(u) * 0 + 0.5, 8).tolist() == [0.5] * 8
