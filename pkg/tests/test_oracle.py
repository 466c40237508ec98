"""Direct physical-space reference solver and linearized transport."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import varwave as vw
from varwave.errors import DomainError
from varwave.metric import path_domain, shifts_on_curve, tangent_by_theta
from varwave.oracle import (direct_solve, physical_tangent_solve,
                            trajectory_energy, weight_inequality_residual,
                            _solve_v)
from varwave.slices import detect_singularities, extract_level_curve
from tests._suites import FROZEN


def test_cfl_guard():
    ws = vw.constant_speed(1.0)
    datum = vw.make_datum(ws, kind="poly_traveling", h=0.05, amplitude=0.3,
                          halfwidth=0.4)
    with pytest.raises(DomainError):
        direct_solve(datum, ws, 0.1, 0.05, cfl=0.95)


def test_constant_speed_advection_convergence():
    # with c constant and R0 = 0 the exact solution is u0(x - c t)
    ws = vw.constant_speed(1.0)
    T = 0.5
    errs = []
    for h in (1.0 / 64, 1.0 / 128):
        datum = vw.make_datum(ws, kind="poly_traveling", h=h, amplitude=0.5,
                              halfwidth=0.4)
        traj = direct_solve(datum, ws, T, h, save_times=[T])
        st = traj.state_at(T)
        exact = datum.sample(traj.x - T)["u0"]
        errs.append(np.max(np.abs(st.u - exact)))
    assert errs[1] < 3e-3
    assert 3.0 < errs[0] / errs[1] < 5.5


def test_energy_drift_shrinks_under_refinement():
    ws = vw.cosine_speed(2.0, 1.0)
    T = 0.2
    drifts = []
    for h in (1.0 / 64, 1.0 / 128):
        datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.4,
                              halfwidth=0.45, v_amplitude=0.2)
        traj = direct_solve(datum, ws, T, h, save_times=[T])
        E = trajectory_energy(traj, traj.state_at(T))
        drifts.append(abs(E - datum.E0))
    assert drifts[1] < 0.5 * drifts[0]
    assert drifts[1] < 3e-3 * datum.E0


def test_validity_cap_trips_on_underresolved_data():
    # slopes of this datum already brush the 1/h cap, so the validity
    # flag must drop essentially immediately
    ws = vw.cosine_speed(2.0, 1.0)
    h = 0.01
    datum = vw.make_datum(ws, kind="bump", h=h, amplitude=2.0,
                          halfwidth=0.1, v_amplitude=0.0)
    traj = direct_solve(datum, ws, 0.1, h)
    assert not traj.valid
    assert traj.breakdown_time is not None
    assert traj.breakdown_time < 0.05


def test_chart_singular_time_converges_under_refinement():
    # the dissipative direct solver saturates its peak slope well below
    # the 1/h cap, so the singular time is checked by chart refinement
    ws = vw.cosine_speed(2.0, 1.0)
    times = []
    for h in (0.01, 0.005):
        datum = vw.make_datum(ws, kind="bump", h=h, amplitude=1.5,
                              halfwidth=0.15, v_amplitude=0.0)
        chart = vw.solve_for_time(datum, ws, 0.6, h)
        t_star = detect_singularities(chart).first_singular_time
        assert t_star is not None
        times.append(t_star)
    assert abs(times[1] - times[0]) / times[1] < 0.02
    assert 0.25 < times[1] < 0.35


def test_vertical_displacement_ode():
    # _solve_v against an adaptive integrator on frozen coefficient fields
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 512
    x = np.linspace(0.0, 2.0, int(2.0 / h) + 1)
    u = 0.3 * np.sin(np.pi * x) ** 2
    R = 0.4 * np.cos(2.0 * x)
    S = -0.2 * np.sin(3.0 * x)
    r = 0.1 * np.sin(x)
    s = 0.05 * np.cos(2.0 * x)
    v = _solve_v(ws, u, R, S, r, s, h)

    def rhs(t, y):
        uu = 0.3 * np.sin(np.pi * t) ** 2
        RR = 0.4 * np.cos(2.0 * t)
        SS = -0.2 * np.sin(3.0 * t)
        rr = 0.1 * np.sin(t)
        ss = 0.05 * np.cos(2.0 * t)
        c, dc, _ = ws.evaluate(uu)
        return [-(RR - SS) * dc / (2.0 * c * c) * y[0] + (rr - ss) / (2.0 * c)]

    sol = solve_ivp(rhs, (0.0, 2.0), [0.0], t_eval=x, rtol=1e-10, atol=1e-12)
    assert np.max(np.abs(v - sol.y[0])) < 1e-5


def test_tangent_transport_matches_chart_differencing():
    # independent linearized transport vs theta differencing of the chart
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 96
    T = 0.15
    a_lo, a_hi = 0.35, 0.55

    def datum_fn(theta):
        a = (1.0 - theta) * a_lo + theta * a_hi
        return vw.make_datum(ws, kind="poly", h=h, amplitude=a,
                             halfwidth=0.45, v_amplitude=0.25)

    path = vw.PathOfData(datum_fn, np.linspace(0.0, 1.0, 3),
                         datum_fn(1.0).E0 * (1.0 + 1e-9))
    grid = path_domain(path, ws, T, h)
    chart, tan = tangent_by_theta(path, 0.5, ws, *grid)
    curve = extract_level_curve(chart, T)
    sf = shifts_on_curve(chart, tan, curve)

    datum = datum_fn(0.5)
    traj = direct_solve(datum, ws, T, h, save_times=[0.0, T])
    from varwave.chart import poly_bump
    x0 = traj.x
    da = a_hi - a_lo
    dth_u0, dth_du0 = poly_bump(x0, da, 0.5, 0.45)
    u0 = datum.sample(x0)["u0"]
    du0 = datum.sample(x0)["du0"]
    c, dc, _ = ws.evaluate(u0)
    r0 = dc * dth_u0 * du0 + c * dth_du0
    s0 = -r0
    zeros = np.zeros_like(x0)
    ttraj = physical_tangent_solve(traj, zeros, zeros, r0, s0, T,
                                   save_times=[T])
    st = ttraj.state_at(T)

    order = np.argsort(curve.x)
    xs, w_c, z_c = curve.x[order], sf.w[order], sf.z[order]
    rt_c, st_c = sf.rt[order], sf.st[order]
    scale = max(np.max(np.abs(st.rt)), np.max(np.abs(st.st)))
    mask = (x0 > xs[0]) & (x0 < xs[-1])
    for chart_f, orac_f, tol in ((w_c, st.w, 5e-3), (z_c, st.z, 5e-3),
                                 (rt_c, st.rt, 0.1), (st_c, st.st, 0.1)):
        diff = np.interp(x0[mask], xs, chart_f) - orac_f[mask]
        assert np.max(np.abs(diff)) < tol * max(1.0, scale)


def test_weight_inequality_discrete():
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 128
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.5,
                          halfwidth=0.4, v_amplitude=0.3)
    taus = [0.0, 0.05, 0.1, 0.15, 0.2]
    traj = direct_solve(datum, ws, 0.2, h, save_times=taus)
    for i in range(len(taus) - 1):
        res = weight_inequality_residual(traj, i, i + 1)
        assert res <= FROZEN["C_weight_ineq"] * h
