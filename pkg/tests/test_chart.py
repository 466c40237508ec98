"""Characteristic chart solver: data handling, marching scheme, relabeling."""

import numpy as np
import pytest
from scipy.integrate import quad

import varwave as vw
from varwave.chart import (boundary_data, chart_domain, poly_bump, residuals,
                           smooth_bump, solve_chart, jacobian_determinant,
                           relabel)
from varwave.errors import DomainError, SolveError


def _rhs_scalar(ws, u, al, be, p, q):
    """All ten right-hand sides at one point, written out longhand."""
    c, dc, _ = ws.evaluate(u)
    c, dc = float(c), float(dc)
    k = dc / (8.0 * c * c)
    return {
        "uX": np.sin(al) / (4.0 * c) * p,
        "bX": k * (np.cos(al) - np.cos(be)) * p,
        "qX": k * (np.sin(al) - np.sin(be)) * p * q,
        "xX": (1.0 + np.cos(al)) * p / 4.0,
        "tX": (1.0 + np.cos(al)) * p / (4.0 * c),
        "uY": np.sin(be) / (4.0 * c) * q,
        "aY": k * (np.cos(be) - np.cos(al)) * q,
        "pY": k * (np.sin(be) - np.sin(al)) * p * q,
        "xY": -(1.0 + np.cos(be)) * q / 4.0,
        "tY": (1.0 + np.cos(be)) * q / (4.0 * c),
    }


def _reference_solve(trace, ws, X, Y):
    """Serial per-cell scalar fixed point, upper triangle only.

    Deliberately plain loops so that the vectorized diagonal march in
    solve_chart is checked against an independent implementation of the
    same discrete equations.
    """
    n = len(X)
    h = X[1] - X[0]
    d = n - 1   # data curve on the main anti-diagonal of a square grid
    F = {k: np.full((n, n), np.nan) for k in
         ("u", "al", "be", "p", "q", "x", "t")}
    for i in range(n):
        j = d - i
        F["u"][i, j] = np.interp(X[i], trace.x, trace.u)
        F["al"][i, j] = np.interp(X[i], trace.x, trace.alpha)
        F["be"][i, j] = np.interp(X[i], trace.x, trace.beta)
        F["p"][i, j] = np.interp(X[i], trace.x, trace.p)
        F["q"][i, j] = np.interp(X[i], trace.x, trace.q)
        F["x"][i, j] = X[i]
        F["t"][i, j] = 0.0
    for s in range(d + 1, 2 * n - 1):
        for i in range(max(1, s - n + 1), min(n - 1, s - 1) + 1):
            j = s - i
            if j < 1 or j > n - 1:
                continue
            W = {k: F[k][i - 1, j] for k in F}
            S = {k: F[k][i, j - 1] for k in F}
            D = {k: F[k][i - 1, j - 1] for k in F}
            fW = _rhs_scalar(ws, W["u"], W["al"], W["be"], W["p"], W["q"])
            fS = _rhs_scalar(ws, S["u"], S["al"], S["be"], S["p"], S["q"])
            u = W["u"] + S["u"] - D["u"]
            al = W["al"] + S["al"] - D["al"]
            be = W["be"] + S["be"] - D["be"]
            p = W["p"] + S["p"] - D["p"]
            q = W["q"] + S["q"] - D["q"]
            for _ in range(200):
                fx = _rhs_scalar(ws, u, al, be, p, q)
                al_n = S["al"] + 0.5 * h * (fS["aY"] + fx["aY"])
                be_n = W["be"] + 0.5 * h * (fW["bX"] + fx["bX"])
                p_n = S["p"] + 0.5 * h * (fS["pY"] + fx["pY"])
                q_n = W["q"] + 0.5 * h * (fW["qX"] + fx["qX"])
                u_n = 0.5 * (W["u"] + 0.5 * h * (fW["uX"] + fx["uX"])
                             + S["u"] + 0.5 * h * (fS["uY"] + fx["uY"]))
                delta = max(abs(al_n - al), abs(be_n - be), abs(p_n - p),
                            abs(q_n - q), abs(u_n - u))
                u, al, be, p, q = u_n, al_n, be_n, p_n, q_n
                if delta < 1e-14 * (1.0 + max(abs(p), abs(q))):
                    break
            fx = _rhs_scalar(ws, u, al, be, p, q)
            F["u"][i, j], F["al"][i, j], F["be"][i, j] = u, al, be
            F["p"][i, j], F["q"][i, j] = p, q
            F["x"][i, j] = 0.5 * (W["x"] + 0.5 * h * (fW["xX"] + fx["xX"])
                                  + S["x"] + 0.5 * h * (fS["xY"] + fx["xY"]))
            F["t"][i, j] = 0.5 * (W["t"] + 0.5 * h * (fW["tX"] + fx["tX"])
                                  + S["t"] + 0.5 * h * (fS["tY"] + fx["tY"]))
    return F


def test_bump_shapes():
    x = np.linspace(-1.0, 2.0, 601)
    for shape in (smooth_bump, poly_bump):
        val, dval = shape(x, amplitude=0.7, center=0.5, halfwidth=0.4)
        assert np.max(val) == pytest.approx(0.7, abs=1e-6)
        assert np.all(val[np.abs(x - 0.5) >= 0.4] == 0.0)
        # derivative consistency against central differences
        num = np.gradient(val, x)
        assert np.max(np.abs(num - dval)) < 0.05 * np.max(np.abs(dval))


def test_datum_energy_dual_route():
    ws = vw.cosine_speed(2.0, 1.0)
    datum = vw.make_datum(ws, kind="poly", h=1.0 / 512, amplitude=0.5,
                          halfwidth=0.4, v_amplitude=0.3)

    def integrand(x):
        u0, du0 = poly_bump(np.array([x]), 0.5, 0.5, 0.4)
        u1 = poly_bump(np.array([x]), 0.3, 0.5, 0.4)[0]
        c = float(ws.c(u0[0]))
        return u1[0] ** 2 + c ** 2 * du0[0] ** 2

    ref, _ = quad(integrand, 0.1, 0.9, limit=200)
    assert datum.E0 == pytest.approx(ref, rel=1e-5)


def test_datum_requires_compact_support():
    ws = vw.constant_speed(1.0)
    x = np.linspace(0.0, 1.0, 101)
    with pytest.raises(DomainError):
        vw.InitialDatum.from_samples(ws, x, np.sin(np.pi * x) + 0.5,
                                     np.zeros_like(x))


def test_zero_datum_closed_form():
    ws = vw.cosine_speed(2.0, 1.0)
    datum = vw.make_datum(ws, kind="zero", h=1.0 / 32)
    chart = vw.solve_for_time(datum, ws, 0.5, 1.0 / 32)
    c0 = float(ws.c(0.0))
    XX, YY = np.meshgrid(chart.X, chart.Y, indexing="ij")
    assert np.max(np.abs(chart.u)) < 1e-13
    assert np.max(np.abs(chart.alpha)) < 1e-13
    assert np.max(np.abs(chart.p - 1.0)) < 1e-12
    assert np.max(np.abs(chart.q - 1.0)) < 1e-12
    assert np.max(np.abs(chart.x - 0.5 * (XX - YY))) < 1e-12
    assert np.max(np.abs(chart.t - (XX + YY) / (2.0 * c0))) < 1e-12


def test_boundary_values_on_data_curve():
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 64
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.5,
                          halfwidth=0.4, v_amplitude=0.2)
    chart = vw.solve_for_time(datum, ws, 0.2, h)
    d = int(np.round(-(chart.X[0] + chart.Y[0]) / h))
    idx = np.arange(d + 1)
    jdx = d - idx
    trace = boundary_data(datum, ws, chart.X[idx])
    assert np.max(np.abs(chart.u[idx, jdx] - trace.u)) < 1e-12
    assert np.max(np.abs(chart.alpha[idx, jdx] - trace.alpha)) < 1e-12
    assert np.max(np.abs(chart.p[idx, jdx] - trace.p)) < 1e-12
    assert np.max(np.abs(chart.t[idx, jdx])) < 1e-14
    assert np.max(np.abs(chart.x[idx, jdx] - chart.X[idx])) < 1e-14


def test_vectorized_march_matches_serial_reference():
    ws = vw.cosine_speed(2.0, 1.0)
    n = 25
    X = np.linspace(0.0, 1.2, n)
    Y = np.linspace(-1.2, 0.0, n)
    datum = vw.make_datum(ws, kind="poly", h=0.05, amplitude=0.6,
                          halfwidth=0.4, v_amplitude=0.3)
    trace = boundary_data(datum, ws, X)
    chart = solve_chart(trace, ws, X, Y)
    ref = _reference_solve(trace, ws, X, Y)
    mask = ~np.isnan(ref["u"])
    for key, name in (("u", "u"), ("al", "alpha"), ("be", "beta"),
                      ("p", "p"), ("q", "q"), ("x", "x"), ("t", "t")):
        got = getattr(chart, name)
        assert np.max(np.abs(got[mask] - ref[key][mask])) < 1e-10, key


def test_constant_speed_keeps_alpha_zero():
    # a right-moving profile has R0 = 0, and with c constant the system
    # never couples the two families, so alpha stays identically zero
    ws = vw.constant_speed(1.0)
    h = 1.0 / 64
    datum = vw.make_datum(ws, kind="poly_traveling", h=h, amplitude=0.5,
                          halfwidth=0.4)
    chart = vw.solve_for_time(datum, ws, 0.5, h)
    assert np.max(np.abs(datum.R0)) < 1e-12
    assert np.max(np.abs(chart.alpha)) < 1e-10
    assert np.max(np.abs(chart.p - 1.0)) < 1e-10


def test_residual_refinement_is_second_order():
    ws = vw.cosine_speed(2.0, 1.0)
    vals = []
    for h in (1.0 / 48, 1.0 / 96):
        datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.4,
                              halfwidth=0.45, v_amplitude=0.2)
        chart = vw.solve_for_time(datum, ws, 0.25, h)
        res = residuals(chart)
        vals.append(max(res[k] for k in ("u_X", "beta_X", "alpha_Y", "p_Y",
                                         "q_X")))
    ratio = vals[0] / vals[1]
    assert 3.0 < ratio < 5.0


def test_jacobian_determinant_nonnegative():
    ws = vw.cosine_speed(2.0, 1.0)
    datum = vw.make_datum(ws, kind="bump", h=0.01, amplitude=1.5,
                          halfwidth=0.15, v_amplitude=0.0)
    chart = vw.solve_for_time(datum, ws, 0.5, 0.01)
    det = jacobian_determinant(chart)
    assert np.min(det) >= 0.0
    # the determinant degenerates somewhere past wave breaking
    assert np.min(det) < 1e-4


def test_grid_validation():
    ws = vw.cosine_speed(2.0, 1.0)
    datum = vw.make_datum(ws, kind="poly", h=0.05, amplitude=0.3,
                          halfwidth=0.4)
    trace = boundary_data(datum, ws, np.linspace(-1.0, 2.0, 61))
    with pytest.raises(DomainError):
        solve_chart(trace, ws, np.linspace(0.0, 1.0, 21),
                    np.linspace(-1.0, 0.0, 41))
    with pytest.raises(DomainError):
        solve_chart(trace, ws, np.linspace(0.3, 1.3, 21),
                    np.linspace(0.2, 1.2, 21))


def test_stalled_fixed_point_raises():
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 64
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.5,
                          halfwidth=0.4, v_amplitude=0.2)
    X, Y = chart_domain(datum, ws, 0.2, h)
    trace = boundary_data(datum, ws, X)
    with pytest.raises(SolveError):
        solve_chart(trace, ws, X, Y, max_iters=1)


def test_save_load_round_trip(tmp_path):
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 32
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.4, halfwidth=0.4)
    chart = vw.solve_for_time(datum, ws, 0.2, h)
    path = tmp_path / "chart.npz"
    chart.save(path)
    back = vw.CharChart.load(path)
    assert back.ws.name == "cosine"
    for name, F in chart.fields().items():
        assert np.array_equal(getattr(back, name), F), name
    assert np.array_equal(back.X, chart.X)


def test_relabel_identity_round_trip():
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 32
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.4, halfwidth=0.4)
    chart = vw.solve_for_time(datum, ws, 0.2, h)
    ident = lambda s: np.asarray(s, float)
    one = lambda s: np.ones_like(np.asarray(s, float))
    out = relabel(chart, ident, one, ident, one,
                  X_new=chart.X, Y_new=chart.Y)
    for name, F in chart.fields().items():
        assert np.max(np.abs(getattr(out, name) - F)) < 1e-9, name


def test_relabel_rejects_decreasing_maps():
    ws = vw.cosine_speed(2.0, 1.0)
    h = 1.0 / 32
    datum = vw.make_datum(ws, kind="poly", h=h, amplitude=0.4, halfwidth=0.4)
    chart = vw.solve_for_time(datum, ws, 0.2, h)
    neg = lambda s: -np.asarray(s, float)
    mone = lambda s: -np.ones_like(np.asarray(s, float))
    with pytest.raises(DomainError):
        relabel(chart, neg, mone, neg, mone, X_new=chart.X, Y_new=chart.Y)
