"""Weighted norm on tangent vectors along paths of initial data.

A path of data theta -> (u0^theta, u1^theta) is differentiated in theta
(central differences of three chart solves on a shared grid) to produce
tangent fields (T, Xs, U, A, B, P, Q) for (t, x, u, alpha, beta, p, q).
On a time slice these combine into horizontal shifts w, z, vertical
perturbations rt, st of the slope fields and a vertical displacement v
of u.  The norm is a weighted sum of six line integrals; it is evaluated
in its characteristic form (finite through wave breaking) and, for
cross-checking on smooth slices, in its physical form with numerically
differentiated shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .chart import (CharChart, InitialDatum, boundary_data, chart_domain,
                    relabel, solve_chart)
from .errors import DomainError
from .slices import LevelCurve, curve_energy, extract_level_curve
from .wavespeed import WaveSpeed


@dataclass
class NormWeights:
    """Weights kappa = (1, d, d^3, d, d^2, d^3) built from one parameter."""

    delta: float = 0.1

    @property
    def kappas(self):
        d = self.delta
        return np.array([1.0, d, d ** 3, d, d ** 2, d ** 3])


@dataclass
class PathOfData:
    """A theta family of initial data with a common energy cap."""

    datum_fn: Callable[[float], InitialDatum]
    thetas: np.ndarray
    energy_cap: float

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        for th in self.thetas:
            E = self.datum_fn(float(th)).E0
            if E > self.energy_cap * (1.0 + 1e-9):
                raise DomainError("datum at theta=%g exceeds the energy cap" % th)


@dataclass
class TangentField:
    """theta derivatives of the chart fields on the base grid."""

    theta: float
    eps: float
    T: np.ndarray      # d t / d theta
    Xs: np.ndarray     # d x / d theta
    U: np.ndarray
    A: np.ndarray      # d alpha / d theta
    B: np.ndarray      # d beta / d theta
    P: np.ndarray
    Q: np.ndarray


# -- curve functionals -------------------------------------------------------


def weights_along_curve(curve: LevelCurve):
    """Cumulative energy weights W- (from the left) and W+ (from the right).

    W-(x) = 1 + int_{-inf}^x S^2 dy carried by the measure q |dY|;
    W+(x) = 1 + int_x^{inf} R^2 dy carried by p dX.  Both lie in
    [1, 1 + 2 E] where E is the slice energy.
    """
    gS = curve.q * np.sin(0.5 * curve.beta) ** 2
    gR = curve.p * np.sin(0.5 * curve.alpha) ** 2
    segS = 0.5 * (gS[:-1] + gS[1:]) * curve.dYabs
    segR = 0.5 * (gR[:-1] + gR[1:]) * curve.dX
    Wm = 1.0 + np.concatenate([[0.0], np.cumsum(segS)])
    Wp = 1.0 + np.concatenate([[0.0], np.cumsum(segR[::-1])])[::-1]
    return Wm, Wp


def interaction_rate(curve: LevelCurve):
    """a(tau) = int |c'| |R^2 S - R S^2| / (2 c) dx in bounded form.

    Each point contributes through the measure that keeps its integrand
    bounded: the p dX form when |tan(beta/2)| <= 1 (ties included), the
    q |dY| form otherwise.
    """
    chart = curve.chart
    cap = 1.0 / chart.h
    c, dc, _ = chart.ws.evaluate(curve.u)
    k = np.abs(dc) / (2.0 * c)
    ta = np.clip(np.tan(0.5 * curve.alpha), -cap, cap)
    tb = np.clip(np.tan(0.5 * curve.beta), -cap, cap)
    s2a, sca = np.sin(0.5 * curve.alpha) ** 2, 0.5 * np.sin(curve.alpha)
    s2b, scb = np.sin(0.5 * curve.beta) ** 2, 0.5 * np.sin(curve.beta)
    use_dx = np.abs(tb) <= 1.0
    fX = np.where(use_dx, k * curve.p * np.abs(tb) * np.abs(s2a - sca * tb), 0.0)
    fY = np.where(use_dx, 0.0, k * curve.q * np.abs(ta) * np.abs(s2b - scb * ta))
    aX = np.sum(0.5 * (fX[:-1] + fX[1:]) * curve.dX)
    aY = np.sum(0.5 * (fY[:-1] + fY[1:]) * curve.dYabs)
    return float(aX + aY)


# -- tangent construction ----------------------------------------------------


def path_domain(path: PathOfData, ws: WaveSpeed, T, h, margin=1.2):
    """One (X, Y) grid large enough for every datum along the path."""
    from .chart import span_domain

    xlo = min(float(path.datum_fn(float(th)).x_grid[0]) for th in path.thetas)
    xhi = max(float(path.datum_fn(float(th)).x_grid[-1]) for th in path.thetas)
    return span_domain(xlo, xhi, ws.max_speed(), T, h, margin=margin)


def solve_theta(path: PathOfData, theta, ws: WaveSpeed, X, Y, **kw) -> CharChart:
    datum = path.datum_fn(float(theta))
    trace = boundary_data(datum, ws, X)
    return solve_chart(trace, ws, X, Y, **kw)


def tangent_by_theta(path: PathOfData, theta, ws: WaveSpeed, X, Y,
                     eps=1e-4, relabel_maps=None, **kw):
    """Central theta difference of three chart solves on a shared grid.

    relabel_maps, when given, is a callable theta -> (phi, dphi, psi, dpsi)
    applied to each solved chart before differencing (used to explore
    relabeled representatives of the same tangent vector).
    """
    charts = {}
    for th in (theta - eps, theta, theta + eps):
        ch = solve_theta(path, th, ws, X, Y, **kw)
        if relabel_maps is not None:
            phi, dphi, psi, dpsi = relabel_maps(th)
            ch = relabel(ch, phi, dphi, psi, dpsi, X_new=X, Y_new=Y)
        charts[th] = ch
    lo, mid, hi = charts[theta - eps], charts[theta], charts[theta + eps]
    d = 1.0 / (2.0 * eps)
    tan = TangentField(
        theta=float(theta), eps=float(eps),
        T=(hi.t - lo.t) * d, Xs=(hi.x - lo.x) * d, U=(hi.u - lo.u) * d,
        A=(hi.alpha - lo.alpha) * d, B=(hi.beta - lo.beta) * d,
        P=(hi.p - lo.p) * d, Q=(hi.q - lo.q) * d)
    return mid, tan


@dataclass
class ShiftFields:
    """Tangent data resolved into shifts and vertical parts on a slice."""

    w: np.ndarray        # horizontal shift of the backward wave, Xs + c T
    z: np.ndarray        # horizontal shift of the forward wave, Xs - c T
    rt: np.ndarray       # vertical perturbation of R at fixed (tau, x)
    st: np.ndarray       # vertical perturbation of S at fixed (tau, x)
    vcomb: np.ndarray    # v + R w / 2c - S z / 2c = U - (tan a/2 + tan b/2) T
    T: np.ndarray
    Xs: np.ndarray
    U: np.ndarray
    A: np.ndarray
    B: np.ndarray
    P: np.ndarray
    Q: np.ndarray


def shifts_on_curve(chart: CharChart, tan: TangentField,
                    curve: LevelCurve) -> ShiftFields:
    cap = 1.0 / chart.h
    c, dc, _ = chart.ws.evaluate(curve.u)
    T = curve.sample(tan.T)
    Xs = curve.sample(tan.Xs)
    U = curve.sample(tan.U)
    A = curve.sample(tan.A)
    B = curve.sample(tan.B)
    P = curve.sample(tan.P)
    Q = curve.sample(tan.Q)
    ta = np.clip(np.tan(0.5 * curve.alpha), -cap, cap)
    tb = np.clip(np.tan(0.5 * curve.beta), -cap, cap)
    # vertical slope perturbations; the chart relations collapse the
    # transversal correction terms to these two-term expressions
    rt = 0.5 * A * (1.0 + ta ** 2) - dc / (4.0 * c) * T * ta ** 2
    st = 0.5 * B * (1.0 + tb ** 2) - dc / (4.0 * c) * T * tb ** 2
    return ShiftFields(w=Xs + c * T, z=Xs - c * T, rt=rt, st=st,
                       vcomb=U - (ta + tb) * T,
                       T=T, Xs=Xs, U=U, A=A, B=B, P=P, Q=Q)


def norm_integrands(chart: CharChart, tan: TangentField, curve: LevelCurve):
    """The six characteristic-form integrand pairs (J, H) on the curve.

    J_l multiplies W- dX, H_l multiplies W+ |dY|.
    """
    sf = shifts_on_curve(chart, tan, curve)
    c, dc, _ = chart.ws.evaluate(curve.u)
    p, q = curve.p, curve.q
    sa, s2a, c2a = np.sin(curve.alpha), np.sin(0.5 * curve.alpha) ** 2, np.cos(0.5 * curve.alpha) ** 2
    sb, s2b, c2b = np.sin(curve.beta), np.sin(0.5 * curve.beta) ** 2, np.cos(0.5 * curve.beta) ** 2
    T, A, B, P, Q, U = sf.T, sf.A, sf.B, sf.P, sf.Q, sf.U

    J = np.stack([
        sf.w * p,
        0.5 * A * p - dc / (4.0 * c) * p * T * s2a,
        sf.vcomb * p,
        P * c2a - 0.5 * p * sa * A + dc / (4.0 * c) * T * p * sa,
        0.5 * P * sa - p * A * s2a + dc / (2.0 * c) * T * p * s2a,
        P * s2a + 0.5 * p * sa * A,
    ])
    H = np.stack([
        sf.z * q,
        0.5 * B * q - dc / (4.0 * c) * q * T * s2b,
        sf.vcomb * q,
        Q * c2b - 0.5 * q * sb * B + dc / (4.0 * c) * T * q * sb,
        0.5 * Q * sb - q * B * s2b + dc / (2.0 * c) * T * q * s2b,
        Q * s2b + 0.5 * q * sb * B,
    ])
    return J, H


def tangent_norm(curve: LevelCurve, J, H, weights: NormWeights,
                 Wm=None, Wp=None):
    """Weighted norm value and the six weighted line integrals."""
    if Wm is None or Wp is None:
        Wm, Wp = weights_along_curve(curve)
    fJ = np.abs(J) * Wm
    fH = np.abs(H) * Wp
    I = (np.sum(0.5 * (fJ[:, :-1] + fJ[:, 1:]) * curve.dX, axis=1)
         + np.sum(0.5 * (fH[:, :-1] + fH[:, 1:]) * curve.dYabs, axis=1))
    return float(np.dot(weights.kappas, I)), I


@dataclass
class NormReport:
    tau: float
    value: float
    parts: np.ndarray
    a_rate: float
    energy: float


def tangent_norm_at(chart: CharChart, tan: TangentField, tau,
                    weights: NormWeights) -> NormReport:
    curve = extract_level_curve(chart, tau)
    J, H = norm_integrands(chart, tan, curve)
    value, I = tangent_norm(curve, J, H, weights)
    return NormReport(tau=float(tau), value=value, parts=I,
                      a_rate=interaction_rate(curve),
                      energy=curve_energy(curve))


def physical_form_norm(chart: CharChart, tan: TangentField, curve: LevelCurve,
                       weights: NormWeights):
    """The same norm evaluated in physical coordinates on a smooth slice.

    Shift derivatives w_x, z_x are obtained by numerical differentiation
    along the slice, so this is an independent route suitable only away
    from wave breaking.
    """
    sf = shifts_on_curve(chart, tan, curve)
    Wm, Wp = weights_along_curve(curve)
    cap = 1.0 / chart.h
    x = curve.x
    keep = np.concatenate([[True], np.diff(x) > chart.h ** 2 / 10.0])
    x = x[keep]
    c, dc, _ = chart.ws.evaluate(curve.u[keep])
    R = np.clip(np.tan(0.5 * curve.alpha), -cap, cap)[keep]
    S = np.clip(np.tan(0.5 * curve.beta), -cap, cap)[keep]
    w, z = sf.w[keep], sf.z[keep]
    rt, st = sf.rt[keep], sf.st[keep]
    vcomb = sf.vcomb[keep]
    Wm, Wp = Wm[keep], Wp[keep]
    wx = np.gradient(w, x)
    zx = np.gradient(z, x)
    k = dc / (4.0 * c * c) * (w - z)
    I = np.array([
        np.trapezoid(np.abs(w) * (1.0 + R ** 2) * Wm
                     + np.abs(z) * (1.0 + S ** 2) * Wp, x),
        np.trapezoid(np.abs(rt) * Wm + np.abs(st) * Wp, x),
        np.trapezoid(np.abs(vcomb) * ((1.0 + R ** 2) * Wm
                                      + (1.0 + S ** 2) * Wp), x),
        np.trapezoid(np.abs(wx + k * S) * Wm + np.abs(zx + k * R) * Wp, x),
        np.trapezoid(np.abs(R) * np.abs(wx + k * S) * Wm
                     + np.abs(S) * np.abs(zx + k * R) * Wp, x),
        np.trapezoid(np.abs(2.0 * R * rt + R ** 2 * wx + k * R ** 2 * S) * Wm
                     + np.abs(2.0 * S * st + S ** 2 * zx + k * S ** 2 * R) * Wp, x),
    ])
    return float(np.dot(weights.kappas, I)), I


# -- path-level functionals --------------------------------------------------


def norm_profile(path: PathOfData, theta, taus, ws: WaveSpeed, T, h,
                 weights: Optional[NormWeights] = None, eps=1e-4,
                 margin=1.2, grid=None, **kw) -> List[NormReport]:
    """Norms of one tangent vector on a ladder of time slices."""
    weights = weights or NormWeights()
    if grid is None:
        grid = path_domain(path, ws, T, h, margin=margin)
    chart, tan = tangent_by_theta(path, theta, ws, *grid, eps=eps, **kw)
    return [tangent_norm_at(chart, tan, tau, weights) for tau in taus]


def path_length(path: PathOfData, tau, ws: WaveSpeed, T, h,
                weights: Optional[NormWeights] = None, eps=1e-4,
                margin=1.2, grid=None, relabel_maps_fn=None, **kw):
    """Length of the path in the metric at time tau (trapezoid in theta)."""
    weights = weights or NormWeights()
    if grid is None:
        grid = path_domain(path, ws, T, h, margin=margin)
    vals = []
    for th in path.thetas:
        chart, tan = tangent_by_theta(path, float(th), ws, *grid, eps=eps,
                                      relabel_maps=relabel_maps_fn, **kw)
        vals.append(tangent_norm_at(chart, tan, tau, weights).value)
    vals = np.asarray(vals)
    return float(np.trapezoid(vals, path.thetas)), vals


def affine_relabel_family(ax=1.0, bx=0.0, ay=1.0, by=0.0):
    """theta-dependent affine relabelings, the identity at theta = 0.

    Returns theta -> (phi, dphi, psi, dpsi) with
    phi(X) = X + theta ((ax - 1) X + bx) and likewise for psi.
    """
    def maps_fn(theta):
        kx, ky = 1.0 + theta * (ax - 1.0), 1.0 + theta * (ay - 1.0)
        ox, oy = theta * bx, theta * by
        return (lambda X: kx * np.asarray(X, float) + ox,
                lambda X: kx * np.ones_like(np.asarray(X, float)),
                lambda Y: ky * np.asarray(Y, float) + oy,
                lambda Y: ky * np.ones_like(np.asarray(Y, float)))
    return maps_fn


def optimize_relabeling(path: PathOfData, members, tau, ws: WaveSpeed, T, h,
                        weights: Optional[NormWeights] = None, eps=1e-4,
                        margin=1.2, **kw):
    """Minimize the path length over a family of relabeling maps.

    members is a list of (ax, bx, ay, by) tuples; the identity member is
    always included.  Returns (best_length, canonical_length, table).
    """
    weights = weights or NormWeights()
    grid = path_domain(path, ws, T, h, margin=margin)
    canonical, _ = path_length(path, tau, ws, T, h, weights=weights, eps=eps,
                               grid=grid, **kw)
    table = [((1.0, 0.0, 1.0, 0.0), canonical)]
    best = canonical
    for m in members:
        ax, bx, ay, by = m
        if (ax, bx, ay, by) == (1.0, 0.0, 1.0, 0.0):
            continue
        fam = affine_relabel_family(ax, bx, ay, by)
        val, _ = path_length(path, tau, ws, T, h, weights=weights, eps=eps,
                             grid=grid,
                             relabel_maps_fn=lambda th: fam(th), **kw)
        table.append((m, val))
        best = min(best, val)
    return best, canonical, table
