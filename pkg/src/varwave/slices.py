"""Physical time slices and singular-set diagnostics of a solved chart.

Since t_X >= 0 and t_Y >= 0, a level set {t = tau} is a monotone
staircase in the (X, Y) grid.  It is extracted by locating sign changes
of t - tau on grid edges with linear interpolation; the resulting point
chain carries interpolation stencils so that any grid field (including
tangent fields living on the same grid) can be sampled along the curve.

Quadrature along the curve uses the characteristic measures
(1 + R^2) dx = p dX and (1 + S^2) dx = q |dY|, which stay finite through
wave breaking; the slope fields R = tan(alpha/2), S = tan(beta/2) are
clipped at 1/h for display and resampling only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .chart import CharChart
from .errors import DomainError


@dataclass
class LevelCurve:
    """A polygonal level curve of t with per-point field samples."""

    tau: float
    ia: np.ndarray
    ja: np.ndarray
    ib: np.ndarray
    jb: np.ndarray
    frac: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    x: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p: np.ndarray
    q: np.ndarray
    dX: np.ndarray
    dYabs: np.ndarray
    chart: CharChart

    def sample(self, F):
        """Linearly interpolate any field on the chart grid to the curve."""
        return (F[self.ia, self.ja] * (1.0 - self.frac)
                + F[self.ib, self.jb] * self.frac)

    def __len__(self):
        return len(self.frac)


def extract_level_curve(chart: CharChart, tau, quiet_tol=1e-3) -> LevelCurve:
    t = chart.t
    if tau < t.min() or tau > t.max():
        raise DomainError("time %g outside the range of the chart" % tau)

    # vertical edges: nodes (i, j) -> (i, j+1); horizontal: (i, j) -> (i+1, j)
    mv = (t[:, :-1] <= tau) & (t[:, 1:] > tau)
    mh = (t[:-1, :] <= tau) & (t[1:, :] > tau)
    iv, jv = np.nonzero(mv)
    ih, jh = np.nonzero(mh)
    ia = np.concatenate([iv, ih])
    ja = np.concatenate([jv, jh])
    ib = np.concatenate([iv, ih + 1])
    jb = np.concatenate([jv + 1, jh])
    if len(ia) < 2:
        raise DomainError("level curve at t=%g is degenerate" % tau)

    ta = t[ia, ja]
    tb = t[ib, jb]
    frac = np.where(tb > ta, (tau - ta) / np.where(tb > ta, tb - ta, 1.0), 0.0)

    Xpts = chart.X[ia] * (1.0 - frac) + chart.X[ib] * frac
    Ypts = chart.Y[ja] * (1.0 - frac) + chart.Y[jb] * frac

    # arc parameter X - Y is strictly increasing along the staircase
    order = np.argsort(Xpts - Ypts, kind="stable")
    ia, ja, ib, jb, frac = ia[order], ja[order], ib[order], jb[order], frac[order]
    Xpts, Ypts = Xpts[order], Ypts[order]

    # collapse duplicated corner points
    s = Xpts - Ypts
    keep = np.ones(len(s), dtype=bool)
    keep[1:] = np.diff(s) > 1e-9 * chart.h
    ia, ja, ib, jb, frac = ia[keep], ja[keep], ib[keep], jb[keep], frac[keep]
    Xpts, Ypts = Xpts[keep], Ypts[keep]

    curve = LevelCurve(
        tau=float(tau), ia=ia, ja=ja, ib=ib, jb=jb, frac=frac,
        X=Xpts, Y=Ypts, x=np.zeros_like(Xpts),
        u=np.zeros_like(Xpts), alpha=np.zeros_like(Xpts),
        beta=np.zeros_like(Xpts), p=np.zeros_like(Xpts),
        q=np.zeros_like(Xpts),
        dX=np.diff(Xpts), dYabs=-np.diff(Ypts), chart=chart)
    curve.x = curve.sample(chart.x)
    curve.u = curve.sample(chart.u)
    curve.alpha = curve.sample(chart.alpha)
    curve.beta = curve.sample(chart.beta)
    curve.p = curve.sample(chart.p)
    curve.q = curve.sample(chart.q)

    for end in (0, -1):
        activity = abs(curve.u[end]) + abs(np.sin(curve.alpha[end])) \
            + abs(np.sin(curve.beta[end]))
        if activity > quiet_tol:
            raise DomainError(
                "level curve at t=%g leaves the grid inside an active region; "
                "enlarge the domain margin" % tau)
    return curve


def curve_energy(curve: LevelCurve):
    """Energy int e dx on the slice via the characteristic measures."""
    gR = curve.p * np.sin(0.5 * curve.alpha) ** 2
    gS = curve.q * np.sin(0.5 * curve.beta) ** 2
    ER = np.sum(0.5 * (gR[:-1] + gR[1:]) * curve.dX)
    ES = np.sum(0.5 * (gS[:-1] + gS[1:]) * curve.dYabs)
    return 0.5 * float(ER + ES)


@dataclass
class PhysicalSlice:
    """Solution profile at fixed time, resampled on a uniform x grid."""

    tau: float
    x: np.ndarray
    u: np.ndarray
    ut: np.ndarray
    ux: np.ndarray
    R: np.ndarray
    S: np.ndarray
    e: np.ndarray
    energy: float
    mu_minus: np.ndarray   # cumulative backward energy, density R^2/2
    mu_plus: np.ndarray    # cumulative forward energy, density S^2/2
    clipped: bool


def reconstruct_slice(chart: CharChart, curve: LevelCurve,
                      nx: Optional[int] = None) -> PhysicalSlice:
    h = chart.h
    cap = 1.0 / h
    xpts = curve.x
    span = float(xpts[-1] - xpts[0])
    if np.min(np.diff(xpts)) < -1e-8 * max(1.0, span):
        raise DomainError("x is not monotone along the level curve")

    tanA = np.clip(np.tan(0.5 * curve.alpha), -cap, cap)
    tanB = np.clip(np.tan(0.5 * curve.beta), -cap, cap)
    clipped = bool(np.any(np.abs(tanA) >= cap) or np.any(np.abs(tanB) >= cap))
    c = chart.ws.evaluate(curve.u)[0]
    ut = 0.5 * (tanA + tanB)
    ux = (tanA - tanB) / (2.0 * c)
    e = 0.5 * (tanA ** 2 + tanB ** 2)

    # cumulative energy measures along the curve (exact characteristic form)
    gR = curve.p * np.sin(0.5 * curve.alpha) ** 2
    gS = curve.q * np.sin(0.5 * curve.beta) ** 2
    cumR = np.concatenate([[0.0], np.cumsum(0.25 * (gR[:-1] + gR[1:]) * curve.dX)])
    cumS = np.concatenate([[0.0], np.cumsum(0.25 * (gS[:-1] + gS[1:]) * curve.dYabs)])
    energy = float(cumR[-1] + cumS[-1])

    # strictly increasing x for resampling
    keep = np.concatenate([[True], np.diff(xpts) > h * h / 10.0])
    xk = xpts[keep]
    if nx is None:
        nx = max(2, int(np.round(span / h)) + 1)
    xg = np.linspace(xpts[0], xpts[-1], nx)

    def res(arr):
        return np.interp(xg, xk, arr[keep])

    return PhysicalSlice(
        tau=curve.tau, x=xg, u=res(curve.u), ut=res(ut), ux=res(ux),
        R=res(tanA), S=res(tanB), e=res(e), energy=energy,
        mu_minus=res(cumR), mu_plus=res(cumS), clipped=clipped)


def slice_at_time(chart: CharChart, tau, nx=None):
    curve = extract_level_curve(chart, tau)
    return reconstruct_slice(chart, curve, nx=nx)


# -- pointwise Jacobian ------------------------------------------------------


@dataclass
class JacobianInfo:
    x_X: float
    x_Y: float
    t_X: float
    t_Y: float
    det: float


def jacobian(chart: CharChart, i, j) -> JacobianInfo:
    """Jacobian of the map (X, Y) -> (x, t) at a grid node, from the fields."""
    u = chart.u[i, j]
    al = chart.alpha[i, j]
    be = chart.beta[i, j]
    p = chart.p[i, j]
    q = chart.q[i, j]
    c = float(chart.ws.evaluate(u)[0])
    x_X = (1.0 + np.cos(al)) * p / 4.0
    x_Y = -(1.0 + np.cos(be)) * q / 4.0
    t_X = x_X / c
    t_Y = -x_Y / c
    return JacobianInfo(float(x_X), float(x_Y), float(t_X), float(t_Y),
                        float(x_X * t_Y - x_Y * t_X))


# -- singular set ------------------------------------------------------------


@dataclass
class SingularPoint:
    X: float
    Y: float
    x: float
    t: float
    kind: str                      # "swallowtail" (alpha or beta fold) or "crossing"
    discriminants: dict
    degenerate_flags: List[str] = field(default_factory=list)


@dataclass
class SingularityReport:
    alpha_curves: List[np.ndarray]
    beta_curves: List[np.ndarray]
    points: List[SingularPoint]
    first_singular_time: Optional[float]

    def to_dict(self):
        return {
            "alpha_curves": [c.tolist() for c in self.alpha_curves],
            "beta_curves": [c.tolist() for c in self.beta_curves],
            "points": [{
                "X": pt.X, "Y": pt.Y, "x": pt.x, "t": pt.t, "kind": pt.kind,
                "discriminants": pt.discriminants,
                "degenerate_flags": pt.degenerate_flags,
            } for pt in self.points],
            "first_singular_time": self.first_singular_time,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _contours(field2d, X, Y):
    """Zero contours of a 2-D field in (X, Y) coordinates."""
    from skimage import measure

    curves = []
    for poly in measure.find_contours(field2d, 0.0):
        cx = np.interp(poly[:, 0], np.arange(len(X)), X)
        cy = np.interp(poly[:, 1], np.arange(len(Y)), Y)
        curves.append(np.stack([cx, cy], axis=-1))
    return curves


def detect_singularities(chart: CharChart, flag_scale=10.0) -> SingularityReport:
    """Locate the singular set {alpha = pi} union {beta = pi} and classify it.

    Fold points on an alpha curve (where alpha_X changes sign along it)
    and crossings of alpha with beta curves are reported together with
    the finite-difference discriminants of the genericity conditions;
    a discriminant smaller than flag_scale * h is flagged as degenerate.
    """
    X, Y, h = chart.X, chart.Y, chart.h
    ca = np.cos(0.5 * chart.alpha)
    cb = np.cos(0.5 * chart.beta)
    alpha_curves = _contours(ca, X, Y)
    beta_curves = _contours(cb, X, Y)

    def interp(F):
        return RegularGridInterpolator((X, Y), F, method="linear",
                                       bounds_error=False, fill_value=None)

    dX = lambda F: np.gradient(F, h, axis=0)
    dY = lambda F: np.gradient(F, h, axis=1)
    al_X, al_Y = dX(chart.alpha), dY(chart.alpha)
    be_X, be_Y = dX(chart.beta), dY(chart.beta)
    al_XX = np.gradient(al_X, h, axis=0)
    be_YY = np.gradient(be_Y, h, axis=1)
    f_al_X, f_al_Y, f_al_XX = interp(al_X), interp(al_Y), interp(al_XX)
    f_be_X, f_be_Y, f_be_YY = interp(be_X), interp(be_Y), interp(be_YY)
    f_x, f_t = interp(chart.x), interp(chart.t)

    thresh = flag_scale * h
    points = []

    def fold_points(curves, f_along, f_trans, f_second, names):
        for poly in curves:
            vals = f_along(poly)
            sgn = np.sign(vals)
            for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
                w = abs(vals[k]) / (abs(vals[k]) + abs(vals[k + 1]))
                pt = poly[k] * (1.0 - w) + poly[k + 1] * w
                disc = {names[0]: float(f_trans(pt)[0]),
                        names[1]: float(f_second(pt)[0])}
                flags = [nm for nm, v in disc.items() if abs(v) < thresh]
                points.append(SingularPoint(
                    X=float(pt[0]), Y=float(pt[1]),
                    x=float(f_x(pt)[0]), t=float(f_t(pt)[0]),
                    kind="swallowtail", discriminants=disc,
                    degenerate_flags=flags))

    fold_points(alpha_curves, f_al_X, f_al_Y, f_al_XX, ("alpha_Y", "alpha_XX"))
    fold_points(beta_curves, f_be_Y, f_be_X, f_be_YY, ("beta_X", "beta_YY"))

    if alpha_curves and beta_curves:
        from shapely.geometry import LineString

        for pa in alpha_curves:
            la = LineString(pa)
            for pb in beta_curves:
                inter = la.intersection(LineString(pb))
                geoms = getattr(inter, "geoms", [inter] if not inter.is_empty else [])
                for g in geoms:
                    if g.geom_type != "Point":
                        continue
                    pt = np.array([g.x, g.y])
                    disc = {"alpha_X": float(f_al_X(pt)[0]),
                            "beta_Y": float(f_be_Y(pt)[0])}
                    flags = [nm for nm, v in disc.items() if abs(v) < thresh]
                    points.append(SingularPoint(
                        X=float(pt[0]), Y=float(pt[1]),
                        x=float(f_x(pt)[0]), t=float(f_t(pt)[0]),
                        kind="crossing", discriminants=disc,
                        degenerate_flags=flags))

    first = None
    for curves in (alpha_curves, beta_curves):
        for poly in curves:
            tmin = float(np.min(f_t(poly)))
            first = tmin if first is None else min(first, tmin)
    return SingularityReport(alpha_curves, beta_curves, points, first)
