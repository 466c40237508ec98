"""Characteristic-coordinate solver for the variational wave equation.

The equation u_tt = c(u) (c(u) u_x)_x is rewritten in characteristic
coordinates (X, Y) as a semilinear system for (u, alpha, beta, p, q, x, t)
where alpha = 2 arctan R, beta = 2 arctan S are compactified Riemann
variables and p, q are the relabeling densities.  Data are posed on the
anti-diagonal X + Y = 0 (the time-zero curve, parameterized by x) and the
system is marched cell by cell with a trapezoidal fixed-point update, in
order of increasing X + Y above the data curve and decreasing X + Y below
it.  Cells on a common anti-diagonal are independent, so each diagonal is
updated as one vectorized fixed-point iteration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, SolveError
from .wavespeed import WaveSpeed, make_wave_speed

FORMAT_VERSION = 1


# -- initial data ------------------------------------------------------------


def smooth_bump(x, amplitude=0.5, center=0.5, halfwidth=0.5):
    """Compactly supported C-infinity bump and its derivative.

    The bump equals `amplitude` at `center` and vanishes identically
    outside |x - center| >= halfwidth.
    """
    x = np.asarray(x, dtype=float)
    s = (x - center) / halfwidth
    val = np.zeros_like(x)
    dval = np.zeros_like(x)
    inside = np.abs(s) < 1.0
    si = s[inside]
    g = np.exp(1.0 - 1.0 / (1.0 - si * si))
    val[inside] = amplitude * g
    dval[inside] = amplitude * g * (-2.0 * si / (1.0 - si * si) ** 2) / halfwidth
    return val, dval


def poly_bump(x, amplitude=0.5, center=0.5, halfwidth=0.5, power=4):
    """Compactly supported bump amplitude * (1 - s^2)^power and derivative.

    Polynomial inside the support, so its higher derivatives stay modest;
    preferred for convergence studies where the smooth exponential bump's
    large derivative constants would pollute the observed order.
    """
    x = np.asarray(x, dtype=float)
    s = (x - center) / halfwidth
    val = np.zeros_like(x)
    dval = np.zeros_like(x)
    inside = np.abs(s) < 1.0
    si = s[inside]
    g = (1.0 - si * si) ** power
    val[inside] = amplitude * g
    dval[inside] = amplitude * power * (1.0 - si * si) ** (power - 1) \
        * (-2.0 * si) / halfwidth
    return val, dval


@dataclass
class InitialDatum:
    """Compactly supported data (u0, u1) sampled on a uniform x grid.

    R0 = u1 + c(u0) u0', S0 = u1 - c(u0) u0' and E0 is the conserved
    energy int (R0^2 + S0^2)/2 dx = int (u1^2 + c(u0)^2 u0'^2) dx.
    """

    x_grid: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    du0: np.ndarray
    R0: np.ndarray
    S0: np.ndarray
    E0: float
    support: Tuple[float, float]

    @classmethod
    def from_samples(cls, ws: WaveSpeed, x_grid, u0, u1, du0=None):
        x_grid = np.asarray(x_grid, dtype=float)
        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        if du0 is None:
            du0 = np.gradient(u0, x_grid)
        else:
            du0 = np.asarray(du0, dtype=float)
        tail = max(abs(u0[0]), abs(u0[-1]), abs(u1[0]), abs(u1[-1]),
                   abs(du0[0]), abs(du0[-1]))
        if tail > 1e-9:
            raise DomainError("initial data must vanish at the grid ends")
        c = ws.c(u0)
        R0 = u1 + c * du0
        S0 = u1 - c * du0
        E0 = float(np.trapezoid(0.5 * (R0 ** 2 + S0 ** 2), x_grid))
        active = np.abs(u0) + np.abs(u1) + np.abs(du0) > 1e-13
        if np.any(active):
            idx = np.nonzero(active)[0]
            support = (float(x_grid[idx[0]]), float(x_grid[idx[-1]]))
        else:
            support = (float(x_grid[0]), float(x_grid[0]))
        return cls(x_grid, u0, u1, du0, R0, S0, E0, support)

    @classmethod
    def from_functions(cls, ws: WaveSpeed, u0f, du0f, u1f, x_span, n):
        x = np.linspace(x_span[0], x_span[1], n)
        return cls.from_samples(ws, x, u0f(x), u1f(x), du0=du0f(x))

    def sample(self, x):
        """Linear interpolation of the datum, zero outside the grid."""
        x = np.asarray(x, dtype=float)
        out = {}
        for key, arr in (("u0", self.u0), ("u1", self.u1), ("du0", self.du0),
                         ("R0", self.R0), ("S0", self.S0)):
            out[key] = np.interp(x, self.x_grid, arr, left=0.0, right=0.0)
        return out


def make_datum(ws: WaveSpeed, kind="bump", h=1.0 / 256, pad=0.25, **params):
    """Convenience builder for the datum families used in experiments.

    kinds: "zero", "bump" (u0 bump, u1 an independent bump),
    "traveling" (u1 = -c(u0) u0', a right-moving wave for constant c);
    "poly" / "poly_traveling" are the same built on the polynomial bump.
    """
    amplitude = params.get("amplitude", 0.5)
    center = params.get("center", 0.5)
    halfwidth = params.get("halfwidth", 0.5)
    v_amplitude = params.get("v_amplitude", 0.0)
    v_center = params.get("v_center", center)
    v_halfwidth = params.get("v_halfwidth", halfwidth)
    lo = min(center - halfwidth, v_center - v_halfwidth) - pad
    hi = max(center + halfwidth, v_center + v_halfwidth) + pad
    n = int(np.ceil((hi - lo) / h)) + 1
    x = lo + h * np.arange(n)
    if kind == "zero":
        z = np.zeros_like(x)
        return InitialDatum.from_samples(ws, x, z, z, du0=z)
    shape = poly_bump if kind.startswith("poly") else smooth_bump
    u0, du0 = shape(x, amplitude, center, halfwidth)
    if kind in ("bump", "poly"):
        u1 = shape(x, v_amplitude, v_center, v_halfwidth)[0]
    elif kind in ("traveling", "poly_traveling"):
        u1 = -ws.c(u0) * du0
    else:
        raise DomainError("unknown datum kind %r" % kind)
    return InitialDatum.from_samples(ws, x, u0, u1, du0=du0)


# -- boundary trace on the data curve ---------------------------------------


@dataclass
class BoundaryTrace:
    """Values of the chart unknowns along the time-zero curve X + Y = 0.

    Parameterized by x (equal to X there): u = u0, alpha = 2 arctan R0,
    beta = 2 arctan S0, p = 1 + R0^2, q = 1 + S0^2, x = X, t = 0.
    """

    x: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p: np.ndarray
    q: np.ndarray


def boundary_data(datum: InitialDatum, ws: WaveSpeed, xs) -> BoundaryTrace:
    xs = np.asarray(xs, dtype=float)
    d = datum.sample(xs)
    R0, S0 = d["R0"], d["S0"]
    return BoundaryTrace(
        x=xs,
        u=d["u0"],
        alpha=2.0 * np.arctan(R0),
        beta=2.0 * np.arctan(S0),
        p=1.0 + R0 ** 2,
        q=1.0 + S0 ** 2,
    )


def span_domain(xlo, xhi, c_max, T, h, margin=1.2):
    """(X, Y) grid for data on [xlo, xhi] and level curves up to time T.

    A point of the forward wave sits at x ~ xhi + c T at time T and its
    backward characteristic label is X = x + c T, so the grid must reach
    2 c T beyond the data on the X side (and symmetrically in Y).  The
    data curve X + Y = 0 runs between two edge corners of the grid;
    nodes on the far side of those corners lie in quiet zones.
    """
    reach = 2.0 * margin * c_max * abs(T)
    n_data = int(np.ceil((xhi - xlo) / h))
    n_reach = int(np.ceil(reach / h))
    X = xlo + h * np.arange(n_data + n_reach + 1)
    Y = -(xlo + n_data * h) + h * np.arange(n_data + n_reach + 1)
    return X, Y


def chart_domain(datum: InitialDatum, ws: WaveSpeed, T, h, margin=1.2):
    return span_domain(float(datum.x_grid[0]), float(datum.x_grid[-1]),
                       ws.max_speed(), T, h, margin=margin)


# -- the chart ---------------------------------------------------------------


@dataclass
class CharChart:
    """Solved characteristic chart on a rectangular (X, Y) grid."""

    X: np.ndarray
    Y: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p: np.ndarray
    q: np.ndarray
    x: np.ndarray
    t: np.ndarray
    ws: WaveSpeed

    @property
    def hX(self):
        return float(self.X[1] - self.X[0])

    @property
    def hY(self):
        return float(self.Y[1] - self.Y[0])

    @property
    def h(self):
        return self.hX

    def fields(self):
        return {"u": self.u, "alpha": self.alpha, "beta": self.beta,
                "p": self.p, "q": self.q, "x": self.x, "t": self.t}

    def save(self, path):
        header = json.dumps({
            "format_version": FORMAT_VERSION,
            "wave_speed": {"name": self.ws.name, "params": self.ws.params,
                           "u_range": list(self.ws.u_range)},
        }, sort_keys=True)
        np.savez(path, header=np.array(header), X=self.X, Y=self.Y,
                 u=self.u, alpha=self.alpha, beta=self.beta,
                 p=self.p, q=self.q, x=self.x, t=self.t)

    @classmethod
    def load(cls, path, ws: Optional[WaveSpeed] = None):
        data = np.load(path, allow_pickle=False)
        header = json.loads(str(data["header"]))
        if header["format_version"] != FORMAT_VERSION:
            raise DomainError("unsupported chart format version %r"
                              % header["format_version"])
        if ws is None:
            spec = header["wave_speed"]
            ws = make_wave_speed(spec["name"], u_range=tuple(spec["u_range"]),
                                 **spec["params"])
        return cls(X=data["X"], Y=data["Y"], u=data["u"], alpha=data["alpha"],
                   beta=data["beta"], p=data["p"], q=data["q"], x=data["x"],
                   t=data["t"], ws=ws)


def _rhs_x(ws, u, al, be, p, q):
    """Right-hand sides of the X-direction relations (u_X, beta_X, q_X, x_X, t_X)."""
    c, dc, _ = ws.evaluate(u)
    k = dc / (8.0 * c * c)
    sa, ca = np.sin(al), np.cos(al)
    sb, cb = np.sin(be), np.cos(be)
    fu = sa / (4.0 * c) * p
    fb = k * (ca - cb) * p
    fq = k * (sa - sb) * p * q
    fx = (1.0 + ca) * p / 4.0
    ft = (1.0 + ca) * p / (4.0 * c)
    return fu, fb, fq, fx, ft


def _rhs_y(ws, u, al, be, p, q):
    """Right-hand sides of the Y-direction relations (u_Y, alpha_Y, p_Y, x_Y, t_Y)."""
    c, dc, _ = ws.evaluate(u)
    k = dc / (8.0 * c * c)
    sa, ca = np.sin(al), np.cos(al)
    sb, cb = np.sin(be), np.cos(be)
    fu = sb / (4.0 * c) * q
    fa = k * (cb - ca) * q
    fp = k * (sb - sa) * p * q
    fx = -(1.0 + cb) * q / 4.0
    ft = (1.0 + cb) * q / (4.0 * c)
    return fu, fa, fp, fx, ft


def solve_chart(trace: BoundaryTrace, ws: WaveSpeed, X, Y,
                tol=1e-12, max_iters=50) -> CharChart:
    """March the semilinear system over the square grid from the data curve.

    The grid must be square with equal steps and its main anti-diagonal
    must coincide with X + Y = 0; the trace must cover [X[0], X[-1]].
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nX, nY = len(X) - 1, len(Y) - 1
    h = float(X[1] - X[0])
    if abs((Y[1] - Y[0]) - h) > 1e-12 * max(1.0, h):
        raise DomainError("grid must have equal steps in X and Y")
    d = int(np.round(-(X[0] + Y[0]) / h))
    if not 0 <= d <= min(nX, nY) or abs(X[0] + Y[d]) > 1e-9 * max(1.0, abs(X[-1])):
        raise DomainError("grid must contain the data curve X + Y = 0 "
                          "as a node anti-diagonal")
    if trace.x[0] > X[0] + 1e-9 or trace.x[-1] < X[d] - 1e-9:
        raise DomainError("boundary trace does not cover the data curve")

    # quiet-zone closed form everywhere; the marches overwrite the part
    # of the grid that depends on the data
    c0 = float(ws.evaluate(0.0)[0])
    XX, YY = np.meshgrid(X, Y, indexing="ij")
    u = np.zeros((nX + 1, nY + 1))
    al = np.zeros_like(u)
    be = np.zeros_like(u)
    p = np.ones_like(u)
    q = np.ones_like(u)
    x = 0.5 * (XX - YY)
    t = (XX + YY) / (2.0 * c0)

    idx = np.arange(d + 1)
    jdx = d - idx
    for name, arr in (("u", u), ("alpha", al), ("beta", be), ("p", p), ("q", q)):
        arr[idx, jdx] = np.interp(X[idx], trace.x, getattr(trace, name))
    x[idx, jdx] = X[idx]
    t[idx, jdx] = 0.0

    h2 = 0.5 * h

    def march(direction):
        if direction > 0:
            diags = range(d + 1, nX + nY + 1)
        else:
            diags = range(d - 1, -1, -1)
        for s in diags:
            if direction > 0:
                i = np.arange(max(1, s - nY), min(nX, s - 1) + 1)
                j = s - i
                if len(i) == 0:
                    continue
                iW, jW = i - 1, j       # X-direction neighbor
                iS, jS = i, j - 1       # Y-direction neighbor
                iD, jD = i - 1, j - 1
                sgn = 1.0
            else:
                i = np.arange(max(0, s - nY + 1), min(nX - 1, s) + 1)
                j = s - i
                if len(i) == 0:
                    continue
                iW, jW = i + 1, j
                iS, jS = i, j + 1
                iD, jD = i + 1, j + 1
                sgn = -1.0

            uW, alW, beW, pW, qW = u[iW, jW], al[iW, jW], be[iW, jW], p[iW, jW], q[iW, jW]
            uS, alS, beS, pS, qS = u[iS, jS], al[iS, jS], be[iS, jS], p[iS, jS], q[iS, jS]
            xW, tW, xS, tS = x[iW, jW], t[iW, jW], x[iS, jS], t[iS, jS]

            fuW, fbW, fqW, fxW, ftW = _rhs_x(ws, uW, alW, beW, pW, qW)
            fuS, faS, fpS, fxS, ftS = _rhs_y(ws, uS, alS, beS, pS, qS)

            # second-order predictor from the three known corners
            uc = uW + uS - u[iD, jD]
            alc = alW + alS - al[iD, jD]
            bec = beW + beS - be[iD, jD]
            pc = pW + pS - p[iD, jD]
            qc = qW + qS - q[iD, jD]

            converged = False
            for _ in range(max_iters):
                fuX, fbX, fqX, fxX, ftX = _rhs_x(ws, uc, alc, bec, pc, qc)
                fuY, faY, fpY, fxY, ftY = _rhs_y(ws, uc, alc, bec, pc, qc)
                al_new = alS + sgn * h2 * (faS + faY)
                be_new = beW + sgn * h2 * (fbW + fbX)
                p_new = pS + sgn * h2 * (fpS + fpY)
                q_new = qW + sgn * h2 * (fqW + fqX)
                u_new = 0.5 * (uW + sgn * h2 * (fuW + fuX)
                               + uS + sgn * h2 * (fuS + fuY))
                delta = max(np.max(np.abs(al_new - alc)), np.max(np.abs(be_new - bec)),
                            np.max(np.abs(p_new - pc)), np.max(np.abs(q_new - qc)),
                            np.max(np.abs(u_new - uc)))
                scale = 1.0 + max(np.max(np.abs(p_new)), np.max(np.abs(q_new)))
                uc, alc, bec, pc, qc = u_new, al_new, be_new, p_new, q_new
                if delta <= tol * scale:
                    converged = True
                    break
            if not converged:
                raise SolveError("fixed point stalled on diagonal X+Y=%g" % (s * h + X[0] + Y[0]))
            if np.any(pc <= 0.0) or np.any(qc <= 0.0):
                k = int(np.argmin(np.minimum(pc, qc)))
                raise SolveError("relabeling density lost positivity at node "
                                 "(%d, %d)" % (i[k], j[k]))

            fuX, fbX, fqX, fxX, ftX = _rhs_x(ws, uc, alc, bec, pc, qc)
            fuY, faY, fpY, fxY, ftY = _rhs_y(ws, uc, alc, bec, pc, qc)
            u[i, j] = uc
            al[i, j] = alc
            be[i, j] = bec
            p[i, j] = pc
            q[i, j] = qc
            x[i, j] = 0.5 * (xW + sgn * h2 * (fxW + fxX)
                             + xS + sgn * h2 * (fxS + fxY))
            t[i, j] = 0.5 * (tW + sgn * h2 * (ftW + ftX)
                             + tS + sgn * h2 * (ftS + ftY))

    march(+1)
    march(-1)
    return CharChart(X=X, Y=Y, u=u, alpha=al, beta=be, p=p, q=q, x=x, t=t, ws=ws)


def solve_for_time(datum: InitialDatum, ws: WaveSpeed, T, h, margin=1.2,
                   tol=1e-12, max_iters=50) -> CharChart:
    """Size the domain for times up to T, build the boundary trace, solve."""
    X, Y = chart_domain(datum, ws, T, h, margin=margin)
    trace = boundary_data(datum, ws, X)
    return solve_chart(trace, ws, X, Y, tol=tol, max_iters=max_iters)


# -- diagnostics -------------------------------------------------------------


def residuals(chart: CharChart):
    """Max-norm residuals of all ten relations under central differencing."""
    ws = chart.ws
    u, al, be, p, q, x, t = (chart.u, chart.alpha, chart.beta, chart.p,
                             chart.q, chart.x, chart.t)
    hX, hY = chart.hX, chart.hY
    fuX, fbX, fqX, fxX, ftX = _rhs_x(ws, u, al, be, p, q)
    fuY, faY, fpY, fxY, ftY = _rhs_y(ws, u, al, be, p, q)

    def dX(F):
        return (F[2:, :] - F[:-2, :]) / (2.0 * hX)

    def dY(F):
        return (F[:, 2:] - F[:, :-2]) / (2.0 * hY)

    out = {}
    out["u_X"] = float(np.max(np.abs(dX(u) - fuX[1:-1, :])))
    out["beta_X"] = float(np.max(np.abs(dX(be) - fbX[1:-1, :])))
    out["q_X"] = float(np.max(np.abs(dX(q) - fqX[1:-1, :])))
    out["x_X"] = float(np.max(np.abs(dX(x) - fxX[1:-1, :])))
    out["t_X"] = float(np.max(np.abs(dX(t) - ftX[1:-1, :])))
    out["u_Y"] = float(np.max(np.abs(dY(u) - fuY[:, 1:-1])))
    out["alpha_Y"] = float(np.max(np.abs(dY(al) - faY[:, 1:-1])))
    out["p_Y"] = float(np.max(np.abs(dY(p) - fpY[:, 1:-1])))
    out["x_Y"] = float(np.max(np.abs(dY(x) - fxY[:, 1:-1])))
    out["t_Y"] = float(np.max(np.abs(dY(t) - ftY[:, 1:-1])))
    return out


def jacobian_determinant(chart: CharChart):
    """det D(x, t)/D(X, Y) = (1+cos alpha)(1+cos beta) p q / (8 c)."""
    c = chart.ws.evaluate(chart.u)[0]
    return ((1.0 + np.cos(chart.alpha)) * (1.0 + np.cos(chart.beta))
            * chart.p * chart.q / (8.0 * c))


def relabel(chart: CharChart, phi: Callable, dphi: Callable,
            psi: Callable, dpsi: Callable,
            X_new=None, Y_new=None) -> CharChart:
    """Pull the chart back under new labels X = phi(Xt), Y = psi(Yt).

    Scalar fields compose; the densities pick up the factors phi', psi'.
    When the new grids are not given, uniform grids covering the preimage
    of the old domain are used.  Points mapping outside the old domain are
    clamped to its edge (quiet zones assumed there).
    """
    from scipy.optimize import brentq

    X, Y = chart.X, chart.Y

    def invert(f, lo, hi, target):
        span = hi - lo
        return brentq(lambda s: f(s) - target, lo - 2.0 * span, hi + 2.0 * span,
                      xtol=1e-13)

    if X_new is None:
        a = invert(phi, X[0], X[-1], X[0])
        b = invert(phi, X[0], X[-1], X[-1])
        X_new = np.linspace(a, b, len(X))
    else:
        X_new = np.asarray(X_new, dtype=float)
    if Y_new is None:
        a = invert(psi, Y[0], Y[-1], Y[0])
        b = invert(psi, Y[0], Y[-1], Y[-1])
        Y_new = np.linspace(a, b, len(Y))
    else:
        Y_new = np.asarray(Y_new, dtype=float)

    dphiv = np.asarray(dphi(X_new), dtype=float)
    dpsiv = np.asarray(dpsi(Y_new), dtype=float)
    if np.any(dphiv <= 0) or np.any(dpsiv <= 0):
        raise DomainError("relabeling maps must be strictly increasing")

    Xi = np.clip(phi(X_new), X[0], X[-1])
    Yi = np.clip(psi(Y_new), Y[0], Y[-1])
    XX, YY = np.meshgrid(Xi, Yi, indexing="ij")
    pts = np.stack([XX.ravel(), YY.ravel()], axis=-1)

    def interp(F):
        f = RegularGridInterpolator((X, Y), F, method="linear")
        return f(pts).reshape(len(X_new), len(Y_new))

    out = {k: interp(F) for k, F in chart.fields().items()}
    out["p"] = out["p"] * dphiv[:, None]
    out["q"] = out["q"] * dpsiv[None, :]
    return CharChart(X=X_new, Y=Y_new, ws=chart.ws, **out)
