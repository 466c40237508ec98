"""Independent physical-space reference solver (method of lines).

The balance-law form in the slope variables R = u_t + c u_x,
S = u_t - c u_x,

    R_t - c R_x = (c'/4c)(R^2 - S^2),
    S_t + c S_x = (c'/4c)(S^2 - R^2),
    u_t = (R + S)/2,

is discretized with second-order upwind-biased one-sided differences in
x and a three-stage strong-stability-preserving Runge-Kutta step in t.
This is deliberately a different discretization family from the
characteristic chart solver, so agreement between the two is evidence
against shared systematic error.  The solver is valid only before wave
breaking: once max(|R|, |S|) exceeds 1/h the run is marked invalid.

The same machinery transports linearized perturbations: horizontal
shifts (w, z) and slope perturbations (r, s), with the vertical
displacement v recovered at every stage from its x-direction ODE.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .chart import InitialDatum
from .errors import DomainError, SolveError
from .wavespeed import WaveSpeed


def _dx_forward(F, h):
    """Forward-biased one-sided derivative (for leftward transport)."""
    out = np.zeros_like(F)
    out[:-2] = (-3.0 * F[:-2] + 4.0 * F[1:-1] - F[2:]) / (2.0 * h)
    out[-2] = (F[-1] - F[-2]) / h
    out[-1] = 0.0
    return out


def _dx_backward(F, h):
    """Backward-biased one-sided derivative (for rightward transport)."""
    out = np.zeros_like(F)
    out[2:] = (3.0 * F[2:] - 4.0 * F[1:-1] + F[:-2]) / (2.0 * h)
    out[1] = (F[1] - F[0]) / h
    out[0] = 0.0
    return out


def _dx_central(F, h):
    out = np.empty_like(F)
    out[1:-1] = (F[2:] - F[:-2]) / (2.0 * h)
    out[0] = (F[1] - F[0]) / h
    out[-1] = (F[-1] - F[-2]) / h
    return out


@dataclass
class DirectState:
    t: float
    u: np.ndarray
    R: np.ndarray
    S: np.ndarray


@dataclass
class DirectTrajectory:
    x: np.ndarray
    states: List[DirectState]
    valid: bool
    breakdown_time: Optional[float]
    datum: InitialDatum
    ws: WaveSpeed
    cfl: float

    def state_at(self, t):
        ts = [st.t for st in self.states]
        k = int(np.argmin(np.abs(np.asarray(ts) - t)))
        if abs(ts[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError("no stored state near t=%g" % t)
        return self.states[k]


def _base_rhs(ws, u, R, S, h):
    c, dc, _ = ws.evaluate(u)
    src = dc / (4.0 * c) * (R * R - S * S)
    dR = c * _dx_forward(R, h) + src
    dS = -c * _dx_backward(S, h) - src
    du = 0.5 * (R + S)
    return du, dR, dS


def direct_solve(datum: InitialDatum, ws: WaveSpeed, T, h, cfl=0.45,
                 save_times=None, margin=1.2) -> DirectTrajectory:
    """Advance the balance-law system to time T on a padded uniform grid."""
    if cfl > 0.9:
        raise DomainError("cfl must not exceed 0.9")
    reach = margin * ws.max_speed() * abs(T)
    lo = float(datum.x_grid[0]) - reach
    hi = float(datum.x_grid[-1]) + reach
    n = int(np.ceil((hi - lo) / h))
    x = lo + h * np.arange(n + 1)
    d = datum.sample(x)
    u, R, S = d["u0"].copy(), d["R0"].copy(), d["S0"].copy()

    if save_times is None:
        save_times = [0.0, float(T)]
    save_times = sorted(float(s) for s in save_times)
    states = [DirectState(0.0, u.copy(), R.copy(), S.copy())] if save_times and save_times[0] == 0.0 else []
    pending = [s for s in save_times if s > 0.0]

    cap = 1.0 / h
    t = 0.0
    valid = True
    breakdown = None
    dt0 = cfl * h / ws.max_speed()
    while t < T - 1e-14:
        dt = min(dt0, T - t)
        if pending:
            dt = min(dt, pending[0] - t) if pending[0] - t > 1e-14 else dt
        # SSPRK3
        du1, dR1, dS1 = _base_rhs(ws, u, R, S, h)
        u1, R1, S1 = u + dt * du1, R + dt * dR1, S + dt * dS1
        du2, dR2, dS2 = _base_rhs(ws, u1, R1, S1, h)
        u2 = 0.75 * u + 0.25 * (u1 + dt * du2)
        R2 = 0.75 * R + 0.25 * (R1 + dt * dR2)
        S2 = 0.75 * S + 0.25 * (S1 + dt * dS2)
        du3, dR3, dS3 = _base_rhs(ws, u2, R2, S2, h)
        u = u / 3.0 + 2.0 / 3.0 * (u2 + dt * du3)
        R = R / 3.0 + 2.0 / 3.0 * (R2 + dt * dR3)
        S = S / 3.0 + 2.0 / 3.0 * (S2 + dt * dS3)
        t += dt
        if valid and max(np.max(np.abs(R)), np.max(np.abs(S))) > cap:
            valid = False
            breakdown = t
        while pending and t >= pending[0] - 1e-12:
            states.append(DirectState(pending.pop(0), u.copy(), R.copy(), S.copy()))
    return DirectTrajectory(x=x, states=states, valid=valid,
                            breakdown_time=breakdown, datum=datum, ws=ws,
                            cfl=cfl)


def trajectory_energy(traj: DirectTrajectory, state: DirectState):
    return float(np.trapezoid(0.5 * (state.R ** 2 + state.S ** 2), traj.x))


# -- linearized transport ----------------------------------------------------


@dataclass
class TangentState:
    t: float
    w: np.ndarray
    z: np.ndarray
    r: np.ndarray
    s: np.ndarray
    v: np.ndarray
    rt: np.ndarray    # r reduced to fixed (t, x): r - (-w R_x ... ) form
    st: np.ndarray


@dataclass
class TangentTrajectory:
    x: np.ndarray
    base: DirectTrajectory
    states: List[TangentState]

    def state_at(self, t):
        ts = np.asarray([st.t for st in self.states])
        k = int(np.argmin(np.abs(ts - t)))
        if abs(ts[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError("no stored tangent state near t=%g" % t)
        return self.states[k]


def _solve_v(ws, u, R, S, r, s, h):
    """Integrate v_x = -(R - S) c'/(2 c^2) v + (r - s)/(2 c) from the left."""
    c, dc, _ = ws.evaluate(u)
    A = -(R - S) * dc / (2.0 * c * c)
    B = (r - s) / (2.0 * c)
    # trapezoidal linear recurrence v_{i+1} = a_i v_i + b_i, solved by
    # cumulative products (stable: |a| = 1 + O(h))
    ap = (1.0 + 0.5 * h * A[:-1]) / (1.0 - 0.5 * h * A[1:])
    bp = 0.5 * h * (B[:-1] + B[1:]) / (1.0 - 0.5 * h * A[1:])
    P = np.concatenate([[1.0], np.cumprod(ap)])
    acc = np.concatenate([[0.0], np.cumsum(bp / P[1:])])
    return P * acc


def _tangent_rhs(ws, u, R, S, w, z, r, s, h):
    c, dc, d2c = ws.evaluate(u)
    v = _solve_v(ws, u, R, S, r, s, h)
    Rx = _dx_central(R, h)
    Sx = _dx_central(S, h)
    ux = (R - S) / (2.0 * c)
    gamma = (d2c / (4.0 * c) - dc * dc / (4.0 * c * c)) * (R * R - S * S)
    dr = c * _dx_forward(r, h) + dc * Rx * v + gamma * v \
        + dc / (2.0 * c) * (R * r - S * s)
    ds = -c * _dx_backward(s, h) - dc * Sx * v - gamma * v \
        - dc / (2.0 * c) * (R * r - S * s)
    dw = c * _dx_forward(w, h) - dc * (v + ux * w)
    dz = -c * _dx_backward(z, h) + dc * (v + ux * z)
    return dw, dz, dr, ds


def physical_tangent_solve(traj: DirectTrajectory, w0, z0, r0, s0,
                           T, save_times=None) -> TangentTrajectory:
    """Transport a linearized perturbation along a (re-run) base solution.

    Initial fields are given on traj.x.  The base flow is advanced again
    in lock step so no full base trajectory has to be stored.
    """
    ws, h = traj.ws, float(traj.x[1] - traj.x[0])
    x = traj.x
    d = traj.datum.sample(x)
    u, R, S = d["u0"].copy(), d["R0"].copy(), d["S0"].copy()
    w, z = np.array(w0, float), np.array(z0, float)
    r, s = np.array(r0, float), np.array(s0, float)
    if save_times is None:
        save_times = [0.0, float(T)]
    save_times = sorted(float(ts) for ts in save_times)
    pending = list(save_times)
    states = []

    def record(t):
        c, dc, _ = ws.evaluate(u)
        v = _solve_v(ws, u, R, S, r, s, h)
        Rx, Sx = _dx_central(R, h), _dx_central(S, h)
        k = dc / (8.0 * c * c) * (w - z)
        states.append(TangentState(
            t=t, w=w.copy(), z=z.copy(), r=r.copy(), s=s.copy(), v=v,
            rt=r + w * Rx - k * S * S, st=s + z * Sx - k * R * R))

    if pending and pending[0] == 0.0:
        record(0.0)
        pending.pop(0)

    t = 0.0
    dt0 = traj.cfl * h / ws.max_speed()
    while t < T - 1e-14:
        dt = min(dt0, T - t)
        if pending and pending[0] - t > 1e-14:
            dt = min(dt, pending[0] - t)
        yb = (u, R, S)
        yt = (w, z, r, s)

        def step(base, tang, fac_old, fac_new, dt):
            ub, Rb, Sb = base
            wb, zb, rb, sb = tang
            du, dR, dS = _base_rhs(ws, ub, Rb, Sb, h)
            dw, dz, dr, ds = _tangent_rhs(ws, ub, Rb, Sb, wb, zb, rb, sb, h)
            nb = (fac_old[0] * yb[0] + fac_new * (ub + dt * du),
                  fac_old[1] * yb[1] + fac_new * (Rb + dt * dR),
                  fac_old[2] * yb[2] + fac_new * (Sb + dt * dS))
            nt = (fac_old[0] * yt[0] + fac_new * (wb + dt * dw),
                  fac_old[1] * yt[1] + fac_new * (zb + dt * dz),
                  fac_old[2] * yt[2] + fac_new * (rb + dt * dr),
                  fac_old[3] * yt[3] + fac_new * (sb + dt * ds))
            return nb, nt

        b1, t1 = step(yb, yt, (0.0, 0.0, 0.0, 0.0), 1.0, dt)
        b2, t2 = step(b1, t1, (0.75, 0.75, 0.75, 0.75), 0.25, dt)
        b3, t3 = step(b2, t2, (1.0 / 3.0,) * 4, 2.0 / 3.0, dt)
        u, R, S = b3
        w, z, r, s = t3
        t += dt
        while pending and t >= pending[0] - 1e-12:
            record(pending.pop(0))
    return TangentTrajectory(x=x, base=traj, states=states)


def weight_inequality_residual(traj: DirectTrajectory, i0, i1, c_floor=None):
    """Discrete check of the transport inequality for the left weight.

    For W-(t, x) = 1 + int_{-inf}^x S^2 dy the continuum estimate is
    W-_t - c W-_x <= -2 c0 S^2 + a(t).  Returns the maximum violation of
    the discretized inequality (positive means violated beyond a(t)).
    """
    st0, st1 = traj.states[i0], traj.states[i1]
    ws, x = traj.ws, traj.x
    dt = st1.t - st0.t
    if dt <= 0:
        raise DomainError("states must be time ordered")
    h = float(x[1] - x[0])
    from scipy.integrate import cumulative_trapezoid

    def weight(st):
        return 1.0 + np.concatenate([[0.0], cumulative_trapezoid(st.S ** 2, x)])

    W0, W1 = weight(st0), weight(st1)
    Wmid = 0.5 * (W0 + W1)
    u = 0.5 * (st0.u + st1.u)
    R = 0.5 * (st0.R + st1.R)
    S = 0.5 * (st0.S + st1.S)
    c, dc, _ = ws.evaluate(u)
    c0 = c_floor if c_floor is not None else traj.ws.c_floor
    a_t = float(np.trapezoid(np.abs(dc) * np.abs(R * R * S - R * S * S)
                             / (2.0 * c), x))
    lhs = (W1 - W0) / dt - c * _dx_central(Wmid, h)
    rhs = -2.0 * c0 * S ** 2 + a_t
    return float(np.max(lhs - rhs))
