"""Distance bounds between initial data and Lipschitz-growth experiments.

The geodesic-style distance induced by the weighted tangent norm is
approximated from above by explicit paths (the antiderivative-interpolated
path between two data) and from below by transport-style functionals.
Growth in time of a path length is compared against the Gronwall
envelope exp(C tau + int_0^tau a), with the constant C fitted once on a
development suite and then frozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .chart import InitialDatum
from .errors import DomainError
from .metric import (NormWeights, PathOfData, interaction_rate, norm_profile,
                     path_domain, path_length, tangent_by_theta,
                     tangent_norm_at)
from .slices import extract_level_curve, reconstruct_slice
from .wavespeed import WaveSpeed


# -- data-space functionals --------------------------------------------------


def _common_grid(A: InitialDatum, B: InitialDatum):
    lo = min(A.x_grid[0], B.x_grid[0])
    hi = max(A.x_grid[-1], B.x_grid[-1])
    h = min(A.x_grid[1] - A.x_grid[0], B.x_grid[1] - B.x_grid[0])
    n = int(np.round((hi - lo) / h))
    return np.linspace(lo, hi, n + 1)


def sobolev_rhs(A: InitialDatum, B: InitialDatum):
    """|du0|_{H1} + |du0|_{W11} + |du1|_{L2} + |du1|_{L1} on a shared grid."""
    x = _common_grid(A, B)
    a, b = A.sample(x), B.sample(x)
    d0 = a["u0"] - b["u0"]
    d0x = a["du0"] - b["du0"]
    d1 = a["u1"] - b["u1"]
    h1 = np.sqrt(np.trapezoid(d0 ** 2 + d0x ** 2, x))
    w11 = np.trapezoid(np.abs(d0) + np.abs(d0x), x)
    l2 = np.sqrt(np.trapezoid(d1 ** 2, x))
    l1 = np.trapezoid(np.abs(d1), x)
    return float(h1 + w11 + l2 + l1)


def h1_l2_distance(x, u_a, ux_a, ut_a, u_b, ux_b, ut_b):
    """H1 x L2 distance between two slices on a common grid."""
    return float(np.sqrt(np.trapezoid((u_a - u_b) ** 2 + (ux_a - ux_b) ** 2, x))
                 + np.sqrt(np.trapezoid((ut_a - ut_b) ** 2, x)))


def transport_lower_bounds(A: InitialDatum, B: InitialDatum, ws: WaveSpeed,
                           n_offsets=81):
    """Certified lower-bound functionals for the data distance.

    Returns (l1_u0, wd) where l1_u0 = int |u0 - v0| dx and wd is a
    dual lower bound on the transport distance between the energy
    measures: the supremum of int f d(mu - nu) over a structured family
    of functions with |f| <= 1 and |f'| <= 1.
    """
    x = _common_grid(A, B)
    a, b = A.sample(x), B.sample(x)
    l1 = float(np.trapezoid(np.abs(a["u0"] - b["u0"]), x))
    ca, cb = ws.c(a["u0"]), ws.c(b["u0"])
    ma = a["u1"] ** 2 + (ca * a["du0"]) ** 2
    mb = b["u1"] ** 2 + (cb * b["du0"]) ** 2
    diff = ma - mb
    F = np.concatenate([[0.0], cumulative_trapezoid(diff, x)])
    # f = clip(b0 + int sign(F), -1, 1) has |f| <= 1, |f'| <= 1 and tends
    # to align with the sign of the cumulative discrepancy
    g = np.concatenate([[0.0], cumulative_trapezoid(np.sign(F), x)])
    best = abs(float(np.trapezoid(diff, x)))        # f identically +-1
    for b0 in np.linspace(-1.0, 1.0, n_offsets):
        f = np.clip(b0 + g, -1.0, 1.0)
        best = max(best, abs(float(np.trapezoid(f * diff, x))))
    return l1, best


def interpolated_path(A: InitialDatum, B: InitialDatum, ws: WaveSpeed,
                      n_thetas=5) -> PathOfData:
    """Path theta -> data interpolating Psi(u0) and u1 linearly.

    With Psi the antiderivative of c, the profile u0^theta is
    Psi^{-1}((1-theta) Psi(u0^A) + theta Psi(u0^B)); this keeps the
    slice energy below the larger endpoint energy.
    """
    x = _common_grid(A, B)
    a, b = A.sample(x), B.sample(x)
    psi_a = ws.psi_values(a["u0"])
    psi_b = ws.psi_values(b["u0"])
    # x derivative of Psi(u0^theta) is exact: d/dx Psi(u0) = c(u0) u0'
    dpsi_a = ws.c(a["u0"]) * a["du0"]
    dpsi_b = ws.c(b["u0"]) * b["du0"]

    def datum_fn(theta):
        psi = (1.0 - theta) * psi_a + theta * psi_b
        u0 = ws.psi_inv_values(psi)
        du0 = ((1.0 - theta) * dpsi_a + theta * dpsi_b) / ws.c(u0)
        u1 = (1.0 - theta) * a["u1"] + theta * b["u1"]
        return InitialDatum.from_samples(ws, x, u0, u1, du0=du0)

    cap = max(A.E0, B.E0) * (1.0 + 1e-9)
    return PathOfData(datum_fn, np.linspace(0.0, 1.0, n_thetas), cap)


# -- Gronwall fit and check --------------------------------------------------


@dataclass
class GronwallReport:
    taus: np.ndarray
    norms: np.ndarray
    rates: np.ndarray          # d/dtau log norm at interior taus
    a_rates: np.ndarray
    fitted_C: float
    violations: int


def gronwall_check(reports, C: Optional[float] = None,
                   slack=0.0) -> GronwallReport:
    """Fit or test d/dtau log N(tau) <= C + a(tau) on a norm profile.

    reports is a list of NormReport from norm_profile.  When C is given,
    violations counts interior taus where the rate exceeds C + a + slack;
    fitted_C is always the smallest admissible constant for this profile.
    """
    taus = np.asarray([r.tau for r in reports])
    norms = np.asarray([r.value for r in reports])
    a_rates = np.asarray([r.a_rate for r in reports])
    if np.any(norms <= 0):
        raise DomainError("norm profile must be positive to fit growth rates")
    logn = np.log(norms)
    rates = np.gradient(logn, taus)
    fitted = float(np.max(rates - a_rates))
    viol = 0
    if C is not None:
        viol = int(np.sum(rates > C + a_rates + slack))
    return GronwallReport(taus, norms, rates, a_rates, fitted, viol)


# -- Lipschitz growth experiment ---------------------------------------------


@dataclass
class LipschitzRow:
    tau: float
    length: float
    ratio: float
    a_int: float               # int_0^tau max_theta a^theta
    envelope: float
    violated: bool
    endpoint_h1l2: float
    endpoint_clipped: bool


@dataclass
class LipschitzReport:
    rows: List[LipschitzRow]
    fitted_C: float


def lipschitz_experiment(path: PathOfData, taus, ws: WaveSpeed, T, h,
                         weights: Optional[NormWeights] = None, eps=1e-4,
                         margin=1.2, C_fit: Optional[float] = None,
                         **kw) -> LipschitzReport:
    """Track the path length on a ladder of times against its envelope.

    For each theta sample the tangent charts are solved once and reused
    for every tau.  The envelope is exp(C tau + int_0^tau abar) with
    abar(tau) the largest interaction rate over the theta samples; C is
    fitted from this very profile when C_fit is not given (and should be
    a frozen constant when used as a test).
    """
    weights = weights or NormWeights()
    taus = np.asarray(sorted(float(s) for s in taus), dtype=float)
    if taus[0] != 0.0:
        taus = np.concatenate([[0.0], taus])
    grid = path_domain(path, ws, T, h, margin=margin)

    per_theta = []       # norms[k_theta][k_tau], rates likewise
    charts = []
    for th in path.thetas:
        chart, tan = tangent_by_theta(path, float(th), ws, *grid, eps=eps, **kw)
        reps = [tangent_norm_at(chart, tan, tau, weights) for tau in taus]
        per_theta.append(reps)
        charts.append(chart)

    norms = np.array([[r.value for r in reps] for reps in per_theta])
    a_bar = np.array([max(reps[k].a_rate for reps in per_theta)
                      for k in range(len(taus))])
    lengths = np.trapezoid(norms, path.thetas, axis=0)
    a_int = np.concatenate([[0.0], cumulative_trapezoid(a_bar, taus)])

    if C_fit is None:
        with np.errstate(divide="ignore"):
            lr = np.log(lengths / lengths[0])
        C_fit = float(np.max((lr - a_int)[1:] / taus[1:])) if len(taus) > 1 else 0.0

    # endpoint slices in physical variables
    end_lo, end_hi = charts[0], charts[-1]
    rows = []
    for k, tau in enumerate(taus):
        sl_a = reconstruct_slice(end_lo, extract_level_curve(end_lo, tau))
        sl_b = reconstruct_slice(end_hi, extract_level_curve(end_hi, tau))
        lo = max(sl_a.x[0], sl_b.x[0])
        hi = min(sl_a.x[-1], sl_b.x[-1])
        xg = np.linspace(lo, hi, min(len(sl_a.x), len(sl_b.x)))
        interp = lambda sl, f: np.interp(xg, sl.x, f)
        dist = h1_l2_distance(xg,
                              interp(sl_a, sl_a.u), interp(sl_a, sl_a.ux),
                              interp(sl_a, sl_a.ut),
                              interp(sl_b, sl_b.u), interp(sl_b, sl_b.ux),
                              interp(sl_b, sl_b.ut))
        env = float(np.exp(C_fit * tau + a_int[k]))
        ratio = float(lengths[k] / lengths[0])
        rows.append(LipschitzRow(
            tau=float(tau), length=float(lengths[k]), ratio=ratio,
            a_int=float(a_int[k]), envelope=env,
            violated=bool(ratio > env * (1.0 + 1e-9)),
            endpoint_h1l2=dist,
            endpoint_clipped=bool(sl_a.clipped or sl_b.clipped)))
    return LipschitzReport(rows=rows, fitted_C=float(C_fit))
