"""Wave speed profiles c(u) with exact derivatives and antiderivative tools.

A profile carries an evaluation callable returning (c, c', c'') so that no
numerical differentiation of c is ever needed downstream.  The antiderivative
Psi(u) = int_0^u c(s) ds and its inverse are provided both as high-accuracy
scalar routines (adaptive quadrature plus safeguarded Newton) and as cached
vectorized versions for array-heavy callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad, cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DomainError

_PSI_TABLE_N = 8193


@dataclass
class GenericityReport:
    """Outcome of checking the nondegeneracy of critical points of c."""

    critical_points: list          # (u_star, c2_value, ok) triples
    constant_speed: bool
    passed: bool


@dataclass
class WaveSpeed:
    """Uniformly positive smooth wave speed on a bounded u interval.

    evaluate(u) must accept scalars or arrays and return the triple
    (c(u), c'(u), c''(u)).
    """

    evaluate: Callable
    c_floor: float
    u_range: Tuple[float, float]
    name: str = "custom"
    params: dict = field(default_factory=dict)
    psi_exact: Optional[Callable] = None   # analytic antiderivative, oracle use

    def __post_init__(self):
        lo, hi = self.u_range
        if not lo < hi:
            raise DomainError("u_range must be a proper interval")
        if self.c_floor <= 0:
            raise DomainError("wave speed floor must be positive")
        us = np.linspace(lo, hi, 1025)
        c, dc, d2c = self.evaluate(us)
        if np.any(~np.isfinite(c)) or np.any(~np.isfinite(dc)) or np.any(~np.isfinite(d2c)):
            raise DomainError("wave speed evaluation is not finite on u_range")
        if np.any(c < self.c_floor * (1.0 - 1e-12)):
            raise DomainError("wave speed drops below its stated floor")
        self._c_max = float(np.max(c)) * (1.0 + 1e-12)
        self._dc_max = float(np.max(np.abs(dc)))
        self._psi_spline = None
        self._psi_inv_nodes = None

    # -- pointwise evaluation ------------------------------------------------

    def _check_domain(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.u_range
        if u.size and (np.min(u) < lo - 1e-12 or np.max(u) > hi + 1e-12):
            raise DomainError(
                "u=%g outside admissible range [%g, %g]"
                % (float(np.clip(np.min(u), -np.inf, lo)) if np.min(u) < lo else float(np.max(u)), lo, hi)
            )
        return u

    def c(self, u):
        return self.evaluate(self._check_domain(u))[0]

    def dc(self, u):
        return self.evaluate(self._check_domain(u))[1]

    def d2c(self, u):
        return self.evaluate(self._check_domain(u))[2]

    def max_speed(self):
        return self._c_max

    def max_slope(self):
        return self._dc_max

    # -- antiderivative ------------------------------------------------------

    def psi(self, u):
        """Psi(u) = int_0^u c(s) ds by adaptive quadrature (scalar)."""
        u = float(u)
        self._check_domain(u)
        val, _ = quad(lambda s: float(self.evaluate(s)[0]), 0.0, u,
                      epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def psi_inv(self, a, tol=1e-12):
        """Solve Psi(u) = a by safeguarded Newton iteration (scalar)."""
        lo, hi = self.u_range
        plo, phi = self.psi(lo), self.psi(hi)
        if a < plo - 1e-12 or a > phi + 1e-12:
            raise DomainError("value %g outside range of Psi" % a)
        a = float(np.clip(a, plo, phi))
        u, ulo, uhi = float(np.clip(a / self.c(0.0), lo, hi)), lo, hi
        for _ in range(100):
            f = self.psi(u) - a
            if abs(f) <= tol * max(1.0, abs(a)):
                return u
            if f > 0:
                uhi = u
            else:
                ulo = u
            step = f / float(self.c(u))
            u_new = u - step
            if not ulo < u_new < uhi:
                u_new = 0.5 * (ulo + uhi)
            u = u_new
        raise DomainError("psi_inv failed to converge for a=%g" % a)

    def _build_psi_table(self):
        lo, hi = self.u_range
        us = np.linspace(lo, hi, _PSI_TABLE_N)
        cs = self.evaluate(us)[0]
        vals = cumulative_simpson(cs, x=us, initial=0.0)
        # anchor so that Psi(0) = 0
        vals = vals - np.interp(0.0, us, vals)
        self._psi_spline = CubicSpline(us, vals)
        self._psi_inv_nodes = (vals, us)

    def psi_values(self, u):
        """Vectorized Psi via a cached high-order table."""
        u = self._check_domain(u)
        if self._psi_spline is None:
            self._build_psi_table()
        return self._psi_spline(u)

    def psi_inv_values(self, a):
        """Vectorized inverse of Psi (table lookup plus Newton polish)."""
        if self._psi_spline is None:
            self._build_psi_table()
        vals, us = self._psi_inv_nodes
        a = np.asarray(a, dtype=float)
        if a.size and (np.min(a) < vals[0] - 1e-10 or np.max(a) > vals[-1] + 1e-10):
            raise DomainError("values outside range of Psi")
        u = np.interp(a, vals, us)
        lo, hi = self.u_range
        for _ in range(3):
            u = u - (self._psi_spline(u) - a) / self.evaluate(u)[0]
            u = np.clip(u, lo, hi)
        return u

    # -- structural check ----------------------------------------------------

    def check_genericity(self, n_samples=2048, c2_threshold=1e-6):
        """Locate critical points of c and test |c''| there.

        A constant profile is reported as such (non-generic by convention);
        otherwise the check passes when every critical point of c inside
        u_range has second derivative above the threshold in magnitude.
        """
        lo, hi = self.u_range
        us = np.linspace(lo, hi, n_samples)
        dc = self.evaluate(us)[1]
        scale = float(np.max(np.abs(dc)))
        if scale < 1e-13:
            return GenericityReport([], constant_speed=True, passed=False)
        crit = []
        ok_all = True
        sign = np.sign(dc)
        for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
            u_star = brentq(lambda s: float(self.evaluate(s)[1]), us[k], us[k + 1],
                            xtol=1e-13)
            c2 = float(self.evaluate(u_star)[2])
            ok = abs(c2) > c2_threshold
            ok_all = ok_all and ok
            crit.append((u_star, c2, ok))
        # endpoints where dc vanishes identically are not roots of a sign
        # change; sample-level zeros inside flat stretches fail the check
        flat = np.abs(dc) < 1e-13 * max(1.0, scale)
        if np.any(flat[1:-1]):
            k = int(np.nonzero(flat[1:-1])[0][0]) + 1
            c2 = float(self.evaluate(us[k])[2])
            if abs(c2) <= c2_threshold and not any(abs(p[0] - us[k]) < 1e-6 for p in crit):
                crit.append((float(us[k]), c2, False))
                ok_all = False
        return GenericityReport(crit, constant_speed=False, passed=ok_all)


# -- built-in profiles -------------------------------------------------------


def constant_speed(value=1.0, u_range=(-6.0, 6.0)):
    value = float(value)
    if value <= 0:
        raise DomainError("constant speed must be positive")

    def ev(u):
        u = np.asarray(u, dtype=float)
        return value * np.ones_like(u), np.zeros_like(u), np.zeros_like(u)

    return WaveSpeed(ev, value, u_range, name="constant",
                     params={"value": value},
                     psi_exact=lambda u: value * np.asarray(u, dtype=float))


def cosine_speed(base=2.0, amplitude=1.0, u_range=(-6.0, 6.0)):
    """c(u) = base + amplitude * cos(u); requires base > |amplitude|."""
    base, amplitude = float(base), float(amplitude)
    if base - abs(amplitude) <= 0:
        raise DomainError("cosine profile is not uniformly positive")

    def ev(u):
        u = np.asarray(u, dtype=float)
        return base + amplitude * np.cos(u), -amplitude * np.sin(u), -amplitude * np.cos(u)

    return WaveSpeed(ev, base - abs(amplitude), u_range, name="cosine",
                     params={"base": base, "amplitude": amplitude},
                     psi_exact=lambda u: base * np.asarray(u, float) + amplitude * np.sin(u))


def gaussian_speed(base=1.0, amplitude=1.0, u_range=(-6.0, 6.0)):
    """c(u) = base + amplitude * exp(-u^2)."""
    from scipy.special import erf

    base, amplitude = float(base), float(amplitude)
    floor = base + min(0.0, amplitude)
    if floor <= 0:
        raise DomainError("gaussian profile is not uniformly positive")

    def ev(u):
        u = np.asarray(u, dtype=float)
        g = amplitude * np.exp(-u * u)
        return base + g, -2.0 * u * g, (4.0 * u * u - 2.0) * g

    return WaveSpeed(ev, floor, u_range, name="gaussian",
                     params={"base": base, "amplitude": amplitude},
                     psi_exact=lambda u: base * np.asarray(u, float)
                     + amplitude * 0.5 * np.sqrt(np.pi) * erf(np.asarray(u, float)))


def cos_poly_speed(coeffs, u_range=(-6.0, 6.0)):
    """c(u) = coeffs[0] + sum_k coeffs[k] cos(k u)."""
    coeffs = [float(a) for a in coeffs]
    if not coeffs:
        raise DomainError("need at least a constant coefficient")
    floor = coeffs[0] - sum(abs(a) for a in coeffs[1:])
    if floor <= 0:
        raise DomainError("cosine polynomial is not uniformly positive")

    def ev(u):
        u = np.asarray(u, dtype=float)
        c = np.full_like(u, coeffs[0])
        dc = np.zeros_like(u)
        d2c = np.zeros_like(u)
        for k, a in enumerate(coeffs[1:], start=1):
            c += a * np.cos(k * u)
            dc += -a * k * np.sin(k * u)
            d2c += -a * k * k * np.cos(k * u)
        return c, dc, d2c

    def psi_exact(u):
        u = np.asarray(u, dtype=float)
        out = coeffs[0] * u
        for k, a in enumerate(coeffs[1:], start=1):
            out = out + a * np.sin(k * u) / k
        return out

    return WaveSpeed(ev, floor, u_range, name="cos_poly",
                     params={"coeffs": coeffs}, psi_exact=psi_exact)


_REGISTRY = {
    "constant": constant_speed,
    "cosine": cosine_speed,
    "gaussian": gaussian_speed,
    "cos_poly": cos_poly_speed,
}


def make_wave_speed(name, **params):
    if name not in _REGISTRY:
        raise DomainError("unknown wave speed profile %r" % name)
    if "u_range" in params and params["u_range"] is not None:
        params["u_range"] = tuple(params["u_range"])
    return _REGISTRY[name](**params)
