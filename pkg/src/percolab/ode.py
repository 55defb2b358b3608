"""Deterministic limit system for the bounded-size process.

The raw system evolves (xbar, sbar2, sbar3, sbar4), the limiting
isolated-vertex fraction and scaled susceptibility moments. sbar2
blows up at a finite critical time t_c, so the critical point is
located on the transformed system in

    f = 1/sbar2,  g = sbar3/sbar2^3,  h1 = sbar4/sbar2^4 - 3 g^2 / f,

which stays regular through the singularity; t_c is the first zero of
f. The growth constants follow algebraically from xbar(t_c) and
g(t_c).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.optimize import brentq

from .errors import BlowUpError, BracketError, CriticalWindowError, NumericalFailureError

__all__ = [
    "OdeState",
    "TransformedState",
    "CriticalConstants",
    "Trajectory",
    "deriv_raw",
    "deriv_transformed",
    "integrate",
    "find_tc",
    "sbar_k",
    "h_value",
    "integrating_factor_G",
    "reconstruct_g",
]

RAW_S2_CAP = 1.0e6  # the raw system is never integrated past this
F_FLOOR = 1.0e-6  # moments are not reported closer to critical than this
T_SPAN_MAX = 1.4  # comfortably past the critical time
DEFAULT_ODE_TOL = 1.0e-10


@dataclass(frozen=True)
class OdeState:
    t: float
    xbar: float
    s2: float
    s3: float
    s4: float


@dataclass(frozen=True)
class TransformedState:
    t: float
    xbar: float
    f: float
    g: float
    h1: float


def deriv_raw(t: float, y) -> list[float]:
    """Right-hand side of the raw (xbar, s2, s3, s4) system."""
    x, s2, s3, s4 = y
    x2 = x * x
    q = 1.0 - x2
    return [
        -x2 - q * x,
        x2 + q * s2 * s2,
        3.0 * x2 + 3.0 * q * s2 * s3,
        7.0 * x2 + q * (4.0 * s2 * s4 + 3.0 * s3 * s3),
    ]


def deriv_transformed(t: float, y) -> list[float]:
    """Right-hand side of the (xbar, f, g, h1) system; regular at f = 0."""
    x, f, g, h1 = y
    x2 = x * x
    return [
        -x2 - (1.0 - x2) * x,
        -x2 * f * f - (1.0 - x2),
        3.0 * x2 * f * f * f - 3.0 * x2 * f * g,
        7.0 * x2 * f**4 - 18.0 * x2 * g * f * f + 3.0 * x2 * g * g - 4.0 * x2 * f * h1,
    ]


@dataclass(frozen=True)
class Trajectory:
    """Dense-output solution of one of the two systems on [0, t_end]."""

    system: str
    t_end: float
    tol: float
    _sol: object

    def state(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= self.t_end:
            raise ValueError(f"t={t} outside [0, {self.t_end}]")
        return self._sol(t)

    def raw_state(self, t: float) -> OdeState:
        if self.system != "raw":
            raise ValueError("raw_state needs a raw trajectory")
        x, s2, s3, s4 = (float(v) for v in self.state(t))
        return OdeState(t, x, s2, s3, s4)

    def transformed_state(self, t: float) -> TransformedState:
        if self.system != "transformed":
            raise ValueError("transformed_state needs a transformed trajectory")
        x, f, g, h1 = (float(v) for v in self.state(t))
        return TransformedState(t, x, f, g, h1)

    def xbar(self, t: float) -> float:
        return float(self.state(t)[0])

    def f(self, t: float) -> float:
        return float(self.state(t)[1])

    def g(self, t: float) -> float:
        return float(self.state(t)[2])

    def h1(self, t: float) -> float:
        return float(self.state(t)[3])


def integrate(system: str = "transformed", t_end: float = T_SPAN_MAX,
              tol: float = DEFAULT_ODE_TOL, xbar0: float = 1.0) -> Trajectory:
    """Adaptive high-order Runge-Kutta integration with dense output.

    xbar0=0 freezes the two-choice branch and reduces the raw system to
    the pure uniform-edge limit. Integrating the raw system into the
    blow-up raises BlowUpError.
    """
    if system == "raw":
        y0 = [xbar0, 1.0, 1.0, 1.0]
        deriv = deriv_raw

        def cap(t, y):
            return y[1] - RAW_S2_CAP

        cap.terminal = True
        events = [cap]
    elif system == "transformed":
        y0 = [xbar0, 1.0, 1.0, -2.0]
        deriv = deriv_transformed
        events = None
    else:
        raise ValueError(f"unknown system {system!r}")
    sol = solve_ivp(
        deriv, (0.0, t_end), y0, method="DOP853", rtol=tol, atol=tol,
        dense_output=True, events=events,
    )
    if not sol.success:
        raise NumericalFailureError(f"integration failed: {sol.message}")
    if system == "raw" and sol.t[-1] < t_end:
        raise BlowUpError(
            f"second moment exceeded {RAW_S2_CAP:g} at t={sol.t[-1]:.6f} < {t_end}"
        )
    return Trajectory(system=system, t_end=t_end, tol=tol, _sol=sol.sol)


@dataclass(frozen=True)
class CriticalConstants:
    """Critical time and growth constants, with per-field error estimates.

    Exact relations: g2 = alpha = 1/(1 - x_tc^2), gamma = 2/(alpha*beta),
    g3 = beta*alpha^3, g4 = 3*beta^2*alpha^5.
    """

    tc: float
    x_tc: float
    alpha: float
    beta: float
    gamma: float
    g2: float
    g3: float
    g4: float
    tc_err: float
    x_tc_err: float
    alpha_err: float
    beta_err: float
    gamma_err: float
    g2_err: float
    g3_err: float
    g4_err: float

    FIELDS = ("tc", "x_tc", "alpha", "beta", "gamma", "g2", "g3", "g4")

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _locate_tc(traj: Trajectory, xtol: float) -> float:
    ts = np.linspace(0.9, traj.t_end, 101)
    fs = [traj.f(t) for t in ts]
    for i in range(len(ts) - 1):
        if fs[i] > 0.0 >= fs[i + 1]:
            return float(brentq(traj.f, ts[i], ts[i + 1], xtol=xtol, rtol=8.9e-16))
    raise BracketError("f never crossed zero; integration span too short?")


def _constants_at(traj: Trajectory, tc: float) -> dict[str, float]:
    x = traj.xbar(tc)
    beta = traj.g(tc)
    alpha = 1.0 / (1.0 - x * x)
    return {
        "tc": tc,
        "x_tc": x,
        "alpha": alpha,
        "beta": beta,
        "gamma": 2.0 * (1.0 - x * x) / beta,
        "g2": alpha,
        "g3": beta * alpha**3,
        "g4": 3.0 * beta * beta * alpha**5,
    }


@functools.lru_cache(maxsize=16)
def find_tc(tol: float = 1.0e-8, ode_tol: float | None = None) -> CriticalConstants:
    """Locate the critical time and compute the growth constants.

    tol bounds the root search for t_c; the trajectory itself is
    integrated at ode_tol (default well below tol). Error estimates
    compare against a rerun at a much coarser integration tolerance, so
    halving either tolerance moves each value by less than its err.
    """
    if ode_tol is None:
        ode_tol = min(DEFAULT_ODE_TOL * 0.01, tol * 1.0e-4)
    ode_tol = max(ode_tol, 1.0e-13)
    fine = integrate("transformed", T_SPAN_MAX, ode_tol)
    tc = _locate_tc(fine, xtol=min(tol, 1.0e-8))
    vals = _constants_at(fine, tc)
    coarse = integrate("transformed", T_SPAN_MAX, min(ode_tol * 1.0e4, 1.0e-6))
    tc_c = _locate_tc(coarse, xtol=min(tol, 1.0e-8))
    vals_c = _constants_at(coarse, tc_c)
    errs = {
        k + "_err": max(4.0 * abs(vals[k] - vals_c[k]), 1.0e-12 * max(1.0, abs(vals[k])))
        for k in vals
    }
    errs["tc_err"] = max(errs["tc_err"], tol)
    return CriticalConstants(**vals, **errs)


def critical_trajectory(tol: float = DEFAULT_ODE_TOL * 0.01) -> Trajectory:
    """Shared transformed trajectory through the critical region."""
    return _cached_traj(max(tol, 1.0e-13))


@functools.lru_cache(maxsize=4)
def _cached_traj(tol: float) -> Trajectory:
    return integrate("transformed", T_SPAN_MAX, tol)


def sbar_k(traj: Trajectory, t: float) -> tuple[float, float, float]:
    """(s2, s3, s4) limits at subcritical t, recovered from (f, g, h1)."""
    st = traj.transformed_state(t)
    if st.f < F_FLOOR:
        raise CriticalWindowError(
            f"f(t)={st.f:.2e} below {F_FLOOR:g}; too close to the critical time"
        )
    s2 = 1.0 / st.f
    s3 = st.g * s2**3
    s4 = (st.h1 + 3.0 * st.g * st.g / st.f) * s2**4
    return s2, s3, s4


def h_value(traj: Trajectory, t: float) -> float:
    """sbar4/sbar2^4, defined only while f stays above its floor."""
    st = traj.transformed_state(t)
    if st.f < F_FLOOR:
        raise CriticalWindowError("h is not exposed this close to the critical time")
    return st.h1 + 3.0 * st.g * st.g / st.f


def _grid_values(traj: Trajectory, t: float, npts: int):
    ts = np.linspace(0.0, t, npts)
    states = traj._sol(ts)
    x2 = states[0] ** 2
    f = states[1]
    return ts, x2, f


def integrating_factor_G(traj: Trajectory, t: float, npts: int = 2001) -> float:
    """G(t) = 3 * integral of xbar^2 f on [0, t], by Simpson quadrature."""
    ts, x2, f = _grid_values(traj, t, npts)
    return 3.0 * float(cumulative_simpson(x2 * f, x=ts, initial=0.0)[-1])


def reconstruct_g(traj: Trajectory, t: float, npts: int = 2001) -> float:
    """g(t) rebuilt from the integrating factor, independent of the g ODE.

    g(t) = exp(-G(t)) * (1 + 3 * integral of exp(G) xbar^2 f^3).
    """
    ts, x2, f = _grid_values(traj, t, npts)
    G = 3.0 * cumulative_simpson(x2 * f, x=ts, initial=0.0)
    inner = cumulative_simpson(np.exp(G) * x2 * f**3, x=ts, initial=0.0)
    return float(math.exp(-G[-1]) * (1.0 + 3.0 * inner[-1]))
