"""Effective one-dimensional potentials for the integrable regimes.

In the spin-dominated limit (eta >> 1) the slow coordinate is s_z; in the
boson-dominated limit (eta << 1) it is Re(beta).  Either way the motion
is that of a particle released at the initial coordinate with zero
mechanical energy, so the dynamical transition sits exactly where the
interior barrier of V touches zero.  Closed forms for that condition are
provided together with an independent numeric barrier-crossing oracle,
and the critical-energy bookkeeping connecting the transition to the
excited-state spectrum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import DimensionlessView, InitialCondition, ModelParams

__all__ = [
    "Regime",
    "PotentialCurve",
    "EqptReport",
    "spin_potential",
    "boson_potential",
    "potential_curve",
    "critical_coupling_spin",
    "critical_coupling_boson",
    "numeric_critical_coupling",
    "eqpt_energies",
]


class Regime(enum.Enum):
    SPIN_DOMINATED = "spin"
    BOSON_DOMINATED = "boson"


@dataclass(frozen=True)
class PotentialCurve:
    regime: Regime
    coordinate_grid: np.ndarray
    values: np.ndarray
    params: dict

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["xi", "v"], zip(self.coordinate_grid, self.values))


@dataclass(frozen=True)
class EqptReport:
    """Initial-state energy and the critical energies it can intersect.

    e0       : quench energy -(g_tilde^2/2) Omega N / 2 (theta0=0, beta0=1)
    e_c_spin : -Omega N / 2
    e_c_boson: -Omega m_x_prime, with m_x_prime = g_tilde^2 N / (2 sqrt(1+g_tilde^4))
    """

    e0: float
    e_c_spin: float
    e_c_boson: float
    m_x_prime: float


def spin_potential(s_z, g_tilde: float, theta0: float, omega: float = 1.0):
    """V(s_z) governing the slow spin coordinate (eta >> 1)."""
    s_z = np.asarray(s_z, dtype=float)
    c2 = math.cos(theta0) ** 2
    inner = 0.5 * g_tilde**2 * (s_z**2 - c2) + math.sin(theta0)
    v = 0.5 * omega**2 * (inner**2 + s_z**2 - 1.0)
    return v if v.ndim else float(v)


def _boson_kappa(g_tilde: float, beta0: float, theta0: float) -> float:
    """Projection of the initial spin onto the adiabatic rotation axis."""
    return (math.sin(theta0) - g_tilde**2 * beta0 * math.cos(theta0)) / math.sqrt(
        1.0 + g_tilde**4 * beta0**2
    )


def boson_potential(beta_r, g_tilde: float, beta0: float, delta: float = 1.0,
                    theta0: float = 0.0):
    """V(Re beta) governing the slow boson coordinate (eta << 1).

    For theta0 = 0 this is

        delta^2 ( b^2/2 - beta0 sqrt(1+g^4 b^2)/sqrt(1+g^4 beta0^2)
                  + beta0 - beta0^2/2 ).

    For tilted spins the adiabatic elimination generalizes through the
    projection factor kappa; the closed-form critical coupling is only
    stated for theta0 = 0, but the potential (and hence the numeric
    oracle) remains valid.
    """
    beta_r = np.asarray(beta_r, dtype=float)
    g4 = g_tilde**4
    if g_tilde == 0:
        raise ValueError("boson potential undefined at g_tilde = 0")
    kappa = _boson_kappa(g_tilde, beta0, theta0)
    v = delta**2 * (
        0.5 * beta_r**2
        + kappa * np.sqrt(1.0 + g4 * beta_r**2) / g_tilde**2
        - 0.5 * beta0**2
        - kappa * math.sqrt(1.0 + g4 * beta0**2) / g_tilde**2
    )
    return v if v.ndim else float(v)


def _initial_coordinate(regime: Regime, ic: InitialCondition) -> float:
    if regime is Regime.SPIN_DOMINATED:
        return -math.cos(ic.theta0)
    return ic.resolved_beta0()


def _potential_fn(regime: Regime, ic: InitialCondition, g_tilde: float,
                  scale: float):
    if regime is Regime.SPIN_DOMINATED:
        return lambda xi: spin_potential(xi, g_tilde, ic.theta0, omega=scale)
    beta0 = ic.resolved_beta0()
    return lambda xi: boson_potential(xi, g_tilde, beta0, delta=scale,
                                      theta0=ic.theta0)


def potential_curve(
    regime: Regime,
    ic: InitialCondition,
    g_tilde: float,
    scale: float = 1.0,
    n_points: int = 401,
    span: float | None = None,
) -> PotentialCurve:
    """Tabulate V on a grid containing the initial coordinate exactly."""
    xi0 = _initial_coordinate(regime, ic)
    if span is None:
        span = 1.0 if regime is Regime.SPIN_DOMINATED else 1.5 * max(abs(xi0), 1.0)
    grid = np.union1d(np.linspace(-span, span, n_points), [xi0])
    fn = _potential_fn(regime, ic, g_tilde, scale)
    return PotentialCurve(
        regime=regime,
        coordinate_grid=grid,
        values=fn(grid),
        params={
            "g_tilde": g_tilde,
            "theta0": ic.theta0,
            "beta0": ic.beta0,
            "scale": scale,
        },
    )


def critical_coupling_spin(theta0: float) -> float:
    """g_tilde at which the spin-regime barrier reaches the initial energy:
    sqrt(2 (1 + sin theta0) / cos^2 theta0)."""
    c = math.cos(theta0)
    if abs(c) < 1e-12:
        raise ValueError("potential degenerate at poles (theta0 = +/- pi/2)")
    return math.sqrt(2.0) * math.sqrt((1.0 + math.sin(theta0)) / c**2)


def critical_coupling_boson(beta0: float) -> float:
    """g_tilde at which the boson-regime barrier reaches the initial energy:
    [ (4 - beta0) / (beta0 (2 - beta0)^2) ]^(1/4), valid for beta0 in (0, 2)."""
    if not 0.0 < beta0 < 2.0:
        raise ValueError(
            f"beta0={beta0} outside derivation domain (0, 2)"
        )
    return ((4.0 - beta0) / (beta0 * (2.0 - beta0) ** 2)) ** 0.25


def _barrier_height(fn, xi0: float) -> float:
    """Maximum of V strictly between the initial coordinate and its mirror."""
    a, b = -abs(xi0), abs(xi0)
    if b - a < 1e-12:
        raise ValueError("initial coordinate too close to the barrier")
    margin = 1e-9 * (b - a)
    grid = np.linspace(a + margin, b - margin, 2001)
    values = fn(grid)
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: -fn(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return max(float(values[i]), float(-res.fun))


def numeric_critical_coupling(
    regime: Regime,
    ic: InitialCondition,
    scale: float = 1.0,
    tol: float = 1e-9,
) -> float:
    """Independent oracle: bisect g_tilde on the sign of the interior
    barrier height of V (negative = untrapped, positive = trapped)."""
    xi0 = _initial_coordinate(regime, ic)
    if regime is Regime.SPIN_DOMINATED and abs(math.cos(ic.theta0)) < 1e-12:
        raise ValueError("potential degenerate at poles (theta0 = +/- pi/2)")
    if regime is Regime.BOSON_DOMINATED and xi0 <= 0:
        raise ValueError("boson regime requires a positive initial amplitude")

    def height(g_tilde: float) -> float:
        fn = _potential_fn(regime, ic, g_tilde, scale)
        return _barrier_height(fn, xi0)

    lo, hi = 0.05, 2.0
    if height(lo) >= 0:
        raise ValueError("no sign change in bracket: barrier already positive")
    while height(hi) < 0:
        hi *= 2.0
        if hi > 64.0:
            raise ValueError("no sign change in bracket: barrier stays negative")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if height(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eqpt_energies(p: ModelParams, v: DimensionlessView) -> EqptReport:
    """Critical-energy bookkeeping for the theta0 = 0, beta0 = 1 quench."""
    if p.n_spins is None:
        raise ValueError("eqpt_energies requires n_spins")
    n = p.n_spins
    gt2 = v.g_tilde**2
    m_x_prime = gt2 / math.sqrt(1.0 + gt2**2) * n / 2.0
    return EqptReport(
        e0=-(gt2 / 2.0) * p.omega * n / 2.0,
        e_c_spin=-p.omega * n / 2.0,
        e_c_boson=-p.omega * m_x_prime,
        m_x_prime=m_x_prime,
    )
