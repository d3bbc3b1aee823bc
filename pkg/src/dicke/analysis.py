"""Post-processing: windowed statistics, relaxation-rate fits, feasibility.

Window averages use dense trapezoidal integration on the sampled grid
(never subsampled points, which alias against the fast oscillations).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "FitKind",
    "FitResult",
    "windowed_time_average",
    "temporal_fluctuations",
    "fit_exponential_saturation",
    "fit_translated_logistic",
    "feasibility_ratios",
]


class FitKind(enum.Enum):
    EXPONENTIAL_SATURATION = "exponential_saturation"
    TRANSLATED_LOGISTIC = "translated_logistic"


@dataclass
class FitResult:
    """Outcome of a relaxation-rate fit.

    ``gamma_effective`` is gamma for the saturating exponential and
    c + 1/t0 for the translated logistic.  ``converged`` is False whenever
    the fit cannot be trusted; the reason lands in meta["message"].
    """

    kind: FitKind
    params: dict
    gamma_effective: float
    residual_rms: float
    converged: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "params": self.params,
            "gamma_effective": self.gamma_effective,
            "residual_rms": self.residual_rms,
            "converged": self.converged,
            "meta": self.meta,
        }


def _window(t, y, t0: float, horizon: float):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if horizon <= 0:
        raise ValueError(f"empty window: horizon {horizon} <= 0")
    t1 = t0 + horizon
    if t0 < t[0] - 1e-9 or t1 > t[-1] + 1e-9:
        raise ValueError(
            f"window ({t0}, {t1}) outside series span ({t[0]}, {t[-1]})"
        )
    t0 = max(t0, t[0])
    t1 = min(t1, t[-1])
    inside = (t > t0) & (t < t1)
    tw = np.concatenate([[t0], t[inside], [t1]])
    yw = np.concatenate([[np.interp(t0, t, y)], y[inside], [np.interp(t1, t, y)]])
    return tw, yw


def windowed_time_average(t, y, t0: float, horizon: float) -> float:
    """Trapezoidal mean of y over t in [t0, t0 + horizon]."""
    tw, yw = _window(t, y, t0, horizon)
    return float(np.trapezoid(yw, tw) / (tw[-1] - tw[0]))


def temporal_fluctuations(t, y, t0: float, horizon: float) -> float:
    """Windowed variance of y normalized by its windowed mean."""
    tw, yw = _window(t, y, t0, horizon)
    span = tw[-1] - tw[0]
    mean = float(np.trapezoid(yw, tw) / span)
    if abs(mean) < 1e-30:
        raise ValueError("undefined normalization: windowed mean is zero")
    var = float(np.trapezoid((yw - mean) ** 2, tw) / span)
    return var / mean


def _half_crossing_time(t, y, level: float) -> float | None:
    above = np.nonzero(y >= level)[0]
    if len(above) == 0:
        return None
    i = above[0]
    if i == 0:
        return float(t[0]) if t[0] > 0 else None
    # linear interpolation of the first crossing
    t_lo, t_hi = t[i - 1], t[i]
    y_lo, y_hi = y[i - 1], y[i]
    if y_hi == y_lo:
        return float(t_hi)
    return float(t_lo + (level - y_lo) * (t_hi - t_lo) / (y_hi - y_lo))


def _finish_fit(kind, t, y, result, param_names, gamma_effective) -> FitResult:
    residuals = result.fun
    rms = float(np.sqrt(np.mean(residuals**2)))
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else -math.inf
    params = dict(zip(param_names, [float(v) for v in result.x]))
    converged = bool(
        result.success
        and np.isfinite(rms)
        and gamma_effective > 0
        and r2 >= 0.5
    )
    meta = {
        "r_squared": r2,
        "message": str(result.message),
        "nfev": int(result.nfev),
        "weighting": "unweighted",
        "converged_requires": "success, finite rms, positive rate, r_squared >= 0.5",
    }
    return FitResult(
        kind=kind,
        params=params,
        gamma_effective=float(gamma_effective),
        residual_rms=rms,
        converged=converged,
        meta=meta,
    )


def _degenerate(kind, message: str) -> FitResult:
    return FitResult(
        kind=kind,
        params={},
        gamma_effective=math.nan,
        residual_rms=math.nan,
        converged=False,
        meta={"message": message},
    )


def fit_exponential_saturation(t, y) -> FitResult:
    """Least-squares fit of y ~ A (1 - exp(-gamma t)), A > 0, gamma > 0."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 10:
        raise ValueError(f"need at least 10 samples, got {len(t)}")
    kind = FitKind.EXPONENTIAL_SATURATION
    a0 = float(np.max(y))
    if not np.isfinite(a0) or a0 <= 0:
        return _degenerate(kind, "degenerate data: no positive values to saturate")
    t_half = _half_crossing_time(t, y, a0 / 2.0)
    gamma0 = 1.0 / t_half if t_half and t_half > 0 else 10.0 / max(t[-1], 1e-30)

    def residual(p):
        a, gamma = p
        return a * (1.0 - np.exp(-gamma * t)) - y

    def jac(p):
        a, gamma = p
        e = np.exp(-gamma * t)
        return np.column_stack([1.0 - e, a * t * e])

    result = least_squares(
        residual,
        x0=[a0, gamma0],
        jac=jac,
        bounds=([1e-300, 1e-300], [np.inf, np.inf]),
        method="trf",
        x_scale="jac",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    return _finish_fit(kind, t, y, result, ["A", "gamma"], result.x[1])


def fit_translated_logistic(t, y) -> FitResult:
    """Least-squares fit of y ~ a / (1 + exp(-c (t - t0))) - b.

    The offset b is initialized to a / (1 + exp(c t0)) so the initial
    guess passes through y(0) = 0; the effective relaxation rate is
    gamma = c + 1/t0 (growth rate plus onset delay).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 10:
        raise ValueError(f"need at least 10 samples, got {len(t)}")
    kind = FitKind.TRANSLATED_LOGISTIC
    a0 = float(np.max(y))
    if not np.isfinite(a0) or a0 <= 0:
        return _degenerate(kind, "degenerate data: no positive values to saturate")
    t_half = _half_crossing_time(t, y, a0 / 2.0)
    t00 = t_half if t_half and t_half > 0 else max(t[-1] / 3.0, 1e-6)
    c0 = 2.0 / t00
    b0 = a0 / (1.0 + math.exp(min(c0 * t00, 700.0)))

    def residual(p):
        a, c, t0, b = p
        return a / (1.0 + np.exp(np.clip(-c * (t - t0), -700, 700))) - b - y

    def jac(p):
        a, c, t0, b = p
        e = np.exp(np.clip(-c * (t - t0), -700, 700))
        denom = (1.0 + e) ** 2
        return np.column_stack(
            [
                1.0 / (1.0 + e),
                a * (t - t0) * e / denom,
                -a * c * e / denom,
                -np.ones_like(t),
            ]
        )

    result = least_squares(
        residual,
        x0=[a0, c0, t00, b0],
        jac=jac,
        bounds=([1e-300, 1e-300, 1e-300, -np.inf], [np.inf] * 4),
        method="trf",
        x_scale="jac",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    a, c, t0, b = result.x
    fit = _finish_fit(kind, t, y, result, ["a", "c", "t0", "b"], c + 1.0 / t0)
    t_resolution = float(t[t > t[0]][0]) if np.any(t > t[0]) else 0.0
    if fit.converged and t0 < t_resolution:
        # zero-delay (tanh) limit: the midpoint collapsed below the sampling
        # resolution, so the delay contribution 1/t0 is unidentifiable
        fit.converged = False
        fit.meta["message"] = (
            "midpoint collapsed below sampling resolution; "
            "rate c + 1/t0 unidentifiable in the zero-delay limit"
        )
    return fit


def feasibility_ratios(g: float, gamma_el: float, eta: float) -> tuple:
    """Oscillation-frequency to dephasing-rate ratios at g_tilde = 1:

        delta / Gamma_el = 2 g sqrt(eta) / Gamma_el   (boson-dominated)
        Omega / Gamma_el = 2 g / (sqrt(eta) Gamma_el) (spin-dominated)

    g and Gamma_el in angular-frequency units (rad/s over 1/s).
    """
    if g <= 0 or gamma_el <= 0 or eta <= 0:
        raise ValueError("g, gamma_el, eta must all be positive")
    sqrt_eta = math.sqrt(eta)
    return 2.0 * g * sqrt_eta / gamma_el, 2.0 * g / (sqrt_eta * gamma_el)
