"""Model parameters, dimensionless coordinates, and initial states.

The Dicke Hamiltonian couples N spin-1/2 particles to one bosonic mode:

    H = (2 g / sqrt(N)) (a + a^dag) S_z + delta a^dag a + Omega S_x

Dynamics are most naturally organized in the dimensionless coordinates
``g_tilde = 2 g / sqrt(delta * Omega)`` (coupling normalized to the
ground-state critical point) and ``eta = delta / Omega``.  Times are
reported in units of 1/g, so with the default g = 1 all times are g*t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Hard ceiling on the boson Fock cutoff used when none is given explicitly.
DEFAULT_FOCK_CEILING = 4096


class CutoffExceededError(RuntimeError):
    """The Fock cutoff required to meet a tolerance exceeds the ceiling.

    Carries the cutoff that would have been needed in ``required``.
    """

    def __init__(self, required: int, ceiling: int, message: str | None = None):
        self.required = required
        self.ceiling = ceiling
        super().__init__(
            message
            or f"required Fock cutoff {required} exceeds hard ceiling {ceiling}"
        )


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings: g, boson frequency delta, transverse field Omega,
    and (optionally, for quantum runs) the particle number N."""

    g: float
    delta: float
    omega: float
    n_spins: int | None = None

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")
        if self.n_spins is not None and self.n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {self.n_spins}")

    @property
    def g_qpt(self) -> float:
        """Ground-state critical coupling sqrt(delta * Omega) / 2."""
        return math.sqrt(self.delta * self.omega) / 2.0

    @property
    def alpha_s(self) -> float:
        """Coherent amplitude g*sqrt(N)/delta of the Omega = 0 ground state."""
        if self.n_spins is None:
            raise ValueError("alpha_s requires n_spins")
        return self.g * math.sqrt(self.n_spins) / self.delta


@dataclass(frozen=True)
class DimensionlessView:
    """Phase-diagram coordinates (g_tilde, eta)."""

    g_tilde: float
    eta: float

    def __post_init__(self):
        # g_tilde = 0 is admitted: the decoupled limit is a standard
        # reference case (pure precession) even though it is not a
        # physical point of the diagram.
        if self.g_tilde < 0:
            raise ValueError(f"g_tilde must be non-negative, got {self.g_tilde}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    def omega(self, g: float = 1.0) -> float:
        """Transverse field that realizes this view at coupling g."""
        if self.g_tilde == 0:
            raise ValueError("omega undefined at g_tilde = 0; pass it explicitly")
        return 2.0 * g / (self.g_tilde * math.sqrt(self.eta))

    def delta(self, g: float = 1.0) -> float:
        if self.g_tilde == 0:
            raise ValueError("delta undefined at g_tilde = 0; pass it explicitly")
        return 2.0 * g * math.sqrt(self.eta) / self.g_tilde


def to_dimensionless(p: ModelParams) -> DimensionlessView:
    """(g, delta, Omega) -> (g_tilde, eta)."""
    if p.omega == 0:
        raise ValueError("dimensionless view undefined at Omega = 0")
    return DimensionlessView(
        g_tilde=2.0 * p.g / math.sqrt(p.delta * p.omega),
        eta=p.delta / p.omega,
    )


def from_dimensionless(
    v: DimensionlessView, g: float = 1.0, n_spins: int | None = None
) -> ModelParams:
    """Invert (g_tilde, eta) at a given coupling g."""
    if g <= 0:
        raise ValueError(f"g must be positive, got {g}")
    if v.g_tilde <= 0:
        raise ValueError("from_dimensionless requires g_tilde > 0")
    sqrt_eta = math.sqrt(v.eta)
    return ModelParams(
        g=g,
        delta=2.0 * g * sqrt_eta / v.g_tilde,
        omega=2.0 * g / (v.g_tilde * sqrt_eta),
        n_spins=n_spins,
    )


@dataclass(frozen=True)
class InitialCondition:
    """Quench initial state: spins tipped by theta0 from -z, bosons in a
    coherent state.

    Exactly one of ``beta0`` (amplitude normalized to alpha_s = g sqrt(N)/delta)
    or ``alpha_abs`` (absolute coherent amplitude) must be given.
    """

    theta0: float = 0.0
    beta0: float | None = None
    alpha_abs: float | None = None

    def __post_init__(self):
        if (self.beta0 is None) == (self.alpha_abs is None):
            raise ValueError("exactly one of beta0 / alpha_abs must be given")
        if not (-math.pi < self.theta0 <= math.pi):
            raise ValueError(f"theta0 must lie in (-pi, pi], got {self.theta0}")

    def resolved_beta0(self, params: ModelParams | None = None) -> float:
        """beta0, computing it from alpha_abs and alpha_s when needed."""
        if self.beta0 is not None:
            return self.beta0
        if params is None or params.n_spins is None:
            raise ValueError(
                "alpha_abs given without ModelParams (n_spins needed for alpha_s)"
            )
        return self.alpha_abs / params.alpha_s

    def alpha(self, params: ModelParams) -> float:
        """Absolute coherent amplitude alpha = beta0 * alpha_s."""
        if self.alpha_abs is not None:
            return self.alpha_abs
        return self.beta0 * params.alpha_s


@dataclass(frozen=True)
class ClassicalState:
    """Unit spin vector plus normalized boson amplitude beta_tilde.

    beta_tilde = delta * <a> / (g sqrt(N)); the equations of motion close
    in these coordinates and beta_tilde(0) = beta0.
    """

    s: np.ndarray
    beta_tilde: complex

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.shape != (3,):
            raise ValueError(f"s must be a 3-vector, got shape {s.shape}")
        norm = float(np.linalg.norm(s))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"|s| must be 1 within 1e-9, got {norm}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "beta_tilde", complex(self.beta_tilde))

    def flat(self) -> np.ndarray:
        """(sx, sy, sz, Re beta, Im beta) as a real 5-vector."""
        return np.array(
            [
                self.s[0],
                self.s[1],
                self.s[2],
                self.beta_tilde.real,
                self.beta_tilde.imag,
            ]
        )

    @staticmethod
    def from_flat(y) -> "ClassicalState":
        y = np.asarray(y, dtype=float)
        return ClassicalState(s=y[:3].copy(), beta_tilde=complex(y[3], y[4]))


def build_initial_classical(
    ic: InitialCondition, params: ModelParams | None = None
) -> ClassicalState:
    """s = (sin theta0, 0, -cos theta0), beta_tilde = beta0 (real)."""
    beta0 = ic.resolved_beta0(params)
    return ClassicalState(
        s=np.array([math.sin(ic.theta0), 0.0, -math.cos(ic.theta0)]),
        beta_tilde=complex(beta0, 0.0),
    )


def fock_cutoff(alpha: float, eps: float, ceiling: int = DEFAULT_FOCK_CEILING) -> int:
    """Minimal n_max with Poisson tail P(n > n_max) <= eps for |alpha|^2.

    Raises CutoffExceededError (carrying the needed cutoff) if the minimal
    cutoff exceeds ``ceiling``.
    """
    from scipy import stats

    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    mu = abs(alpha) ** 2
    if mu == 0:
        return 0
    tail = lambda n: stats.poisson.sf(n, mu)
    hi = int(math.ceil(mu + 10.0 * math.sqrt(mu + 1.0)))
    while tail(hi) > eps:
        hi *= 2
        if hi > 2**26:
            raise CutoffExceededError(required=hi, ceiling=ceiling)
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if tail(mid) <= eps:
            hi = mid
        else:
            lo = mid + 1
    if lo > ceiling:
        raise CutoffExceededError(required=lo, ceiling=ceiling)
    return lo


def build_initial_quantum(
    p: ModelParams,
    ic: InitialCondition,
    eps: float = 1e-6,
    ceiling: int = DEFAULT_FOCK_CEILING,
):
    """Product of a spin coherent state (|-N/2> rotated by theta0 about x,
    toward +y) and a boson coherent state |alpha>, truncated so the norm
    deficit is at most eps, then renormalized.
    """
    from .quantum import QuantumState, coherent_amplitudes, spin_coherent_amplitudes

    if p.n_spins is None:
        raise ValueError("build_initial_quantum requires n_spins")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    alpha = ic.alpha(p)
    n_max = fock_cutoff(alpha, eps, ceiling)
    spin = spin_coherent_amplitudes(p.n_spins, ic.theta0)
    boson = coherent_amplitudes(alpha, n_max)
    coeffs = np.outer(spin, boson)
    deficit = 1.0 - float(np.vdot(coeffs, coeffs).real)
    coeffs /= np.linalg.norm(coeffs)
    state = QuantumState(coeffs=coeffs, n_spins=p.n_spins, time=0.0)
    state.initial_deficit = deficit
    return state


# Keys understood by the JSON/CLI parameter interface.
CONFIG_KEYS = (
    "g",
    "delta",
    "omega",
    "n_spins",
    "g_tilde",
    "eta",
    "theta0",
    "beta0",
    "alpha",
)


def resolve_config(cfg: dict) -> tuple[ModelParams, InitialCondition]:
    """Build (ModelParams, InitialCondition) from a flat config mapping.

    Dimensionless keys (g_tilde, eta) take precedence over (delta, omega)
    when both are present; a warning is logged in that case.
    """
    unknown = set(cfg) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    g = float(cfg.get("g", 1.0))
    n_spins = cfg.get("n_spins")
    n_spins = int(n_spins) if n_spins is not None else None
    has_dimless = "g_tilde" in cfg and "eta" in cfg
    has_physical = "delta" in cfg and "omega" in cfg
    if has_dimless:
        if has_physical:
            log.warning(
                "both dimensionless (g_tilde, eta) and physical (delta, omega) "
                "given; using the dimensionless pair"
            )
        view = DimensionlessView(float(cfg["g_tilde"]), float(cfg["eta"]))
        params = from_dimensionless(view, g=g, n_spins=n_spins)
    elif has_physical:
        params = ModelParams(
            g=g, delta=float(cfg["delta"]), omega=float(cfg["omega"]), n_spins=n_spins
        )
    else:
        raise ValueError(
            "config must provide either (g_tilde, eta) or (delta, omega)"
        )
    theta0 = float(cfg.get("theta0", 0.0))
    if "alpha" in cfg and "beta0" in cfg:
        raise ValueError("give only one of alpha / beta0")
    if "alpha" in cfg:
        ic = InitialCondition(theta0=theta0, alpha_abs=float(cfg["alpha"]))
    else:
        ic = InitialCondition(theta0=theta0, beta0=float(cfg.get("beta0", 1.0)))
    return params, ic
