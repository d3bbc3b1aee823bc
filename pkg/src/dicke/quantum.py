"""Exact quantum evolution in the symmetric Dicke (x) Fock basis.

States are complex coefficient matrices C[i, n] over spin projections
m_z = -N/2 + i (i = 0..N, fully symmetric S = N/2 sector) and Fock
occupations n = 0..n_max.  The Hamiltonian acts matrix-free through
ladder rules; propagation uses a Lanczos-Krylov approximation of
exp(-i H dt) with internal step subdivision, and the Fock cutoff n_max
grows or shrinks on the fly based on the population in the top levels.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from . import _kernels
from .model import CutoffExceededError, DEFAULT_FOCK_CEILING, ModelParams

__all__ = [
    "QuantumState",
    "HamiltonianAction",
    "QuantumTrajectory",
    "KrylovError",
    "spin_coherent_amplitudes",
    "coherent_amplitudes",
    "krylov_step",
    "propagate_adaptive",
    "observables",
    "entanglement_entropy",
    "dense_reference_evolve",
    "dense_hamiltonian",
    "final_state_dense",
]


class KrylovError(RuntimeError):
    """Krylov step failed to reach the requested tolerance."""


class BudgetExceededError(RuntimeError):
    """A propagation overran its wall-clock budget."""


class QuantumState:
    """Coefficient matrix over (m_z, n) with a mutable Fock cutoff."""

    def __init__(self, coeffs: np.ndarray, n_spins: int, time: float = 0.0):
        coeffs = np.ascontiguousarray(coeffs, dtype=complex)
        if coeffs.shape[0] != n_spins + 1:
            raise ValueError(
                f"coeffs must have {n_spins + 1} spin rows, got {coeffs.shape[0]}"
            )
        self.coeffs = coeffs
        self.n_spins = n_spins
        self.time = time
        self.initial_deficit = 0.0

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[1] - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def copy(self) -> "QuantumState":
        out = QuantumState(self.coeffs.copy(), self.n_spins, self.time)
        out.initial_deficit = self.initial_deficit
        return out

    def grown(self, delta_n: int) -> "QuantumState":
        """Return a copy with delta_n zero-padded Fock levels appended."""
        pad = np.zeros((self.n_spins + 1, delta_n), dtype=complex)
        return QuantumState(
            np.hstack([self.coeffs, pad]), self.n_spins, self.time
        )

    def shrunk(self, delta_n: int) -> tuple["QuantumState", float]:
        """Return a copy with the top delta_n levels truncated away, plus
        the squared norm that was discarded."""
        if self.n_max - delta_n < 1:
            raise ValueError("cannot shrink below two Fock levels")
        discarded = float(
            np.sum(np.abs(self.coeffs[:, self.n_max - delta_n + 1 :]) ** 2)
        )
        return (
            QuantumState(
                self.coeffs[:, : self.n_max - delta_n + 1].copy(),
                self.n_spins,
                self.time,
            ),
            discarded,
        )


def spin_coherent_amplitudes(n_spins: int, theta0: float) -> np.ndarray:
    """Amplitudes of exp(-i theta0 S_x) |m_z = -N/2> in the m_z basis.

    The resulting state has <S_z> = -(N/2) cos(theta0) and
    <S_y> = +(N/2) sin(theta0).
    """
    s = n_spins / 2.0
    m = -s + np.arange(n_spins + 1)
    if n_spins == 0:
        return np.ones(1, dtype=complex)
    off = 0.5 * np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] + 1.0))
    lam, q = eigh_tridiagonal(np.zeros(n_spins + 1), off)
    return q @ (np.exp(-1j * theta0 * lam) * q[0])


def coherent_amplitudes(alpha: float, n_max: int) -> np.ndarray:
    """Truncated coherent-state amplitudes exp(-|a|^2/2) a^n / sqrt(n!)."""
    alpha = float(alpha)
    n = np.arange(n_max + 1)
    if alpha == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    log_mag = -0.5 * alpha**2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    amps = np.exp(log_mag)
    if alpha < 0:
        amps[1::2] *= -1.0
    return amps


class HamiltonianAction:
    """Matrix-free action of H = (2g/sqrt(N))(a + a^dag) S_z + delta a^dag a
    + Omega S_x on coefficient matrices; never materializes a dense matrix."""

    def __init__(self, params: ModelParams):
        if params.n_spins is None:
            raise ValueError("HamiltonianAction requires n_spins")
        self.params = params
        n = params.n_spins
        s = n / 2.0
        self.m = -s + np.arange(n + 1)
        # S_+ matrix elements sqrt(S(S+1) - m(m+1)) linking rows i <-> i+1
        self.sxp = np.sqrt(s * (s + 1.0) - self.m[:-1] * (self.m[:-1] + 1.0))
        self.coupling = 2.0 * params.g / math.sqrt(n)
        self._m_coup = np.ascontiguousarray(self.coupling * self.m)
        self._sxp_half = np.ascontiguousarray(0.5 * params.omega * self.sxp)
        # (-1)^(S+m) e^{-i pi m} e^{i pi N/2} collapses to a constant (-1)^N,
        # so parity acts as: flip spin rows, stagger boson columns.
        self.parity_sign = -1.0 if n % 2 else 1.0
        self._width_cache: dict[int, tuple] = {}

    def _width_arrays(self, width: int) -> tuple:
        if width not in self._width_cache:
            n = np.arange(width, dtype=float)
            self._width_cache[width] = (np.sqrt(n), self.params.delta * n)
        return self._width_cache[width]

    def apply(self, c: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """H @ c for a coefficient matrix c of shape (N+1, n_max+1)."""
        sqrt_n, delta_n = self._width_arrays(c.shape[1])
        if out is None:
            out = np.empty_like(c)
        return _kernels.matvec(c, out, self._m_coup, self._sxp_half, delta_n, sqrt_n)

    def apply_parity(self, c: np.ndarray) -> np.ndarray:
        """Pi = exp(i pi (S_x + a^dag a + N/2)) applied to c."""
        signs = np.ones(c.shape[1])
        signs[1::2] = -1.0
        return self.parity_sign * (c * signs)[::-1, :]


def _lanczos(ham: HamiltonianAction, c: np.ndarray, m_krylov: int):
    """Lanczos tridiagonalization with full reorthogonalization.

    Returns (V, alphas, betas, beta_next, shape) where V holds the basis
    as rows of flattened vectors; beta_next is the (k+1, k) coupling used
    for the residual estimate (0 on happy breakdown).
    """
    shape = c.shape
    dim = c.size
    m_krylov = min(m_krylov, dim)
    flat = np.ascontiguousarray(c).ravel()
    basis = np.empty((m_krylov, dim), dtype=complex)
    basis[0] = flat / np.linalg.norm(flat)
    alphas = np.empty(m_krylov)
    betas = np.empty(max(m_krylov - 1, 0))
    beta_next = 0.0
    k = m_krylov
    for j in range(m_krylov):
        w = ham.apply(basis[j].reshape(shape)).ravel()
        if j > 0:
            w -= betas[j - 1] * basis[j - 1]
        alphas[j] = np.vdot(basis[j], w).real
        w -= alphas[j] * basis[j]
        # full reorthogonalization against the basis built so far; the
        # conj trick avoids copying the basis: <v_i, w> = conj(V @ conj(w))
        coeffs = np.conj(basis[: j + 1] @ np.conj(w))
        w -= coeffs @ basis[: j + 1]
        beta = np.linalg.norm(w)
        scale = max(np.max(np.abs(alphas[: j + 1])), beta, 1e-300)
        if j == m_krylov - 1:
            beta_next = beta
            break
        if beta <= 1e-13 * scale:
            # invariant subspace: the small exponential is exact
            k = j + 1
            beta_next = 0.0
            break
        betas[j] = beta
        basis[j + 1] = w / beta
    return basis[:k], alphas[:k], betas[: k - 1], beta_next, shape


def _small_expm_factory(alphas, betas):
    """exp(-i t T) e_1 for the tridiagonal T, via eigendecomposition."""
    if len(alphas) == 1:
        lam = alphas.copy()
        q = np.ones((1, 1))
    else:
        lam, q = eigh_tridiagonal(alphas, betas)
    q0 = q[0]
    q_last = q[-1]

    def propagated(t: float) -> np.ndarray:
        return q @ (np.exp(-1j * t * lam) * q0)

    def residual_last(ts: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * np.outer(ts, lam))
        return np.abs(phases @ (q0 * q_last))

    return propagated, residual_last


def krylov_step(
    ham: HamiltonianAction,
    c: np.ndarray,
    dt: float,
    m_krylov: int = 30,
    tol: float = 1e-10,
) -> np.ndarray:
    """Approximate exp(-i H dt) c by Lanczos projection.

    The step is subdivided internally until the residual-based error
    estimate for each piece fits within its share of ``tol``.  The norm of
    c is preserved to reorthogonalization accuracy (~1e-14 per piece).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if m_krylov < 2:
        raise ValueError(f"m_krylov must be >= 2, got {m_krylov}")
    t_done = 0.0
    out = c
    h_hint = dt
    while t_done < dt * (1.0 - 1e-14):
        basis, alphas, betas, beta_next, shape = _lanczos(ham, out, m_krylov)
        propagated, residual_last = _small_expm_factory(alphas, betas)
        norm = np.linalg.norm(out)
        remaining = dt - t_done
        h_try = min(remaining, 1.5 * h_hint)
        if beta_next > 0.0:
            for _ in range(64):
                # error estimate: beta_next * integral of the defect
                ts = np.linspace(0.0, h_try, 17)
                defect = beta_next * residual_last(ts)
                err = float(np.trapezoid(defect, ts))
                if err <= tol * (h_try / dt) or h_try <= dt * 2.0**-52:
                    break
                h_try *= 0.5
            else:
                raise KrylovError(
                    f"krylov_step did not converge at t_done={t_done} (dt={dt})"
                )
            if err > tol * (h_try / dt) and h_try <= dt * 2.0**-52:
                raise KrylovError(
                    f"krylov_step stalled below minimal substep at t_done={t_done}"
                )
        else:
            h_try = remaining
        u = propagated(h_try)
        out = (norm * (u @ basis)).reshape(shape)
        t_done += h_try
        h_hint = h_try
    return out


@dataclass
class QuantumTrajectory:
    """Sampled observables of one quantum run, plus the truncation log."""

    times: np.ndarray
    data: dict
    n_max: np.ndarray
    events: list
    params: ModelParams
    meta: dict = field(default_factory=dict)
    final_state: "QuantumState | None" = None

    def sz_var(self) -> np.ndarray:
        return self.data["sz2"] - self.data["sz"] ** 2

    def truncated_norm2(self) -> float:
        return sum(e.get("discarded_norm2", 0.0) for e in self.events)

    def column(self, name: str) -> np.ndarray:
        if name == "sz_var":
            return self.sz_var()
        if name == "n_max":
            return self.n_max
        return self.data[name]

    def to_csv(self, path, sidecar_path=None) -> None:
        from .io import write_csv, write_json

        names = ["sz", "sz_var", "x", "nbar", "energy", "parity", "svn"]
        rows = zip(
            self.times,
            *[self.column(n) for n in names],
            [int(v) for v in self.n_max],
        )
        write_csv(path, ["t"] + names + ["n_max"], rows)
        if sidecar_path is not None:
            p = self.params
            write_json(
                sidecar_path,
                {
                    "params": {
                        "g": p.g,
                        "delta": p.delta,
                        "omega": p.omega,
                        "n_spins": p.n_spins,
                    },
                    "events": self.events,
                    "meta": self.meta,
                },
            )


def observables(state: QuantumState, ham: HamiltonianAction) -> dict:
    """Expectation values {sz, sz2, x, nbar, energy, parity, svn}."""
    c = state.coeffs
    norm2 = float(np.vdot(c, c).real)
    weights = np.abs(c) ** 2
    row_pop = weights.sum(axis=1)
    col_pop = weights.sum(axis=0)
    n = np.arange(c.shape[1])
    sqrt_n = np.sqrt(np.arange(1, c.shape[1], dtype=float))
    a_expect = np.sum(np.conj(c[:, :-1]) * (sqrt_n * c[:, 1:]))
    return {
        "sz": float(ham.m @ row_pop) / norm2,
        "sz2": float(ham.m**2 @ row_pop) / norm2,
        "x": float(a_expect.real) / norm2,
        "nbar": float(n @ col_pop) / norm2,
        "energy": float(np.vdot(c, ham.apply(c)).real) / norm2,
        "parity": float(np.vdot(c, ham.apply_parity(c)).real) / norm2,
        "svn": entanglement_entropy(state),
    }


def entanglement_entropy(state) -> float:
    """Von Neumann entropy (natural log) of the spin reduced density matrix,
    computed from the Schmidt values of the coefficient matrix."""
    c = state.coeffs if isinstance(state, QuantumState) else np.asarray(state)
    sigma = np.linalg.svd(c, compute_uv=False)
    p = sigma**2
    total = p.sum()
    if total <= 0:
        return 0.0
    p = p / total
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log(p)))


def _sample_grid(t_final: float, sample_dt: float) -> np.ndarray:
    n = max(1, int(round(t_final / sample_dt)))
    return np.linspace(0.0, t_final, n + 1)


def propagate_adaptive(
    psi0: QuantumState,
    params: ModelParams,
    t_final: float,
    eps: float = 1e-6,
    tau_check: float = 1.0,
    delta_n: int = 8,
    sample_dt: float = 0.1,
    m_krylov: int = 30,
    krylov_tol: float = 1e-10,
    ceiling: int = DEFAULT_FOCK_CEILING,
    wall_budget_s: float | None = None,
) -> QuantumTrajectory:
    """Evolve psi0 under H, resizing the Fock cutoff on the fly.

    The run is split into intervals of length tau_check.  Within an
    interval the state is advanced between sampling times by Krylov steps.
    After each advance the population of the top two Fock levels is
    checked: if either exceeded eps anywhere in the interval, the cutoff
    grows by delta_n and the interval is redone from its checkpoint.  If
    the combined population of the top delta_n + 1 levels stayed below eps
    for the whole interval, the cutoff shrinks by delta_n and the
    discarded squared norm is logged.
    """
    if tau_check <= 0 or delta_n <= 0:
        raise ValueError("tau_check and delta_n must be positive")
    ham = HamiltonianAction(params)
    grid = _sample_grid(t_final, sample_dt)
    c = psi0.coeffs.copy()
    events: list[dict] = []
    times: list[float] = [0.0]
    records: list[dict] = [observables(QuantumState(c, psi0.n_spins), ham)]
    n_max_hist: list[int] = [c.shape[1] - 1]
    krylov_stats = {"steps": 0, "redos": 0}

    n_intervals = int(math.ceil(t_final / tau_check - 1e-12))
    next_sample = 1  # index into grid
    t = 0.0
    t_wall = time.monotonic()
    for k in range(n_intervals):
        if wall_budget_s is not None and time.monotonic() - t_wall > wall_budget_s:
            raise BudgetExceededError(
                f"exceeded {wall_budget_s} s at simulation time t={t}"
            )
        t0 = t
        t1 = min((k + 1) * tau_check, t_final)
        checkpoint = c.copy()
        sample_start = next_sample
        while True:  # redo loop for cutoff growth
            grew = False
            top2_max = 0.0
            top_block_max = 0.0
            buf_times: list[float] = []
            buf_records: list[dict] = []
            buf_nmax: list[int] = []
            t = t0
            i = sample_start
            targets: list[tuple[float, bool]] = []
            while i < len(grid) and grid[i] <= t1 + 1e-9 * max(1.0, t1):
                targets.append((grid[i], True))
                i += 1
            if not targets or targets[-1][0] < t1 - 1e-9 * max(1.0, t1):
                targets.append((t1, False))
            for target, is_sample in targets:
                dt = target - t
                if dt > 0:
                    c = krylov_step(ham, c, dt, m_krylov=m_krylov, tol=krylov_tol)
                    krylov_stats["steps"] += 1
                t = target
                pops = np.sum(np.abs(c[:, -(delta_n + 1) :]) ** 2, axis=0)
                top2 = float(np.max(pops[-2:])) if len(pops) >= 2 else float(pops[-1])
                top2_max = max(top2_max, top2)
                top_block_max = max(top_block_max, float(np.sum(pops)))
                if top2 > eps:
                    # grow and redo this interval from the checkpoint
                    new_n_max = (c.shape[1] - 1) + delta_n
                    if new_n_max > ceiling:
                        err = CutoffExceededError(required=new_n_max, ceiling=ceiling)
                        err.checkpoint = QuantumState(
                            checkpoint.copy(), psi0.n_spins, time=t0
                        )
                        raise err
                    pad = np.zeros((c.shape[0], delta_n), dtype=complex)
                    checkpoint = np.hstack([checkpoint, pad])
                    events.append(
                        {
                            "type": "grow",
                            "t": t0,
                            "n_max_old": c.shape[1] - 1,
                            "n_max_new": new_n_max,
                        }
                    )
                    c = checkpoint.copy()
                    krylov_stats["redos"] += 1
                    grew = True
                    break
                if is_sample:
                    buf_times.append(target)
                    buf_records.append(observables(QuantumState(c, psi0.n_spins), ham))
                    buf_nmax.append(c.shape[1] - 1)
            if not grew:
                break
        times.extend(buf_times)
        records.extend(buf_records)
        n_max_hist.extend(buf_nmax)
        next_sample = sample_start + len(buf_times)
        # shrink when the top block stayed quiet for the whole interval
        if top_block_max < eps and (c.shape[1] - 1) - delta_n >= 1:
            discarded = float(np.sum(np.abs(c[:, -delta_n:]) ** 2))
            c = c[:, :-delta_n].copy()
            events.append(
                {
                    "type": "shrink",
                    "t": t1,
                    "n_max_old": c.shape[1] - 1 + delta_n,
                    "n_max_new": c.shape[1] - 1,
                    "discarded_norm2": discarded,
                }
            )
    data = {key: np.array([r[key] for r in records]) for key in records[0]}
    return QuantumTrajectory(
        times=np.array(times),
        data=data,
        n_max=np.array(n_max_hist, dtype=int),
        events=events,
        params=params,
        final_state=QuantumState(c, psi0.n_spins, time=t),
        meta={
            "eps": eps,
            "tau_check": tau_check,
            "delta_n": delta_n,
            "sample_dt": sample_dt,
            "m_krylov": m_krylov,
            "krylov_tol": krylov_tol,
            "ceiling": ceiling,
            "krylov_steps": krylov_stats["steps"],
            "interval_redos": krylov_stats["redos"],
            "matvec_parallelism": "single-threaded",
            "initial_deficit": psi0.initial_deficit,
        },
    )


def dense_hamiltonian(params: ModelParams, n_max: int) -> np.ndarray:
    """Dense H assembled independently from Kronecker products of explicit
    operator matrices (test oracle; dimension (N+1)(n_max+1))."""
    if params.n_spins is None:
        raise ValueError("dense_hamiltonian requires n_spins")
    n_sp = params.n_spins
    s = n_sp / 2.0
    m = -s + np.arange(n_sp + 1)
    sz = np.diag(m)
    sp = np.zeros((n_sp + 1, n_sp + 1))
    for i in range(n_sp):
        sp[i + 1, i] = math.sqrt(s * (s + 1.0) - m[i] * (m[i] + 1.0))
    sx = 0.5 * (sp + sp.T)
    a = np.diag(np.sqrt(np.arange(1.0, n_max + 1)), k=1)
    num = a.T @ a
    eye_b = np.eye(n_max + 1)
    eye_s = np.eye(n_sp + 1)
    coupling = 2.0 * params.g / math.sqrt(n_sp)
    return (
        coupling * np.kron(sz, a + a.T)
        + params.delta * np.kron(eye_s, num)
        + params.omega * np.kron(sx, eye_b)
    )


def dense_reference_evolve(
    psi0: QuantumState,
    params: ModelParams,
    t_final: float,
    sample_dt: float = 0.1,
    dim_cap: int = 2048,
) -> QuantumTrajectory:
    """Exact evolution by spectral decomposition of the dense Hamiltonian
    at psi0's (fixed) Fock cutoff.  Intended for small-instance testing."""
    n_max = psi0.n_max
    dim = (psi0.n_spins + 1) * (n_max + 1)
    if dim > dim_cap:
        raise ValueError(f"dense dimension {dim} exceeds cap {dim_cap}")
    h = dense_hamiltonian(params, n_max)
    evals, evecs = np.linalg.eigh(h)
    ham = HamiltonianAction(params)
    grid = _sample_grid(t_final, sample_dt)
    psi_e = evecs.conj().T @ psi0.coeffs.ravel()
    records = []
    for t in grid:
        vec = evecs @ (np.exp(-1j * evals * t) * psi_e)
        state = QuantumState(
            vec.reshape(psi0.n_spins + 1, n_max + 1), psi0.n_spins, time=t
        )
        records.append(observables(state, ham))
    data = {key: np.array([r[key] for r in records]) for key in records[0]}
    return QuantumTrajectory(
        times=grid,
        data=data,
        n_max=np.full(len(grid), n_max, dtype=int),
        events=[],
        params=params,
        meta={"method": "dense-spectral", "sample_dt": sample_dt},
    )


def final_state_dense(
    psi0: QuantumState, params: ModelParams, t_final: float, dim_cap: int = 2048
) -> QuantumState:
    """Final state of the dense spectral evolution (for state-level checks)."""
    n_max = psi0.n_max
    dim = (psi0.n_spins + 1) * (n_max + 1)
    if dim > dim_cap:
        raise ValueError(f"dense dimension {dim} exceeds cap {dim_cap}")
    h = dense_hamiltonian(params, n_max)
    evals, evecs = np.linalg.eigh(h)
    vec = evecs @ (
        np.exp(-1j * evals * t_final) * (evecs.conj().T @ psi0.coeffs.ravel())
    )
    return QuantumState(
        vec.reshape(psi0.n_spins + 1, n_max + 1), psi0.n_spins, time=t_final
    )
