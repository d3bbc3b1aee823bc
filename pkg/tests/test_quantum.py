"""Quantum engine: matvec, Krylov stepping, adaptive truncation, oracles."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from dicke.model import (
    CutoffExceededError,
    DimensionlessView,
    InitialCondition,
    ModelParams,
    build_initial_quantum,
    from_dimensionless,
)
from dicke.quantum import (
    HamiltonianAction,
    KrylovError,
    QuantumState,
    coherent_amplitudes,
    dense_hamiltonian,
    dense_reference_evolve,
    entanglement_entropy,
    final_state_dense,
    krylov_step,
    observables,
    propagate_adaptive,
    spin_coherent_amplitudes,
)

QUENCH = InitialCondition(theta0=0.0, beta0=1.0)


def random_coeffs(rng, n_rows, n_cols, normalize=True):
    c = rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))
    return c / np.linalg.norm(c) if normalize else c


def pad_to(state: QuantumState, width: int) -> np.ndarray:
    c = state.coeffs
    return np.hstack([c, np.zeros((c.shape[0], width - c.shape[1]), complex)])


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    fa = a.ravel() / np.linalg.norm(a)
    fb = b.ravel() / np.linalg.norm(b)
    fidelity = abs(np.vdot(fa, fb)) ** 2
    return math.sqrt(max(0.0, 1.0 - fidelity))


class TestHamiltonianAction:
    def test_diagonal_limit(self):
        # g = Omega = 0: pure boson number operator
        p = ModelParams(g=0.0, delta=1.7, omega=0.0, n_spins=3)
        ham = HamiltonianAction(p)
        c = np.zeros((4, 5), complex)
        c[2, 3] = 1.0
        out = ham.apply(c)
        assert out[2, 3] == pytest.approx(1.7 * 3)
        assert np.count_nonzero(np.abs(out) > 1e-15) == 1

    def test_single_spin_sx(self):
        # N=1: S_x is (1/2) off-diagonal ones
        p = ModelParams(g=0.0, delta=1.0, omega=1.0, n_spins=1)
        ham = HamiltonianAction(p)
        c = np.zeros((2, 1), complex)
        c[0, 0] = 1.0
        out = ham.apply(c)
        assert out[1, 0] == pytest.approx(0.5)
        assert out[0, 0] == pytest.approx(0.0)

    def test_matches_dense_kron_assembly(self):
        p = ModelParams(g=0.7, delta=1.3, omega=0.9, n_spins=2)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(1)
        c = random_coeffs(rng, 3, 4)
        dense = dense_hamiltonian(p, 3)
        np.testing.assert_allclose(
            ham.apply(c).ravel(), dense @ c.ravel(), atol=1e-13
        )

    def test_hermiticity_on_random_vectors(self):
        p = ModelParams(g=1.1, delta=0.8, omega=1.4, n_spins=5)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(2)
        for _ in range(5):
            a = random_coeffs(rng, 6, 9)
            b = random_coeffs(rng, 6, 9)
            lhs = np.vdot(a, ham.apply(b))
            rhs = np.conj(np.vdot(b, ham.apply(a)))
            assert abs(lhs - rhs) < 1e-12

    def test_parity_matches_dense_exponential(self):
        for n_spins in (2, 3):
            p = ModelParams(g=0.5, delta=1.0, omega=0.7, n_spins=n_spins)
            ham = HamiltonianAction(p)
            n_max = 4
            s = n_spins / 2.0
            m = -s + np.arange(n_spins + 1)
            sp = np.zeros((n_spins + 1, n_spins + 1))
            for i in range(n_spins):
                sp[i + 1, i] = math.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
            sx = 0.5 * (sp + sp.T)
            num = np.diag(np.arange(n_max + 1.0))
            gen = (
                np.kron(sx, np.eye(n_max + 1))
                + np.kron(np.eye(n_spins + 1), num)
                + (n_spins / 2.0) * np.eye((n_spins + 1) * (n_max + 1))
            )
            pi_dense = expm(1j * math.pi * gen)
            rng = np.random.default_rng(3)
            c = random_coeffs(rng, n_spins + 1, n_max + 1)
            np.testing.assert_allclose(
                ham.apply_parity(c).ravel(), pi_dense @ c.ravel(), atol=1e-12
            )

    def test_parity_commutes_with_hamiltonian(self):
        p = ModelParams(g=0.9, delta=1.1, omega=0.6, n_spins=4)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(4)
        c = random_coeffs(rng, 5, 7)
        lhs = ham.apply(ham.apply_parity(c))
        rhs = ham.apply_parity(ham.apply(c))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestKrylovStep:
    def test_diagonal_exact_phases(self):
        p = ModelParams(g=0.0, delta=1.3, omega=0.0, n_spins=2)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(5)
        c = random_coeffs(rng, 3, 6)
        out = krylov_step(ham, c, dt=0.8, m_krylov=18, tol=1e-12)
        expect = c * np.exp(-1j * 1.3 * np.arange(6) * 0.8)
        np.testing.assert_allclose(out, expect, atol=1e-11)

    def test_matches_dense_exponential(self):
        p = ModelParams(g=0.7, delta=1.3, omega=0.9, n_spins=2)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(6)
        c = random_coeffs(rng, 3, 8)
        dense = dense_hamiltonian(p, 7)
        for dt in (0.1, 0.9, 3.7):
            out = krylov_step(ham, c, dt, m_krylov=12, tol=1e-12)
            expect = (expm(-1j * dt * dense) @ c.ravel()).reshape(3, 8)
            assert np.max(np.abs(out - expect)) < 1e-10

    def test_norm_preserved(self):
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=6)
        ham = HamiltonianAction(p)
        rng = np.random.default_rng(7)
        c = random_coeffs(rng, 7, 20)
        out = krylov_step(ham, c, dt=2.5, m_krylov=25, tol=1e-10)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_invalid_arguments(self):
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=2)
        ham = HamiltonianAction(p)
        c = np.ones((3, 2), complex)
        with pytest.raises(ValueError):
            krylov_step(ham, c, dt=-1.0)
        with pytest.raises(ValueError):
            krylov_step(ham, c, dt=1.0, m_krylov=1)


class TestPropagateAdaptive:
    def test_decoupled_spin_precession(self):
        # g = 0: spin precesses classically, boson stays coherent; the
        # cutoff never needs to grow beyond its initial headroom
        n_spins, alpha, omega = 6, 1.5, 2.0
        p = ModelParams(g=0.0, delta=1.0, omega=omega, n_spins=n_spins)
        psi0 = build_initial_quantum(
            p, InitialCondition(theta0=0.0, alpha_abs=alpha), eps=1e-8
        )
        traj = propagate_adaptive(psi0, p, t_final=20.0, eps=1e-6, sample_dt=0.1)
        expect = -(n_spins / 2.0) * np.cos(omega * traj.times)
        assert np.max(np.abs(traj.data["sz"] - expect)) < 1e-6
        assert traj.n_max.max() <= psi0.n_max
        nbar_err = np.max(np.abs(traj.data["nbar"] - alpha**2))
        assert nbar_err < 1e-5

    def test_small_system_matches_dense(self):
        # N=2, gt=50: state-level agreement with the spectral oracle
        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=2)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-14)
        traj = propagate_adaptive(
            psi0, p, t_final=50.0, eps=1e-20, krylov_tol=1e-13, sample_dt=0.5
        )
        width = max(traj.final_state.n_max, psi0.n_max) + 30
        psi0_big = QuantumState(pad_to(psi0, width), 2)
        dense_final = final_state_dense(psi0_big, p, 50.0)
        td = trace_distance(pad_to(traj.final_state, width), dense_final.coeffs)
        assert td < 1e-8

    def test_growth_and_shrink_events_logged(self):
        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=4)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-6)
        traj = propagate_adaptive(psi0, p, t_final=40.0, eps=1e-6, sample_dt=0.2)
        kinds = {e["type"] for e in traj.events}
        assert "grow" in kinds  # the quench always outgrows the initial cutoff
        for e in traj.events:
            if e["type"] == "shrink":
                assert e["discarded_norm2"] >= 0.0
                assert e["n_max_new"] == e["n_max_old"] - traj.meta["delta_n"]

    def test_norm_deficit_bounded_by_truncation_log(self):
        v = DimensionlessView(1.43, 4.0)
        p = from_dimensionless(v, g=1.0, n_spins=20)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-6)
        traj = propagate_adaptive(psi0, p, t_final=60.0, eps=1e-6, sample_dt=0.1)
        deficit = 1.0 - traj.final_state.norm()
        assert deficit <= traj.truncated_norm2() + 1e-10
        n_shrinks = sum(1 for e in traj.events if e["type"] == "shrink")
        assert abs(deficit) <= n_shrinks * traj.meta["eps"] + 1e-10

    def test_conservation_medium_run(self):
        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=40)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-6)
        traj = propagate_adaptive(psi0, p, t_final=100.0, eps=1e-6, sample_dt=0.1)
        energy = traj.data["energy"]
        assert np.max(np.abs(energy - energy[0])) / abs(energy[0]) < 1e-6
        parity = traj.data["parity"]
        assert np.max(np.abs(parity - parity[0])) < 1e-6
        var = traj.sz_var()
        assert np.min(var) > -1e-10
        svn = traj.data["svn"]
        assert np.all(svn >= 0.0)
        assert np.all(svn <= math.log(41) + 1e-12)

    def test_ceiling_error_carries_checkpoint(self):
        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=4)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-6)
        with pytest.raises(CutoffExceededError) as exc:
            propagate_adaptive(psi0, p, t_final=50.0, eps=1e-6, ceiling=psi0.n_max + 4,
                               delta_n=8)
        assert exc.value.required > psi0.n_max + 4
        assert isinstance(exc.value.checkpoint, QuantumState)

    def test_csv_round_trip(self, tmp_path):
        p = ModelParams(g=0.0, delta=1.0, omega=1.0, n_spins=2)
        psi0 = build_initial_quantum(p, InitialCondition(theta0=0.5, alpha_abs=0.5),
                                     eps=1e-8)
        traj = propagate_adaptive(psi0, p, t_final=2.0, sample_dt=0.5)
        traj.to_csv(tmp_path / "q.csv", tmp_path / "q.json")
        header = (tmp_path / "q.csv").read_text().splitlines()[0]
        assert header == "t,sz,sz_var,x,nbar,energy,parity,svn,n_max"


class TestObservables:
    def test_ground_product_state(self):
        n_spins = 8
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=n_spins)
        ham = HamiltonianAction(p)
        c = np.zeros((n_spins + 1, 3), complex)
        c[0, 0] = 1.0
        obs = observables(QuantumState(c, n_spins), ham)
        assert obs["sz"] == pytest.approx(-n_spins / 2.0)
        assert obs["sz2"] == pytest.approx(n_spins**2 / 4.0)
        assert obs["x"] == pytest.approx(0.0)
        assert obs["nbar"] == pytest.approx(0.0)

    def test_coherent_state_quadrature(self):
        alpha = 1.3
        n_spins = 2
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=n_spins)
        ham = HamiltonianAction(p)
        psi = build_initial_quantum(p, InitialCondition(theta0=0.0, alpha_abs=alpha),
                                    eps=1e-12)
        obs = observables(psi, ham)
        assert obs["x"] == pytest.approx(alpha, abs=1e-8)
        assert obs["nbar"] == pytest.approx(alpha**2, abs=1e-8)

    def test_initial_energy_matches_critical_energy_bookkeeping(self):
        from dicke.potential import eqpt_energies

        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=30)
        ham = HamiltonianAction(p)
        psi = build_initial_quantum(p, QUENCH, eps=1e-12)
        obs = observables(psi, ham)
        report = eqpt_energies(p, v)
        assert obs["energy"] == pytest.approx(report.e0, rel=1e-10)
        # equivalently -g^2 N / delta
        assert obs["energy"] == pytest.approx(-p.g**2 * p.n_spins / p.delta, rel=1e-10)


class TestEntropy:
    def test_product_state_zero(self):
        rng = np.random.default_rng(9)
        spin = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        boson = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        c = np.outer(spin, boson)
        c /= np.linalg.norm(c)
        assert entanglement_entropy(c) < 1e-12

    def test_schmidt_rank_two(self):
        # (|a>|0> + |b>|1>)/sqrt(2) with orthonormal spin parts -> log 2
        c = np.zeros((2, 2), complex)
        c[0, 0] = 1.0 / math.sqrt(2)
        c[1, 1] = 1.0 / math.sqrt(2)
        assert entanglement_entropy(c) == pytest.approx(math.log(2), abs=1e-12)

    def test_spin_boson_symmetry_via_density_matrices(self):
        # independent oracle: eigenvalues of both reduced density matrices
        rng = np.random.default_rng(10)
        c = random_coeffs(rng, 6, 11)
        rho_spin = c @ c.conj().T
        rho_boson = c.conj().T @ c
        def vn(rho):
            evals = np.linalg.eigvalsh(rho)
            evals = evals[evals > 1e-14]
            return float(-np.sum(evals * np.log(evals)))
        assert vn(rho_spin) == pytest.approx(vn(rho_boson), abs=1e-10)
        assert entanglement_entropy(c) == pytest.approx(vn(rho_spin), abs=1e-10)

    def test_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            c = random_coeffs(rng, 4, 9)
            s = entanglement_entropy(c)
            assert 0.0 <= s <= math.log(4) + 1e-12


class TestDenseReference:
    def test_decoupled_closed_form(self):
        n_spins, omega = 4, 1.5
        p = ModelParams(g=0.0, delta=0.9, omega=omega, n_spins=n_spins)
        psi0 = build_initial_quantum(p, InitialCondition(theta0=0.0, alpha_abs=1.0),
                                     eps=1e-10)
        traj = dense_reference_evolve(psi0, p, t_final=10.0, sample_dt=0.1)
        expect = -(n_spins / 2.0) * np.cos(omega * traj.times)
        assert np.max(np.abs(traj.data["sz"] - expect)) < 1e-8

    def test_energy_exactly_conserved(self):
        v = DimensionlessView(1.3, 1.0)
        p = from_dimensionless(v, g=1.0, n_spins=4)
        psi0 = build_initial_quantum(p, QUENCH, eps=1e-10)
        psi0 = QuantumState(pad_to(psi0, 40), 4)
        traj = dense_reference_evolve(psi0, p, t_final=30.0, sample_dt=0.5)
        energy = traj.data["energy"]
        assert np.max(np.abs(energy - energy[0])) < 1e-10

    def test_dimension_cap(self):
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=100)
        psi0 = QuantumState(np.zeros((101, 101), complex) + 1e-3, 100)
        with pytest.raises(ValueError, match="exceeds cap"):
            dense_reference_evolve(psi0, p, t_final=1.0)


class TestAmplitudeHelpers:
    def test_coherent_amplitudes_negative_alpha(self):
        amps = coherent_amplitudes(-1.2, 20)
        expect = coherent_amplitudes(1.2, 20)
        signs = (-1.0) ** np.arange(21)
        np.testing.assert_allclose(amps, expect * signs, atol=1e-15)

    def test_spin_coherent_south_pole(self):
        amps = spin_coherent_amplitudes(5, 0.0)
        assert abs(amps[0]) == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(amps[1:])) < 1e-14
