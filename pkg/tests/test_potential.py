"""Effective potentials, critical couplings, and the numeric oracle."""

import math

import numpy as np
import pytest

from dicke.model import DimensionlessView, InitialCondition, ModelParams
from dicke.potential import (
    EqptReport,
    Regime,
    boson_potential,
    critical_coupling_boson,
    critical_coupling_spin,
    eqpt_energies,
    numeric_critical_coupling,
    potential_curve,
    spin_potential,
)


class TestSpinPotential:
    def test_zero_at_initial_coordinate(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            theta0 = rng.uniform(-1.4, 1.4)
            g_tilde = rng.uniform(0.1, 3.0)
            omega = rng.uniform(0.2, 5.0)
            v = spin_potential(-math.cos(theta0), g_tilde, theta0, omega)
            assert abs(v) < 1e-12

    def test_critical_barrier_is_zero(self):
        # at g~ = sqrt(2), theta0 = 0 the barrier at s_z = 0 touches zero
        assert spin_potential(0.0, math.sqrt(2), 0.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_subcritical_barrier_negative(self):
        # hand evaluation: (1/2)((1/2*(-1))^2 - 1) = -3/8
        assert spin_potential(0.0, 1.0, 0.0, 1.0) == pytest.approx(-3.0 / 8.0)


class TestBosonPotential:
    def test_zero_at_initial_coordinate(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            beta0 = rng.uniform(0.1, 1.9)
            g_tilde = rng.uniform(0.3, 3.0)
            delta = rng.uniform(0.2, 5.0)
            assert abs(boson_potential(beta0, g_tilde, beta0, delta)) < 1e-12

    def test_critical_barrier_is_zero(self):
        assert boson_potential(0.0, 3.0 ** 0.25, 1.0, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_subcritical_barrier_value(self):
        # hand evaluation: -1/sqrt(2) + 1/2
        expect = -1.0 / math.sqrt(2) + 0.5
        assert boson_potential(0.0, 1.0, 1.0, 1.0) == pytest.approx(expect, rel=1e-12)

    def test_general_theta0_reduces_to_closed_form(self):
        grid = np.linspace(-1.2, 1.2, 7)
        a = boson_potential(grid, 1.2, 0.9, 1.3)
        b = boson_potential(grid, 1.2, 0.9, 1.3, theta0=0.0)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


class TestCriticalCouplings:
    def test_spin_examples(self):
        assert critical_coupling_spin(0.0) == pytest.approx(math.sqrt(2), rel=1e-12)
        expect = math.sqrt(2) * math.sqrt((1 + math.sqrt(2) / 2) / 0.5)
        assert critical_coupling_spin(math.pi / 4) == pytest.approx(expect, rel=1e-12)
        assert critical_coupling_spin(math.pi / 4) == pytest.approx(2.61313, abs=1e-5)
        assert critical_coupling_spin(-math.pi / 4) == pytest.approx(1.08239, abs=1e-5)

    def test_spin_pole_rejected(self):
        with pytest.raises(ValueError, match="poles"):
            critical_coupling_spin(math.pi / 2)

    def test_boson_examples(self):
        assert critical_coupling_boson(1.0) == pytest.approx(3.0 ** 0.25, rel=1e-12)
        assert critical_coupling_boson(0.5) == pytest.approx(
            (3.5 / 1.125) ** 0.25, rel=1e-12
        )
        assert critical_coupling_boson(0.5) == pytest.approx(1.328094, abs=1e-5)

    def test_boson_domain_guard(self):
        for bad in (0.0, -0.2, 2.0, 2.5):
            with pytest.raises(ValueError, match="derivation domain"):
                critical_coupling_boson(bad)

    def test_boson_continuity_at_unity(self):
        lo = critical_coupling_boson(1.0 - 1e-6)
        hi = critical_coupling_boson(1.0 + 1e-6)
        assert abs(lo - hi) < 1e-5
        assert abs(critical_coupling_boson(1.0) - lo) < 1e-5


class TestNumericOracle:
    @pytest.mark.parametrize("theta0", [0.0, 0.3, -0.7, 1.1])
    def test_spin_matches_closed_form(self, theta0):
        ic = InitialCondition(theta0=theta0, beta0=1.0)
        numeric = numeric_critical_coupling(Regime.SPIN_DOMINATED, ic)
        assert abs(numeric - critical_coupling_spin(theta0)) < 1e-8

    @pytest.mark.parametrize("beta0", [0.2, 0.5, 1.0, 1.5, 1.9])
    def test_boson_matches_closed_form(self, beta0):
        ic = InitialCondition(theta0=0.0, beta0=beta0)
        numeric = numeric_critical_coupling(Regime.BOSON_DOMINATED, ic)
        assert abs(numeric - critical_coupling_boson(beta0)) < 1e-8

    def test_barrier_sign_flips_at_critical(self):
        # below g~_crit the interior barrier is negative, above positive
        from dicke.potential import _barrier_height, _potential_fn

        rng = np.random.default_rng(5)
        for regime in Regime:
            for _ in range(50):
                if regime is Regime.SPIN_DOMINATED:
                    ic = InitialCondition(theta0=rng.uniform(-1.3, 1.3), beta0=1.0)
                    crit = critical_coupling_spin(ic.theta0)
                    xi0 = -math.cos(ic.theta0)
                else:
                    ic = InitialCondition(theta0=0.0, beta0=rng.uniform(0.15, 1.85))
                    crit = critical_coupling_boson(ic.beta0)
                    xi0 = ic.beta0
                g_lo = crit * rng.uniform(0.5, 0.98)
                g_hi = crit * rng.uniform(1.02, 1.5)
                assert _barrier_height(_potential_fn(regime, ic, g_lo, 1.0), xi0) < 0
                assert _barrier_height(_potential_fn(regime, ic, g_hi, 1.0), xi0) > 0

    def test_boson_oracle_general_theta0_smoke(self):
        # tilted spins in the boson regime: only the numeric route exists
        ic = InitialCondition(theta0=0.35, beta0=1.0)
        g_crit = numeric_critical_coupling(Regime.BOSON_DOMINATED, ic)
        assert 0.5 < g_crit < 3.0


class TestPotentialCurve:
    def test_initial_point_on_grid_and_zero(self):
        ic = InitialCondition(theta0=0.4, beta0=1.0)
        curve = potential_curve(Regime.SPIN_DOMINATED, ic, g_tilde=1.7, scale=2.0)
        xi0 = -math.cos(0.4)
        idx = np.argmin(np.abs(curve.coordinate_grid - xi0))
        assert curve.coordinate_grid[idx] == pytest.approx(xi0, abs=1e-15)
        assert abs(curve.values[idx]) < 1e-12

    def test_csv_export(self, tmp_path):
        ic = InitialCondition(theta0=0.0, beta0=1.0)
        curve = potential_curve(Regime.BOSON_DOMINATED, ic, g_tilde=1.3)
        path = tmp_path / "potential.csv"
        curve.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "xi,v"


class TestEqptEnergies:
    def test_spin_identity_at_sqrt2(self):
        v = DimensionlessView(math.sqrt(2), 10.0)
        p = ModelParams(g=1.0, delta=2.0, omega=0.2, n_spins=40)
        report = eqpt_energies(p, v)
        assert report.e0 == pytest.approx(report.e_c_spin, rel=1e-12)
        assert report.e_c_spin == pytest.approx(-p.omega * p.n_spins / 2.0, rel=1e-15)

    def test_boson_identity_at_3_quarter(self):
        v = DimensionlessView(3.0 ** 0.25, 0.1)
        p = ModelParams(g=1.0, delta=0.3, omega=3.0, n_spins=100)
        report = eqpt_energies(p, v)
        assert report.e0 == pytest.approx(report.e_c_boson, rel=1e-12)
        expect = -math.sqrt(3) * p.omega * p.n_spins / 4.0
        assert report.e_c_boson == pytest.approx(expect, rel=1e-12)

    def test_small_coupling_limit(self):
        v = DimensionlessView(1e-8, 1.0)
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=10)
        report = eqpt_energies(p, v)
        assert abs(report.e0) < 1e-12
        assert abs(report.m_x_prime) < 1e-12

    def test_m_x_prime_form(self):
        v = DimensionlessView(1.4, 1.0)
        p = ModelParams(g=1.0, delta=1.0, omega=1.0, n_spins=6)
        report = eqpt_energies(p, v)
        gt2 = 1.4**2
        assert report.m_x_prime == pytest.approx(
            gt2 / math.sqrt(1 + gt2**2) * 3.0, rel=1e-14
        )
        assert isinstance(report, EqptReport)
