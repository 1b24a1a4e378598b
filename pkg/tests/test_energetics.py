import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qbnet import closed_form, energetics, errors, fock, gaussian, network
from qbnet.gaussian import GaussianState, ReservoirSpec

KAPPA, EPS = 0.003, 0.01


def single_mode_state(mean_x=0.0, mean_p=0.0, cov=None):
    cov = 0.5 * np.eye(2) if cov is None else np.asarray(cov, float)
    return GaussianState(np.array([mean_x, mean_p]), cov, 0.0)


def displaced_thermal(alpha: complex, n_th: float) -> GaussianState:
    return single_mode_state(
        math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag,
        (n_th + 0.5) * np.eye(2))


class TestStoredEnergy:
    def test_ground_state_is_empty(self):
        assert energetics.stored_energy(single_mode_state(), 0) == 0.0

    def test_terminal_anchor(self):
        spec = network.nonreciprocal_spec("cascaded", 1, KAPPA / 2, KAPPA, EPS)
        ss = gaussian.steady_state(gaussian.assemble(spec, ReservoirSpec.vacuum()))
        assert energetics.stored_energy(ss, 1) == pytest.approx(
            (EPS / KAPPA) ** 2, rel=1e-10)

    def test_decoupled_thermal_occupation(self):
        spec = network.build_spec("cascaded", 1, 0.0, 0.0, 0.0, KAPPA, KAPPA, 0.0)
        ss = gaussian.steady_state(gaussian.assemble(spec, ReservoirSpec.thermal(2.0)))
        assert energetics.stored_energy(ss, 1) == pytest.approx(2.0, abs=1e-12)

    def test_omega_scales_linearly(self):
        state = displaced_thermal(1.0 + 0.5j, 0.3)
        assert energetics.stored_energy(state, 0, omega=3.0) == pytest.approx(
            3.0 * energetics.stored_energy(state, 0), rel=1e-14)


class TestErgotropy:
    def test_coherent_state_is_fully_extractable(self):
        state = displaced_thermal(1.3 - 0.4j, 0.0)
        assert energetics.ergotropy(state, 0) == pytest.approx(
            energetics.stored_energy(state, 0), rel=1e-12)

    def test_displaced_thermal_splits_cleanly(self):
        alpha, n_th = math.sqrt(2.0), 1.0
        state = displaced_thermal(alpha, n_th)
        assert energetics.symplectic_nu(state, 0) == pytest.approx(2 * n_th + 1, rel=1e-12)
        assert energetics.ergotropy(state, 0) == pytest.approx(abs(alpha) ** 2, rel=1e-12)
        assert energetics.passive_energy(state, 0) == pytest.approx(n_th, rel=1e-12)

    def test_pure_squeezed_state_is_fully_extractable(self):
        r = 0.8
        state = single_mode_state(cov=np.diag([np.exp(2 * r) / 2, np.exp(-2 * r) / 2]))
        assert energetics.ergotropy(state, 0) == pytest.approx(math.sinh(r) ** 2, rel=1e-12)
        assert energetics.passive_energy(state, 0) == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(0.0, 2.0), st.floats(0.0, 2 * math.pi), st.floats(0.0, 1.5),
           st.floats(0.0, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_decomposition_and_rotation_invariance(self, disp, angle, r, n_th):
        # squeezed thermal state, then rotate in phase space
        base = np.diag([(n_th + 0.5) * np.exp(2 * r), (n_th + 0.5) * np.exp(-2 * r)])
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        state = GaussianState(rot @ np.array([disp, 0.0]), rot @ base @ rot.T, 0.0)
        e = energetics.stored_energy(state, 0)
        w = energetics.ergotropy(state, 0)
        p = energetics.passive_energy(state, 0)
        assert e == pytest.approx(w + p, abs=1e-10 * max(1.0, e))
        assert w >= -1e-10 and p >= -1e-10
        base_state = GaussianState(np.array([disp, 0.0]), base, 0.0)
        assert w == pytest.approx(energetics.ergotropy(base_state, 0), abs=1e-12)

    def test_against_fock_ladder_oracle(self):
        # displaced thermal state built directly in a truncated number basis
        d, alpha, n_th = 60, math.sqrt(2.0), 1.0
        a = np.diag(np.sqrt(np.arange(1, d)), 1)
        disp = expm(alpha * a.conj().T - np.conj(alpha) * a)
        therm = np.diag((n_th / (n_th + 1)) ** np.arange(d) / (n_th + 1))
        rho = disp @ therm @ disp.conj().T
        spectral_value = fock.spectral_ergotropy(rho, tail_tol=1e-6)
        gauss_value = energetics.ergotropy(displaced_thermal(alpha, n_th), 0)
        assert spectral_value == pytest.approx(gauss_value, rel=1e-3)

    def test_squeezed_vacuum_against_fock_ladder_oracle(self):
        d, r = 60, 0.7
        a = np.diag(np.sqrt(np.arange(1, d)), 1)
        squeeze = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))
        vac = np.zeros((d, d)); vac[0, 0] = 1.0
        rho = squeeze @ vac @ squeeze.conj().T
        state = single_mode_state(cov=np.diag([np.exp(-2 * r) / 2, np.exp(2 * r) / 2]))
        assert fock.spectral_ergotropy(rho, tail_tol=1e-6) == pytest.approx(
            energetics.ergotropy(state, 0), rel=1e-3)


class TestEnergyReport:
    def test_report_balances(self):
        spec = network.nonreciprocal_spec("parallel", 2, 0.002, KAPPA, EPS)
        ss = gaussian.steady_state(gaussian.assemble(spec, ReservoirSpec.thermal(1.0)))
        rep = energetics.report_from_state(ss, omega=1.0)
        assert np.allclose(rep.energies, rep.ergotropies + rep.passives, atol=1e-10)
        doc = rep.to_dict()
        assert doc["engine"] == "gaussian"
        assert doc["time"] is None

    def test_imbalanced_report_rejected(self):
        with pytest.raises(ValueError):
            energetics.EnergyReport(
                energies=np.array([1.0]), ergotropies=np.array([0.2]),
                passives=np.array([0.2]), engine="x", time=0.0)


class TestThermalDegradation:
    @pytest.mark.parametrize("kind,n", [("cascaded", 1), ("cascaded", 2),
                                        ("parallel", 2)])
    def test_ergotropy_falls_while_energy_rises(self, kind, n):
        j = closed_form.optimal_coupling(kind, n, KAPPA)
        spec = network.nonreciprocal_spec(kind, n, j, KAPPA, 0.001)
        results = []
        for n_th in (0.0, 1.0, 2.0):
            ss = gaussian.steady_state(
                gaussian.assemble(spec, ReservoirSpec.thermal(n_th)))
            results.append((energetics.stored_energy(ss, n),
                            energetics.ergotropy(ss, n)))
        energies, ergos = zip(*results)
        assert energies[0] < energies[1] < energies[2]
        assert ergos[0] >= ergos[1] - 1e-12 and ergos[1] >= ergos[2] - 1e-12


class TestEnhancementFactor:
    def test_unsqueezed_reference_is_unity(self):
        spec = network.nonreciprocal_spec("cascaded", 2, 0.0024, KAPPA, 0.001)
        assert energetics.enhancement_factor(
            spec, ReservoirSpec.squeezed(0.0)) == 1.0

    @pytest.mark.parametrize("kind", ["cascaded", "parallel"])
    def test_grows_with_squeezing(self, kind):
        j = closed_form.optimal_coupling(kind, 2, KAPPA)
        spec = network.nonreciprocal_spec(kind, 2, j, KAPPA, 0.001)
        factors = [energetics.enhancement_factor(spec, ReservoirSpec.squeezed(r))
                   for r in (0.0, 0.4, 0.8)]
        assert factors[0] == 1.0
        assert factors[0] < factors[1] < factors[2]

    def test_undriven_reference_rejected(self):
        spec = network.nonreciprocal_spec("cascaded", 1, 0.0015, KAPPA, 0.0)
        with pytest.raises(errors.ZeroReference):
            energetics.enhancement_factor(spec, ReservoirSpec.squeezed(0.5))
