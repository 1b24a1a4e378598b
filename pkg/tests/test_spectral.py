import json
import math

import numpy as np
import pytest

from qbnet import closed_form, errors, gaussian, network, spectral

KAPPA, EPS = 0.003, 0.01


class TestChainSpectrum:
    @pytest.mark.parametrize("length", [2, 3, 5, 8, 12])
    def test_matches_dense_diagonalization(self, length):
        j = 0.004
        spec = spectral.chain_spectrum(length, j)
        dense = np.linalg.eigvalsh(spectral.chain_hopping(length, j))
        assert np.allclose(np.sort(spec.eigenvalues), dense, atol=1e-12)
        h0 = spectral.chain_hopping(length, j)
        for k in range(length):
            resid = h0 @ spec.eigenvectors[k] - spec.eigenvalues[k] * spec.eigenvectors[k]
            assert np.max(np.abs(resid)) < 1e-12
            assert np.linalg.norm(spec.eigenvectors[k]) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("length", range(2, 13))
    def test_spectrum_symmetric_and_zero_mode_parity(self, length):
        j = 0.004
        spec = spectral.chain_spectrum(length, j)
        sorted_e = np.sort(spec.eigenvalues)
        assert np.allclose(sorted_e, -sorted_e[::-1], atol=1e-12)
        n_batteries = length - 1
        if n_batteries % 2 == 0:  # odd chain length carries the zero mode
            assert np.min(np.abs(spec.eigenvalues)) <= 1e-12 * j
        else:
            floor = 2 * j * math.sin(math.pi / (2 * (length + 1)))
            assert np.min(np.abs(spec.eigenvalues)) >= floor - 1e-12

    def test_alternating_sign_identity(self):
        for length in range(1, 21):
            for k in range(1, length + 1):
                lhs = math.sin(math.pi * k * length / (length + 1))
                rhs = (-1) ** (k + 1) * math.sin(math.pi * k / (length + 1))
                assert lhs == pytest.approx(rhs, abs=1e-12)


class TestGreenMatrix:
    def test_single_site_inverse(self):
        g = spectral.green_matrix(np.zeros((1, 1)), KAPPA)
        assert g[0, 0] == pytest.approx(-2j / KAPPA, rel=1e-14)

    @pytest.mark.parametrize("kind,n", [("cascaded", 2), ("parallel", 4)])
    def test_resolvent_residual(self, kind, n):
        h0 = spectral.hopping_matrix(kind, n, KAPPA)
        g = spectral.green_matrix(h0, KAPPA)
        resid = g @ (-h0 + 0.5j * KAPPA * np.eye(n + 1)) - np.eye(n + 1)
        assert np.max(np.abs(resid)) < 1e-10

    def test_undamped_zero_mode_is_singular(self):
        h0 = spectral.chain_hopping(3, 0.01)  # odd length: zero eigenvalue
        with pytest.raises(errors.SingularMatrix):
            spectral.green_matrix(h0, 0.0)

    def test_response_equals_green_column(self):
        j, n = 0.002, 3
        g = spectral.green_matrix(spectral.chain_hopping(n + 1, j), KAPPA)
        b = spectral.steady_amplitudes(j, KAPPA, EPS, "cascaded", n)
        assert np.allclose(b, EPS * g[:, 0], atol=1e-14)

    def test_response_matches_moment_engine(self):
        for kind in ("cascaded", "parallel"):
            j, n = 0.0021, 3
            spec = network.reciprocal_spec(kind, n, j, KAPPA, EPS)
            ss = gaussian.steady_state(
                gaussian.assemble(spec, gaussian.ReservoirSpec.vacuum()))
            means = np.array([ss.mode_amplitude(m) for m in range(n + 1)])
            b = spectral.steady_amplitudes(j, KAPPA, EPS, kind, n)
            assert np.max(np.abs(means - b)) < 1e-8


class TestParityReport:
    @pytest.mark.parametrize("n", range(1, 12))
    def test_mode_sum_equals_direct_solve(self, n):
        j = 0.0025
        rep = spectral.parity_report(n, j, KAPPA, EPS)
        b = spectral.steady_amplitudes(j, KAPPA, EPS, "cascaded", n)
        assert rep.terminal_amplitude == pytest.approx(b[-1], abs=1e-10 * abs(b[-1]) + 1e-16)
        assert complex(np.sum(rep.mode_weights)) == pytest.approx(
            rep.terminal_amplitude, rel=1e-12)

    def test_zero_mode_dominates_two_battery_chain(self):
        j = 1.0
        for kappa in (0.01 * j, 0.003 * j):
            rep = spectral.parity_report(2, j, kappa, 1.0)
            w_zero = rep.mode_weights[np.argmin(np.abs(2 * j * np.cos(
                np.pi * np.arange(1, 4) / 4)))]
            assert abs(w_zero) >= 0.5 * abs(np.sum(rep.mode_weights))
        assert spectral.parity_report(2, j, 0.01, 1.0).has_zero_mode

    def test_three_battery_chain_interferes_destructively(self):
        rep = spectral.parity_report(3, 0.0025, KAPPA, EPS)
        assert not rep.has_zero_mode
        reals = np.real(rep.mode_weights)
        assert np.any(reals > 0) and np.any(reals < 0)
        assert abs(np.sum(rep.mode_weights)) < np.sum(np.abs(rep.mode_weights))

    def test_dimer_has_no_zero_mode(self):
        rep = spectral.parity_report(1, 0.002, KAPPA, EPS)
        assert not rep.has_zero_mode
        spec = spectral.chain_spectrum(2, 0.002)
        assert np.allclose(np.sort(spec.eigenvalues), [-0.002, 0.002], atol=1e-15)

    def test_modal_weight_scaling(self):
        j, n = 0.0025, 5
        rep = spectral.parity_report(n, j, KAPPA, EPS)
        length = n + 1
        k = np.arange(1, length + 1)
        e_k = 2 * j * np.cos(np.pi * k / (length + 1))
        numer = (2 * EPS / (length + 1)) * np.sin(np.pi * k / (length + 1)) ** 2
        expected = numer / np.sqrt(e_k**2 + KAPPA**2 / 4)
        assert np.allclose(np.abs(rep.mode_weights), expected, rtol=1e-12)

    def test_report_serializes_to_json(self):
        rep = spectral.parity_report(4, 0.002, KAPPA, EPS)
        doc = json.loads(json.dumps(rep.to_dict()))
        assert doc["has_zero_mode"] is True
        assert len(doc["mode_weights"]) == 5
        assert doc["terminal_energy"] == pytest.approx(
            abs(rep.terminal_amplitude) ** 2)


class TestParityInequality:
    def test_even_chains_beat_odd_neighbours_above_two(self):
        # the N=1 dimer at its resonant optimum is the known exception
        amp = {}
        for n in range(1, 11):
            j_op = closed_form.optimal_coupling("cascaded", n, KAPPA)
            amp[n] = abs(spectral.steady_amplitudes(j_op, KAPPA, EPS,
                                                    "cascaded", n)[-1])
        for n in (2, 4, 6, 8, 10):
            assert amp[n] > amp[n + 1 if n + 1 in amp else n - 1]
            if n > 2:
                assert amp[n] > amp[n - 1]
        assert amp[2] < amp[1]  # documented exception at the dimer
