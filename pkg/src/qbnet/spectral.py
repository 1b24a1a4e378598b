"""Tight-binding response of the bidirectional network.

For reciprocal coupling the steady first moments solve
(-H_0 + i kappa/2) b = eps e_1 with H_0 the real hopping matrix (chain for
cascaded wiring, star for parallel).  Expanding the resolvent in the chain's
sine eigenmodes yields an alternating-sign modal sum for the terminal
amplitude, which is dominated by a zero-energy mode exactly when the chain
holds an even number of batteries; odd chains interfere destructively.
Site 0 is the charger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix
from .network import TopologyKind

_ZERO_TOL = 1e-12


def chain_hopping(n_modes: int, coupling_j: float) -> np.ndarray:
    h = np.zeros((n_modes, n_modes))
    for i in range(n_modes - 1):
        h[i, i + 1] = h[i + 1, i] = coupling_j
    return h


def star_hopping(n_batteries: int, coupling_j: float) -> np.ndarray:
    h = np.zeros((n_batteries + 1, n_batteries + 1))
    h[0, 1:] = coupling_j
    h[1:, 0] = coupling_j
    return h


def hopping_matrix(kind: TopologyKind | str, n_batteries: int, coupling_j: float) -> np.ndarray:
    if isinstance(kind, str):
        kind = TopologyKind(kind.lower())
    if kind is TopologyKind.CASCADED:
        return chain_hopping(n_batteries + 1, coupling_j)
    return star_hopping(n_batteries, coupling_j)


@dataclass(frozen=True)
class ChainSpectrum:
    """Open-chain eigenmodes: E_k = 2J cos(pi k/(L+1)), sine wavefunctions.

    ``eigenvectors[k-1, n]`` is psi_k(n) = sqrt(2/(L+1)) sin(pi k (n+1)/(L+1))
    for k = 1..L and site n = 0..L-1 (site 0 is the charger).
    """

    n_modes: int
    coupling_j: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def has_zero_mode(self) -> bool:
        return bool(np.min(np.abs(self.eigenvalues)) <= _ZERO_TOL * max(self.coupling_j, 1.0))


def chain_spectrum(n_modes: int, coupling_j: float) -> ChainSpectrum:
    length = n_modes
    k = np.arange(1, length + 1)
    evals = 2.0 * coupling_j * np.cos(np.pi * k / (length + 1))
    sites = np.arange(length)
    evecs = np.sqrt(2.0 / (length + 1)) * np.sin(
        np.pi * np.outer(k, sites + 1) / (length + 1)
    )
    return ChainSpectrum(length, coupling_j, evals, evecs)


def green_matrix(h0: np.ndarray, kappa: float, coupling_j: float | None = None) -> np.ndarray:
    """Resolvent G = (-H_0 + i kappa/2)^(-1) of the damped hopping network."""
    h0 = np.asarray(h0, dtype=float)
    if kappa <= 0:
        evals = np.linalg.eigvalsh(h0)
        scale = max(float(np.max(np.abs(evals))), 1.0)
        if np.min(np.abs(evals)) <= _ZERO_TOL * scale:
            raise SingularMatrix("undamped network with a zero eigenvalue")
    m = -h0.astype(complex) + 0.5j * kappa * np.eye(h0.shape[0])
    try:
        return np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded above
        raise SingularMatrix(str(exc)) from exc


def steady_amplitudes(coupling_j: float, kappa: float, drive: float,
                      kind: TopologyKind | str, n_batteries: int) -> np.ndarray:
    """Steady first moments b of the driven reciprocal network.

    Solves (-H_0 + i kappa/2) b = drive * e_charger; entry n is the complex
    amplitude of mode n, so the stored energy of mode n is omega |b_n|^2.
    """
    h0 = hopping_matrix(kind, n_batteries, coupling_j)
    m = -h0.astype(complex) + 0.5j * kappa * np.eye(h0.shape[0])
    rhs = np.zeros(h0.shape[0], dtype=complex)
    rhs[0] = drive
    try:
        sol = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    if kappa <= 0 and not np.all(np.isfinite(sol)):
        raise SingularMatrix("undamped response diverges")
    return sol


@dataclass(frozen=True)
class ParityReport:
    """Eigenmode decomposition of the chain's terminal steady amplitude."""

    n_batteries: int
    coupling_j: float
    kappa: float
    drive: float
    has_zero_mode: bool
    mode_weights: np.ndarray
    terminal_amplitude: complex

    def to_dict(self) -> dict:
        return {
            "n_batteries": self.n_batteries,
            "coupling_j": self.coupling_j,
            "kappa": self.kappa,
            "drive": self.drive,
            "has_zero_mode": self.has_zero_mode,
            "mode_weights": [[w.real, w.imag] for w in self.mode_weights],
            "terminal_amplitude": [self.terminal_amplitude.real,
                                   self.terminal_amplitude.imag],
            "terminal_energy": abs(self.terminal_amplitude) ** 2,
        }


def parity_report(n_batteries: int, coupling_j: float, kappa: float,
                  drive: float = 1.0) -> ParityReport:
    """Alternating-sign modal weights of the terminal chain amplitude.

    weight_k = (2 eps/(L+1)) (-1)^{k+1} sin^2(pi k/(L+1)) / (-E_k + i kappa/2);
    the weights sum to the terminal amplitude of the direct linear solve.  A
    zero-energy mode exists iff the battery count is even, and it then
    carries the dominant weight for kappa << J.
    """
    length = n_batteries + 1
    spec = chain_spectrum(length, coupling_j)
    k = np.arange(1, length + 1)
    signs = (-1.0) ** (k + 1)
    sin2 = np.sin(np.pi * k / (length + 1)) ** 2
    weights = (2.0 * drive / (length + 1)) * signs * sin2 / (
        -spec.eigenvalues + 0.5j * kappa
    )
    terminal = complex(np.sum(weights))
    return ParityReport(
        n_batteries=n_batteries,
        coupling_j=coupling_j,
        kappa=kappa,
        drive=drive,
        has_zero_mode=(n_batteries % 2 == 0),
        mode_weights=weights,
        terminal_amplitude=terminal,
    )
