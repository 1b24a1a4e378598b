"""Work-oriented figures of merit for Gaussian states.

Stored energy is omega <a^dag a> per mode.  Ergotropy — the maximum work
extractable by unitaries — is exact for single-mode Gaussian states because
their spectrum is a thermal ladder: the passive remainder is the nu-thermal
state of the mode's symplectic eigenvalue nu (nu = 1 pure, nu = 2 nbar + 1
thermal), leaving omega (nu - 1)/2 locked as passive energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gaussian, network
from .errors import ZeroReference


def stored_energy(state: gaussian.GaussianState, mode: int, omega: float = 1.0) -> float:
    """omega <a^dag a> of one mode (coherent part plus fluctuation occupation)."""
    return omega * state.occupation(mode)


def symplectic_nu(state: gaussian.GaussianState, mode: int) -> float:
    """Symplectic eigenvalue of the reduced 2x2 covariance, nu >= 1."""
    det = float(np.linalg.det(state.mode_cov(mode)))
    return max(2.0 * math.sqrt(max(det, 0.0)), 1.0)


def passive_energy(state: gaussian.GaussianState, mode: int, omega: float = 1.0) -> float:
    """Energy no unitary can extract: omega (nu - 1)/2."""
    return omega * 0.5 * (symplectic_nu(state, mode) - 1.0)


def ergotropy(state: gaussian.GaussianState, mode: int, omega: float = 1.0) -> float:
    """Extractable work omega,(<n> - (nu-1)/2); exact for Gaussian states."""
    return stored_energy(state, mode, omega) - passive_energy(state, mode, omega)


@dataclass(frozen=True)
class EnergyReport:
    """Per-mode energy bookkeeping with engine provenance."""

    energies: np.ndarray
    ergotropies: np.ndarray
    passives: np.ndarray
    engine: str
    time: float  # math.inf marks the steady state
    omega: float = 1.0

    def __post_init__(self):
        slack = 1e-10 * max(1.0, float(np.max(np.abs(self.energies))))
        gap = self.energies - (self.ergotropies + self.passives)
        if np.max(np.abs(gap)) > slack:
            raise ValueError("energy must decompose as ergotropy + passive")

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "time": None if math.isinf(self.time) else self.time,
            "omega": self.omega,
            "energies": self.energies.tolist(),
            "ergotropies": self.ergotropies.tolist(),
            "passives": self.passives.tolist(),
        }


def report_from_state(state: gaussian.GaussianState, omega: float = 1.0,
                      engine: str = "gaussian") -> EnergyReport:
    n = state.n_modes
    energies = np.array([stored_energy(state, m, omega) for m in range(n)])
    passives = np.array([passive_energy(state, m, omega) for m in range(n)])
    return EnergyReport(
        energies=energies,
        ergotropies=energies - passives,
        passives=passives,
        engine=engine,
        time=state.time,
        omega=omega,
    )


def enhancement_factor(spec: network.NetworkSpec,
                       bath_sq: gaussian.ReservoirSpec,
                       bath_ref: gaussian.ReservoirSpec | None = None,
                       mode: int = -1) -> float:
    """Steady ergotropy ratio between a squeezed and a reference reservoir."""
    if bath_ref is None:
        bath_ref = gaussian.ReservoirSpec.vacuum()
    if mode < 0:
        mode = spec.n_modes + mode
    ref_state = gaussian.steady_state(gaussian.assemble(spec, bath_ref))
    ref = ergotropy(ref_state, mode, spec.omega)
    if ref <= 1e-300:
        raise ZeroReference("reference ergotropy vanishes (undriven network?)")
    sq_state = gaussian.steady_state(gaussian.assemble(spec, bath_sq))
    return ergotropy(sq_state, mode, spec.omega) / ref
