"""Closed-form transport results for unidirectional networks.

Transient and steady per-mode energies of the cascaded chain and the
parallel star, the terminal-energy scaling laws in the battery number, the
optimal coupling strengths, and the bidirectional star's steady response.
All energies are coherent (|<mode>|^2) quantities and assume the
unidirectional parameter point J = gamma/2 with matched phases.

The cascaded transient is a Vandermonde-weighted sum of decaying
exponentials over the mode dampings Lambda_0..Lambda_n; it requires the
dampings to be pairwise distinct.  Uniform rates make interior dampings
degenerate, in which case the Gaussian moment engine is the sanctioned
evaluation path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import network
from .errors import DegenerateRates, ZeroRate

_DEGENERACY_REL_TOL = 1e-9


def _require(spec: network.NetworkSpec, kind: network.TopologyKind, what: str):
    if spec.topology.kind is not kind:
        raise ValueError(f"{what} needs a {kind.value} network")
    if network.check_nonreciprocity(spec) is not network.CouplingRegime.NONRECIPROCAL:
        raise ValueError(f"{what} holds only at the unidirectional parameter point")


@dataclass(frozen=True)
class VandermondeKernel:
    """Damping-rate alternants entering the cascaded transient.

    ``dampings`` holds Lambda_0..Lambda_n; ``prefactor`` the steady energy
    amplitude; ``alternant`` the full product of pairwise differences and
    ``alternants_without[p]`` the same product with index p struck out.
    """

    dampings: np.ndarray
    prefactor: float
    alternant: float
    alternants_without: np.ndarray

    @classmethod
    def build(cls, dampings: np.ndarray, prefactor: float) -> "VandermondeKernel":
        lam = np.asarray(dampings, dtype=float)
        n = len(lam)
        gap = _DEGENERACY_REL_TOL * float(np.max(lam)) if n else 0.0
        for m in range(n):
            for j in range(m + 1, n):
                if abs(lam[m] - lam[j]) < gap:
                    raise DegenerateRates(
                        f"dampings {m} and {j} coincide ({lam[m]:.6g} ~ {lam[j]:.6g}); "
                        "use the numerical moment engine"
                    )
        full = _alternant(lam, skip=None)
        without = np.array([_alternant(lam, skip=p) for p in range(n)])
        return cls(lam, float(prefactor), full, without)


def _alternant(lam: np.ndarray, skip: int | None) -> float:
    prod = 1.0
    n = len(lam)
    for m in range(n):
        if m == skip:
            continue
        for j in range(m + 1, n):
            if j == skip:
                continue
            prod *= lam[m] - lam[j]
    return prod


def _steady_amplitude(dampings, coop_rates, mu_abs, drive, omega) -> float:
    """4^{n+1} omega eps^2 prod(|mu| gamma)^2 / prod(Lambda^2), log-space for deep chains."""
    lam = np.asarray(dampings, dtype=float)
    n = len(lam) - 1
    if np.any(lam == 0.0):
        raise ZeroRate("every mode needs nonzero total damping")
    if drive == 0.0:
        return 0.0
    g = np.asarray(coop_rates, dtype=float) * np.asarray(mu_abs, dtype=float)
    if np.any(g == 0.0):
        return 0.0
    if n <= 8:
        num = 4.0 ** (n + 1) * omega * drive**2 * float(np.prod(g**2))
        return num / float(np.prod(lam**2))
    log_e = (
        (n + 1) * math.log(4.0)
        + math.log(omega)
        + 2.0 * math.log(drive)
        + 2.0 * float(np.sum(np.log(g)))
        - 2.0 * float(np.sum(np.log(lam)))
    )
    return math.exp(log_e)


def _cascaded_ingredients(spec: network.NetworkSpec, n: int):
    rates = spec.effective_rates()
    if not 0 <= n <= spec.n_batteries:
        raise IndexError(f"mode index {n} out of range")
    lam = rates.damping[: n + 1]
    gam = spec.coupling.coop_rates[:n]
    mu_abs = np.abs(rates.link_mu[:n])
    return lam, gam, mu_abs


def energy_cascaded_t(spec: network.NetworkSpec, n: int, t) -> np.ndarray | float:
    """Transient energy of chain mode n (0 = charger), ground-state start.

    E_n(t) = (A_n / V_n^2) [V_n - sum_p (-1)^{n+p} (prod_{m != p} Lambda_m)
    V_n^{(p)} e^{-Lambda_p t / 2}]^2; the bracket vanishes at t = 0.
    """
    _require(spec, network.TopologyKind.CASCADED, "cascaded transient")
    lam, gam, mu_abs = _cascaded_ingredients(spec, n)
    amp = _steady_amplitude(lam, gam, mu_abs, spec.drive, spec.omega)
    kernel = VandermondeKernel.build(lam, amp)
    t_arr = np.asarray(t, dtype=float)
    bracket = np.full(t_arr.shape, kernel.alternant)
    for p in range(n + 1):
        coeff = float(np.prod(np.delete(lam, p))) * kernel.alternants_without[p]
        bracket = bracket - (-1.0) ** (n + p) * coeff * np.exp(-0.5 * lam[p] * t_arr)
    value = kernel.prefactor * (bracket / kernel.alternant) ** 2
    return value if value.shape else float(value)


def energy_cascaded_ss(spec: network.NetworkSpec, n: int) -> float:
    """Steady energy of chain mode n; degenerate dampings are fine here."""
    _require(spec, network.TopologyKind.CASCADED, "cascaded steady state")
    lam, gam, mu_abs = _cascaded_ingredients(spec, n)
    return _steady_amplitude(lam, gam, mu_abs, spec.drive, spec.omega)


def _parallel_ingredients(spec: network.NetworkSpec, n: int):
    rates = spec.effective_rates()
    if not 0 <= n <= spec.n_batteries:
        raise IndexError(f"mode index {n} out of range")
    lam0 = rates.damping[0]
    if n == 0:
        return lam0, None, None, None
    return lam0, rates.damping[n], spec.coupling.coop_rates[n - 1], abs(rates.link_mu[n - 1])


def energy_parallel_t(spec: network.NetworkSpec, n: int, t) -> np.ndarray | float:
    """Transient energy of star mode n: the two-exponential charging law."""
    _require(spec, network.TopologyKind.PARALLEL, "parallel transient")
    lam0, lam_n, gam, mu_abs = _parallel_ingredients(spec, n)
    t_arr = np.asarray(t, dtype=float)
    if lam0 == 0.0:
        raise ZeroRate("charger damping vanishes")
    if n == 0:
        value = (4.0 * spec.omega * spec.drive**2 / lam0**2) * (
            1.0 - np.exp(-0.5 * lam0 * t_arr)
        ) ** 2
        return value if value.shape else float(value)
    if lam_n == 0.0:
        raise ZeroRate("battery damping vanishes")
    if abs(lam0 - lam_n) < _DEGENERACY_REL_TOL * max(lam0, lam_n):
        raise DegenerateRates(
            "charger and battery dampings coincide; use the numerical moment engine"
        )
    amp = 16.0 * spec.omega * spec.drive**2 * mu_abs**2 * gam**2 / (
        lam0**2 * lam_n**2 * (lam0 - lam_n) ** 2
    )
    bracket = (lam0 - lam_n) - (
        lam0 * np.exp(-0.5 * lam_n * t_arr) - lam_n * np.exp(-0.5 * lam0 * t_arr)
    )
    value = amp * bracket**2
    return value if value.shape else float(value)


def energy_parallel_ss(spec: network.NetworkSpec, n: int) -> float:
    """Steady energy of star mode n: 16 w eps^2 |mu|^2 gamma^2 / (L0^2 Ln^2)."""
    _require(spec, network.TopologyKind.PARALLEL, "parallel steady state")
    lam0, lam_n, gam, mu_abs = _parallel_ingredients(spec, n)
    if lam0 == 0.0 or (n > 0 and lam_n == 0.0):
        raise ZeroRate("every mode needs nonzero total damping")
    if n == 0:
        return 4.0 * spec.omega * spec.drive**2 / lam0**2
    return 16.0 * spec.omega * spec.drive**2 * mu_abs**2 * gam**2 / (lam0**2 * lam_n**2)


def terminal_scaling_cascaded(n: int, gamma: float, kappa: float,
                              drive: float, omega: float = 1.0) -> float:
    """Uniform-rate terminal energy of the chain:
    4^{N+1} w eps^2 gamma^{2N} / [(gamma+kappa)^4 (2 gamma+kappa)^{2N-2}]."""
    if gamma <= 0 or kappa <= 0:
        raise ZeroRate("scaling law needs gamma, kappa > 0")
    if drive == 0:
        return 0.0
    if n <= 8:
        return (
            4.0 ** (n + 1) * omega * drive**2 * gamma ** (2 * n)
            / ((gamma + kappa) ** 4 * (2 * gamma + kappa) ** (2 * n - 2))
        )
    log_e = (
        (n + 1) * math.log(4.0) + math.log(omega) + 2 * math.log(drive)
        + 2 * n * math.log(gamma) - 4 * math.log(gamma + kappa)
        - (2 * n - 2) * math.log(2 * gamma + kappa)
    )
    return math.exp(log_e)


def terminal_scaling_parallel(n: int, gamma: float, kappa: float,
                              drive: float, omega: float = 1.0) -> float:
    """Uniform-rate per-battery energy of the star:
    16 w eps^2 gamma^2 / [(N gamma + kappa)^2 (gamma + kappa)^2]."""
    if gamma <= 0 or kappa <= 0:
        raise ZeroRate("scaling law needs gamma, kappa > 0")
    return (
        16.0 * omega * drive**2 * gamma**2
        / ((n * gamma + kappa) ** 2 * (gamma + kappa) ** 2)
    )


def optimal_coupling(kind: network.TopologyKind | str, n: int, kappa: float) -> float:
    """Coupling maximizing steady terminal energy (with gamma = 2J).

    Cascaded: (kappa/8)(N + sqrt(N^2 + 8N)), growing ~N/4 for deep chains.
    Parallel: kappa / (2 sqrt(N)), shrinking with the fan-out.
    """
    if isinstance(kind, str):
        kind = network.TopologyKind(kind.lower())
    if n < 1:
        raise ValueError("need at least one battery")
    if kappa <= 0:
        raise ZeroRate("optimal coupling needs kappa > 0")
    if kind is network.TopologyKind.CASCADED:
        return (kappa / 8.0) * (n + math.sqrt(n * n + 8.0 * n))
    return kappa / (2.0 * math.sqrt(n))


def reciprocal_parallel_ss(n: int, coupling_j: float, kappa: float,
                           drive: float, omega: float = 1.0) -> float:
    """Per-battery steady energy of the bidirectional star:
    16 J^2 w eps^2 / (4 N J^2 + kappa^2)^2.

    Matches the direct linear response solve; no parity dependence.
    """
    if coupling_j <= 0 or kappa <= 0:
        raise ZeroRate("reciprocal star law needs J, kappa > 0")
    gamma = 2.0 * coupling_j
    return 4.0 * gamma**2 * omega * drive**2 / (4.0 * n * coupling_j**2 + kappa**2) ** 2
