"""Network model: topologies, couplings, and first-moment drift matrices.

A network is one externally driven charger mode plus ``N`` battery modes at a
common resonance frequency.  Two wirings are supported: ``cascaded``
(charger -> b_1 -> ... -> b_N nearest-neighbour chain) and ``parallel``
(star graph, charger coupled to every battery).  Each link carries a coherent
hopping amplitude ``J`` with phase ``theta`` and a cooperative dissipation
rate ``gamma`` through a shared reservoir whose collective jump operator
mixes the two link modes with unit-modulus coefficients ``p``.  Balancing
``J = gamma/2`` against a matched phase pattern makes a link unidirectional.

Mode ordering is fixed as (charger, b_1, ..., b_N) everywhere.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    NegativeRate,
    NonUnitPCoefficient,
)

logger = logging.getLogger(__name__)

_UNIT_MODULUS_TOL = 1e-12


class TopologyKind(enum.Enum):
    CASCADED = "cascaded"
    PARALLEL = "parallel"


class CouplingRegime(enum.Enum):
    NONRECIPROCAL = "nonreciprocal"
    RECIPROCAL = "reciprocal"
    MIXED = "mixed"


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    n_batteries: int

    def __post_init__(self):
        if self.n_batteries < 1:
            raise DimensionMismatch("need at least one battery mode")

    @property
    def n_modes(self) -> int:
        return self.n_batteries + 1

    @property
    def n_links(self) -> int:
        return self.n_batteries

    def links(self) -> list[tuple[int, int]]:
        """(upstream, downstream) mode-index pairs, one per link."""
        n = self.n_batteries
        if self.kind is TopologyKind.CASCADED:
            return [(i, i + 1) for i in range(n)]
        return [(0, i + 1) for i in range(n)]


@dataclass(frozen=True)
class CouplingSpec:
    """Per-link coherent and dissipative coupling parameters.

    ``amplitudes``, ``phases``, ``coop_rates`` hold one entry per link;
    ``p_coeffs`` holds one unit-modulus complex coefficient per mode
    (charger first).
    """

    amplitudes: np.ndarray
    phases: np.ndarray
    coop_rates: np.ndarray
    p_coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen_array(self.amplitudes, float))
        object.__setattr__(self, "phases", _frozen_array(self.phases, float))
        object.__setattr__(self, "coop_rates", _frozen_array(self.coop_rates, float))
        object.__setattr__(self, "p_coeffs", _frozen_array(self.p_coeffs, complex))
        n_links = len(self.amplitudes)
        if len(self.phases) != n_links or len(self.coop_rates) != n_links:
            raise DimensionMismatch("J, theta, gamma arrays must share one length")
        if np.any(self.amplitudes < 0):
            raise NegativeRate("coupling amplitudes must be >= 0")
        if np.any(self.coop_rates < 0):
            raise NegativeRate("cooperative rates must be >= 0")
        bad = np.abs(np.abs(self.p_coeffs) - 1.0) > _UNIT_MODULUS_TOL
        if np.any(bad):
            raise NonUnitPCoefficient(
                f"p coefficients must have unit modulus, got {self.p_coeffs[bad]}"
            )

    @property
    def n_links(self) -> int:
        return len(self.amplitudes)


@dataclass(frozen=True)
class EffectiveRates:
    """Total damping per mode and collective-phase factor per link."""

    damping: np.ndarray  # Lambda_m, one per mode
    link_mu: np.ndarray  # mu_i, one per link


@dataclass(frozen=True)
class NetworkSpec:
    topology: Topology
    coupling: CouplingSpec
    kappa_a: float
    kappa_b: np.ndarray  # one local rate per battery
    drive: float
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "kappa_b", _frozen_array(self.kappa_b, float))
        if self.coupling.n_links != self.topology.n_links:
            raise DimensionMismatch(
                f"{self.topology.kind.value} with N={self.topology.n_batteries} "
                f"needs {self.topology.n_links} links, got {self.coupling.n_links}"
            )
        if len(self.coupling.p_coeffs) != self.topology.n_modes:
            raise DimensionMismatch("need one p coefficient per mode")
        if len(self.kappa_b) != self.topology.n_batteries:
            raise DimensionMismatch("need one local rate per battery")
        if self.kappa_a < 0 or np.any(self.kappa_b < 0):
            raise NegativeRate("local dissipation rates must be >= 0")
        if self.drive < 0:
            raise NegativeRate("drive amplitude must be >= 0")
        if not self.omega > 0:
            raise NegativeRate("resonance frequency must be > 0")

    @property
    def n_modes(self) -> int:
        return self.topology.n_modes

    @property
    def n_batteries(self) -> int:
        return self.topology.n_batteries

    @property
    def local_rates(self) -> np.ndarray:
        """Local dissipation per mode, charger first."""
        return np.concatenate(([self.kappa_a], self.kappa_b))

    def effective_rates(self) -> EffectiveRates:
        """Mode dampings Lambda_m = kappa_m + sum of link rates weighted by |p_m|^2."""
        p = self.coupling.p_coeffs
        lam = self.local_rates.astype(float).copy()
        for (up, down), gamma in zip(self.topology.links(), self.coupling.coop_rates):
            lam[up] += gamma * abs(p[up]) ** 2
            lam[down] += gamma * abs(p[down]) ** 2
        mu = np.array(
            [np.conj(p[up]) * p[down] for up, down in self.topology.links()],
            dtype=complex,
        )
        if self.topology.kind is TopologyKind.PARALLEL and abs(p[0].imag) > 1e-14:
            # The two common phase conventions mu = p_a* p_b vs p_a p_b differ
            # here; |mu| and hence all energies agree either way.
            logger.warning(
                "parallel link phases use the conjugated-charger convention "
                "mu_i = conj(p_a) p_bi; amplitudes are convention independent"
            )
        return EffectiveRates(damping=_frozen_array(lam, float), link_mu=_frozen_array(mu, complex))

    def to_dict(self) -> dict:
        """Canonical JSON-serializable form (used for provenance hashing)."""
        return {
            "topology": self.topology.kind.value,
            "n": self.topology.n_batteries,
            "J": self.coupling.amplitudes.tolist(),
            "theta": self.coupling.phases.tolist(),
            "gamma": self.coupling.coop_rates.tolist(),
            "kappa_a": self.kappa_a,
            "kappa_b": self.kappa_b.tolist(),
            "epsilon": self.drive,
            "omega": self.omega,
            "p_coeffs": [[z.real, z.imag] for z in self.coupling.p_coeffs],
        }


def build_spec(
    kind: TopologyKind | str,
    n_batteries: int,
    amplitudes,
    phases,
    coop_rates,
    kappa_a: float,
    kappa_b,
    drive: float,
    frequency: float = 1.0,
    p_coeffs=None,
) -> NetworkSpec:
    """Assemble and validate a network; scalars broadcast over links/modes."""
    if isinstance(kind, str):
        try:
            kind = TopologyKind(kind.lower())
        except ValueError as exc:
            raise ConfigError(f"unknown topology {kind!r}") from exc
    topo = Topology(kind, int(n_batteries))
    n = topo.n_links

    def per_link(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.full(n, x[0]) if x.size == 1 else x

    if p_coeffs is None:
        p_coeffs = np.ones(topo.n_modes, dtype=complex)
    coupling = CouplingSpec(
        amplitudes=per_link(amplitudes),
        phases=per_link(phases),
        coop_rates=per_link(coop_rates),
        p_coeffs=np.asarray(p_coeffs, dtype=complex),
    )
    kb = np.atleast_1d(np.asarray(kappa_b, dtype=float))
    if kb.size == 1:
        kb = np.full(topo.n_batteries, kb[0])
    return NetworkSpec(
        topology=topo,
        coupling=coupling,
        kappa_a=float(kappa_a),
        kappa_b=kb,
        drive=float(drive),
        omega=float(frequency),
    )


def nonreciprocal_spec(
    kind: TopologyKind | str,
    n_batteries: int,
    coupling_j: float,
    kappa: float,
    drive: float,
    omega: float = 1.0,
    pattern: int = 1,
) -> NetworkSpec:
    """Uniform unidirectional network: gamma_i = 2 J with matched phases.

    ``pattern=1`` uses theta = pi/2 with all p = 1; ``pattern=2`` uses
    theta = 0 with the staggered p phases that realize the same one-way
    transport.
    """
    if isinstance(kind, str):
        kind = TopologyKind(kind.lower())
    n_modes = n_batteries + 1
    if pattern == 1:
        theta, p = math.pi / 2, np.ones(n_modes, dtype=complex)
    elif pattern == 2:
        theta = 0.0
        if kind is TopologyKind.CASCADED:
            p = np.array([1j * (-1j) ** m for m in range(n_modes)], dtype=complex)
        else:
            p = np.concatenate(([1j], np.ones(n_batteries))).astype(complex)
    else:
        raise ValueError("pattern must be 1 or 2")
    return build_spec(
        kind, n_batteries, coupling_j, theta, 2.0 * coupling_j,
        kappa, kappa, drive, omega, p_coeffs=p,
    )


def reciprocal_spec(
    kind: TopologyKind | str,
    n_batteries: int,
    coupling_j: float,
    kappa: float,
    drive: float,
    omega: float = 1.0,
) -> NetworkSpec:
    """Uniform bidirectional network: plain real hopping, no shared reservoir."""
    return build_spec(kind, n_batteries, coupling_j, 0.0, 0.0, kappa, kappa, drive, omega)


def check_nonreciprocity(spec: NetworkSpec, rel_tol: float = 1e-10) -> CouplingRegime:
    """Classify the coupling regime of every link.

    Nonreciprocal requires, on each link, J = gamma/2 together with either
    (theta = pi/2, mu = 1) or (theta = 0, mu = -i); reciprocal means no
    cooperative dissipation at all; anything else is mixed.
    """
    gam = spec.coupling.coop_rates
    if np.all(gam == 0.0):
        return CouplingRegime.RECIPROCAL
    mu = spec.effective_rates().link_mu
    amps = spec.coupling.amplitudes
    phases = spec.coupling.phases
    for j_i, th, g, m in zip(amps, phases, gam, mu):
        scale = max(abs(j_i), abs(g) / 2, 1e-300)
        if abs(j_i - g / 2) > rel_tol * scale:
            return CouplingRegime.MIXED
        pattern_a = abs(th - math.pi / 2) <= rel_tol and abs(m - 1.0) <= rel_tol
        pattern_b = abs(th) <= rel_tol and abs(m + 1j) <= rel_tol
        if not (pattern_a or pattern_b):
            return CouplingRegime.MIXED
    return CouplingRegime.NONRECIPROCAL


def drift_matrix(spec: NetworkSpec) -> tuple[np.ndarray, np.ndarray]:
    """Complex first-moment drift A and drive vector f.

    d<v>/dt = A <v> + f for v = (a, b_1, ..., b_N), with
    A_mm = -Lambda_m/2 and, for each link (up, down),
    A[up, down] = -(i J e^{i theta} + mu gamma/2),
    A[down, up] = -(i J e^{-i theta} + conj(mu) gamma/2).
    """
    rates = spec.effective_rates()
    m = spec.n_modes
    a = np.diag(-0.5 * rates.damping.astype(complex))
    cpl = spec.coupling
    for idx, (up, down) in enumerate(spec.topology.links()):
        j_i = cpl.amplitudes[idx]
        phase = np.exp(1j * cpl.phases[idx])
        g = cpl.coop_rates[idx]
        mu = rates.link_mu[idx]
        a[up, down] += -(1j * j_i * phase + 0.5 * mu * g)
        a[down, up] += -(1j * j_i / phase + 0.5 * np.conj(mu) * g)
    f = np.zeros(m, dtype=complex)
    f[0] = -1j * spec.drive
    return a, f


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "topology", "n", "J", "theta", "gamma", "kappa_a", "kappa_b",
    "epsilon", "omega", "p_coeffs",
}


def _parse_complex(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return complex(float(entry[0]), float(entry[1]))
    raise ConfigError(f"cannot read complex coefficient from {entry!r}")


def spec_from_config(doc: dict) -> NetworkSpec:
    """Build a NetworkSpec from a JSON config document.

    Expected keys: topology, n, J, theta, gamma, kappa_a, kappa_b, epsilon,
    omega, p_coeffs.  Scalar J/theta/gamma/kappa_b broadcast to all
    links/modes; p_coeffs entries are numbers or [re, im] pairs and default
    to all ones.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"topology", "n", "J", "theta", "gamma", "kappa_a", "kappa_b",
               "epsilon", "omega"} - set(doc)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    p = doc.get("p_coeffs")
    p_arr = None if p is None else [_parse_complex(z) for z in p]
    try:
        return build_spec(
            doc["topology"], doc["n"], doc["J"], doc["theta"], doc["gamma"],
            doc["kappa_a"], doc["kappa_b"], doc["epsilon"], doc["omega"],
            p_coeffs=p_arr,
        )
    except (DimensionMismatch, NegativeRate, NonUnitPCoefficient, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_spec(path) -> NetworkSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return spec_from_config(doc)
