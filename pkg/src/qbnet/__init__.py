"""Energy transport, steady-state storage, and ergotropy in driven quantum
battery networks: a charger mode feeding N battery modes through reciprocal
or engineered unidirectional couplings."""

__version__ = "0.1.0"

from .network import (
    CouplingRegime,
    CouplingSpec,
    NetworkSpec,
    Topology,
    TopologyKind,
    build_spec,
    check_nonreciprocity,
    drift_matrix,
    nonreciprocal_spec,
    reciprocal_spec,
    spec_from_config,
)
from .gaussian import (
    BathKind,
    GaussianState,
    QuadratureSystem,
    ReservoirSpec,
    assemble,
    evolve,
    relaxation_time,
    steady_state,
)
from .closed_form import (
    energy_cascaded_ss,
    energy_cascaded_t,
    energy_parallel_ss,
    energy_parallel_t,
    optimal_coupling,
    reciprocal_parallel_ss,
    terminal_scaling_cascaded,
    terminal_scaling_parallel,
)
from .spectral import chain_spectrum, green_matrix, parity_report, steady_amplitudes
from .energetics import EnergyReport, enhancement_factor, ergotropy, stored_energy
from .fock import DensityMatrix, FockConfig, FockSimulator, lindblad_rhs, spectral_ergotropy

__all__ = [name for name in dir() if not name.startswith("_")]
