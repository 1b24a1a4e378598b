"""Configuration-driven experiment runner.

Sweeps one axis (coupling, battery count, time, bath occupation, or
squeezing) over a grid, evaluates the requested observables with one or
more engines, and emits deterministic CSV rows plus a JSON metadata record
with full parameter provenance.  Engine failures on individual grid points
are captured in an error column instead of aborting the sweep.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy

from . import closed_form, energetics, gaussian, network, spectral, fock
from .errors import PlanError, QbnetError

ENGINE_VERSION = "qbnet-0.1.0"


class SweepAxis(enum.Enum):
    COUPLING_J = "J"
    BATTERY_N = "N"
    TIME = "t"
    THERMAL_N = "n_th"
    SQUEEZE_R = "r"


class Observable(enum.Enum):
    ENERGY = "energy"
    ERGOTROPY = "ergotropy"
    RELAX_TIME = "relax_time"
    PARITY = "parity"


class Engine(enum.Enum):
    CLOSED_FORM = "closed-form"
    GAUSSIAN = "gaussian"
    SPECTRAL = "spectral"
    FOCK = "fock"


def spec_hash(spec: network.NetworkSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SweepPlan:
    base: network.NetworkSpec
    bath: gaussian.ReservoirSpec
    axis: SweepAxis
    grid: np.ndarray
    observables: tuple[Observable, ...]
    engines: tuple[Engine, ...]
    fock_levels: int = 8

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "engines", tuple(self.engines))
        if grid.size == 0:
            raise PlanError("empty sweep grid")
        if grid.size > 1 and not (np.all(np.diff(grid) > 0) or np.all(np.diff(grid) < 0)):
            raise PlanError("sweep grid must be strictly monotone")
        if not self.observables:
            raise PlanError("no observables requested")
        if not self.engines:
            raise PlanError("no engines requested")
        self._check_engine_support()

    def _check_engine_support(self):
        regime = network.check_nonreciprocity(self.base)
        for eng in self.engines:
            if eng is Engine.CLOSED_FORM:
                if regime is not network.CouplingRegime.NONRECIPROCAL:
                    raise PlanError(
                        "closed-form engine covers only unidirectional networks; "
                        "use gaussian or spectral for reciprocal ones"
                    )
            if eng is Engine.SPECTRAL:
                if regime is not network.CouplingRegime.RECIPROCAL:
                    raise PlanError("spectral engine covers only reciprocal networks")
                if self.axis is SweepAxis.TIME:
                    raise PlanError("spectral engine has no transient dynamics")
        if Observable.RELAX_TIME in self.observables and Engine.GAUSSIAN not in self.engines:
            raise PlanError("relaxation times come from the gaussian engine")
        if Observable.PARITY in self.observables:
            if Engine.SPECTRAL not in self.engines:
                raise PlanError("parity reports come from the spectral engine")
            if self.base.topology.kind is not network.TopologyKind.CASCADED:
                raise PlanError("parity analysis applies to chains")


def _spec_at(plan: SweepPlan, value: float) -> network.NetworkSpec:
    """Materialize the spec for one grid point of the swept axis."""
    base = plan.base
    if plan.axis is SweepAxis.COUPLING_J:
        cpl = base.coupling
        old = cpl.amplitudes
        scale = np.where(old > 0, value / np.where(old > 0, old, 1.0), 0.0)
        new_j = np.full_like(old, value)
        new_g = np.where(old > 0, cpl.coop_rates * scale, cpl.coop_rates)
        if np.all(cpl.coop_rates == 0):
            new_g = cpl.coop_rates
        coupling = network.CouplingSpec(new_j, cpl.phases, new_g, cpl.p_coeffs)
        return network.NetworkSpec(base.topology, coupling, base.kappa_a,
                                   base.kappa_b, base.drive, base.omega)
    if plan.axis is SweepAxis.BATTERY_N:
        n = int(round(value))
        cpl = base.coupling
        uniform = (len(set(cpl.amplitudes)) == 1 and len(set(cpl.phases)) == 1
                   and len(set(cpl.coop_rates)) == 1 and len(set(base.kappa_b)) == 1)
        if not uniform:
            raise PlanError("battery-count sweeps need uniform link parameters")
        p = cpl.p_coeffs
        p_new = np.concatenate((p[:1], np.full(n, p[1] if len(p) > 1 else 1.0)))
        return network.build_spec(
            base.topology.kind, n, cpl.amplitudes[0], cpl.phases[0],
            cpl.coop_rates[0], base.kappa_a, base.kappa_b[0], base.drive,
            base.omega, p_coeffs=p_new,
        )
    return base


def _bath_at(plan: SweepPlan, value: float) -> gaussian.ReservoirSpec:
    if plan.axis is SweepAxis.THERMAL_N:
        return gaussian.ReservoirSpec.thermal(value)
    if plan.axis is SweepAxis.SQUEEZE_R:
        return gaussian.ReservoirSpec.squeezed(value, plan.bath.theta_r)
    return plan.bath


def _closed_form_energies(spec: network.NetworkSpec, t: float | None) -> np.ndarray:
    fn_t = (closed_form.energy_cascaded_t
            if spec.topology.kind is network.TopologyKind.CASCADED
            else closed_form.energy_parallel_t)
    fn_ss = (closed_form.energy_cascaded_ss
             if spec.topology.kind is network.TopologyKind.CASCADED
             else closed_form.energy_parallel_ss)
    if t is None:
        return np.array([fn_ss(spec, n) for n in range(spec.n_modes)])
    return np.array([float(fn_t(spec, n, t)) for n in range(spec.n_modes)])


def _gaussian_report(spec, bath, t: float | None) -> energetics.EnergyReport:
    sys = gaussian.assemble(spec, bath)
    if t is None:
        state = gaussian.steady_state(sys)
    else:
        state = gaussian.evolve(sys, gaussian.GaussianState.ground(spec.n_modes), [t])[-1]
    return energetics.report_from_state(state, spec.omega, engine="gaussian")


def _fock_report(spec, bath, t: float | None, levels: int) -> energetics.EnergyReport:
    sim = fock.FockSimulator(spec, bath, fock.FockConfig(levels=levels))
    if t is None:
        state = sim.steady_state()
    else:
        state = sim.evolve([t])[-1]
    energies = sim.occupations(state.data) * spec.omega
    ergos = np.array([
        fock.spectral_ergotropy(sim.reduced(state.data, m), spec.omega)
        for m in range(spec.n_modes)
    ])
    return energetics.EnergyReport(
        energies=energies, ergotropies=ergos, passives=energies - ergos,
        engine="fock", time=math.inf if t is None else t, omega=spec.omega,
    )


def _rows_for_point(plan: SweepPlan, index: int, value: float) -> list[dict]:
    axis = plan.axis.value
    rows: list[dict] = []
    try:
        spec = _spec_at(plan, value)
        bath = _bath_at(plan, value)
    except QbnetError as exc:
        return [{
            "index": index, "axis": axis, "value": value, "engine": "-",
            "observable": "-", "mode": -1, "result": math.nan, "error": str(exc),
        }]
    t_point = value if plan.axis is SweepAxis.TIME else None

    def emit(engine: Engine, observable: Observable, mode: int, result: float,
             error: str = ""):
        rows.append({
            "index": index, "axis": axis, "value": value,
            "engine": engine.value, "observable": observable.value,
            "mode": mode, "result": result, "error": error,
        })

    for eng in plan.engines:
        for obs in plan.observables:
            try:
                if obs in (Observable.ENERGY, Observable.ERGOTROPY):
                    if eng is Engine.CLOSED_FORM:
                        if obs is Observable.ERGOTROPY:
                            continue  # closed forms track coherent energy only
                        vals = _closed_form_energies(spec, t_point)
                        for m, v in enumerate(vals):
                            emit(eng, obs, m, float(v))
                    elif eng is Engine.GAUSSIAN:
                        rep = _gaussian_report(spec, bath, t_point)
                        vals = rep.energies if obs is Observable.ENERGY else rep.ergotropies
                        for m, v in enumerate(vals):
                            emit(eng, obs, m, float(v))
                    elif eng is Engine.SPECTRAL:
                        if obs is Observable.ERGOTROPY:
                            continue
                        amps = spectral.steady_amplitudes(
                            float(spec.coupling.amplitudes[0]), spec.kappa_a,
                            spec.drive, spec.topology.kind, spec.n_batteries)
                        for m, b in enumerate(amps):
                            emit(eng, obs, m, spec.omega * abs(b) ** 2)
                    elif eng is Engine.FOCK:
                        rep = _fock_report(spec, bath, t_point, plan.fock_levels)
                        vals = rep.energies if obs is Observable.ENERGY else rep.ergotropies
                        for m, v in enumerate(vals):
                            emit(eng, obs, m, float(v))
                elif obs is Observable.RELAX_TIME and eng is Engine.GAUSSIAN:
                    sys = gaussian.assemble(spec, bath)
                    emit(eng, obs, spec.n_modes - 1, gaussian.relaxation_time(sys))
                elif obs is Observable.PARITY and eng is Engine.SPECTRAL:
                    rep = spectral.parity_report(
                        spec.n_batteries, float(spec.coupling.amplitudes[0]),
                        spec.kappa_a, spec.drive)
                    emit(eng, obs, spec.n_batteries,
                         abs(rep.terminal_amplitude) ** 2 * spec.omega)
            except QbnetError as exc:
                emit(eng, obs, -1, math.nan, str(exc))
    return rows


@dataclass(frozen=True)
class SweepResult:
    plan: SweepPlan
    rows: list[dict]

    _COLUMNS = ("index", "axis", "value", "engine", "observable", "mode",
                "result", "error")

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self._COLUMNS)
            for row in self.rows:
                writer.writerow([_fmt(row[c]) for c in self._COLUMNS])

    def metadata(self) -> dict:
        return {
            "spec_hash": spec_hash(self.plan.base),
            "spec": self.plan.base.to_dict(),
            "bath": self.plan.bath.label(),
            "axis": self.plan.axis.value,
            "grid": self.plan.grid.tolist(),
            "observables": [o.value for o in self.plan.observables],
            "engines": [e.value for e in self.plan.engines],
            "versions": {
                "engine": ENGINE_VERSION,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
        }

    def to_meta_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.metadata(), fh, sort_keys=True, indent=2)
            fh.write("\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def run(plan: SweepPlan, workers: int = 1) -> SweepResult:
    """Evaluate the plan; rows are ordered by grid index regardless of workers."""
    points = list(enumerate(plan.grid))
    if workers <= 1:
        chunks = [_rows_for_point(plan, i, v) for i, v in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda iv: _rows_for_point(plan, *iv), points))
    rows: list[dict] = []
    for chunk in chunks:
        rows.extend(chunk)
    return SweepResult(plan=plan, rows=rows)


# ---------------------------------------------------------------------------
# trajectory / steady-state exports
# ---------------------------------------------------------------------------


def write_trajectory_csv(path, spec: network.NetworkSpec, times,
                         reports: list[energetics.EnergyReport]):
    header = ["t", "E_charger"] + [f"E_b{i}" for i in range(1, spec.n_modes)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, rep in zip(times, reports):
            writer.writerow([_fmt(float(t))] + [_fmt(float(e)) for e in rep.energies])


def write_steady_json(path, spec: network.NetworkSpec,
                      bath: gaussian.ReservoirSpec,
                      report: energetics.EnergyReport):
    doc = {
        "spec_hash": spec_hash(spec),
        "bath": bath.label(),
        "engine": report.engine,
        "energies": report.energies.tolist(),
        "ergotropies": report.ergotropies.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
