"""Exact Gaussian engine for the network master equation.

Everything is propagated in the real quadrature vector
r = (x_0, p_0, x_1, p_1, ...) with x = (a + a^dag)/sqrt(2),
p = -i(a - a^dag)/sqrt(2), vacuum covariance I/2 and [x, p] = i.  The drift
is the real image of the complex first-moment matrix; the bath enters only
through the diffusion matrix, so first moments are identical for vacuum,
thermal, and squeezed reservoirs.

The dynamics is linear and time invariant, so time propagation uses exact
matrix exponentials per grid interval and steady states come from direct
linear / Lyapunov solves.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from . import network
from .errors import NegativeRate, NotConverged, SingularDrift, UnstableSystem

_SQRT2 = math.sqrt(2.0)


class BathKind(enum.Enum):
    VACUUM = "vacuum"
    THERMAL = "thermal"
    SQUEEZED = "squeezed"


@dataclass(frozen=True)
class ReservoirSpec:
    """Shared reservoir statistics: vacuum, thermal(n_th), or squeezed(r, theta_r).

    Thermal(0) and squeezed(0, .) normalize to the vacuum representative.
    """

    kind: BathKind = BathKind.VACUUM
    n_th: float = 0.0
    r: float = 0.0
    theta_r: float = 0.0

    def __post_init__(self):
        if self.n_th < 0:
            raise NegativeRate("thermal occupation must be >= 0")
        if self.r < 0:
            raise NegativeRate("squeezing strength must be >= 0")

    @classmethod
    def vacuum(cls) -> "ReservoirSpec":
        return cls(BathKind.VACUUM)

    @classmethod
    def thermal(cls, n_th: float) -> "ReservoirSpec":
        if n_th == 0:
            return cls.vacuum()
        return cls(BathKind.THERMAL, n_th=float(n_th))

    @classmethod
    def squeezed(cls, r: float, theta_r: float = 0.0) -> "ReservoirSpec":
        if r == 0:
            return cls.vacuum()
        return cls(BathKind.SQUEEZED, r=float(r), theta_r=float(theta_r))

    @property
    def mean_photons(self) -> float:
        """Effective bath occupation weighting the loss/gain channels."""
        if self.kind is BathKind.THERMAL:
            return self.n_th
        if self.kind is BathKind.SQUEEZED:
            return math.sinh(self.r) ** 2
        return 0.0

    @property
    def two_photon(self) -> complex:
        """Anomalous bath correlation sinh(r) cosh(r) e^{-i theta_r}."""
        if self.kind is BathKind.SQUEEZED:
            return math.sinh(self.r) * math.cosh(self.r) * np.exp(-1j * self.theta_r)
        return 0.0 + 0.0j

    def label(self) -> str:
        if self.kind is BathKind.THERMAL:
            return f"thermal:{self.n_th:g}"
        if self.kind is BathKind.SQUEEZED:
            return f"squeezed:{self.r:g}:{self.theta_r:g}"
        return "vacuum"


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal [[0, 1], [-1, 0]] per mode in (x, p) interleaved order."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for m in range(n_modes):
        omega[2 * m, 2 * m + 1] = 1.0
        omega[2 * m + 1, 2 * m] = -1.0
    return omega


@dataclass(frozen=True)
class QuadratureSystem:
    """Real drift/diffusion/drive triple for d m/dt = A m + f, dS/dt = AS + SA^T + D."""

    drift: np.ndarray
    diffusion: np.ndarray
    drive: np.ndarray
    omega: float
    n_modes: int


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray
    time: float

    @classmethod
    def ground(cls, n_modes: int) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes), 0.0)

    @property
    def n_modes(self) -> int:
        return len(self.mean) // 2

    def mode_amplitude(self, mode: int) -> complex:
        """Complex first moment <a_mode>."""
        return (self.mean[2 * mode] + 1j * self.mean[2 * mode + 1]) / _SQRT2

    def mode_cov(self, mode: int) -> np.ndarray:
        s = slice(2 * mode, 2 * mode + 2)
        return self.cov[s, s]

    def occupation(self, mode: int) -> float:
        """<a^dag a> from the vacuum-1/2 convention."""
        blk = self.mode_cov(mode)
        fluct = 0.5 * (blk[0, 0] + blk[1, 1] - 1.0)
        coherent = 0.5 * (self.mean[2 * mode] ** 2 + self.mean[2 * mode + 1] ** 2)
        return fluct + coherent

    def occupations(self) -> np.ndarray:
        return np.array([self.occupation(m) for m in range(self.n_modes)])

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Symplectic spectrum in the vacuum = 1/2 normalization."""
        omega = symplectic_form(self.n_modes)
        vals = np.linalg.eigvals(1j * omega @ self.cov)
        return np.sort(np.abs(vals))[::2]

    def is_physical(self, tol: float = 1e-9) -> bool:
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-12 * max(1.0, np.max(np.abs(self.cov))):
            return False
        return bool(np.min(self.symplectic_eigenvalues()) >= 0.5 - tol)


def quadrature_image(a_complex: np.ndarray) -> np.ndarray:
    """Real 2Mx2M image of a complex MxM mode matrix (interleaved x,p)."""
    m = a_complex.shape[0]
    out = np.zeros((2 * m, 2 * m))
    re, im = a_complex.real, a_complex.imag
    out[0::2, 0::2] = re
    out[1::2, 1::2] = re
    out[0::2, 1::2] = -im
    out[1::2, 0::2] = im
    return out


def quadrature_drive(f_complex: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * len(f_complex))
    out[0::2] = _SQRT2 * f_complex.real
    out[1::2] = _SQRT2 * f_complex.imag
    return out


def _lowering_vector(coeffs: dict[int, complex], n_modes: int) -> np.ndarray:
    """Quadrature row of a jump operator sum_m u_m a_m."""
    g = np.zeros(2 * n_modes, dtype=complex)
    for m, u in coeffs.items():
        g[2 * m] += u / _SQRT2
        g[2 * m + 1] += 1j * u / _SQRT2
    return g


def _base_loss_channels(spec: network.NetworkSpec) -> list[dict[int, complex]]:
    """Lowering-coefficient maps of every dissipation channel, rates folded in.

    Local channels sqrt(kappa_m) a_m plus one collective channel
    sqrt(gamma_i) (p_up a_up + p_down a_down) per link.
    """
    chans: list[dict[int, complex]] = []
    for m, kap in enumerate(spec.local_rates):
        if kap > 0:
            chans.append({m: math.sqrt(kap)})
    p = spec.coupling.p_coeffs
    for (up, down), gamma in zip(spec.topology.links(), spec.coupling.coop_rates):
        if gamma > 0:
            root = math.sqrt(gamma)
            chans.append({up: root * p[up], down: root * p[down]})
    return chans


def assemble(spec: network.NetworkSpec, bath: ReservoirSpec) -> QuadratureSystem:
    """Quadrature drift/diffusion/drive for a network in a given reservoir.

    The drift is bath independent.  The diffusion collects
    Omega Re(C^H C) Omega^T over all loss channels (weighted by nbar+1) and
    gain channels (weighted by nbar, nbar = n_th or sinh^2 r), plus the
    anomalous two-photon blocks -Q (Og)(Og)^T - Q* (conj) for squeezed baths.
    """
    m = spec.n_modes
    a_c, f_c = network.drift_matrix(spec)
    drift = quadrature_image(a_c)
    drive = quadrature_drive(f_c)
    omega_s = symplectic_form(m)

    base = _base_loss_channels(spec)
    nbar = bath.mean_photons
    rows = []
    for coeffs in base:
        g = _lowering_vector(coeffs, m)
        rows.append(math.sqrt(nbar + 1.0) * g)
        if nbar > 0:
            # gain channel: the conjugate (raising) partner of the same operator
            rows.append(math.sqrt(nbar) * np.conj(g))
    if rows:
        c_mat = np.array(rows)
        diffusion = omega_s @ np.real(c_mat.conj().T @ c_mat) @ omega_s.T
    else:
        diffusion = np.zeros((2 * m, 2 * m))

    q = bath.two_photon
    if q != 0:
        for coeffs in base:
            og = omega_s @ _lowering_vector(coeffs, m)
            diffusion += np.real(-2.0 * q * np.outer(og, og))
    diffusion = 0.5 * (diffusion + diffusion.T)
    return QuadratureSystem(drift=drift, diffusion=diffusion, drive=drive,
                            omega=spec.omega, n_modes=m)


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def _mean_propagator(drift: np.ndarray, drive: np.ndarray, h: float):
    """Exact (E, phi) with m(t+h) = E m(t) + phi, valid for singular drift too."""
    n = drift.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = drift
    aug[:n, n] = drive
    prop = expm(aug * h)
    return prop[:n, :n], prop[:n, n]


def _cov_kick(drift: np.ndarray, diffusion: np.ndarray, h: float,
              e_h: np.ndarray | None = None) -> np.ndarray:
    """Exact integral int_0^h e^{A s} D e^{A^T s} ds.

    For strictly stable drift the integral is G_inf - e^{Ah} G_inf e^{A^T h}
    with G_inf the infinite-horizon Gramian (stable for any h); marginally
    stable drift falls back to the block-exponential construction, which is
    well conditioned there because nothing grows.
    """
    n = drift.shape[0]
    eigs = np.linalg.eigvals(drift)
    if np.max(eigs.real) < -1e-300 and np.max(eigs.real) * h < -1e-10:
        gram = solve_continuous_lyapunov(drift, -diffusion)
        if e_h is None:
            e_h = expm(drift * h)
        kick = gram - e_h @ gram @ e_h.T
    else:
        blk = np.zeros((2 * n, 2 * n))
        blk[:n, :n] = -drift
        blk[:n, n:] = diffusion
        blk[n:, n:] = drift.T
        prop = expm(blk * h)
        kick = prop[n:, n:].T @ prop[:n, n:]
    return 0.5 * (kick + kick.T)


def _check_stable_enough(sys: QuadratureSystem) -> np.ndarray:
    eigs = np.linalg.eigvals(sys.drift)
    if np.max(eigs.real) > 1e-12 * sys.omega:
        raise UnstableSystem(
            f"drift eigenvalue with positive real part {np.max(eigs.real):.3e}"
        )
    return eigs


def evolve(sys: QuadratureSystem, state: GaussianState, t_grid) -> list[GaussianState]:
    """Propagate mean and covariance to every time in ``t_grid``.

    The grid must be strictly increasing and start at or after ``state.time``;
    each interval is advanced with one exact matrix exponential.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if t_grid[0] < state.time - 1e-12:
        raise ValueError("t_grid must start at or after the state time")
    _check_stable_enough(sys)

    mean = state.mean.copy()
    cov = state.cov.copy()
    t_cur = state.time
    cache: dict[float, tuple] = {}
    out = []
    for t_next in t_grid:
        h = t_next - t_cur
        if h > 0:
            if h not in cache:
                e_h, phi = _mean_propagator(sys.drift, sys.drive, h)
                cache[h] = (e_h, phi, _cov_kick(sys.drift, sys.diffusion, h, e_h))
            e_h, phi, kick = cache[h]
            mean = e_h @ mean + phi
            cov = e_h @ cov @ e_h.T + kick
            cov = 0.5 * (cov + cov.T)
            t_cur = t_next
        snap = GaussianState(mean.copy(), cov.copy(), t_cur)
        if not snap.is_physical():
            raise UnstableSystem("propagated covariance left the physical cone")
        out.append(snap)
    return out


def steady_state(sys: QuadratureSystem) -> GaussianState:
    """Unique fixed point: A m = -f and the continuous Lyapunov solve for S."""
    eigs = _check_stable_enough(sys)
    if np.max(eigs.real) >= -1e-12 * sys.omega:
        raise SingularDrift("drift has an undamped direction; no steady state")
    mean = np.linalg.solve(sys.drift, -sys.drive)
    cov = solve_continuous_lyapunov(sys.drift, -sys.diffusion)
    cov = 0.5 * (cov + cov.T)
    scale = max(1.0, float(np.max(np.abs(sys.diffusion))))
    resid = sys.drift @ cov + cov @ sys.drift.T + sys.diffusion
    if np.max(np.abs(resid)) > 1e-8 * scale:
        raise SingularDrift("Lyapunov solve did not converge")
    return GaussianState(mean, cov, math.inf)


def _occupation_series(sys: QuadratureSystem, mode: int, t_final: float, n_pts: int,
                       ss: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    """Terminal-mode occupation on a uniform grid, stepping from the ground state."""
    h = t_final / n_pts
    e_h, phi = _mean_propagator(sys.drift, sys.drive, h)
    n2 = sys.drift.shape[0]
    mean = np.zeros(n2)
    delta = 0.5 * np.eye(n2) - ss.cov  # S(t) = S_ss + e^{At} (S0-S_ss) e^{A^T t}
    track_cov = np.max(np.abs(delta)) > 1e-14
    sx, sp = 2 * mode, 2 * mode + 1
    base_fluct = 0.5 * (ss.cov[sx, sx] + ss.cov[sp, sp] - 1.0)
    times = np.arange(1, n_pts + 1) * h
    occ = np.empty(n_pts)
    for k in range(n_pts):
        mean = e_h @ mean + phi
        fl = base_fluct
        if track_cov:
            delta = e_h @ delta @ e_h.T
            fl += 0.5 * (delta[sx, sx] + delta[sp, sp])
        occ[k] = fl + 0.5 * (mean[sx] ** 2 + mean[sp] ** 2)
    return times, occ


def relaxation_time(sys: QuadratureSystem, threshold: float = 0.95) -> float:
    """Smallest t after which the terminal battery stays above threshold*E_ss.

    Starts from the ground state; the search grid is refined until the
    estimate is stable to 1%.  Raises NotConverged past a horizon of 1e7
    (in 1/omega units).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    ss = steady_state(sys)
    terminal = sys.n_modes - 1
    e_ss = ss.occupation(terminal)
    if e_ss <= 0:
        raise SingularDrift("terminal steady energy vanishes; threshold undefined")
    target = threshold * e_ss

    eigs = np.linalg.eigvals(sys.drift)
    rate = -float(np.max(eigs.real))
    osc = float(np.max(np.abs(eigs.imag)))
    horizon = 12.0 / rate
    cap = 1e7 / sys.omega

    def n_points(t_final):
        n = 4096
        if osc > 0:
            n = max(n, int(math.ceil(t_final * osc * 8 / math.pi)))
        return min(n, 400_000)

    while True:
        if horizon > cap:
            raise NotConverged(f"relaxation horizon exceeded {cap:g}")
        times, occ = _occupation_series(sys, terminal, horizon, n_points(horizon), ss)
        below = np.nonzero(occ < target)[0]
        if below.size == 0:
            # crossing happens before the first grid point; shrink
            horizon = times[0] * 2
            continue
        k = below[-1]
        if k >= len(occ) - max(2, len(occ) // 20):
            horizon *= 2.0  # tail not yet demonstrably above threshold
            continue
        t_lo, t_hi = times[k], times[k + 1]
        break

    # local bisection-style refinement on fresh fine grids
    estimate = t_hi
    while True:
        n_fine = 64
        ts = np.linspace(t_lo, t_hi, n_fine + 1)
        states = evolve(sys, GaussianState.ground(sys.n_modes), ts[ts > 0])
        occ = np.array([s.occupation(terminal) for s in states])
        below = np.nonzero(occ < target)[0]
        idx = below[-1] if below.size else -1
        t_lo = ts[ts > 0][idx] if idx >= 0 else t_lo
        t_hi = ts[ts > 0][min(idx + 1, len(occ) - 1)]
        new_estimate = t_hi
        if abs(new_estimate - estimate) <= 0.01 * new_estimate:
            return float(new_estimate)
        estimate = new_estimate
