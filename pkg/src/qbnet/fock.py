"""Independent truncated-Fock-space Lindblad integrator.

Cross-validation engine only: it never shares code with the Gaussian
moment engine.  The density matrix of the full network is integrated with
an adaptive explicit stepper; the generator is applied in matrix form.
Because every jump operator is a sum of single-mode ladder operators, the
sandwich terms L rho L^dag reduce to axis-sliced shift-and-scale passes
over the density tensor, which is what makes truncations of a few thousand
states tractable.

Truncation soundness is strict: if the top Fock level of any mode carries
more than ``tail_tol`` population the run raises instead of warning.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from . import network
from .gaussian import ReservoirSpec
from .errors import DimensionOverflow, NotConverged, TruncationUnsound

_TRACE_TOL = 1e-8
_HERM_TOL = 1e-10
_POSITIVITY_SLACK = 1e-7
_SCRUB_TAIL = 1e-12   # shells beyond this cumulative population are scrubbed
_SCRUB_MARGIN = 4     # extra shells kept above the populated region
_SCRUB_GATE = 1e-9    # total scrubbed mass above this is unsound


@dataclass(frozen=True)
class FockConfig:
    """Per-mode truncation and integrator control for the oracle."""

    levels: int
    max_dim: int = 4096
    rtol: float = 1e-8
    atol: float = 1e-12
    tail_tol: float = 1e-8
    method: str = "DOP853"

    def total_dim(self, n_modes: int) -> int:
        if self.levels < 2:
            raise DimensionOverflow("need at least two Fock levels per mode")
        dim = self.levels ** n_modes
        if dim > self.max_dim:
            raise DimensionOverflow(
                f"{self.levels}^{n_modes} = {dim} exceeds the cap {self.max_dim}"
            )
        return dim


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray
    time: float

    def validate(self, check_positivity: bool = True):
        tr = complex(np.trace(self.data))
        if abs(tr - 1.0) > _TRACE_TOL:
            raise TruncationUnsound(f"trace drifted to {tr:.10f}")
        herm = np.max(np.abs(self.data - self.data.conj().T))
        if herm > _HERM_TOL:
            raise TruncationUnsound(f"hermiticity defect {herm:.2e}")
        if check_positivity:
            low = float(np.min(np.linalg.eigvalsh(self.data)))
            if low < -_POSITIVITY_SLACK:
                raise TruncationUnsound(f"negative eigenvalue {low:.2e}")


def _ladder(levels: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, levels)), 1, format="csr")


class _LadderPass:
    """One fused term  w * (ladder on a row axis) rho (ladder on a column axis).

    ``up`` selects the shift direction of each side: a lowering operator on
    the left and a raising operator on the right both read one level up
    (down pattern); the opposite members read one level down.  ``tilt``
    rescales the weight by c^{(dn_left + dn_right)/2} for dynamics expressed
    in detailed-balance-tilted coordinates.
    """

    __slots__ = ("sl_out", "sl_in", "weight")

    def __init__(self, d: int, n_axes: int, ax_left: int, left_up: bool,
                 ax_right: int, right_up: bool, weight: complex,
                 tilt: float = 1.0):
        sl_out = [slice(None)] * n_axes
        sl_in = [slice(None)] * n_axes
        root = np.sqrt(np.arange(1, d))
        shift = (1 if left_up else -1) + (1 if right_up else -1)
        w = np.asarray(weight * tilt ** (shift / 2.0), dtype=complex)
        for ax, up in ((ax_left, left_up), (ax_right, right_up)):
            shape = [1] * n_axes
            shape[ax] = d - 1
            if up:
                sl_out[ax] = slice(1, None)
                sl_in[ax] = slice(0, -1)
            else:
                sl_out[ax] = slice(0, -1)
                sl_in[ax] = slice(1, None)
            w = w * root.reshape(shape)
        self.sl_out = tuple(sl_out)
        self.sl_in = tuple(sl_in)
        self.weight = np.ascontiguousarray(w)

    def apply(self, out_t: np.ndarray, rho_t: np.ndarray):
        out_t[self.sl_out] += self.weight * rho_t[self.sl_in]


def _sandwich_passes(d: int, n_modes: int, coeffs: dict[int, complex],
                     raising: bool, weight: float, tilt: float) -> list[_LadderPass]:
    """Plan for weight * L rho L^dag with L = sum_m c_m A_m (or A_m^dag).

    A lowering L puts A on the left (down pattern) and A^dag on the right,
    which is also the down pattern; a raising L flips both.
    """
    plan = []
    for m_l, c_l in coeffs.items():
        for m_r, c_r in coeffs.items():
            plan.append(_LadderPass(
                d, 2 * n_modes, m_l, raising, n_modes + m_r, raising,
                weight * c_l * np.conj(c_r), tilt,
            ))
    return plan


def _anomalous_passes(d: int, n_modes: int, coeffs: dict[int, complex],
                      raising: bool, weight: complex, tilt: float) -> list[_LadderPass]:
    """Plan for weight * o rho o with the same (undaggered) o on both sides."""
    plan = []
    for m_l, c_l in coeffs.items():
        for m_r, c_r in coeffs.items():
            plan.append(_LadderPass(
                d, 2 * n_modes, m_l, raising, n_modes + m_r, not raising,
                weight * c_l * c_r, tilt,
            ))
    return plan


class FockSimulator:
    """Dense-state Lindblad engine for one network + reservoir."""

    def __init__(self, spec: network.NetworkSpec, bath: ReservoirSpec,
                 config: FockConfig):
        self.spec = spec
        self.bath = bath
        self.config = config
        self.n_modes = spec.n_modes
        self.dim = config.total_dim(self.n_modes)
        d = config.levels
        self._tensor_shape = (d,) * (2 * self.n_modes)

        eye = sp.identity(d, format="csr")
        down = _ladder(d)
        self.mode_down: list[sp.csr_matrix] = []
        for m in range(self.n_modes):
            ops = [eye] * self.n_modes
            ops[m] = down
            full = ops[0]
            for other in ops[1:]:
                full = sp.kron(full, other, format="csr")
            self.mode_down.append(full.tocsr())
        levels_diag = np.arange(d, dtype=float)
        self.mode_number_diag = []
        for m in range(self.n_modes):
            shape = [1] * self.n_modes
            shape[m] = d
            diag = np.broadcast_to(levels_diag.reshape(shape),
                                   (d,) * self.n_modes).reshape(self.dim)
            self.mode_number_diag.append(np.ascontiguousarray(diag))

        # dissipation channels as mode-coefficient maps, rates folded in
        loss_maps: list[dict[int, complex]] = []
        for m, kap in enumerate(spec.local_rates):
            if kap > 0:
                loss_maps.append({m: math.sqrt(kap)})
        p = spec.coupling.p_coeffs
        for (up, dn), gamma in zip(spec.topology.links(), spec.coupling.coop_rates):
            if gamma > 0:
                root = math.sqrt(gamma)
                loss_maps.append({up: root * p[up], dn: root * p[dn]})

        nbar = bath.mean_photons
        q2 = bath.two_photon
        # Detailed-balance tilt sigma = W rho W with W = diag(c^{n_tot/2}):
        # balancing the up/down ladder rates makes the truncated generator
        # near normal.  The plain truncated gain channel is so non-normal at
        # realistic depths that machine roundoff seeds exponentially amplified
        # pseudo-modes, even though its exact spectrum is non-positive.
        self._tilt = math.sqrt((nbar + 1.0) / nbar) if nbar > 0 else 1.0
        self._plan: list[_LadderPass] = []         # applied after the mirror
        self._plan_half: list[_LadderPass] = []    # mirrored with the M rho part
        plan_phys: list[_LadderPass] = []          # untilted, public rhs
        plan_phys_half: list[_LadderPass] = []
        plan_phys_half_adj: list[_LadderPass] = []
        m_op = (-1j * self._hamiltonian()).tolil()
        for u in loss_maps:
            op = self._op_from_map(u)
            m_op = m_op - 0.5 * (nbar + 1.0) * (op.conj().T @ op)
            for tilt, plan in ((self._tilt, self._plan), (1.0, plan_phys)):
                plan += _sandwich_passes(d, self.n_modes, u, False, nbar + 1.0, tilt)
            if nbar > 0:
                v = {m: np.conj(c) for m, c in u.items()}
                m_op = m_op - 0.5 * nbar * (op @ op.conj().T)
                for tilt, plan in ((self._tilt, self._plan), (1.0, plan_phys)):
                    plan += _sandwich_passes(d, self.n_modes, v, True, nbar, tilt)
            if q2 != 0:
                m_op = m_op + 0.5 * q2 * (op @ op)
                m_op = m_op + 0.5 * np.conj(q2) * (op.conj().T @ op.conj().T)
                for tilt, plan in ((self._tilt, self._plan_half),
                                   (1.0, plan_phys_half)):
                    plan += _anomalous_passes(d, self.n_modes, u, False, -q2, tilt)
                v = {m: np.conj(c) for m, c in u.items()}
                plan_phys_half_adj += _anomalous_passes(
                    d, self.n_modes, v, True, -np.conj(q2), 1.0)
        m_phys = sp.csr_matrix(m_op)
        n_totals = np.zeros(self.dim)
        for diag in self.mode_number_diag:
            n_totals = n_totals + diag
        self._tilt_diag = self._tilt ** (0.5 * n_totals)
        w_mat = sp.diags(self._tilt_diag)
        w_inv = sp.diags(1.0 / self._tilt_diag)
        self._m_left = (w_mat @ m_phys @ w_inv).tocsr()
        self._m_phys = m_phys
        self._m_phys_conj = m_phys.conj().tocsr()
        self._plan_phys = plan_phys
        self._plan_phys_half = plan_phys_half
        self._plan_phys_half_adj = plan_phys_half_adj
        self._loss_maps = loss_maps

        # conservative generator-norm bound in tilted coordinates:
        # 2|H| + sum_k 2|L_k|^2 with the tilt-balanced channel weights
        d_top = d - 1.0
        cpl = spec.coupling
        ham_norm = 2.0 * spec.drive * math.sqrt(d_top) * math.sqrt(self._tilt)
        ham_norm += sum(2.0 * j * d_top for j in cpl.amplitudes)
        chan = 0.0
        loss_w = (nbar + 1.0) / self._tilt
        gain_w = nbar * self._tilt
        for u in self._loss_maps:
            amp2 = (sum(abs(c) for c in u.values()) * math.sqrt(d_top)) ** 2
            chan += 2.0 * loss_w * amp2
            if nbar > 0:
                chan += 2.0 * gain_w * amp2
            if q2 != 0:
                chan += 4.0 * abs(q2) * amp2
        self._norm_bound = 2.0 * ham_norm + chan
        self._max_step: float | None = None

    def _stable_step(self) -> float:
        """Step cap keeping the explicit stepper inside its stability region.

        The error controller alone cannot be trusted here: once a stiff
        empty-sector component blows past the stability boundary, relative
        error control stops rejecting steps.  The cap uses a power-iteration
        estimate of the generator's spectral radius (the analytic norm bound
        is several times too conservative); evolve() retries with a halved
        cap if a chunk still misbehaves.
        """
        if self._max_step is None:
            rng = np.random.default_rng(987654321)
            x = rng.normal(size=(self.dim, self.dim)) \
                + 1j * rng.normal(size=(self.dim, self.dim))
            x = x + x.conj().T
            x /= np.linalg.norm(x)
            radius = self._norm_bound
            for _ in range(20):
                y = self._rhs_tilted(x)
                radius = float(np.linalg.norm(y))
                x = y / radius
            radius = max(1.25 * radius, 0.05 * self._norm_bound, 1e-12)
            self._max_step = 4.5 / radius
        return self._max_step

    def _to_tilted(self, rho: np.ndarray) -> np.ndarray:
        return rho * np.outer(self._tilt_diag, self._tilt_diag)

    def _from_tilted(self, sigma: np.ndarray) -> np.ndarray:
        return sigma / np.outer(self._tilt_diag, self._tilt_diag)

    def _shell_totals(self) -> np.ndarray:
        total = np.zeros(self.dim)
        for diag in self.mode_number_diag:
            total = total + diag
        return total

    def _scrub(self, sigma: np.ndarray) -> tuple[np.ndarray, float]:
        """Project away quanta shells carrying provably negligible population.

        Truncated multi-mode generators with coupled, unequally damped
        thermal ladders are so non-normal that machine roundoff in the empty
        high-quanta corner seeds slowly but exponentially amplified
        pseudo-modes; the exact flow contracts, so periodically projecting
        onto the populated shells (P rho P with a shell projector) removes
        the seed while touching only a certified amount of physical mass.
        Operates on the tilted state; returns it and the physical mass removed.
        """
        sigma = 0.5 * (sigma + sigma.conj().T)
        shell = self._shell_totals()
        pops = np.abs(np.real(np.diagonal(sigma))) / self._tilt_diag**2
        order = np.argsort(shell)
        tail = np.cumsum(pops[order][::-1])[::-1]
        keep_mask = tail > _SCRUB_TAIL
        if not np.any(keep_mask):
            return sigma, 0.0
        s_keep = shell[order][keep_mask][-1] + _SCRUB_MARGIN
        live = shell <= s_keep
        if np.all(live):
            return sigma, 0.0
        removed = float(np.sum(pops[~live]))
        out = sigma.copy()
        out[~live, :] = 0.0
        out[:, ~live] = 0.0
        if 0.0 < removed < 0.5:
            out = out / (1.0 - removed)
        return out, removed

    def _op_from_map(self, coeffs: dict[int, complex]) -> sp.csr_matrix:
        op = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for m, c in coeffs.items():
            op = op + c * self.mode_down[m]
        return op.tocsr()

    def _hamiltonian(self) -> sp.csr_matrix:
        cpl = self.spec.coupling
        ham = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for idx, (up, dn) in enumerate(self.spec.topology.links()):
            j_i = cpl.amplitudes[idx]
            if j_i == 0:
                continue
            hop = j_i * np.exp(1j * cpl.phases[idx]) * (
                self.mode_down[up].conj().T @ self.mode_down[dn]
            )
            ham = ham + hop + hop.conj().T
        if self.spec.drive > 0:
            drive = self.spec.drive * self.mode_down[0]
            ham = ham + drive + drive.conj().T
        return ham.tocsr()

    # -- dynamics ----------------------------------------------------------

    def rhs(self, rho: np.ndarray, assume_hermitian: bool = False) -> np.ndarray:
        """d rho / dt in physical coordinates."""
        rho = np.ascontiguousarray(rho)
        half = self._m_phys @ rho
        half_t = half.reshape(self._tensor_shape)
        rho_t = rho.reshape(self._tensor_shape)
        for term in self._plan_phys_half:
            term.apply(half_t, rho_t)
        if assume_hermitian:
            out = half + half.conj().T
        else:
            out = half.copy()
            out += (self._m_phys_conj @ rho.T).T  # rho M^dag
            for term in self._plan_phys_half_adj:  # anomalous mirror partners
                term.apply(out.reshape(self._tensor_shape), rho_t)
        out_t = out.reshape(self._tensor_shape)
        for term in self._plan_phys:
            term.apply(out_t, rho_t)
        return out

    def _rhs_tilted(self, sigma: np.ndarray) -> np.ndarray:
        """Hermitian-state generator in tilted coordinates (integration path)."""
        sigma = np.ascontiguousarray(sigma)
        half = self._m_left @ sigma
        half_t = half.reshape(self._tensor_shape)
        sigma_t = sigma.reshape(self._tensor_shape)
        for term in self._plan_half:
            term.apply(half_t, sigma_t)
        out = half + half.conj().T
        out_t = out.reshape(self._tensor_shape)
        for term in self._plan:
            term.apply(out_t, sigma_t)
        return out

    def ground_state(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def thermal_product_state(self, n_th: float) -> np.ndarray:
        """Gibbs occupation per mode, no coherences (bath-equilibrium start)."""
        d = self.config.levels
        if n_th == 0:
            return self.ground_state()
        pops = (n_th / (n_th + 1.0)) ** np.arange(d) / (n_th + 1.0)
        diag = pops
        for _ in range(self.n_modes - 1):
            diag = np.multiply.outer(diag, pops).reshape(-1)
        return np.diag(diag / diag.sum()).astype(complex)

    def evolve(self, t_points, rho0: np.ndarray | None = None,
               check: bool = True) -> list[DensityMatrix]:
        """Integrate to every requested time; trace, hermiticity, positivity,
        and per-mode truncation soundness are verified at each output."""
        t_points = np.atleast_1d(np.asarray(t_points, dtype=float))
        if np.any(np.diff(t_points) <= 0) or t_points[0] < 0:
            raise ValueError("t_points must be strictly increasing and >= 0")
        rho = self.ground_state() if rho0 is None else np.array(rho0, dtype=complex)
        sigma = self._to_tilted(rho)

        def f(_t, y):
            return self._rhs_tilted(y.reshape(self.dim, self.dim)).reshape(-1)

        # integrate in chunks short enough that roundoff-seeded pseudo-modes
        # cannot amplify; scrub the empty shells between chunks and back the
        # step cap off if a chunk still escapes
        chunk = 60.0 / max(self._norm_bound, 1e-12)
        h_cap = self._stable_step()
        scrubbed_total = 0.0
        out = []
        t_now = 0.0
        pending = list(t_points)
        while pending:
            t_stop = min(pending[0], t_now + chunk)
            if t_stop > t_now:
                for attempt in range(7):
                    sol = solve_ivp(f, (t_now, t_stop), sigma.reshape(-1),
                                    method=self.config.method,
                                    rtol=self.config.rtol, atol=self.config.atol,
                                    max_step=h_cap,
                                    first_step=min(h_cap, 0.25 * (t_stop - t_now)))
                    if sol.success:
                        cand = sol.y[:, -1].reshape(self.dim, self.dim)
                        scale = float(np.max(np.abs(cand)))
                        if np.isfinite(scale) and scale < 1e3:
                            sigma = cand
                            break
                    h_cap *= 0.5  # stepped over the stability boundary
                else:
                    raise NotConverged("integrator kept escaping the stability region")
                sigma, removed = self._scrub(sigma)
                scrubbed_total += removed
                if scrubbed_total > _SCRUB_GATE:
                    raise TruncationUnsound(
                        f"scrubbed population {scrubbed_total:.2e} exceeds "
                        f"{_SCRUB_GATE:g}; the truncation is too tight"
                    )
                t_now = t_stop
            if abs(t_now - pending[0]) <= 1e-12 * max(t_now, 1.0):
                mat = self._from_tilted(sigma)
                mat = 0.5 * (mat + mat.conj().T)
                state = DensityMatrix(mat, float(pending.pop(0)))
                if check:
                    state.validate()
                    self.check_truncation(mat)
                out.append(state)
        return out

    def steady_state(self, settle_tol: float = 1e-6, t_chunk: float | None = None,
                     t_cap: float = 1e7, check: bool = True) -> DensityMatrix:
        """Long-time integration until per-mode occupations stop moving."""
        lam = self.spec.effective_rates().damping
        positive = lam[lam > 0]
        if positive.size == 0:
            raise NotConverged("undamped network has no steady state")
        if t_chunk is None:
            t_chunk = 4.0 / float(np.min(positive))
        rho = self.ground_state()
        t_now = 0.0
        occ_prev = self.occupations(rho)
        while t_now < t_cap:
            state = self.evolve([t_chunk], rho0=rho, check=check)[-1]
            rho = state.data
            t_now += t_chunk
            occ = self.occupations(rho)
            if np.max(np.abs(occ - occ_prev)) < settle_tol:
                return DensityMatrix(rho, t_now)
            occ_prev = occ
        raise NotConverged(f"no steady state within t = {t_cap:g}")

    # -- observables ---------------------------------------------------------

    def mean_amplitudes(self, rho: np.ndarray) -> np.ndarray:
        """<a_m> = tr(a_m rho) for every mode."""
        return np.array([
            complex((op.multiply(rho.T)).sum()) for op in self.mode_down
        ])

    def occupations(self, rho: np.ndarray) -> np.ndarray:
        diag = np.real(np.diagonal(rho))
        return np.array([float(nd @ diag) for nd in self.mode_number_diag])

    def reduced(self, rho: np.ndarray, mode: int) -> np.ndarray:
        """Partial trace down to one mode's d x d density matrix."""
        m = self.n_modes
        tensor = rho.reshape(self._tensor_shape)
        letters = string.ascii_lowercase
        left = list(letters[:m])
        right = list(letters[m:2 * m])
        for k in range(m):
            if k != mode:
                right[k] = left[k]
        subscript = "".join(left) + "".join(right) + "->" + left[mode] + right[mode]
        return np.einsum(subscript, tensor)

    def check_truncation(self, rho: np.ndarray):
        for m in range(self.n_modes):
            red = self.reduced(rho, m)
            top = float(np.real(red[-1, -1]))
            if top > self.config.tail_tol:
                raise TruncationUnsound(
                    f"mode {m} holds {top:.2e} population at the truncation edge"
                )


def lindblad_rhs(spec: network.NetworkSpec, bath: ReservoirSpec,
                 rho: np.ndarray, config: FockConfig) -> np.ndarray:
    """d rho/dt of the full network master equation at the given state."""
    return FockSimulator(spec, bath, config).rhs(np.asarray(rho, dtype=complex))


def spectral_ergotropy(rho_mode: np.ndarray, omega: float = 1.0,
                       tail_tol: float = 1e-8) -> float:
    """Extractable work of a single-mode state from its eigenvalue ladder.

    Sorts the spectrum in decreasing order onto the number ladder; the
    passive energy is omega * sum_k r_k k and the ergotropy the remainder of
    omega <n>.
    """
    rho_mode = np.asarray(rho_mode, dtype=complex)
    top = float(np.real(rho_mode[-1, -1]))
    if top > tail_tol:
        raise TruncationUnsound(
            f"top-level population {top:.2e} exceeds {tail_tol:g}"
        )
    levels = np.arange(rho_mode.shape[0], dtype=float)
    occupation = float(np.real(np.diagonal(rho_mode)) @ levels)
    eigs = np.sort(np.linalg.eigvalsh(rho_mode))[::-1]
    passive = float(np.clip(eigs, 0.0, None) @ levels)
    return omega * (occupation - passive)
