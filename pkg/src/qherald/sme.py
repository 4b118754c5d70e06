"""Ito stochastic master equations for the joint heterodyne measurement.

Two levels of description:

* the reduced model: a two-qubit density matrix driven by the cavity-derived
  signals (measurement amplitudes S_j, frequency shifts Omega_j, dephasing
  rates Gamma_d^j), with innovation operators built from S_j sigma_z^j;
* the full model: qubit (x) cavity pairs at finite Fock truncation, with the
  dispersive Hamiltonians, cavity decay, and innovations built from the
  monitored field combinations.

Both use Euler-Maruyama stepping in Ito form with per-step renormalization
(the nonlinear innovation terms preserve trace only to O(dt)).  Positivity
is asserted, never projected: a violation beyond tolerance aborts and asks
for a smaller step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .cavity import CavityTrajectory, DriveEnvelope, SystemParams, integrate_cavity
from .exceptions import NumericalAbort
from .states import TwoQubitState, Z1_DIAG, Z2_DIAG, bloch_series

INV_2SQRT2 = 1.0 / (2.0 * math.sqrt(2.0))


def trajectory_rng(base_seed: int, index: int = 0) -> np.random.Generator:
    """Independent, reproducible stream for trajectory `index`."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([base_seed, index])))


def wiener_pair(rng: np.random.Generator, dt: float) -> tuple[float, float]:
    """Two independent Wiener increments of variance dt."""
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    root = math.sqrt(dt)
    return root * rng.standard_normal(), root * rng.standard_normal()


@dataclass
class MeasurementRecord:
    """Heterodyne record increments on a uniform grid."""

    dt: float
    di_r: np.ndarray
    dq_r: np.ndarray
    dw: np.ndarray | None = None  # (2, n) generating increments, if kept
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.di_r)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    def __post_init__(self) -> None:
        if len(self.di_r) != len(self.dq_r):
            raise ValueError("record quadratures have unequal lengths")
        if not (np.isfinite(self.di_r).all() and np.isfinite(self.dq_r).all()):
            raise ValueError("record contains non-finite increments")


# ---------------------------------------------------------------------------
# reduced model


def reduced_step_coefficients(
    s1: np.ndarray,
    s2: np.ndarray,
    omega1: np.ndarray,
    omega2: np.ndarray,
    gamma_d1: np.ndarray,
    gamma_d2: np.ndarray,
    sys: SystemParams,
    relaxation: bool = False,
):
    """Per-step elementwise generator and innovation diagonals.

    The deterministic part of the reduced master equation is elementwise in
    the computational basis: frequency-shift commutators and sigma_z
    dephasing multiply each matrix entry by a time-dependent coefficient.
    With relaxation disabled (default) half the relaxation rate is folded
    into the dephasing so coherences decay at the full Gamma_2; with it
    enabled the true sigma_minus dissipator is applied by the stepper and
    only its decay half lives here.

    Returns (coef (n,4,4), c_i (n,4), c_q (n,4)).
    """
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    n = s1.shape[0]

    dz1 = Z1_DIAG[:, None] - Z1_DIAG[None, :]
    dz2 = Z2_DIAG[:, None] - Z2_DIAG[None, :]
    pz1 = Z1_DIAG[:, None] * Z1_DIAG[None, :] - 1.0
    pz2 = Z2_DIAG[:, None] * Z2_DIAG[None, :] - 1.0

    fold1 = sys.gamma_phi[0] + (0.0 if relaxation else 0.5 * sys.gamma1[0])
    fold2 = sys.gamma_phi[1] + (0.0 if relaxation else 0.5 * sys.gamma1[1])
    g1 = np.asarray(gamma_d1) + fold1
    g2 = np.asarray(gamma_d2) + fold2

    coef = (
        -0.5j * (np.asarray(omega1)[:, None, None] * dz1 + np.asarray(omega2)[:, None, None] * dz2)
        + 0.5 * g1[:, None, None] * pz1
        + 0.5 * g2[:, None, None] * pz2
    ).astype(complex)
    if relaxation:
        pe1 = (1.0 + Z1_DIAG) * 0.5
        pe2 = (1.0 + Z2_DIAG) * 0.5
        decay = -0.5 * sys.gamma1[0] * (pe1[:, None] + pe1[None, :]) - 0.5 * sys.gamma1[1] * (
            pe2[:, None] + pe2[None, :]
        )
        coef += decay[None, :, :]

    c_i = INV_2SQRT2 * (s1[:, None] * Z1_DIAG[None, :] + s2[:, None] * Z2_DIAG[None, :])
    c_q = INV_2SQRT2 * 1j * (s1[:, None] * Z1_DIAG[None, :] - s2[:, None] * Z2_DIAG[None, :])
    assert coef.shape == (n, 4, 4)
    return coef, c_i, c_q


def step_reduced(
    state: TwoQubitState,
    trajs: tuple[CavityTrajectory, CavityTrajectory],
    sys: SystemParams,
    t: float,
    dt: float,
    dw_i: float,
    dw_q: float,
    relaxation: bool = False,
) -> TwoQubitState:
    """One Euler-Maruyama step of the reduced model (reference path).

    ``t`` must lie on the cavity trajectories' grid; signals are taken at
    the left endpoint (Ito convention).  Returns the renormalized state.
    """
    traj1, traj2 = trajs
    k = int(round(t / traj1.dt))
    if abs(t - k * traj1.dt) > 1e-9 * max(traj1.dt, 1.0) or k >= len(traj1.t):
        raise ValueError("t must lie on the cavity trajectory grid")
    coef, c_i, c_q = reduced_step_coefficients(
        traj1.s[k : k + 1], traj2.s[k : k + 1],
        traj1.omega[k : k + 1], traj2.omega[k : k + 1],
        traj1.gamma_d[k : k + 1], traj2.gamma_d[k : k + 1],
        sys, relaxation,
    )
    dw = np.array([[dw_i], [dw_q]])
    snaps, _, _ = kernels.run_reduced_em(
        state.rho, coef, c_i, c_q, dw, dt, stride=1,
        gamma1=sys.gamma1[0], gamma2=sys.gamma1[1],
        relaxation=relaxation, backend="numpy",
    )
    return TwoQubitState(snaps[-1])


@dataclass
class ReducedTrajectory:
    """One conditioned reduced-model run with its emitted record."""

    t_out: np.ndarray
    rhos: np.ndarray  # (n_out, 4, 4) on the output grid
    record: MeasurementRecord
    traj1: CavityTrajectory
    traj2: CavityTrajectory
    sys: SystemParams
    seed: int

    def bloch(self) -> np.ndarray:
        return bloch_series(self.rhos)


# Euler-Maruyama does not preserve positivity; transient eigenvalue
# excursions are O(S sqrt(dt)) and shrink only with the step, so the abort
# floor is far looser than the exact-state tolerance in states.py.
EM_EIG_FLOOR = -0.05


def _check_snapshots(rhos: np.ndarray, eig_floor: float = EM_EIG_FLOOR) -> None:
    tr = np.einsum("taa->t", rhos).real
    if not np.allclose(tr, 1.0, atol=1e-9):
        raise NumericalAbort("snapshot trace drifted from 1; reduce dt")
    if np.linalg.eigvalsh(rhos).min() < eig_floor:
        raise NumericalAbort("state developed negative eigenvalues beyond tolerance; reduce dt")


def simulate_reduced(
    sys: SystemParams,
    drives: tuple[DriveEnvelope, DriveEnvelope],
    seed: int,
    dt: float = 1e-4,
    dt_out: float | None = 1e-3,
    relaxation: bool = False,
    backend: str | None = None,
    trajs: tuple[CavityTrajectory, CavityTrajectory] | None = None,
    rho0: np.ndarray | None = None,
    keep_dw: bool = True,
    check: bool = True,
    eig_floor: float = EM_EIG_FLOOR,
) -> ReducedTrajectory:
    """Integrate one reduced-model trajectory from |++><++|.

    Cavity trajectories are computed on the same grid as the stochastic
    steps (pass ``trajs`` to reuse them across seeds).  Snapshots are stored
    every ``dt_out``; ``None`` keeps only the initial and final state.
    """
    if trajs is None:
        traj1 = integrate_cavity(sys, 1, drives[0], dt)
        traj2 = integrate_cavity(sys, 2, drives[1], dt)
    else:
        traj1, traj2 = trajs
    n = len(traj1.t) - 1
    if dt_out is None:
        stride = n
    else:
        stride = int(round(dt_out / dt))
        if stride < 1 or n % stride != 0:
            raise ValueError("dt_out must be a multiple of dt dividing the run length")

    coef, c_i, c_q = reduced_step_coefficients(
        traj1.s[:n], traj2.s[:n], traj1.omega[:n], traj2.omega[:n],
        traj1.gamma_d[:n], traj2.gamma_d[:n], sys, relaxation,
    )
    rng = trajectory_rng(seed)
    dw = math.sqrt(dt) * rng.standard_normal((2, n))
    start = TwoQubitState.plus_plus().rho if rho0 is None else np.asarray(rho0, dtype=complex)
    snaps, di, dq = kernels.run_reduced_em(
        start, coef, c_i, c_q, dw, dt, stride,
        gamma1=sys.gamma1[0], gamma2=sys.gamma1[1],
        relaxation=relaxation, backend=backend,
    )
    if check:
        _check_snapshots(snaps, eig_floor)
    record = MeasurementRecord(
        dt, di, dq, dw=dw if keep_dw else None, meta={"seed": seed, "model": "reduced"}
    )
    return ReducedTrajectory(
        t_out=traj1.t[::stride], rhos=snaps, record=record,
        traj1=traj1, traj2=traj2, sys=sys, seed=seed,
    )


def reduced_lindblad(
    sys: SystemParams,
    trajs: tuple[CavityTrajectory, CavityTrajectory],
    stride: int = 1,
    relaxation: bool = False,
    rho0: np.ndarray | None = None,
) -> np.ndarray:
    """Unconditioned (ensemble-averaged) reduced evolution, RK4.

    Returns density matrices on the snapshot grid.  This is the
    deterministic limit the conditioned trajectories average to.
    """
    traj1, traj2 = trajs
    n = len(traj1.t) - 1
    dt = traj1.dt
    coef, _, _ = reduced_step_coefficients(
        traj1.s, traj2.s, traj1.omega, traj2.omega,
        traj1.gamma_d, traj2.gamma_d, sys, relaxation,
    )

    def rhs(rho: np.ndarray, k_half: int) -> np.ndarray:
        # coef at half-grid index (2k, 2k+1, 2k+2)/2 -> nearest node average
        c = coef[k_half // 2] if k_half % 2 == 0 else 0.5 * (coef[k_half // 2] + coef[k_half // 2 + 1])
        out = c * rho
        if relaxation:
            if sys.gamma1[0] != 0.0:
                out[2:, 2:] += sys.gamma1[0] * rho[:2, :2]
            if sys.gamma1[1] != 0.0:
                out[1::2, 1::2] += sys.gamma1[1] * rho[::2, ::2]
        return out

    rho = (TwoQubitState.plus_plus().rho if rho0 is None else np.asarray(rho0, dtype=complex)).copy()
    out = np.empty((n // stride + 1, 4, 4), dtype=complex)
    out[0] = rho
    for k in range(n):
        k1 = rhs(rho, 2 * k)
        k2 = rhs(rho + 0.5 * dt * k1, 2 * k + 1)
        k3 = rhs(rho + 0.5 * dt * k2, 2 * k + 1)
        k4 = rhs(rho + dt * k3, 2 * k + 2)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % stride == 0:
            out[(k + 1) // stride] = rho
    return out


# ---------------------------------------------------------------------------
# full model


@dataclass
class FullState:
    """Density matrix on qubit1 (x) qubit2 (x) cavity1 (x) cavity2."""

    rho: np.ndarray
    n_fock: int

    @property
    def dim(self) -> int:
        return 4 * self.n_fock**2

    def populations(self) -> np.ndarray:
        return np.diag(self.rho).real.reshape(2, 2, self.n_fock, self.n_fock)

    def leakage(self) -> float:
        """Total population of the top two Fock levels of either cavity."""
        pops = self.populations()
        top1 = pops[:, :, self.n_fock - 2 :, :].sum()
        top2 = pops[:, :, :, self.n_fock - 2 :].sum()
        return float(top1 + top2)

    def qubit_state(self) -> np.ndarray:
        """Partial trace over both cavities -> 4x4 qubit density matrix."""
        n = self.n_fock
        r = self.rho.reshape(2, 2, n, n, 2, 2, n, n)
        return np.einsum("abnmcdnm->abcd", r).reshape(4, 4)


class FullModel:
    """Precomputed sparse operators for the qubit (x) cavity dynamics."""

    def __init__(self, sys: SystemParams, n_fock: int = 8):
        self.sys = sys
        self.n_fock = n_fock
        n = n_fock
        i2 = sp.eye_array(2, format="csr", dtype=complex)
        ic = sp.eye_array(n, format="csr", dtype=complex)
        a = sp.diags_array(
            np.sqrt(np.arange(1, n)).astype(complex), offsets=1, format="csr"
        )
        sz = sp.csr_array(np.array([[1, 0], [0, -1]], dtype=complex))
        sm = sp.csr_array(np.array([[0, 0], [1, 0]], dtype=complex))

        def emb(q1, q2, c1, c2):
            return sp.kron(sp.kron(q1, q2), sp.kron(c1, c2), format="csr")

        self.a1 = emb(i2, i2, a, ic)
        self.a2 = emb(i2, i2, ic, a)
        self.sz1 = emb(sz, i2, ic, ic)
        self.sz2 = emb(i2, sz, ic, ic)
        self.sm1 = emb(sm, i2, ic, ic)
        self.sm2 = emb(i2, sm, ic, ic)
        self.ad1 = self.a1.conj().T.tocsr()
        self.ad2 = self.a2.conj().T.tocsr()
        n1 = self.ad1 @ self.a1
        n2 = self.ad2 @ self.a2

        # static dispersive Hamiltonian; drives enter per step
        self.h0 = (
            sys.delta[0] * n1 + 0.5 * sys.chi[0] * (self.sz1 @ n1)
            + sys.delta[1] * n2 + 0.5 * sys.chi[1] * (self.sz2 @ n2)
        ).tocsr()

        # collapse operators with rates folded in
        self.collapse: list[sp.csr_array] = []
        for j, (aj, smj, szj) in enumerate(
            [(self.a1, self.sm1, self.sz1), (self.a2, self.sm2, self.sz2)]
        ):
            self.collapse.append(math.sqrt(sys.kappa[j] + sys.kappa_in[j]) * aj)
            if sys.gamma1[j] > 0.0:
                self.collapse.append(math.sqrt(sys.gamma1[j]) * smj)
            if sys.gamma_phi[j] > 0.0:
                self.collapse.append(math.sqrt(0.5 * sys.gamma_phi[j]) * szj)
        self.collapse_dag = [c.conj().T.tocsr() for c in self.collapse]
        # conjugates kept for right-multiplication via X @ c^dag = (c* @ X^T)^T
        self.collapse_conj = [c.conj().tocsr() for c in self.collapse]

        cdc_sum = sum(cd @ c for c, cd in zip(self.collapse, self.collapse_dag))
        self.heff0 = (self.h0 - 0.5j * cdc_sum).tocsr()

        e1, e2 = sys.eta_pair
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        self.m_i = inv_sqrt2 * (
            math.sqrt(e1 * sys.kappa[0]) * self.a1 + math.sqrt(e2 * sys.kappa[1]) * self.a2
        )
        self.m_q = inv_sqrt2 * 1j * (
            math.sqrt(e1 * sys.kappa[0]) * self.a1 - math.sqrt(e2 * sys.kappa[1]) * self.a2
        )

    def initial_state(self) -> FullState:
        n = self.n_fock
        plus = 0.25 * np.ones((4, 4), dtype=complex)
        vac = np.zeros((n * n, n * n), dtype=complex)
        vac[0, 0] = 1.0
        return FullState(np.kron(plus, vac), self.n_fock)

    def _drift(self, rho: np.ndarray, eps1: complex, eps2: complex) -> np.ndarray:
        a = -1j * (
            self.heff0 @ rho
            + eps1 * (self.ad1 @ rho) + np.conj(eps1) * (self.a1 @ rho)
            + eps2 * (self.ad2 @ rho) + np.conj(eps2) * (self.a2 @ rho)
        )
        out = a + a.conj().T
        for c, cc in zip(self.collapse, self.collapse_conj):
            b = c @ rho
            out += (cc @ np.ascontiguousarray(b.T)).T
        return out

    def lindblad_rhs(self, rho: np.ndarray, eps1: complex, eps2: complex) -> np.ndarray:
        """Unconditioned generator at instantaneous drive amplitudes."""
        return self._drift(rho, eps1, eps2)

    @staticmethod
    def _innovation(op: sp.csr_matrix, rho: np.ndarray) -> tuple[np.ndarray, float]:
        b = op @ rho
        x = b + b.conj().T
        tr = float(np.trace(x).real)
        return x - tr * rho, tr

    def step(
        self,
        state: FullState,
        drives: tuple[complex, complex],
        dt: float,
        dw_i: float,
        dw_q: float,
        leak_threshold: float = 1e-5,
    ) -> tuple[FullState, float, float]:
        """One conditioned Euler-Maruyama step; returns (state, dI_r, dQ_r)."""
        rho = state.rho
        hi, tr_i = self._innovation(self.m_i, rho)
        hq, tr_q = self._innovation(self.m_q, rho)
        di = tr_i * dt + dw_i
        dq = tr_q * dt + dw_q
        new = rho + self._drift(rho, *drives) * dt + hi * dw_i + hq * dw_q
        tr = np.trace(new).real
        if not np.isfinite(tr) or tr < 0.1:
            raise NumericalAbort("full-model trace collapse; reduce dt")
        out = FullState(new / tr, self.n_fock)
        leak = out.leakage()
        if leak > leak_threshold:
            raise NumericalAbort(
                f"Fock truncation leakage {leak:.2e} exceeds {leak_threshold:.0e}; "
                "increase n_fock"
            )
        return out, di, dq


def step_full(
    state: FullState,
    sys: SystemParams,
    drives: tuple[complex, complex],
    t: float,
    dt: float,
    dw_i: float,
    dw_q: float,
    model: FullModel | None = None,
) -> FullState:
    """Single full-model step; builds operators on the fly unless given."""
    if model is None:
        model = FullModel(sys, state.n_fock)
    new, _, _ = model.step(state, drives, dt, dw_i, dw_q)
    return new


@dataclass
class FullTrajectory:
    t_out: np.ndarray
    qubit_rhos: np.ndarray     # (n_out, 4, 4) reduced qubit states
    record: MeasurementRecord | None
    leakage: np.ndarray
    final: FullState
    sys: SystemParams
    seed: int | None


def simulate_full(
    sys: SystemParams,
    drives: tuple[DriveEnvelope, DriveEnvelope],
    seed: int | None = None,
    dt: float = 2e-5,
    dt_out: float = 1e-2,
    n_fock: int = 8,
    unconditioned: bool = False,
    leak_threshold: float = 1e-5,
    subtract_offsets: bool = False,
) -> FullTrajectory:
    """Integrate the full qubit (x) cavity model from |++><++| (x) vacuum.

    With ``unconditioned=True`` the deterministic master equation is solved
    by RK4 (no record); otherwise Euler-Maruyama with heterodyne innovations
    emits the record.  ``subtract_offsets`` removes the deterministic
    semiclassical offsets from the record using the coherent-state solution,
    making it comparable with reduced-model records.
    """
    model = FullModel(sys, n_fock)
    env1, env2 = drives
    t_total = env1.t_total
    n = int(round(t_total / dt))
    stride = int(round(dt_out / dt))
    if stride < 1 or n % stride != 0:
        raise ValueError("dt_out must be a multiple of dt dividing the run length")
    t_nodes = dt * np.arange(n + 1)
    eps1 = np.asarray(env1(t_nodes), dtype=complex)
    eps2 = np.asarray(env2(t_nodes), dtype=complex)

    state = model.initial_state()
    n_out = n // stride + 1
    qubit_rhos = np.empty((n_out, 4, 4), dtype=complex)
    leak = np.empty(n_out)
    qubit_rhos[0] = state.qubit_state()
    leak[0] = state.leakage()

    if unconditioned:
        rho = state.rho
        eps_mid1 = np.asarray(env1(t_nodes[:-1] + 0.5 * dt), dtype=complex)
        eps_mid2 = np.asarray(env2(t_nodes[:-1] + 0.5 * dt), dtype=complex)
        for k in range(n):
            k1 = model.lindblad_rhs(rho, eps1[k], eps2[k])
            k2 = model.lindblad_rhs(rho + 0.5 * dt * k1, eps_mid1[k], eps_mid2[k])
            k3 = model.lindblad_rhs(rho + 0.5 * dt * k2, eps_mid1[k], eps_mid2[k])
            k4 = model.lindblad_rhs(rho + dt * k3, eps1[k + 1], eps2[k + 1])
            rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if (k + 1) % stride == 0:
                state = FullState(rho, n_fock)
                if state.leakage() > leak_threshold:
                    raise NumericalAbort("Fock truncation leakage; increase n_fock")
                qubit_rhos[(k + 1) // stride] = state.qubit_state()
                leak[(k + 1) // stride] = state.leakage()
        return FullTrajectory(t_nodes[::stride], qubit_rhos, None, leak, state, sys, seed)

    rng = trajectory_rng(seed if seed is not None else 0)
    dw = math.sqrt(dt) * rng.standard_normal((2, n))
    di = np.empty(n)
    dq = np.empty(n)
    for k in range(n):
        state, di[k], dq[k] = model.step(
            state, (eps1[k], eps2[k]), dt, dw[0, k], dw[1, k], leak_threshold
        )
        if (k + 1) % stride == 0:
            qubit_rhos[(k + 1) // stride] = state.qubit_state()
            leak[(k + 1) // stride] = state.leakage()

    if subtract_offsets:
        traj1 = integrate_cavity(sys, 1, env1, dt)
        traj2 = integrate_cavity(sys, 2, env2, dt)
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        di -= inv_sqrt2 * (traj1.u.real[:n] + traj2.u.real[:n]) * dt
        dq -= -inv_sqrt2 * (traj1.u.imag[:n] - traj2.u.imag[:n]) * dt
    record = MeasurementRecord(dt, di, dq, dw=dw, meta={"seed": seed, "model": "full"})
    return FullTrajectory(t_nodes[::stride], qubit_rhos, record, leak, state, sys, seed)


def simulate_trajectory(
    sys: SystemParams,
    drives: tuple[DriveEnvelope, DriveEnvelope],
    seed: int,
    model: str = "reduced",
    **kwargs,
):
    """Dispatch to the reduced or full conditioned simulation."""
    if model == "reduced":
        return simulate_reduced(sys, drives, seed, **kwargs)
    if model == "full":
        return simulate_full(sys, drives, seed, **kwargs)
    raise ValueError("model must be 'reduced' or 'full'")
