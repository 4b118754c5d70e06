"""Qubit-conditioned semiclassical cavity dynamics.

Each dispersively coupled qubit-cavity pair is described by a pair of
coherent amplitudes (alpha_e, alpha_g), one per qubit pointer state,
obeying linear equations of motion

    d(alpha_{e,g})/dt = -i eps(t) - i (Delta +/- chi/2 - i kappa/2) alpha_{e,g}.

From a trajectory we derive the measurement amplitude
S = sqrt(eta kappa) (alpha_e - alpha_g), the photon-induced qubit frequency
shift Omega = chi Re{alpha_g conj(alpha_e)}, the measurement-induced
dephasing rate Gamma_d = chi Im{alpha_g conj(alpha_e)}, the measurement rate
Gamma_m = |S|^2 and the record offset U = sqrt(eta kappa)(alpha_e + alpha_g).

`balanced_drive` synthesizes the drive of a second, dissimilar pair so that
its measurement amplitude matches the first pair's exactly, erasing
which-qubit information throughout the transients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .amplifier import TWO_PI
from .exceptions import NumericalAbort


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the two monitored qubit-cavity pairs.

    Rates are angular frequencies in rad/us except gamma1/gamma_phi which are
    plain decay rates in 1/us.  Index 0 <-> pair 1, index 1 <-> pair 2.

    Attributes
    ----------
    chi : dispersive shifts.
    kappa : output (monitored) couplings.
    kappa_in : weak input couplings; 0 by default (the small difference
        between kappa and kappa + kappa_in is usually absorbed elsewhere).
    delta : drive detunings.
    gamma1 : qubit relaxation rates 1/T1.
    gamma_phi : pure dephasing rates.
    etabar : transmission efficiencies of the two lines, in (0, 1].
    eta : detection efficiency of the amplification-readout chain, in (0, 1].
    gain : amplifier power gain G, or None for the infinite-gain limit.
        Measuring only one amplifier output costs eta_g = (G-1)/G on pair 2.
    """

    chi: tuple[float, float]
    kappa: tuple[float, float]
    kappa_in: tuple[float, float] = (0.0, 0.0)
    delta: tuple[float, float] = (0.0, 0.0)
    gamma1: tuple[float, float] = (0.0, 0.0)
    gamma_phi: tuple[float, float] = (0.0, 0.0)
    etabar: tuple[float, float] = (1.0, 1.0)
    eta: float = 1.0
    gain: float | None = None

    def __post_init__(self) -> None:
        for name in ("kappa", "kappa_in", "gamma1", "gamma_phi"):
            vals = getattr(self, name)
            if min(vals) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if min(self.kappa) <= 0.0:
            raise ValueError("kappa must be > 0")
        for name in ("etabar",):
            if not all(0.0 < v <= 1.0 for v in getattr(self, name)):
                raise ValueError(f"{name} must lie in (0, 1]")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.gain is not None and self.gain <= 1.0:
            raise ValueError("gain must be > 1 (or None for the ideal limit)")

    @classmethod
    def from_mhz(cls, chi_over_2pi_mhz, kappa_over_2pi_mhz, **kwargs) -> "SystemParams":
        extra = {}
        for key, val in kwargs.items():
            if key.endswith("_over_2pi_mhz"):
                extra[key[: -len("_over_2pi_mhz")]] = tuple(TWO_PI * v for v in val)
            else:
                extra[key] = val
        return cls(
            chi=tuple(TWO_PI * v for v in chi_over_2pi_mhz),
            kappa=tuple(TWO_PI * v for v in kappa_over_2pi_mhz),
            **extra,
        )

    @property
    def eta_g(self) -> float:
        return 1.0 if self.gain is None else (self.gain - 1.0) / self.gain

    @property
    def eta_pair(self) -> tuple[float, float]:
        """Per-pair measurement efficiencies (eta_1, eta_2)."""
        return (self.eta * self.etabar[0], self.eta_g * self.eta * self.etabar[1])

    @property
    def eta_t(self) -> float:
        """Combined two-pair measurement efficiency."""
        e1, e2 = self.eta_pair
        return e1 * e2 / (e1 + e2 - e1 * e2)

    @property
    def eta_s_kappa_s(self) -> float:
        """Harmonic combination: 1/(eta_s kappa_s) = sum_j 1/(eta_j kappa_j)."""
        e1, e2 = self.eta_pair
        return 1.0 / (1.0 / (e1 * self.kappa[0]) + 1.0 / (e2 * self.kappa[1]))

    @property
    def gamma2(self) -> tuple[float, float]:
        """Total qubit coherence decay rates Gamma_2 = Gamma_1/2 + Gamma_phi."""
        return (
            0.5 * self.gamma1[0] + self.gamma_phi[0],
            0.5 * self.gamma1[1] + self.gamma_phi[1],
        )

    @property
    def gamma2_sum(self) -> float:
        return sum(self.gamma2)


@dataclass
class DriveEnvelope:
    """Complex drive amplitude sampled on a uniform time grid.

    A callable form is kept when available (analytic shapes); otherwise
    off-grid evaluation falls back to a cubic spline through the samples.
    """

    t: np.ndarray
    values: np.ndarray
    shape: str = "samples"
    eps_m: float | None = None
    t_s: float | None = None
    t_e: float | None = None
    t_ramp: float | None = None
    _fn: Callable | None = field(default=None, repr=False)
    _spline: tuple | None = field(default=None, repr=False, init=False)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def t_total(self) -> float:
        return float(self.t[-1])

    def __call__(self, tau):
        if self._fn is not None:
            return self._fn(tau)
        if self._spline is None:
            re = CubicSpline(self.t, self.values.real)
            im = CubicSpline(self.t, self.values.imag)
            object.__setattr__(self, "_spline", (re, im))
        re, im = self._spline
        return re(tau) + 1j * im(tau)


def zero_envelope(t_total: float, dt: float) -> DriveEnvelope:
    n = int(round(t_total / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    return DriveEnvelope(t, np.zeros(n + 1, dtype=complex), shape="zero", _fn=lambda tau: np.zeros_like(np.asarray(tau, dtype=float)) + 0j)


def make_drive_envelope(
    eps_m: float,
    t_s: float,
    t_e: float,
    t_ramp: float,
    t_total: float,
    dt: float,
    shape: str = "rect_ramped",
) -> DriveEnvelope:
    """Rectangular drive with sin^2 ramps of duration t_ramp at both edges.

    The time integral of the envelope is eps_m * (t_e - t_s - t_ramp); each
    ramp contributes half a ramp time.
    """
    if shape != "rect_ramped":
        raise ValueError(f"unknown drive shape {shape!r}")
    if not (0.0 <= t_s < t_e <= t_total):
        raise ValueError("need 0 <= t_s < t_e <= t_total")
    if t_ramp < 0.0 or t_ramp >= 0.5 * (t_e - t_s):
        if t_ramp != 0.0:
            raise ValueError("need 0 <= t_ramp < (t_e - t_s)/2")

    def fn(tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        inside = (tau >= t_s) & (tau <= t_e)
        out[inside] = eps_m
        if t_ramp > 0.0:
            up = inside & (tau < t_s + t_ramp)
            out[up] = eps_m * np.sin(0.5 * np.pi * (tau[up] - t_s) / t_ramp) ** 2
            down = inside & (tau > t_e - t_ramp)
            out[down] = eps_m * np.sin(0.5 * np.pi * (t_e - tau[down]) / t_ramp) ** 2
        return out + 0j

    n = int(round(t_total / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    return DriveEnvelope(
        t, fn(t), shape=shape, eps_m=eps_m, t_s=t_s, t_e=t_e, t_ramp=t_ramp, _fn=fn
    )


@dataclass
class CavityTrajectory:
    """Coherent-state trajectory of one qubit-cavity pair and derived signals."""

    j: int
    t: np.ndarray
    alpha_e: np.ndarray
    alpha_g: np.ndarray
    s: np.ndarray        # measurement amplitude sqrt(eta_j kappa_j)(alpha_e - alpha_g)
    omega: np.ndarray    # photon-induced qubit frequency shift (rad/us)
    gamma_d: np.ndarray  # measurement-induced dephasing rate (may dip negative)
    u: np.ndarray        # record offset sqrt(eta_j kappa_j)(alpha_e + alpha_g)
    drive: DriveEnvelope

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def gamma_m(self) -> np.ndarray:
        """Measurement rate |S|^2."""
        return np.abs(self.s) ** 2

    @property
    def separation(self) -> np.ndarray:
        """|alpha_e - alpha_g|^2 / 2, the coherence penalty of photons in flight."""
        return 0.5 * np.abs(self.alpha_e - self.alpha_g) ** 2


def default_cavity_dt(sys: SystemParams, j: int) -> float:
    """Step small enough for the stability precondition at pair j."""
    jj = j - 1
    scales = [1.0 / sys.kappa[jj]]
    if sys.chi[jj] != 0.0:
        scales.append(1.0 / abs(sys.chi[jj]))
    return min(1e-3, 0.01 * min(scales))


def integrate_cavity(
    sys: SystemParams,
    j: int,
    drive: DriveEnvelope,
    dt: float | None = None,
) -> CavityTrajectory:
    """Integrate the pointer-state amplitudes of pair j from vacuum.

    Classic fixed-step fourth-order Runge-Kutta on a uniform grid covering
    the drive envelope's span.  The ODE is linear and non-stiff at the
    parameters of interest; dt must satisfy
    dt <= 0.01 * min(1/kappa_j, 1/|chi_j|).
    """
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    jj = j - 1
    if dt is None:
        dt = default_cavity_dt(sys, j)
    bound = 0.01 * min(
        1.0 / sys.kappa[jj],
        1.0 / abs(sys.chi[jj]) if sys.chi[jj] != 0.0 else np.inf,
    )
    if dt > bound * (1.0 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability bound {bound:.3e} for pair {j}")

    n = int(round(drive.t_total / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    ce = sys.delta[jj] + 0.5 * sys.chi[jj] - 0.5j * sys.kappa[jj]
    cg = sys.delta[jj] - 0.5 * sys.chi[jj] - 0.5j * sys.kappa[jj]

    # sample the drive once at nodes and midpoints
    eps_nodes = np.asarray(drive(t), dtype=complex)
    eps_mid = np.asarray(drive(t[:-1] + 0.5 * dt), dtype=complex)

    alpha_e = np.empty(n + 1, dtype=complex)
    alpha_g = np.empty(n + 1, dtype=complex)
    alpha_e[0] = 0.0
    alpha_g[0] = 0.0
    ae = 0.0 + 0.0j
    ag = 0.0 + 0.0j
    for k in range(n):
        e0, em, e1 = eps_nodes[k], eps_mid[k], eps_nodes[k + 1]

        k1e = -1j * (e0 + ce * ae)
        k1g = -1j * (e0 + cg * ag)
        k2e = -1j * (em + ce * (ae + 0.5 * dt * k1e))
        k2g = -1j * (em + cg * (ag + 0.5 * dt * k1g))
        k3e = -1j * (em + ce * (ae + 0.5 * dt * k2e))
        k3g = -1j * (em + cg * (ag + 0.5 * dt * k2g))
        k4e = -1j * (e1 + ce * (ae + dt * k3e))
        k4g = -1j * (e1 + cg * (ag + dt * k3g))

        ae = ae + (dt / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
        ag = ag + (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        alpha_e[k + 1] = ae
        alpha_g[k + 1] = ag

    if not (np.isfinite(alpha_e).all() and np.isfinite(alpha_g).all()):
        raise NumericalAbort(f"cavity integration for pair {j} produced non-finite amplitudes")

    root = math.sqrt(sys.eta_pair[jj] * sys.kappa[jj])
    cross = alpha_g * np.conj(alpha_e)
    return CavityTrajectory(
        j=j,
        t=t,
        alpha_e=alpha_e,
        alpha_g=alpha_g,
        s=root * (alpha_e - alpha_g),
        omega=sys.chi[jj] * cross.real,
        gamma_d=sys.chi[jj] * cross.imag,
        u=root * (alpha_e + alpha_g),
        drive=drive,
    )


def balanced_drive(
    traj1: CavityTrajectory,
    sys: SystemParams,
    j: int = 2,
    grid: np.ndarray | None = None,
) -> DriveEnvelope:
    """Drive for pair j that replicates pair 1's measurement amplitude.

    The difference variable D = alpha_e - alpha_g of a resonantly driven
    cavity obeys the exact second-order ODE

        D'' + kappa D' + ((kappa^2 + chi^2)/4) D = -chi eps(t),

    so forcing D_j(t) = S_1(t)/sqrt(eta_j kappa_j) determines eps_j(t) by
    inversion.  The required derivatives of the target are evaluated
    analytically through pair 1's equations of motion (never by finite
    differences), using pair 1's stored amplitudes and drive:

        D_1' = -i (chi_1/2) Sigma_1 - (kappa_1/2) D_1,
        D_1'' = -chi_1 eps_1 - kappa_1 D_1' - ((kappa_1^2 + chi_1^2)/4) D_1.

    Forward-integrating pair j with the returned envelope reproduces S_1 to
    the integrator tolerance; identical pair parameters and efficiencies give
    back eps_1 exactly.
    """
    jj = j - 1
    if sys.chi[jj] == 0.0:
        raise ValueError("chi_j = 0: the drive cannot steer the difference variable")
    if sys.delta[0] != 0.0 or sys.delta[jj] != 0.0:
        raise ValueError("balanced driving requires resonant drives (Delta = 0)")

    t = traj1.t if grid is None else np.asarray(grid, dtype=float)
    if grid is None:
        d1 = traj1.alpha_e - traj1.alpha_g
        sig1 = traj1.alpha_e + traj1.alpha_g
        eps1 = np.asarray(traj1.drive(t), dtype=complex)
    else:
        # resample the source trajectory; spline error is O(dt^4)
        d1 = _spline_eval(traj1.t, traj1.alpha_e - traj1.alpha_g, t)
        sig1 = _spline_eval(traj1.t, traj1.alpha_e + traj1.alpha_g, t)
        eps1 = np.asarray(traj1.drive(t), dtype=complex)

    if np.max(np.abs(d1)) == 0.0:
        return DriveEnvelope(t, np.zeros_like(d1), shape="balanced")

    k1, c1 = sys.kappa[0], sys.chi[0]
    kj, cj = sys.kappa[jj], sys.chi[jj]
    e1k1 = sys.eta_pair[0] * sys.kappa[0]
    ejkj = sys.eta_pair[jj] * sys.kappa[jj]
    ratio = math.sqrt(e1k1 / ejkj)

    d1dot = -0.5j * c1 * sig1 - 0.5 * k1 * d1
    d1ddot = -c1 * eps1 - k1 * d1dot - 0.25 * (k1**2 + c1**2) * d1
    eps_j = -ratio * (d1ddot + kj * d1dot + 0.25 * (kj**2 + cj**2) * d1) / cj

    return DriveEnvelope(
        t,
        eps_j,
        shape="balanced",
        eps_m=float(np.max(np.abs(eps_j))),
        t_s=traj1.drive.t_s,
        t_e=traj1.drive.t_e,
        t_ramp=traj1.drive.t_ramp,
    )


def _spline_eval(t, values, t_new):
    re = CubicSpline(t, values.real)
    im = CubicSpline(t, values.imag)
    return re(t_new) + 1j * im(t_new)
