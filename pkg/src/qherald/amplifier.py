"""Quantum-limited phase-preserving amplifier.

Frequency-dependent gain of a below-threshold non-degenerate parametric
amplifier, the high-gain time-local two-mode transform, and the statistics
of heterodyne detection of the amplified output.

All rates are angular frequencies in rad/us; use :meth:`AmplifierParams.from_mhz`
to enter laboratory "x/2pi in MHz" values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AmplifierParams:
    """Parameters of a two-port parametric amplifier below threshold.

    Attributes
    ----------
    kappa_si, kappa_id : float
        Signal / idler port coupling rates (rad/us), both > 0.
    lambda_mag : float
        Magnitude of the pump-induced conversion strength (rad/us).
        Must satisfy 4*lambda_mag**2 < kappa_si*kappa_id (below threshold).
    phi : float
        Pump phase in rad.  Zero by default: the relative phase between the
        idler and signal ports carries no physics here and is kept only for
        generality.
    """

    kappa_si: float
    kappa_id: float
    lambda_mag: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if self.kappa_si <= 0.0 or self.kappa_id <= 0.0:
            raise ValueError("port couplings kappa_si, kappa_id must be > 0")
        if self.lambda_mag < 0.0:
            raise ValueError("lambda_mag must be >= 0")
        if 4.0 * self.lambda_mag**2 >= self.kappa_si * self.kappa_id:
            raise ValueError(
                "amplifier at or above threshold: need 4*|lambda|^2 < kappa_si*kappa_id"
            )

    @classmethod
    def from_mhz(
        cls,
        kappa_si_over_2pi_mhz: float,
        kappa_id_over_2pi_mhz: float,
        lambda_over_2pi_mhz: float,
        phi: float = 0.0,
    ) -> "AmplifierParams":
        return cls(
            kappa_si=TWO_PI * kappa_si_over_2pi_mhz,
            kappa_id=TWO_PI * kappa_id_over_2pi_mhz,
            lambda_mag=TWO_PI * lambda_over_2pi_mhz,
            phi=phi,
        )

    @classmethod
    def from_gain(
        cls, gain: float, kappa_si: float, kappa_id: float, phi: float = 0.0
    ) -> "AmplifierParams":
        """Solve lambda_mag from a target power gain G >= 1."""
        if gain < 1.0:
            raise ValueError("power gain must be >= 1")
        sqrt_g = math.sqrt(gain)
        # invert sqrt(G) = (k k + 4 l^2)/(k k - 4 l^2)
        lam2 = 0.25 * kappa_si * kappa_id * (sqrt_g - 1.0) / (sqrt_g + 1.0)
        return cls(kappa_si, kappa_id, math.sqrt(lam2), phi)

    @property
    def kappa(self) -> float:
        """Total coupling rate."""
        return self.kappa_si + self.kappa_id

    @property
    def d_kappa(self) -> float:
        """Dimensionless coupling asymmetry, in [-1, 1]."""
        return (self.kappa_id - self.kappa_si) / self.kappa

    @property
    def sqrt_gain(self) -> float:
        """Amplitude gain sqrt(G) = |g(0)| >= 1."""
        prod = self.kappa_si * self.kappa_id
        lam4 = 4.0 * self.lambda_mag**2
        return (prod + lam4) / (prod - lam4)

    @property
    def gain(self) -> float:
        """Power gain G."""
        return self.sqrt_gain**2

    @property
    def bandwidth(self) -> float:
        """Amplification bandwidth D (rad/us)."""
        return (
            self.kappa_id
            * self.kappa_si
            / ((self.sqrt_gain + 1.0) * (self.kappa_id + self.kappa_si))
        )

    @property
    def eta_g(self) -> float:
        """Effective efficiency (G-1)/G of measuring only one output mode."""
        return (self.gain - 1.0) / self.gain


def gain_profile(params: AmplifierParams, omega):
    """Complex reflection gain g(omega) at detuning omega from resonance.

    ``omega`` may be a scalar or array (rad/us).  |g(0)| equals sqrt(G); the
    on-resonance phase is pi (full reflection), so g(0) = -sqrt(G).
    """
    w = np.asarray(omega, dtype=float) / params.bandwidth
    curv = 2.0 * (params.bandwidth / params.kappa) * w**2
    num = params.sqrt_gain - 1j * params.d_kappa * w + curv
    den = -1.0 - 1j * w + curv
    return num / den


def cross_gain(params: AmplifierParams, omega):
    """Cross (idler) gain h(omega) = e^{i phi} sqrt(|g|^2 - 1).

    Constructed so that |g|^2 - |h|^2 = 1 holds identically (the two-mode
    transform is a Bogoliubov transformation).
    """
    g2 = np.abs(gain_profile(params, omega)) ** 2
    # |g|^2 - 1 = (G-1)/|den|^2 >= 0 exactly; clip fp dust at the G=1 point
    return np.exp(1j * params.phi) * np.sqrt(np.maximum(g2 - 1.0, 0.0))


def two_mode_transform(params: AmplifierParams, a_si_in, a_id_in):
    """Time-local two-mode amplification of coherent amplitudes.

    Valid in the wide-bandwidth limit (inputs slowly varying on 1/D).  The
    cross term enters through the conjugated partner amplitude: that is the
    coherent-amplitude image of the conjugated-mode coupling, appropriate for
    an observer downstream of a unidirectional chain.
    """
    root_g = math.sqrt(params.gain)
    root_g1 = math.sqrt(params.gain - 1.0)
    ph = np.exp(1j * params.phi)
    a_si_out = root_g * np.asarray(a_si_in) + ph * root_g1 * np.conj(a_id_in)
    a_id_out = root_g * np.asarray(a_id_in) + ph * root_g1 * np.conj(a_si_in)
    return a_si_out, a_id_out


def heterodyne_increment(
    a_si_in_mean: complex,
    a_id_in_mean: complex,
    dt: float,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """One weak heterodyne measurement increment of duration dt.

    Both quadratures of the amplified signal output are sampled; in the
    high-gain limit (signal rescaled by 1/sqrt(G)) the outcomes are

        dI = sqrt(2) Re(a_si + a_id) dt + dW_I,
        dQ = sqrt(2) Im(a_si - a_id) dt + dW_Q,

    with independent Wiener increments of variance dt.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    root_dt = math.sqrt(dt)
    dw_i = root_dt * rng.standard_normal()
    dw_q = root_dt * rng.standard_normal()
    di = math.sqrt(2.0) * (a_si_in_mean + a_id_in_mean).real * dt + dw_i
    dq = math.sqrt(2.0) * (a_si_in_mean - a_id_in_mean).imag * dt + dw_q
    return di, dq


def apply_bandwidth_filter(params: AmplifierParams, dt: float, values) -> np.ndarray:
    """Causal first-order low-pass with corner at the amplification bandwidth.

    Next-to-leading-order correction to the time-local transform: input
    amplitude series are smoothed with an exponential kernel of rate D
    (unit DC gain).  Off by default everywhere; exposed for delay studies.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    x = np.asarray(values, dtype=complex)
    out = np.empty_like(x)
    decay = math.exp(-params.bandwidth * dt)
    y = 0.0 + 0.0j
    # exact update for piecewise-constant input
    for k in range(x.shape[0]):
        y = y * decay + (1.0 - decay) * x[k]
        out[k] = y
    return out
