"""Closed-form quantum filter for the balanced two-qubit joint measurement.

Given a heterodyne record integrated against the matched weight S(t),

    I_m(t) + i Q_m(t) = sqrt(2) * Int_0^t S(tau) [dI_r(tau) + i dQ_r(tau)],

and the deterministic accumulators

    Lambda(t) = Int_0^t S(tau)^2 dtau      (apparent information content),
    Theta_j(t) = Int_0^t Omega_j(tau) dtau (photon-induced phase),

all 15 two-qubit Bloch coordinates of the conditional state started from
|++><++| are known in closed form.  The coherences additionally carry the
factor exp(-|alpha_e - alpha_g|^2/2) per cavity for photons still in flight
(the purity dip that revives once the cavities empty), an efficiency factor
exp(-(1-eta)/eta * Lambda/2) for unobserved output, and exp(-Gamma_2 t) for
intrinsic qubit dephasing.

Everything involving exp(-Lambda) cosh(I_m) is evaluated in the log domain,
so records with |I_m|, Lambda of order 1e4 are handled without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from .cavity import SystemParams
from .states import TwoQubitState, rho_from_bloch
from .sme import MeasurementRecord

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class FilterState:
    """Sufficient statistics of the record up to time t.

    penalty_j is the instantaneous |alpha_e - alpha_g|^2 / 2 of pair j (not
    an integral): it equals Gamma_m^j/(2 eta_j kappa_j) and vanishes when the
    cavities have rung down.
    """

    t: float = 0.0
    lam: float = 0.0
    i_m: float = 0.0
    q_m: float = 0.0
    theta_1: float = 0.0
    theta_2: float = 0.0
    penalty_1: float = 0.0
    penalty_2: float = 0.0
    gamma2_t_1: float = 0.0
    gamma2_t_2: float = 0.0


def accumulate(
    fs: FilterState,
    di_r: float,
    dq_r: float,
    s: float,
    omega_1: float,
    omega_2: float,
    penalty_1: float,
    penalty_2: float,
    dt: float,
    gamma2_1: float = 0.0,
    gamma2_2: float = 0.0,
) -> FilterState:
    """Advance the filter by one record increment (matched-filter weighting).

    Requires the balanced, real measurement amplitude of resonant driving;
    a complex S is rejected.
    """
    if isinstance(s, complex) or isinstance(s, np.complexfloating):
        if abs(s.imag) > 1e-9 * (abs(s) + 1.0):
            raise ValueError("the analytic filter requires a real (balanced, resonant) S")
        s = s.real
    w = math.sqrt(2.0) * s
    return replace(
        fs,
        t=fs.t + dt,
        lam=fs.lam + s * s * dt,
        i_m=fs.i_m + w * di_r,
        q_m=fs.q_m + w * dq_r,
        theta_1=fs.theta_1 + omega_1 * dt,
        theta_2=fs.theta_2 + omega_2 * dt,
        penalty_1=penalty_1,
        penalty_2=penalty_2,
        gamma2_t_1=fs.gamma2_t_1 + gamma2_1 * dt,
        gamma2_t_2=fs.gamma2_t_2 + gamma2_2 * dt,
    )


@dataclass
class FilterSeries:
    """Filter state on every point of a uniform grid (vectorized accumulate)."""

    t: np.ndarray
    lam: np.ndarray
    i_m: np.ndarray
    q_m: np.ndarray
    theta_1: np.ndarray
    theta_2: np.ndarray
    penalty_1: np.ndarray
    penalty_2: np.ndarray
    gamma2_t_1: np.ndarray
    gamma2_t_2: np.ndarray

    def state_at(self, k: int) -> FilterState:
        return FilterState(
            t=float(self.t[k]),
            lam=float(self.lam[k]),
            i_m=float(self.i_m[k]),
            q_m=float(self.q_m[k]),
            theta_1=float(self.theta_1[k]),
            theta_2=float(self.theta_2[k]),
            penalty_1=float(self.penalty_1[k]),
            penalty_2=float(self.penalty_2[k]),
            gamma2_t_1=float(self.gamma2_t_1[k]),
            gamma2_t_2=float(self.gamma2_t_2[k]),
        )

    @property
    def final(self) -> FilterState:
        return self.state_at(len(self.t) - 1)


def integrate_record(
    record: MeasurementRecord,
    s: np.ndarray,
    omega_1: np.ndarray,
    omega_2: np.ndarray,
    penalty_1: np.ndarray,
    penalty_2: np.ndarray,
    sys: SystemParams | None = None,
) -> FilterSeries:
    """Run the matched filter over a whole record at once.

    ``s``, ``omega_j`` and ``penalty_j`` are node arrays (length n+1) on the
    record's grid; increments use left-endpoint values, matching the Ito
    convention of the emitting integrator.
    """
    n = record.n_steps
    dt = record.dt
    s_nodes = np.asarray(s)
    if np.abs(s_nodes.imag).max() > 1e-9 * (np.abs(s_nodes).max() + 1.0):
        raise ValueError("the analytic filter requires a real (balanced, resonant) S")
    s_left = s_nodes.real[:n]
    w = math.sqrt(2.0) * s_left

    t = dt * np.arange(n + 1)
    g2 = sys.gamma2 if sys is not None else (0.0, 0.0)
    return FilterSeries(
        t=t,
        lam=_cum(s_left * s_left * dt),
        i_m=_cum(w * record.di_r),
        q_m=_cum(w * record.dq_r),
        theta_1=_cum(np.asarray(omega_1)[:n] * dt),
        theta_2=_cum(np.asarray(omega_2)[:n] * dt),
        penalty_1=np.asarray(penalty_1, dtype=float).copy(),
        penalty_2=np.asarray(penalty_2, dtype=float).copy(),
        gamma2_t_1=g2[0] * t,
        gamma2_t_2=g2[1] * t,
    )


def _cum(increments: np.ndarray) -> np.ndarray:
    out = np.empty(increments.shape[0] + 1)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return out


# ---------------------------------------------------------------------------
# state reconstruction


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LN2


def _logsinh(ax):
    # for ax >= 0; returns -inf at 0, which exponentiates to the right limit
    with np.errstate(divide="ignore"):
        return ax + np.log1p(-np.exp(-2.0 * ax)) - _LN2


def bloch_coordinates(
    lam,
    i_m,
    q_m,
    theta_1,
    theta_2,
    penalty_1,
    penalty_2,
    gamma2_t_1,
    gamma2_t_2,
    eta_1: float,
    eta_2: float,
) -> np.ndarray:
    """The 15 conditional Bloch coordinates, stacked on the last axis.

    All record arguments broadcast; scalars give a (15,) vector.
    """
    lam = np.asarray(lam, dtype=float)
    i_m = np.asarray(i_m, dtype=float)
    q_m = np.asarray(q_m, dtype=float)
    theta_p = np.asarray(theta_1) + np.asarray(theta_2)
    theta_m = np.asarray(theta_1) - np.asarray(theta_2)

    eta_t = eta_1 * eta_2 / (eta_1 + eta_2 - eta_1 * eta_2)
    ln_es = -(
        np.asarray(penalty_1)
        + np.asarray(penalty_2)
        + (1.0 - eta_t) / eta_t * 0.5 * lam
        + np.asarray(gamma2_t_1)
        + np.asarray(gamma2_t_2)
    )
    ln_e1 = -(np.asarray(penalty_1) + (1.0 - eta_1) / eta_1 * 0.5 * lam + np.asarray(gamma2_t_1))
    ln_e2 = -(np.asarray(penalty_2) + (1.0 - eta_2) / eta_2 * 0.5 * lam + np.asarray(gamma2_t_2))

    # ln of the common denominator 1 + exp(-Lambda) cosh(I_m)
    big_l = _logcosh(i_m) - lam
    ln_den = np.logaddexp(big_l, 0.0)

    zz = np.tanh(0.5 * big_l)
    sgn = np.sign(i_m)
    zi = sgn * np.exp(_logsinh(np.abs(i_m)) - lam - ln_den)
    iz = zi  # equal by symmetry of the balanced joint measurement

    pair = np.exp(ln_es - lam - ln_den)       # exp(-Lambda) branch of the parity coherence
    flip = np.exp(ln_es - ln_den)             # record-phase branch
    xx = pair * np.cos(theta_p) + flip * np.cos(q_m - theta_m)
    xy = pair * np.sin(theta_p) + flip * np.sin(q_m - theta_m)
    yx = pair * np.sin(theta_p) - flip * np.sin(q_m - theta_m)
    yy = -pair * np.cos(theta_p) + flip * np.cos(q_m - theta_m)

    lch = _logcosh(0.5 * i_m)
    lsh = _logsinh(0.5 * np.abs(i_m))
    cosh1 = 2.0 * np.exp(ln_e1 - 0.5 * lam + lch - ln_den)
    sinh1 = 2.0 * sgn * np.exp(ln_e1 - 0.5 * lam + lsh - ln_den)
    cosh2 = 2.0 * np.exp(ln_e2 - 0.5 * lam + lch - ln_den)
    sinh2 = 2.0 * sgn * np.exp(ln_e2 - 0.5 * lam + lsh - ln_den)

    c1 = np.cos(0.5 * q_m - theta_1)
    s1 = np.sin(0.5 * q_m - theta_1)
    c2 = np.cos(0.5 * q_m + theta_2)
    s2 = np.sin(0.5 * q_m + theta_2)

    xi = cosh1 * c1
    yi = -cosh1 * s1
    ix = cosh2 * c2
    iy = cosh2 * s2
    xz = sinh1 * c1
    yz = -sinh1 * s1
    zx = sinh2 * c2
    zy = sinh2 * s2

    out = np.stack(
        np.broadcast_arrays(
            xi, yi, zi, ix, iy, iz, xx, xy, xz, yx, yy, yz, zx, zy, zz
        ),
        axis=-1,
    )
    return out


def bloch_from_filter(fs: FilterState, sys: SystemParams) -> TwoQubitState:
    """Reconstruct the conditional two-qubit state from filter accumulators.

    Raises if the reconstruction violates density-matrix invariants, which
    would signal a transcription bug rather than a physical regime.
    """
    e1, e2 = sys.eta_pair
    coords = bloch_coordinates(
        fs.lam, fs.i_m, fs.q_m, fs.theta_1, fs.theta_2,
        fs.penalty_1, fs.penalty_2, fs.gamma2_t_1, fs.gamma2_t_2, e1, e2,
    )
    return TwoQubitState(rho_from_bloch(coords))


def bloch_series_from_filter(series: FilterSeries, sys: SystemParams) -> np.ndarray:
    """Coordinates (n, 15) along a whole filtered record."""
    e1, e2 = sys.eta_pair
    return bloch_coordinates(
        series.lam, series.i_m, series.q_m, series.theta_1, series.theta_2,
        series.penalty_1, series.penalty_2, series.gamma2_t_1, series.gamma2_t_2,
        e1, e2,
    )


# ---------------------------------------------------------------------------
# concurrence and efficiency analysis


def concurrence_exact(state: TwoQubitState) -> float:
    """Wootters concurrence of an arbitrary two-qubit density matrix."""
    rho = state.rho
    yy = np.kron(
        np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]])
    )
    m = rho @ yy @ rho.conj() @ yy
    evals = np.linalg.eigvals(m).real
    lams = np.sqrt(np.clip(evals, 0.0, None))
    lams.sort()
    return max(0.0, float(lams[3] - lams[2] - lams[1] - lams[0]))


def concurrence_from_accumulators(
    lam, i_m, penalty_s, gamma2_s_t, eta_t: float
):
    """Strong-measurement concurrence from scalar accumulators (broadcasts).

    max(0, [exp((3 eta_t - 1)/eta_t * Lambda/2 - penalty - Gamma_2^s t) - 1]
           / (cosh I_m + exp Lambda)),  evaluated in the log domain.
    """
    lam = np.asarray(lam, dtype=float)
    g = (3.0 * eta_t - 1.0) / eta_t * 0.5 * lam - np.asarray(penalty_s) - np.asarray(gamma2_s_t)
    ln_den = np.logaddexp(_logcosh(np.asarray(i_m, dtype=float)), lam)
    c = np.exp(g - ln_den) - np.exp(-ln_den)
    return np.maximum(0.0, c)


def concurrence_filter(fs: FilterState, sys: SystemParams) -> float:
    """Strong-measurement concurrence directly from filter accumulators.

    Exact consequence of the reconstructed coordinates under the simplified
    two-qubit concurrence 2*max(0, |rho_ge,eg| - sqrt(p_gg p_ee)), which is
    accurate once the parity subspaces are well resolved.
    """
    return float(
        concurrence_from_accumulators(
            fs.lam,
            fs.i_m,
            fs.penalty_1 + fs.penalty_2,
            fs.gamma2_t_1 + fs.gamma2_t_2,
            sys.eta_t,
        )
    )


def efficiency_threshold(gamma2_s: float, t_m: float, lam: float) -> float:
    """Minimum combined efficiency eta_t for any entanglement to survive.

    Returns 1/3 for ideal qubits; grows with dephasing per measurement
    strength, and returns inf when 3 - 2*Gamma_2^s*T_m/Lambda <= 0
    (entanglement impossible at any efficiency).
    """
    if lam <= 0.0:
        raise ValueError("lam must be > 0")
    den = 3.0 - 2.0 * gamma2_s * t_m / lam
    if den <= 0.0:
        return math.inf
    return 1.0 / den


def _herald_concurrence(lam: float, sys: SystemParams, t_m: float) -> float:
    """Eq.-of-merit for strength optimization: I_m = 0, cavities empty."""
    fs = FilterState(
        t=t_m, lam=lam,
        gamma2_t_1=sys.gamma2[0] * t_m, gamma2_t_2=sys.gamma2[1] * t_m,
    )
    return concurrence_filter(fs, sys)


def optimal_lambda(
    sys: SystemParams, t_m: float, lam_max: float = 50.0, tol: float = 1e-8
) -> tuple[float, float]:
    """Measurement strength maximizing the heralded concurrence at fixed T_m.

    Golden-section search over Lambda in (0, lam_max] of the I_m = 0,
    completed-measurement concurrence.  Returns (nan, 0.0) when the
    objective is flat zero (efficiency at or below threshold); when the
    objective is still rising at lam_max the boundary value is returned.
    """
    lam_grid = np.linspace(lam_max / 400.0, lam_max, 400)
    vals = [_herald_concurrence(l, sys, t_m) for l in lam_grid]
    if max(vals) <= 0.0:
        return math.nan, 0.0
    k = int(np.argmax(vals))
    if k == len(vals) - 1:
        return float(lam_grid[-1]), float(vals[-1])
    lo = lam_grid[max(k - 1, 0)]
    hi = lam_grid[min(k + 1, len(vals) - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _herald_concurrence(c, sys, t_m)
    fd = _herald_concurrence(d, sys, t_m)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _herald_concurrence(c, sys, t_m)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _herald_concurrence(d, sys, t_m)
    lam_o = 0.5 * (a + b)
    return float(lam_o), float(_herald_concurrence(lam_o, sys, t_m))


# ---------------------------------------------------------------------------
# outcome statistics


@dataclass(frozen=True)
class OutcomeModel:
    """Distribution of the integrated outcomes at information content Lambda.

    I_m is a 1:2:1 mixture of normals at -2 Lambda, 0, +2 Lambda (the three
    z-parity sectors), each of variance 2 Lambda; Q_m is a zero-mean normal
    of the same variance.  Quantitative only in the strong-measurement
    regime, where the components are well separated.
    """

    lam: float

    @property
    def weights(self) -> tuple[float, float, float]:
        return (0.25, 0.5, 0.25)

    @property
    def means(self) -> tuple[float, float, float]:
        return (-2.0 * self.lam, 0.0, 2.0 * self.lam)

    @property
    def variance(self) -> float:
        return 2.0 * self.lam

    def pdf_i(self, x):
        sig = math.sqrt(self.variance)
        return sum(
            w * norm.pdf(x, mu, sig) for w, mu in zip(self.weights, self.means)
        )

    def pdf_q(self, x):
        return norm.pdf(x, 0.0, math.sqrt(self.variance))

    def component_window_probabilities(self, threshold: float) -> np.ndarray:
        """P(|I_m| < threshold) for each mixture component, in mean order."""
        sig = math.sqrt(self.variance)
        return np.array(
            [
                norm.cdf((threshold - mu) / sig) - norm.cdf((-threshold - mu) / sig)
                for mu in self.means
            ]
        )

    def herald_probability(self, threshold: float | None = None) -> float:
        """Total probability of the odd-parity herald window |I_m| < threshold."""
        thr = self.lam if threshold is None else threshold
        probs = self.component_window_probabilities(thr)
        return float(np.dot(self.weights, probs))

    def middle_component_purity(self, threshold: float | None = None) -> float:
        """Posterior weight of the odd-parity component given a herald."""
        thr = self.lam if threshold is None else threshold
        probs = self.component_window_probabilities(thr)
        joint = np.asarray(self.weights) * probs
        return float(joint[1] / joint.sum())


def outcome_distribution(lam: float) -> OutcomeModel:
    if lam <= 0.0:
        raise ValueError("lam must be > 0")
    return OutcomeModel(lam)


# ---------------------------------------------------------------------------
# most probable record


def most_probable_trajectory(
    q_m_target: float,
    s: np.ndarray,
    t: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Most probable raw record reaching the most probable entangled state.

    The I record is identically zero (zero innovation keeps <ZI> = 0 and
    drags <ZZ> monotonically to -1).  The Q record ramps linearly in the
    accumulated matched weight:

        Q_r(t) = Q'_m * Int_0^t S(tau) dtau / sigma^2,
        sigma^2 = sqrt(2) * Int_0^T S(tau)^2 dtau,

    with Q'_m the target reduced to (-pi, pi].  Running these records back
    through the matched filter lands exactly on (I_m, Q_m) = (0, Q'_m).

    Returns cumulative records (i_r, q_r) on the grid ``t``.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    dt = t[1] - t[0]
    lam_total = float(np.sum(s[:-1] ** 2) * dt)
    q_prime = math.remainder(q_m_target, 2.0 * math.pi)  # nearest representative
    if lam_total == 0.0:
        if q_prime != 0.0:
            raise ValueError("zero measurement amplitude cannot reach a nonzero Q_m")
        return np.zeros_like(t), np.zeros_like(t)
    sigma2 = math.sqrt(2.0) * lam_total
    cum_s = np.concatenate(([0.0], np.cumsum(s[:-1] * dt)))
    return np.zeros_like(t), q_prime * cum_s / sigma2
