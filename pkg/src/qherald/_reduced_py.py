"""Pure-numpy fallback for the reduced-model Euler-Maruyama kernel.

Same contract and same arithmetic as the compiled extension, vectorized over
a batch of trajectories.  Selected automatically when the extension is not
built; see :mod:`qherald.kernels`.
"""

from __future__ import annotations

import numpy as np

from .exceptions import NumericalAbort

_CHECK_EVERY = 256


def em_run_batch(
    rho0: np.ndarray,
    coef: np.ndarray,
    c_i: np.ndarray,
    c_q: np.ndarray,
    dw: np.ndarray,
    dt: float,
    stride: int,
    gamma1: float = 0.0,
    gamma2: float = 0.0,
    relaxation: bool = False,
):
    """Integrate a batch of reduced-model trajectories.

    Parameters
    ----------
    rho0 : (B, 4, 4) complex initial states.
    coef : (n, 4, 4) complex deterministic elementwise generator
        (frequency shifts + dephasing + relaxation decay), shared by the batch.
    c_i, c_q : (n, 4) complex diagonal innovation operators.
    dw : (B, 2, n) Wiener increments (variance dt).
    stride : snapshot stride; n must be divisible by it.

    Returns
    -------
    snaps : (B, n//stride + 1, 4, 4) states on the snapshot grid.
    di, dq : (B, n) emitted record increments.
    """
    b = rho0.shape[0]
    n = coef.shape[0]
    if n % stride != 0:
        raise ValueError("n must be divisible by the snapshot stride")
    rho = rho0.astype(complex).copy()
    snaps = np.empty((b, n // stride + 1, 4, 4), dtype=complex)
    di = np.empty((b, n))
    dq = np.empty((b, n))
    diag = np.arange(4)

    for k in range(n):
        if k % stride == 0:
            snaps[:, k // stride] = rho
        pops = rho[:, diag, diag].real  # Hermitian diagonal

        re_i = 2.0 * c_i[k].real
        re_q = 2.0 * c_q[k].real
        tr_i = pops @ re_i
        tr_q = pops @ re_q
        di[:, k] = tr_i * dt + dw[:, 0, k]
        dq[:, k] = tr_q * dt + dw[:, 1, k]

        drho = coef[k] * rho * dt
        if relaxation:
            if gamma1 != 0.0:
                drho[:, 2:, 2:] += (gamma1 * dt) * rho[:, :2, :2]
            if gamma2 != 0.0:
                drho[:, 1::2, 1::2] += (gamma2 * dt) * rho[:, ::2, ::2]

        h_i = (c_i[k][:, None] + c_i[k].conj()[None, :]) - tr_i[:, None, None]
        h_q = (c_q[k][:, None] + c_q[k].conj()[None, :]) - tr_q[:, None, None]
        rho = rho + drho + (h_i * rho) * dw[:, 0, k, None, None] + (
            h_q * rho
        ) * dw[:, 1, k, None, None]

        tr = rho[:, diag, diag].real.sum(axis=1)
        if k % _CHECK_EVERY == 0 and not (
            np.isfinite(tr).all() and (tr > 0.1).all()
        ):
            raise NumericalAbort(
                f"trace collapse or non-finite state at step {k}; reduce dt"
            )
        rho /= tr[:, None, None]

    snaps[:, n // stride] = rho
    return snaps, di, dq
