"""Backend selection for the reduced-model trajectory kernel.

The compiled Cython extension integrates one trajectory at a time in a tight
C loop; the numpy fallback vectorizes the same arithmetic over a batch.
Either way the public entry point is :func:`run_reduced_em`, which accepts a
batch and dispatches.
"""

from __future__ import annotations

import numpy as np

from . import _reduced_py

try:
    from . import _reduced_kernel as _compiled
except ImportError:  # extension not built; numpy twin takes over
    _compiled = None

DEFAULT_BACKEND = "cython" if _compiled is not None else "numpy"


def available_backends() -> tuple[str, ...]:
    return ("cython", "numpy") if _compiled is not None else ("numpy",)


def run_reduced_em(
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
    backend: str | None = None,
):
    """Integrate a batch of reduced-model trajectories.

    rho0: (B, 4, 4) or (4, 4); dw: (B, 2, n) or (2, n).  Returns
    (snaps, di, dq) with a leading batch axis iff the inputs had one.
    """
    backend = backend or DEFAULT_BACKEND
    if backend not in available_backends():
        raise ValueError(f"backend {backend!r} not available")

    squeeze = rho0.ndim == 2
    rho_b = rho0[None] if squeeze else rho0
    dw_b = dw[None] if squeeze else dw

    coef = np.ascontiguousarray(coef, dtype=complex)
    c_i = np.ascontiguousarray(c_i, dtype=complex)
    c_q = np.ascontiguousarray(c_q, dtype=complex)

    if backend == "numpy":
        out = _reduced_py.em_run_batch(
            rho_b, coef, c_i, c_q, dw_b, dt, stride,
            gamma1=gamma1, gamma2=gamma2, relaxation=relaxation,
        )
    else:
        snaps, di, dq = [], [], []
        for b in range(rho_b.shape[0]):
            s, i, q = _compiled.em_run_single(
                np.ascontiguousarray(rho_b[b], dtype=complex),
                coef, c_i, c_q,
                np.ascontiguousarray(dw_b[b], dtype=float),
                dt, stride, gamma1, gamma2, relaxation,
            )
            snaps.append(s)
            di.append(i)
            dq.append(q)
        out = np.stack(snaps), np.stack(di), np.stack(dq)

    if squeeze:
        return out[0][0], out[1][0], out[2][0]
    return out
