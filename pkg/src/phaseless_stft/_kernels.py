"""RRR iteration backends.

The hot loop is a dense-operator fixed-point iteration; it carries a numba
@njit kernel with a pure-numpy fallback selected by the environment flag
PHASELESS_STFT_NO_NUMBA=1 (or automatically when numba is unavailable).
Both backends implement the identical update

    y <- y + beta * (P1(2 P2(y) - y) - P2(y)).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

__all__ = ["HAS_NUMBA", "numba_enabled", "rrr_iterate_numpy", "rrr_iterate_numba", "select_backend"]

_ENV_FLAG = "PHASELESS_STFT_NO_NUMBA"


def numba_enabled() -> bool:
    return HAS_NUMBA and os.environ.get(_ENV_FLAG, "") not in ("1", "true", "yes")


def _project_magnitudes_numpy(z: np.ndarray, mask: np.ndarray, measured: np.ndarray) -> np.ndarray:
    out = z.copy()
    vals = out[mask]
    mags = np.abs(vals)
    phases = np.where(mags > 0.0, vals / np.where(mags > 0.0, mags, 1.0), 1.0 + 0j)
    out[mask] = phases * measured
    return out


def rrr_iterate_numpy(A, Ah, Dinv, mask, measured, y0, beta, tol, max_iter, real_mode):
    """Pure-numpy backend; returns (y, iterations, converged, final_step_ratio)."""
    y = y0.astype(np.complex128, copy=True)
    ratio = np.inf
    for t in range(max_iter):
        z = _project_magnitudes_numpy(y, mask, measured)
        u = 2.0 * z - y
        g = Ah @ u
        xh = (Dinv * g.real).astype(np.complex128) if real_mode else Dinv * g
        p = A @ xh
        dy = beta * (p - z)
        ny = float(np.linalg.norm(y))
        y = y + dy
        ratio = float(np.linalg.norm(dy) / ny) if ny > 0.0 else 0.0
        if not np.isfinite(ratio):
            return y, t + 1, False, ratio
        if ratio < tol:
            return y, t + 1, True, ratio
    return y, max_iter, False, ratio


@njit(cache=True)
def _rrr_loop_numba(A, Ah, Dinv, mask, measured, y, beta, tol, max_iter, real_mode):
    M = A.shape[0]
    ratio = np.inf
    for t in range(max_iter):
        z = y.copy()
        for i in range(mask.shape[0]):
            k = mask[i]
            az = abs(z[k])
            if az > 0.0:
                z[k] = z[k] / az * measured[i]
            else:
                z[k] = measured[i] + 0j
        u = 2.0 * z - y
        g = Ah @ u
        if real_mode:
            xh = (Dinv * np.real(g)).astype(np.complex128)
        else:
            xh = Dinv * g
        p = A @ xh
        ndy = 0.0
        ny = 0.0
        for k in range(M):
            d = beta * (p[k] - z[k])
            ndy += d.real * d.real + d.imag * d.imag
            ny += y[k].real * y[k].real + y[k].imag * y[k].imag
            y[k] = y[k] + d
        ratio = np.sqrt(ndy / ny) if ny > 0.0 else 0.0
        if not np.isfinite(ratio):
            return y, t + 1, False, ratio
        if ratio < tol:
            return y, t + 1, True, ratio
    return y, max_iter, False, ratio


def rrr_iterate_numba(A, Ah, Dinv, mask, measured, y0, beta, tol, max_iter, real_mode):
    """Numba backend wrapper (same contract as rrr_iterate_numpy)."""
    y = y0.astype(np.complex128, copy=True)
    return _rrr_loop_numba(
        np.ascontiguousarray(A),
        np.ascontiguousarray(Ah),
        np.ascontiguousarray(Dinv),
        np.ascontiguousarray(mask, dtype=np.int64),
        np.ascontiguousarray(measured, dtype=np.float64),
        y,
        float(beta),
        float(tol),
        int(max_iter),
        bool(real_mode),
    )


def select_backend():
    """(name, callable) for the active backend."""
    if numba_enabled():
        return "numba", rrr_iterate_numba
    return "numpy", rrr_iterate_numpy
