"""Relaxed-reflect-reflect solver in the lifted measurement space.

The iterate y lives on the full (m, r) grid.  P1 = A A^dagger projects onto
the range of the STFT operator (the pseudo-inverse is cheap because the
frame operator A^H A is diagonal); P2 rescales the masked entries to the
measured magnitudes, keeping phases.  The update

    y <- y + beta (P1(2 P2 y - y) - P2 y)

halts only when both constraints hold, so the stopping rule is the relative
step size.  For a real ground truth the range is restricted to real signals
(P1 z = A Re(A^dagger z)), which leaves exactly the up-to-sign ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ambiguity import quotient_error
from .core import ProblemParams, SignalPair
from .errors import ParameterError
from .stft import (
    MATRIX_ENTRY_CAP,
    adjoint_operator,
    apply_operator,
    check_coverage,
    operator_matrix,
)

__all__ = [
    "RrrConfig",
    "RrrOutcome",
    "project_range",
    "project_magnitudes",
    "recover_signal",
    "rrr_solve",
]


@dataclass(frozen=True)
class RrrConfig:
    beta: float = 0.5
    tol: float = 1e-8
    max_iter: int = 10_000
    success_tol: float = 1e-4
    init: str = "random-gaussian"      # or "provided"
    y0: np.ndarray | None = None       # used when init == "provided"
    real_signal: bool = False          # restrict the range projector to real x

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError("beta must be in (0, 1]")
        if self.tol <= 0.0 or self.success_tol <= 0.0:
            raise ParameterError("tolerances must be positive")
        if self.init not in ("random-gaussian", "provided"):
            raise ParameterError(f"unknown init {self.init!r}")
        if self.init == "provided" and self.y0 is None:
            raise ParameterError("init='provided' needs y0")


@dataclass(frozen=True)
class RrrOutcome:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    final_step_ratio: float
    success: bool | None
    final_error: float | None
    backend: str


def recover_signal(params: ProblemParams, w, z, real_signal: bool = False) -> np.ndarray:
    """Least-squares signal from a lifted vector: x = A^dagger z."""
    d = check_coverage(params, np.asarray(w, dtype=np.complex128))
    g = adjoint_operator(params, w, z)
    if real_signal:
        return (g.real / d).astype(np.complex128)
    return g / d


def project_range(params: ProblemParams, w, z, real_signal: bool = False) -> np.ndarray:
    """Orthogonal projection onto {A x} (or {A x : x real})."""
    return apply_operator(params, w, recover_signal(params, w, z, real_signal))


def project_magnitudes(z, mask, measured) -> np.ndarray:
    """Rescale entries in the mask to the measured magnitudes, keeping phase.

    sign(0) is taken as 1 so a zero entry becomes the measured magnitude.
    """
    z = np.asarray(z, dtype=np.complex128).copy()
    mask = np.asarray(mask, dtype=np.int64)
    measured = np.asarray(measured, dtype=np.float64)
    if mask.shape != measured.shape:
        raise ParameterError("mask and measured magnitudes must align")
    vals = z[mask]
    mags = np.abs(vals)
    safe = np.where(mags > 0.0, mags, 1.0)
    phases = np.where(mags > 0.0, vals / safe, 1.0 + 0j)
    z[mask] = phases * measured
    return z


def _flat_mask(params: ProblemParams, mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim == 2 and arr.shape[1] == 2:
        flat = arr[:, 0] * params.R + arr[:, 1]
    else:
        flat = arr
    flat = flat.astype(np.int64)
    if flat.size and (flat.min() < 0 or flat.max() >= params.grid_size):
        raise ParameterError("mask indices outside the measurement grid")
    if np.unique(flat).size != flat.size:
        raise ParameterError("duplicate mask indices")
    return flat


def rrr_solve(
    params: ProblemParams,
    w,
    mask,
    measured,
    config: RrrConfig | None = None,
    rng: np.random.Generator | None = None,
    truth: np.ndarray | None = None,
) -> RrrOutcome:
    """Run RRR from a seeded random (or provided) start.

    `mask` may be flat grid indices or (m, r) pairs; `measured` holds the
    magnitudes in the same order.  When `truth` is given, success is judged
    by the quotient error (up to sign for real truth) against success_tol.
    """
    config = RrrConfig() if config is None else config
    w = np.asarray(w, dtype=np.complex128)
    d = check_coverage(params, w)
    flat = _flat_mask(params, mask)
    measured = np.asarray(measured, dtype=np.float64)
    if measured.shape != flat.shape:
        raise ParameterError("measured magnitudes must align with the mask")

    M = params.grid_size
    if config.init == "provided":
        y0 = np.asarray(config.y0, dtype=np.complex128)
        if y0.shape != (M,):
            raise ParameterError(f"y0 must have shape ({M},)")
    else:
        if rng is None:
            raise ParameterError("random initialization needs an rng")
        y0 = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) / np.sqrt(2.0)

    if M <= MATRIX_ENTRY_CAP:
        A = operator_matrix(params, w)
        Ah = np.conj(A.T)
        name, backend = _kernels.select_backend()
        y, iters, converged, ratio = backend(
            A, Ah, 1.0 / d, flat, measured, y0, config.beta, config.tol, config.max_iter, config.real_signal
        )
    else:
        name = "numpy-functional"
        y, iters, converged, ratio = _functional_iterate(params, w, d, flat, measured, y0, config)

    x_hat = recover_signal(params, w, y, config.real_signal)
    success = None
    err = None
    if truth is not None and np.all(np.isfinite(x_hat)):
        err = quotient_error(
            SignalPair(x=x_hat, w=w), SignalPair(x=np.asarray(truth), w=w), params, "known-window"
        )
        success = bool(err < config.success_tol)
    elif truth is not None:
        success = False
    return RrrOutcome(
        x_hat=x_hat,
        iterations=iters,
        converged=converged,
        final_step_ratio=ratio,
        success=success,
        final_error=err,
        backend=name,
    )


def _functional_iterate(params, w, d, flat, measured, y0, config):
    """FFT-based iteration for grids too large to materialize densely."""
    y = y0.copy()
    ratio = np.inf
    for t in range(config.max_iter):
        z = project_magnitudes(y, flat, measured)
        u = 2.0 * z - y
        g = adjoint_operator(params, w, u)
        xh = (g.real / d).astype(np.complex128) if config.real_signal else g / d
        p = apply_operator(params, w, xh)
        dy = config.beta * (p - z)
        ny = float(np.linalg.norm(y))
        y = y + dy
        ratio = float(np.linalg.norm(dy) / ny) if ny > 0.0 else 0.0
        if not np.isfinite(ratio):
            return y, t + 1, False, ratio
        if ratio < config.tol:
            return y, t + 1, True, ratio
    return y, config.max_iter, False, ratio
