"""Problem geometry, periodic indexing, and seeded instance generation.

A measurement geometry is a triple (N, W, L): signal length, window length,
and the step between short-time sections.  The shift granularity is
alpha = gcd(L, N) and there are R = N/alpha distinct sections.  All signal
indices are periodic modulo N; the window is zero outside [0, W).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import ParameterError

__all__ = [
    "ProblemParams",
    "SignalPair",
    "make_params",
    "mod_index",
    "random_pair",
    "shift_index",
    "spawn_rng",
    "derive_seed",
]


@dataclass(frozen=True)
class ProblemParams:
    """Measurement geometry (N, W, L) with derived alpha = gcd(L, N), R = N/alpha."""

    N: int
    W: int
    L: int
    alpha: int
    R: int

    @property
    def grid_size(self) -> int:
        """Number of entries in the full (m, r) measurement grid."""
        return self.N * self.R


@dataclass(frozen=True)
class SignalPair:
    """A signal x of length N (periodic) and a window w of length W."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.complex128))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=np.complex128))


def make_params(N: int, W: int, L: int) -> ProblemParams:
    """Validate (N, W, L) and derive alpha and R."""
    N, W, L = int(N), int(W), int(L)
    if N < 1 or W < 1 or L < 1:
        raise ParameterError(f"N, W, L must be positive, got ({N}, {W}, {L})")
    if W > N:
        raise ParameterError(f"window length W={W} exceeds signal length N={N}")
    if L > N:
        raise ParameterError(f"step L={L} exceeds signal length N={N}")
    alpha = gcd(L, N)
    return ProblemParams(N=N, W=W, L=L, alpha=alpha, R=N // alpha)


def mod_index(n: int | np.ndarray, N: int) -> int | np.ndarray:
    """Reduce a (possibly negative) index modulo N."""
    return n % N


def random_pair(params: ProblemParams, distribution: str, rng: np.random.Generator) -> SignalPair:
    """Draw an i.i.d. Gaussian signal/window pair.

    "complex-gaussian" draws real and imaginary parts i.i.d. N(0, 1/2) so that
    E|z|^2 = 1; "real-gaussian" draws N(0, 1) reals (imaginary parts zero).
    """
    if distribution == "complex-gaussian":
        def draw(n: int) -> np.ndarray:
            return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    elif distribution == "real-gaussian":
        def draw(n: int) -> np.ndarray:
            return rng.standard_normal(n).astype(np.complex128)
    else:
        raise ParameterError(f"unknown distribution {distribution!r}")
    return SignalPair(x=draw(params.N), w=draw(params.W))


def shift_index(params: ProblemParams, j: int) -> int:
    """The unique r in [0, R) with r*L = j*alpha (mod N).

    Solved with the modular inverse of L/alpha modulo R, which exists because
    gcd(L/alpha, R) = 1.
    """
    L_red = params.L // params.alpha
    inv = pow(L_red, -1, params.R)
    return (int(j) % params.R) * inv % params.R


def spawn_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Seeded generator; identical seeds give identical streams."""
    return np.random.default_rng(seed)


def derive_seed(*parts: int) -> np.random.SeedSequence:
    """Deterministic per-cell seed derivation from (global seed, coordinates)."""
    return np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFF for p in parts])
