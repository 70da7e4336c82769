"""Trivial ambiguity groups, their actions, canonical forms, and orbit metrics.

With a known window the only ambiguity is the global phase.  In the blind
case the group is G = S^1 x (C*)^alpha x Z_R acting by

    S^1:       (x, w) -> (e^{i theta} x, e^{i theta} w)
    (C*)^a:    x[n] -> lambda[n mod a] x[n],  w[n] -> lambda[(-n) mod a]^{-1} w[n]
    Z_R:       x[n] -> omega^{floor(n/a)} x[n],  w[n] -> omega^{ceil(n/a)} w[n]

with omega an R-th root of unity.  Every element leaves all |Y[m, r]|
unchanged; blind recovery is unique only modulo G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProblemParams, SignalPair
from .errors import ParameterError
from .stft import forward

__all__ = [
    "AmbiguityElement",
    "CanonicalForm",
    "act",
    "random_element",
    "verify_invariance",
    "canonicalize",
    "residual_twist",
    "quotient_error",
]


@dataclass(frozen=True)
class AmbiguityElement:
    """Element (theta, lambda, omega_index) of S^1 x (C*)^alpha x Z_R."""

    theta: float
    lam: np.ndarray
    omega_index: int

    def __post_init__(self) -> None:
        lam = np.asarray(self.lam, dtype=np.complex128)
        if np.any(np.abs(lam) < 1e-300):
            raise ParameterError("lambda entries must be nonzero")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def identity(cls, params: ProblemParams) -> "AmbiguityElement":
        return cls(theta=0.0, lam=np.ones(params.alpha, dtype=np.complex128), omega_index=0)


@dataclass(frozen=True)
class CanonicalForm:
    """Orbit representative: w[0..alpha) = 1 and x[0] real positive (blind),
    or x[0]w[0] real positive (known window)."""

    pair: SignalPair
    omega_index: int


def act(g: AmbiguityElement, pair: SignalPair, params: ProblemParams) -> SignalPair:
    """Apply the group action to (x, w)."""
    a = params.alpha
    if g.lam.shape != (a,):
        raise ParameterError(f"lambda must have length alpha={a}")
    if np.any(np.abs(g.lam) < 1e-300):
        raise ParameterError("lambda entries must be nonzero")
    n_x = np.arange(params.N)
    n_w = np.arange(params.W)
    omega = np.exp(-2j * np.pi * (g.omega_index % params.R) / params.R)
    phase = np.exp(1j * g.theta)
    x = phase * g.lam[n_x % a] * omega ** (n_x // a) * pair.x
    w = phase / g.lam[(-n_w) % a] * omega ** (-((-n_w) // a)) * pair.w
    return SignalPair(x=x, w=w)


def random_element(params: ProblemParams, rng: np.random.Generator) -> AmbiguityElement:
    """Random group element: uniform phase, annulus lambdas, uniform Z_R index."""
    radii = rng.uniform(0.5, 2.0, size=params.alpha)
    angles = rng.uniform(0.0, 2 * np.pi, size=params.alpha)
    return AmbiguityElement(
        theta=float(rng.uniform(0.0, 2 * np.pi)),
        lam=radii * np.exp(1j * angles),
        omega_index=int(rng.integers(0, params.R)),
    )


def verify_invariance(g: AmbiguityElement, pair: SignalPair, params: ProblemParams) -> float:
    """Max relative deviation of |Y| between pair and g(pair) over the grid."""
    Y0 = np.abs(forward(params, pair).values)
    Y1 = np.abs(forward(params, act(g, pair, params)).values)
    scale = float(np.max(Y0))
    if scale == 0.0:
        return float(np.max(np.abs(Y1)))
    return float(np.max(np.abs(Y1 - Y0)) / scale)


def _s_canonicalize(pair: SignalPair, params: ProblemParams) -> SignalPair:
    """The unique S^1 x (C*)^alpha representative with w[0..alpha) = 1 and
    x[0] real positive."""
    a = params.alpha
    if np.any(np.abs(pair.w[:a]) < 1e-300) or abs(pair.x[0]) < 1e-300:
        raise ParameterError("canonicalization needs w[0..alpha) and x[0] nonzero")
    # lam[0] = e^{i t} w[0], lam[j] = e^{i t} w[alpha - j]; e^{2 i t} w[0] x[0] > 0
    theta = -0.5 * np.angle(pair.w[0] * pair.x[0])
    lam = np.empty(a, dtype=np.complex128)
    lam[0] = np.exp(1j * theta) * pair.w[0]
    if a > 1:
        lam[1:] = np.exp(1j * theta) * pair.w[a - 1:0:-1]
    g = AmbiguityElement(theta=theta, lam=lam, omega_index=0)
    out = act(g, pair, params)
    # scrub float dust so the constraints hold exactly
    w = out.w.copy()
    w[:a] = 1.0
    x = out.x.copy()
    x[0] = abs(x[0])
    return SignalPair(x=x, w=w)


def residual_twist(pair: SignalPair, params: ProblemParams, k: int) -> SignalPair:
    """The Z_R twist induced on the w[0..alpha)=1, x[0]>0 slice.

    Applying the Z_R action and re-normalizing swaps the floor/ceil powers:
    x[n] -> omega^{ceil(n/alpha)} x[n], w[n] -> omega^{floor(n/alpha)} w[n].
    Entry magnitudes are untouched, so the twist is an isometry of the slice.
    """
    a = params.alpha
    omega = np.exp(-2j * np.pi * (k % params.R) / params.R)
    n_x = np.arange(params.N)
    n_w = np.arange(params.W)
    x = omega ** (-((-n_x) // a)) * pair.x
    w = omega ** (n_w // a) * pair.w
    return SignalPair(x=x, w=w)


def _lex_key(x: np.ndarray) -> tuple:
    return tuple(float(v) for pair in zip(x.real, x.imag) for v in pair)


def canonicalize(pair: SignalPair, params: ProblemParams, mode: str) -> CanonicalForm:
    """Deterministic orbit representative.

    Known window: rotate x so x[0]w[0] is real positive (w untouched).
    Blind: apply the unique S^1 x (C*)^alpha element giving w[0..alpha) = 1
    and x[0] > 0, then pick the Z_R twist whose x is lexicographically
    smallest in the (Re, Im) interleaved encoding.
    """
    if mode == "known-window":
        pivot = pair.x[0] * pair.w[0]
        if abs(pivot) < 1e-300:
            raise ParameterError("canonicalization needs x[0]w[0] nonzero")
        phase = np.exp(-1j * np.angle(pivot))
        return CanonicalForm(pair=SignalPair(x=phase * pair.x, w=pair.w), omega_index=0)
    if mode != "blind":
        raise ParameterError(f"unknown mode {mode!r}")
    base = _s_canonicalize(pair, params)
    best_k = 0
    best = base
    best_key = _lex_key(base.x)
    for k in range(1, params.R):
        cand = residual_twist(base, params, k)
        key = _lex_key(cand.x)
        if key < best_key:
            best_key, best, best_k = key, cand, k
    return CanonicalForm(pair=best, omega_index=best_k)


def quotient_error(
    estimate: SignalPair,
    truth: SignalPair,
    params: ProblemParams,
    mode: str = "known-window",
) -> float:
    """Relative error modulo the trivial ambiguity group.

    Known window: min over a unit phase of ||x_hat e^{i theta} - x|| / ||x||
    (closed form from the inner product); for real truth the minimum is over
    signs only, matching the up-to-a-sign convention.  Blind: both pairs are
    normalized to the canonical slice and the minimum combined error over the
    R residual twists is returned, scaled symmetrically.
    """
    if mode == "known-window":
        nt = float(np.linalg.norm(truth.x))
        if nt == 0.0:
            raise ParameterError("truth has zero norm")
        xe, xt = estimate.x, truth.x
        if np.max(np.abs(xt.imag)) <= 1e-12 * nt:
            err = min(np.linalg.norm(xe - xt), np.linalg.norm(xe + xt))
            return float(err / nt)
        inner = np.vdot(xe, xt)  # sum conj(xe) xt
        gram = np.linalg.norm(xe) ** 2 + nt**2 - 2.0 * abs(inner)
        return float(np.sqrt(max(gram, 0.0)) / nt)
    if mode != "blind":
        raise ParameterError(f"unknown mode {mode!r}")
    ce = _s_canonicalize(estimate, params)
    ct = _s_canonicalize(truth, params)
    den2 = 0.5 * (
        np.linalg.norm(ce.x) ** 2 + np.linalg.norm(ce.w) ** 2
        + np.linalg.norm(ct.x) ** 2 + np.linalg.norm(ct.w) ** 2
    )
    if den2 == 0.0:
        raise ParameterError("truth has zero norm")
    best = np.inf
    for k in range(params.R):
        twisted = residual_twist(ce, params, k)
        num2 = np.linalg.norm(twisted.x - ct.x) ** 2 + np.linalg.norm(twisted.w - ct.w) ** 2
        best = min(best, float(np.sqrt(num2 / den2)))
    return best
