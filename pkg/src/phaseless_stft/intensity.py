"""Fourier intensity functions of short vectors and their root-flip classes.

For y in C^W let yhat(omega) = y[0] + y[1] omega + ... + y[W-1] omega^{W-1}.
The intensity A_y(omega) = |yhat(omega)|^2 restricted to the unit circle is
the trigonometric polynomial sum_k a_k omega^k with Hermitian autocorrelation
coefficients a_k = sum_n y[n+k] conj(y[n]), k in [-(W-1), W-1].

If yhat has roots beta_1..beta_{W-1}, every vector with the same intensity is,
up to a global phase, obtained by replacing the roots in some subset I by
1/conj(beta_i) and rescaling the leading coefficient by prod_{i in I} |beta_i|.
Enumerating the 2^(W-1) subsets enumerates all candidates ("root flipping").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import AmbiguousError, ConditioningError, ParameterError, RecoveryError

__all__ = [
    "IntensityProfile",
    "RootProfile",
    "FlipCandidateSet",
    "profile_of",
    "profile_from_samples",
    "roots_of",
    "flip",
    "enumerate_flips",
    "factor_profile",
    "recover_with_known_entries",
    "appendix_test_vectors",
    "FLIP_ENUMERATION_CAP",
    "CONDITION_LIMIT",
]

FLIP_ENUMERATION_CAP = 12      # 2^(W-1) candidates are generated exhaustively
CONDITION_LIMIT = 1e8          # reject interpolation systems beyond this
RESIDUAL_RTOL = 1e-8           # "same intensity" tolerance, relative


@dataclass(frozen=True)
class IntensityProfile:
    """Autocorrelation a_k for k in [-(W-1), W-1], stored at index k + W - 1."""

    autocorr: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.autocorr, dtype=np.complex128)
        if a.size % 2 == 0:
            raise ParameterError("autocorrelation length must be odd (2W-1)")
        # enforce Hermitian symmetry a_{-k} = conj(a_k)
        sym = 0.5 * (a + np.conj(a[::-1]))
        object.__setattr__(self, "autocorr", sym)

    @property
    def W(self) -> int:
        return (self.autocorr.size + 1) // 2

    def evaluate(self, omegas: np.ndarray) -> np.ndarray:
        """Real values A(omega) at unit-circle points."""
        om = np.atleast_1d(np.asarray(omegas, dtype=np.complex128))
        ks = np.arange(-(self.W - 1), self.W)
        vals = np.sum(self.autocorr[None, :] * om[:, None] ** ks[None, :], axis=1)
        return np.real(vals)


@dataclass(frozen=True)
class RootProfile:
    """Leading/trailing coefficients and the W-1 polynomial roots of yhat."""

    leading: complex
    trailing: complex
    roots: np.ndarray


@dataclass(frozen=True)
class FlipCandidateSet:
    """All 2^(W-1) flip candidates of a vector, each defined up to phase."""

    candidates: tuple[np.ndarray, ...]


def profile_of(y: np.ndarray) -> IntensityProfile:
    """Aperiodic autocorrelation of y: a_k = sum_n y[n+k] conj(y[n])."""
    y = np.asarray(y, dtype=np.complex128)
    return IntensityProfile(autocorr=np.correlate(y, y, mode="full"))


def profile_from_samples(samples, W: int) -> IntensityProfile:
    """Interpolate the 2W-1 autocorrelation coefficients from intensity samples.

    `samples` is a sequence of (omega, value) with omega on the unit circle.
    The Hermitian constraint is enforced by solving the real-linear system in
    (a_0, Re a_k, Im a_k).  Needs at least 2W-1 distinct points; systems with
    condition number above CONDITION_LIMIT are rejected.
    """
    oms = np.asarray([om for om, _ in samples], dtype=np.complex128)
    vals = np.asarray([v for _, v in samples], dtype=np.float64)
    if W < 1:
        raise ParameterError("W must be positive")
    if oms.size < 2 * W - 1:
        raise ParameterError(f"need at least {2 * W - 1} samples, got {oms.size}")
    if oms.size > 1:
        gaps = np.abs(oms[:, None] - oms[None, :])[np.triu_indices(oms.size, k=1)]
        if float(np.min(gaps)) < 1e-12:
            raise ParameterError("sample points must be distinct")
    cols = [np.ones(oms.size)]
    for k in range(1, W):
        omk = oms**k
        cols += [2 * omk.real, -2 * omk.imag]
    M = np.stack(cols, axis=1)
    if M.shape[0] >= M.shape[1]:
        cond = np.linalg.cond(M)
        if cond > CONDITION_LIMIT:
            raise ConditioningError(f"interpolation condition number {cond:.3e} too large")
    sol, *_ = np.linalg.lstsq(M, vals, rcond=None)
    a = np.zeros(2 * W - 1, dtype=np.complex128)
    a[W - 1] = sol[0]
    for k in range(1, W):
        a[W - 1 + k] = sol[2 * k - 1] + 1j * sol[2 * k]
        a[W - 1 - k] = np.conj(a[W - 1 + k])
    return IntensityProfile(autocorr=a)


def roots_of(y: np.ndarray, lead_tol: float = 1e-10) -> RootProfile:
    """Roots of yhat via companion-matrix eigenvalues (numpy.roots)."""
    y = np.asarray(y, dtype=np.complex128)
    W = y.size
    scale = float(np.max(np.abs(y))) if W else 0.0
    if scale == 0.0 or abs(y[-1]) <= lead_tol * scale:
        raise ParameterError("leading coefficient y[W-1] is (near) zero")
    roots = np.roots(y[::-1]) if W > 1 else np.array([], dtype=np.complex128)
    return RootProfile(leading=complex(y[-1]), trailing=complex(y[0]), roots=roots)


def flip(root: complex) -> complex:
    """Reflect a root through the unit circle: 1/conj(root).  Involution."""
    if root == 0:
        raise ParameterError("cannot flip a zero root")
    return 1.0 / np.conj(root)


def enumerate_flips(y: np.ndarray) -> FlipCandidateSet:
    """All 2^(W-1) vectors sharing the intensity of y, one per root subset.

    Candidate for subset I has polynomial
        |y[W-1]| prod_{i in I} |beta_i| (omega - 1/conj(beta_i)) prod_{i not in I} (omega - beta_i),
    emitted with a real positive leading coefficient (the free global phase).
    """
    y = np.asarray(y, dtype=np.complex128)
    W = y.size
    if W > FLIP_ENUMERATION_CAP:
        raise ParameterError(f"W={W} above the flip enumeration cap {FLIP_ENUMERATION_CAP}")
    scale = float(np.max(np.abs(y)))
    if scale == 0.0 or abs(y[0]) <= 1e-12 * scale or abs(y[-1]) <= 1e-12 * scale:
        raise ParameterError("flip enumeration needs y[0], y[W-1] nonzero")
    if W == 1:
        return FlipCandidateSet(candidates=(np.array([abs(y[0])], dtype=np.complex128),))
    rp = roots_of(y)
    roots = rp.roots
    moduli = np.abs(roots)
    out = []
    for mask in range(2 ** (W - 1)):
        sel = np.array([(mask >> i) & 1 for i in range(W - 1)], dtype=bool)
        flipped = np.where(sel, 1.0 / np.conj(roots), roots)
        lead = abs(rp.leading) * float(np.prod(moduli[sel]))
        coeffs = np.poly(flipped)[::-1] * lead  # ascending powers
        out.append(coeffs)
    return FlipCandidateSet(candidates=tuple(out))


def factor_profile(profile: IntensityProfile) -> np.ndarray:
    """One spectral factor of an intensity profile.

    omega^{W-1} A(omega) is a degree 2W-2 polynomial whose roots come in
    reciprocal-conjugate pairs {beta, 1/conj(beta)}.  Pairs are matched
    greedily and the representative inside the closed unit disk is kept; the
    returned vector is scaled so its autocorrelation matches a_0.  Any flip
    class is acceptable here since callers enumerate flips afterwards.
    """
    a = profile.autocorr
    W = profile.W
    a0 = float(a[W - 1].real)
    if W == 1:
        return np.array([np.sqrt(max(a0, 0.0))], dtype=np.complex128)
    p = a[::-1]  # descending coefficients of omega^{W-1} A(omega)
    allroots = list(np.roots(p))
    chosen = []
    while allroots:
        g = allroots.pop(0)
        if not allroots:
            chosen.append(g)
            break
        target = 1.0 / np.conj(g) if g != 0 else np.inf
        dists = [abs(t - target) for t in allroots]
        h = allroots.pop(int(np.argmin(dists)))
        chosen.append(g if abs(g) <= 1.0 else h)
    q = np.poly(chosen)[::-1]
    nrm = np.linalg.norm(q)
    if nrm == 0.0 or a0 <= 0.0:
        raise RecoveryError("degenerate intensity profile cannot be factored")
    return q * (np.sqrt(a0) / nrm)


def _assemble(known: dict[int, complex], S, W: int) -> np.ndarray:
    y = np.zeros(W, dtype=np.complex128)
    for n, v in known.items():
        y[int(n)] = v
    return y


def _lifted_solve(oms, vals, known, S, W):
    """Linear solve in the lifted unknowns (u entries plus the lag
    autocorrelation of u restricted to S).

    With k the known part and u the unknown part (disjoint supports),
    A(om) = |k(om)|^2 + 2 Re(conj(khat) uhat) + |uhat(om)|^2; the last term is
    a trigonometric polynomial in the lags S - S.  That makes the samples
    linear in 2|S| + (2|S - S| - 1) real unknowns, which is 4|S| - 1 for a
    contiguous block, matching the per-stage sample budget exactly.
    """
    khat = np.zeros(oms.size, dtype=np.complex128)
    for n, v in known.items():
        khat += v * oms ** n
    lags = sorted({i - j for i in S for j in S if i > j})
    cols = []
    for s in S:
        c = np.conj(khat) * oms ** s
        cols += [2 * c.real, -2 * c.imag]
    cols.append(np.ones(oms.size))
    for d in lags:
        omd = oms ** d
        cols += [2 * omd.real, -2 * omd.imag]
    M = np.stack(cols, axis=1)
    rhs = vals - np.abs(khat) ** 2
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    u = sol[0 : 2 * len(S) : 2] + 1j * sol[1 : 2 * len(S) : 2]
    y = _assemble(known, S, W)
    y[np.asarray(S, dtype=int)] = u
    return y


def _flip_match(oms, vals, known, S, W, tol):
    """Interpolate the full profile, then pick the flip candidate whose
    phase-aligned known entries match."""
    prof = profile_from_samples(list(zip(oms, vals)), W)
    k_idx = np.asarray(sorted(known), dtype=int)
    k_vec = np.asarray([known[int(i)] for i in k_idx])
    k_norm = float(np.linalg.norm(k_vec))
    matches: list[np.ndarray] = []
    try:
        cands = enumerate_flips(factor_profile(prof)).candidates
    except (ParameterError, RecoveryError) as exc:
        raise RecoveryError(f"profile factorization failed: {exc}") from exc
    for cand in cands:
        ck = cand[k_idx]
        s = np.vdot(ck, k_vec)
        if abs(s) == 0.0:
            continue
        phase = s / abs(s)
        if np.linalg.norm(phase * ck - k_vec) > 1e-6 * max(k_norm, float(np.linalg.norm(ck))):
            continue
        y = phase * cand
        y[k_idx] = k_vec  # knowns are exact
        resid = float(np.max(np.abs(profile_of(y).evaluate(oms) - vals)))
        if resid > tol:
            continue
        if not any(np.linalg.norm(y - m) <= 1e-6 * max(np.linalg.norm(y), 1e-30) for m in matches):
            matches.append(y)
    if not matches:
        raise RecoveryError("no flip candidate matched the known entries")
    if len(matches) > 1:
        raise AmbiguousError(f"{len(matches)} flip candidates match the known entries")
    return matches[0]


def recover_with_known_entries(
    profile_samples,
    known: dict[int, complex],
    S,
    residual_rtol: float = RESIDUAL_RTOL,
) -> np.ndarray:
    """Complete a vector from intensity samples given all entries outside S.

    The lifted linear solve (|S| = 1: unknowns |u|^2, Re u, Im u; in general
    the u entries plus their restricted autocorrelation lags) is tried first
    and certified against the samples; if certification fails, a multistart
    Levenberg-Marquardt search takes over.  Raises RecoveryError when nothing
    meets the residual threshold and AmbiguousError when several
    well-separated completions do.
    """
    S = sorted(int(s) for s in S)
    known = {int(n): complex(v) for n, v in known.items()}
    W = len(S) + len(known)
    if set(known) | set(S) != set(range(W)) or set(known) & set(S):
        raise ParameterError("known entries and S must partition [0, W)")
    oms = np.asarray([om for om, _ in profile_samples], dtype=np.complex128)
    vals = np.asarray([v for _, v in profile_samples], dtype=np.float64)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    tol = residual_rtol * max(scale, 1e-30)

    def certified(y: np.ndarray) -> float:
        return float(np.max(np.abs(profile_of(y).evaluate(oms) - vals)))

    if not S:
        y = _assemble(known, S, W)
        if vals.size and certified(y) > tol:
            raise RecoveryError(f"samples inconsistent with known entries ({certified(y):.3e})")
        return y

    if 4 * len(S) - 1 > 2 * W - 1 and oms.size >= 2 * W - 1 and W <= FLIP_ENUMERATION_CAP:
        # the lift is rank-deficient (more lifted unknowns than observable
        # coefficients), but the block holds a full profile's worth of
        # samples: interpolate it and match flip candidates to the knowns
        return _flip_match(oms, vals, known, S, W, tol)

    y = _lifted_solve(oms, vals, known, S, W)
    if np.all(np.isfinite(y)) and certified(y) <= tol:
        return y
    if len(S) == 1:
        raise RecoveryError(f"lifted solve residual {certified(y):.3e} above threshold {tol:.3e}")

    # fallback: local nonlinear least squares, 16 deterministic multistarts
    base = _assemble(known, S, W)
    idxS = np.array(S, dtype=int)

    def resid_fn(p: np.ndarray) -> np.ndarray:
        yy = base.copy()
        yy[idxS] = p[: len(S)] + 1j * p[len(S):]
        return profile_of(yy).evaluate(oms) - vals

    start_scale = np.sqrt(max(scale, 1e-30)) / max(np.sqrt(W), 1.0)
    local = np.random.default_rng(0x5EED)
    solutions: list[np.ndarray] = []
    for _ in range(16):
        p0 = start_scale * local.standard_normal(2 * len(S))
        fit = least_squares(resid_fn, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if float(np.max(np.abs(fit.fun))) <= tol:
            u = fit.x[: len(S)] + 1j * fit.x[len(S):]
            if not any(np.linalg.norm(u - v) <= 1e-6 * max(np.linalg.norm(u), 1e-30) for v in solutions):
                solutions.append(u)
    if not solutions:
        raise RecoveryError("no completion met the residual threshold")
    if len(solutions) > 1:
        raise AmbiguousError(f"{len(solutions)} well-separated completions match the samples")
    y = base.copy()
    y[idxS] = solutions[0]
    return y


def _annulus(rng: np.random.Generator, n: int, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """Generic nonzero complex draws with moduli in [lo, hi]."""
    radii = rng.uniform(lo, hi, size=n)
    angles = rng.uniform(0.0, 2 * np.pi, size=n)
    return radii * np.exp(1j * angles)


def appendix_test_vectors(kind: str, W: int, alpha: int, w=None, rng: np.random.Generator | None = None):
    """The explicit worked vectors used in the uniqueness arguments.

    "A-first"/"A-second" return (z_0, z_alpha, w): an all-ones vector paired
    with a window-ratio vector completed by a generic tail.  "B-triple" and
    "B-allones" return (z_0, z_alpha, z_minus_alpha) triples satisfying the
    blind quadratic relations, with prescribed root locations (B-triple's
    z_minus_alpha has all roots strictly inside the unit circle; B-allones'
    z_alpha has all roots strictly outside).
    """
    if not 1 <= alpha < W:
        raise ParameterError("need 1 <= alpha < W")
    rng = np.random.default_rng(0) if rng is None else rng

    if kind in ("A-first", "A-second"):
        wv = _annulus(rng, W) if w is None else np.asarray(w, dtype=np.complex128)
        if wv.shape != (W,) or np.any(np.abs(wv) < 1e-12):
            raise ParameterError("window must have length W with nonzero entries")
        ratio_len = W - alpha
        tail = _annulus(rng, alpha)
        if kind == "A-first":
            # with z0 all ones the relations pin za on [alpha, W); the free
            # generic entries sit at the front
            z0 = np.ones(W, dtype=np.complex128)
            za = np.concatenate([tail, wv[alpha:] / wv[:ratio_len]])
        else:
            za = np.ones(W, dtype=np.complex128)
            z0 = np.concatenate([wv[:ratio_len] / wv[alpha:], tail])
        return z0, za, wv

    if kind == "B-triple":
        marks = {0, alpha, W - 1 - alpha, W - 1}
        if len(marks) != 4:
            raise ParameterError("B-triple needs indices 0, alpha, W-1-alpha, W-1 distinct")
        if W == 3 * alpha + 1:
            # z0[alpha] z0[2 alpha] would be nonzero while the left side vanishes
            raise ParameterError("B-triple is inconsistent with the quadratic relations when W = 3*alpha+1")
        zm = np.zeros(W, dtype=np.complex128)
        zm[0] = zm[W - 1 - alpha] = 0.25
        zm[W - 1] = 1.0
        za = np.zeros(W, dtype=np.complex128)
        za[list(marks)] = 4.0
        z0 = np.zeros(W, dtype=np.complex128)
        z0[list(marks)] = 1.0
        return z0, za, zm

    if kind == "B-allones":
        z0 = np.ones(W, dtype=np.complex128)
        zm = np.ones(W, dtype=np.complex128)
        za = np.ones(W, dtype=np.complex128)
        za[0] = float(W)  # any c > W-1 works
        return z0, za, zm

    raise ParameterError(f"unknown construction kind {kind!r}")
