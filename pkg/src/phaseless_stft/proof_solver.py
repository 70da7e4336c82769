"""Constructive recovery following the uniqueness arguments at desk scale.

Known window (Step 1): the 2W-1 magnitudes at sections 0 and alpha are
squared into intensity samples, interpolated to intensity profiles, and
spectrally factored; the 2^(W-1) x 2^(W-1) flip-candidate pairs are filtered
by the linear compatibility relations

    w[j+a] y_0[j] = w[j] y_a[j+a],   j = 0..W-1-a,

which also fix the relative phase.  The surviving class is phase-fixed by
making x[0]w[0] real positive and divided through by the window, yielding
x on [-W+1, a].  Step 2 then walks sections j*alpha, completing the a
unknown entries of each section vector from 4a-1 intensity samples.

Blind: three Step-1 blocks (sections 0, a, -a) feed a triple enumeration
filtered by the quadratic relations

    y_{-a}[l] y_a[l+a] = y_0[l] y_0[l+a],   l = 0..W-1-a,

the interleaved ladder recovers w fully and x on [-W+1-a, a] in the gauge
w[0..a) = 1, x[0] > 0, the same Step-2 recursion extends x, and one extra
block at a boundary-straddling section quantizes the leftover continuous
twist down to the Z_R ambiguity.

Both solvers finish with a short Gauss-Newton polish on the squared
magnitudes of exactly the consumed measurements; the polish is certified by
its residual, so wrong flip branches surface as failures, never as silently
wrong estimates.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import bounds
from .ambiguity import canonicalize
from .core import ProblemParams, SignalPair, random_pair, shift_index
from .errors import AmbiguousError, ParameterError, RecoveryError
from .intensity import (
    enumerate_flips,
    factor_profile,
    profile_from_samples,
    profile_of,
    recover_with_known_entries,
)
from .stft import MeasurementSet, forward, magnitudes

__all__ = [
    "RecoveryResult",
    "recover_known_window",
    "recover_blind",
    "verify_proposition_A",
    "verify_proposition_B",
    "relation_pair_classes",
    "relation_triple_classes",
    "PropositionReport",
]

RELATION_RTOL = 1e-6       # Eq-compatibility residual, relative
SEPARATION_TOL = 1e-4      # below this phase-aligned distance, candidates merge
PIVOT_RTOL = 1e-10         # recursion pivot |x[a] w[a]| threshold
STEP_RTOL = 1e-5           # per-stage completion residual: catches wrong
                           # branches (O(1)) while tolerating the error
                           # amplification of the sequential recursion
POLISH_RTOL = 1e-8         # certified residual for the final polish
KNOWN_W_CAP = 12
BLIND_W_CAP = 10


@dataclass(frozen=True)
class RecoveryResult:
    estimate: SignalPair
    status: str                    # unique | ambiguous | failed
    relation_residual: float
    steps_used: int
    measurements_used: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "status": self.status,
                "relation_residual": self.relation_residual,
                "steps_used": self.steps_used,
                "measurements_used": self.measurements_used,
                "x_re": self.estimate.x.real.tolist(),
                "x_im": self.estimate.x.imag.tolist(),
                "w_re": self.estimate.w.real.tolist(),
                "w_im": self.estimate.w.imag.tolist(),
            }
        )


def _require(meas: dict, indices) -> None:
    missing = [k for k in indices if k not in meas]
    if missing:
        raise ParameterError(f"measurement set is missing required indices, e.g. {missing[:4]}")


def _block_samples(params: ProblemParams, meas: dict, block, scale: float = 1.0):
    """(omega, squared magnitude / scale) pairs for a block of (m, r) indices."""
    oms = np.exp(-2j * np.pi * np.asarray([m for m, _ in block]) / params.N)
    return [(om, meas[k] ** 2 / scale) for om, k in zip(oms, block)]


def _block_profile(params: ProblemParams, meas: dict, block, W: int):
    return profile_from_samples(_block_samples(params, meas, block), W)


def _aligned_phase(target: np.ndarray, source: np.ndarray):
    """Unit phase rho and residual so that target ~ rho * source."""
    s = np.vdot(source, target)
    if abs(s) == 0.0:
        return 1.0 + 0j, np.inf
    rho = s / abs(s)
    denom = max(np.linalg.norm(target), np.linalg.norm(source), 1e-300)
    resid = float(np.linalg.norm(target - rho * source) / denom)
    return rho, resid


def _class_distance(v1: np.ndarray, v2: np.ndarray) -> float:
    """Phase-aligned distance between concatenated candidate vectors."""
    d2 = np.linalg.norm(v1) ** 2 + np.linalg.norm(v2) ** 2 - 2.0 * abs(np.vdot(v2, v1))
    scale = max(np.linalg.norm(v1), np.linalg.norm(v2), 1e-300)
    return float(np.sqrt(max(d2, 0.0)) / scale)


def relation_pair_classes(z0_cands, za_cands, w: np.ndarray, alpha: int, rtol: float = RELATION_RTOL):
    """Flip-candidate pairs compatible with the known-window linear relations.

    Returns phase-aligned [(z0, za, residual)] deduplicated modulo a common
    global phase.
    """
    w = np.asarray(w, dtype=np.complex128)
    W = w.size
    survivors = []
    for u0 in z0_cands:
        lhs = w[alpha:W] * u0[: W - alpha]
        for ua in za_cands:
            rhs = w[: W - alpha] * ua[alpha:W]
            rho, resid = _aligned_phase(lhs, rhs)
            if resid <= rtol:
                survivors.append((u0, rho * ua, resid))
    classes = []
    for u0, ua, resid in survivors:
        v = np.concatenate([u0, ua])
        for cls in classes:
            if _class_distance(v, cls[0]) <= SEPARATION_TOL:
                cls[2] = min(cls[2], resid)
                break
        else:
            classes.append([v, u0.size, resid])
    return [(v[:n], v[n:], res) for v, n, res in classes]


def relation_triple_classes(z0_cands, za_cands, zm_cands, alpha: int, rtol: float = RELATION_RTOL):
    """Flip-candidate triples compatible with the blind quadratic relations.

    Triples are gauged to z0[0] > 0, za[0] > 0 (consuming the two free
    angles) and deduplicated; each entry is (z0, za, zm, residual).
    """
    classes = []
    for u0 in z0_cands:
        W = u0.size
        rhs = u0[: W - alpha] * u0[alpha:W]
        for ua in za_cands:
            for um in zm_cands:
                lhs = um[: W - alpha] * ua[alpha:W]
                sigma, resid = _aligned_phase(rhs, lhs)
                if resid > rtol:
                    continue
                # gauge: z0[0] > 0 and za[0] > 0; zm absorbs the leftover phase
                pa = np.exp(-1j * np.angle(u0[0]))
                pb = np.exp(-1j * np.angle(ua[0]))
                # relation phase: e^{i(c + b - 2a)} = sigma with a, b the applied angles
                c = np.angle(sigma) + 2 * np.angle(pa) - np.angle(pb)
                trip = np.concatenate([pa * u0, pb * ua, np.exp(1j * c) * um])
                for cls in classes:
                    if _class_distance(trip, cls[0]) <= SEPARATION_TOL:
                        cls[1] = min(cls[1], resid)
                        break
                else:
                    classes.append([trip, resid])
    out = []
    for trip, resid in classes:
        W = trip.size // 3
        out.append((trip[:W], trip[W : 2 * W], trip[2 * W :], resid))
    return out


def _polish(params: ProblemParams, items, x0: np.ndarray, w0: np.ndarray, solve_w: bool):
    """Damped Gauss-Newton on the squared magnitudes of the consumed set.

    Returns the refined (x, w) and the certified relative residual.
    """
    idx = [k for k, _ in items]
    targets = np.asarray([v for _, v in items], dtype=np.float64) ** 2
    N, W = params.N, params.W

    def unpack(p: np.ndarray):
        x = p[:N] + 1j * p[N : 2 * N]
        if solve_w:
            w = p[2 * N : 2 * N + W] + 1j * p[2 * N + W :]
        else:
            w = w0
        return x, w

    def resid(p: np.ndarray) -> np.ndarray:
        x, w = unpack(p)
        Y = forward(params, SignalPair(x=x, w=w)).values
        got = np.asarray([abs(Y[m, r]) ** 2 for m, r in idx])
        return got - targets

    p0 = np.concatenate([x0.real, x0.imag] + ([w0.real, w0.imag] if solve_w else []))
    fit = least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400 * p0.size)
    x, w = unpack(fit.x)
    rel = float(np.linalg.norm(fit.fun) / max(np.linalg.norm(targets), 1e-300))
    return x, w, rel


def recover_known_window(
    measurements: MeasurementSet, w: np.ndarray, params: ProblemParams
) -> RecoveryResult:
    """Theorem-1 procedure: flip filtering at sections 0 and alpha, then the
    per-section Step-2 recursion.  Consumes exactly the prescribed index set."""
    w = np.asarray(w, dtype=np.complex128)
    N, W, a = params.N, params.W, params.alpha
    if W < 2:
        raise ParameterError("known-window recovery needs W >= 2")
    if W > KNOWN_W_CAP:
        raise ParameterError(f"W={W} above the solver cap {KNOWN_W_CAP}")
    if N < 2 * W - 1:
        raise ParameterError("Step 1 needs N >= 2W-1 distinct frequencies")
    if w.shape != (W,) or np.any(np.abs(w) < 1e-12 * np.max(np.abs(w))):
        raise ParameterError("window entries must all be nonzero")

    blocks = bounds.known_window_blocks(params)
    required = [k for _, _, block in blocks for k in block]
    meas = measurements.as_dict()
    _require(meas, required)
    failed = SignalPair(x=np.zeros(N), w=w)

    prof0 = _block_profile(params, meas, blocks[0][2], W)
    profa = _block_profile(params, meas, blocks[1][2], W)
    try:
        cands0 = enumerate_flips(factor_profile(prof0)).candidates
        candsa = enumerate_flips(factor_profile(profa)).candidates
    except (ParameterError, RecoveryError):
        return RecoveryResult(failed, "failed", np.inf, 1, 2 * (2 * W - 1))

    classes = relation_pair_classes(cands0, candsa, w, a)
    used = 2 * (2 * W - 1)
    if not classes:
        return RecoveryResult(failed, "failed", np.inf, 1, used)
    if len(classes) > 1:
        best = min(c[2] for c in classes)
        return RecoveryResult(failed, "ambiguous", best, 1, used)
    z0, za, resid = classes[0]

    # global phase: x[0]w[0] = z0[0] real positive
    phase = np.exp(-1j * np.angle(z0[0]))
    z0, za = phase * z0, phase * za

    x = np.full(N, np.nan, dtype=np.complex128)
    for j in range(W):
        x[(-j) % N] = z0[j] / w[j]
    for j in range(min(a, W)):
        x[(a - j) % N] = za[j] / w[j]

    steps = 1
    consumed = list(blocks[0][2]) + list(blocks[1][2])
    for _, j, block in blocks[2:]:
        samples = _block_samples(params, meas, block)
        known = {}
        S = []
        for n in range(W):
            xi = (j * a - n) % N
            if np.isnan(x[xi].real):
                S.append(n)
            else:
                known[n] = complex(x[xi] * w[n])
        try:
            y = recover_with_known_entries(samples, known, S, residual_rtol=STEP_RTOL)
        except RecoveryError:
            return RecoveryResult(failed, "failed", resid, steps, used)
        except AmbiguousError:
            return RecoveryResult(failed, "ambiguous", resid, steps, used)
        for n in S:
            x[(j * a - n) % N] = y[n] / w[n]
        used += len(block)
        steps += 1
        consumed += list(block)

    items = [((m, r), meas[(m, r)]) for m, r in consumed]
    x, _, polish_rel = _polish(params, items, x, w, solve_w=False)
    if not np.all(np.isfinite(x)) or polish_rel > POLISH_RTOL:
        return RecoveryResult(failed, "failed", max(resid, polish_rel), steps, used)
    pair = canonicalize(SignalPair(x=x, w=w), params, "known-window").pair
    return RecoveryResult(pair, "unique", resid, steps, used)


def _blind_ladder(z0, za, zm, params: ProblemParams):
    """Unwind w on [0, W) and x on [-W+1-a, a] from a gauged triple."""
    N, W, a = params.N, params.W, params.alpha
    x = np.full(N, np.nan, dtype=np.complex128)
    w = np.full(W, np.nan, dtype=np.complex128)
    w[:a] = 1.0
    for l in range(a):
        x[(-l) % N] = z0[l]
        x[(a - l) % N] = za[l]
    for n in range(a, W):
        prev = x[(a - n) % N]
        if abs(prev) < 1e-300:
            raise RecoveryError("ladder pivot vanished (non-generic instance)")
        w[n] = za[n] / prev
        if abs(w[n]) < 1e-300:
            raise RecoveryError("recovered window entry vanished")
        x[(-n) % N] = z0[n] / w[n]
    for n in range(W - a, W):
        x[(-a - n) % N] = zm[n] / w[n]
    return x, w


def _apply_boundary_twist(x, w, params: ProblemParams, psi: complex):
    """Twist by psi with the mixed index representatives used in recovery."""
    N, W, a = params.N, params.W, params.alpha
    boundary = N - W - a
    x = x.copy()
    w = w.copy()
    for rho in range(N):
        rep = rho if rho <= boundary else rho - N
        x[rho] *= psi ** int(np.ceil(rep / a))
    for n in range(W):
        w[n] *= psi ** (n // a)
    return x, w


def _pin_twist(params: ProblemParams, meas: dict, x, w) -> complex:
    """Unit phi = psi^{-R} aligning the estimate with a straddling block.

    The straddling section splits the estimate's section vector into a part u
    built from forward-chain entries and a part v from wraparound entries;
    the measured intensities are linear in (Re phi, Im phi), so two samples
    already determine phi, and psi up to an R-th root (which is exactly the
    Z_R ambiguity).
    """
    N, W, a = params.N, params.W, params.alpha
    jp = bounds.pin_section(params)
    rp = shift_index(params, jp)
    size = 4 * a - 1
    oms = np.exp(-2j * np.pi * np.arange(size) / N)
    vals = np.asarray([meas[(m, rp)] ** 2 for m in range(size)])
    boundary = N - W - a
    u = np.zeros(W, dtype=np.complex128)
    v = np.zeros(W, dtype=np.complex128)
    for n in range(W):
        xi = (jp * a - n) % N
        if xi > boundary:
            v[n] = x[xi] * w[n]
        else:
            u[n] = x[xi] * w[n]
    powers = oms[:, None] ** np.arange(W)[None, :]
    uh = powers @ u
    vh = powers @ v
    rhs = vals - np.abs(uh) ** 2 - np.abs(vh) ** 2
    c = np.conj(uh) * vh
    M = np.stack([2 * c.real, -2 * c.imag], axis=1)
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    phi = complex(sol[0], sol[1])
    if abs(abs(phi) - 1.0) > 1e-3:
        raise RecoveryError(f"pin solve produced non-unimodular twist |phi|={abs(phi):.6f}")
    return phi / abs(phi)


def recover_blind(measurements: MeasurementSet, params: ProblemParams) -> RecoveryResult:
    """Theorem-2 procedure plus the boundary pin block.

    Returns the estimate in the canonical gauge, defined up to the residual
    Z_R action.
    """
    N, W, a = params.N, params.W, params.alpha
    if W < 2:
        raise ParameterError("blind recovery needs W >= 2")
    if W > BLIND_W_CAP:
        raise ParameterError(f"W={W} above the solver cap {BLIND_W_CAP}")
    if N < 2 * W - 1:
        raise ParameterError("Step 1 needs N >= 2W-1 distinct frequencies")
    if W <= a:
        raise ParameterError("blind recovery needs W > alpha (pin section must exist)")

    required = bounds.blind_solver_measurement_set(params)
    meas = measurements.as_dict()
    _require(meas, required)
    failed = SignalPair(x=np.zeros(N), w=np.zeros(W))
    blocks = bounds.blind_blocks(params)

    try:
        cand = [
            enumerate_flips(factor_profile(_block_profile(params, meas, block, W))).candidates
            for _, _, block in blocks[:3]
        ]
    except (ParameterError, RecoveryError):
        return RecoveryResult(failed, "failed", np.inf, 1, 3 * (2 * W - 1))

    classes = relation_triple_classes(cand[0], cand[1], cand[2], a)
    used = 3 * (2 * W - 1)
    if not classes:
        return RecoveryResult(failed, "failed", np.inf, 1, used)
    if len(classes) > 1:
        best = min(c[3] for c in classes)
        return RecoveryResult(failed, "ambiguous", best, 1, used)
    z0, za, zm, resid = classes[0]

    steps = 1
    boundary = N - W - a
    try:
        x, w = _blind_ladder(z0, za, zm, params)
        consumed = [k for _, _, block in blocks[:3] for k in block]
        phi = None
        for _, j, block in blocks[3:]:
            straddles = j * a > boundary
            if straddles:
                # final block crosses the wraparound boundary: re-solve the
                # ladder's wrapped entries alongside the chain unknowns, then
                # read the leftover twist off the overlap (this block doubles
                # as the pin, extended to the full 4a-1 samples)
                r = block[0][1]
                block = block + [(m, r) for m in range(len(block), 4 * a - 1)]
            pivot = x[((j - 1) * a) % N] * w[a]
            if abs(pivot) <= PIVOT_RTOL * float(np.nanmax(np.abs(x))):
                raise RecoveryError("recursion pivot x[(j-1)a] w[a] vanished")
            samples = _block_samples(params, meas, block, scale=abs(pivot) ** 2)
            known = {}
            S = []
            saved: dict[int, complex] = {}
            for n in range(W):
                xi = (j * a - n) % N
                if straddles and xi > boundary:
                    saved[xi] = complex(x[xi])
                    S.append(n)
                elif np.isnan(x[xi].real):
                    S.append(n)
                else:
                    known[n] = complex(x[xi] * w[n] / pivot)
            y = recover_with_known_entries(samples, known, S, residual_rtol=STEP_RTOL)
            ratios = []
            for n in S:
                xi = (j * a - n) % N
                fresh = y[n] * pivot / w[n]
                if xi in saved:
                    if abs(saved[xi]) < 1e-300:
                        raise RecoveryError("pin overlap entry vanished")
                    # fresh continues the forward chain, saved came from the
                    # wraparound ladder; their ratio is the offset^R to undo
                    ratios.append(fresh / saved[xi])
                else:
                    x[xi] = fresh
            if ratios:
                phi = complex(np.mean(ratios))
                spread = float(np.max(np.abs(np.asarray(ratios) - phi)))
                if abs(abs(phi) - 1.0) > 1e-3 or spread > 1e-3:
                    raise RecoveryError("inconsistent twist at the wraparound overlap")
                phi /= abs(phi)
            used += len(block)
            steps += 1
            consumed += list(block)

        if phi is None:
            phi = _pin_twist(params, meas, x, w)
            rp = shift_index(params, bounds.pin_section(params))
            pin_block = [(m, rp) for m in range(4 * a - 1)]
            used += len(pin_block)
            steps += 1
            consumed += pin_block
        psi = np.exp(-1j * np.angle(phi) / params.R)
        x, w = _apply_boundary_twist(x, w, params, psi)
    except RecoveryError:
        return RecoveryResult(failed, "failed", resid, steps, used)
    except AmbiguousError:
        return RecoveryResult(failed, "ambiguous", resid, steps, used)

    items = [((m, r), meas[(m, r)]) for m, r in consumed]
    x, w, polish_rel = _polish(params, items, x, w, solve_w=True)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))) or polish_rel > POLISH_RTOL:
        return RecoveryResult(failed, "failed", max(resid, polish_rel), steps, used)
    try:
        pair = canonicalize(SignalPair(x=x, w=w), params, "blind").pair
    except ParameterError:
        return RecoveryResult(failed, "failed", resid, steps, used)
    return RecoveryResult(pair, "unique", resid, steps, used)


@dataclass(frozen=True)
class PropositionReport:
    trials: int
    unique_trials: int
    class_counts: tuple[int, ...]
    fixed_cases: dict

    @property
    def unique_fraction(self) -> float:
        return self.unique_trials / self.trials if self.trials else float("nan")


def verify_proposition_A(
    W: int, alpha: int, w: np.ndarray | None, trials: int, rng: np.random.Generator
) -> PropositionReport:
    """Brute-force check that generic relation-compatible pairs admit exactly
    one flip class (the Step-1 uniqueness statement)."""
    if not (2 <= W <= BLIND_W_CAP):
        raise ParameterError(f"need 2 <= W <= {BLIND_W_CAP}")
    if not 1 <= alpha < W:
        raise ParameterError("need 1 <= alpha < W")
    counts = []
    unique = 0
    for _ in range(trials):
        wv = (
            np.asarray(w, dtype=np.complex128)
            if w is not None
            else (rng.standard_normal(W) + 1j * rng.standard_normal(W)) / np.sqrt(2)
        )
        # Lemma parametrization: any x slice gives a pair on the relation subspace
        xs = (rng.standard_normal(W + alpha) + 1j * rng.standard_normal(W + alpha)) / np.sqrt(2)
        # xs holds x[alpha], x[alpha-1], ..., x[-W+1]
        y0 = np.array([xs[alpha + j] * wv[j] for j in range(W)])
        ya = np.array([xs[j] * wv[j] for j in range(W)])
        classes = relation_pair_classes(
            enumerate_flips(y0).candidates, enumerate_flips(ya).candidates, wv, alpha
        )
        counts.append(len(classes))
        unique += len(classes) == 1

    fixed = {}
    from .intensity import appendix_test_vectors

    for kind in ("A-first", "A-second"):
        z0, za, wv = appendix_test_vectors(kind, W, alpha, w=w, rng=rng)
        classes = relation_pair_classes(
            enumerate_flips(z0).candidates, enumerate_flips(za).candidates, wv, alpha
        )
        fixed[kind] = len(classes)
    return PropositionReport(trials, unique, tuple(counts), fixed)


def verify_proposition_B(W: int, alpha: int, trials: int, rng: np.random.Generator) -> PropositionReport:
    """Brute-force check over flip triples with the quadratic relations."""
    if not (3 <= W <= 8):
        raise ParameterError("need 3 <= W <= 8")
    if not 1 <= alpha < W:
        raise ParameterError("need 1 <= alpha < W")
    counts = []
    unique = 0
    for _ in range(trials):
        wv = (rng.standard_normal(W) + 1j * rng.standard_normal(W)) / np.sqrt(2)
        xs = (rng.standard_normal(W + 2 * alpha) + 1j * rng.standard_normal(W + 2 * alpha)) / np.sqrt(2)
        # xs holds x[alpha], ..., x[-W+1-alpha]
        y0 = np.array([xs[alpha + j] * wv[j] for j in range(W)])
        ya = np.array([xs[j] * wv[j] for j in range(W)])
        ym = np.array([xs[2 * alpha + j] * wv[j] for j in range(W)])
        classes = relation_triple_classes(
            enumerate_flips(y0).candidates,
            enumerate_flips(ya).candidates,
            enumerate_flips(ym).candidates,
            alpha,
        )
        counts.append(len(classes))
        unique += len(classes) == 1

    fixed = {}
    from .intensity import appendix_test_vectors

    for kind in ("B-triple", "B-allones"):
        try:
            z0, za, zm = appendix_test_vectors(kind, W, alpha, rng=rng)
        except ParameterError:
            fixed[kind] = None  # construction not defined at this (W, alpha)
            continue
        classes = relation_triple_classes(
            enumerate_flips(z0).candidates,
            enumerate_flips(za).candidates,
            enumerate_flips(zm).candidates,
            alpha,
        )
        fixed[kind] = len(classes)
    return PropositionReport(trials, unique, tuple(counts), fixed)
