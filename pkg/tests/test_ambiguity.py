import numpy as np
import pytest

from phaseless_stft.ambiguity import (
    AmbiguityElement,
    act,
    canonicalize,
    quotient_error,
    random_element,
    residual_twist,
    verify_invariance,
)
from phaseless_stft.core import SignalPair, make_params, random_pair, spawn_rng
from phaseless_stft.errors import ParameterError
from phaseless_stft.stft import forward, section

# geometries covering alpha = 1..8 including R = 1
GEOMETRIES = [(11, 3, 4), (12, 4, 4), (16, 5, 6), (27, 6, 6), (30, 7, 25),
              (18, 5, 12), (28, 8, 21), (32, 9, 24), (8, 2, 8)]


def test_identity_action(rng):
    p = make_params(12, 4, 3)
    pair = random_pair(p, "complex-gaussian", rng)
    out = act(AmbiguityElement.identity(p), pair, p)
    np.testing.assert_array_equal(out.x, pair.x)
    np.testing.assert_array_equal(out.w, pair.w)


def test_global_phase_action(rng):
    p = make_params(10, 3, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    g = AmbiguityElement(theta=np.pi, lam=np.ones(p.alpha), omega_index=0)
    out = act(g, pair, p)
    np.testing.assert_allclose(out.x, -pair.x, atol=1e-14)
    np.testing.assert_allclose(out.w, -pair.w, atol=1e-14)


def test_scaling_action_keeps_sections(rng):
    # alpha = 1, lambda = 2: x doubled, w halved, sections unchanged
    p = make_params(9, 3, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    g = AmbiguityElement(theta=0.0, lam=np.array([2.0 + 0j]), omega_index=0)
    out = act(g, pair, p)
    np.testing.assert_allclose(out.x, 2 * pair.x, atol=1e-14)
    np.testing.assert_allclose(out.w, pair.w / 2, atol=1e-14)
    for r in range(p.R):
        np.testing.assert_allclose(
            section(p, out, r).entries, section(p, pair, r).entries, atol=1e-12
        )


def test_action_rejects_zero_lambda(rng):
    p = make_params(9, 3, 2)
    with pytest.raises(ParameterError):
        AmbiguityElement(theta=0.0, lam=np.array([0.0 + 0j]), omega_index=0)


def test_invariance_random_sweep(rng):
    worst = 0.0
    for N, W, L in GEOMETRIES:
        p = make_params(N, W, L)
        for _ in range(4):
            pair = random_pair(p, "complex-gaussian", rng)
            g = random_element(p, rng)
            worst = max(worst, verify_invariance(g, pair, p))
    assert worst <= 1e-10


def test_invariance_zero_for_identity(rng):
    p = make_params(14, 4, 6)
    pair = random_pair(p, "complex-gaussian", rng)
    assert verify_invariance(AmbiguityElement.identity(p), pair, p) == 0.0


def test_non_group_perturbation_breaks_invariance(rng):
    # scaling x without compensating w is not a group move
    p = make_params(12, 4, 3)
    pair = random_pair(p, "complex-gaussian", rng)
    scaled = SignalPair(x=2.0 * pair.x, w=pair.w)
    Y0 = np.abs(forward(p, pair).values)
    Y1 = np.abs(forward(p, scaled).values)
    assert np.max(np.abs(Y1 - Y0)) / np.max(Y0) > 1e-3


def test_group_law(rng):
    for N, W, L in [(12, 4, 4), (15, 5, 6), (11, 3, 5)]:
        p = make_params(N, W, L)
        pair = random_pair(p, "complex-gaussian", rng)
        g1 = random_element(p, rng)
        g2 = random_element(p, rng)
        composed = AmbiguityElement(
            theta=g1.theta + g2.theta,
            lam=g1.lam * g2.lam,
            omega_index=(g1.omega_index + g2.omega_index) % p.R,
        )
        lhs = act(g1, act(g2, pair, p), p)
        rhs = act(composed, pair, p)
        np.testing.assert_allclose(lhs.x, rhs.x, atol=1e-12 * np.max(np.abs(rhs.x)))
        np.testing.assert_allclose(lhs.w, rhs.w, atol=1e-12 * np.max(np.abs(rhs.w)))


def test_group_direction_count_matches_ambiguity_dimension(rng):
    # perturbing each of the alpha+2 coordinates (theta, |lam_i|, common arg)
    # moves the pair but not |Y|; a random non-group direction moves |Y|
    p = make_params(12, 4, 4)  # alpha = 4
    pair = random_pair(p, "complex-gaussian", rng)
    eps = 1e-3
    directions = [AmbiguityElement(theta=eps, lam=np.ones(p.alpha), omega_index=0)]
    for i in range(p.alpha):
        lam = np.ones(p.alpha, dtype=np.complex128)
        lam[i] = 1.0 + eps
        directions.append(AmbiguityElement(theta=0.0, lam=lam, omega_index=0))
    directions.append(
        AmbiguityElement(theta=0.0, lam=np.full(p.alpha, np.exp(1j * eps)), omega_index=0)
    )
    assert len(directions) == p.alpha + 2
    for g in directions:
        moved = act(g, pair, p)
        assert np.linalg.norm(moved.x - pair.x) + np.linalg.norm(moved.w - pair.w) > 1e-6
        assert verify_invariance(g, pair, p) <= 1e-10


def test_canonicalize_known_window(rng):
    p = make_params(10, 4, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    form = canonicalize(pair, p, "known-window")
    pivot = form.pair.x[0] * form.pair.w[0]
    assert abs(pivot.imag) < 1e-12 and pivot.real > 0
    again = canonicalize(form.pair, p, "known-window")
    np.testing.assert_allclose(again.pair.x, form.pair.x, atol=1e-14)


def test_canonicalize_blind_constraints_and_idempotence(rng):
    for N, W, L in [(12, 4, 4), (15, 5, 3), (11, 4, 2)]:
        p = make_params(N, W, L)
        pair = random_pair(p, "complex-gaussian", rng)
        form = canonicalize(pair, p, "blind")
        np.testing.assert_allclose(form.pair.w[: p.alpha], 1.0, atol=1e-12)
        assert form.pair.x[0].real > 0 and abs(form.pair.x[0].imag) < 1e-12
        again = canonicalize(form.pair, p, "blind")
        np.testing.assert_allclose(again.pair.x, form.pair.x, atol=1e-10)
        np.testing.assert_allclose(again.pair.w, form.pair.w, atol=1e-10)


def test_canonicalize_blind_orbit_invariance(rng):
    for N, W, L in [(12, 4, 4), (10, 3, 2), (9, 4, 3)]:
        p = make_params(N, W, L)
        pair = random_pair(p, "complex-gaussian", rng)
        base = canonicalize(pair, p, "blind")
        for _ in range(5):
            g = random_element(p, rng)
            form = canonicalize(act(g, pair, p), p, "blind")
            np.testing.assert_allclose(form.pair.x, base.pair.x,
                                       atol=1e-9 * np.max(np.abs(base.pair.x)))
            np.testing.assert_allclose(form.pair.w, base.pair.w,
                                       atol=1e-9 * np.max(np.abs(base.pair.w)))


def test_canonicalize_rejects_zero_pivots(rng):
    p = make_params(8, 3, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    x = pair.x.copy()
    x[0] = 0.0
    with pytest.raises(ParameterError):
        canonicalize(SignalPair(x=x, w=pair.w), p, "blind")


def test_residual_twist_is_isometry_and_order_R(rng):
    p = make_params(12, 4, 4)
    pair = canonicalize(random_pair(p, "complex-gaussian", rng), p, "blind").pair
    twisted = residual_twist(pair, p, 1)
    np.testing.assert_allclose(np.abs(twisted.x), np.abs(pair.x), atol=1e-14)
    np.testing.assert_allclose(np.abs(twisted.w), np.abs(pair.w), atol=1e-14)
    back = pair
    for _ in range(p.R):
        back = residual_twist(back, p, 1)
    np.testing.assert_allclose(back.x, pair.x, atol=1e-12)


def test_quotient_error_known_window(rng):
    p = make_params(10, 3, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    assert quotient_error(pair, pair, p, "known-window") == 0.0
    rot = SignalPair(x=np.exp(0.7j) * pair.x, w=pair.w)
    assert quotient_error(rot, pair, p, "known-window") <= 1e-12
    real = random_pair(p, "real-gaussian", rng)
    neg = SignalPair(x=-real.x, w=real.w)
    assert quotient_error(neg, real, p, "known-window") <= 1e-12
    # for real truth a non-sign phase counts as error
    rot = SignalPair(x=np.exp(0.3j) * real.x, w=real.w)
    assert quotient_error(rot, real, p, "known-window") > 1e-2


def test_quotient_error_blind_orbit_zero(rng):
    for N, W, L in [(12, 4, 4), (10, 3, 2)]:
        p = make_params(N, W, L)
        pair = random_pair(p, "complex-gaussian", rng)
        for _ in range(5):
            g = random_element(p, rng)
            assert quotient_error(act(g, pair, p), pair, p, "blind") <= 1e-10


def test_quotient_error_blind_symmetric_pseudometric(rng):
    p = make_params(12, 4, 3)
    a = random_pair(p, "complex-gaussian", rng)
    b = random_pair(p, "complex-gaussian", rng)
    dab = quotient_error(a, b, p, "blind")
    dba = quotient_error(b, a, p, "blind")
    assert dab == pytest.approx(dba, abs=1e-12)
    assert dab > 1e-3  # independent draws are far apart


def test_quotient_error_zero_norm_truth(rng):
    p = make_params(8, 3, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    zero = SignalPair(x=np.zeros(8), w=pair.w)
    with pytest.raises(ParameterError):
        quotient_error(pair, zero, p, "known-window")
