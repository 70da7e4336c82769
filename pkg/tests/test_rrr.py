import os

import numpy as np
import pytest

from phaseless_stft import _kernels
from phaseless_stft.core import make_params, random_pair, spawn_rng
from phaseless_stft.errors import CoverageError, ParameterError
from phaseless_stft.rrr import (
    RrrConfig,
    project_magnitudes,
    project_range,
    recover_signal,
    rrr_solve,
)
from phaseless_stft.stft import apply_operator, forward, magnitudes, operator_matrix, random_mask


def test_config_validation():
    with pytest.raises(ParameterError):
        RrrConfig(beta=0.0)
    with pytest.raises(ParameterError):
        RrrConfig(tol=-1.0)
    with pytest.raises(ParameterError):
        RrrConfig(init="provided")
    assert RrrConfig().beta == 0.5 and RrrConfig().max_iter == 10_000


def test_project_range_fixes_range_vectors(rng):
    p = make_params(11, 4, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    z = apply_operator(p, pair.w, pair.x)
    np.testing.assert_allclose(project_range(p, pair.w, z), z, atol=1e-10 * np.linalg.norm(z))


def test_project_range_idempotent_and_self_adjoint(rng):
    p = make_params(10, 3, 4)
    w = random_pair(p, "complex-gaussian", rng).w
    M = p.grid_size
    u = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    v = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    Pu = project_range(p, w, u)
    np.testing.assert_allclose(project_range(p, w, Pu), Pu, atol=1e-10 * np.linalg.norm(Pu))
    lhs = np.vdot(v, Pu)
    rhs = np.vdot(project_range(p, w, v), u)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_project_range_annihilates_orthogonal_complement(rng):
    p = make_params(9, 3, 3)
    w = random_pair(p, "complex-gaussian", rng).w
    A = operator_matrix(p, w)
    q, _ = np.linalg.qr(A)
    z = rng.standard_normal(p.grid_size) + 1j * rng.standard_normal(p.grid_size)
    perp = z - q @ (q.conj().T @ z)
    out = project_range(p, w, perp)
    assert np.linalg.norm(out) <= 1e-9 * np.linalg.norm(z)


def test_project_magnitudes_behavior():
    z = np.array([3.0 + 4.0j, 0.0 + 0.0j, 1.0 + 0.0j])
    out = project_magnitudes(z, [0, 1], [10.0, 3.0])
    assert out[0] == pytest.approx((3 + 4j) * 2.0)   # phase kept, magnitude 10
    assert out[1] == pytest.approx(3.0 + 0j)         # sign(0) = 1 convention
    assert out[2] == z[2]
    np.testing.assert_array_equal(project_magnitudes(z, [], []), z)
    feas = project_magnitudes(z, [0], [5.0])
    np.testing.assert_allclose(feas[0], z[0], atol=1e-12)


def test_recover_signal_roundtrip(rng):
    p = make_params(11, 5, 3)
    pair = random_pair(p, "complex-gaussian", rng)
    z = apply_operator(p, pair.w, pair.x)
    np.testing.assert_allclose(recover_signal(p, pair.w, z), pair.x, atol=1e-10)
    # adding a range-orthogonal component does not change the least squares
    A = operator_matrix(p, pair.w)
    q, _ = np.linalg.qr(A)
    e = rng.standard_normal(p.grid_size) + 1j * rng.standard_normal(p.grid_size)
    e -= q @ (q.conj().T @ e)
    np.testing.assert_allclose(recover_signal(p, pair.w, z + e), pair.x, atol=1e-9)
    # random z matches the dense least-squares solution
    z = rng.standard_normal(p.grid_size) + 1j * rng.standard_normal(p.grid_size)
    dense, *_ = np.linalg.lstsq(A, z, rcond=None)
    np.testing.assert_allclose(recover_signal(p, pair.w, z), dense, atol=1e-9)


def test_recover_signal_coverage_error():
    p = make_params(8, 2, 4)
    with pytest.raises(CoverageError):
        recover_signal(p, np.ones(2), np.zeros(p.grid_size))


def test_feasible_start_halts_immediately(rng):
    p = make_params(11, 4, 2)
    pair = random_pair(p, "real-gaussian", rng)
    table = forward(p, pair)
    mask = [(m, r) for m in range(p.N) for r in range(p.R)]
    meas = magnitudes(table, mask)
    cfg = RrrConfig(init="provided", y0=table.flat, real_signal=True)
    out = rrr_solve(p, pair.w, mask, meas.magnitudes, cfg, truth=pair.x)
    assert out.iterations <= 2
    assert out.converged and out.success
    assert out.final_step_ratio < 1e-9


def test_rrr_deterministic(rng):
    p = make_params(11, 6, 1)
    pair = random_pair(p, "real-gaussian", spawn_rng(5))
    mask = random_mask(p, 66, spawn_rng(6))
    meas = magnitudes(forward(p, pair), mask)
    cfg = RrrConfig(real_signal=True)
    o1 = rrr_solve(p, pair.w, mask, meas.magnitudes, cfg, spawn_rng(7), truth=pair.x)
    o2 = rrr_solve(p, pair.w, mask, meas.magnitudes, cfg, spawn_rng(7), truth=pair.x)
    assert o1.iterations == o2.iterations
    np.testing.assert_array_equal(o1.x_hat, o2.x_hat)


def test_rrr_recovers_real_signal(rng):
    p = make_params(11, 8, 3)
    succ = 0
    for t in range(10):
        pair = random_pair(p, "real-gaussian", rng)
        mask = random_mask(p, 88, rng)
        meas = magnitudes(forward(p, pair), mask)
        out = rrr_solve(p, pair.w, mask, meas.magnitudes, RrrConfig(real_signal=True), rng,
                        truth=pair.x)
        succ += bool(out.success)
    assert succ >= 9


def test_rrr_backends_agree(rng):
    p = make_params(11, 5, 2)
    pair = random_pair(p, "real-gaussian", spawn_rng(42))
    mask = random_mask(p, 55, spawn_rng(43))
    meas = magnitudes(forward(p, pair), mask)
    cfg = RrrConfig(real_signal=True, max_iter=200)

    y0 = spawn_rng(44)
    out_auto = rrr_solve(p, pair.w, mask, meas.magnitudes, cfg, y0, truth=pair.x)
    os.environ["PHASELESS_STFT_NO_NUMBA"] = "1"
    try:
        out_np = rrr_solve(p, pair.w, mask, meas.magnitudes, cfg, spawn_rng(44), truth=pair.x)
    finally:
        del os.environ["PHASELESS_STFT_NO_NUMBA"]
    assert out_np.backend == "numpy"
    assert out_auto.iterations == out_np.iterations
    np.testing.assert_allclose(out_auto.x_hat, out_np.x_hat, atol=1e-9)


def test_fixed_point_soundness(rng):
    # both constraints satisfied => the update step is (near) zero
    p = make_params(11, 4, 2)
    pair = random_pair(p, "complex-gaussian", rng)
    table = forward(p, pair)
    mask = random_mask(p, 60, rng)
    flat = np.asarray([m * p.R + r for m, r in mask])
    meas = np.abs(table.flat[flat])
    y = table.flat
    range_resid = np.linalg.norm(project_range(p, pair.w, y) - y) / np.linalg.norm(y)
    mag_resid = np.linalg.norm(np.abs(y[flat]) - meas) / np.linalg.norm(meas)
    assert range_resid < 1e-10 and mag_resid < 1e-10
    cfg = RrrConfig(init="provided", y0=y)
    out = rrr_solve(p, pair.w, mask, meas, cfg, truth=None)
    assert out.final_step_ratio < 1e-9


def test_p2_preserves_measured_norm(rng):
    z = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    mask = np.arange(5)
    meas = np.abs(rng.standard_normal(5))
    out = project_magnitudes(z, mask, meas)
    assert np.linalg.norm(np.abs(out[mask])) == pytest.approx(np.linalg.norm(meas), rel=1e-12)


def test_backend_selector_env_flag():
    assert _kernels.select_backend()[0] in ("numba", "numpy")
    os.environ["PHASELESS_STFT_NO_NUMBA"] = "1"
    try:
        assert _kernels.select_backend()[0] == "numpy"
    finally:
        del os.environ["PHASELESS_STFT_NO_NUMBA"]
