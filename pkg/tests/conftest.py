"""Shared test helpers: the brute-force oracles the fast paths are checked against."""

from __future__ import annotations

import numpy as np
import pytest

from phaseless_stft.core import ProblemParams, SignalPair


def direct_forward(params: ProblemParams, pair: SignalPair) -> np.ndarray:
    """O(N^2 R) summation of the defining formula; the oracle for fft paths.

    Kernel sign follows the section-transform convention the whole package
    uses, under which |Y[m, r]|^2 samples the section intensity at
    e^{-2 pi i m / N} (the phase-reflected table has identical magnitudes).
    """
    N, W, L, R = params.N, params.W, params.L, params.R
    wf = np.zeros(N, dtype=np.complex128)
    wf[:W] = pair.w
    Y = np.zeros((N, R), dtype=np.complex128)
    for r in range(R):
        for m in range(N):
            acc = 0.0 + 0.0j
            for n in range(N):
                acc += pair.x[n] * wf[(r * L - n) % N] * np.exp(2j * np.pi * n * m / N)
            Y[m, r] = acc
    return Y


def intensity_direct(y: np.ndarray, omega: complex) -> float:
    """|yhat(omega)|^2 evaluated from the definition."""
    W = len(y)
    val = sum(y[n] * omega**n for n in range(W))
    return float(abs(val) ** 2)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
