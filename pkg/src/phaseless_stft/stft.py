"""Forward periodic STFT, section vectors, measurement masks, and the
operator-as-matrix view.

The table entry Y[m, r] is

    Y_{m,r} = sum_n x[n] w[rL - n] e^{-2 pi i n m / N},

computed per section as an N-point DFT of the zero-padded section vector
y_{rL}[n] = x[rL - n] w[n] times the phase e^{2 pi i m rL / N}.  The flat
layout of the (m, r) grid is C order, k = m*R + r, everywhere.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .core import ProblemParams, SignalPair
from .errors import CoverageError, ParameterError

__all__ = [
    "StftTable",
    "SectionVector",
    "MeasurementSet",
    "forward",
    "section",
    "magnitudes",
    "operator_matrix",
    "random_mask",
    "padded_window",
    "apply_operator",
    "adjoint_operator",
    "frame_weights",
    "check_coverage",
    "MATRIX_ENTRY_CAP",
]

# Dense operator materialization is capped; beyond this, apply functionally.
MATRIX_ENTRY_CAP = 2**16


@dataclass(frozen=True)
class StftTable:
    """Complex STFT values indexed by (m, r), m in [0, N), r in [0, R)."""

    values: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True)
class SectionVector:
    """Entries x[rL - n] * w[n], n in [0, W), with the shift rL mod N."""

    entries: np.ndarray
    shift: int


@dataclass(frozen=True)
class MeasurementSet:
    """Ordered (m, r) index pairs with aligned nonnegative magnitudes."""

    indices: tuple[tuple[int, int], ...]
    magnitudes: np.ndarray

    def __post_init__(self) -> None:
        idx = tuple((int(m), int(r)) for m, r in self.indices)
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if len(idx) != len(mags):
            raise ParameterError("indices and magnitudes lengths differ")
        if len(set(idx)) != len(idx):
            raise ParameterError("duplicate (m, r) pairs in measurement set")
        if np.any(mags < 0):
            raise ParameterError("magnitudes must be nonnegative")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "magnitudes", mags)

    def __len__(self) -> int:
        return len(self.indices)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(self.indices, self.magnitudes.tolist()))

    def _sorted_rows(self) -> list[tuple[int, int, float]]:
        # serialization fixes lexicographic (m, r) order
        order = sorted(range(len(self.indices)), key=lambda i: self.indices[i])
        return [(self.indices[i][0], self.indices[i][1], float(self.magnitudes[i])) for i in order]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "r", "magnitude"])
        for m, r, v in self._sorted_rows():
            writer.writerow([m, r, f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MeasurementSet":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["m", "r", "magnitude"]:
            raise ParameterError("expected CSV header 'm,r,magnitude'")
        idx = [(int(m), int(r)) for m, r, _ in rows[1:]]
        mags = [float(v) for _, _, v in rows[1:]]
        return cls(indices=tuple(idx), magnitudes=np.asarray(mags))

    def to_json(self) -> str:
        rows = self._sorted_rows()
        return json.dumps(
            {
                "indices": [[m, r] for m, r, _ in rows],
                "magnitudes": [v for _, _, v in rows],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MeasurementSet":
        doc = json.loads(text)
        idx = tuple((int(m), int(r)) for m, r in doc["indices"])
        return cls(indices=idx, magnitudes=np.asarray(doc["magnitudes"], dtype=np.float64))


def padded_window(params: ProblemParams, w: np.ndarray) -> np.ndarray:
    """w extended by zeros to length N (w[n] = 0 for W <= n < N)."""
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (params.W,):
        raise ParameterError(f"window must have length W={params.W}")
    out = np.zeros(params.N, dtype=np.complex128)
    out[: params.W] = w
    return out


def section(params: ProblemParams, pair: SignalPair, r: int) -> SectionVector:
    """Section vector y_{rL}: entries[n] = x[rL - n] * w[n], indices mod N."""
    if not 0 <= r < params.R:
        raise ParameterError(f"section index r={r} outside [0, {params.R})")
    shift = (r * params.L) % params.N
    n = np.arange(params.W)
    entries = pair.x[(shift - n) % params.N] * pair.w
    return SectionVector(entries=entries, shift=shift)


def _section_table(params: ProblemParams, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """All zero-padded section vectors stacked as an (R, N) array."""
    wf = padded_window(params, w)
    shifts = (np.arange(params.R) * params.L) % params.N
    idx = (shifts[:, None] - np.arange(params.N)[None, :]) % params.N
    return np.asarray(x, dtype=np.complex128)[idx] * wf[None, :]


def _phase_grid(params: ProblemParams) -> np.ndarray:
    """The (N, R) phase factors e^{2 pi i m rL / N} linking section DFTs to Y."""
    m = np.arange(params.N)[:, None]
    shifts = ((np.arange(params.R) * params.L) % params.N)[None, :]
    return np.exp(2j * np.pi * m * shifts / params.N)


def forward(params: ProblemParams, pair: SignalPair) -> StftTable:
    """Full STFT table via per-section N-point DFTs (O(R N log N)).

    Y[m, r] = e^{2 pi i m rL / N} sum_k y_{rL}[k] e^{-2 pi i m k / N}, so
    |Y[m, r]|^2 samples the section's intensity at omega = e^{-2 pi i m / N}.
    """
    if pair.x.shape != (params.N,):
        raise ParameterError(f"signal must have length N={params.N}")
    secs = _section_table(params, pair.x, pair.w)
    F = np.fft.fft(secs, axis=1).T  # [m, r]
    return StftTable(values=F * _phase_grid(params))


def magnitudes(table: StftTable, indices) -> MeasurementSet:
    """Phaseless measurements |Y[m, r]| at the given index pairs."""
    N, R = table.values.shape
    idx = [(int(m), int(r)) for m, r in indices]
    for m, r in idx:
        if not (0 <= m < N and 0 <= r < R):
            raise ParameterError(f"index ({m}, {r}) outside the ({N}, {R}) grid")
    mags = np.array([abs(table.values[m, r]) for m, r in idx], dtype=np.float64)
    return MeasurementSet(indices=tuple(idx), magnitudes=mags)


def operator_matrix(params: ProblemParams, w: np.ndarray) -> np.ndarray:
    """Dense (N*R, N) STFT operator A with row k = m*R + r.

    A[(m, r), n] = w[rL - n] e^{2 pi i n m / N}, so A @ x equals the
    flattened forward table.  Materialized only for N*R <= 2**16 entries.
    """
    if params.grid_size > MATRIX_ENTRY_CAP:
        raise ParameterError(
            f"operator matrix with {params.grid_size} rows exceeds the "
            f"{MATRIX_ENTRY_CAP}-row materialization cap; use apply_operator"
        )
    wf = padded_window(params, w)
    n = np.arange(params.N)
    shifts = (np.arange(params.R) * params.L) % params.N
    win = wf[(shifts[:, None] - n[None, :]) % params.N]  # [r, n]
    dft = np.exp(2j * np.pi * np.outer(np.arange(params.N), n) / params.N)  # [m, n]
    A = dft[:, None, :] * win[None, :, :]  # [m, r, n]
    return A.reshape(params.grid_size, params.N)


def apply_operator(params: ProblemParams, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """A @ x as a flat length-N*R vector, computed with FFTs."""
    secs = _section_table(params, np.asarray(x), w)
    F = np.fft.fft(secs, axis=1).T * _phase_grid(params)
    return F.reshape(-1)


def adjoint_operator(params: ProblemParams, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """A^H @ z for a flat length-N*R vector z."""
    Z = np.asarray(z, dtype=np.complex128).reshape(params.N, params.R)
    t = np.fft.fft(Z, axis=0)  # [n, r]: sum_m Z[m, r] e^{-2 pi i n m / N}
    wf = padded_window(params, w)
    shifts = (np.arange(params.R) * params.L) % params.N
    idx = (shifts[None, :] - np.arange(params.N)[:, None]) % params.N  # [n, r]
    return np.sum(np.conj(wf[idx]) * t, axis=1)


def frame_weights(params: ProblemParams, w: np.ndarray) -> np.ndarray:
    """Diagonal of A^H A: d[n] = N * sum_r |w[rL - n]|^2."""
    wf = padded_window(params, w)
    shifts = (np.arange(params.R) * params.L) % params.N
    idx = (shifts[None, :] - np.arange(params.N)[:, None]) % params.N
    return params.N * np.sum(np.abs(wf[idx]) ** 2, axis=1)


def check_coverage(params: ProblemParams, w: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Frame weights, raising CoverageError if any signal entry is untouched."""
    d = frame_weights(params, w)
    scale = float(np.max(d)) if d.size else 0.0
    if scale <= 0.0 or np.any(d <= tol * scale):
        bad = np.nonzero(d <= tol * scale)[0]
        raise CoverageError(f"window never covers signal entries {bad.tolist()}")
    return d


def random_mask(params: ProblemParams, count: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform sample of `count` (m, r) pairs without replacement."""
    total = params.grid_size
    if not 0 <= count <= total:
        raise ParameterError(f"count={count} outside [0, {total}]")
    flat = rng.choice(total, size=count, replace=False)
    return [(int(k) // params.R, int(k) % params.R) for k in flat]
