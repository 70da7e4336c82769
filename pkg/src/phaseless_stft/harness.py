"""Experiment driver: bound curves, the Monte-Carlo RRR grid, and the
proof-solver sweeps, with CSV/JSON emission.

Every cell draws its generator from (seed, coordinates) alone, so any row can
be reproduced in isolation.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds, proof_solver
from .core import ProblemParams, derive_seed, make_params, random_pair, spawn_rng
from .errors import ParameterError
from .rrr import RrrConfig, rrr_solve
from .stft import forward, magnitudes, random_mask

__all__ = [
    "ExperimentGrid",
    "GridResult",
    "SweepCase",
    "run_figure4",
    "run_figure1",
    "run_proof_solver_sweep",
    "rows_to_csv",
    "write_rows",
    "write_manifest",
    "SCHEMA_VERSION",
    "FIGURE1_COLUMNS",
    "FIGURE4_COLUMNS",
    "PROOFSWEEP_COLUMNS",
]

SCHEMA_VERSION = 1
FIGURE1_COLUMNS = ("schema_version", "L", "W", "known", "blind", "cap_known", "cap_blind")
FIGURE4_COLUMNS = ("schema_version", "K", "L", "W", "success_rate", "mean_iterations", "mean_final_error")
PROOFSWEEP_COLUMNS = ("schema_version", "mode", "N", "W", "L", "unique_fraction", "mean_error", "mean_runtime")


@dataclass(frozen=True)
class ExperimentGrid:
    """The Monte-Carlo grid: K magnitude multiples, step and window ranges."""

    N: int = 11
    K_list: tuple[int, ...] = (2, 4, 6, 8)
    L_range: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    W_range: tuple[int, ...] = tuple(range(1, 12))
    trials: int = 100
    seed: int = 0
    distribution: str = "real-gaussian"
    config: RrrConfig = field(default_factory=lambda: RrrConfig(real_signal=True))

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")


@dataclass(frozen=True)
class GridResult:
    rows: tuple[dict, ...]


def _run_cell(grid: ExperimentGrid, K: int, L: int, W: int) -> dict:
    params = make_params(grid.N, W, L)
    count = K * grid.N
    if count > params.grid_size:
        raise ParameterError(f"K={K} asks for {count} magnitudes but the grid has {params.grid_size}")
    succ = 0
    iters = []
    errs = []
    real_mode = grid.distribution == "real-gaussian"
    config = RrrConfig(
        beta=grid.config.beta,
        tol=grid.config.tol,
        max_iter=grid.config.max_iter,
        success_tol=grid.config.success_tol,
        real_signal=real_mode,
    )
    for trial in range(grid.trials):
        rng = spawn_rng(derive_seed(grid.seed, K, L, W, trial))
        pair = random_pair(params, grid.distribution, rng)
        table = forward(params, pair)
        mask = random_mask(params, count, rng)
        meas = magnitudes(table, mask)
        out = rrr_solve(params, pair.w, mask, meas.magnitudes, config, rng, truth=pair.x)
        succ += bool(out.success)
        iters.append(out.iterations)
        errs.append(out.final_error if out.final_error is not None else np.nan)
    return {
        "schema_version": SCHEMA_VERSION,
        "K": K,
        "L": L,
        "W": W,
        "success_rate": succ / grid.trials,
        "mean_iterations": float(np.mean(iters)),
        "mean_final_error": float(np.nanmean(errs)) if not np.all(np.isnan(errs)) else float("nan"),
    }


def run_figure4(grid: ExperimentGrid) -> GridResult:
    """Success rate and iteration count per (K, L, W) cell."""
    rows = []
    for K in grid.K_list:
        for L in grid.L_range:
            for W in grid.W_range:
                rows.append(_run_cell(grid, K, L, W))
    return GridResult(rows=tuple(rows))


def run_figure1(N: int, L_list=(1, 2, 3, 4, 5, 7), W_range=None) -> list[dict]:
    """Bound curves for the given geometry grid."""
    W_range = range(2, N + 1) if W_range is None else W_range
    rows = []
    for row in bounds.bound_curves(N, L_list, W_range):
        rows.append({"schema_version": SCHEMA_VERSION, **row})
    return rows


@dataclass(frozen=True)
class SweepCase:
    mode: str  # known | blind | propA | propB
    N: int
    W: int
    L: int


def _sweep_case(case: SweepCase, trials: int, seed: int) -> dict:
    params = make_params(case.N, case.W, case.L)
    uniques = 0
    errs = []
    times = []
    mode_tag = {"known": 1, "blind": 2, "propA": 3, "propB": 4}.get(case.mode)
    if mode_tag is None:
        raise ParameterError(f"unknown sweep mode {case.mode!r}")
    if case.mode in ("known", "blind"):
        for trial in range(trials):
            rng = spawn_rng(derive_seed(seed, mode_tag, case.N, case.W, case.L, trial))
            pair = random_pair(params, "complex-gaussian", rng)
            table = forward(params, pair)
            t0 = time.perf_counter()
            if case.mode == "known":
                idx = bounds.known_window_measurement_set(params)
                meas = magnitudes(table, idx)
                res = proof_solver.recover_known_window(meas, pair.w, params)
            else:
                idx = bounds.blind_solver_measurement_set(params)
                meas = magnitudes(table, idx)
                res = proof_solver.recover_blind(meas, params)
            times.append(time.perf_counter() - t0)
            if res.status == "unique":
                uniques += 1
                from .ambiguity import quotient_error

                mode = "known-window" if case.mode == "known" else "blind"
                errs.append(quotient_error(res.estimate, pair, params, mode))
        frac = uniques / trials
    elif case.mode in ("propA", "propB"):
        rng = spawn_rng(derive_seed(seed, mode_tag, case.N, case.W, case.L))
        t0 = time.perf_counter()
        if case.mode == "propA":
            rep = proof_solver.verify_proposition_A(case.W, params.alpha, None, trials, rng)
        else:
            rep = proof_solver.verify_proposition_B(case.W, params.alpha, trials, rng)
        times.append(time.perf_counter() - t0)
        frac = rep.unique_fraction
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": case.mode,
        "N": case.N,
        "W": case.W,
        "L": case.L,
        "unique_fraction": frac,
        "mean_error": float(np.mean(errs)) if errs else float("nan"),
        "mean_runtime": float(np.mean(times)) if times else float("nan"),
    }


def run_proof_solver_sweep(cases, trials: int, seed: int) -> list[dict]:
    return [_sweep_case(c, trials, seed) for c in cases]


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_rows(path, rows, columns) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows, columns))


def write_manifest(path, config: dict, seed: int) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": _package_version(),
        "seed": seed,
        "config": config,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("phaseless-stft")
    except Exception:
        return "unknown"
