"""Command-line front door.

Subcommands: bound, simulate {figure1, figure4}, recover {known, blind},
and verify.  Flags mirror the model symbols (--N --W --L --K --beta --tol
--max-iter).  Exit codes: 0 success, 1 verification failure, 2 usage or I/O
error, 3 ambiguous recovery, 4 failed recovery.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness, proof_solver
from .ambiguity import act, random_element, verify_invariance
from .core import SignalPair, make_params, random_pair, spawn_rng, derive_seed
from .errors import PhaselessStftError
from .rrr import RrrConfig
from .stft import forward, magnitudes

OUTDIR_ENV = "PHASELESS_STFT_OUTDIR"

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_AMBIGUOUS = 3
EXIT_FAILED = 4


def _load_config(path: str) -> dict:
    """Simple key-value config: one `key = value` per line, # comments."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _outdir(args) -> Path:
    path = Path(args.out_dir or os.environ.get(OUTDIR_ENV, "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_config_defaults(args, parser) -> None:
    if not getattr(args, "config", None):
        return
    overrides = _load_config(args.config)
    for key, val in overrides.items():
        if not hasattr(args, key):
            continue
        current = getattr(args, key)
        if parser.get_default(key) == current:  # command line wins over config
            cast = type(current) if current is not None else str
            if cast is bool:
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            elif cast is list:
                setattr(args, key, _int_list(val))
            else:
                setattr(args, key, cast(val))


def cmd_bound(args) -> int:
    params = make_params(args.N, args.W, args.L)
    rep = bounds.bound_report(params)
    doc = dataclasses.asdict(rep)
    if args.format == "json":
        print(json.dumps(doc))
    else:
        print(
            f"N={args.N} W={args.W} L={args.L} alpha={rep.alpha}: "
            f"known={rep.known_window_count} blind={rep.blind_count} "
            f"caps {rep.four_N}/{rep.four_N_plus_2W}"
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = _outdir(args)
    if args.figure == "figure1":
        rows = harness.run_figure1(args.N, tuple(args.L_list), range(args.W_min, args.W_max + 1))
        harness.write_rows(out / "figure1.csv", rows, harness.FIGURE1_COLUMNS)
        harness.write_manifest(
            out / "figure1_manifest.json",
            {"figure": "figure1", "N": args.N, "L_list": args.L_list,
             "W_min": args.W_min, "W_max": args.W_max},
            seed=args.seed,
        )
        print(f"wrote {out / 'figure1.csv'} ({len(rows)} rows)")
        return EXIT_OK
    grid = harness.ExperimentGrid(
        N=args.N,
        K_list=tuple(args.K_list),
        L_range=tuple(args.L_list),
        W_range=tuple(range(args.W_min, args.W_max + 1)),
        trials=args.trials,
        seed=args.seed,
        distribution=args.distribution,
        config=RrrConfig(
            beta=args.beta, tol=args.tol, max_iter=args.max_iter,
            success_tol=args.success_tol, real_signal=args.distribution == "real-gaussian",
        ),
    )
    result = harness.run_figure4(grid)
    harness.write_rows(out / "figure4.csv", result.rows, harness.FIGURE4_COLUMNS)
    harness.write_manifest(
        out / "figure4_manifest.json",
        {
            "figure": "figure4", "N": args.N, "K_list": args.K_list, "L_list": args.L_list,
            "W_min": args.W_min, "W_max": args.W_max, "trials": args.trials,
            "beta": args.beta, "tol": args.tol, "max_iter": args.max_iter,
            "success_tol": args.success_tol, "distribution": args.distribution,
        },
        seed=args.seed,
    )
    print(f"wrote {out / 'figure4.csv'} ({len(result.rows)} rows)")
    return EXIT_OK


def cmd_recover(args) -> int:
    params = make_params(args.N, args.W, args.L)
    rng = spawn_rng(derive_seed(args.seed, args.N, args.W, args.L))
    pair = random_pair(params, args.distribution, rng)
    table = forward(params, pair)
    if args.mode == "known":
        idx = bounds.known_window_measurement_set(params)
        meas = magnitudes(table, idx)
        res = proof_solver.recover_known_window(meas, pair.w, params)
    else:
        idx = bounds.blind_solver_measurement_set(params)
        meas = magnitudes(table, idx)
        res = proof_solver.recover_blind(meas, params)
    print(res.to_json())
    if res.status == "ambiguous":
        return EXIT_AMBIGUOUS
    if res.status == "failed":
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = spawn_rng(args.seed)
    failures = []

    # invariance sweep over assorted geometries covering several alpha values
    geoms = [(11, 3, 4), (12, 4, 4), (16, 5, 6), (27, 6, 6), (18, 4, 12), (32, 6, 24)]
    worst = 0.0
    for N, W, L in geoms:
        params = make_params(N, W, L)
        for _ in range(max(1, args.trials // len(geoms))):
            pair = random_pair(params, "complex-gaussian", rng)
            g = random_element(params, rng)
            if args.break_action:
                # negative control: apply lambda to x only, which is not a group move
                moved = act(g, pair, params)
                broken = SignalPair(x=moved.x, w=pair.w * np.exp(1j * g.theta))
                Y0 = np.abs(forward(params, pair).values)
                Y1 = np.abs(forward(params, broken).values)
                worst = max(worst, float(np.max(np.abs(Y1 - Y0)) / np.max(Y0)))
            else:
                worst = max(worst, verify_invariance(g, pair, params))
    if worst > 1e-10:
        failures.append(f"invariance deviation {worst:.3e} above 1e-10")
    print(f"invariance: max |Y| deviation {worst:.3e}")

    repA = proof_solver.verify_proposition_A(3, 1, None, args.trials, rng)
    print(f"propA (W=3, alpha=1): unique fraction {repA.unique_fraction:.3f} fixed={repA.fixed_cases}")
    if repA.unique_fraction < 1.0 or any(v != 1 for v in repA.fixed_cases.values()):
        failures.append("proposition A sweep not unique")

    repB = proof_solver.verify_proposition_B(4, 1, args.trials, rng)
    print(f"propB (W=4, alpha=1): unique fraction {repB.unique_fraction:.3f} fixed={repB.fixed_cases}")
    if repB.unique_fraction < 1.0 or any(v not in (1, None) for v in repB.fixed_cases.values()):
        failures.append("proposition B sweep not unique")

    for msg in failures:
        print(f"FAIL: {msg}")
    print("verify:", "PASS" if not failures else "FAIL")
    return EXIT_OK if not failures else EXIT_VERIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseless-stft", description=__doc__)
    parser.add_argument("--config", help="key=value config file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=None, help=f"default from ${OUTDIR_ENV} or cwd")
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("bound", help="evaluate the measurement-count bounds")
    common(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("simulate", help="run the experiment grids")
    common(p)
    p.add_argument("figure", choices=("figure1", "figure4"))
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--K-list", dest="K_list", type=int, nargs="+", default=[2, 4, 6, 8])
    p.add_argument("--L-list", dest="L_list", type=int, nargs="+", default=None)
    p.add_argument("--W-min", type=int, default=None)
    p.add_argument("--W-max", type=int, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=10_000)
    p.add_argument("--success-tol", dest="success_tol", type=float, default=1e-4)
    p.add_argument("--distribution", choices=("real-gaussian", "complex-gaussian"),
                   default="real-gaussian")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("recover", help="run the constructive recovery on a random instance")
    common(p)
    p.add_argument("mode", choices=("known", "blind"))
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--distribution", choices=("real-gaussian", "complex-gaussian"),
                   default="complex-gaussian")
    p.set_defaults(fn=cmd_recover)

    p = sub.add_parser("verify", help="invariance and uniqueness sweeps")
    common(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--break-action", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_defaults(args, parser)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    # figure defaults depend on the chosen figure
    if args.command == "simulate":
        if args.figure == "figure1":
            args.N = 100 if args.N is None else args.N
            args.L_list = [1, 2, 3, 4, 5, 7] if args.L_list is None else args.L_list
            args.W_min = 2 if args.W_min is None else args.W_min
            args.W_max = args.N if args.W_max is None else args.W_max
        else:
            args.N = 11 if args.N is None else args.N
            args.L_list = [1, 2, 3, 4, 5, 6] if args.L_list is None else args.L_list
            args.W_min = 1 if args.W_min is None else args.W_min
            args.W_max = args.N if args.W_max is None else args.W_max

    try:
        return args.fn(args)
    except PhaselessStftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
