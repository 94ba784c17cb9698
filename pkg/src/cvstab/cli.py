"""Command-line entry points: rates, clt, coverage, stability, selftest."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._version import __version__
from .errors import ConfigurationError
from .harness import (
    LARGE_N,
    build_config,
    load_config_file,
    run_clt_experiment,
    run_coverage_experiment,
    run_rate_experiment,
    run_stability_oneshot,
    write_csv,
    write_metadata,
)
from .kernels import backend_name, set_num_threads

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=["st-fixed", "lasso-innercv", "ridge-fixed", "st-nonsparse"])
    p.add_argument("--mode", choices=["single", "comparison"])
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-grid", help="comma-separated training sizes, e.g. 90,900,9000")
    p.add_argument("--large", action="store_true", help=f"append n={LARGE_N} to the grid")
    p.add_argument("--m-stability", type=int, help="Monte-Carlo replications for sigma^2/gamma")
    p.add_argument("--reps", type=int, help="CV replications for clt/coverage")
    p.add_argument("--workers", type=int, help="kernel thread count (results are invariant)")
    p.add_argument("--cache-dir", help="directory for cached stability estimates")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--meta", help="optional metadata JSON path (includes wall clock)")
    p.add_argument("--lambda-pairing", choices=["shared", "independent"])


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvstab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"cvstab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="sigma^2/gamma/r across the n grid with log-log slopes")
    _add_common(p)
    p.add_argument("--normalize-at", type=int, help="divide values by their value at this n")

    p = sub.add_parser("clt", help="samples of the normalized CV-error statistics at one n")
    _add_common(p)
    p.add_argument("--n", type=int, help="training size (default: largest grid entry)")

    p = sub.add_parser("coverage", help="empirical CI coverage at one n")
    _add_common(p)
    p.add_argument("--n", type=int)

    p = sub.add_parser("stability", help="one-shot sigma^2/gamma/r at one n")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("selftest", help="run the small-instance oracle checks")
    p.add_argument("--workers", type=int)
    return ap


def _config_from_args(args) -> "ExperimentConfig":
    file_cfg = load_config_file(args.config) if args.config else {}
    scenario = args.scenario or file_cfg.pop("scenario", None)
    mode = args.mode or file_cfg.pop("mode", None)
    if scenario is None:
        raise ConfigurationError("scenario: required (flag or config file)")
    if mode is None:
        raise ConfigurationError("mode: required (flag or config file)")
    file_cfg.pop("scenario", None)
    file_cfg.pop("mode", None)
    overrides = dict(file_cfg)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.k is not None:
        overrides["k"] = args.k
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.delta is not None:
        overrides["delta"] = args.delta
    if args.m_stability is not None:
        overrides["M_stability"] = args.m_stability
    if args.reps is not None:
        overrides["M_clt"] = args.reps
    if args.lambda_pairing is not None:
        overrides["lambda_pairing"] = args.lambda_pairing
    if getattr(args, "normalize_at", None) is not None:
        overrides["normalize_at"] = args.normalize_at
    if args.n_grid is not None:
        try:
            overrides["n_grid"] = tuple(int(s) for s in args.n_grid.split(","))
        except ValueError:
            raise ConfigurationError(f"n_grid: cannot parse {args.n_grid!r}")
    if args.large:
        grid = overrides.get("n_grid", (90, 900, 9000))
        overrides["n_grid"] = tuple(list(grid) + [LARGE_N])
    return build_config(scenario, mode, **overrides)


def _emit(result, args) -> None:
    if args.out:
        write_csv(result, args.out)
        print(f"wrote {len(result.rows)} rows to {args.out}")
    else:
        cols = result.column_order()
        print(",".join(cols))
        for row in result.rows[:50]:
            print(",".join(str(row[c]) for c in cols))
        if len(result.rows) > 50:
            print(f"... ({len(result.rows)} rows total; use --out to save)")
    if args.meta:
        write_metadata(result, args.meta)


def _run_selftest() -> int:
    from . import selftest

    results = selftest.run_all()
    failed = sum(1 for _, ok, _ in results if not ok)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    print(f"{len(results) - failed}/{len(results)} oracle checks passed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def cli_main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.workers is not None:
        if args.workers < 1:
            print("error: workers: must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        set_num_threads(args.workers)
    if args.command == "selftest":
        return _run_selftest()
    try:
        config = _config_from_args(args)
    except (ConfigurationError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "rates":
            result = run_rate_experiment(config, cache_dir=args.cache_dir)
        elif args.command == "clt":
            result = run_clt_experiment(config, n=args.n, cache_dir=args.cache_dir)
        elif args.command == "coverage":
            result = run_coverage_experiment(config, n=args.n, cache_dir=args.cache_dir)
        elif args.command == "stability":
            result = run_stability_oneshot(config, args.n, cache_dir=args.cache_dir)
        else:  # pragma: no cover
            raise AssertionError(args.command)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        print(f"runtime failure ({backend_name()} backend): {e}", file=sys.stderr)
        return EXIT_RUNTIME
    _emit(result, args)
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
