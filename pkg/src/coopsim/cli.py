"""Command-line front end.

Subcommands: sweep, time, wavefront, dbpc, validate, run-one.  Flags override
config-file values; COOPSIM_SEED is the fallback seed when neither a --seed
flag nor a base_seed config key is present.  Exit codes: 0 success, 2 usage
or config error, 3 I/O failure, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, InvalidArgumentError, InvariantViolationError
from .experiments import (
    DBPC_HEADER,
    SWEEP_HEADER,
    TIME_HEADER,
    TRACE_HEADER,
    WAVEFRONT_HEADER,
    dbpc_survival_sweep,
    invasion_probability_sweep,
    invasion_time_experiment,
    load_config,
    run_one_replicate,
    trace_csv_rows,
    validate_graph,
    wavefront_experiment,
    write_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _env_seed() -> int | None:
    raw = os.environ.get("COOPSIM_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as err:
        raise ConfigError(f"COOPSIM_SEED must be an integer, got {raw!r}") from err


def _resolve_seed(flag_seed: int | None, config_has_seed: bool) -> int | None:
    """Precedence: --seed flag, then config base_seed, then COOPSIM_SEED, then 0."""
    if flag_seed is not None:
        return flag_seed
    if config_has_seed:
        return None  # keep the config value
    env = _env_seed()
    return env if env is not None else 0


def _load(args) -> tuple:
    from .experiments import make_config, parse_config_file

    raw = parse_config_file(args.config)
    seed = _resolve_seed(args.seed, "base_seed" in raw)
    config = make_config(
        raw,
        base_seed=seed,
        threads=args.threads,
        output=getattr(args, "out", None),
    )
    return config


def _out_path(config, default_name: str) -> str:
    return config.output if config.output else default_name


def _cmd_sweep(args) -> int:
    config = _load(args)
    rows = invasion_probability_sweep(config)
    path = _out_path(config, "sweep.csv")
    write_csv(path, SWEEP_HEADER, [r.as_csv_row() for r in rows])
    print(f"# invasion probability sweep -> {path}")
    print(f"{'a':>8} {'v':>8} {'fraction':>10} {'stderr':>10} {'pi_lower':>10} {'pi_upper':>10}")
    for r in rows:
        print(
            f"{r.a:8.3f} {r.v:8d} {r.fraction:10.4f} {r.stderr:10.4f} "
            f"{r.pi_lower:10.4f} {r.pi_upper:10.4f}"
        )
    return EXIT_OK


def _cmd_time(args) -> int:
    config = _load(args)
    remove = True if args.remove_initial_phase else None
    rows, prediction = invasion_time_experiment(config, remove_initial_phase=remove)
    path = _out_path(config, "time.csv")
    write_csv(path, TIME_HEADER, [r.as_csv_row(prediction) for r in rows])
    print(f"# invasion time -> {path}")
    print(
        f"# successful replicates: {len(rows)} / {config.replicates}; "
        f"window [{prediction.lower}, {prediction.upper_base} + slack], "
        f"slack terms loglog={prediction.slack_loglog:.3f} eps={prediction.slack_eps:.3f}"
    )
    return EXIT_OK


def _cmd_wavefront(args) -> int:
    config = _load(args)
    traces = wavefront_experiment(config)
    path = _out_path(config, "wavefront.csv")
    rows = [
        [t.replicate, g, d]
        for t in traces
        for g, d in zip(t.generations, t.box_distances)
    ]
    write_csv(path, WAVEFRONT_HEADER, rows)
    from .experiments import late_run_slope

    print(f"# wavefront traces -> {path}")
    for t in traces:
        print(f"# replicate {t.replicate}: late-run slope {late_run_slope(t):.3f}")
    return EXIT_OK


def _cmd_dbpc(args) -> int:
    if not args.a:
        raise ConfigError("dbpc needs at least one --a value")
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    rows = dbpc_survival_sweep(
        args.a, z0=args.z0, threshold=args.threshold,
        replicates=args.replicates, base_seed=seed,
    )
    path = args.out if args.out else "dbpc.csv"
    write_csv(path, DBPC_HEADER, [r.as_csv_row() for r in rows])
    print(f"# survival sweep -> {path}")
    for r in rows:
        print(f"# a={r.a:g}: pi_hat={r.pi_hat:.4f} (stderr {r.stderr:.4f}, undecided {r.undecided})")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _load(args)
    report = validate_graph(config, seeds=args.seeds)
    print(f"# seeds: {report.seeds}")
    print(f"connectivity_rate: {report.connectivity_rate:.4f}")
    print(f"degree_band_rate: {report.degree_band_rate:.4f}")
    return EXIT_OK


def _cmd_run_one(args) -> int:
    config = _load(args)
    outcome, reports = run_one_replicate(config, a=args.a, replicate=args.replicate)
    path = _out_path(config, "trace.csv")
    write_csv(path, TRACE_HEADER, trace_csv_rows(reports))
    print(f"# single replicate -> {path}")
    print(f"# outcome: {outcome.kind} at generation {outcome.generation}, "
          f"cumulative {outcome.cumulative}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopsim",
        description="Monte Carlo experiments for cooperative-parasite invasions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config file (INI)")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--threads", type=int, default=None, help="worker processes")
        p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("sweep", help="invasion probability over the a grid")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("time", help="full-invasion generation counts")
    common(p)
    p.add_argument("--remove-initial-phase", action="store_true",
                   help="also report T minus the end of the initial phase")
    p.set_defaults(func=_cmd_time)

    p = sub.add_parser("wavefront", help="box-distance traces of successful invasions")
    common(p)
    p.set_defaults(func=_cmd_wavefront)

    p = sub.add_parser("dbpc", help="branching-process survival probabilities")
    p.add_argument("--a", type=float, action="append", help="scale value (repeatable)")
    p.add_argument("--z0", type=int, default=1)
    p.add_argument("--threshold", type=int, default=100_000)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_dbpc)

    p = sub.add_parser("validate", help="connectivity and degree-band rates")
    common(p)
    p.add_argument("--seeds", type=int, default=100, help="fresh graphs to validate")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run-one", help="run one replicate and dump its trace")
    common(p)
    p.add_argument("--a", type=float, default=None, help="override the a value")
    p.add_argument("--replicate", type=int, default=0)
    p.set_defaults(func=_cmd_run_one)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolationError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
