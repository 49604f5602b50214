"""Command-line entry point: ``lpgame {solve,sweep,localize,profiles}``.

Exit codes: 0 success, 2 configuration error, 3 degenerate localization
geometry.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from lpgame.config import PROFILES, ExperimentConfig, load_config
from lpgame.errors import ConfigError, GeometryError
from lpgame import experiments

log = logging.getLogger("lpgame")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--profile", help="named preset (see `lpgame profiles`)")
    p.add_argument("--seed", type=int, help="64-bit seed, overrides the config")
    p.add_argument("--out", type=Path, help="output directory, overrides the config")
    p.add_argument("--integer-levels", action="store_true",
                   help="restrict the company to pure offered levels")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (output is unaffected)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpgame", description="Location privacy game solver and localization simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one game instance and print the equilibrium")
    _add_common(p)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")

    p = sub.add_parser("sweep", help="solve over a visit-time sweep and write sweep.csv")
    _add_common(p)
    p.add_argument("--gnuplot", action="store_true", help="also write sweep.dat")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")

    p = sub.add_parser("localize", help="estimate l_hat by Monte-Carlo localization")
    _add_common(p)
    p.add_argument("--pipe-lhat", action="store_true",
                   help="run the configured sweep once per packet count with the estimated l_hat")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")

    sub.add_parser("profiles", help="list named presets")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config, args.profile)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output"] = args.out
    if args.integer_levels:
        changes["integer_levels"] = True
    cfg = replace(cfg, **changes) if changes else cfg
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"expected an integer in [0, 2**64), got {cfg.seed}", field="seed")
    if args.jobs < 1:
        raise ConfigError("must be >= 1", field="--jobs")
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    try:
        cfg.output.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc.strerror}", field="output") from exc
    return cfg.output


def _write(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise ConfigError(f"cannot write output: {exc}", field="output") from exc


def cmd_solve(args) -> int:
    cfg = _config(args)
    params, result = experiments.solve_once(cfg)
    if args.json:
        print(json.dumps(experiments.solve_to_dict(params, result), indent=2))
    else:
        print(experiments.format_solve(params, result))
    if args.out is not None:
        out = _outdir(cfg)
        _write((out / "solve.json").write_text,
               json.dumps(experiments.solve_to_dict(params, result), indent=2) + "\n")
    return EXIT_OK


def _sweep_outputs(cfg, columns, rows, out: Path, stem: str, args) -> None:
    _write(experiments.write_csv, out / f"{stem}.csv", columns, rows)
    log.info("wrote %s (%d rows)", out / f"{stem}.csv", len(rows))
    if getattr(args, "gnuplot", False):
        _write(experiments.write_gnuplot, out / f"{stem}.dat", columns, rows)
    if getattr(args, "plot", False):
        from lpgame.plotting import plot_sweep
        prefix = "" if stem == "sweep" else f"{stem}_"
        _write(plot_sweep, columns, rows, out, prefix, cfg.game.s_max)


def cmd_sweep(args) -> int:
    cfg = _config(args)
    columns, rows = experiments.run_sweep(cfg, jobs=args.jobs)
    out = _outdir(cfg)
    _sweep_outputs(cfg, columns, rows, out, "sweep", args)
    for name in ["SSE"] + [b.name for b in cfg.baselines]:
        log.info("%s first negative payoff at T = %s", name, experiments.first_negative(rows, name))
    return EXIT_OK


def cmd_localize(args) -> int:
    cfg = _config(args)
    runs = experiments.run_localize(cfg, jobs=args.jobs)
    out = _outdir(cfg)
    _write(experiments.write_localize, runs, out)
    for r in runs:
        print(f"k = {r.packets_per_sample:>6}  l_hat = {r.estimate.mean_error!r} m  "
              f"(std {r.estimate.std_error:.4g}, n = {r.estimate.n_samples}, seed = {r.estimate.seed})")
    if args.plot:
        from lpgame.plotting import plot_localization
        _write(plot_localization, runs, out)
    if args.pipe_lhat:
        if cfg.sweep is None:
            raise ConfigError("--pipe-lhat needs a sweep section", field="sweep")
        for r in runs:
            piped = cfg.with_lhat(r.estimate.mean_error)
            columns, rows = experiments.run_sweep(piped, jobs=args.jobs)
            _sweep_outputs(piped, columns, rows, out, f"sweep_k{r.packets_per_sample}", args)
    return EXIT_OK


def cmd_profiles(args) -> int:
    width = max(len(n) for n in PROFILES)
    for name, (desc, _) in PROFILES.items():
        print(f"{name:<{width}}  {desc}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "localize": cmd_localize,
            "profiles": cmd_profiles}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except GeometryError as exc:
        print(f"error: degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
