"""Command-line entry point: ``sqzphase <subcommand> ...``.

Errors go to stderr as ``error: <message>`` lines, one per problem; the exit
status is 2 for bad configuration or usage and 1 for failures while running.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, bounds, experiments, output
from .config import ExperimentConfig, apply_overrides, config_from_mapping, load_mapping, meta_line
from .errors import ConfigError, PhaseEstimationError
from .state import from_db, mean_photon_number, purity

VERSION = f"sqzphase {__version__}"


def _add_state_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("probe state (one pair)")
    g.add_argument("--r", type=float, help="squeezing parameter")
    g.add_argument("--r-prime", type=float, help="extra antisqueezing parameter (default 0 with --r)")
    g.add_argument("--squeezing-db", type=float, help="noise reduction below shot noise, as a positive dB magnitude")
    g.add_argument("--antisqueezing-db", type=float, help="noise increase above shot noise, dB")


def _add_run_flags(p: argparse.ArgumentParser, *, trials: bool = True) -> None:
    p.add_argument("--config", type=Path, help="TOML config file (flags override it)")
    _add_state_flags(p)
    p.add_argument("--theta", type=float, nargs="+", help="true phase(s) in [0, pi/2]")
    if trials:
        p.add_argument("--n-samples", type=int, nargs="+", help="homodyne samples per trial")
        p.add_argument("--repetitions", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--grid-points", type=int)
        p.add_argument("--workers", type=int, default=1, help="threads for independent trials (output unaffected)")
        p.add_argument("--plot-dir", type=Path, help="also write figure CSVs and an SVG rendering here")
    p.add_argument("--out", help="output CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqzphase", description="Phase estimation with a squeezed thermal probe.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="dB noise levels -> r, r', purity, mean photon number")
    p.add_argument("--squeezing-db", type=float, required=True)
    p.add_argument("--antisqueezing-db", type=float, required=True)

    p = sub.add_parser("bounds", help="Fisher information and SQL/OCRB/QCRB per theta")
    _add_run_flags(p, trials=False)
    p.add_argument("--n-meas", type=int, help="number of measurements N (default 1000)")

    p = sub.add_parser("interval", help="phase interval where homodyne beats the SQL")
    p.add_argument("--config", type=Path)
    _add_state_flags(p)

    for name, text in (
        ("posterior", "posterior curves for one record at several N"),
        ("simulate", "repeated trials at one phase"),
        ("sweep", "repeated trials over a list of phases"),
        ("purity-scan", "beyond-SQL interval width against purity"),
    ):
        p = sub.add_parser(name, help=text)
        _add_run_flags(p)
        if name == "purity-scan":
            p.add_argument("--theory-only", action="store_true", help="skip the Monte Carlo sweep")
    return parser


def _state_override(args) -> Optional[dict]:
    r_form = {k: getattr(args, k) for k in ("r", "r_prime") if getattr(args, k, None) is not None}
    db_form = {k: getattr(args, k) for k in ("squeezing_db", "antisqueezing_db") if getattr(args, k, None) is not None}
    if r_form and not db_form and "r" in r_form:
        r_form.setdefault("r_prime", 0.0)
    merged = {**r_form, **db_form}
    return merged or None


def load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None) is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError([f"config: cannot read {args.config}: {exc.strerror}"]) from None
        data = load_mapping(text)
    run = {}
    if getattr(args, "theta", None):
        run["thetas"] = list(args.theta)
    if getattr(args, "n_meas", None) is not None:
        run["n_samples"] = args.n_meas
    for key in ("n_samples", "repetitions", "seed", "grid_points"):
        value = getattr(args, key, None)
        if value is not None:
            run[key] = value
    data = apply_overrides(data, state=_state_override(args), run=run, out_path=getattr(args, "out", None))
    return config_from_mapping(data)


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out_path is None:
        sys.stdout.write(text)
    else:
        output.write_text(cfg.out_path, text)


def cmd_convert(args) -> None:
    st = from_db(args.squeezing_db, args.antisqueezing_db)
    print("r,r_prime,purity,mean_photon")
    print(",".join(output.fmt(v) for v in (st.r, st.r_prime, purity(st), mean_photon_number(st))))


def cmd_bounds(args) -> None:
    cfg = load_config(args)
    st = cfg.state
    thetas = cfg.thetas or experiments.default_thetas()
    rows = [bounds.bounds_report(st, t, cfg.n) for t in thetas]
    _emit(cfg, output.csv_text(meta_line(cfg, "bounds", VERSION), output.BOUNDS_HEADER, output.bounds_rows(rows)))


def cmd_interval(args) -> None:
    cfg = load_config(args)
    rows = []
    for spec in cfg.states:
        st = spec.to_state()
        iv = bounds.beyond_sql_interval(st)
        rows.append((purity(st), st.r, st.r_prime, bounds.optimal_phase(st), iv.theta_low, iv.theta_high, iv.width, int(iv.empty)))
    header = ("purity", "r", "r_prime", "theta_opt", "theta_low", "theta_high", "delta_theta", "empty")
    sys.stdout.write(output.csv_text(meta_line(cfg, "interval", VERSION), header, rows))


def cmd_posterior(args) -> None:
    cfg = load_config(args)
    if cfg.thetas is not None and len(cfg.thetas) != 1:
        raise ConfigError(["run.theta: posterior needs a single true phase"])
    theta = cfg.thetas[0] if cfg.thetas else 0.4
    if len(cfg.n_samples) > 1 and cfg.out_path is None and args.plot_dir is None:
        raise ConfigError(["out.path: several n_samples values need an output path (one file per N)"])
    curves = experiments.posterior_curves(cfg.state, theta, cfg.n_samples, cfg.seed, cfg.grid_points)
    meta = meta_line(cfg, "posterior", VERSION)
    if len(curves) == 1:
        (post,) = curves.values()
        _emit(cfg, output.csv_text(meta, output.POSTERIOR_HEADER, output.posterior_rows(post)))
    elif cfg.out_path is not None:
        for n, post in curves.items():
            output.write_text(output.sibling(cfg.out_path, f"N{n}"), output.csv_text(meta, output.POSTERIOR_HEADER, output.posterior_rows(post)))
    if args.plot_dir is not None:
        output.emit_plot_data("posterior", curves, args.plot_dir, meta, theta_true=theta)


def _write_report(cfg: ExperimentConfig, report, command: str) -> None:
    meta = meta_line(cfg, command, VERSION)
    _emit(cfg, output.csv_text(meta, output.AGGREGATE_HEADER, output.aggregate_rows(report)))
    if cfg.out_path is not None:
        output.write_text(output.sibling(cfg.out_path, "trials"), output.csv_text(meta, output.TRIALS_HEADER, output.trial_rows(report)))


def cmd_simulate(args) -> None:
    cfg = load_config(args)
    if cfg.thetas is None or len(cfg.thetas) != 1:
        raise ConfigError(["run.theta: simulate needs exactly one true phase"])
    report = experiments.sweep_theta(cfg.state, cfg.thetas, cfg.n, cfg.repetitions, cfg.seed, cfg.grid_points, args.workers)
    _write_report(cfg, report, "simulate")


def cmd_sweep(args) -> None:
    cfg = load_config(args)
    thetas = cfg.thetas or experiments.default_thetas()
    report = experiments.sweep_theta(cfg.state, thetas, cfg.n, cfg.repetitions, cfg.seed, cfg.grid_points, args.workers)
    _write_report(cfg, report, "sweep")
    if args.plot_dir is not None:
        output.emit_plot_data("sweep", report, args.plot_dir, meta_line(cfg, "sweep", VERSION))


def cmd_purity_scan(args) -> None:
    cfg = load_config(args)
    rows = experiments.purity_scan(
        [s.to_state() for s in cfg.states],
        cfg.n,
        cfg.repetitions,
        cfg.seed,
        thetas=cfg.thetas,
        grid_points=cfg.grid_points,
        workers=args.workers,
        simulate=not args.theory_only,
    )
    meta = meta_line(cfg, "purity-scan", VERSION)
    _emit(cfg, output.csv_text(meta, output.PURITY_HEADER, output.purity_rows(rows)))
    if args.plot_dir is not None:
        output.emit_plot_data("purity", rows, args.plot_dir, meta)


COMMANDS = {
    "convert": cmd_convert,
    "bounds": cmd_bounds,
    "interval": cmd_interval,
    "posterior": cmd_posterior,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "purity-scan": cmd_purity_scan,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"error: {line}", file=sys.stderr)
        return 2
    except (PhaseEstimationError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
