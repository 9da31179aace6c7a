"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime error.
Data goes to stdout (or --output); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from typing import Iterable, Sequence

from . import sweep
from .arena import load_orientation_trace, sample_orientations, user_grid
from .combining import shannon_rate, to_db
from .config import ConfigError, RunConfig, default_config, emit_config, parse_config, with_overrides
from .headset import build_layout, format_number, layout_rows

log = logging.getLogger("vrvlc")

EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format_number(x)
    return str(x)


def _emit(header: Sequence[str], rows: Iterable[Sequence], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--output", "-o", help="write CSV here instead of stdout")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--seed", type=int)
    common.add_argument("--verbose", "-v", action="store_true", help="progress on stderr")

    p = _Parser(prog="vrvlc", description="VLC VR-arena headset simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("layout", parents=[common], help="detector table for one headset")
    s.add_argument("--theta-d", type=float, nargs="+")

    s = sub.add_parser("coverage", parents=[common], help="connectivity percentage vs alpha")
    s.add_argument("--theta-d", type=float, nargs="+")
    s.add_argument("--alpha", type=float, nargs="+")
    s.add_argument("--user", type=float, nargs="+", metavar="COORD")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--coarse", dest="grid", action="store_const", const="coarse")
    g.add_argument("--full-grid", dest="grid", action="store_const", const="full")

    for name, help_ in (("sinr-sweep", "mean SINR vs alpha"), ("npd-study", "mean SINR vs detector count")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--theta-d", type=float, nargs="+")
        s.add_argument("--alpha", type=float, nargs="+")
        s.add_argument("--combiners", nargs="+", choices=("egc", "sbc", "mrc"))
        s.add_argument("--orientations", type=int)
        s.add_argument("--users-per-side", type=int)

    s = sub.add_parser("trace-replay", parents=[common], help="SINR along a head-orientation trace")
    s.add_argument("--trace", help="trace file (time_s,yaw_deg,pitch_deg,roll_deg)")
    s.add_argument("--theta-d", type=float, nargs="+")
    s.add_argument("--alpha", type=float, nargs="+")
    s.add_argument("--combiners", nargs="+", choices=("egc", "sbc", "mrc"))
    s.add_argument("--user", type=float, nargs="+", metavar="COORD")

    sub.add_parser("emit-defaults", parents=[common], help="print the default configuration")
    return p


def _load_config(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
        cfg = parse_config(text)
    else:
        cfg = default_config()
    over = {
        "theta_d": getattr(args, "theta_d", None),
        "alpha": getattr(args, "alpha", None),
        "combiners": getattr(args, "combiners", None),
        "grid": getattr(args, "grid", None),
        "orientations": getattr(args, "orientations", None),
        "users_per_side": getattr(args, "users_per_side", None),
        "user": getattr(args, "user", None),
        "trace": getattr(args, "trace", None),
        "seed": args.seed,
        "workers": args.workers,
        "output": args.output,
    }
    for key in ("theta_d", "alpha", "combiners", "user"):
        if over[key] is not None:
            over[key] = tuple(over[key])
    return with_overrides(cfg, **over)


def _coverage_orientations(cfg: RunConfig):
    st = cfg.study
    if st.grid == "full":
        return sweep.full_coverage_orientations()
    return sample_orientations((0, 359), (-90, 90), (-90, 90), step=(st.yaw_step, st.pitch_step, st.roll_step))


def _run_study(command: str, cfg: RunConfig, out) -> None:
    st = cfg.study
    if command == "emit-defaults":
        out.write(emit_config(cfg))
        return
    if command == "layout":
        for row in layout_rows(build_layout(cfg.headset(st.theta_d[0]))):
            out.write(row + "\n")
        return
    if command == "coverage":
        orients = _coverage_orientations(cfg)
        rows = []
        for t in st.theta_d:
            for a in st.alpha:
                spec = sweep.CoverageSpec(cfg.headset(t), a, orients, cfg.user_position(), cfg.arena, cfg.channel)
                rows.append((t, a, sweep.connectivity_sweep(spec, st.workers)))
                log.info("coverage theta_d=%g alpha=%g -> %g%%", t, a, rows[-1][2])
        _emit(("theta_d", "alpha", "coverage_pct"), rows, out)
        return

    users = user_grid(cfg.arena, st.users_per_side, st.margin)
    orients = sweep.random_orientations(st.orientations, st.seed, st.tilt)
    common = dict(
        arena=cfg.arena, combiners=st.combiners, orientations=orients, users=users,
        params=cfg.channel, r_headset=cfg.r_headset, r_pd=cfg.r_pd, workers=st.workers,
    )
    if command == "sinr-sweep":
        res = sweep.sinr_alpha_sweep(st.alpha, st.theta_d, **common)
        for t, a in res.skipped:
            log.warning("infeasible point skipped: theta_d=%g alpha=%g", t, a)
        _emit(
            ("theta_d", "alpha", "combiner", "mean_sinr_db", "ci95_db", "n_samples"),
            ((p.theta_d, p.alpha, p.combiner, p.mean_db, p.ci95_db, p.n_samples) for p in res.points),
            out,
        )
    elif command == "npd-study":
        res = sweep.npd_study(st.theta_d, st.alpha[0], **common)
        _emit(
            ("theta_d", "n_pd", "combiner", "mean_sinr_db", "ci95_db"),
            ((p.theta_d, p.n_pd, p.combiner, p.mean_db, p.ci95_db) for p in res.points),
            out,
        )
    elif command == "trace-replay":
        if not st.trace:
            raise UsageError("trace-replay needs --trace or [study] trace")
        with open(st.trace, encoding="utf-8") as fh:
            trace = load_orientation_trace(fh)
        theta_d, alpha = st.theta_d[0], st.alpha[0]
        params = sweep.with_fov(cfg.channel, alpha, theta_d)
        layout = build_layout(cfg.headset(theta_d))
        reports = sweep.trace_replay(trace, cfg.user_position(), cfg.arena, layout, params)
        combiner = st.combiners[0]
        rows = []
        for t, rep in zip(trace.times, reports):
            s = rep.sinr(combiner)
            rows.append((t, to_db(s), rep.best_branch, shannon_rate(s, params.bandwidth)))
        _emit(("time_s", "sinr_db", "best_branch", "rate_bps"), rows, out)


def _configure_logging(verbose: bool) -> None:
    # own handler on the package logger: works even when the host already configured root
    pkg = logging.getLogger("vrvlc")
    for h in list(pkg.handlers):
        if getattr(h, "_vrvlc_cli", False):
            pkg.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler._vrvlc_cli = True
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    pkg.addHandler(handler)
    pkg.setLevel(logging.INFO if verbose else logging.WARNING)
    pkg.propagate = False


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    _configure_logging(args.verbose)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with contextlib.ExitStack() as stack:
            if cfg.study.output and args.command != "emit-defaults" or args.output:
                path = args.output or cfg.study.output
                try:
                    out = stack.enter_context(open(path, "w", encoding="utf-8", newline=""))
                except OSError as exc:
                    print(f"error: cannot write {path}: {exc.strerror}", file=sys.stderr)
                    return EXIT_RUNTIME
            else:
                out = sys.stdout
            _run_study(args.command, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
