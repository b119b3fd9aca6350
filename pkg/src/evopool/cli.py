"""Command line entry point: serve, island, simulate, analyze.

Options resolve with precedence flags > environment > config file >
defaults.  The EVOPOOL_* environment variables apply to `serve`; a JSON
config file passed with --config holds one object per subcommand, e.g.
{"serve": {"port": 8080}, "simulate": {"seed": 7}}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, analysis
from .churn import SIM_DEFAULT_SPEC, ChurnProfile, run_simulation
from .engine import EAParams
from .island import run_island
from .pool import Experiment, LogFileSink
from .server import PoolServer
from .transport import HttpTransport, NullTransport
from .trap import TrapSpec


class CliError(Exception):
    """Configuration or runtime failure reported as a one-line diagnostic."""


class Options:
    """Merged view of flags, environment, config file and defaults."""

    def __init__(self, args: argparse.Namespace, section: str):
        self.args = args
        self.env_prefix = "EVOPOOL_" if section == "serve" else None
        self.file_cfg = {}
        cfg_path = getattr(args, "config", None)
        if cfg_path:
            try:
                with open(cfg_path, encoding="utf-8") as fh:
                    whole = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError(f"cannot read config file {cfg_path}: {exc}") from exc
            if not isinstance(whole, dict):
                raise CliError("config file must contain a JSON object")
            section_cfg = whole.get(section, {})
            if not isinstance(section_cfg, dict):
                raise CliError(f"config section {section!r} must be an object")
            self.file_cfg = section_cfg

    def get(self, name: str, default, cast=None):
        value = getattr(self.args, name, None)
        if value is None and self.env_prefix is not None:
            raw = os.environ.get(self.env_prefix + name.upper())
            if raw is not None:
                value = raw
        if value is None and name in self.file_cfg:
            value = self.file_cfg[name]
        if value is None:
            return default
        if cast is not None:
            try:
                return cast(value)
            except (TypeError, ValueError) as exc:
                raise CliError(f"bad value for {name}: {value!r}") from exc
        return value


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).lower() in ("1", "true", "yes", "on")


def _spec_from(opts: Options, default_spec: TrapSpec) -> TrapSpec:
    try:
        return TrapSpec(
            trap_length=opts.get("trap_length", default_spec.trap_length, int),
            trap_count=opts.get("traps", default_spec.trap_count, int),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _params_from(opts: Options) -> EAParams:
    try:
        return EAParams(
            population_size=opts.get("pop", 256, int),
            elite_size=opts.get("elite", 2, int),
            tournament_size=opts.get("tournament", 2, int),
            crossover_rate=opts.get("crossover_rate", 0.9, float),
            mutation_rate=opts.get("mutation_rate", None, float),
            migration_period=opts.get("period", 100, int),
            max_generations=opts.get("max_generations", None, int),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_serve(args: argparse.Namespace) -> int:
    opts = Options(args, "serve")
    spec = _spec_from(opts, TrapSpec())
    host = opts.get("host", "127.0.0.1", str)
    port = opts.get("port", 8080, int)
    seed_count = opts.get("seed_count", 0, int)
    capacity = opts.get("capacity", None, int)
    seed = opts.get("seed", 0, int)
    log_file = opts.get("log_file", "pool_log.ndjson", str)
    static_dir = opts.get("static_dir", None, str)
    admin = opts.get("admin", False, _bool)
    verbose = opts.get("verbose", False, _bool)
    if static_dir is not None and not os.path.isdir(static_dir):
        raise CliError(f"static dir does not exist: {static_dir}")
    try:
        sink = LogFileSink(log_file)
    except OSError as exc:
        raise CliError(f"cannot open log file {log_file}: {exc}") from exc
    try:
        experiment = Experiment(
            spec, seed_count=seed_count, capacity=capacity, seed=seed, sink=sink
        )
        server = PoolServer(
            experiment,
            host=host,
            port=port,
            static_dir=static_dir,
            admin_enabled=admin,
            verbose=verbose,
        )
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    actual_host, actual_port = server.address
    print(
        f"pool server on http://{actual_host}:{actual_port} "
        f"(traps {spec.trap_count}x{spec.trap_length}, pool seeds {seed_count}, "
        f"log {log_file})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        sink.close()
    return 0


def cmd_island(args: argparse.Namespace) -> int:
    opts = Options(args, "island")
    spec = _spec_from(opts, TrapSpec())
    params = _params_from(opts)
    seed = opts.get("seed", 1, int)
    report_path = opts.get("report", "island_report.json", str)
    server_url = opts.get("server", None, str)
    timeout = opts.get("timeout", 2.0, float)
    if server_url in (None, "", "none"):
        transport = NullTransport()
    else:
        token = f"{seed}-{os.getpid()}"
        transport = HttpTransport(server_url, timeout=timeout, client_token=token)
    report = run_island(params, spec, transport, seed)
    try:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    except OSError as exc:
        raise CliError(f"cannot write report {report_path}: {exc}") from exc
    print(
        f"island seed {seed}: solved={report.solved} generations={report.generations} "
        f"sent={report.migrations_sent} received={report.migrations_received} "
        f"({report.wall_clock_seconds:.2f}s)"
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    opts = Options(args, "simulate")
    spec = _spec_from(opts, SIM_DEFAULT_SPEC)
    params = _params_from(opts)
    out_dir = opts.get("out_dir", ".", str)
    runs = opts.get("runs", 1, int)
    if runs < 1:
        raise CliError("runs must be >= 1")
    base_seed = opts.get("seed", 0, int)
    try:
        profile_base = dict(
            participant_min=opts.get("participants_min", 6, int),
            participant_max=opts.get("participants_max", 28, int),
            zipf_exponent=opts.get("zipf", 1.0, float),
            interval_mu=opts.get("interval_mu", 0.712, float),
            interval_sigma=opts.get("interval_sigma", 1.0, float),
            join_spread=opts.get("join_spread", 5400.0, float),
        )
        profiles = [ChurnProfile(seed=base_seed + i, **profile_base) for i in range(runs)]
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    os.makedirs(out_dir, exist_ok=True)
    for profile in profiles:
        report = run_simulation(profile, params=params, spec=spec)
        suffix = f"_s{profile.seed}" if runs > 1 else ""
        log_path = os.path.join(out_dir, f"churn_log{suffix}.ndjson")
        report_path = os.path.join(out_dir, f"simulation_report{suffix}.json")
        with open(log_path, "w", encoding="utf-8") as fh:
            for event in report.log:
                fh.write(event.to_line() + "\n")
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        solved = (
            f"solved at {report.solved_at_seconds:.1f}s"
            if report.solved_at_seconds is not None
            else "quotas exhausted"
        )
        print(
            f"simulate seed {profile.seed}: {report.participants} volunteers, "
            f"{report.total_puts} PUTs, {solved} -> {log_path}"
        )
    return 0


def _load_input(source: str) -> analysis.ParseResult:
    if source.startswith(("http://", "https://")):
        import requests

        try:
            resp = requests.get(source, timeout=10)
            resp.raise_for_status()
        except Exception as exc:
            raise CliError(f"cannot fetch {source}: {exc}") from exc
        raw: bytes | str = resp.content
    else:
        try:
            with open(source, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {source}: {exc}") from exc
    try:
        return analysis.parse_log(raw)
    except analysis.LogFormatError as exc:
        raise CliError(f"{source}: {exc}") from exc


def cmd_analyze(args: argparse.Namespace) -> int:
    opts = Options(args, "analyze")
    inputs = args.input or opts.file_cfg.get("input") or []
    if isinstance(inputs, str):
        inputs = [inputs]
    if not inputs:
        raise CliError("analyze needs at least one --input log file or URL")
    out_dir = opts.get("out_dir", "analysis_out", str)
    with_figures = opts.get("figures", True, _bool)
    if with_figures:
        from . import figures  # matplotlib import deferred to the one path that needs it
    parsed = [(src, _load_input(src)) for src in inputs]
    per_log = [(src, analysis.compute_stats(p.events)) for src, p in parsed]
    skipped = sum(p.skipped for _, p in parsed)
    # the primary log (most distinct clients) feeds ranked_puts and summary
    primary_src, primary = max(per_log, key=lambda kv: kv[1].distinct_clients)
    os.makedirs(out_dir, exist_ok=True)
    if len(per_log) > 1:
        import numpy as np

        pooled = np.concatenate([s.intervals_seconds for _, s in per_log])
        pooled_stats = analysis.ExperimentStats(
            distinct_clients=primary.distinct_clients,
            ranked_put_counts=primary.ranked_put_counts,
            duration_seconds=primary.duration_seconds,
            interval_histogram=analysis.interval_histogram(pooled),
            power_law_slope=primary.power_law_slope,
            power_law_stderr=primary.power_law_stderr,
            median_interval_seconds=float(np.median(pooled)) if pooled.size else None,
            total_puts=primary.total_puts,
            total_events=primary.total_events,
            intervals_seconds=pooled,
        )
        paths = analysis.export_csv(pooled_stats, out_dir)
        with open(os.path.join(out_dir, "experiments.csv"), "w", encoding="utf-8") as fh:
            fh.write(
                "log,distinct_clients,total_puts,duration_seconds,"
                "fraction_under_4s,power_law_slope\n"
            )
            for src, s in per_log:
                slope = "" if s.power_law_slope is None else repr(s.power_law_slope)
                fh.write(
                    f"{os.path.basename(src)},{s.distinct_clients},{s.total_puts},"
                    f"{s.duration_seconds!r},{s.fraction_under(4.0)!r},{slope}\n"
                )
        if with_figures:
            figures.render_single(pooled_stats, out_dir)
            figures.render_batch([s for _, s in per_log], out_dir)
    else:
        paths = analysis.export_csv(primary, out_dir)
        if with_figures:
            figures.render_single(primary, out_dir)
    note = f", skipped {skipped} malformed lines" if skipped else ""
    print(
        f"analyzed {len(per_log)} log(s): primary {os.path.basename(primary_src)} "
        f"with {primary.distinct_clients} clients, {primary.total_puts} PUTs{note} "
        f"-> {out_dir}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evopool",
        description="Pool-based distributed evolutionary computation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"evopool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (per-subcommand sections)")

    def add_spec(p):
        p.add_argument("--trap-length", dest="trap_length", type=int)
        p.add_argument("--traps", type=int, help="number of concatenated trap blocks")

    def add_params(p):
        p.add_argument("--pop", type=int, help="population size")
        p.add_argument("--elite", type=int)
        p.add_argument("--tournament", type=int)
        p.add_argument("--crossover-rate", dest="crossover_rate", type=float)
        p.add_argument("--mutation-rate", dest="mutation_rate", type=float)
        p.add_argument("--period", type=int, help="generations between migrations")
        p.add_argument("--max-generations", dest="max_generations", type=int)

    p = sub.add_parser("serve", help="run the pool server")
    add_common(p)
    add_spec(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--seed-count", dest="seed_count", type=int)
    p.add_argument("--capacity", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--log-file", dest="log_file")
    p.add_argument("--static-dir", dest="static_dir")
    p.add_argument("--admin", action=argparse.BooleanOptionalAction)
    p.add_argument("--verbose", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("island", help="run one native island")
    add_common(p)
    add_spec(p)
    add_params(p)
    p.add_argument("--server", help="pool server URL, or 'none' for a local run")
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--report", help="island report JSON output path")
    p.set_defaults(func=cmd_island)

    p = sub.add_parser("simulate", help="run the volunteer churn simulator")
    add_common(p)
    add_spec(p)
    add_params(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, help="consecutive seeds starting at --seed")
    p.add_argument("--participants-min", dest="participants_min", type=int)
    p.add_argument("--participants-max", dest="participants_max", type=int)
    p.add_argument("--zipf", type=float, help="contribution power-law exponent")
    p.add_argument("--interval-mu", dest="interval_mu", type=float)
    p.add_argument("--interval-sigma", dest="interval_sigma", type=float)
    p.add_argument("--join-spread", dest="join_spread", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="recompute statistics from logs")
    add_common(p)
    p.add_argument("--input", action="append", help="log file or /log URL (repeatable)")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
