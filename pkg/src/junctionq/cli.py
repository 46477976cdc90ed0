"""Command-line entry point ``junctionq``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from junctionq.analyzer import JunctionAnalyzer
from junctionq.config import ScenarioConfig, load_config
from junctionq.exceptions import JunctionqError
from junctionq.experiments.tables import DEFAULT_TABLES, TABLES
from junctionq.export import trace_rows, write_csv, write_json
from junctionq.models import CheckStatus, ModelSetting, Scaling

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass
class CommandOptions:
    """Options shared by all commands; None means the configured value."""

    out: Path = Path("out")
    setting: Optional[ModelSetting] = None
    scaling: Optional[Scaling] = None
    jobs: int = 1
    seed: Optional[int] = None
    p_main: Optional[float] = None
    n_total: Optional[float] = None
    mean: Optional[float] = None
    cv: Optional[float] = None
    with_simulation: bool = False
    traces: bool = False
    bounds: bool = False
    timings: bool = False
    tables: tuple[str, ...] = DEFAULT_TABLES
    grid: list[float] = field(default_factory=list)


def _fit_report(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    if options.mean is not None and options.cv is not None:
        spec = analyzer.fitting.fit(options.mean, options.cv)
        rows = analyzer.fitting.phase_table(spec)
        write_csv(options.out / "fit_report.csv", rows, analyzer.config_hash)
        print(f"k={spec.k} k_star={spec.k_star} rate_a={spec.rate_a:.6g} rate_b={spec.rate_b:.6g}")
        return 0
    fits = analyzer.fitting.route_fits()
    write_csv(options.out / "route_fits.csv", fits, analyzer.config_hash)
    for fit in fits:
        print(f"{fit.route} arrival_k={fit.arrival.k} service_k={fit.service.k}")
    return 0


def _queue_lengths(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    rows = analyzer.queues.curve(options.grid or None, with_simulation=options.with_simulation)
    write_csv(options.out / "queue_lengths.csv", rows, analyzer.config_hash)
    print(f"rows={len(rows)}")
    return 0


def _capacity(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    result = analyzer.capacity.find()
    payload = result.model_dump(
        mode="json",
        exclude=None if options.timings else {"evaluations": {"__all__": {"wall_time"}}},
    )
    write_json(options.out / "capacity.json", payload, analyzer.config_hash)
    write_csv(
        options.out / "capacity_trace.csv",
        trace_rows(result, options.timings),
        analyzer.config_hash,
    )
    print(
        f"n_max={result.n_max:.6g} bottleneck={result.bottleneck_route} "
        f"status={result.bound_status.value} evaluations={result.function_calls}"
    )
    return 0


def _sweep(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    results = analyzer.sweep.results(jobs=options.jobs)
    rows = [row for row, _ in results]
    write_csv(options.out / "sweep.csv", rows, analyzer.config_hash)
    traces = [
        trace
        for _, result in results
        if result is not None
        for trace in trace_rows(result, options.timings)
    ]
    write_csv(options.out / "sweep_trace.csv", traces, analyzer.config_hash)
    failed = [row for row in rows if row.error]
    print(f"scenarios={len(rows)} failed={len(failed)}")
    return 1 if failed else 0


def _simulate(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    sim_cfg = analyzer.config.simulation
    if options.traces:
        sim_cfg = sim_cfg.model_copy(update={"keep_traces": True})
    if options.bounds:
        bounds = analyzer.simulation.bounds(options.grid or None, cfg=sim_cfg)
        write_json(options.out / "bounds.json", bounds, analyzer.config_hash)
        print(f"lower={bounds.lower} upper={bounds.upper}")
        return 0

    result = analyzer.simulation.run(cfg=sim_cfg)
    rows = [
        {"route": r, "mean_queue": result.mean_queue[r], "std_error": result.std_error[r]}
        for r in result.routes
    ]
    write_csv(options.out / "simulate.csv", rows, analyzer.config_hash)
    if result.traces is not None:
        interval = sim_cfg.sample_interval
        trace = (
            {
                "replication": rep,
                "minute": sim_cfg.warmup + i * interval,
                **dict(zip(result.routes, sample)),
            }
            for rep, samples in enumerate(result.traces)
            for i, sample in enumerate(samples)
        )
        write_csv(options.out / "simulate_trace.csv", trace, analyzer.config_hash)
    print(" ".join(f"{r}={result.mean_queue[r]:.6g}" for r in result.routes))
    return 0


def _validate_tables(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    checks = analyzer.tables.run(options.tables)
    write_csv(options.out / "tables.csv", checks, analyzer.config_hash)
    failed = [check for check in checks if not check.ok]
    for check in failed:
        if check.status is CheckStatus.SKIPPED:
            logger.warning("%s %s: %s", check.table, check.key, check.note)
            continue
        logger.warning(
            "%s %s: published %s, computed %s",
            check.table,
            check.key,
            check.published,
            check.computed,
        )
    skipped = sum(check.status is CheckStatus.SKIPPED for check in checks)
    print(f"checks={len(checks)} failed={len(failed) - skipped} skipped={skipped}")
    return 1 if failed else 0


def _export_model(analyzer: JunctionAnalyzer, options: CommandOptions) -> int:
    paths = analyzer.models.export(options.out)
    print(" ".join(str(p) for p in paths))
    return 0


HANDLERS: dict[str, Callable[[JunctionAnalyzer, CommandOptions], int]] = {
    "fit-report": _fit_report,
    "queue-lengths": _queue_lengths,
    "capacity": _capacity,
    "sweep": _sweep,
    "simulate": _simulate,
    "validate-tables": _validate_tables,
    "export-model": _export_model,
}


def run_command(config: ScenarioConfig, command: str, options: CommandOptions) -> int:
    """Run one command against ``config`` and write its artifacts to ``options.out``.

    Returns:
        0 on success, 1 if the command or any of its scenarios failed.

    Raises:
        ValueError: If ``command`` is unknown.
    """
    handler = HANDLERS.get(command)
    if handler is None:
        raise ValueError(f"unknown command {command!r}")
    config = config.with_overrides(
        setting=options.setting,
        scaling=options.scaling,
        p_main=options.p_main,
        n_total=options.n_total,
        seed=options.seed,
        jobs=options.jobs if options.jobs > 1 else None,
    )
    analyzer = JunctionAnalyzer(config)
    try:
        return handler(analyzer, options)
    except JunctionqError as exc:
        logger.error("%s failed: %s", command, exc)
        return 1


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _table_list(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = [name for name in names if name not in TABLES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown tables {', '.join(unknown)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="case_study", help="scenario file or bundled name")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--setting", type=ModelSetting, choices=list(ModelSetting))
    common.add_argument("--scaling", type=Scaling, choices=list(Scaling))
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int)
    common.add_argument("--p-main", type=float)
    common.add_argument("--n-total", type=float)
    common.add_argument("--grid", type=_float_list, default=[], help="train counts, e.g. 8,12,16")
    common.add_argument("--timings", action="store_true", help="add wall time to traces")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="junctionq", description="Timetable capacity of railway junctions."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit-report", parents=[common], help="phase-type fits")
    fit.add_argument("--mean", type=float)
    fit.add_argument("--cv", type=float)
    queues = sub.add_parser("queue-lengths", parents=[common], help="queue lengths vs train count")
    queues.add_argument("--with-simulation", action="store_true")
    sub.add_parser("capacity", parents=[common], help="capacity at one share")
    sub.add_parser("sweep", parents=[common], help="capacities over shares and models")
    simulate = sub.add_parser("simulate", parents=[common], help="discrete-event simulation")
    simulate.add_argument("--traces", action="store_true", help="write per-minute queue lengths")
    simulate.add_argument("--bounds", action="store_true", help="capacity bounds over the grid")
    tables = sub.add_parser("validate-tables", parents=[common], help="compare published tables")
    tables.add_argument("--tables", type=_table_list, default=DEFAULT_TABLES)
    sub.add_parser("export-model", parents=[common], help="PRISM and edge-list export")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    options = CommandOptions(
        out=args.out,
        setting=args.setting,
        scaling=args.scaling,
        jobs=args.jobs,
        seed=args.seed,
        p_main=args.p_main,
        n_total=args.n_total,
        mean=getattr(args, "mean", None),
        cv=getattr(args, "cv", None),
        with_simulation=getattr(args, "with_simulation", False),
        traces=getattr(args, "traces", False),
        bounds=getattr(args, "bounds", False),
        timings=args.timings,
        tables=getattr(args, "tables", DEFAULT_TABLES),
        grid=args.grid,
    )
    try:
        config = load_config(args.config)
        return run_command(config, args.command, options)
    except JunctionqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
