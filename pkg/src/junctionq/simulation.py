"""Discrete-event simulation of the junction with phase-type sampled times."""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Generator, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Optional

import numpy as np
import numpy.typing as npt
import simpy

from junctionq.ctmc import RouteProcess
from junctionq.models import ConflictMatrix, RouteLoad, SimConfig, SimResult
from junctionq.phase_fit import sample

logger = logging.getLogger(__name__)

StartRecord = tuple[str, float, float]


class _Replication:
    """One simulated run: per-route FIFO queues and a greedy conflict-aware dispatcher."""

    def __init__(
        self,
        conflicts: ConflictMatrix,
        names: list[str],
        processes: dict[int, RouteProcess],
        cfg: SimConfig,
        seed: np.random.SeedSequence,
    ) -> None:
        self.env = simpy.Environment()
        self.rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.names = names
        self.processes = processes
        self.neighbours = [conflicts.neighbours(r) for r in range(len(names))]
        self.queues: list[deque[float]] = [deque() for _ in names]
        self.busy = [False] * len(names)
        self.samples: list[list[int]] = []
        self.starts: list[StartRecord] = []
        self.dropped = 0
        for r in processes:
            self.env.process(self._arrivals(r))
        self.env.process(self._monitor())

    def _blocked(self, r: int) -> bool:
        return self.busy[r] or any(self.busy[j] for j in self.neighbours[r])

    def _arrivals(self, r: int) -> Generator[simpy.Event, Any, None]:
        spec = self.processes[r].arrival
        while True:
            yield self.env.timeout(sample(spec, self.rng))
            cap = self.cfg.queue_cap
            if cap is not None and self._blocked(r) and len(self.queues[r]) >= cap:
                self.dropped += 1
                continue
            self.queues[r].append(self.env.now)
            self._dispatch()

    def _dispatch(self) -> None:
        while True:
            eligible = [r for r, q in enumerate(self.queues) if q and not self._blocked(r)]
            if not eligible:
                return
            self._start(min(eligible, key=lambda r: self.queues[r][0]))

    def _start(self, r: int) -> None:
        arrived = self.queues[r].popleft()
        assert not any(self.busy[j] for j in self.neighbours[r]), "conflicting routes in service"
        self.busy[r] = True
        if self.cfg.keep_traces:
            self.starts.append((self.names[r], arrived, self.env.now))
        self.env.process(self._serve(r))

    def _serve(self, r: int) -> Generator[simpy.Event, Any, None]:
        yield self.env.timeout(sample(self.processes[r].service, self.rng))
        self.busy[r] = False
        self._dispatch()

    def _monitor(self) -> Generator[simpy.Event, Any, None]:
        if self.cfg.warmup > 0:
            yield self.env.timeout(self.cfg.warmup)
        while True:
            self.samples.append([len(q) for q in self.queues])
            yield self.env.timeout(self.cfg.sample_interval)

    def run(self) -> tuple[npt.NDArray[np.float64], list[list[int]], list[StartRecord]]:
        self.env.run(until=self.cfg.horizon)
        if self.dropped:
            logger.debug("Dropped %d arrivals at full queues", self.dropped)
        means = np.asarray(self.samples, dtype=np.float64).mean(axis=0)
        return means, self.samples, self.starts


def _run_replication(
    args: tuple[ConflictMatrix, list[str], dict[int, RouteProcess], SimConfig, Any],
) -> tuple[npt.NDArray[np.float64], list[list[int]], list[StartRecord]]:
    return _Replication(*args).run()


def simulate(
    conflicts: ConflictMatrix,
    loads: list[RouteLoad],
    processes: Sequence[RouteProcess],
    cfg: SimConfig,
) -> SimResult:
    """Simulate the junction and average the sampled waiting counts per route.

    A train starts service on arrival if its route and all conflicting routes are
    idle, otherwise it joins its route's FIFO queue. Whenever service ends, the
    eligible queued train with the earliest arrival starts, repeatedly, until no
    queued train is eligible. Routes without a process receive no trains.

    Args:
        conflicts: Conflict relation over all routes in ``loads``.
        loads: Route loads, in conflict-matrix order.
        processes: Fitted processes for the routes with demand, matched by name.
        cfg: Horizon, replications, seed and sampling settings.

    Returns:
        Across-replication means and standard errors per route.

    Example:
        >>> result = simulate(conflicts, loads, processes, SimConfig(replications=10))
        >>> sorted(result.mean_queue)
        ['r1', 'r2', 'r3', 'r4']
    """
    names = [load.route for load in loads]
    by_route = {names.index(p.name): p for p in processes}
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    jobs = [(conflicts, names, by_route, cfg, seed) for seed in seeds]

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as executor:
            runs = list(executor.map(_run_replication, jobs))
    else:
        runs = [_run_replication(job) for job in jobs]

    means = np.vstack([run[0] for run in runs])
    overall = means.mean(axis=0)
    if cfg.replications > 1:
        errors = means.std(axis=0, ddof=1) / math.sqrt(cfg.replications)
    else:
        errors = np.zeros(len(names))
    logger.info(
        "Simulated %d replications of %.6g minutes: %s",
        cfg.replications,
        cfg.horizon,
        ", ".join(f"{n}={m:.4g}" for n, m in zip(names, overall)),
    )
    return SimResult(
        routes=names,
        mean_queue={n: float(v) for n, v in zip(names, overall)},
        std_error={n: float(v) for n, v in zip(names, errors)},
        replication_means=[{n: float(v) for n, v in zip(names, row)} for row in means],
        traces=(
            [[[float(x) for x in s] for s in run[1]] for run in runs] if cfg.keep_traces else None
        ),
        start_log=[run[2] for run in runs] if cfg.keep_traces else None,
    )


def capacity_bounds(
    grid: Sequence[float],
    lengths: Sequence[Mapping[str, float]],
    limits: Mapping[str, float],
) -> tuple[Optional[float], Optional[float]]:
    """Capacity bounds from queue lengths simulated on a grid of train counts.

    The lower bound is the largest grid value up to which every value keeps all
    routes within their limits; the upper bound is the smallest grid value from
    which every value exceeds some limit. A bound is None when the grid does not
    reach it.

    Example:
        >>> capacity_bounds([16.0, 16.04], [{"r": 0.1}, {"r": 0.2}], {"r": 0.13})
        (16.0, 16.04)
    """
    order = np.argsort(grid)
    values = [float(grid[i]) for i in order]
    within = [all(lengths[i][r] <= limit for r, limit in limits.items()) for i in order]

    lower: Optional[float] = None
    for value, ok in zip(values, within):
        if not ok:
            break
        lower = value

    upper: Optional[float] = None
    for value, ok in zip(reversed(values), reversed(within)):
        if ok:
            break
        upper = value
    return lower, upper
