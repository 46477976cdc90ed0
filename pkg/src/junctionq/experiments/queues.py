"""Queue lengths over a grid of train counts."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import TYPE_CHECKING, Optional

from junctionq.approximations import scaling_factor
from junctionq.ctmc import build_model
from junctionq.models import QueueLengthRow, RouteLoad, Scaling, SimResult
from junctionq.steady_state import expected_queue_length, stationary

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer

logger = logging.getLogger(__name__)


class QueuesResource:
    """Resource for per-route queue length curves."""

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def at(self, n_total: float, sim: Optional[SimResult] = None) -> list[QueueLengthRow]:
        """Chain and scaled queue lengths of every route at one train count.

        Inactive and unloaded routes report zeros. Under Hertel scaling a route at or
        above full occupancy has an infinite scaled length.
        """
        cfg = self._analyzer.config
        loads = self._analyzer.loads(n_total)
        modeled = [load for load in loads if load.modeled]
        lengths: dict[str, float] = {}
        states = 1
        if modeled:
            model = build_model(
                cfg.junction.conflict_matrix(),
                loads,
                cfg.model.setting,
                m=cfg.model.waiting_slots,
                choice_rate=cfg.model.choice_rate,
                state_cap=self._analyzer.state_cap,
            )
            dist = stationary(
                model,
                tol=cfg.solver.tol,
                max_iter=cfg.solver.max_iter,
                method=cfg.solver.method,
                direct_limit=cfg.solver.direct_limit,
            )
            states = model.n_states
            lengths = {
                load.route: expected_queue_length(dist, model, load.route) for load in modeled
            }
        return [
            self._row(n_total, load, lengths.get(load.route, 0.0), states, sim) for load in loads
        ]

    def _row(
        self,
        n_total: float,
        load: RouteLoad,
        length: float,
        states: int,
        sim: Optional[SimResult],
    ) -> QueueLengthRow:
        cfg = self._analyzer.config
        scaled = length
        if load.modeled:
            assert load.service_cv is not None and load.occupancy is not None
            if cfg.model.scaling is Scaling.HERTEL and load.occupancy >= 1:
                scaled = math.inf
            else:
                scaled = length * scaling_factor(
                    cfg.model.scaling,
                    cfg.model.setting,
                    load.arrival_cv,
                    load.service_cv,
                    load.occupancy,
                )
        limit = load.queue_limit
        return QueueLengthRow(
            n_total=n_total,
            route=load.route,
            occupancy=load.occupancy,
            chain_length=length,
            scaled_length=scaled,
            queue_limit=limit,
            quality_factor=scaled / limit if limit else 0.0,
            states=states,
            sim_mean=sim.mean_queue.get(load.route) if sim else None,
            sim_std_error=sim.std_error.get(load.route) if sim else None,
        )

    def curve(
        self, grid: Optional[Sequence[float]] = None, with_simulation: bool = False
    ) -> list[QueueLengthRow]:
        """Queue lengths over ``grid`` (default: the configured sweep grid).

        Args:
            grid: Train counts to evaluate.
            with_simulation: Also simulate each point and add the simulated mean and
                standard error per route.

        Returns:
            One row per grid value and route.

        Example:
            >>> rows = analyzer.queues.curve([8.0, 16.0])
            >>> {row.route for row in rows}
            {'r1', 'r2', 'r3', 'r4'}
        """
        values = list(grid) if grid is not None else self._analyzer.config.sweep.n_total
        rows: list[QueueLengthRow] = []
        for n_total in values:
            sim = self._analyzer.simulation.run(n_total=n_total) if with_simulation else None
            point = self.at(n_total, sim)
            logger.info(
                "Queue lengths at n_total=%.6g: %s",
                n_total,
                ", ".join(f"{row.route}={row.scaled_length:.4g}" for row in point),
            )
            rows.extend(point)
        return rows
