"""Discrete-event runs of the configured scenario."""

from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING, Optional

from junctionq.ctmc import route_processes
from junctionq.models import CapacityBounds, ModelSetting, SimConfig, SimResult
from junctionq.simulation import capacity_bounds, simulate

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer


class SimulationResource:
    """Resource for simulating the junction.

    Simulated trains always use the fitted phase-type arrival and service
    distributions, whatever the configured chain setting.
    """

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def run(
        self,
        n_total: Optional[float] = None,
        p_main: Optional[float] = None,
        cfg: Optional[SimConfig] = None,
    ) -> SimResult:
        """Simulate at one train count and share.

        Args:
            n_total: Train count; the configured one if not provided.
            p_main: Main-line share; the configured one if not provided.
            cfg: Simulation settings; the configured ones if not provided.

        Returns:
            Per-route means and standard errors across replications.
        """
        config = self._analyzer.config
        loads = self._analyzer.loads(n_total, p_main)
        _, processes = route_processes(loads, ModelSetting.PH_PH)
        return simulate(
            config.junction.conflict_matrix(),
            loads,
            processes,
            cfg or config.simulation,
        )

    def bounds(
        self,
        grid: Optional[Sequence[float]] = None,
        p_main: Optional[float] = None,
        cfg: Optional[SimConfig] = None,
    ) -> CapacityBounds:
        """Capacity bounds from simulated queue lengths over ``grid``.

        Each route's limit is taken from its load at the first grid value; limits
        depend only on the traffic mix.

        Example:
            >>> bounds = analyzer.simulation.bounds([14.0, 15.0, 16.0, 17.0])
            >>> bounds.lower <= bounds.upper
            True
        """
        values = sorted(grid if grid is not None else self._analyzer.config.sweep.n_total)
        share = p_main if p_main is not None else self._analyzer.config.traffic.p_main
        limits = {
            load.route: load.queue_limit
            for load in self._analyzer.loads(values[0], share)
            if load.queue_limit is not None
        }
        lengths = [self.run(n, share, cfg).mean_queue for n in values]
        lower, upper = capacity_bounds(values, lengths, limits)
        return CapacityBounds(
            p_main=share, lower=lower, upper=upper, grid=values, mean_queue=lengths
        )
