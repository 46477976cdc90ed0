"""Junction analyzer facade."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from junctionq.capacity import CapacityProblem
from junctionq.config import ScenarioConfig, load_config, state_cap_from_env
from junctionq.experiments.capacity import CapacityResource
from junctionq.experiments.chains import ModelsResource
from junctionq.experiments.fitting import FittingResource
from junctionq.experiments.queues import QueuesResource
from junctionq.experiments.simulation import SimulationResource
from junctionq.experiments.sweep import SweepResource
from junctionq.experiments.tables import TablesResource
from junctionq.junction import route_loads
from junctionq.models import ModelSetting, RouteLoad, Scaling


class JunctionAnalyzer:
    """Entry point for analysing one junction scenario.

    Args:
        config: A validated scenario, a path to a scenario document, or the name of a
            bundled scenario.
        state_cap: Largest admissible chain size. If not provided, reads
            JUNCTIONQ_STATE_CAP from the environment, falling back to 12 000 000.

    Example:
        >>> analyzer = JunctionAnalyzer("case_study")
        >>> result = analyzer.capacity.find(p_main=0.5)
        >>> print(result.n_max, result.bottleneck_route)
    """

    def __init__(
        self,
        config: Union[ScenarioConfig, str, Path],
        state_cap: Optional[int] = None,
    ) -> None:
        self.config = config if isinstance(config, ScenarioConfig) else load_config(config)
        self.state_cap = state_cap if state_cap is not None else state_cap_from_env()

        self.fitting = FittingResource(self)
        self.queues = QueuesResource(self)
        self.capacity = CapacityResource(self)
        self.sweep = SweepResource(self)
        self.simulation = SimulationResource(self)
        self.tables = TablesResource(self)
        self.models = ModelsResource(self)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def problem(
        self,
        p_main: Optional[float] = None,
        setting: Optional[ModelSetting] = None,
        scaling: Optional[Scaling] = None,
        config: Optional[ScenarioConfig] = None,
    ) -> CapacityProblem:
        """Capacity problem for the scenario, optionally with another share or model."""
        cfg = config or self.config
        traffic = cfg.traffic if p_main is None else cfg.traffic.with_main_share(p_main)
        return CapacityProblem(
            junction=cfg.junction,
            traffic=traffic,
            setting=setting or cfg.model.setting,
            scaling=scaling or cfg.model.scaling,
            waiting_slots=cfg.model.waiting_slots,
            choice_rate=cfg.model.choice_rate,
            arrival_cv=cfg.model.arrival_cv,
            queue_limit=cfg.model.queue_limit,
            state_cap=self.state_cap,
            tol=cfg.solver.tol,
            max_iter=cfg.solver.max_iter,
            method=cfg.solver.method,
            direct_limit=cfg.solver.direct_limit,
        )

    def loads(
        self, n_total: Optional[float] = None, p_main: Optional[float] = None
    ) -> list[RouteLoad]:
        """Route loads at the configured (or given) train count and main-line share."""
        traffic = self.config.traffic
        if n_total is not None:
            traffic = traffic.with_total(n_total)
        if p_main is not None:
            traffic = traffic.with_main_share(p_main)
        return route_loads(
            self.config.junction,
            traffic,
            self.config.model.arrival_cv,
            self.config.model.queue_limit,
        )
