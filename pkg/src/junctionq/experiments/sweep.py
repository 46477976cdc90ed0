"""Capacity sweeps over main-line shares, model settings and scalings."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import TYPE_CHECKING, Optional

from junctionq.config import ScenarioConfig
from junctionq.exceptions import JunctionqError
from junctionq.models import CapacityResult, ModelSetting, Scaling, SweepRow

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer

logger = logging.getLogger(__name__)

Scenario = tuple[float, ModelSetting, Scaling]


def _run_scenario(
    args: tuple[ScenarioConfig, int, Scenario],
) -> tuple[SweepRow, Optional[CapacityResult]]:
    from junctionq.analyzer import JunctionAnalyzer

    config, state_cap, (p_main, setting, scaling) = args
    analyzer = JunctionAnalyzer(config, state_cap=state_cap)
    try:
        result = analyzer.capacity.find(p_main=p_main, setting=setting, scaling=scaling)
    except JunctionqError as exc:
        logger.warning(
            "Scenario p_main=%s %s/%s failed: %s", p_main, setting.value, scaling.value, exc
        )
        return SweepRow(p_main=p_main, setting=setting, scaling=scaling, error=str(exc)), None
    logger.info(
        "Scenario p_main=%s %s/%s: n_max=%.6g",
        p_main,
        setting.value,
        scaling.value,
        result.n_max,
    )
    row = SweepRow(
        p_main=p_main,
        setting=setting,
        scaling=scaling,
        n_max=result.n_max,
        bottleneck_route=result.bottleneck_route,
        bound_status=result.bound_status,
        function_calls=result.function_calls,
        converged=result.converged,
    )
    return row, result


class SweepResource:
    """Resource for capacity sweeps."""

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def scenarios(self) -> list[Scenario]:
        """Share, setting and scaling combinations of the configured sweep.

        Empty setting or scaling lists fall back to the configured model. Phase-type
        arrival and service together are only combined with no scaling.
        """
        cfg = self._analyzer.config
        settings = cfg.sweep.settings or [cfg.model.setting]
        scalings = cfg.sweep.scalings or [cfg.model.scaling]
        combos = []
        for p_main, setting, scaling in itertools.product(cfg.sweep.p_main, settings, scalings):
            if setting is ModelSetting.PH_PH and scaling is not Scaling.NONE:
                logger.debug("Skipping %s with %s scaling", setting.value, scaling.value)
                continue
            combos.append((p_main, setting, scaling))
        return combos

    def run(self, jobs: int = 1) -> list[SweepRow]:
        """Capacity of every scenario; failures are recorded in the row's ``error``.

        Args:
            jobs: Worker processes. Each worker builds its own models.

        Returns:
            One row per scenario, in scenario order.

        Example:
            >>> rows = analyzer.sweep.run(jobs=4)
            >>> [row.p_main for row in rows if row.error]
            []
        """
        return [row for row, _ in self.results(jobs)]

    def results(self, jobs: int = 1) -> list[tuple[SweepRow, Optional[CapacityResult]]]:
        """Rows together with the full capacity results (None for failed scenarios)."""
        args = [
            (self._analyzer.config, self._analyzer.state_cap, scenario)
            for scenario in self.scenarios()
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                return list(executor.map(_run_scenario, args))
        return [_run_scenario(a) for a in args]
