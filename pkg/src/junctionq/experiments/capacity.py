"""Single capacity searches."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

from junctionq.capacity import find_capacity
from junctionq.models import CapacityResult, ModelSetting, Scaling

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer


class CapacityResource:
    """Resource for capacity searches at one main-line share."""

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def find(
        self,
        p_main: Optional[float] = None,
        setting: Optional[ModelSetting] = None,
        scaling: Optional[Scaling] = None,
    ) -> CapacityResult:
        """Search the configured interval for the capacity.

        Args:
            p_main: Main-line share; the configured share if not provided.
            setting: Model setting; the configured one if not provided.
            scaling: Scaling formula; the configured one if not provided.

        Returns:
            The capacity, its bottleneck route and the evaluation trace.

        Raises:
            EvaluationError: If the capacity function fails at some train count.
            ConvergenceError: If the root search does not converge.

        Example:
            >>> result = analyzer.capacity.find(p_main=0.5)
            >>> result.bottleneck_route
            'r3'
        """
        options = self._analyzer.config.capacity
        problem = self._analyzer.problem(p_main=p_main, setting=setting, scaling=scaling)
        return find_capacity(
            problem,
            lower=options.lower,
            upper=options.upper,
            xtol=options.xtol,
            rtol=options.rtol,
            max_iter=options.max_iter,
            probe=options.probe,
        )
