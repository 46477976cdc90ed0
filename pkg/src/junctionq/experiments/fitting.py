"""Phase-type fits of single distributions and of the configured routes."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

from junctionq.ctmc import route_processes
from junctionq.models import PhaseRow, PhaseTypeSpec, RouteFit
from junctionq.phase_fit import fit_hypoexp

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer


class FittingResource:
    """Resource for inspecting hypoexponential fits."""

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def fit(self, mean: float, cv: float) -> PhaseTypeSpec:
        """Fit a single distribution.

        Example:
            >>> analyzer.fitting.fit(3.0, 0.5).k
            4
        """
        return fit_hypoexp(mean, cv)

    @staticmethod
    def phase_table(spec: PhaseTypeSpec) -> list[PhaseRow]:
        """One row per phase with its segment, rate and mean duration."""
        return [
            PhaseRow(
                phase=p,
                segment="a" if p <= spec.k_star else "b",
                rate=spec.rate(p),
                mean=1.0 / spec.rate(p),
            )
            for p in range(1, spec.k + 1)
        ]

    def route_fits(
        self, n_total: Optional[float] = None, p_main: Optional[float] = None
    ) -> list[RouteFit]:
        """Arrival and service fits of every modeled route under the configured setting."""
        loads = self._analyzer.loads(n_total, p_main)
        indices, processes = route_processes(loads, self._analyzer.config.model.setting)
        return [
            RouteFit(
                route=process.name,
                arrival=process.arrival,
                service=process.service,
                occupancy=loads[i].occupancy or 0.0,
            )
            for i, process in zip(indices, processes)
        ]
