"""Checks of computed quantities against published reference values."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from typing import TYPE_CHECKING, Optional

from junctionq import reference
from junctionq.config import load_config
from junctionq.ctmc import build_model
from junctionq.exceptions import InvalidParameterError, JunctionqError, StateSpaceTooLargeError
from junctionq.models import CheckStatus, ModelSetting, Scaling, TableCheck

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer

logger = logging.getLogger(__name__)

TABLES = ("state_spaces", "parameters", "capacities", "case_study")
DEFAULT_TABLES = ("state_spaces", "parameters", "capacities")


def _check(
    table: str, key: str, published: float, computed: Optional[float], tolerance: float
) -> TableCheck:
    ok = computed is not None and abs(computed - published) <= tolerance
    return TableCheck(
        table=table,
        key=key,
        published=published,
        computed=computed,
        tolerance=tolerance,
        status=CheckStatus.PASSED if ok else CheckStatus.FAILED,
    )


def _info(table: str, key: str, published: int, computed: int) -> TableCheck:
    gap = computed - published
    return TableCheck(
        table=table,
        key=key,
        published=published,
        computed=computed,
        tolerance=0.0,
        status=CheckStatus.INFO,
        note=f"difference {gap:+d}" if gap else "",
    )


class TablesResource:
    """Resource reproducing the published tables on the bundled scenarios.

    The checks always run on the bundled ``validation`` and ``case_study``
    scenarios, with the analyzer's state cap.
    """

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def _bundled(self, name: str) -> "JunctionAnalyzer":
        from junctionq.analyzer import JunctionAnalyzer

        return JunctionAnalyzer(load_config(name), state_cap=self._analyzer.state_cap)

    def state_spaces(self) -> list[TableCheck]:
        """State and transition counts of the validation junction per model setting.

        State counts of settings with exponential arrivals must match exactly.
        With phase-type arrivals the reachable set depends on how arrival phases
        are encoded, so those state counts and all transition counts are reported
        for information with their difference. Settings whose chain exceeds the
        state cap are reported as skipped, which does not count as ok.
        """
        sub = self._bundled("validation")
        cfg = sub.config
        loads = sub.loads()
        checks = []
        for row in reference.STATE_SPACES:
            key = row.setting.value
            try:
                model = build_model(
                    cfg.junction.conflict_matrix(),
                    loads,
                    row.setting,
                    m=cfg.model.waiting_slots,
                    choice_rate=cfg.model.choice_rate,
                    state_cap=sub.state_cap,
                )
            except StateSpaceTooLargeError as exc:
                logger.warning("Skipping %s state space: %s", key, exc)
                note = f"skipped: {exc.count} feasible states above cap {exc.cap}"
                for quantity in ("states", "transitions"):
                    checks.append(
                        TableCheck(
                            table="state_spaces",
                            key=f"{key} {quantity}",
                            published=row.states if quantity == "states" else row.transitions,
                            tolerance=0.0,
                            status=CheckStatus.SKIPPED,
                            note=note,
                        )
                    )
                continue
            if row.setting.phase_arrival:
                checks.append(_info("state_spaces", f"{key} states", row.states, model.n_states))
            else:
                checks.append(
                    _check("state_spaces", f"{key} states", row.states, model.n_states, 0.0)
                )
            checks.append(
                _info("state_spaces", f"{key} transitions", row.transitions, model.n_transitions)
            )
        return checks

    def parameters(self) -> list[TableCheck]:
        """Service rates and coefficients of variation of the case study per share."""
        sub = self._bundled("case_study")
        checks = []
        for row in reference.CASE_STUDY_PARAMETERS:
            loads = {load.route: load for load in sub.loads(p_main=row.p_main)}
            for i, route in enumerate(sub.config.junction.route_names):
                load = loads[route]
                prefix = f"p_main={row.p_main:g} {route}"
                checks.append(
                    _check(
                        "parameters",
                        f"{prefix} mu",
                        row.service_rates[i],
                        load.service_rate,
                        reference.PARAMETER_TOLERANCE,
                    )
                )
                checks.append(
                    _check(
                        "parameters",
                        f"{prefix} cv",
                        row.service_cvs[i],
                        load.service_cv,
                        reference.PARAMETER_TOLERANCE,
                    )
                )
        return checks

    def capacities(
        self,
        settings: Optional[Iterable[ModelSetting]] = None,
        scalings: Optional[Iterable[Scaling]] = None,
    ) -> list[TableCheck]:
        """Best capacity over the main-line share grid of the validation junction.

        Args:
            settings: Settings to check; the exponential setting if not provided.
            scalings: Scalings to check; all three if not provided.
        """
        wanted_settings = set(settings or [ModelSetting.MM])
        wanted_scalings = set(scalings or list(Scaling))
        sub = self._bundled("validation")
        checks = []
        for row in reference.VALIDATION_CAPACITIES:
            if row.setting not in wanted_settings or row.scaling not in wanted_scalings:
                continue
            key = f"{row.setting.value}/{row.scaling.value}"
            tolerance = reference.CAPACITY_TOLERANCE.get(
                row.setting, reference.DEFAULT_CAPACITY_TOLERANCE
            )
            best: Optional[tuple[float, float]] = None
            note = ""
            for p_main in sub.config.sweep.p_main:
                try:
                    result = sub.capacity.find(
                        p_main=p_main, setting=row.setting, scaling=row.scaling
                    )
                except JunctionqError as exc:
                    note = f"p_main={p_main:g} failed: {exc}"
                    best = None
                    break
                if best is None or result.n_max > best[0]:
                    best = (result.n_max, p_main)
            check = _check("capacities", key, row.n_max, best[0] if best else None, tolerance)
            check.note = note or (f"best p_main={best[1]:g}" if best else "")
            checks.append(check)
        return checks

    def case_study(self) -> list[TableCheck]:
        """Capacity and bottleneck of the case study at the published shares."""
        sub = self._bundled("case_study")
        checks = []
        for p_main, published in reference.CASE_STUDY_CAPACITIES.items():
            key = f"p_main={p_main:g}"
            tolerance = reference.CASE_STUDY_TOLERANCE[p_main]
            try:
                result = sub.capacity.find(p_main=p_main)
            except JunctionqError as exc:
                checks.append(
                    TableCheck(
                        table="case_study",
                        key=key,
                        published=published,
                        tolerance=tolerance,
                        status=CheckStatus.FAILED,
                        note=str(exc),
                    )
                )
                continue
            check = _check("case_study", key, published, result.n_max, tolerance)
            if result.bottleneck_route != reference.CASE_STUDY_BOTTLENECK:
                check.status = CheckStatus.FAILED
            check.note = f"bottleneck {result.bottleneck_route}"
            checks.append(check)
        return checks

    def run(self, tables: Iterable[str] = DEFAULT_TABLES) -> list[TableCheck]:
        """Run the named table checks in order.

        Raises:
            InvalidParameterError: If a table name is unknown.
        """
        checks: list[TableCheck] = []
        for table in tables:
            if table not in TABLES:
                raise InvalidParameterError(
                    f"unknown table {table!r}; expected one of {', '.join(TABLES)}"
                )
            checks.extend(getattr(self, table)())
        failed = sum(check.status is CheckStatus.FAILED for check in checks)
        skipped = sum(check.status is CheckStatus.SKIPPED for check in checks)
        logger.info(
            "Checked %d values, %d outside tolerance, %d skipped", len(checks), failed, skipped
        )
        return checks
