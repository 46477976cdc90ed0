"""Building and exporting the chain at the configured point."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Union

from junctionq.ctmc import CtmcModel, build_model
from junctionq.export import prism_model, write_edge_list, write_state_table
from junctionq.models import ModelSetting

if TYPE_CHECKING:
    from junctionq.analyzer import JunctionAnalyzer

logger = logging.getLogger(__name__)


class ModelsResource:
    """Resource for the chain itself."""

    def __init__(self, analyzer: "JunctionAnalyzer") -> None:
        self._analyzer = analyzer

    def build(
        self,
        n_total: Optional[float] = None,
        p_main: Optional[float] = None,
        setting: Optional[ModelSetting] = None,
    ) -> CtmcModel:
        """Chain of the modeled routes at the given (or configured) point."""
        cfg = self._analyzer.config
        return build_model(
            cfg.junction.conflict_matrix(),
            self._analyzer.loads(n_total, p_main),
            setting or cfg.model.setting,
            m=cfg.model.waiting_slots,
            choice_rate=cfg.model.choice_rate,
            state_cap=self._analyzer.state_cap,
        )

    def export(
        self,
        out_dir: Union[str, Path],
        n_total: Optional[float] = None,
        p_main: Optional[float] = None,
        setting: Optional[ModelSetting] = None,
    ) -> list[Path]:
        """Write the chain as PRISM text, an edge list and a state table.

        Returns:
            Paths of ``model.prism``, ``transitions.txt`` and ``states.csv``.

        Example:
            >>> paths = analyzer.models.export("out")
            >>> [p.name for p in paths]
            ['model.prism', 'transitions.txt', 'states.csv']
        """
        model = self.build(n_total, p_main, setting)
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        prism = directory / "model.prism"
        prism.write_text(prism_model(model), encoding="utf-8")
        paths = [
            prism,
            write_edge_list(directory / "transitions.txt", model),
            write_state_table(directory / "states.csv", model, self._analyzer.config_hash),
        ]
        logger.info(
            "Exported %d states and %d transitions to %s",
            model.n_states,
            model.n_transitions,
            directory,
        )
        return paths
