"""Scenario configuration: loading, validation, canonical form and hashing."""

from __future__ import annotations

import hashlib
import json
import logging
import os
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from junctionq.ctmc import DEFAULT_CHOICE_RATE, DEFAULT_STATE_CAP, DEFAULT_WAITING_SLOTS
from junctionq.exceptions import ConfigurationError
from junctionq.models import Junction, ModelSetting, Scaling, SimConfig, TrafficSpec
from junctionq.steady_state import DEFAULT_DIRECT_LIMIT, DEFAULT_MAX_ITER, DEFAULT_TOL, SolverMethod

logger = logging.getLogger(__name__)

STATE_CAP_ENV = "JUNCTIONQ_STATE_CAP"
BUNDLED_SCENARIOS = ("case_study", "validation")


class ModelOptions(BaseModel):
    """How queue lengths are modeled."""

    setting: ModelSetting = ModelSetting.PH_PH
    scaling: Scaling = Scaling.NONE
    waiting_slots: int = Field(default=DEFAULT_WAITING_SLOTS, ge=0)
    choice_rate: float = Field(default=DEFAULT_CHOICE_RATE, gt=0)
    arrival_cv: float = Field(default=0.8, gt=0, le=1)
    queue_limit: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _scaling_fits_setting(self) -> ModelOptions:
        if self.setting is ModelSetting.PH_PH and self.scaling is not Scaling.NONE:
            raise ValueError("PhPh models both processes and takes no scaling")
        return self


class SolverOptions(BaseModel):
    """Stationary solver settings."""

    tol: float = Field(default=DEFAULT_TOL, gt=0)
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1)
    method: SolverMethod = SolverMethod.AUTO
    direct_limit: int = Field(default=DEFAULT_DIRECT_LIMIT, ge=1)


class CapacityOptions(BaseModel):
    """Search interval and tolerances of the capacity search."""

    lower: float = Field(default=1.0, ge=0)
    upper: float = Field(default=40.0, gt=0)
    xtol: float = Field(default=1e-3, gt=0)
    rtol: float = Field(default=1e-3, ge=0)
    max_iter: int = Field(default=100, ge=1)
    probe: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> CapacityOptions:
        if self.lower >= self.upper:
            raise ValueError("lower bound must be below upper bound")
        return self


def _default_grid() -> list[float]:
    return [float(n) for n in range(4, 41, 4)]


def _default_shares() -> list[float]:
    return [round(0.1 * i, 1) for i in range(1, 10)]


class SweepOptions(BaseModel):
    """Grids for sweeps and queue-length curves; empty lists mean the configured model."""

    p_main: list[float] = Field(default_factory=_default_shares)
    n_total: list[float] = Field(default_factory=_default_grid)
    settings: list[ModelSetting] = Field(default_factory=list)
    scalings: list[Scaling] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ranges(self) -> SweepOptions:
        for share in self.p_main:
            if not 0.0 <= share <= 1.0:
                raise ValueError(f"p_main value {share} outside [0, 1]")
        for n in self.n_total:
            if n < 0:
                raise ValueError(f"n_total value {n} is negative")
        return self


class ScenarioConfig(BaseModel):
    """A complete scenario: junction, demand, model and experiment settings."""

    name: str = "scenario"
    junction: Junction
    traffic: TrafficSpec
    model: ModelOptions = Field(default_factory=ModelOptions)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    capacity: CapacityOptions = Field(default_factory=CapacityOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)
    simulation: SimConfig = Field(default_factory=SimConfig)

    @model_validator(mode="after")
    def _lines_and_headways(self) -> ScenarioConfig:
        routes = self.junction.route_names
        trains = {t.name for t in self.junction.train_types}
        feasible: dict[str, set[str]] = {r: set() for r in routes}
        for line in self.traffic.lines:
            if not line.routes:
                raise ValueError(f"line {line.name!r} has no routes")
            for route in line.routes:
                if route not in routes:
                    raise ValueError(f"line {line.name!r} references unknown route {route!r}")
            for train, share in line.composition.items():
                if train not in trains:
                    raise ValueError(f"line {line.name!r} references unknown train type {train!r}")
                if share > 0:
                    for route in line.routes:
                        feasible[route].add(train)

        known = {(h.leader, h.follower) for h in self.junction.headways}
        conflicts = self.junction.conflict_matrix()
        missing = []
        for r, leader_route in enumerate(routes):
            if leader_route in self.junction.fixed_service:
                continue
            for r_prime in conflicts.conflicting(r):
                follower_route = routes[r_prime]
                for t in sorted(feasible[leader_route]):
                    for t_prime in sorted(feasible[follower_route]):
                        pair = (f"{leader_route}/{t}", f"{follower_route}/{t_prime}")
                        if pair not in known:
                            missing.append(f"{pair[0]} -> {pair[1]}")
        if missing:
            raise ValueError(f"missing headways: {', '.join(missing)}")
        return self

    def canonical_json(self) -> str:
        """Sorted, compact JSON that re-loads to an equal configuration."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """Short SHA-256 of the canonical JSON, stamped on every output row."""
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:16]

    def with_overrides(
        self,
        setting: Optional[ModelSetting] = None,
        scaling: Optional[Scaling] = None,
        p_main: Optional[float] = None,
        n_total: Optional[float] = None,
        seed: Optional[int] = None,
        jobs: Optional[int] = None,
    ) -> ScenarioConfig:
        """Copy with command-line overrides applied and re-validated."""
        data = self.model_dump(mode="json")
        if setting is not None:
            data["model"]["setting"] = setting.value
        if scaling is not None:
            data["model"]["scaling"] = scaling.value
        if p_main is not None:
            data["traffic"]["p_main"] = p_main
        if n_total is not None:
            data["traffic"]["n_total"] = n_total
        if seed is not None:
            data["simulation"]["seed"] = seed
        if jobs is not None:
            data["simulation"]["jobs"] = jobs
        return _validate(data)


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"])
        parts.append(f"{location}: {error['msg']}" if location else str(error["msg"]))
    return "; ".join(parts)


def _validate(data: Union[str, dict[str, object]]) -> ScenarioConfig:
    try:
        if isinstance(data, str):
            return ScenarioConfig.model_validate_json(data)
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_format_errors(exc)) from exc


def bundled_config_path(name: str) -> Path:
    """Path of a scenario shipped with the package."""
    if name not in BUNDLED_SCENARIOS:
        raise ConfigurationError(f"unknown bundled scenario {name!r}")
    return Path(str(resources.files("junctionq") / "data" / f"{name}.json"))


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """Load and validate a scenario document.

    ``path`` may also name a bundled scenario (``case_study`` or ``validation``).

    Raises:
        ConfigurationError: If the file is missing, is not JSON, or fails validation.
            Validation messages are prefixed with the failing location,
            e.g. ``traffic.p_main: ...``.

    Example:
        >>> config = load_config("case_study")
        >>> len(config.junction.headways)
        40
    """
    candidate = Path(path)
    if not candidate.is_file() and str(path) in BUNDLED_SCENARIOS:
        candidate = bundled_config_path(str(path))
    try:
        text = candidate.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {candidate}: {exc}") from exc
    config = _validate(text)
    logger.debug("Loaded scenario %s (%s) from %s", config.name, config.config_hash(), candidate)
    return config


def state_cap_from_env(default: int = DEFAULT_STATE_CAP) -> int:
    """State-count guard, overridable through ``JUNCTIONQ_STATE_CAP``."""
    raw = os.environ.get(STATE_CAP_ENV)
    if raw is None or raw == "":
        return default
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{STATE_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap <= 0:
        raise ConfigurationError(f"{STATE_CAP_ENV} must be positive, got {cap}")
    return cap
