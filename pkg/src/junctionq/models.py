"""Pydantic models for junction infrastructure, demand, fitted processes and results."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator, model_validator


class TrafficClass(str, Enum):
    """Traffic class of a train type."""

    PASSENGER = "passenger"
    FREIGHT = "freight"


class ModelSetting(str, Enum):
    """Which processes are modeled with phase-type distributions."""

    MM = "MM"
    PH_M = "PhM"
    M_PH = "MPh"
    PH_PH = "PhPh"

    @property
    def phase_arrival(self) -> bool:
        return self in {ModelSetting.PH_M, ModelSetting.PH_PH}

    @property
    def phase_service(self) -> bool:
        return self in {ModelSetting.M_PH, ModelSetting.PH_PH}


class Scaling(str, Enum):
    """Closed-form scaling applied to chain queue lengths."""

    NONE = "none"
    HERTEL = "hertel"
    KINGMAN = "kingman"


class BoundStatus(str, Enum):
    """Where a capacity search ended relative to its interval."""

    WITHIN = "within"
    ABOVE_UPPER = "above_upper"
    BELOW_LOWER = "below_lower"


class CheckStatus(str, Enum):
    """Outcome of one table check."""

    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"
    INFO = "info"


class TrainType(BaseModel):
    """A train type, e.g. suburban or long-distance freight."""

    name: str
    traffic_class: TrafficClass


class Route(BaseModel):
    """An origin-destination path through the junction."""

    name: str
    origin: str = ""
    destination: str = ""


class FixedService(BaseModel):
    """Service process given directly instead of derived from headways."""

    rate: float = Field(gt=0)
    cv: float = Field(gt=0, le=1)


class HeadwayEntry(BaseModel):
    """Minimum headway of ``follower`` after ``leader``, both written ``route/train``."""

    leader: str
    follower: str
    minutes: float = Field(gt=0)

    @field_validator("leader", "follower")
    @classmethod
    def _route_train_key(cls, value: str) -> str:
        if value.count("/") != 1:
            raise ValueError(f"expected 'route/train', got {value!r}")
        return value


@dataclass(frozen=True)
class ConflictMatrix:
    """Symmetric boolean conflict relation with a true diagonal."""

    entries: npt.NDArray[np.bool_]

    def __post_init__(self) -> None:
        if not np.array_equal(self.entries, self.entries.T):
            raise ValueError("conflict matrix must be symmetric")
        if not bool(np.all(np.diag(self.entries))):
            raise ValueError("every route must conflict with itself")

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def conflicting(self, r: int) -> list[int]:
        """Routes in conflict with ``r``, ``r`` included."""
        return [int(j) for j in np.flatnonzero(self.entries[r])]

    def neighbours(self, r: int) -> list[int]:
        """Routes in conflict with ``r``, ``r`` excluded."""
        return [j for j in self.conflicting(r) if j != r]

    def restrict(self, routes: list[int]) -> ConflictMatrix:
        return ConflictMatrix(self.entries[np.ix_(routes, routes)])


@dataclass(frozen=True)
class HeadwayTable:
    """Headways indexed ``[leader_route, leader_train, follower_route, follower_train]``.

    Missing entries are NaN.
    """

    minutes: npt.NDArray[np.float64]
    route_names: tuple[str, ...]


class Junction(BaseModel):
    """Static infrastructure: routes, conflicts, train types and headways."""

    routes: list[Route]
    train_types: list[TrainType]
    conflicts: list[tuple[str, str]] = Field(default_factory=list)
    headways: list[HeadwayEntry] = Field(default_factory=list)
    fixed_service: dict[str, FixedService] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_references(self) -> Junction:
        route_names = [r.name for r in self.routes]
        train_names = [t.name for t in self.train_types]
        if len(set(route_names)) != len(route_names):
            raise ValueError("route names must be unique")
        if len(set(train_names)) != len(train_names):
            raise ValueError("train type names must be unique")
        for a, b in self.conflicts:
            for name in (a, b):
                if name not in route_names:
                    raise ValueError(f"conflict references unknown route {name!r}")
        seen: set[tuple[str, str]] = set()
        for entry in self.headways:
            for key in (entry.leader, entry.follower):
                route, train = key.split("/")
                if route not in route_names:
                    raise ValueError(f"headway references unknown route {route!r}")
                if train not in train_names:
                    raise ValueError(f"headway references unknown train type {train!r}")
            pair = (entry.leader, entry.follower)
            if pair in seen:
                raise ValueError(f"duplicate headway entry {entry.leader} -> {entry.follower}")
            seen.add(pair)
        for name in self.fixed_service:
            if name not in route_names:
                raise ValueError(f"fixed service references unknown route {name!r}")
        return self

    @property
    def route_names(self) -> list[str]:
        return [r.name for r in self.routes]

    def route_index(self, name: str) -> int:
        return self.route_names.index(name)

    def train_index(self, name: str) -> int:
        return [t.name for t in self.train_types].index(name)

    def passenger_mask(self) -> npt.NDArray[np.bool_]:
        return np.array([t.traffic_class is TrafficClass.PASSENGER for t in self.train_types])

    def conflict_matrix(self) -> ConflictMatrix:
        k = len(self.routes)
        entries = np.eye(k, dtype=bool)
        for a, b in self.conflicts:
            i, j = self.route_index(a), self.route_index(b)
            entries[i, j] = entries[j, i] = True
        return ConflictMatrix(entries)

    def headway_table(self) -> HeadwayTable:
        k, n_types = len(self.routes), len(self.train_types)
        minutes = np.full((k, n_types, k, n_types), np.nan)
        for entry in self.headways:
            lr, lt = entry.leader.split("/")
            fr, ft = entry.follower.split("/")
            minutes[
                self.route_index(lr),
                self.train_index(lt),
                self.route_index(fr),
                self.train_index(ft),
            ] = entry.minutes
        return HeadwayTable(minutes, tuple(self.route_names))


class Line(BaseModel):
    """A railway line feeding some junction routes with a fixed train-type mix."""

    name: str
    main: bool = False
    routes: list[str]
    composition: dict[str, float]

    @field_validator("composition")
    @classmethod
    def _shares_sum_to_one(cls, value: dict[str, float]) -> dict[str, float]:
        for train, share in value.items():
            if not 0.0 <= share <= 1.0:
                raise ValueError(f"composition share for {train!r} must lie in [0, 1]")
        if value and abs(sum(value.values()) - 1.0) > 1e-9:
            raise ValueError("composition shares must sum to 1")
        return value


class TrafficSpec(BaseModel):
    """Demand side: total trains per horizon and how they spread over routes and types."""

    n_total: float = Field(default=0.0, ge=0)
    time_horizon: float = Field(default=60.0, gt=0)
    p_main: float = Field(default=0.5, ge=0, le=1)
    lines: list[Line]

    def with_total(self, n_total: float) -> TrafficSpec:
        return self.model_copy(update={"n_total": n_total})

    def with_main_share(self, p_main: float) -> TrafficSpec:
        return self.model_copy(update={"p_main": p_main})


class RouteLoad(BaseModel):
    """Per-route traffic quantities at one train count.

    Service fields are None for inactive routes (zero share of the traffic mix).
    """

    route: str
    n: float
    arrival_rate: float
    arrival_cv: float
    service_time: Optional[float] = None
    service_rate: Optional[float] = None
    service_cv: Optional[float] = None
    occupancy: Optional[float] = None
    passenger_share: Optional[float] = None
    queue_limit: Optional[float] = None

    @property
    def active(self) -> bool:
        return self.service_rate is not None

    @property
    def modeled(self) -> bool:
        return self.active and self.arrival_rate > 0


class PhaseTypeSpec(BaseModel):
    """Two consecutive Erlang segments: ``k_star`` phases at ``rate_a``, the rest at ``rate_b``."""

    k: int = Field(ge=1)
    k_star: int = Field(ge=1)
    rate_a: float = Field(gt=0)
    rate_b: float = Field(gt=0)
    target_mean: float = Field(gt=0)
    target_cv: float = Field(gt=0, le=1)

    model_config = {"frozen": True}

    def rate(self, phase: int) -> float:
        """Exit rate of 1-based ``phase``."""
        return self.rate_a if phase <= self.k_star else self.rate_b

    @property
    def rates(self) -> npt.NDArray[np.float64]:
        return np.array([self.rate(p) for p in range(1, self.k + 1)])


class CapacityEvaluation(BaseModel):
    """One evaluation of the capacity function during a search."""

    iteration: int
    n_total: float
    phi: float
    quality_factors: dict[str, float] = Field(default_factory=dict)
    states: int = 0
    saturated: bool = False
    wall_time: float = 0.0


class CapacityResult(BaseModel):
    """Outcome of a capacity search."""

    n_max: float
    quality_factors: dict[str, float]
    bottleneck_route: Optional[str] = None
    evaluations: list[CapacityEvaluation] = Field(default_factory=list)
    converged: bool
    bound_status: BoundStatus = BoundStatus.WITHIN
    setting: ModelSetting
    scaling: Scaling
    p_main: float

    @property
    def function_calls(self) -> int:
        return len(self.evaluations)


class SimConfig(BaseModel):
    """Discrete-event simulation settings; times in minutes."""

    horizon: float = Field(default=1200.0, gt=0)
    replications: int = Field(default=100, ge=1)
    seed: int = 0
    sample_interval: float = Field(default=1.0, gt=0)
    queue_cap: Optional[int] = Field(default=None, ge=0)
    warmup: float = Field(default=0.0, ge=0)
    jobs: int = Field(default=1, ge=1)
    keep_traces: bool = False

    @model_validator(mode="after")
    def _warmup_inside_horizon(self) -> SimConfig:
        if self.warmup >= self.horizon:
            raise ValueError("warmup must be shorter than the horizon")
        return self


class SimResult(BaseModel):
    """Per-route mean queue lengths across replications."""

    routes: list[str]
    mean_queue: dict[str, float]
    std_error: dict[str, float]
    replication_means: list[dict[str, float]] = Field(default_factory=list)
    traces: Optional[list[list[list[float]]]] = None
    start_log: Optional[list[list[tuple[str, float, float]]]] = None


class PhaseRow(BaseModel):
    """One phase of a fitted distribution."""

    phase: int
    segment: str
    rate: float
    mean: float


class RouteFit(BaseModel):
    """Arrival and service fits of one modeled route."""

    route: str
    arrival: PhaseTypeSpec
    service: PhaseTypeSpec
    occupancy: float


class QueueLengthRow(BaseModel):
    """Queue length of one route at one train count."""

    n_total: float
    route: str
    occupancy: Optional[float] = None
    chain_length: float
    scaled_length: float
    queue_limit: Optional[float] = None
    quality_factor: float
    states: int
    sim_mean: Optional[float] = None
    sim_std_error: Optional[float] = None


class SweepRow(BaseModel):
    """Capacity of one (share, setting, scaling) scenario, or the reason it failed."""

    p_main: float
    setting: ModelSetting
    scaling: Scaling
    n_max: Optional[float] = None
    bottleneck_route: Optional[str] = None
    bound_status: Optional[BoundStatus] = None
    function_calls: int = 0
    converged: bool = False
    error: Optional[str] = None


class CapacityBounds(BaseModel):
    """Capacity bounds read off simulated queue lengths on a train-count grid."""

    p_main: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    grid: list[float]
    mean_queue: list[dict[str, float]]


class TableCheck(BaseModel):
    """Comparison of one computed quantity against its published value."""

    table: str
    key: str
    published: float
    computed: Optional[float] = None
    tolerance: float
    status: CheckStatus
    note: str = ""

    @property
    def ok(self) -> bool:
        """True for checked values within tolerance and for informational rows."""
        return self.status in (CheckStatus.PASSED, CheckStatus.INFO)
