"""junctionq - Timetable capacity of railway junctions from phase-type Markov chain queue models."""

from junctionq.analyzer import JunctionAnalyzer
from junctionq.capacity import CapacityProblem, brent_root, find_capacity, phi
from junctionq.config import ScenarioConfig, load_config
from junctionq.ctmc import CtmcModel, RouteProcess, build_generator, enumerate_states
from junctionq.exceptions import (
    BracketError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    FittingError,
    InvalidParameterError,
    JunctionqError,
    NoDemandError,
    ReducibleChainError,
    StateSpaceTooLargeError,
    UndefinedPairError,
    UnsupportedDistributionError,
)
from junctionq.models import (
    BoundStatus,
    CapacityBounds,
    CapacityEvaluation,
    CapacityResult,
    CheckStatus,
    ConflictMatrix,
    Junction,
    Line,
    ModelSetting,
    PhaseTypeSpec,
    QueueLengthRow,
    Route,
    RouteLoad,
    Scaling,
    SimConfig,
    SimResult,
    SweepRow,
    TableCheck,
    TrafficClass,
    TrafficSpec,
    TrainType,
)
from junctionq.phase_fit import fit_hypoexp
from junctionq.simulation import capacity_bounds, simulate
from junctionq.steady_state import SolverMethod, StationaryDistribution, stationary

__version__ = "0.1.0"

__all__ = [
    # Analyzer
    "JunctionAnalyzer",
    "ScenarioConfig",
    "load_config",
    # Exceptions
    "JunctionqError",
    "ConfigurationError",
    "InvalidParameterError",
    "UndefinedPairError",
    "NoDemandError",
    "UnsupportedDistributionError",
    "FittingError",
    "StateSpaceTooLargeError",
    "ConvergenceError",
    "ReducibleChainError",
    "DomainError",
    "BracketError",
    "EvaluationError",
    # Junction Models
    "Junction",
    "Route",
    "TrainType",
    "TrafficClass",
    "ConflictMatrix",
    "Line",
    "TrafficSpec",
    "RouteLoad",
    # Chain and Solver
    "PhaseTypeSpec",
    "ModelSetting",
    "RouteProcess",
    "CtmcModel",
    "SolverMethod",
    "StationaryDistribution",
    "fit_hypoexp",
    "enumerate_states",
    "build_generator",
    "stationary",
    # Capacity
    "Scaling",
    "BoundStatus",
    "CapacityProblem",
    "CapacityEvaluation",
    "CapacityResult",
    "phi",
    "brent_root",
    "find_capacity",
    # Simulation
    "SimConfig",
    "SimResult",
    "CapacityBounds",
    "simulate",
    "capacity_bounds",
    # Report Rows
    "QueueLengthRow",
    "SweepRow",
    "TableCheck",
    "CheckStatus",
]
