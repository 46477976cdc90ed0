"""Published reference values used by the table checks."""

from __future__ import annotations

from typing import NamedTuple

from junctionq.models import ModelSetting, Scaling


class StateSpaceRow(NamedTuple):
    setting: ModelSetting
    arrival_phases: int
    service_phases: int
    states: int
    transitions: int


class ParameterRow(NamedTuple):
    p_main: float
    service_rates: tuple[float, float, float, float]
    service_cvs: tuple[float, float, float, float]


class CapacityRow(NamedTuple):
    scaling: Scaling
    setting: ModelSetting
    mean_iterations: float
    n_max: float
    best_share: float


# validation junction, m = 5
STATE_SPACES = (
    StateSpaceRow(ModelSetting.MM, 1, 1, 10_368, 63_688),
    StateSpaceRow(ModelSetting.PH_M, 2, 1, 141_108, 829_825),
    StateSpaceRow(ModelSetting.M_PH, 1, 12, 623_376, 3_664_703),
    StateSpaceRow(ModelSetting.PH_PH, 2, 12, 8_192_448, 46_447_056),
)

# case study, PhPh
CASE_STUDY_PARAMETERS = (
    ParameterRow(0.1, (0.25, 0.20, 0.36, 0.19), (0.27, 0.36, 0.52, 0.33)),
    ParameterRow(0.2, (0.26, 0.21, 0.36, 0.19), (0.29, 0.40, 0.51, 0.33)),
    ParameterRow(0.3, (0.26, 0.21, 0.35, 0.18), (0.31, 0.43, 0.51, 0.34)),
    ParameterRow(0.4, (0.27, 0.21, 0.35, 0.18), (0.33, 0.45, 0.50, 0.34)),
    ParameterRow(0.5, (0.28, 0.22, 0.34, 0.18), (0.34, 0.47, 0.49, 0.34)),
    ParameterRow(0.6, (0.28, 0.22, 0.34, 0.17), (0.36, 0.49, 0.48, 0.34)),
    ParameterRow(0.7, (0.29, 0.22, 0.33, 0.17), (0.37, 0.51, 0.47, 0.33)),
    ParameterRow(0.8, (0.29, 0.22, 0.32, 0.16), (0.39, 0.52, 0.45, 0.33)),
    ParameterRow(0.9, (0.30, 0.22, 0.32, 0.16), (0.40, 0.53, 0.44, 0.32)),
)

# validation junction, best share over p_main in 0.1..0.9
VALIDATION_CAPACITIES = (
    CapacityRow(Scaling.NONE, ModelSetting.MM, 9.0, 11.70, 0.5),
    CapacityRow(Scaling.NONE, ModelSetting.PH_M, 9.0, 12.97, 0.5),
    CapacityRow(Scaling.NONE, ModelSetting.M_PH, 8.44, 14.53, 0.5),
    CapacityRow(Scaling.NONE, ModelSetting.PH_PH, 9.0, 16.90, 0.1),
    CapacityRow(Scaling.KINGMAN, ModelSetting.MM, 8.89, 16.80, 0.5),
    CapacityRow(Scaling.KINGMAN, ModelSetting.PH_M, 8.0, 15.91, 0.5),
    CapacityRow(Scaling.KINGMAN, ModelSetting.M_PH, 7.78, 15.55, 0.5),
    CapacityRow(Scaling.HERTEL, ModelSetting.MM, 9.33, 17.29, 0.5),
    CapacityRow(Scaling.HERTEL, ModelSetting.PH_M, 8.0, 15.91, 0.5),
    CapacityRow(Scaling.HERTEL, ModelSetting.M_PH, 9.22, 18.17, 0.5),
)

# case study, PhPh, bottleneck r3 at every share
CASE_STUDY_CAPACITIES = {0.1: 15.78, 0.5: 11.93, 0.9: 14.47}
CASE_STUDY_BOTTLENECK = "r3"

PARAMETER_TOLERANCE = 0.0051
CAPACITY_TOLERANCE = {ModelSetting.PH_PH: 0.4}
DEFAULT_CAPACITY_TOLERANCE = 0.3
CASE_STUDY_TOLERANCE = {0.1: 0.3, 0.5: 0.2, 0.9: 0.3}
