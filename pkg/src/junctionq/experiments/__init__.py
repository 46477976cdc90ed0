"""Experiment resources hanging off the junction analyzer."""

from junctionq.experiments.capacity import CapacityResource
from junctionq.experiments.chains import ModelsResource
from junctionq.experiments.fitting import FittingResource
from junctionq.experiments.queues import QueuesResource
from junctionq.experiments.simulation import SimulationResource
from junctionq.experiments.sweep import SweepResource
from junctionq.experiments.tables import TablesResource

__all__ = [
    "FittingResource",
    "QueuesResource",
    "CapacityResource",
    "SweepResource",
    "SimulationResource",
    "TablesResource",
    "ModelsResource",
]
