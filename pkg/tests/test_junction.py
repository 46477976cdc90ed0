"""Tests for train counts, headway averages and route loads."""

import math

import numpy as np
import pytest

from junctionq import InvalidParameterError, NoDemandError, UndefinedPairError, load_config
from junctionq.junction import (
    derive_train_counts,
    pair_headway,
    queue_limit,
    route_loads,
    service_cv,
    service_time,
)
from junctionq.reference import CASE_STUDY_PARAMETERS, PARAMETER_TOLERANCE


def test_train_counts_split_by_line_and_composition():
    """Main lines get p_main of the trains, split over routes and train types."""
    config = load_config("case_study")
    junction = config.junction
    counts = derive_train_counts(junction, config.traffic.with_total(12.0))

    assert counts.sum() == pytest.approx(12.0)
    r1, s = junction.route_index("r1"), junction.train_index("s")
    r2, lf = junction.route_index("r2"), junction.train_index("lf")
    assert counts[r1, s] == pytest.approx(1.5)
    assert counts[r2, lf] == pytest.approx(1.5)
    assert counts[r1, lf] == 0.0


def test_train_counts_follow_main_share():
    config = load_config("case_study")
    counts = derive_train_counts(config.junction, config.traffic.with_main_share(0.9))
    main = [config.junction.route_index(r) for r in ("r1", "r3")]
    assert counts[main].sum() == pytest.approx(0.9 * config.traffic.n_total)


def test_train_counts_reject_bad_share():
    config = load_config("case_study")
    with pytest.raises(InvalidParameterError):
        derive_train_counts(config.junction, config.traffic.with_main_share(1.3))


def test_queue_limit():
    assert queue_limit(0.0) == pytest.approx(0.479)
    assert queue_limit(1.0) == pytest.approx(0.479 * math.exp(-1.3))
    with pytest.raises(InvalidParameterError):
        queue_limit(-0.1)


def test_pair_headways():
    """Pair headways are demand-weighted averages of the table entries."""
    config = load_config("case_study")
    junction = config.junction
    table = junction.headway_table()
    counts = derive_train_counts(junction, config.traffic)
    r1, r2, r3 = (junction.route_index(r) for r in ("r1", "r2", "r3"))

    assert pair_headway(table, counts, r1, r1) == pytest.approx(3.25)
    assert pair_headway(table, counts, r3, r2) == pytest.approx(1.5)
    assert pair_headway(table, counts, r1, r2) == pytest.approx(4.0)


def test_pair_headway_without_trains():
    config = load_config("case_study")
    junction = config.junction
    counts = np.zeros((len(junction.routes), len(junction.train_types)))
    with pytest.raises(UndefinedPairError):
        pair_headway(junction.headway_table(), counts, 0, 1)


def test_service_time_and_cv():
    """Route r1 conflicts with itself and r2, each carrying half the conflicting trains."""
    config = load_config("case_study")
    junction = config.junction
    counts = derive_train_counts(junction, config.traffic)
    table, conflicts = junction.headway_table(), junction.conflict_matrix()
    r1 = junction.route_index("r1")

    assert service_time(table, counts, conflicts, r1) == pytest.approx(3.625)
    atoms = np.array([2.5, 5.5, 3, 2, 5, 5, 3, 3])
    expected_cv = atoms.std() / atoms.mean()
    assert service_cv(table, counts, conflicts, r1) == pytest.approx(expected_cv)


def test_service_time_without_demand():
    config = load_config("case_study")
    junction = config.junction
    counts = np.zeros((len(junction.routes), len(junction.train_types)))
    with pytest.raises(NoDemandError):
        service_time(junction.headway_table(), counts, junction.conflict_matrix(), 0)


@pytest.mark.parametrize("row", CASE_STUDY_PARAMETERS, ids=lambda row: f"p{row.p_main}")
def test_case_study_service_parameters(row):
    """Service rates and cvs of the case study match the published table."""
    config = load_config("case_study")
    loads = route_loads(config.junction, config.traffic.with_main_share(row.p_main))

    for i, load in enumerate(loads):
        assert load.service_rate == pytest.approx(row.service_rates[i], abs=PARAMETER_TOLERANCE)
        assert load.service_cv == pytest.approx(row.service_cvs[i], abs=PARAMETER_TOLERANCE)


def test_validation_loads():
    """The validation junction uses fixed service processes and equal arrival rates."""
    config = load_config("validation")
    loads = route_loads(config.junction, config.traffic, config.model.arrival_cv)

    for load in loads:
        assert load.arrival_rate == pytest.approx(4 / 60)
        assert load.service_rate == pytest.approx(0.3)
        assert load.service_cv == pytest.approx(0.3)
        assert load.occupancy == pytest.approx(4 / 60 / 0.3)
        assert load.queue_limit == pytest.approx(queue_limit(1.0))


def test_zero_total_keeps_service_defined():
    """With no trains, routes keep their service process but are not modeled."""
    config = load_config("case_study")
    loads = route_loads(config.junction, config.traffic.with_total(0.0))

    assert all(load.active for load in loads)
    assert not any(load.modeled for load in loads)


def test_route_without_share_is_inactive():
    config = load_config("case_study")
    loads = route_loads(config.junction, config.traffic.with_main_share(1.0))
    by_route = {load.route: load for load in loads}

    assert not by_route["r2"].active
    assert by_route["r2"].queue_limit is None
    assert by_route["r1"].modeled


def test_limit_override():
    config = load_config("validation")
    loads = route_loads(config.junction, config.traffic, limit_override=0.2)
    assert {load.queue_limit for load in loads} == {0.2}


@pytest.mark.parametrize("scale", [0.25, 3.0, 40.0])
def test_service_parameters_ignore_uniform_scaling(scale):
    """Headway weights are relative, so scaling every count leaves b and cv unchanged."""
    config = load_config("case_study")
    junction = config.junction
    counts = derive_train_counts(junction, config.traffic)
    table, conflicts = junction.headway_table(), junction.conflict_matrix()

    for r in range(len(junction.routes)):
        assert service_time(table, scale * counts, conflicts, r) == pytest.approx(
            service_time(table, counts, conflicts, r), rel=1e-12
        )
        assert service_cv(table, scale * counts, conflicts, r) == pytest.approx(
            service_cv(table, counts, conflicts, r), rel=1e-9
        )
