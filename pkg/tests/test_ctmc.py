"""Tests for state enumeration and generator assembly."""

import itertools
from collections import Counter

import numpy as np
import pytest

from junctionq import (
    ConflictMatrix,
    InvalidParameterError,
    ModelSetting,
    RouteProcess,
    StateSpaceTooLargeError,
    build_generator,
    enumerate_states,
    load_config,
)
from junctionq.ctmc import RouteState, build_model
from junctionq.junction import route_loads
from junctionq.phase_fit import fit_hypoexp


def exponential_route(name, arrival_rate, service_rate):
    return RouteProcess(
        name=name,
        arrival=fit_hypoexp(1.0 / arrival_rate, 1.0),
        service=fit_hypoexp(1.0 / service_rate, 1.0),
    )


def validation_model(setting, m=5):
    config = load_config("validation")
    loads = route_loads(config.junction, config.traffic, config.model.arrival_cv)
    return build_model(config.junction.conflict_matrix(), loads, setting, m=m)


def test_single_route_one_slot():
    """One exponential route with one waiting slot has four states and six transitions."""
    conflicts = ConflictMatrix(np.ones((1, 1), dtype=bool))
    model = build_generator(conflicts, (exponential_route("r", 0.2, 0.5),), m=1)

    assert model.n_states == 4
    assert model.n_transitions == 6
    assert model.space.decode(0) == (RouteState(0, 0, 1, 1),)
    assert model.space.index_of((RouteState(1, 0, 1, 1),)) >= 0


def test_single_route_without_slots():
    conflicts = ConflictMatrix(np.ones((1, 1), dtype=bool))
    model = build_generator(conflicts, (exponential_route("r", 0.2, 0.5),), m=0)
    assert model.n_states == 2


def test_independent_routes_reach_every_busy_vector():
    """Three routes in a path conflict graph can be busy in five combinations."""
    entries = np.eye(3, dtype=bool)
    entries[0, 1] = entries[1, 0] = entries[1, 2] = entries[2, 1] = True
    processes = tuple(exponential_route(f"r{i}", 0.1, 0.3) for i in range(3))
    space = enumerate_states(ConflictMatrix(entries), processes, m=0)

    busy = {tuple(bool(space.busy(r)[i]) for r in range(3)) for i in range(space.size)}
    assert busy == {
        (False, False, False),
        (True, False, False),
        (False, True, False),
        (False, False, True),
        (True, False, True),
    }


def test_unconstrained_routes_reach_all_busy_vectors():
    processes = tuple(exponential_route(f"r{i}", 0.1, 0.3) for i in range(3))
    space = enumerate_states(ConflictMatrix(np.eye(3, dtype=bool)), processes, m=0)
    assert space.size == 8


def test_validation_state_space():
    """The exponential validation model has 10 368 states."""
    model = validation_model(ModelSetting.MM)

    assert model.n_states == 10_368
    assert model.n_transitions == 60_480


def test_no_conflicting_routes_busy_together():
    model = validation_model(ModelSetting.MM, m=2)
    states = model.space.as_array()
    busy = states[:, :, 1].astype(bool)
    for i in range(model.conflicts.size):
        for j in model.conflicts.neighbours(i):
            assert not np.any(busy[:, i] & busy[:, j])


def test_generator_rows_sum_to_zero():
    model = validation_model(ModelSetting.PH_M, m=2)
    q = model.generator()

    assert np.allclose(np.asarray(q.sum(axis=1)).ravel(), 0.0, atol=1e-9)
    assert np.all(model.rate > 0)
    assert np.all(model.src != model.dst)


def test_queue_reward_counts_waiting_trains():
    model = validation_model(ModelSetting.MM, m=3)
    rewards = model.queue_reward(0)
    assert rewards.min() == 0
    assert rewards.max() == 3


def test_state_cap():
    processes = tuple(exponential_route(f"r{i}", 0.1, 0.3) for i in range(3))
    with pytest.raises(StateSpaceTooLargeError) as excinfo:
        enumerate_states(ConflictMatrix(np.eye(3, dtype=bool)), processes, m=5, state_cap=100)
    assert excinfo.value.cap == 100
    assert excinfo.value.count > 100


def test_mismatched_processes():
    with pytest.raises(InvalidParameterError):
        build_generator(
            ConflictMatrix(np.eye(2, dtype=bool)), (exponential_route("r", 0.1, 0.3),), m=1
        )


@pytest.mark.slow
def test_validation_state_space_phase_service():
    model = validation_model(ModelSetting.M_PH)
    assert model.n_states == 623_376


def test_empty_state_leaves_at_the_arrival_rates():
    """From the empty state only arrival phases can advance."""
    for setting in (ModelSetting.MM, ModelSetting.PH_M):
        model = validation_model(setting, m=2)
        empty = model.space.index_of(tuple(RouteState(0, 0, 1, 1) for _ in model.processes))
        expected = sum(p.arrival.rates[0] for p in model.processes)

        assert empty == 0
        assert model.exit_rates()[empty] == pytest.approx(expected, rel=1e-12)
        assert np.count_nonzero(model.src == empty) == len(model.processes)


def reference_chain(arrival, service, m, choice_rate):
    """Transitions of two mutually blocking exponential routes, one rule at a time."""
    transitions = Counter()
    for qa, qb, busy in itertools.product(range(m + 1), range(m + 1), (None, 0, 1)):
        queues = [qa, qb]
        for r in (0, 1):
            free = busy is None
            if free:
                target = (queues, r)
            elif queues[r] < m:
                target = ([q + (i == r) for i, q in enumerate(queues)], busy)
            else:
                target = None
            if target is not None:
                transitions[((qa, qb, busy), (*target[0], target[1]), arrival[r])] += 1
            if busy == r:
                transitions[((qa, qb, busy), (qa, qb, None), service[r])] += 1
            if free and queues[r] > 0:
                left = [q - (i == r) for i, q in enumerate(queues)]
                transitions[((qa, qb, busy), (*left, r), choice_rate)] += 1
    return transitions


def test_generator_matches_hand_built_chain():
    """Two conflicting exponential routes give exactly the rule-by-rule transitions."""
    arrival, service, m, choice_rate = (0.25, 0.125), (0.5, 0.25), 2, 64.0
    processes = tuple(
        exponential_route(name, a, s) for name, a, s in zip(("a", "b"), arrival, service)
    )
    model = build_generator(
        ConflictMatrix(np.ones((2, 2), dtype=bool)), processes, m=m, choice_rate=choice_rate
    )

    def compact(index):
        a, b = model.space.decode(int(index))
        busy = 0 if a.s else 1 if b.s else None
        return (a.q, b.q, busy)

    built = Counter(
        (compact(src), compact(dst), float(rate))
        for src, dst, rate in zip(model.src, model.dst, model.rate)
    )
    expected = reference_chain(arrival, service, m, choice_rate)

    assert model.n_states == (m + 1) ** 2 * 3
    assert built == expected
