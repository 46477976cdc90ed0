"""Tests for the stationary solvers and queue length rewards."""

import dataclasses

import numpy as np
import pytest

from junctionq import (
    ConflictMatrix,
    InvalidParameterError,
    ModelSetting,
    ReducibleChainError,
    RouteProcess,
    SolverMethod,
    build_generator,
    load_config,
    stationary,
)
from junctionq.ctmc import build_model
from junctionq.junction import route_loads
from junctionq.phase_fit import fit_hypoexp
from junctionq.steady_state import DEFAULT_DIRECT_LIMIT, expected_queue_length


def exponential_route(name, arrival_rate, service_rate):
    return RouteProcess(
        name=name,
        arrival=fit_hypoexp(1.0 / arrival_rate, 1.0),
        service=fit_hypoexp(1.0 / service_rate, 1.0),
    )


def two_route_model(choice_rate=600.0, m=2):
    conflicts = ConflictMatrix(np.ones((2, 2), dtype=bool))
    processes = (exponential_route("a", 0.1, 0.4), exponential_route("b", 0.15, 0.3))
    return build_generator(conflicts, processes, m=m, choice_rate=choice_rate)


def dense_solution(model):
    q = model.generator().toarray()
    a = q.T.copy()
    a[-1, :] = 1.0
    rhs = np.zeros(model.n_states)
    rhs[-1] = 1.0
    return np.linalg.solve(a, rhs)


def test_direct_matches_dense_solve():
    """The sparse direct solution agrees with a dense solve of the same chain."""
    model = two_route_model()
    dist = stationary(model, method=SolverMethod.DIRECT)

    assert model.n_states <= 300
    assert dist.pi.sum() == pytest.approx(1.0)
    assert np.max(np.abs(dist.pi - dense_solution(model))) < 1e-10
    assert dist.residual <= 1e-10


def test_iterative_methods_agree():
    """Gauss-Seidel sweeps and power iteration reach the direct solution."""
    model = two_route_model(choice_rate=5.0, m=3)
    direct = stationary(model, method=SolverMethod.DIRECT).pi

    gauss_seidel = stationary(model, tol=1e-12, method=SolverMethod.GAUSS_SEIDEL)
    power = stationary(model, tol=1e-12, method=SolverMethod.POWER)

    assert np.max(np.abs(gauss_seidel.pi - direct)) < 1e-8
    assert np.max(np.abs(power.pi - direct)) < 1e-8
    assert gauss_seidel.iterations > 0
    assert power.method is SolverMethod.POWER


def test_auto_switches_to_gauss_seidel():
    model = two_route_model(choice_rate=5.0)
    dist = stationary(model, tol=1e-12, direct_limit=10)
    assert dist.method is SolverMethod.GAUSS_SEIDEL


def test_single_route_matches_finite_queue_closed_form():
    """With a fast choice transition one route behaves like a finite single-server queue."""
    arrival, service, m = 0.2, 0.5, 4
    model = build_generator(
        ConflictMatrix(np.ones((1, 1), dtype=bool)),
        (exponential_route("r", arrival, service),),
        m=m,
        choice_rate=1e5,
    )
    dist = stationary(model)

    rho = arrival / service
    weights = rho ** np.arange(m + 2)
    probabilities = weights / weights.sum()
    waiting = sum((n - 1) * probabilities[n] for n in range(1, m + 2))
    assert expected_queue_length(dist, model, 0) == pytest.approx(waiting, abs=1e-5)
    assert expected_queue_length(dist, model, "r") == expected_queue_length(dist, model, 0)


def test_unknown_route_has_empty_queue():
    model = two_route_model()
    dist = stationary(model)
    assert expected_queue_length(dist, model, "missing") == 0.0


def test_reducible_chain_is_rejected():
    """Without choice transitions queued trains can never leave the queue."""
    model = build_generator(
        ConflictMatrix(np.ones((1, 1), dtype=bool)), (exponential_route("r", 0.2, 0.5),), m=1
    )
    keep = model.rate != model.choice_rate
    broken = dataclasses.replace(
        model, src=model.src[keep], dst=model.dst[keep], rate=model.rate[keep]
    )
    with pytest.raises(ReducibleChainError):
        stationary(broken)


def test_rejects_non_positive_tolerance():
    with pytest.raises(InvalidParameterError):
        stationary(two_route_model(), tol=0.0)


def validation_model(n_total):
    config = load_config("validation")
    loads = route_loads(config.junction, config.traffic.with_total(n_total))
    return build_model(config.junction.conflict_matrix(), loads, ModelSetting.MM)


def test_auto_solves_large_chains_iteratively():
    """Chains past the direct limit go to Gauss-Seidel, which meets the tolerance."""
    model = validation_model(16.0)
    dist = stationary(model)

    assert model.n_states > DEFAULT_DIRECT_LIMIT
    assert dist.method is SolverMethod.GAUSS_SEIDEL
    assert dist.residual <= 1e-10


def test_auto_solves_small_chains_directly():
    model = two_route_model()
    assert model.n_states <= DEFAULT_DIRECT_LIMIT
    assert stationary(model).method is SolverMethod.DIRECT


def test_global_balance_holds_per_state():
    """Probability flow out of each state equals the flow into it."""
    model = two_route_model(choice_rate=50.0, m=3)
    pi = stationary(model, tol=1e-12, method=SolverMethod.GAUSS_SEIDEL).pi

    outflow = pi * model.exit_rates()
    inflow = np.bincount(model.dst, weights=pi[model.src] * model.rate, minlength=model.n_states)
    for state in (0, model.n_states // 3, model.n_states // 2, model.n_states - 1):
        assert inflow[state] == pytest.approx(outflow[state], abs=1e-11)
    assert np.max(np.abs(inflow - outflow)) < 1e-10


def test_queue_lengths_grow_with_traffic():
    """More trains per hour never shorten a route's expected queue."""
    lengths = []
    for n_total in (4.0, 8.0, 12.0):
        model = validation_model(n_total)
        dist = stationary(model)
        lengths.append([expected_queue_length(dist, model, r) for r in model.route_names])

    for lower, higher in zip(lengths, lengths[1:]):
        assert all(a < b for a, b in zip(lower, higher))
