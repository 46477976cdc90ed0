"""Tests for the discrete-event simulation and the capacity bounds."""

import numpy as np
import pytest

from junctionq import (
    ConflictMatrix,
    ModelSetting,
    RouteLoad,
    RouteProcess,
    SimConfig,
    capacity_bounds,
    load_config,
    simulate,
    stationary,
)
from junctionq.ctmc import build_model, route_processes
from junctionq.junction import route_loads
from junctionq.phase_fit import fit_hypoexp
from junctionq.steady_state import expected_queue_length


def load(route, arrival_rate):
    return RouteLoad(route=route, n=arrival_rate * 60, arrival_rate=arrival_rate, arrival_cv=1.0)


def exponential_route(name, arrival_rate, service_rate):
    return RouteProcess(
        name=name,
        arrival=fit_hypoexp(1.0 / arrival_rate, 1.0),
        service=fit_hypoexp(1.0 / service_rate, 1.0),
    )


def test_single_server_queue():
    """One exponential route approaches the single-server mean queue length."""
    conflicts = ConflictMatrix(np.ones((1, 1), dtype=bool))
    cfg = SimConfig(horizon=2000.0, replications=50, seed=3, warmup=100.0)
    result = simulate(conflicts, [load("r", 0.15)], [exponential_route("r", 0.15, 0.3)], cfg)

    rho = 0.5
    expected = rho**2 / (1 - rho)
    assert result.mean_queue["r"] == pytest.approx(expected, abs=4 * result.std_error["r"])
    assert result.std_error["r"] > 0


def test_no_trains_no_queues():
    conflicts = ConflictMatrix(np.ones((2, 2), dtype=bool))
    result = simulate(conflicts, [load("a", 0.0), load("b", 0.0)], [], SimConfig(replications=3))

    assert result.mean_queue == {"a": 0.0, "b": 0.0}
    assert result.std_error == {"a": 0.0, "b": 0.0}


def test_same_seed_same_result():
    conflicts = ConflictMatrix(np.ones((2, 2), dtype=bool))
    loads = [load("a", 0.2), load("b", 0.1)]
    processes = [exponential_route("a", 0.2, 0.5), exponential_route("b", 0.1, 0.4)]
    cfg = SimConfig(horizon=300.0, replications=4, seed=11, keep_traces=True)

    first = simulate(conflicts, loads, processes, cfg)
    second = simulate(conflicts, loads, processes, cfg)

    assert first == second
    assert first.traces is not None
    assert len(first.traces) == 4
    assert len(first.traces[0]) == 300


def test_parallel_replications_match_serial():
    conflicts = ConflictMatrix(np.ones((2, 2), dtype=bool))
    loads = [load("a", 0.2), load("b", 0.1)]
    processes = [exponential_route("a", 0.2, 0.5), exponential_route("b", 0.1, 0.4)]
    cfg = SimConfig(horizon=200.0, replications=4, seed=5)

    serial = simulate(conflicts, loads, processes, cfg)
    parallel = simulate(conflicts, loads, processes, cfg.model_copy(update={"jobs": 2}))

    assert parallel.replication_means == serial.replication_means


def test_service_starts_in_arrival_order():
    """Each route starts its trains first-in-first-out and never before they arrive."""
    conflicts = ConflictMatrix(np.ones((2, 2), dtype=bool))
    loads = [load("a", 0.3), load("b", 0.2)]
    processes = [exponential_route("a", 0.3, 0.5), exponential_route("b", 0.2, 0.5)]
    cfg = SimConfig(horizon=500.0, replications=2, seed=1, keep_traces=True)
    result = simulate(conflicts, loads, processes, cfg)

    assert result.start_log is not None
    for log in result.start_log:
        for route in ("a", "b"):
            starts = [(arrived, started) for name, arrived, started in log if name == route]
            assert starts
            assert all(arrived <= started for arrived, started in starts)
            assert [a for a, _ in starts] == sorted(a for a, _ in starts)
            assert [s for _, s in starts] == sorted(s for _, s in starts)


def test_queue_cap_limits_waiting_trains():
    conflicts = ConflictMatrix(np.ones((1, 1), dtype=bool))
    cfg = SimConfig(horizon=500.0, replications=2, seed=2, queue_cap=1, keep_traces=True)
    result = simulate(conflicts, [load("r", 0.5)], [exponential_route("r", 0.5, 0.3)], cfg)

    assert result.traces is not None
    assert max(sample[0] for run in result.traces for sample in run) <= 1


def test_bounds_monotone():
    assert capacity_bounds([16.0, 16.04], [{"r": 0.1}, {"r": 0.2}], {"r": 0.13}) == (16.0, 16.04)


def test_bounds_with_spike():
    """A spike above the limit caps the lower bound; a later dip keeps the upper bound up."""
    grid = [15.42, 15.46, 15.50, 15.54, 15.58]
    lengths = [{"r": v} for v in (0.10, 0.11, 0.20, 0.12, 0.25)]

    lower, upper = capacity_bounds(grid, lengths, {"r": 0.13})

    assert lower == 15.46
    assert upper == 15.58


def test_bounds_open_ends():
    below = [{"r": 0.01}, {"r": 0.02}]
    above = [{"r": 1.0}, {"r": 2.0}]
    assert capacity_bounds([4.0, 8.0], below, {"r": 0.5}) == (8.0, None)
    assert capacity_bounds([4.0, 8.0], above, {"r": 0.5}) == (None, 4.0)


def test_bounds_sort_the_grid():
    lengths = [{"r": 0.3}, {"r": 0.1}]
    assert capacity_bounds([8.0, 4.0], lengths, {"r": 0.2}) == (4.0, 8.0)


def chain_and_simulation(n_total, cfg, m=5):
    """Exponential validation junction solved as a chain and simulated with the same rates."""
    config = load_config("validation")
    loads = route_loads(config.junction, config.traffic.with_total(n_total))
    conflicts = config.junction.conflict_matrix()
    model = build_model(conflicts, loads, ModelSetting.MM, m=m)
    dist = stationary(model)
    chain = {r: expected_queue_length(dist, model, r) for r in model.route_names}
    _, processes = route_processes(loads, ModelSetting.MM)
    return chain, simulate(conflicts, loads, processes, cfg)


@pytest.mark.parametrize("n_total", [4.0, 8.0])
def test_chain_agrees_with_simulation_at_light_traffic(n_total):
    """With few trains the chain's queue lengths lie within the simulation's error."""
    cfg = SimConfig(horizon=1200.0, replications=100, seed=2, warmup=60.0, queue_cap=5)
    chain, sim = chain_and_simulation(n_total, cfg)

    for route, length in chain.items():
        assert length == pytest.approx(
            sim.mean_queue[route], abs=4 * sim.std_error[route] + 0.005
        )


@pytest.mark.slow
@pytest.mark.parametrize("n_total", [12.0, 16.0])
def test_chain_agrees_with_simulation(n_total):
    cfg = SimConfig(horizon=1200.0, replications=100, seed=2, warmup=60.0, queue_cap=5)
    chain, sim = chain_and_simulation(n_total, cfg)

    for route, length in chain.items():
        slack = 4 * sim.std_error[route] + 0.1 * sim.mean_queue[route] + 0.005
        assert length == pytest.approx(sim.mean_queue[route], abs=slack)


def test_truncated_chain_underestimates_heavy_traffic():
    """Past saturation the five waiting slots cap the chain below the unbounded simulation."""
    cfg = SimConfig(horizon=1200.0, replications=10, seed=4, warmup=60.0)
    chain, sim = chain_and_simulation(36.0, cfg)

    totals = [sum(rep.values()) for rep in sim.replication_means]
    spread = float(np.std(totals, ddof=1)) / np.sqrt(len(totals))
    assert sum(chain.values()) < sum(sim.mean_queue.values()) - 3 * spread
    assert chain["r2"] < sim.mean_queue["r2"]
