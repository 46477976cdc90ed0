"""Junction model: train counts, headway averages and per-route service processes."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
import numpy.typing as npt

from junctionq.exceptions import InvalidParameterError, NoDemandError, UndefinedPairError
from junctionq.models import ConflictMatrix, HeadwayTable, Junction, RouteLoad, TrafficSpec

logger = logging.getLogger(__name__)

QUEUE_LIMIT_SCALE = 0.479
QUEUE_LIMIT_DECAY = 1.3


def _check_share(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")


def derive_train_counts(junction: Junction, spec: TrafficSpec) -> npt.NDArray[np.float64]:
    """Split the total train count over routes and train types.

    Main lines share ``p_main * n_total`` equally, the remaining lines share the rest.
    Inside a line trains are split equally over its routes, then by composition.

    Args:
        junction: Infrastructure the lines run through.
        spec: Demand description.

    Returns:
        Array of shape ``(routes, train_types)``; the entries sum to ``n_total``.

    Raises:
        InvalidParameterError: If a share is outside [0, 1], ``n_total`` is negative,
            or demand is assigned to a group with no lines.
    """
    _check_share("p_main", spec.p_main)
    if spec.n_total < 0:
        raise InvalidParameterError(f"n_total must be non-negative, got {spec.n_total}")
    for line in spec.lines:
        for train, share in line.composition.items():
            _check_share(f"composition share {line.name}/{train}", share)

    counts = np.zeros((len(junction.routes), len(junction.train_types)))
    main_lines = [line for line in spec.lines if line.main]
    branch_lines = [line for line in spec.lines if not line.main]
    for group, share in ((main_lines, spec.p_main), (branch_lines, 1.0 - spec.p_main)):
        if share <= 0:
            continue
        if not group:
            kind = "main" if group is main_lines else "non-main"
            raise InvalidParameterError(f"share {share} assigned to {kind} lines but none exist")
        per_line = spec.n_total * share / len(group)
        for line in group:
            per_route = per_line / len(line.routes)
            for route in line.routes:
                r = junction.route_index(route)
                for train, fraction in line.composition.items():
                    counts[r, junction.train_index(train)] += per_route * fraction
    return counts


def queue_limit(passenger_share: float) -> float:
    """Acceptable mean queue length for a route with the given passenger share.

    Example:
        >>> round(queue_limit(0.0), 3)
        0.479
    """
    _check_share("passenger_share", passenger_share)
    return QUEUE_LIMIT_SCALE * math.exp(-QUEUE_LIMIT_DECAY * passenger_share)


def pair_headway(
    table: HeadwayTable, counts: npt.NDArray[np.float64], r: int, r_prime: int
) -> float:
    """Mean headway of a train on ``r_prime`` following one on ``r``.

    Raises:
        UndefinedPairError: If either route carries no trains.
        InvalidParameterError: If a weighted combination has no headway entry.
    """
    weights = np.outer(counts[r], counts[r_prime])
    total = float(weights.sum())
    if total <= 0:
        raise UndefinedPairError(table.route_names[r], table.route_names[r_prime])
    minutes = table.minutes[r, :, r_prime, :]
    needed = weights > 0
    if np.isnan(minutes[needed]).any():
        raise InvalidParameterError(
            f"missing headway between {table.route_names[r]} and {table.route_names[r_prime]}"
        )
    return float((weights[needed] * minutes[needed]).sum() / total)


def _conflict_demand(
    table: HeadwayTable, counts: npt.NDArray[np.float64], conflicts: ConflictMatrix, r: int
) -> tuple[list[int], npt.NDArray[np.float64], float]:
    others = conflicts.conflicting(r)
    per_route = counts[others].sum(axis=1)
    n_conf = float(per_route.sum())
    if n_conf <= 0:
        raise NoDemandError(table.route_names[r])
    return others, per_route, n_conf


def service_time(
    table: HeadwayTable, counts: npt.NDArray[np.float64], conflicts: ConflictMatrix, r: int
) -> float:
    """Mean occupation time of route ``r``: pair headways weighted by conflicting demand.

    Raises:
        NoDemandError: If ``r`` and its conflicting routes carry no trains.
        UndefinedPairError: If ``r`` itself carries no trains.
    """
    others, per_route, n_conf = _conflict_demand(table, counts, conflicts, r)
    total = 0.0
    for r_prime, n_prime in zip(others, per_route):
        if n_prime > 0:
            total += n_prime / n_conf * pair_headway(table, counts, r, r_prime)
    return total


def service_cv(
    table: HeadwayTable, counts: npt.NDArray[np.float64], conflicts: ConflictMatrix, r: int
) -> float:
    """Coefficient of variation of the discrete headway distribution behind ``service_time``."""
    others, per_route, n_conf = _conflict_demand(table, counts, conflicts, r)
    n_r = float(counts[r].sum())
    if n_r <= 0:
        raise UndefinedPairError(table.route_names[r], table.route_names[r])
    atoms: list[npt.NDArray[np.float64]] = []
    weights: list[npt.NDArray[np.float64]] = []
    for r_prime, n_prime in zip(others, per_route):
        if n_prime <= 0:
            continue
        w = np.outer(counts[r], counts[r_prime]) / (n_r * n_conf)
        needed = w > 0
        minutes = table.minutes[r, :, r_prime, :][needed]
        if np.isnan(minutes).any():
            raise InvalidParameterError(
                f"missing headway between {table.route_names[r]} "
                f"and {table.route_names[r_prime]}"
            )
        atoms.append(minutes)
        weights.append(w[needed])
    h = np.concatenate(atoms)
    p = np.concatenate(weights)
    mean = float(p @ h)
    variance = max(float(p @ (h * h)) - mean * mean, 0.0)
    return math.sqrt(variance) / mean


def route_loads(
    junction: Junction,
    spec: TrafficSpec,
    arrival_cv: float = 0.8,
    limit_override: Optional[float] = None,
) -> list[RouteLoad]:
    """Per-route arrival and service quantities at ``spec.n_total``.

    Service times depend only on the traffic mix, so they are computed from the
    shares at one train; a zero total still yields defined service processes.
    Routes with no share of the mix are returned inactive. Routes listed in
    ``junction.fixed_service`` use the given rate and cv.

    Example:
        >>> loads = route_loads(junction, spec.with_total(20))
        >>> [load.route for load in loads if load.modeled]
        ['r1', 'r2', 'r3', 'r4']
    """
    if not 0.0 < arrival_cv <= 1.0:
        raise InvalidParameterError(f"arrival cv must lie in (0, 1], got {arrival_cv}")
    counts = derive_train_counts(junction, spec)
    mix = derive_train_counts(junction, spec.with_total(1.0))
    table = junction.headway_table()
    conflicts = junction.conflict_matrix()
    passenger = junction.passenger_mask()

    loads = []
    for r, route in enumerate(junction.routes):
        n_r = float(counts[r].sum())
        rate = n_r / spec.time_horizon
        share = float(mix[r].sum())
        if share <= 0:
            loads.append(
                RouteLoad(route=route.name, n=n_r, arrival_rate=rate, arrival_cv=arrival_cv)
            )
            continue
        fixed = junction.fixed_service.get(route.name)
        if fixed is not None:
            mean, cv = 1.0 / fixed.rate, fixed.cv
        else:
            mean = service_time(table, mix, conflicts, r)
            cv = service_cv(table, mix, conflicts, r)
        p_pt = float(mix[r, passenger].sum()) / share
        limit = limit_override if limit_override is not None else queue_limit(p_pt)
        loads.append(
            RouteLoad(
                route=route.name,
                n=n_r,
                arrival_rate=rate,
                arrival_cv=arrival_cv,
                service_time=mean,
                service_rate=1.0 / mean,
                service_cv=cv,
                occupancy=rate * mean,
                passenger_share=p_pt,
                queue_limit=limit,
            )
        )
    logger.debug(
        "Route loads at n_total=%s: %s",
        spec.n_total,
        ", ".join(f"{ld.route}(rho={ld.occupancy})" for ld in loads),
    )
    return loads
