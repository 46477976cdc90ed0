"""State space enumeration and generator assembly for the junction chain.

Each modeled route contributes a local state ``(q, s, pA, pS)``: waiting trains,
serving flag, arrival phase and service phase (1 while idle). A global state is
encoded as a mixed-radix integer over the routes' local indices with route 0 most
significant, so sorted codes give lexicographic order and the empty state is code 0.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.sparse import csgraph

from junctionq.exceptions import InvalidParameterError, StateSpaceTooLargeError
from junctionq.models import ConflictMatrix, ModelSetting, PhaseTypeSpec, RouteLoad
from junctionq.phase_fit import fit_hypoexp

logger = logging.getLogger(__name__)

DEFAULT_CHOICE_RATE = 600.0
DEFAULT_WAITING_SLOTS = 5
DEFAULT_STATE_CAP = 12_000_000

IntArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]


class RouteState(NamedTuple):
    """Local state of one route."""

    q: int
    s: int
    p_arrival: int
    p_service: int


@dataclass(frozen=True)
class RouteProcess:
    """Fitted arrival and service processes of one modeled route."""

    name: str
    arrival: PhaseTypeSpec
    service: PhaseTypeSpec


def _local_table(m: int, k_arrival: int, k_service: int) -> IntArray:
    rows = []
    for q in range(m + 1):
        for s in (0, 1):
            for pa in range(1, k_arrival + 1):
                for ps in range(1, k_service + 1) if s else (1,):
                    rows.append((q, s, pa, ps))
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def _local_lookup(table: IntArray, m: int, k_arrival: int, k_service: int) -> IntArray:
    lookup = np.full((m + 1, 2, k_arrival, k_service), -1, dtype=np.int64)
    lookup[table[:, 0], table[:, 1], table[:, 2] - 1, table[:, 3] - 1] = np.arange(len(table))
    return lookup


def _independent_sets(conflicts: ConflictMatrix) -> list[tuple[int, ...]]:
    k = conflicts.size
    sets = []
    for size in range(k + 1):
        for subset in itertools.combinations(range(k), size):
            if all(not conflicts.entries[i, j] for i, j in itertools.combinations(subset, 2)):
                sets.append(subset)
    return sets


@dataclass(frozen=True)
class StateSpace:
    """Sorted state codes plus the per-route tables needed to decode them."""

    codes: IntArray
    tables: tuple[IntArray, ...]
    lookups: tuple[IntArray, ...]
    strides: tuple[int, ...]
    m: int

    @property
    def size(self) -> int:
        return int(self.codes.size)

    @property
    def routes(self) -> int:
        return len(self.tables)

    def local(self, r: int, codes: Optional[IntArray] = None) -> IntArray:
        """Local state index of route ``r`` for every state (or for ``codes``)."""
        source = self.codes if codes is None else codes
        return (source // self.strides[r]) % len(self.tables[r])

    def component(self, r: int, column: int) -> IntArray:
        return self.tables[r][self.local(r), column]

    def queue_lengths(self, r: int) -> IntArray:
        return self.component(r, 0)

    def busy(self, r: int) -> npt.NDArray[np.bool_]:
        return self.component(r, 1).astype(bool)

    def decode(self, index: int) -> tuple[RouteState, ...]:
        code = self.codes[index : index + 1]
        return tuple(
            RouteState(*(int(v) for v in self.tables[r][self.local(r, code)[0]]))
            for r in range(self.routes)
        )

    def index_of(self, states: tuple[RouteState, ...]) -> int:
        """Index of a state given as a tuple of route states, or -1 if absent."""
        code = 0
        for r, st in enumerate(states):
            local = self.lookups[r][st.q, st.s, st.p_arrival - 1, st.p_service - 1]
            if local < 0:
                return -1
            code += int(local) * self.strides[r]
        pos = int(np.searchsorted(self.codes, code))
        if pos < self.size and self.codes[pos] == code:
            return pos
        return -1

    def as_array(self) -> IntArray:
        """All states as an array of shape ``(states, routes, 4)``."""
        out = np.empty((self.size, self.routes, 4), dtype=np.int64)
        for r in range(self.routes):
            out[:, r, :] = self.tables[r][self.local(r)]
        return out


@dataclass(frozen=True)
class CtmcModel:
    """Generator of the junction chain as an edge list over a reachable state space."""

    space: StateSpace
    processes: tuple[RouteProcess, ...]
    conflicts: ConflictMatrix
    src: npt.NDArray[np.integer]
    dst: npt.NDArray[np.integer]
    rate: FloatArray
    choice_rate: float
    _generator: list[sparse.csr_matrix] = field(
        default_factory=list, init=False, repr=False, compare=False
    )

    @property
    def m(self) -> int:
        return self.space.m

    @property
    def n_states(self) -> int:
        return self.space.size

    @property
    def n_transitions(self) -> int:
        return int(self.rate.size)

    @property
    def route_names(self) -> list[str]:
        return [p.name for p in self.processes]

    def exit_rates(self) -> FloatArray:
        return np.bincount(self.src, weights=self.rate, minlength=self.n_states)

    def generator(self) -> sparse.csr_matrix:
        """Rate matrix Q in CSR form; built once and cached."""
        if not self._generator:
            n = self.n_states
            off = sparse.coo_matrix((self.rate, (self.src, self.dst)), shape=(n, n)).tocsr()
            q = (off - sparse.diags(self.exit_rates())).tocsr()
            q.sum_duplicates()
            self._generator.append(q)
        return self._generator[0]

    def queue_reward(self, r: int) -> FloatArray:
        return self.space.queue_lengths(r).astype(np.float64)


def _feasible_space(
    conflicts: ConflictMatrix, processes: tuple[RouteProcess, ...], m: int, state_cap: int
) -> StateSpace:
    tables, lookups = [], []
    for p in processes:
        table = _local_table(m, p.arrival.k, p.service.k)
        tables.append(table)
        lookups.append(_local_lookup(table, m, p.arrival.k, p.service.k))
    sizes = [len(t) for t in tables]
    strides = tuple(int(np.prod(sizes[r + 1 :], dtype=np.int64)) for r in range(len(sizes)))
    idle = [np.flatnonzero(t[:, 1] == 0) for t in tables]
    serving = [np.flatnonzero(t[:, 1] == 1) for t in tables]

    independent = _independent_sets(conflicts)
    count = sum(
        int(np.prod([len(serving[r] if r in s else idle[r]) for r in range(len(tables))]))
        for s in independent
    )
    if count > state_cap:
        raise StateSpaceTooLargeError(count, state_cap)

    blocks = []
    for busy_set in independent:
        codes = np.zeros(1, dtype=np.int64)
        for r in range(len(tables)):
            candidates = serving[r] if r in busy_set else idle[r]
            codes = (codes[:, None] + candidates[None, :] * strides[r]).ravel()
        blocks.append(codes)
    all_codes = np.sort(np.concatenate(blocks)) if blocks else np.zeros(1, dtype=np.int64)
    return StateSpace(all_codes, tuple(tables), tuple(lookups), strides, m)


def _transitions(
    space: StateSpace,
    processes: tuple[RouteProcess, ...],
    conflicts: ConflictMatrix,
    choice_rate: float,
) -> tuple[IntArray, IntArray, FloatArray]:
    codes = space.codes
    m = space.m
    busy = [space.busy(r) for r in range(space.routes)]
    src_parts: list[IntArray] = []
    dst_parts: list[IntArray] = []
    rate_parts: list[FloatArray] = []

    for r, process in enumerate(processes):
        lookup = space.lookups[r]
        stride = space.strides[r]
        local = space.local(r)
        q, s, pa, ps = (space.tables[r][local, c] for c in range(4))
        blocked = np.zeros(space.size, dtype=bool)
        for j in conflicts.neighbours(r):
            blocked |= busy[j]
        free = (s == 0) & ~blocked
        k_a, k_s = process.arrival.k, process.service.k
        arrival_rates = process.arrival.rates
        service_rates = process.service.rates

        def emit(mask: npt.NDArray[np.bool_], new_local: IntArray, rates: FloatArray) -> None:
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                return
            target = codes[idx] + (new_local - local[idx]) * stride
            src_parts.append(idx)
            dst_parts.append(np.searchsorted(codes, target))
            rate_parts.append(np.broadcast_to(rates, idx.shape).astype(np.float64))

        # arrival phase advance
        mask = pa < k_a
        emit(mask, lookup[q[mask], s[mask], pa[mask], ps[mask] - 1], arrival_rates[pa[mask] - 1])

        # arrival completes: start, enqueue or overflow
        last = arrival_rates[k_a - 1]
        final = pa == k_a
        mask = final & free
        emit(mask, lookup[q[mask], 1, 0, 0], np.asarray(last))
        mask = final & ~free & (q < m)
        emit(mask, lookup[q[mask] + 1, s[mask], 0, ps[mask] - 1], np.asarray(last))
        if k_a > 1:
            mask = final & ~free & (q == m)
            emit(mask, lookup[q[mask], s[mask], 0, ps[mask] - 1], np.asarray(last))

        # service phase advance and completion
        mask = (s == 1) & (ps < k_s)
        emit(mask, lookup[q[mask], 1, pa[mask] - 1, ps[mask]], service_rates[ps[mask] - 1])
        mask = (s == 1) & (ps == k_s)
        emit(mask, lookup[q[mask], 0, pa[mask] - 1, 0], np.asarray(service_rates[k_s - 1]))

        # choice of a queued train
        mask = free & (q > 0)
        emit(mask, lookup[q[mask] - 1, 1, pa[mask] - 1, 0], np.asarray(choice_rate))

    if not src_parts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(src_parts), np.concatenate(dst_parts), np.concatenate(rate_parts)


def _restrict_to_reachable(
    space: StateSpace, src: IntArray, dst: IntArray, rate: FloatArray
) -> tuple[StateSpace, IntArray, IntArray, FloatArray]:
    n = space.size
    adjacency = sparse.csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    reached = np.sort(csgraph.breadth_first_order(adjacency, 0, return_predecessors=False))
    if reached.size == n:
        return space, src, dst, rate
    logger.debug("Pruned %d unreachable states", n - reached.size)
    remap = np.full(n, -1, dtype=np.int64)
    remap[reached] = np.arange(reached.size)
    keep = remap[src] >= 0
    pruned = StateSpace(space.codes[reached], space.tables, space.lookups, space.strides, space.m)
    return pruned, remap[src[keep]], remap[dst[keep]], rate[keep]


def _validate(processes: tuple[RouteProcess, ...], conflicts: ConflictMatrix, m: int) -> None:
    if m < 0:
        raise InvalidParameterError(f"waiting slots must be non-negative, got {m}")
    if conflicts.size != len(processes):
        raise InvalidParameterError(
            f"conflict matrix has {conflicts.size} routes but {len(processes)} processes given"
        )


def _compact(index: IntArray, n: int) -> npt.NDArray[np.integer]:
    return index.astype(np.int32) if n < np.iinfo(np.int32).max else index


def enumerate_states(
    conflicts: ConflictMatrix,
    processes: tuple[RouteProcess, ...],
    m: int = DEFAULT_WAITING_SLOTS,
    state_cap: int = DEFAULT_STATE_CAP,
) -> StateSpace:
    """Conflict-feasible states reachable from the empty state.

    Raises:
        StateSpaceTooLargeError: If the conflict-feasible count exceeds ``state_cap``.
    """
    _validate(processes, conflicts, m)
    space = _feasible_space(conflicts, processes, m, state_cap)
    src, dst, rate = _transitions(space, processes, conflicts, DEFAULT_CHOICE_RATE)
    return _restrict_to_reachable(space, src, dst, rate)[0]


def build_generator(
    conflicts: ConflictMatrix,
    processes: tuple[RouteProcess, ...],
    m: int = DEFAULT_WAITING_SLOTS,
    choice_rate: float = DEFAULT_CHOICE_RATE,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CtmcModel:
    """Assemble the chain for the given routes.

    Per route, arrivals advance through their phases and on completion either start
    service (route and its conflicting routes idle), join the queue, or are lost when
    all ``m`` slots are taken. Service advances through its phases and completes by
    clearing the serving flag. A queued train on a free route starts at ``choice_rate``.

    Args:
        conflicts: Conflict relation restricted to the modeled routes.
        processes: Fitted processes, one per modeled route, in conflict-matrix order.
        m: Waiting slots per route.
        choice_rate: Rate of the choice transition.
        state_cap: Largest admissible conflict-feasible state count.

    Returns:
        The chain over the states reachable from the empty state.

    Example:
        >>> model = build_generator(ConflictMatrix(np.ones((1, 1), bool)), (process,), m=1)
        >>> model.n_states, model.n_transitions
        (4, 6)
    """
    _validate(processes, conflicts, m)
    if not choice_rate > 0:
        raise InvalidParameterError(f"choice rate must be positive, got {choice_rate}")
    space = _feasible_space(conflicts, processes, m, state_cap)
    src, dst, rate = _transitions(space, processes, conflicts, choice_rate)
    space, src, dst, rate = _restrict_to_reachable(space, src, dst, rate)
    logger.debug(
        "Built chain for %s: %d states, %d transitions",
        [p.name for p in processes],
        space.size,
        rate.size,
    )
    return CtmcModel(
        space=space,
        processes=processes,
        conflicts=conflicts,
        src=_compact(src, space.size),
        dst=_compact(dst, space.size),
        rate=rate,
        choice_rate=choice_rate,
    )


def route_processes(
    loads: list[RouteLoad], setting: ModelSetting
) -> tuple[list[int], tuple[RouteProcess, ...]]:
    """Fit processes for the modeled routes; returns their indices among ``loads``.

    Processes not modeled as phase-type under ``setting`` are single exponentials.
    """
    indices, processes = [], []
    for i, load in enumerate(loads):
        if not load.modeled:
            continue
        assert load.service_time is not None and load.service_cv is not None
        arrival_cv = load.arrival_cv if setting.phase_arrival else 1.0
        service_cv = load.service_cv if setting.phase_service else 1.0
        indices.append(i)
        processes.append(
            RouteProcess(
                name=load.route,
                arrival=fit_hypoexp(1.0 / load.arrival_rate, arrival_cv),
                service=fit_hypoexp(load.service_time, service_cv),
            )
        )
    return indices, tuple(processes)


def build_model(
    conflicts: ConflictMatrix,
    loads: list[RouteLoad],
    setting: ModelSetting,
    m: int = DEFAULT_WAITING_SLOTS,
    choice_rate: float = DEFAULT_CHOICE_RATE,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CtmcModel:
    """Fit processes for the modeled routes of ``loads`` and build their chain."""
    indices, processes = route_processes(loads, setting)
    return build_generator(conflicts.restrict(indices), processes, m, choice_rate, state_cap)
