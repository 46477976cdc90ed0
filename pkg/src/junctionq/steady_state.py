"""Stationary distribution of a junction chain and per-route expected queue lengths."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
from numba import njit
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve

from junctionq.ctmc import CtmcModel
from junctionq.exceptions import ConvergenceError, InvalidParameterError, ReducibleChainError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_DIRECT_LIMIT = 5_000
DIRECT_ORDERING = "MMD_AT_PLUS_A"
RENORMALIZE_EVERY = 100
CHECK_EVERY = 10
UNIFORMIZATION_SLACK = 1.05


class SolverMethod(str, Enum):
    """Method used to solve the global balance equations."""

    AUTO = "auto"
    DIRECT = "direct"
    GAUSS_SEIDEL = "gauss_seidel"
    POWER = "power"


@dataclass(frozen=True)
class StationaryDistribution:
    """Probability per state index together with solver diagnostics."""

    pi: npt.NDArray[np.float64]
    residual: float
    iterations: int
    method: SolverMethod


@njit(cache=True)  # type: ignore[misc]
def _gauss_seidel_sweeps(  # type: ignore[no-untyped-def]
    indptr, indices, data, exit_rates, pi, sweeps
):
    n = pi.shape[0]
    for _ in range(sweeps):
        for i in range(n):
            inflow = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                inflow += pi[indices[p]] * data[p]
            pi[i] = inflow / exit_rates[i]


def _residual(q_transposed: sparse.csr_matrix, pi: npt.NDArray[np.float64]) -> float:
    return float(np.max(np.abs(q_transposed @ pi)))


def _normalize(pi: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    pi = np.maximum(pi, 0.0)
    return pi / pi.sum()


def _check_irreducible(model: CtmcModel) -> None:
    n = model.n_states
    adjacency = sparse.csr_matrix(
        (np.ones(model.n_transitions, dtype=np.int8), (model.src, model.dst)), shape=(n, n)
    )
    components, _ = csgraph.connected_components(adjacency, directed=True, connection="strong")
    if components > 1:
        raise ReducibleChainError(int(components))


def _solve_direct(q_transposed: sparse.csr_matrix) -> npt.NDArray[np.float64]:
    # pin pi[0] = 1 and solve the remaining balance equations
    reduced = q_transposed[1:, 1:].tocsc()
    rhs = -np.asarray(q_transposed[1:, 0].todense(), dtype=np.float64).ravel()
    rest = spsolve(reduced, rhs, permc_spec=DIRECT_ORDERING)
    pi = np.concatenate(([1.0], np.asarray(rest, dtype=np.float64)))
    return _normalize(pi)


def _solve_gauss_seidel(
    model: CtmcModel,
    q_transposed: sparse.csr_matrix,
    tol: float,
    max_iter: int,
    start: Optional[npt.NDArray[np.float64]] = None,
) -> tuple[npt.NDArray[np.float64], float, int]:
    incoming = sparse.csr_matrix(
        (model.rate, (model.dst, model.src)), shape=(model.n_states, model.n_states)
    )
    incoming.sum_duplicates()
    exit_rates = model.exit_rates()
    pi = np.full(model.n_states, 1.0 / model.n_states) if start is None else start.copy()
    iterations = 0
    residual = _residual(q_transposed, pi)
    while residual > tol and iterations < max_iter:
        sweeps = min(CHECK_EVERY, max_iter - iterations)
        _gauss_seidel_sweeps(
            incoming.indptr, incoming.indices, incoming.data, exit_rates, pi, sweeps
        )
        iterations += sweeps
        pi = _normalize(pi)
        residual = _residual(q_transposed, pi)
    return pi, residual, iterations


def _solve_power(
    model: CtmcModel, q_transposed: sparse.csr_matrix, tol: float, max_iter: int
) -> tuple[npt.NDArray[np.float64], float, int]:
    uniformization = UNIFORMIZATION_SLACK * float(model.exit_rates().max())
    step = (sparse.identity(model.n_states, format="csr") + q_transposed / uniformization).tocsr()
    pi = np.full(model.n_states, 1.0 / model.n_states)
    iterations = 0
    residual = _residual(q_transposed, pi)
    while residual > tol and iterations < max_iter:
        pi = step @ pi
        iterations += 1
        if iterations % RENORMALIZE_EVERY == 0:
            pi = _normalize(pi)
        if iterations % CHECK_EVERY == 0:
            residual = _residual(q_transposed, pi)
    pi = _normalize(pi)
    return pi, _residual(q_transposed, pi), iterations


def stationary(
    model: CtmcModel,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    method: SolverMethod = SolverMethod.AUTO,
    direct_limit: int = DEFAULT_DIRECT_LIMIT,
) -> StationaryDistribution:
    """Solve ``pi Q = 0`` with ``sum(pi) = 1``.

    ``AUTO`` uses a sparse direct solve up to ``direct_limit`` states and
    Gauss-Seidel sweeps beyond. A direct solution whose residual misses ``tol``
    is refined with Gauss-Seidel sweeps.

    Args:
        model: Chain to solve.
        tol: Bound on the largest component of ``pi Q``.
        max_iter: Sweep or step budget for the iterative methods.
        method: Solution method.
        direct_limit: Largest state count solved directly under ``AUTO``.

    Returns:
        The stationary distribution with its final residual.

    Raises:
        ReducibleChainError: If the chain has more than one strongly connected component.
        ConvergenceError: If the iterative method exhausts ``max_iter``.
    """
    if not tol > 0:
        raise InvalidParameterError(f"tolerance must be positive, got {tol}")
    if model.n_states == 1:
        return StationaryDistribution(np.ones(1), 0.0, 0, method)
    _check_irreducible(model)

    if method is SolverMethod.AUTO:
        method = (
            SolverMethod.DIRECT if model.n_states <= direct_limit else SolverMethod.GAUSS_SEIDEL
        )
    q_transposed = model.generator().T.tocsr()

    if method is SolverMethod.DIRECT:
        pi = _solve_direct(q_transposed)
        residual = _residual(q_transposed, pi)
        iterations = 0
        if residual > tol:
            logger.debug("Direct residual %.3e above tolerance, refining", residual)
            pi, residual, iterations = _solve_gauss_seidel(
                model, q_transposed, tol, max_iter, start=pi
            )
    elif method is SolverMethod.GAUSS_SEIDEL:
        pi, residual, iterations = _solve_gauss_seidel(model, q_transposed, tol, max_iter)
    else:
        pi, residual, iterations = _solve_power(model, q_transposed, tol, max_iter)

    if residual > tol:
        raise ConvergenceError(
            f"{method.value} solver stopped at residual {residual:.3e} after {iterations} "
            "iterations",
            residual=residual,
            iterations=iterations,
        )
    logger.debug(
        "Solved %d states with %s: residual %.3e, %d iterations",
        model.n_states,
        method.value,
        residual,
        iterations,
    )
    return StationaryDistribution(pi, residual, iterations, method)


def expected_queue_length(
    dist: StationaryDistribution, model: CtmcModel, route: Union[int, str]
) -> float:
    """Expected number of waiting trains on ``route``; 0 for routes outside the model."""
    if isinstance(route, str):
        if route not in model.route_names:
            return 0.0
        route = model.route_names.index(route)
    return float(dist.pi @ model.queue_reward(route))
