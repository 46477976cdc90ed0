"""Quality factors, the capacity function and its root search."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from junctionq.approximations import scaling_factor
from junctionq.ctmc import (
    DEFAULT_CHOICE_RATE,
    DEFAULT_STATE_CAP,
    DEFAULT_WAITING_SLOTS,
    build_model,
)
from junctionq.exceptions import (
    BracketError,
    ConvergenceError,
    EvaluationError,
    InvalidParameterError,
    JunctionqError,
)
from junctionq.junction import route_loads
from junctionq.models import (
    BoundStatus,
    CapacityEvaluation,
    CapacityResult,
    Junction,
    ModelSetting,
    Scaling,
    TrafficSpec,
)
from junctionq.steady_state import (
    DEFAULT_DIRECT_LIMIT,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SolverMethod,
    expected_queue_length,
    stationary,
)

logger = logging.getLogger(__name__)

DEFAULT_XTOL = 1e-3
DEFAULT_RTOL = 1e-3
DEFAULT_BRENT_ITER = 100


def quality_factors(lengths: dict[str, float], limits: dict[str, float]) -> dict[str, float]:
    """Ratio of expected queue length to acceptable queue length per route.

    Raises:
        InvalidParameterError: If a limit is not positive.
    """
    factors = {}
    for route, length in lengths.items():
        limit = limits[route]
        if not limit > 0:
            raise InvalidParameterError(f"queue limit of {route} must be positive, got {limit}")
        factors[route] = length / limit
    return factors


@dataclass
class RootResult:
    """Result of a root search.

    Attributes:
        root: Best estimate of the root.
        converged: Whether the bracket met the tolerance.
        iterations: Number of interpolation or bisection steps.
        function_calls: Number of function evaluations, bracket endpoints included.
        bracket: Final bracket around the root.
    """

    root: float
    converged: bool
    iterations: int
    function_calls: int
    bracket: tuple[float, float]


def brent_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = DEFAULT_XTOL,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = DEFAULT_BRENT_ITER,
) -> RootResult:
    """Find a root of ``f`` in ``[a, b]`` by Brent's method.

    Inverse quadratic interpolation and secant steps are accepted while they shrink
    the bracket fast enough; otherwise the step is a bisection.

    Args:
        f: Continuous function with a sign change on ``[a, b]``.
        a: Lower end of the bracket.
        b: Upper end of the bracket.
        xtol: Absolute tolerance.
        rtol: Relative tolerance.
        max_iter: Largest number of steps.

    Returns:
        RootResult whose bracket width is at most ``xtol + rtol * |root|``.

    Raises:
        BracketError: If ``f(a)`` and ``f(b)`` have the same sign.
        ConvergenceError: If ``max_iter`` steps do not meet the tolerance.

    Example:
        >>> result = brent_root(lambda x: x - 3.0, 0.0, 10.0)
        >>> result.root, result.function_calls
        (3.0, 3)
    """
    if not a < b:
        raise InvalidParameterError(f"bracket must satisfy a < b, got [{a}, {b}]")
    calls = 0

    def evaluate(x: float) -> float:
        nonlocal calls
        calls += 1
        return f(x)

    x_pre, x_cur = a, b
    f_pre, f_cur = evaluate(a), evaluate(b)
    if f_pre * f_cur > 0:
        raise BracketError(a, b, f_pre, f_cur)
    if f_pre == 0:
        return RootResult(a, True, 0, calls, (a, a))
    if f_cur == 0:
        return RootResult(b, True, 0, calls, (b, b))

    x_blk = f_blk = 0.0
    s_pre = s_cur = 0.0
    for iteration in range(max_iter):
        if f_pre != 0 and f_cur != 0 and math.copysign(1, f_pre) != math.copysign(1, f_cur):
            x_blk, f_blk = x_pre, f_pre
            s_pre = s_cur = x_cur - x_pre
        if abs(f_blk) < abs(f_cur):
            x_pre, x_cur, x_blk = x_cur, x_blk, x_cur
            f_pre, f_cur, f_blk = f_cur, f_blk, f_cur

        delta = (xtol + rtol * abs(x_cur)) / 2
        s_bis = (x_blk - x_cur) / 2
        if f_cur == 0 or abs(s_bis) < delta:
            bracket = (min(x_cur, x_blk), max(x_cur, x_blk))
            return RootResult(x_cur, True, iteration, calls, bracket)

        if abs(s_pre) > delta and abs(f_cur) < abs(f_pre):
            if x_pre == x_blk:
                s_try = -f_cur * (x_cur - x_pre) / (f_cur - f_pre)
            else:
                d_pre = (f_pre - f_cur) / (x_pre - x_cur)
                d_blk = (f_blk - f_cur) / (x_blk - x_cur)
                s_try = (
                    -f_cur * (f_blk * d_blk - f_pre * d_pre) / (d_blk * d_pre * (f_blk - f_pre))
                )
            if 2 * abs(s_try) < min(abs(s_pre), 3 * abs(s_bis) - delta):
                s_pre, s_cur = s_cur, s_try
            else:
                s_pre = s_cur = s_bis
        else:
            s_pre = s_cur = s_bis

        x_pre, f_pre = x_cur, f_cur
        if abs(s_cur) > delta:
            x_cur += s_cur
        else:
            x_cur += delta if s_bis > 0 else -delta
        f_cur = evaluate(x_cur)

    bracket = (min(x_cur, x_blk), max(x_cur, x_blk))
    raise ConvergenceError(
        f"Brent search did not converge in {max_iter} steps",
        iterations=max_iter,
        bracket=bracket,
    )


@dataclass
class CapacityProblem:
    """A junction, its demand template and the model used to judge queue lengths.

    Evaluations are cached by train count.

    Example:
        >>> problem = CapacityProblem(junction, traffic, setting=ModelSetting.MM,
        ...                           scaling=Scaling.HERTEL)
        >>> problem.evaluate(10.0).phi < 0
        True
    """

    junction: Junction
    traffic: TrafficSpec
    setting: ModelSetting = ModelSetting.PH_PH
    scaling: Scaling = Scaling.NONE
    waiting_slots: int = DEFAULT_WAITING_SLOTS
    choice_rate: float = DEFAULT_CHOICE_RATE
    arrival_cv: float = 0.8
    queue_limit: Optional[float] = None
    state_cap: int = DEFAULT_STATE_CAP
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    method: SolverMethod = SolverMethod.AUTO
    direct_limit: int = DEFAULT_DIRECT_LIMIT
    _cache: dict[float, CapacityEvaluation] = field(default_factory=dict, init=False, repr=False)

    def evaluate(self, n_total: float) -> CapacityEvaluation:
        """Evaluate the capacity function at ``n_total``.

        Raises:
            EvaluationError: Wrapping any model, fitting or solver failure.
        """
        cached = self._cache.get(n_total)
        if cached is not None:
            return cached
        start = time.perf_counter()
        try:
            evaluation = self._evaluate(n_total)
        except EvaluationError:
            raise
        except JunctionqError as exc:
            raise EvaluationError(n_total, exc) from exc
        evaluation.wall_time = time.perf_counter() - start
        self._cache[n_total] = evaluation
        return evaluation

    def _evaluate(self, n_total: float) -> CapacityEvaluation:
        if n_total < 0:
            raise InvalidParameterError(f"n_total must be non-negative, got {n_total}")
        loads = route_loads(
            self.junction, self.traffic.with_total(n_total), self.arrival_cv, self.queue_limit
        )
        modeled = [load for load in loads if load.modeled]
        factors = {load.route: 0.0 for load in loads}
        if not modeled:
            return CapacityEvaluation(
                iteration=0, n_total=n_total, phi=-1.0, quality_factors=factors, states=1
            )

        if self.scaling is Scaling.HERTEL:
            occupancy = max(load.occupancy or 0.0 for load in modeled)
            if occupancy >= 1:
                logger.debug("Saturated at n_total=%s (max occupancy %.4f)", n_total, occupancy)
                return CapacityEvaluation(
                    iteration=0, n_total=n_total, phi=occupancy, saturated=True
                )

        model = build_model(
            self.junction.conflict_matrix(),
            loads,
            self.setting,
            m=self.waiting_slots,
            choice_rate=self.choice_rate,
            state_cap=self.state_cap,
        )
        dist = stationary(
            model,
            tol=self.tol,
            max_iter=self.max_iter,
            method=self.method,
            direct_limit=self.direct_limit,
        )
        lengths, limits = {}, {}
        for load in modeled:
            assert load.service_cv is not None and load.queue_limit is not None
            factor = scaling_factor(
                self.scaling,
                self.setting,
                load.arrival_cv,
                load.service_cv,
                load.occupancy or 0.0,
            )
            lengths[load.route] = expected_queue_length(dist, model, load.route) * factor
            limits[load.route] = load.queue_limit
        factors.update(quality_factors(lengths, limits))
        return CapacityEvaluation(
            iteration=0,
            n_total=n_total,
            phi=max(factors.values()) - 1.0,
            quality_factors=factors,
            states=model.n_states,
        )


def phi(problem: CapacityProblem, n_total: float) -> float:
    """Largest quality factor at ``n_total`` minus one."""
    return problem.evaluate(n_total).phi


def probe_phi(
    problem: CapacityProblem, lower: float, upper: float, points: int = 5
) -> list[tuple[float, float]]:
    """Sample the capacity function on an even grid and warn if it is not monotone."""
    if points < 2:
        raise InvalidParameterError(f"probe needs at least 2 points, got {points}")
    samples = [(float(x), phi(problem, float(x))) for x in np.linspace(lower, upper, points)]
    values = [value for _, value in samples]
    if any(b < a for a, b in zip(values, values[1:])):
        logger.warning("Capacity function is not monotone on [%s, %s]: %s", lower, upper, samples)
    return samples


def find_capacity(
    problem: CapacityProblem,
    lower: float = 1.0,
    upper: float = 40.0,
    xtol: float = DEFAULT_XTOL,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = DEFAULT_BRENT_ITER,
    probe: int = 0,
) -> CapacityResult:
    """Largest train count whose worst route stays within its queue limit.

    Every evaluation of the capacity function is recorded, bracket endpoints included.
    If the function has no sign change the nearer bound is returned with a
    ``BoundStatus`` instead of raising.

    Args:
        problem: Junction, demand and model settings.
        lower: Lower end of the search interval.
        upper: Upper end of the search interval.
        xtol: Absolute tolerance on the train count.
        rtol: Relative tolerance on the train count.
        max_iter: Largest number of Brent steps.
        probe: If positive, sample the function at this many points first.

    Returns:
        The capacity with per-route quality factors and the evaluation trace.

    Raises:
        EvaluationError: If the capacity function fails at some train count.
        ConvergenceError: If the search does not converge.
    """
    if probe:
        probe_phi(problem, lower, upper, probe)
    evaluations: list[CapacityEvaluation] = []

    def objective(n_total: float) -> float:
        evaluation = problem.evaluate(n_total).model_copy(
            update={"iteration": len(evaluations) + 1}
        )
        evaluations.append(evaluation)
        logger.info(
            "Evaluation %d: n_total=%.6g phi=%.6g states=%d",
            evaluation.iteration,
            n_total,
            evaluation.phi,
            evaluation.states,
        )
        return evaluation.phi

    status = BoundStatus.WITHIN
    try:
        root = brent_root(objective, lower, upper, xtol=xtol, rtol=rtol, max_iter=max_iter)
        n_max, converged = root.root, root.converged
    except BracketError as exc:
        converged = False
        if exc.fb < 0:
            n_max, status = upper, BoundStatus.ABOVE_UPPER
            logger.warning("Capacity above the upper bound %s", upper)
        else:
            n_max, status = lower, BoundStatus.BELOW_LOWER
            logger.warning("Capacity below the lower bound %s", lower)

    at_root = problem.evaluate(n_max)
    factors = at_root.quality_factors
    bottleneck = max(factors, key=lambda route: factors[route]) if factors else None
    logger.info(
        "Capacity %.6g (%s) after %d evaluations, bottleneck %s",
        n_max,
        status.value,
        len(evaluations),
        bottleneck,
    )
    return CapacityResult(
        n_max=n_max,
        quality_factors=factors,
        bottleneck_route=bottleneck,
        evaluations=evaluations,
        converged=converged,
        bound_status=status,
        setting=problem.setting,
        scaling=problem.scaling,
        p_main=problem.traffic.p_main,
    )
