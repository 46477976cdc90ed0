"""Two-segment hypoexponential fits for arrival and service processes."""

from __future__ import annotations

import math
from typing import Optional, Union, overload

import numpy as np
import numpy.typing as npt

from junctionq.exceptions import FittingError, InvalidParameterError, UnsupportedDistributionError
from junctionq.models import PhaseTypeSpec

_DISCRIMINANT_SLACK = 1e-12
_TINY = np.finfo(np.float64).tiny


def phase_count(cv: float) -> int:
    """Fewest exponential phases whose sum can reach coefficient of variation ``cv``.

    Example:
        >>> phase_count(0.3)
        12
    """
    if not cv > 0:
        raise InvalidParameterError(f"cv must be positive, got {cv}")
    if cv > 1:
        raise UnsupportedDistributionError(cv)
    # 1/cv**2 lands a hair above an integer for cv like 0.5
    return max(1, math.ceil(1.0 / (cv * cv) - 1e-9))


def fit_hypoexp(mean: float, cv: float) -> PhaseTypeSpec:
    """Fit two consecutive Erlang segments to ``mean`` and ``cv``.

    The first ``ceil(k/2)`` phases share one rate and the rest share another.
    A cv of 1 gives a single exponential phase.

    Args:
        mean: Target mean in minutes.
        cv: Target coefficient of variation in (0, 1].

    Returns:
        The fitted phase-type specification.

    Raises:
        InvalidParameterError: If ``mean`` or ``cv`` is not positive.
        UnsupportedDistributionError: If ``cv`` exceeds 1.
        FittingError: If the second segment's relative mean has no valid solution.

    Example:
        >>> spec = fit_hypoexp(3.0, 0.5)
        >>> (spec.k, spec.k_star, round(spec.rate_a, 3))
        (4, 2, 1.333)
    """
    if not mean > 0:
        raise InvalidParameterError(f"mean must be positive, got {mean}")
    k = phase_count(cv)
    if k == 1:
        rate = 1.0 / mean
        return PhaseTypeSpec(
            k=1, k_star=1, rate_a=rate, rate_b=rate, target_mean=mean, target_cv=cv
        )

    k1 = math.ceil(k / 2)
    k2 = k - k1
    v2 = cv * cv
    denominator = k1 * (1.0 - v2 * k2)
    if denominator <= 0:
        raise FittingError(mean, cv, f"non-positive denominator {denominator}")
    discriminant = k1 * k2 * (v2 * (k1 + k2) - 1.0)
    if discriminant < 0:
        if discriminant < -_DISCRIMINANT_SLACK:
            raise FittingError(mean, cv, f"negative discriminant {discriminant}")
        discriminant = 0.0
    relative = (k1 * k2 * v2 + math.sqrt(discriminant)) / denominator
    if not relative > 0:
        raise FittingError(mean, cv, f"non-positive segment ratio {relative}")

    first = mean / (1.0 + relative)
    second = mean * relative / (1.0 + relative)
    return PhaseTypeSpec(
        k=k,
        k_star=k1,
        rate_a=k1 / first,
        rate_b=k2 / second,
        target_mean=mean,
        target_cv=cv,
    )


def moments(spec: PhaseTypeSpec) -> tuple[float, float]:
    """Mean and coefficient of variation realised by ``spec``."""
    phase_means = 1.0 / spec.rates
    mean = float(phase_means.sum())
    return mean, float(math.sqrt(float((phase_means**2).sum())) / mean)


@overload
def sample(spec: PhaseTypeSpec, rng: np.random.Generator, size: None = None) -> float: ...


@overload
def sample(
    spec: PhaseTypeSpec, rng: np.random.Generator, size: int
) -> npt.NDArray[np.float64]: ...


def sample(
    spec: PhaseTypeSpec, rng: np.random.Generator, size: Optional[int] = None
) -> Union[float, npt.NDArray[np.float64]]:
    """Draw durations as sums of per-phase exponentials by inverse CDF.

    Uniforms are clamped away from zero so every draw is finite and positive.
    """
    shape = (spec.k,) if size is None else (size, spec.k)
    u = np.maximum(rng.random(shape), _TINY)
    draws = -np.log(u) / spec.rates
    if size is None:
        return float(draws.sum())
    return np.asarray(draws.sum(axis=1), dtype=np.float64)
