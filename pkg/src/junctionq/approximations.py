"""Closed-form scaling of exponential-model queue lengths to general arrival and service."""

from __future__ import annotations

from dataclasses import dataclass

from junctionq.exceptions import DomainError, InvalidParameterError
from junctionq.models import ModelSetting, Scaling


@dataclass(frozen=True)
class ScalingContext:
    """Inputs of the single-channel Hertel formula."""

    v_a: float
    v_b: float
    rho: float
    channels: int = 1

    def __post_init__(self) -> None:
        if self.v_a <= 0 or self.v_b <= 0:
            raise InvalidParameterError("coefficients of variation must be positive")
        if self.channels != 1:
            raise InvalidParameterError("only single-channel scaling is supported")


def hertel_factor(ctx: ScalingContext) -> float:
    """Multiplier ``1/gamma`` turning an M/M queue length into a GI/GI estimate.

    Raises:
        DomainError: If ``ctx.rho`` is not in (0, 1).

    Example:
        >>> round(hertel_factor(ScalingContext(v_a=1.0, v_b=0.3, rho=0.5)), 3)
        0.545
    """
    if not 0.0 < ctx.rho < 1.0:
        raise DomainError(f"Hertel scaling needs 0 < rho < 1, got {ctx.rho}")
    va2, vb2 = ctx.v_a**2, ctx.v_b**2
    c = (ctx.rho / ctx.channels) ** (1.0 - va2) * (1.0 + va2) - va2
    gamma = 2.0 / (c * vb2 + va2)
    return 1.0 / gamma


def kingman_factor(v_a: float, v_b: float) -> float:
    """Kingman multiplier ``(v_a**2 + v_b**2) / 2``."""
    if v_a <= 0 or v_b <= 0:
        raise InvalidParameterError("coefficients of variation must be positive")
    return (v_a**2 + v_b**2) / 2.0


def select_formula_cvs(setting: ModelSetting, v_a: float, v_b: float) -> tuple[float, float]:
    """Coefficients entering a scaling formula: 1 for each process the chain already models."""
    return (
        1.0 if setting.phase_arrival else v_a,
        1.0 if setting.phase_service else v_b,
    )


def scaling_factor(
    scaling: Scaling, setting: ModelSetting, v_a: float, v_b: float, rho: float
) -> float:
    """Factor applied to a route's chain queue length; 1 without scaling."""
    if scaling is Scaling.NONE:
        return 1.0
    eff_a, eff_b = select_formula_cvs(setting, v_a, v_b)
    if scaling is Scaling.KINGMAN:
        return kingman_factor(eff_a, eff_b)
    return hertel_factor(ScalingContext(v_a=eff_a, v_b=eff_b, rho=rho))
