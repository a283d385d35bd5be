"""Distribution models for inter-event times and service times.

Every model is a nonnegative random variable with a closed-form moment
generating function M(theta) = E[exp(theta*X)]. The tail calculus only
works for light-tailed models, so the MGF and its validity domain are the
primary interface; sampling support is provided for the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

# Reject theta this close to an MGF singularity. The bound optimizer probes
# near the boundary, where exp() would overflow.
MGF_GUARD = 1e-9


class DomainError(ValueError):
    """MGF requested at or beyond its singularity; restrict the theta range."""


@dataclass(frozen=True)
class Exponential:
    """Exponential distribution with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("rate must be positive, got %r" % (self.rate,))


@dataclass(frozen=True)
class Deterministic:
    """Constant value; MGF exp(theta*value) is finite for every theta."""

    value: float

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise ValueError("value must be positive, got %r" % (self.value,))


@dataclass(frozen=True)
class Erlang:
    """Sum of `shape` iid exponentials with the given rate (mean shape/rate)."""

    shape: int
    rate: float

    def __post_init__(self) -> None:
        if self.shape < 1 or int(self.shape) != self.shape:
            raise ValueError("shape must be a positive integer, got %r" % (self.shape,))
        if not self.rate > 0:
            raise ValueError("rate must be positive, got %r" % (self.rate,))


DistributionModel = Union[Exponential, Deterministic, Erlang]


def mgf_domain_limit(model: DistributionModel) -> float:
    """Supremum of the theta values for which the MGF is finite."""
    if isinstance(model, (Exponential, Erlang)):
        return model.rate
    return math.inf


def log_mgf(model: DistributionModel, theta: float) -> float:
    """Natural log of the MGF at theta.

    Computed directly in log space so that large theta*value products do not
    overflow. Raises DomainError within MGF_GUARD of the singularity.
    """
    if isinstance(model, Deterministic):
        return theta * model.value
    if theta > model.rate - MGF_GUARD:
        raise DomainError(
            "MGF of %r diverges at theta=%g (singularity %g)" % (model, theta, model.rate)
        )
    single = -math.log1p(-theta / model.rate)
    if isinstance(model, Erlang):
        return model.shape * single
    return single


def mgf_eval(model: DistributionModel, theta: float) -> float:
    """MGF value at theta: rate/(rate-theta) for Exponential, exp(theta*value)
    for Deterministic, (rate/(rate-theta))**shape for Erlang.

    Any negative theta is valid; may return inf if the value itself overflows.
    """
    v = log_mgf(model, theta)
    if v > 709.0:
        return math.inf
    return math.exp(v)


def model_mean(model: DistributionModel) -> float:
    if isinstance(model, Exponential):
        return 1.0 / model.rate
    if isinstance(model, Deterministic):
        return model.value
    return model.shape / model.rate


def sample(model: DistributionModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw iid samples as a float array of the given size."""
    if isinstance(model, Exponential):
        return rng.exponential(1.0 / model.rate, size)
    if isinstance(model, Deterministic):
        return np.full(size, model.value)
    return rng.gamma(model.shape, 1.0 / model.rate, size)
