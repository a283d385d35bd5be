"""Sampling policies and exponential (sigma, rho)-envelope extraction.

Arrival and service processes are characterized at a Chernoff parameter
theta > 0 by envelope rates:

  service upper envelope: E[exp(theta*S(v,n))] <= exp(theta*(sigma + rho*(n-v+1)))
  arrival lower envelope: E[exp(-theta*A(v,n))] <= exp(-theta*rho_lower*(n-v))
  arrival upper envelope: E[exp(theta*A(v,n))]  <= exp(theta*rho_upper*(n-v))

For iid increments the envelopes are tight and follow directly from the
per-increment log-MGF. All quantities are evaluated on demand at a given
theta; nothing is tabulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

from .models import (
    Deterministic,
    DistributionModel,
    DomainError,
    Exponential,
    log_mgf,
    model_mean,
)


@dataclass(frozen=True)
class TimeTriggered:
    """Updates generated periodically, every `interval` time units."""

    interval: float

    def __post_init__(self) -> None:
        if not self.interval > 0:
            raise ValueError("interval must be positive, got %r" % (self.interval,))


@dataclass(frozen=True)
class EventTriggered:
    """An update is generated once `threshold` new sensor events occurred.

    The simulator requires an integer threshold; bound computations accept
    real values so that utilization sweeps can couple the threshold to the
    update interval without rounding artifacts.
    """

    threshold: float

    def __post_init__(self) -> None:
        if not self.threshold >= 1:
            raise ValueError("threshold must be >= 1, got %r" % (self.threshold,))


TriggerPolicy = Union[TimeTriggered, EventTriggered]


@dataclass(frozen=True)
class EnvelopeSet:
    """Envelope rates of one scenario evaluated at a single theta.

    rho_arrival_upper is +inf when the event-model MGF diverges at theta;
    operations that need the upper envelope reject that case. `stable` is
    the geometric-convergence condition rho_arrival_lower > rho_service.
    """

    theta: float
    sigma_service: float
    rho_service: float
    rho_arrival_lower: float
    rho_arrival_upper: float
    stable: bool


def service_envelope(service: DistributionModel, theta: float) -> Tuple[float, float]:
    """Envelope (sigma, rho) of an iid service process at theta > 0.

    sigma is 0 for iid service times; rho is log(M(theta))/theta, which is
    exactly the service time for a Deterministic model.
    """
    if not theta > 0:
        raise ValueError("theta must be positive, got %r" % (theta,))
    if isinstance(service, Deterministic):
        return 0.0, service.value  # log M(theta)/theta without the round trip
    return 0.0, log_mgf(service, theta) / theta


def arrival_lower_rate(
    policy: TriggerPolicy, event_model: DistributionModel, theta: float
) -> float:
    """Arrival lower envelope rate at theta > 0; defined for every theta."""
    if not theta > 0:
        raise ValueError("theta must be positive, got %r" % (theta,))
    if isinstance(policy, TimeTriggered):
        return policy.interval
    return -(policy.threshold / theta) * log_mgf(event_model, -theta)


def arrival_envelopes(
    policy: TriggerPolicy, event_model: DistributionModel, theta: float
) -> Tuple[float, float]:
    """Arrival envelope rates (lower, upper) at theta > 0.

    Time-triggered arrivals have both rates equal to the update interval and
    ignore the event model. Event-triggered arrivals accumulate `threshold`
    inter-event times per update; the upper rate raises DomainError when the
    event-model MGF diverges at theta. Callers that only need the lower rate
    should use arrival_lower_rate instead.
    """
    lower = arrival_lower_rate(policy, event_model, theta)
    if isinstance(policy, TimeTriggered):
        return lower, policy.interval
    upper = (policy.threshold / theta) * log_mgf(event_model, theta)
    return lower, upper


def residual_mgf(event_model: DistributionModel, theta: float) -> float:
    """MGF of the residual inter-event time at -theta, for theta > 0.

    Memoryless events make the residual an ordinary inter-event time. For
    any other model the value is estimated by 1, which is always an upper
    bound and keeps the deviation bound valid.
    """
    if not theta > 0:
        raise ValueError("theta must be positive, got %r" % (theta,))
    if isinstance(event_model, Exponential):
        return math.exp(log_mgf(event_model, -theta))
    return 1.0


def mean_update_spacing(policy: TriggerPolicy, event_model: DistributionModel) -> float:
    """Mean time between updates: the interval, or threshold * mean inter-event time."""
    if isinstance(policy, TimeTriggered):
        return policy.interval
    return policy.threshold * model_mean(event_model)


def envelope_set(
    policy: TriggerPolicy,
    event_model: DistributionModel,
    service_model: DistributionModel,
    theta: float,
) -> EnvelopeSet:
    """Evaluate all envelope rates of a scenario at one theta.

    Raises DomainError if the service MGF diverges at theta; a diverging
    event-model MGF only makes rho_arrival_upper infinite.
    """
    sigma_s, rho_s = service_envelope(service_model, theta)
    lower = arrival_lower_rate(policy, event_model, theta)
    if isinstance(policy, TimeTriggered):
        upper = policy.interval
    else:
        try:
            upper = (policy.threshold / theta) * log_mgf(event_model, theta)
        except DomainError:
            upper = math.inf
    return EnvelopeSet(
        theta=theta,
        sigma_service=sigma_s,
        rho_service=rho_s,
        rho_arrival_lower=lower,
        rho_arrival_upper=upper,
        stable=lower > rho_s,
    )


__all__ = [
    "TimeTriggered",
    "EventTriggered",
    "TriggerPolicy",
    "EnvelopeSet",
    "service_envelope",
    "arrival_lower_rate",
    "arrival_envelopes",
    "residual_mgf",
    "mean_update_spacing",
    "envelope_set",
    "DomainError",
]
