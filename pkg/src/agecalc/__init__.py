"""Tail bounds and simulation for the freshness of sampled sensor data.

The library computes statistical upper bounds of network delay, peak
age-of-information, and peak deviation-of-information for time-triggered
and event-triggered sampling over a FIFO queue, using moment-generating
envelopes and Chernoff inversion, and validates every bound against a
built-in discrete-event simulator.
"""

from .models import (
    Deterministic,
    DistributionModel,
    DomainError,
    Erlang,
    Exponential,
    log_mgf,
    mgf_domain_limit,
    mgf_eval,
    model_mean,
    sample,
)
from .envelopes import (
    EnvelopeSet,
    EventTriggered,
    TimeTriggered,
    TriggerPolicy,
    arrival_envelopes,
    arrival_lower_rate,
    envelope_set,
    mean_update_spacing,
    residual_mgf,
    service_envelope,
)
from .bounds import (
    BoundResult,
    DoiBound,
    InfiniteDoI,
    InstabilityError,
    Metric,
    NoFeasibleTheta,
    Scenario,
    aoi_mgf_bound,
    delay_mgf_bound,
    doi_epsilon_bound,
    doi_tail_probability,
    exact_mm1_tail,
    invert_to_quantile,
    optimize_theta,
    stability_check,
)
from .simulate import (
    EmpiricalTail,
    EventStream,
    EventStreamExhausted,
    InsufficientSamples,
    MetricTails,
    UpdateTrace,
    derive_rng,
    empirical_quantile,
    fifo_service,
    generate_arrivals,
    peak_metrics,
    run_replications,
)
from .sweeps import (
    CsvRow,
    SweepSpec,
    best_event_threshold,
    best_update_interval,
    bound_rows,
    bound_tail_slope,
    make_model,
    params_for_utilization,
    round_threshold,
    simulation_rows,
    sweep_rows,
)

__version__ = "0.1.0"
