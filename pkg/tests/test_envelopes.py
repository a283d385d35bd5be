import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agecalc import (
    Deterministic,
    DomainError,
    Erlang,
    EventTriggered,
    Exponential,
    TimeTriggered,
    arrival_envelopes,
    arrival_lower_rate,
    envelope_set,
    mean_update_spacing,
    model_mean,
    residual_mgf,
    service_envelope,
)


class TestServiceEnvelope:
    def test_deterministic_exact(self):
        assert service_envelope(Deterministic(4.0), 0.1) == (0.0, 4.0)
        # exact at any theta, not just small ones
        assert service_envelope(Deterministic(4.0), 250.0)[1] == 4.0

    def test_exponential_value(self):
        # independent arithmetic: (1/theta) * ln(mu/(mu-theta))
        sigma, rho = service_envelope(Exponential(1.0), 0.25)
        assert sigma == 0.0
        assert rho == pytest.approx(4.0 * math.log(4.0 / 3.0), rel=1e-12)
        assert rho == pytest.approx(1.150728, abs=1e-6)

    def test_small_theta_limit_is_mean(self):
        _, rho = service_envelope(Exponential(1.0), 1e-9)
        assert rho == pytest.approx(1.0, rel=1e-6)

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            service_envelope(Exponential(1.0), 1.5)

    @given(theta=st.floats(min_value=1e-4, max_value=0.95))
    def test_rate_at_least_mean(self, theta):
        for model in (Exponential(1.0), Erlang(2, 2.0)):
            _, rho = service_envelope(model, theta * model.rate)
            assert rho > model_mean(model)
        _, rho = service_envelope(Deterministic(2.5), theta)
        assert rho == 2.5


class TestArrivalEnvelopes:
    def test_time_triggered_ignores_event_model(self):
        for events in (Exponential(0.5), Deterministic(9.0), Erlang(3, 1.0)):
            assert arrival_envelopes(TimeTriggered(2.0), events, 0.7) == (2.0, 2.0)

    def test_event_triggered_lower_value(self):
        # -(1/0.5) * ln(0.5/(0.5+0.5)); cross-checked by Monte-Carlo below.
        # theta equals the event rate here, so only the lower rate is defined.
        lower = arrival_lower_rate(EventTriggered(1), Exponential(0.5), 0.5)
        assert lower == pytest.approx(2.0 * math.log(2.0), rel=1e-12)

    def test_event_triggered_lower_monte_carlo(self):
        rng = np.random.default_rng(3)
        draws = rng.exponential(2.0, 1_000_000)
        vals = np.exp(-0.5 * draws)
        mc = -(1.0 / 0.5) * math.log(vals.mean())
        se_log = vals.std() / (vals.mean() * 1000.0)
        lower = arrival_lower_rate(EventTriggered(1), Exponential(0.5), 0.5)
        assert abs(lower - mc) < 4 * se_log / 0.5

    def test_small_theta_limit_is_mean_spacing(self):
        lower, _ = arrival_envelopes(EventTriggered(8), Exponential(0.5), 1e-9)
        assert lower == pytest.approx(16.0, rel=1e-6)

    def test_upper_raises_beyond_event_rate(self):
        with pytest.raises(DomainError):
            arrival_envelopes(EventTriggered(2), Exponential(0.5), 0.6)
        # the lower rate alone stays available there
        assert arrival_lower_rate(EventTriggered(2), Exponential(0.5), 0.6) > 0

    @given(
        rate=st.floats(min_value=0.1, max_value=5.0),
        alpha=st.integers(min_value=1, max_value=20),
        frac=st.floats(min_value=0.05, max_value=0.9),
    )
    def test_jensen_ordering_random_events(self, rate, alpha, frac):
        theta = frac * rate
        policy = EventTriggered(alpha)
        for events in (Exponential(rate), Erlang(2, 2.0 * rate)):
            lower, upper = arrival_envelopes(policy, events, theta)
            mean_gap = alpha * model_mean(events)
            assert lower < mean_gap < upper

    @given(
        rate=st.floats(min_value=0.1, max_value=5.0),
        alpha=st.integers(min_value=1, max_value=19),
        theta=st.floats(min_value=0.01, max_value=2.0),
    )
    def test_lower_monotone_in_threshold_and_rate(self, rate, alpha, theta):
        policy_lo = EventTriggered(alpha)
        policy_hi = EventTriggered(alpha + 1)
        events = Exponential(rate)
        assert arrival_lower_rate(policy_lo, events, theta) < arrival_lower_rate(
            policy_hi, events, theta
        )
        faster = Exponential(rate * 1.5)
        assert arrival_lower_rate(policy_lo, faster, theta) < arrival_lower_rate(
            policy_lo, events, theta
        )

    def test_deterministic_events_collapse(self):
        lower, upper = arrival_envelopes(EventTriggered(4), Deterministic(2.0), 0.3)
        assert lower == pytest.approx(8.0, rel=1e-12)
        assert upper == pytest.approx(8.0, rel=1e-12)


class TestResidualMgf:
    def test_memoryless_equals_inter_event(self):
        assert residual_mgf(Exponential(0.5), 0.5) == pytest.approx(0.5, rel=1e-12)

    def test_conservative_one_for_non_memoryless(self):
        assert residual_mgf(Deterministic(2.0), 1.0) == 1.0
        assert residual_mgf(Erlang(3, 1.0), 0.4) == 1.0

    def test_small_theta_limit(self):
        assert residual_mgf(Exponential(1.0), 1e-12) == pytest.approx(1.0, rel=1e-9)


class TestEnvelopeSet:
    def test_stable_flag_and_fields(self):
        env = envelope_set(TimeTriggered(2.0), Exponential(0.5), Exponential(1.0), 0.25)
        assert env.sigma_service == 0.0
        assert env.rho_service > 0
        assert env.rho_arrival_lower == 2.0
        assert env.rho_arrival_upper == 2.0
        assert env.stable  # 2 > 1.15

    def test_upper_infinite_when_event_mgf_diverges(self):
        env = envelope_set(EventTriggered(2), Exponential(0.5), Exponential(1.0), 0.7)
        assert math.isinf(env.rho_arrival_upper)
        assert env.rho_arrival_lower <= env.rho_arrival_upper

    @given(frac=st.floats(min_value=0.01, max_value=0.95))
    def test_lower_never_exceeds_upper(self, frac):
        theta = frac * 0.25  # inside the service MGF domain
        for policy in (TimeTriggered(3.0), EventTriggered(2)):
            env = envelope_set(policy, Exponential(0.5), Exponential(0.25), theta)
            assert env.rho_arrival_lower <= env.rho_arrival_upper

    def test_mean_update_spacing(self):
        assert mean_update_spacing(TimeTriggered(7.0), Exponential(9.0)) == 7.0
        assert mean_update_spacing(EventTriggered(8), Exponential(0.5)) == 16.0
        assert mean_update_spacing(EventTriggered(3), Erlang(2, 1.0)) == 6.0
