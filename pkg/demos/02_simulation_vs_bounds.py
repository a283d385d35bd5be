"""Walkthrough: validating analytical bounds against the simulator.

Runs replicated discrete-event simulations of the periodic system over an
exponential-service queue, then prints empirical tail quantiles next to the
optimized bounds. Every empirical quantile must sit below its bound; the
gap is the price of the Chernoff estimate.
"""

from agecalc import (
    Exponential,
    Metric,
    Scenario,
    TimeTriggered,
    optimize_theta,
    run_replications,
)

scenario = Scenario(
    event_model=Exponential(rate=0.5),
    service_model=Exponential(rate=1.0),
    policy=TimeTriggered(interval=2.0),
    epsilon=1e-4,
)

print("simulating 2 x 500k updates (burn-in 10k each) ...")
tails = run_replications(scenario, n_updates=500_000, n_reps=2, base_seed=7)
print("pooled samples per metric:", tails.delay.n_samples)

print("\n%8s %12s %12s %12s" % ("eps", "sim delay", "bound delay", "headroom"))
for eps in (1e-2, 1e-3, 1e-4):
    bound = optimize_theta(
        Scenario(scenario.event_model, scenario.service_model, scenario.policy, eps),
        Metric.DELAY,
    ).value
    q = tails.delay.quantile(eps)
    print("%8.0e %12.3f %12.3f %11.1f%%" % (eps, q, bound, 100 * (bound / q - 1)))

print("\npeak age and peak deviation at eps = 1e-3:")
for metric, tail in (("peak_aoi", tails.peak_aoi), ("peak_doi", tails.peak_doi)):
    bound = optimize_theta(
        Scenario(scenario.event_model, scenario.service_model, scenario.policy, 1e-3),
        Metric(metric),
    )
    value = bound.value_int if metric == "peak_doi" else bound.value
    print("  %-9s sim %8.3f   bound %8.3f" % (metric, tail.quantile(1e-3), value))

print("\nviolation frequency of each optimized bound (target <= 1e-3):")
for metric, tail in tails.by_name().items():
    res = optimize_theta(
        Scenario(scenario.event_model, scenario.service_model, scenario.policy, 1e-3),
        Metric(metric),
    )
    threshold = res.value_int if metric == "peak_doi" else res.value
    print("  %-9s %.2e" % (metric, tail.exceed_fraction(float(threshold))))
