"""Walkthrough: choosing the update rate, age versus deviation.

Sweeps the network utilization for both sampling policies with coupled
parameters (threshold = event rate x interval). Age favors the periodic
system; the deviation metric tells a different story: the event-triggered
system reaches a comparable minimum while using less of the network.
"""

import numpy as np

from agecalc import (
    EventTriggered,
    Exponential,
    Metric,
    NoFeasibleTheta,
    Scenario,
    TimeTriggered,
    best_event_threshold,
    best_update_interval,
    optimize_theta,
    params_for_utilization,
)

lam, mu, eps = 0.5, 0.25, 1e-6
events = Exponential(lam)
service = Exponential(mu)

print("%6s %8s %10s %10s %10s %10s" % ("util", "w", "age TT", "age ET", "dev TT", "dev ET"))
for u in np.geomspace(0.08, 0.9, 12):
    w, alpha = params_for_utilization(u, lam, mu)
    cells = []
    for policy in (TimeTriggered(w), EventTriggered(alpha)):
        row = []
        for metric in (Metric.PEAK_AOI, Metric.PEAK_DOI):
            try:
                row.append(
                    optimize_theta(Scenario(events, service, policy, eps), metric).value
                )
            except NoFeasibleTheta:
                row.append(float("nan"))
        cells.append(row)
    print(
        "%6.3f %8.2f %10.2f %10.2f %10.2f %10.2f"
        % (u, w, cells[0][0], cells[1][0], cells[0][1], cells[1][1])
    )

print("\ndeviation-optimal operating points:")
alpha_star, et_min = best_event_threshold(events, service, eps)
w_star, tt_min = best_update_interval(events, service, eps)
print("  event-triggered: threshold %d    -> bound %.2f at utilization %.3f"
      % (alpha_star, et_min, lam / (alpha_star * mu)))
print("  time-triggered:  interval  %.2f -> bound %.2f at utilization %.3f"
      % (w_star, tt_min, 1.0 / (w_star * mu)))
print("  the minima agree within %.1f%%, with the event-triggered system"
      % (100 * abs(tt_min - et_min) / et_min))
print("  running at the lower utilization.")
