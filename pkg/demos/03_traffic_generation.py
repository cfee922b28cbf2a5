"""Generating non-stationary arrival traces.

The traffic model composes weighted component processes: each
component (time-varying Poisson, two-state MMPP, or a renewal process
with heavy-tailed interarrivals) is sampled over the horizon, thinned
by its weight, and merged into one class-labelled trace. Weights must
sum to one at every instant, so thinning conserves the total intensity.

Outputs land in demos/out/.
"""

from pathlib import Path

import numpy as np

import caclab as cl

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(2026)

    # Heavy-tailed building blocks for session sizes / interarrivals.
    print("distribution samples (10^5 draws each):")
    for spec, label in (
        (cl.Lognormal(0.0, 1.0), "lognormal(0,1)     mean=e^0.5=1.6487"),
        (cl.Weibull(0.7, 1.0), "weibull(0.7,1)     mean=Gamma(1+1/0.7)=1.2658"),
        (cl.BiPareto(0.9, 1.8, breakpoint=10.0, minimum=1.0), "bipareto(0.9,1.8,10,1)"),
    ):
        draws = cl.sample_distribution(spec, rng, size=100_000)
        print(f"  {label:42s} mean={draws.mean():8.4f}  "
              f"p99={np.quantile(draws, 0.99):9.3f}  max={draws.max():12.1f}")
    print()

    # A day-shaped arrival-rate profile for the Poisson component.
    profile = cl.RateFunction((
        (0.0, 0.5),    # night
        (200.0, 3.0),  # morning busy period
        (400.0, 1.5),  # afternoon
        (600.0, 4.0),  # evening peak
        (800.0, 0.8),  # wind-down
    ))
    horizon = 1000.0
    events = cl.sample_poisson_process(profile, horizon, rng)
    counts, _ = np.histogram(events, bins=np.arange(0.0, horizon + 1, 200.0))
    print("time-varying Poisson: events per 200-unit window:", counts.tolist())

    mmpp = cl.MmppParams(rate_state1=0.5, rate_state2=6.0, switch_12=0.02, switch_21=0.05)
    bursts = cl.sample_mmpp(mmpp, horizon, rng)
    print(f"MMPP ({mmpp.rate_state1} <-> {mmpp.rate_state2}): {bursts.size} events, "
          f"stationary mean rate = "
          f"{(mmpp.switch_21 * mmpp.rate_state1 + mmpp.switch_12 * mmpp.rate_state2) / (mmpp.switch_12 + mmpp.switch_21):.3f}")

    renewal = cl.sample_renewal(cl.Weibull(0.6, 0.8), horizon, rng)
    gaps = np.diff(renewal)
    print(f"Weibull renewal: {renewal.size} events, interarrival CV = "
          f"{gaps.std() / gaps.mean():.2f} (Poisson would be 1.0)")
    print()

    # Compose the three components into one class-labelled trace.
    mix = cl.TrafficMixtureSpec((
        cl.MixtureComponent(0.5, profile),
        cl.MixtureComponent(0.3, mmpp),
        cl.MixtureComponent(0.2, cl.RenewalProcess(cl.Weibull(0.6, 0.8))),
    ))
    trace = cl.compose_traffic(mix, horizon, np.random.default_rng(7))
    print(f"composed trace: {len(trace)} arrivals over horizon {horizon}")
    for k in range(3):
        print(f"  class {k + 1}: {int(np.sum(trace.classes == k))} events")

    csv_path = OUT / "trace.csv"
    lines = ["time,class"] + [
        f"{format(t, '.9g')},{c + 1}"
        for t, c in zip(trace.times.tolist(), trace.classes.tolist())
    ]
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {csv_path}")
    print()

    # Population-driven arrivals: draw a user count, superpose that many
    # per-user session processes.
    arrivals = cl.superpose_user_sessions(
        cl.Lognormal(3.0, 0.4), cl.RateFunction.constant(0.05),
        horizon, np.random.default_rng(8),
    )
    print(f"population superposition: {arrivals.size} session arrivals "
          f"(lognormal user count, mean {np.exp(3.0 + 0.08):.1f} users)")


if __name__ == "__main__":
    main()
