"""Validating the event-driven simulator against the exact chain.

Runs replicated markovian simulations of the stock scenario, checks
that the 95% confidence intervals bracket the exact ctmc blocking
probabilities, compares the time-weighted occupancy histogram with the
stationary distribution, and finishes with a trace-driven run fed by
the traffic mixture.
"""

import numpy as np

import caclab as cl


def main():
    cfg = cl.default_scenario()
    analytic = cl.solve(cfg, "ctmc")

    params = cl.SimParams(horizon=1e5, replications=10, seed=20260811)
    stats = cl.run_simulation(cfg, params)
    print(f"markovian simulation: {params.replications} replications, "
          f"horizon {params.horizon:.0e}, warmup {params.effective_warmup:.0e}")
    print(f"{'class':>6} {'analytic':>12} {'simulated':>12} {'95% hw':>10} {'covered':>8}")
    for i, c in enumerate(cfg.classes):
        a = analytic.per_class[i]
        s = stats.blocking[i]
        hw = stats.half_width[i]
        covered = "yes" if s - hw <= a <= s + hw else "NO"
        print(f"{c.name:>6} {a:12.4e} {s:12.4e} {hw:10.2e} {covered:>8}")
    print(f"overall: analytic={analytic.overall:.4e} "
          f"simulated={stats.overall_blocking:.4e}")
    print()

    # PASTA in practice: the time the simulation spends at each total
    # occupancy converges to the stationary occupancy distribution.
    space = cl.enumerate_states(cfg)
    pi = cl.steady_state(cl.build_generator(cfg, space)).probabilities
    used = space.states @ cfg.bandwidths
    stationary = np.bincount(used, weights=pi, minlength=cfg.capacity + 1)
    tv = 0.5 * np.abs(stats.occupancy_histogram - stationary).sum()
    print(f"occupancy histogram vs stationary distribution: TV distance = {tv:.4f}")
    busiest = int(np.argmax(stationary))
    print(f"  busiest level {busiest}: stationary={stationary[busiest]:.4f} "
          f"simulated={stats.occupancy_histogram[busiest]:.4f}")
    print()

    # The packaged comparison harness scores agreement per class.
    report = cl.compare_analytic_sim(cfg, params)
    print(f"comparison report: max deviation={report.max_deviation:.2e}, "
          f"CI coverage={report.coverage_fraction:.0%}")
    print()

    # Trace-driven run: Poisson components at triple rate thinned by 1/3
    # reproduce the markovian arrival law, so the two modes must agree
    # within joint confidence intervals.
    mix = cl.TrafficMixtureSpec(tuple(
        cl.MixtureComponent(1 / 3, cl.RateFunction.constant(3.0 * lam))
        for lam in cfg.arrival_rates
    ))
    horizon = 2e4
    trace = cl.compose_traffic(mix, horizon, np.random.default_rng(99))
    holding = tuple(cl.Exponential(mu) for mu in cfg.service_rates)
    tparams = cl.SimParams(horizon=horizon, replications=5, seed=11)
    tstats = cl.run_trace_driven(cfg, trace, holding, tparams)
    mstats = cl.run_simulation(cfg, tparams)
    print(f"trace-driven vs markovian ({len(trace)} trace arrivals):")
    for i, c in enumerate(cfg.classes):
        gap = abs(tstats.blocking[i] - mstats.blocking[i])
        joint = tstats.half_width[i] + mstats.half_width[i]
        print(f"  {c.name:6s} trace={tstats.blocking[i]:.4e} "
              f"markov={mstats.blocking[i]:.4e} |gap|={gap:.1e} "
              f"joint hw={joint:.1e} {'ok' if gap <= joint else 'MISMATCH'}")


if __name__ == "__main__":
    main()
