"""Non-stationary traffic generation.

Total traffic is a weighted superposition of component point
processes: each component is sampled over the horizon, independently
thinned by its weight, and the survivors are merged into one
class-labelled arrival trace. Weights may vary piecewise-constantly in
time but must sum to one at every instant, so the superposition
conserves total intensity.

All samplers draw from a caller-supplied ``numpy.random.Generator``;
identical (spec, horizon, seed) triples reproduce traces bit for bit.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

_BISECT_TOL = 1e-12


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate}")


@dataclass(frozen=True)
class Lognormal:
    log_mean: float
    log_stdev: float

    def __post_init__(self):
        if self.log_stdev < 0:
            raise ValueError(f"lognormal log_stdev must be >= 0, got {self.log_stdev}")


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError(
                f"weibull shape and scale must be > 0, got ({self.shape}, {self.scale})"
            )


@dataclass(frozen=True)
class BiPareto:
    """Heavy-tailed law with power-law exponent ``alpha`` near the
    minimum and ``beta`` in the far tail, blending around
    ``breakpoint``: the complementary CDF is
    (x/k)^-alpha * ((x+c)/(k+c))^(alpha-beta) for x >= k = minimum,
    c = breakpoint."""

    alpha: float
    beta: float
    breakpoint: float
    minimum: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("bipareto exponents must be > 0")
        if self.minimum <= 0 or self.breakpoint <= 0:
            raise ValueError("bipareto breakpoint and minimum must be > 0")
        if self.breakpoint < self.minimum:
            raise ValueError(
                f"bipareto breakpoint {self.breakpoint} below minimum {self.minimum}"
            )

    def ccdf(self, x: float) -> float:
        k, c = self.minimum, self.breakpoint
        if x <= k:
            return 1.0
        return (x / k) ** (-self.alpha) * ((x + c) / (k + c)) ** (self.alpha - self.beta)


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"constant value must be > 0, got {self.value}")


DistributionSpec = Union[Exponential, Lognormal, Weibull, BiPareto, Constant]


@dataclass(frozen=True)
class MmppParams:
    """Two-state Markov-modulated Poisson process: events are emitted
    at ``rate_state1`` or ``rate_state2`` while a background chain with
    switching rates ``switch_12``/``switch_21`` toggles between them."""

    rate_state1: float
    rate_state2: float
    switch_12: float
    switch_21: float

    def __post_init__(self):
        if self.rate_state1 < 0 or self.rate_state2 < 0:
            raise ValueError("event rates must be >= 0")
        if self.switch_12 <= 0 or self.switch_21 <= 0:
            raise ValueError("switching rates must be > 0")


@dataclass(frozen=True)
class RateFunction:
    """Piecewise-constant rate: segments are (start, rate) pairs with
    strictly increasing starts beginning at 0."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        segs = tuple((float(s), float(r)) for s, r in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("rate function needs at least one segment")
        if segs[0][0] != 0.0:
            raise ValueError(f"first segment must start at 0, got {segs[0][0]}")
        starts = [s for s, _ in segs]
        if any(a >= b for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        if any(r < 0 for _, r in segs):
            raise ValueError("rates must be >= 0")

    @classmethod
    def constant(cls, rate: float) -> "RateFunction":
        return cls(((0.0, float(rate)),))

    def value_at(self, t: float) -> float:
        value = self.segments[0][1]
        for start, rate in self.segments:
            if t < start:
                break
            value = rate
        return value

    def pieces(self, horizon: float):
        """Yield (start, end, rate) pieces covering [0, horizon)."""
        starts = [s for s, _ in self.segments] + [horizon]
        for (start, rate), end in zip(self.segments, starts[1:]):
            if start >= horizon:
                break
            yield start, min(end, horizon), rate


@dataclass(frozen=True)
class RenewalProcess:
    """Point process with i.i.d. interarrival times."""

    interarrival: DistributionSpec


ProcessSpec = Union[RateFunction, MmppParams, RenewalProcess]


@dataclass(frozen=True)
class MixtureComponent:
    """One superposition component: a point process thinned by a
    (possibly time-varying) weight and labelled with a traffic class.
    ``class_index`` of None means "use the component's position"."""

    weight: Union[float, RateFunction]
    process: ProcessSpec
    class_index: int | None = None

    def weight_at(self, t: float) -> float:
        if isinstance(self.weight, RateFunction):
            return self.weight.value_at(t)
        return float(self.weight)


@dataclass(frozen=True)
class TrafficMixtureSpec:
    components: tuple[MixtureComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("traffic mixture needs at least one component")

    def check_weights(self):
        """Weights must sum to 1 (within 1e-12) at every instant."""
        breakpoints = {0.0}
        for comp in self.components:
            if isinstance(comp.weight, RateFunction):
                breakpoints.update(s for s, _ in comp.weight.segments)
        for t in sorted(breakpoints):
            total = sum(comp.weight_at(t) for comp in self.components)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(
                    f"weights must sum to 1, got {total!r} at time {t}"
                )
        for comp in self.components:
            if isinstance(comp.weight, RateFunction):
                bad = [w for _, w in comp.weight.segments if not 0.0 <= w <= 1.0]
            else:
                bad = [] if 0.0 <= comp.weight <= 1.0 else [comp.weight]
            if bad:
                raise ValueError(f"weights must lie in [0, 1], got {bad[0]}")


@dataclass(frozen=True)
class ArrivalTrace:
    """Time-ordered, class-labelled arrivals over [0, horizon)."""

    times: np.ndarray
    classes: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        classes = np.asarray(self.classes, dtype=np.int64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "classes", classes)
        if times.shape != classes.shape:
            raise ValueError("times and classes must have matching length")
        if times.size and (np.any(np.diff(times) < 0)):
            raise ValueError("trace times must be non-decreasing")
        if times.size and (times[0] < 0 or times[-1] > self.horizon):
            raise ValueError("trace times must lie within [0, horizon]")

    def __len__(self) -> int:
        return int(self.times.size)


def sample_distribution(
    spec: DistributionSpec, rng: np.random.Generator, size: int | None = None
):
    """Draw from ``spec``; scalar when ``size`` is None, else an array.

    Everything is inverse-transform sampled from uniforms (the
    lognormal goes through a normal draw), so a seeded generator
    reproduces values exactly.
    """
    n = 1 if size is None else int(size)
    if isinstance(spec, Constant):
        out = np.full(n, spec.value)
    elif isinstance(spec, Exponential):
        out = -np.log1p(-rng.random(n)) / spec.rate
    elif isinstance(spec, Lognormal):
        out = np.exp(spec.log_mean + spec.log_stdev * rng.standard_normal(n))
    elif isinstance(spec, Weibull):
        out = spec.scale * (-np.log1p(-rng.random(n))) ** (1.0 / spec.shape)
    elif isinstance(spec, BiPareto):
        out = np.array([_bipareto_inverse(spec, u) for u in rng.random(n)])
    else:
        raise TypeError(f"unknown distribution spec {type(spec).__name__}")
    if size is None:
        return float(out[0])
    return out


def _bipareto_inverse(spec: BiPareto, u: float) -> float:
    """Solve ccdf(x) = 1 - u by bracketing doubling plus bisection."""
    target = 1.0 - u
    if target >= 1.0:
        return spec.minimum
    lo = spec.minimum
    hi = max(2.0 * spec.minimum, spec.minimum + spec.breakpoint)
    while spec.ccdf(hi) > target:
        hi *= 2.0
    while hi - lo > _BISECT_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if spec.ccdf(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sample_poisson_process(
    rate: RateFunction, horizon: float, rng: np.random.Generator
) -> np.ndarray:
    """Event times of a time-varying Poisson process on [0, horizon).

    Candidates are generated per segment at the segment's maximum rate
    and thinned by the instantaneous-to-envelope ratio; with a
    piecewise-constant profile every candidate survives, but the
    acceptance step keeps the sampler valid for any envelope.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    pieces: list[np.ndarray] = []
    for start, end, seg_rate in rate.pieces(horizon):
        if seg_rate <= 0:
            continue
        count = rng.poisson(seg_rate * (end - start))
        candidates = np.sort(rng.uniform(start, end, size=count))
        keep = rng.random(count) * seg_rate < np.array(
            [rate.value_at(t) for t in candidates]
        )
        pieces.append(candidates[keep])
    if not pieces:
        return np.empty(0)
    return np.concatenate(pieces)


def sample_mmpp(
    params: MmppParams, horizon: float, rng: np.random.Generator
) -> np.ndarray:
    """Event times of a two-state MMPP on [0, horizon).

    The modulating chain starts from its stationary distribution and
    alternates exponential sojourns; events inside each sojourn form a
    homogeneous Poisson stream at the active state's rate.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    rates = (params.rate_state1, params.rate_state2)
    switches = (params.switch_12, params.switch_21)
    p_state1 = params.switch_21 / (params.switch_12 + params.switch_21)
    state = 0 if rng.random() < p_state1 else 1
    t = 0.0
    pieces: list[np.ndarray] = []
    while t < horizon:
        sojourn = rng.exponential(1.0 / switches[state])
        end = min(t + sojourn, horizon)
        if rates[state] > 0:
            count = rng.poisson(rates[state] * (end - t))
            pieces.append(np.sort(rng.uniform(t, end, size=count)))
        t += sojourn
        state = 1 - state
    if not pieces:
        return np.empty(0)
    return np.concatenate(pieces)


def sample_renewal(
    interarrival: DistributionSpec, horizon: float, rng: np.random.Generator
) -> np.ndarray:
    """Event times of a renewal process with the given interarrival law."""
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    times = []
    t = float(sample_distribution(interarrival, rng))
    while t < horizon:
        times.append(t)
        t += float(sample_distribution(interarrival, rng))
    return np.array(times)


def sample_process(
    process: ProcessSpec, horizon: float, rng: np.random.Generator
) -> np.ndarray:
    if isinstance(process, RateFunction):
        return sample_poisson_process(process, horizon, rng)
    if isinstance(process, MmppParams):
        return sample_mmpp(process, horizon, rng)
    if isinstance(process, RenewalProcess):
        return sample_renewal(process.interarrival, horizon, rng)
    raise TypeError(f"unknown process spec {type(process).__name__}")


def compose_traffic(
    mix: TrafficMixtureSpec, horizon: float, rng: np.random.Generator
) -> ArrivalTrace:
    """Sample each component, thin it by its weight, and merge.

    Components are processed in list order against the single supplied
    generator, so the trace is a deterministic function of
    (mix, horizon, seed). Each component's surviving events carry its
    traffic-class label (its list position unless overridden).
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    mix.check_weights()
    all_times: list[np.ndarray] = []
    all_classes: list[np.ndarray] = []
    for position, comp in enumerate(mix.components):
        events = sample_process(comp.process, horizon, rng)
        u = rng.random(events.size)
        if isinstance(comp.weight, RateFunction):
            weights = np.array([comp.weight.value_at(t) for t in events])
        else:
            weights = np.full(events.size, float(comp.weight))
        kept = events[u < weights]
        label = position if comp.class_index is None else comp.class_index
        all_times.append(kept)
        all_classes.append(np.full(kept.size, label, dtype=np.int64))
    times = np.concatenate(all_times) if all_times else np.empty(0)
    classes = np.concatenate(all_classes) if all_classes else np.empty(0, dtype=np.int64)
    order = np.lexsort((classes, times))
    return ArrivalTrace(times[order], classes[order], float(horizon))


def superpose_user_sessions(
    user_count: DistributionSpec,
    per_user_process: ProcessSpec,
    horizon: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Population-driven arrivals: draw a user count for the epoch,
    then superpose that many independent copies of the per-user
    session process. Fractional counts round to the nearest integer."""
    count = max(0, round(float(sample_distribution(user_count, rng))))
    pieces = [sample_process(per_user_process, horizon, rng) for _ in range(count)]
    if not pieces:
        return np.empty(0)
    return np.sort(np.concatenate(pieces))


def analytic_mean(spec: DistributionSpec) -> float:
    """Closed-form mean where one exists (no closed form: BiPareto)."""
    if isinstance(spec, Constant):
        return spec.value
    if isinstance(spec, Exponential):
        return 1.0 / spec.rate
    if isinstance(spec, Lognormal):
        return math.exp(spec.log_mean + 0.5 * spec.log_stdev**2)
    if isinstance(spec, Weibull):
        return spec.scale * math.gamma(1.0 + 1.0 / spec.shape)
    raise ValueError(f"no closed-form mean for {type(spec).__name__}")
