"""Generators, steady-state solvers, oracles, and mode dispatch."""

import numpy as np
import pytest

from caclab import (
    DegenerateChainError,
    ModePreconditionError,
    SystemConfig,
    TrafficClassSpec,
    admissible,
    blocking_probabilities,
    build_generator,
    build_literal_1d_generator,
    enumerate_states,
    erlang_b,
    kaufman_roberts,
    recurrence_blocking,
    solve,
    steady_state,
)
from caclab.analytic import RateMatrix, SteadyStateDistribution

from test_model import make_config


def single_class(capacity, load, mu=1.0):
    return SystemConfig(
        capacity,
        (TrafficClassSpec("only", load * mu, mu, bandwidth=1, admission_threshold=1),),
    )


def dense_direct_solve(q_dense):
    """Independent oracle: replace one balance equation with the
    normalization constraint and solve the dense linear system."""
    m = q_dense.shape[0]
    a = q_dense.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


class TestBuildGenerator:
    def test_smallest_chain(self):
        cfg = single_class(1, 0.7)
        space = enumerate_states(cfg)
        q = build_generator(cfg, space).to_dense()
        np.testing.assert_allclose(q, [[-0.7, 0.7], [1.0, -1.0]])

    def test_row_sums_vanish(self):
        cfg = make_config(8, [1, 3, 5], bandwidths=[1, 2, 3], lam=2.0)
        q = build_generator(cfg, enumerate_states(cfg))
        assert np.abs(q.row_sums()).max() <= 1e-12

    def test_transitions_match_admissibility_scan(self):
        # Brute force: every arrival edge must correspond to an
        # admissible (state, class) pair, and no admissible pair may
        # lack its edge.
        cfg = make_config(2, [1, 2], bandwidths=[1, 2])
        space = enumerate_states(cfg)
        q = build_generator(cfg, space).to_dense()
        for idx, state in enumerate(space):
            for i in range(cfg.num_classes):
                target = list(state)
                target[i] += 1
                expected = admissible(state, i, cfg)
                if not expected:
                    continue
                j = space.index_of(target)
                assert q[idx, j] == cfg.classes[i].arrival_rate
        # (0, 1) has zero free channels, so no class-2 arrival edge.
        idx = space.index_of((0, 1))
        row = q[idx].copy()
        row[idx] = 0.0
        assert set(np.nonzero(row)[0]) == {space.index_of((0, 0))}

    def test_departure_rates_scale_with_occupancy(self):
        cfg = single_class(3, 1.0, mu=2.0)
        space = enumerate_states(cfg)
        q = build_generator(cfg, space).to_dense()
        for n in range(1, 4):
            assert q[space.index_of((n,)), space.index_of((n - 1,))] == 2.0 * n


class TestLiteral1dGenerator:
    def make_cfg(self, lam=(1.0, 1.0, 1.0), capacity=12):
        classes = tuple(
            TrafficClassSpec(f"t{i + 1}", lam[i], 1.0, i + 1, 2 * i + 1)
            for i in range(3)
        )
        return SystemConfig(capacity, classes)

    def test_requires_three_classes(self):
        with pytest.raises(ModePreconditionError, match="3 classes"):
            build_literal_1d_generator(single_class(5, 1.0))

    def test_repeated_state_structure(self):
        # Interior column n receives inflow from exactly {n-1, n-2, n-3}
        # via arrival rates and {n+1, n+2, n+3} via departure rates.
        cfg = self.make_cfg(lam=(0.4, 0.5, 0.6))
        q = build_literal_1d_generator(cfg).to_dense()
        n = 6
        inflow = {m: q[m, n] for m in range(q.shape[0]) if m != n and q[m, n] != 0}
        assert inflow == {
            n - 1: 0.4,
            n - 2: 0.5,
            n - 3: 0.6,
            n + 1: 1.0,
            n + 2: 1.0,
            n + 3: 1.0,
        }

    def test_row_sums_vanish(self):
        q = build_literal_1d_generator(self.make_cfg())
        assert np.abs(q.row_sums()).max() <= 1e-12

    def test_no_arrivals_concentrates_on_empty(self):
        cfg = self.make_cfg(lam=(0.0, 0.0, 0.0), capacity=6)
        pi = steady_state(build_literal_1d_generator(cfg))
        expected = np.zeros(7)
        expected[0] = 1.0
        np.testing.assert_allclose(pi.probabilities, expected)

    def test_duplicate_bandwidths_accumulate(self):
        classes = tuple(
            TrafficClassSpec(f"t{i}", 1.0, 1.0, 1, 1) for i in range(3)
        )
        q = build_literal_1d_generator(SystemConfig(4, classes)).to_dense()
        assert q[0, 1] == 3.0  # three unit-bandwidth arrival streams add up
        assert q[1, 0] == 3.0


class TestSteadyState:
    def test_two_state_symmetric(self):
        q = RateMatrix(2, {(0, 1): 1.0, (1, 0): 1.0})
        np.testing.assert_allclose(steady_state(q).probabilities, [0.5, 0.5])

    def test_mm11(self):
        # Unnormalized (1, a) with a = 0.5 by hand.
        cfg = single_class(1, 0.5)
        pi = steady_state(build_generator(cfg, enumerate_states(cfg)))
        np.testing.assert_allclose(pi.probabilities, [2 / 3, 1 / 3], atol=1e-14)

    def test_mm22(self):
        # Unnormalized (1, a, a^2/2) with a = 1 by hand.
        cfg = single_class(2, 1.0)
        pi = steady_state(build_generator(cfg, enumerate_states(cfg)))
        np.testing.assert_allclose(pi.probabilities, [0.4, 0.4, 0.2], atol=1e-14)

    def test_residual_within_tolerance(self):
        cfg = make_config(15, [1, 3, 6], bandwidths=[1, 2, 3], lam=3.0)
        space = enumerate_states(cfg)
        q = build_generator(cfg, space)
        pi = steady_state(q)
        assert pi.residual <= 1e-9
        assert abs(pi.probabilities.sum() - 1.0) <= 1e-10

    def test_all_zero_generator_flagged(self):
        q = RateMatrix(3, {})
        with pytest.raises(DegenerateChainError, match="all-zero"):
            steady_state(q)

    def test_unreachable_states_get_zero_mass(self):
        cfg = single_class(3, 0.0)
        pi = steady_state(build_generator(cfg, enumerate_states(cfg)))
        np.testing.assert_allclose(pi.probabilities, [1.0, 0.0, 0.0, 0.0])

    def test_matches_dense_direct_solve(self):
        # Independent oracle for every config small enough to solve densely.
        rng = np.random.default_rng(5)
        for _ in range(10):
            capacity = int(rng.integers(2, 7))
            bandwidths = sorted(int(b) for b in rng.integers(1, 3, size=2))
            thresholds = []
            for b in bandwidths:
                prev = thresholds[-1] if thresholds else 1
                thresholds.append(min(capacity, max(prev, b)))
            cfg = make_config(
                capacity, thresholds, bandwidths=bandwidths,
                lam=float(rng.uniform(0.3, 3.0)),
            )
            space = enumerate_states(cfg)
            q = build_generator(cfg, space)
            expected = dense_direct_solve(q.to_dense())
            np.testing.assert_allclose(
                steady_state(q).probabilities, expected, atol=1e-10
            )

    def test_iterative_path_matches_gth(self):
        cfg = make_config(10, [1, 2, 4], bandwidths=[1, 2, 3], lam=1.5)
        q = build_generator(cfg, enumerate_states(cfg))
        exact = steady_state(q)
        swept = steady_state(q, dense_ceiling=2)
        np.testing.assert_allclose(
            swept.probabilities, exact.probabilities, atol=1e-10
        )
        assert swept.residual <= 1e-9

    def test_distribution_validates_sum(self):
        with pytest.raises(ValueError, match="sum"):
            SteadyStateDistribution(np.array([0.5, 0.4]))


class TestBlockingProbabilities:
    def test_mm11_blocking(self):
        cfg = single_class(1, 0.5)
        space = enumerate_states(cfg)
        pi = steady_state(build_generator(cfg, space))
        report = blocking_probabilities(pi, cfg, space)
        np.testing.assert_allclose(report.per_class, [1 / 3], atol=1e-14)
        assert report.mode == "ctmc"
        assert report.validity_flag

    def test_erlang_two_channels(self):
        cfg = single_class(2, 1.0)
        space = enumerate_states(cfg)
        pi = steady_state(build_generator(cfg, space))
        report = blocking_probabilities(pi, cfg, space)
        np.testing.assert_allclose(report.per_class, [0.2], atol=1e-14)

    def test_zero_arrivals_flagged(self):
        cfg = make_config(5, [1, 2, 3], lam=0.0)
        space = enumerate_states(cfg)
        pi = steady_state(build_generator(cfg, space))
        report = blocking_probabilities(pi, cfg, space)
        np.testing.assert_allclose(report.per_class, [0.0, 0.0, 0.0])
        assert np.isnan(report.overall)
        assert not report.validity_flag

    def test_nested_blocked_sets_are_monotone(self):
        cfg = make_config(12, [1, 4, 6], bandwidths=[1, 2, 3], lam=2.5)
        report = solve(cfg, "ctmc")
        assert np.all(np.diff(report.per_class) >= 0)


class TestErlangB:
    def test_no_servers(self):
        assert erlang_b(0, 3.7) == 1.0

    def test_one_server_unit_load(self):
        assert erlang_b(1, 1.0) == 0.5

    def test_two_servers_unit_load(self):
        assert erlang_b(2, 1.0) == pytest.approx(0.2, abs=1e-15)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            erlang_b(-1, 1.0)
        with pytest.raises(ValueError):
            erlang_b(1, -0.1)

    def test_monotone_in_load_and_capacity(self):
        loads = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
        for n in range(1, 15):
            values = [erlang_b(n, a) for a in loads]
            assert all(x < y for x, y in zip(values, values[1:]))
        for a in loads:
            values = [erlang_b(n, a) for n in range(0, 15)]
            assert all(x > y for x, y in zip(values, values[1:]))


class TestKaufmanRoberts:
    def test_single_class_equals_erlang_b(self):
        for capacity in range(1, 21):
            for load in (0.1, 1.0, 10.0):
                _, blocking = kaufman_roberts(capacity, [(load, 1)])
                assert blocking[0] == pytest.approx(
                    erlang_b(capacity, load), abs=1e-12
                )

    def test_two_channel_call_hand_value(self):
        occ, blocking = kaufman_roberts(2, [(1.0, 2)])
        np.testing.assert_allclose(occ, [0.5, 0.0, 0.5], atol=1e-15)
        assert blocking[0] == pytest.approx(0.5, abs=1e-15)

    def test_zero_load(self):
        occ, blocking = kaufman_roberts(4, [(0.0, 1), (0.0, 2)])
        np.testing.assert_allclose(occ, [1, 0, 0, 0, 0])
        np.testing.assert_allclose(blocking, [0.0, 0.0])

    def test_oversized_call_always_blocked(self):
        _, blocking = kaufman_roberts(2, [(1.0, 3)])
        assert blocking[0] == 1.0

    def test_matches_ctmc_under_complete_sharing(self):
        rng = np.random.default_rng(17)
        for _ in range(6):
            capacity = int(rng.integers(3, 16))
            bandwidths = sorted(int(b) for b in rng.integers(1, 4, size=3))
            loads = rng.uniform(0.2, 2.0, size=3)
            classes = tuple(
                TrafficClassSpec(f"t{i}", float(loads[i]), 1.0, b, b)
                for i, b in enumerate(bandwidths)
            )
            cfg = SystemConfig(capacity, classes)
            _, kr = kaufman_roberts(capacity, [(float(a), b) for a, b in zip(loads, bandwidths)])
            ctmc = solve(cfg, "ctmc")
            np.testing.assert_allclose(ctmc.per_class, kr, atol=1e-9)


class TestRecurrence:
    def equal_rate_cfg(self, load_ratio, capacity):
        classes = tuple(
            TrafficClassSpec(f"t{i + 1}", load_ratio, 1.0, i + 1, i + 1)
            for i in range(3)
        )
        return SystemConfig(capacity, classes)

    def test_hand_iteration(self):
        result, report = recurrence_blocking(self.equal_rate_cfg(3.0, 5))
        np.testing.assert_allclose(result.unnormalized, [1, 1, 2, 4, 7, 13])
        np.testing.assert_allclose(
            report.per_class, [13 / 28, 7 / 28, 4 / 28], atol=1e-15
        )
        assert report.overall == pytest.approx(24 / 28, abs=1e-15)
        assert report.validity_flag
        assert report.detail == "equal_rate"
        assert result.load_ratio == pytest.approx(3.0)

    def test_zero_load(self):
        result, report = recurrence_blocking(self.equal_rate_cfg(0.0, 6))
        np.testing.assert_allclose(result.normalized.probabilities[0], 1.0)
        np.testing.assert_allclose(report.per_class, [0.0, 0.0, 0.0])
        assert report.overall == 0.0

    def test_unnormalized_starts_at_one(self):
        result, _ = recurrence_blocking(self.equal_rate_cfg(1.7, 9))
        assert result.unnormalized[0] == 1.0

    def test_overall_can_exceed_one_and_is_flagged(self):
        _, report = recurrence_blocking(self.equal_rate_cfg(50.0, 4))
        assert report.overall > 1.0
        assert not report.validity_flag

    def test_general_path_for_unequal_rates(self):
        classes = (
            TrafficClassSpec("a", 2.0, 1.0, 1, 1),
            TrafficClassSpec("b", 1.0, 1.0, 2, 2),
            TrafficClassSpec("c", 0.5, 1.0, 3, 3),
        )
        cfg = SystemConfig(6, classes)
        result, report = recurrence_blocking(cfg)
        assert report.detail == "general"
        # Hand iteration: P_n = (2 P_{n-1} + P_{n-2} + 0.5 P_{n-3}) / 3.
        expected = [1.0]
        padded = [0.0, 0.0, 1.0]
        for _ in range(6):
            padded.append((2 * padded[-1] + padded[-2] + 0.5 * padded[-3]) / 3)
            expected.append(padded[-1])
        np.testing.assert_allclose(result.unnormalized, expected, atol=1e-15)

    def test_equal_rate_requested_with_unequal_rates(self):
        classes = (
            TrafficClassSpec("a", 2.0, 1.0, 1, 1),
            TrafficClassSpec("b", 1.0, 1.0, 1, 1),
            TrafficClassSpec("c", 1.0, 1.0, 1, 1),
        )
        with pytest.raises(ModePreconditionError, match="equal-rate"):
            recurrence_blocking(SystemConfig(5, classes), equal_rate=True)

    def test_requires_three_classes(self):
        with pytest.raises(ModePreconditionError, match="3 classes"):
            recurrence_blocking(single_class(5, 1.0))


class TestSolveDispatch:
    def test_ctmc_single_class(self):
        assert solve(single_class(2, 1.0), "ctmc").per_class[0] == pytest.approx(
            0.2, abs=1e-12
        )

    def test_kr_mode_matches_ctmc_complete_sharing(self):
        classes = tuple(
            TrafficClassSpec(f"t{i}", 0.8, 1.0, b, b) for i, b in enumerate((1, 2, 3))
        )
        cfg = SystemConfig(9, classes)
        kr = solve(cfg, "kaufman_roberts")
        ctmc = solve(cfg, "ctmc")
        np.testing.assert_allclose(kr.per_class, ctmc.per_class, atol=1e-9)
        assert kr.mode == "kaufman_roberts"

    def test_literal1d_blocking_uses_threshold_sets(self):
        cfg = SystemConfig(
            6,
            (
                TrafficClassSpec("a", 1.0, 1.0, 1, 1),
                TrafficClassSpec("b", 1.0, 1.0, 2, 3),
                TrafficClassSpec("c", 1.0, 1.0, 3, 4),
            ),
        )
        report = solve(cfg, "literal1d")
        pi = steady_state(build_literal_1d_generator(cfg)).probabilities
        # Class blocked when free = capacity - n < A_i.
        for i, a in enumerate((1, 3, 4)):
            expected = pi[np.arange(7) > 6 - a].sum()
            assert report.per_class[i] == pytest.approx(expected, abs=1e-12)
        assert report.mode == "literal1d"

    def test_unknown_mode(self):
        with pytest.raises(ModePreconditionError, match="unknown mode"):
            solve(single_class(2, 1.0), "magic")

    def test_erlang_b_mode_preconditions(self):
        with pytest.raises(ModePreconditionError, match="single class"):
            solve(make_config(4, [1, 2]), "erlang_b")
        bad = SystemConfig(4, (TrafficClassSpec("a", 1.0, 1.0, 2, 2),))
        with pytest.raises(ModePreconditionError, match="bandwidth 1"):
            solve(bad, "erlang_b")

    def test_erlang_b_mode_value(self):
        report = solve(single_class(2, 1.0), "erlang_b")
        assert report.per_class[0] == pytest.approx(0.2, abs=1e-15)
        assert report.mode == "erlang_b"
