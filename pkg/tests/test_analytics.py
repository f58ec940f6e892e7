from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iptvzap.analytics import (PUBLISHED_SWITCH_COUNTS, distribution_distance,
                               expected_switches, randomized_distances, switch_count_report)
from iptvzap.exceptions import ParameterError
from iptvzap.grid import (OrderingKind, build_identity, build_one_step, build_randomized,
                          build_two_step, from_ranks)
from iptvzap.popularity import SwitchingModel, build_zipf


def brute_force_expected(grid, shape=1.0):
    """Plain double loop; distances found by walking the circle both ways."""
    n = grid.session_count
    weights = [1.0 / (i ** shape) for i in range(1, n + 1)]
    total = sum(weights)
    pi = [w / total for w in weights]
    slot = {rank: grid.position(rank) for rank in range(1, n + 1)}
    acc = 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            up = 0
            pos = slot[i]
            while pos != slot[j]:
                pos = (pos + 1) % n
                up += 1
            d = min(up, n - up)
            acc += pi[i - 1] * (pi[j - 1] / (1 - pi[i - 1])) * d
    return acc


class TestExpectedSwitches:
    @pytest.mark.parametrize("n", [2, 3])
    def test_tiny_circles(self, n):
        model = SwitchingModel(build_zipf(n))
        for grid in (build_identity(n), build_one_step(n), build_two_step(n)):
            assert expected_switches(grid, model) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_single_session(self):
        with pytest.raises(ParameterError):
            expected_switches(build_identity(1), SwitchingModel(build_zipf(1)))

    def test_exact_small_case(self):
        # N=4 one-step [1,2,4,3]; only 1<->4 and 2<->3 are two apart
        pi = [Fraction(12, 25), Fraction(6, 25), Fraction(4, 25), Fraction(3, 25)]
        far = {(1, 4), (4, 1), (2, 3), (3, 2)}
        exact = sum(pi[i - 1] * pi[j - 1] / (1 - pi[i - 1]) * (2 if (i, j) in far else 1)
                    for i in range(1, 5) for j in range(1, 5) if i != j)
        got = expected_switches(build_one_step(4), SwitchingModel(build_zipf(4)))
        assert got == pytest.approx(float(exact), rel=1e-14)

    @pytest.mark.parametrize("grid_fn", [build_identity, build_one_step, build_two_step])
    @pytest.mark.parametrize("n", [5, 16, 37, 100])
    def test_matches_brute_force(self, grid_fn, n):
        grid = grid_fn(n)
        got = expected_switches(grid, SwitchingModel(build_zipf(n)))
        assert got == pytest.approx(brute_force_expected(grid), rel=1e-12)

    @pytest.mark.parametrize("ordering", ["one-step", "two-step"])
    def test_published_values_at_n100(self, ordering):
        rep = switch_count_report(ordering, 100)
        assert rep.expected_switches == pytest.approx(
            PUBLISHED_SWITCH_COUNTS[(ordering, 100)], abs=5e-5)

    @given(st.integers(4, 40), st.integers(0, 39), st.booleans())
    @settings(max_examples=40)
    def test_rotation_and_reflection_invariance(self, n, shift, flip):
        base = build_one_step(n)
        ranks = base.ranks_by_position()
        moved = ranks[shift % n:] + ranks[:shift % n]
        if flip:
            moved = moved[::-1]
        model = SwitchingModel(build_zipf(n))
        assert expected_switches(from_ranks(moved), model) == pytest.approx(
            expected_switches(base, model), rel=1e-12)

    @pytest.mark.parametrize("n", [100, 200, 300, 400, 500])
    def test_interleaving_beats_identity(self, n):
        model = SwitchingModel(build_zipf(n))
        assert expected_switches(build_identity(n), model) >= expected_switches(
            build_one_step(n), model)

    @given(st.integers(2, 50), st.data())
    @settings(max_examples=30)
    def test_bounds(self, n, data):
        u = data.draw(st.lists(st.floats(0, 0.999), min_size=n, max_size=n))
        grid = build_randomized(build_zipf(n), u)
        value = expected_switches(grid, SwitchingModel(build_zipf(n)))
        assert 1.0 - 1e-12 <= value <= n // 2 + 1e-12


class TestDistributionDistance:
    def test_identical(self):
        v = build_zipf(5).watch_prob
        assert distribution_distance(v, v) == 0.0

    def test_swapped_pair(self):
        assert distribution_distance([2 / 3, 1 / 3], [1 / 3, 2 / 3]) == pytest.approx(
            np.sqrt(2) / 3, abs=1e-15)
        assert np.sqrt(2) / 3 == pytest.approx(0.4714, abs=5e-5)

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            distribution_distance([0.5, 0.5], [1.0])

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                    min_size=1, max_size=30))
    def test_metric_axioms(self, triples):
        a, b, c = (np.array(col) for col in zip(*triples))
        assert distribution_distance(a, b) == pytest.approx(distribution_distance(b, a))
        assert distribution_distance(a, c) <= (distribution_distance(a, b)
                                               + distribution_distance(b, c) + 1e-12)

    def test_randomized_distances_shape(self):
        d = randomized_distances(20, 50, np.random.default_rng(0))
        assert d.shape == (50,)
        assert np.all(d >= 0)
