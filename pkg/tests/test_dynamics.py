import math
import random

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from bdnet.dynamics import (
    EXTINCT,
    FITNESS_FLOOR,
    PURE_FIRST,
    PURE_SECOND,
    PayoffMatrix,
    classify,
    drift_update,
    fitness_of,
    payoff_from_counts,
    payoff_of,
    selection_update,
    similarity_attraction,
)


def frequency(trial, n=10**5, seed=0):
    rng = random.Random(seed)
    return sum(trial(rng) for _ in range(n)) / n


class TestSimilarityAttraction:
    def test_all_first(self):
        rng = random.Random(1)
        assert all(similarity_attraction(6, 6, rng) for _ in range(1000))

    def test_none_first(self):
        rng = random.Random(1)
        assert not any(similarity_attraction(0, 6, rng) for _ in range(1000))

    def test_two_thirds(self):
        # 4 of one label, 2 of the other: newcomer mirrors the majority 2/3
        f = frequency(lambda rng: similarity_attraction(4, 6, rng))
        assert abs(f - 2.0 / 3.0) < 4 * math.sqrt(2 / 9 / 10**5)

    def test_empty_population_rejected(self):
        with pytest.raises(ValueError):
            similarity_attraction(0, 0, random.Random(1))


class TestDriftUpdate:
    def test_irreversible(self):
        rng = random.Random(2)
        assert all(drift_update(True, k, 0.0, rng) for k in range(5))

    def test_alpha_zero_stays_unaware(self):
        rng = random.Random(2)
        assert not any(drift_update(False, 5, 0.0, rng) for _ in range(1000))

    def test_three_neighbors_quarter_alpha(self):
        # 1 - 0.75^3 = 0.578125 exactly, from the 2^3 Bernoulli outcomes
        f = frequency(lambda rng: drift_update(False, 3, 0.25, rng))
        assert abs(f - 0.578125) < 4 * math.sqrt(0.578125 * 0.421875 / 10**5)

    def test_zero_neighbors(self):
        rng = random.Random(3)
        assert not drift_update(False, 0, 1.0, rng)

    def test_alpha_one_with_neighbor(self):
        rng = random.Random(3)
        assert drift_update(False, 1, 1.0, rng)


class TestPayoff:
    def test_pd_constructor(self):
        m = PayoffMatrix.prisoners_dilemma(10, 1)
        assert (m.R, m.S, m.T, m.P) == (9, -1, 10, 0)

    @pytest.mark.parametrize("b,c", [(1, 1), (0.5, 1), (2, 0), (2, -1)])
    def test_pd_requires_b_gt_c_gt_zero(self, b, c):
        with pytest.raises(ValueError):
            PayoffMatrix.prisoners_dilemma(b, c)

    def test_first_against_mixed(self):
        m = PayoffMatrix.prisoners_dilemma(10, 1)
        assert payoff_of(True, [True, False, False], m) == 9 - 1 - 1 == 7

    def test_second_against_firsts(self):
        m = PayoffMatrix.prisoners_dilemma(10, 1)
        assert payoff_of(False, [True, True], m) == 20

    def test_second_against_seconds(self):
        m = PayoffMatrix.prisoners_dilemma(10, 1)
        assert payoff_of(False, [False, False], m) == 0

    def test_no_neighbors(self):
        m = PayoffMatrix.prisoners_dilemma(10, 1)
        assert payoff_of(True, [], m) == 0

    @settings(max_examples=100, deadline=None)
    @given(
        labels_a=st.lists(st.booleans(), max_size=20),
        labels_b=st.lists(st.booleans(), max_size=20),
        mine=st.booleans(),
    )
    def test_additive_over_concatenation(self, labels_a, labels_b, mine):
        m = PayoffMatrix(R=1.5, S=-2.0, T=3.25, P=0.5)
        assert payoff_of(mine, labels_a + labels_b, m) == pytest.approx(
            payoff_of(mine, labels_a, m) + payoff_of(mine, labels_b, m)
        )

    def test_counts_form_matches_list_form(self):
        m = PayoffMatrix(R=2.0, S=-1.0, T=5.0, P=0.25)
        labels = [True, True, False, True, False]
        assert payoff_from_counts(True, 3, 5, m) == payoff_of(True, labels, m)
        assert payoff_from_counts(False, 3, 5, m) == payoff_of(False, labels, m)


class TestFitness:
    def test_neutral(self):
        assert fitness_of(123.0, 0.0) == 1.0

    def test_weak_selection(self):
        assert fitness_of(7.0, 0.01) == pytest.approx(1.06)

    def test_clamped(self):
        # 0.99 + 0.01 * (-200) < 0
        assert fitness_of(-200.0, 0.01) == FITNESS_FLOOR


class TestSelectionUpdate:
    def test_unanimous(self):
        rng = random.Random(5)
        nbrs = [(True, 1.0), (True, 2.5)]
        assert all(selection_update(nbrs, rng) for _ in range(500))

    def test_equal_fitness_even_split(self):
        nbrs = [(True, 1.0), (False, 1.0)]
        f = frequency(lambda rng: selection_update(nbrs, rng))
        assert abs(f - 0.5) < 4 * math.sqrt(0.25 / 10**5)

    def test_weighted_split(self):
        nbrs = [(True, 1.06), (False, 0.94)]
        f = frequency(lambda rng: selection_update(nbrs, rng))
        assert abs(f - 0.53) < 4 * math.sqrt(0.53 * 0.47 / 10**5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            selection_update([], random.Random(1))

    def test_scale_invariance_exact(self):
        # scaling all fitness by a power of two leaves every float
        # comparison identical, so the chosen labels match draw for draw
        nbrs = [(True, 1.06), (False, 0.94), (True, 0.31)]
        scaled = [(lab, 4.0 * f) for lab, f in nbrs]
        r1, r2 = random.Random(9), random.Random(9)
        for _ in range(2000):
            assert selection_update(nbrs, r1) == selection_update(scaled, r2)

    def test_scale_invariance_statistical(self):
        nbrs = [(True, 0.2), (False, 1.8)]
        scaled = [(lab, 3.0 * f) for lab, f in nbrs]
        f1 = frequency(lambda rng: selection_update(nbrs, rng), seed=1)
        f2 = frequency(lambda rng: selection_update(scaled, rng), seed=2)
        assert abs(f1 - 0.1) < 0.004
        assert abs(f2 - 0.1) < 0.004

    def test_uniform_when_neutral(self):
        # delta = 0 maps every payoff to fitness 1, so copying is uniform;
        # the label slot carries a neighbor index to count the picks
        fitnesses = [fitness_of(p, 0.0) for p in (7.0, -3.0, 0.0, 99.0)]
        assert fitnesses == [1.0] * 4
        nbrs = [(j, f) for j, f in enumerate(fitnesses)]
        rng = random.Random(11)
        counts = [0, 0, 0, 0]
        for _ in range(10**5):
            counts[selection_update(nbrs, rng)] += 1
        _, p = chisquare(counts)
        assert p > 0.001


class TestClassify:
    def test_pure_first(self):
        assert classify(300, 300) == PURE_FIRST

    def test_pure_second(self):
        assert classify(12, 0) == PURE_SECOND

    def test_transient(self):
        assert classify(5, 2) is None

    def test_extinct(self):
        assert classify(0, 0) == EXTINCT


def test_neutral_one_event_martingale():
    """With alpha=0 (drift) or delta=0 (selection), the expected one-event
    change of the invader fraction is exactly zero: computed over all four
    event outcomes (birth gaining/keeping, death of either label) with
    competing-clock probabilities."""
    from bdnet.oracle import birth_aware_probability

    lam, mu, m = 3.0, 0.01, 4
    for n, a in ((10, 3), (30, 1), (50, 25)):
        for q in (
            birth_aware_probability(n, a, m, 0.0),   # drift, alpha = 0
            a / n,                                    # selection, delta = 0
        ):
            total = lam + n * mu
            p_birth = lam / total
            p_death = n * mu / total
            x = a / n
            gain = p_birth * (q * (a + 1) / (n + 1) + (1 - q) * a / (n + 1) - x)
            loss = p_death * (x * (a - 1) / (n - 1) + (1 - x) * a / (n - 1) - x)
            assert abs(gain + loss) < 1e-15
