import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ctrlblend.oracles import gap_oracle, maximal_loss_oracle, non_dominated_oracle
from ctrlblend.pareto import (
    dominates,
    maximal_loss,
    maximal_losses,
    non_dominated_set,
    pareto_suboptimality_gap,
    suboptimality_gaps,
)

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def vec_pair(m=3):
    return st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            arrays(float, n, elements=finite), arrays(float, n, elements=finite)
        )
    )


class TestDominates:
    def test_incomparable_pair(self):
        assert not dominates([2, 0], [0, 1])
        assert not dominates([0, 1], [2, 0])

    def test_equality_is_not_dominance(self):
        assert not dominates([1, 1], [1, 1])

    def test_weak_improvement_with_strict_coordinate(self):
        assert dominates([1, 2], [1, 1])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dominates([1, 2], [1, 2, 3])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dominates([np.nan, 0], [0, 0])

    @given(vec_pair())
    def test_antisymmetry_and_irreflexivity(self, pair):
        u, v = pair
        if dominates(u, v):
            assert not dominates(v, u)
        assert not dominates(u, u)

    @given(
        st.integers(1, 4).flatmap(
            lambda n: st.tuples(*[arrays(float, n, elements=finite)] * 3)
        )
    )
    def test_transitivity(self, triple):
        u, v, w = triple
        if dominates(u, v) and dominates(v, w):
            assert dominates(u, w)


class TestNonDominatedSet:
    def test_incomparable_pair_both_kept(self):
        assert non_dominated_set([[0, 1], [2, 0]]) == {0, 1}

    def test_dominated_arm_dropped(self):
        assert non_dominated_set([[1, 1], [0, 0]]) == {0}

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            non_dominated_set([])

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            vectors = rng.random((5, 2))
            assert non_dominated_set(vectors) == non_dominated_oracle(vectors)

    def test_duplicates_all_kept(self):
        assert non_dominated_set([[1, 0], [1, 0], [0, 1]]) == {0, 1, 2}


class TestSuboptimalityGap:
    def test_incomparable_front_example(self):
        means = [[0, 1], [2, 0]]
        assert pareto_suboptimality_gap(means, 0) == 0.0
        assert pareto_suboptimality_gap(means, 1) == 0.0

    def test_uniform_shift_to_dominating_point(self):
        assert pareto_suboptimality_gap([[0, 0], [1, 1]], 0) == 1.0

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            pareto_suboptimality_gap([[0, 0]], 3)

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            means = rng.uniform(-1, 1, size=(3, 2))
            arm = int(rng.integers(3))
            assert pareto_suboptimality_gap(means, arm) == pytest.approx(
                gap_oracle(means, arm), abs=1e-9
            )


class TestMaximalLoss:
    def test_incomparable_front_example(self):
        means = [[0, 1], [2, 0]]
        assert maximal_loss(means, 0) == 2.0
        assert maximal_loss(means, 1) == 1.0

    def test_single_arm_zero(self):
        assert maximal_loss([[5, 5]], 0) == 0.0

    def test_matches_bisection_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(500):
            means = rng.uniform(-1, 1, size=(4, 3))
            arm = int(rng.integers(4))
            assert maximal_loss(means, arm) == pytest.approx(
                maximal_loss_oracle(means, arm), abs=1e-9
            )


class TestJointInvariants:
    @settings(max_examples=300)
    @given(
        st.integers(2, 6).flatmap(
            lambda n: st.integers(1, 4).flatmap(
                lambda m: arrays(float, (n, m), elements=finite)
            )
        )
    )
    def test_gap_bounded_by_maximal_loss(self, means):
        psg = suboptimality_gaps(means)
        ml = maximal_losses(means)
        assert np.all(psg >= 0)
        assert np.all(psg <= ml + 1e-12)

    def test_zero_gap_iff_non_dominated(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            means = rng.uniform(-1, 1, size=(4, 2))
            psg = suboptimality_gaps(means)
            nds = non_dominated_set(means)
            for arm in range(4):
                assert (psg[arm] == 0.0) == (arm in nds)

    def test_shift_invariance(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            means = rng.uniform(-1, 1, size=(4, 3))
            shifted = means + rng.uniform(-5, 5)
            assert np.allclose(suboptimality_gaps(means), suboptimality_gaps(shifted))
            assert np.allclose(maximal_losses(means), maximal_losses(shifted))

    def test_single_arm_both_zero(self):
        assert pareto_suboptimality_gap([[3.0, -1.0]], 0) == 0.0
        assert maximal_loss([[3.0, -1.0]], 0) == 0.0

    def test_index_order_independence(self):
        rng = np.random.default_rng(23)
        means = rng.uniform(-1, 1, size=(5, 3))
        perm = rng.permutation(5)
        assert np.allclose(suboptimality_gaps(means)[perm], suboptimality_gaps(means[perm]))
        assert np.allclose(maximal_losses(means)[perm], maximal_losses(means[perm]))
