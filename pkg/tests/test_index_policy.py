import numpy as np
import pytest

from rmabf.index_policy import IndexTable, fair_indices, select_top_b, top_b
from rmabf.lp import OccupancyMeasure


def _occ(active, passive):
    sa = np.stack([np.asarray(passive, float), np.asarray(active, float)], axis=-1)
    return OccupancyMeasure(sa[None])


class TestFairIndices:
    def test_ratio(self):
        assert fair_indices(_occ([0.3], [0.1])).omega[0, 0] == pytest.approx(0.75)

    def test_never_active_state(self):
        assert fair_indices(_occ([0.0], [0.4])).omega[0, 0] == 0.0

    def test_unvisited_state(self):
        assert fair_indices(_occ([0.0, 0.5], [0.0, 0.5])).omega.tolist() == [[0.0, 0.5]]

    def test_extended_form_sums_next_states(self):
        z = np.zeros((1, 1, 2, 3))
        z[0, 0, 1] = [0.1, 0.1, 0.1]
        z[0, 0, 0] = [0.05, 0.05, 0.0]
        assert fair_indices(OccupancyMeasure(z)).omega[0, 0] == pytest.approx(0.75)


class TestTopB:
    def test_top_two(self):
        acts = top_b(np.array([0.9, 0.5, 0.7]), 2, np.zeros(3))
        assert acts.tolist() == [1, 0, 1]

    def test_ties_follow_tiebreak(self):
        rng = np.random.default_rng(11)
        picks = set()
        for _ in range(50):
            acts = top_b(np.full(4, 0.3), 1, rng.random(4))
            assert acts.sum() == 1
            picks.add(int(np.argmax(acts)))
        assert picks == {0, 1, 2, 3}

    def test_seed_reproducible(self):
        table = IndexTable(np.full((5, 2), 0.5))
        a = select_top_b(table, np.zeros(5, int), 1, np.random.default_rng(4))
        b = select_top_b(table, np.zeros(5, int), 1, np.random.default_rng(4))
        assert np.array_equal(a, b) and a.sum() == 1

    def test_budget_at_least_arms(self):
        assert top_b(np.array([0.1, 0.0, 0.3]), 5, np.zeros(3)).tolist() == [1, 1, 1]

    def test_monotone_in_index(self):
        # raising an active arm's index never deactivates it
        rng = np.random.default_rng(0)
        for _ in range(200):
            v, tie = rng.random(6), rng.random(6)
            acts = top_b(v, 3, tie)
            n = int(rng.choice(np.flatnonzero(acts)))
            v2 = v.copy()
            v2[n] += rng.random()
            assert top_b(v2, 3, tie)[n] == 1

    def test_batched_rows(self):
        v = np.array([[0.9, 0.5, 0.7], [0.1, 0.2, 0.3]])
        assert top_b(v, 1, np.zeros_like(v)).tolist() == [[1, 0, 0], [0, 0, 1]]

    def test_select_uses_current_states(self):
        table = IndexTable(np.array([[0.1, 0.9], [0.8, 0.2]]))
        rng = np.random.default_rng(0)
        assert select_top_b(table, np.array([1, 1]), 1, rng).tolist() == [1, 0]
        assert select_top_b(table, np.array([0, 0]), 1, rng).tolist() == [0, 1]
