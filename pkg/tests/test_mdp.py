import numpy as np
import pytest

from rmabf.errors import ChainError
from rmabf.mdp import ArmModel, RewardDist, RmabInstance, policy_kernel, stationary_distribution, validate_instance


def _arm(P=None, r=None):
    P = np.array([[0.9, 0.1], [0.2, 0.8]]) if P is None else P
    r = np.array([[0.0, 0.3], [0.0, 0.7]]) if r is None else r
    return ArmModel(np.stack([P, P]), r)


def _power_oracle(P, steps=5000):
    # independent oracle for aperiodic chains: plain power iteration
    x = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(steps):
        x = x @ P
    return x


class TestValidation:
    def test_boundary_floors_are_valid(self):
        inst = RmabInstance((_arm(), _arm()), 1, np.array([0.5, 0.5]))
        report = validate_instance(inst)
        assert report.ok and report.violations == ()

    def test_floors_exceeding_budget(self):
        report = validate_instance(RmabInstance((_arm(), _arm()), 1, np.array([0.6, 0.6])))
        assert not report.ok
        assert report.codes() == ["fairness_exceeds_budget"]
        assert "fairness floors exceed budget" in report.messages()[0]

    def test_non_stochastic_row(self):
        P = np.array([[0.8, 0.1], [0.2, 0.8]])
        report = validate_instance(RmabInstance((_arm(P),), 1, np.array([0.1])))
        assert "non_stochastic_row" in report.codes()
        assert any("non-stochastic row" in m for m in report.messages())

    def test_every_violation_is_listed(self):
        bad = _arm(r=np.array([[0.1, 1.5], [0.0, 0.2]]))
        other = ArmModel(np.stack([np.eye(3)] * 2), np.zeros((3, 2)))
        inst = RmabInstance((bad, other), 3, np.array([0.5]), np.array([0, 7]))
        codes = set(validate_instance(inst).codes())
        assert {"reward_range", "passive_reward", "state_space_mismatch", "budget_exceeds_arms",
                "eta_length", "initial_state_range"} <= codes

    def test_eta_range_and_budget(self):
        inst = RmabInstance((_arm(),), 0, np.array([-0.1]))
        codes = validate_instance(inst).codes()
        assert "budget_nonpositive" in codes and "eta_range" in codes

    def test_empty_instance(self):
        assert validate_instance(RmabInstance((), 1, np.zeros(0))).codes() == ["no_arms"]


class TestTypes:
    def test_arrays_are_read_only(self):
        arm = _arm()
        with pytest.raises(ValueError):
            arm.transition[0, 0, 0] = 0.5
        inst = RmabInstance((arm,), 1, np.array([0.1]))
        with pytest.raises(ValueError):
            inst.eta[0] = 0.2

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            ArmModel(np.ones((3, 2, 2)) / 2, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            ArmModel(np.ones((2, 2, 2)) / 2, np.zeros((3, 2)))

    def test_defaults(self):
        inst = RmabInstance((_arm(), _arm()), 1, [0.1, 0.2])
        assert inst.initial_states.tolist() == [0, 0]
        assert inst.transitions().shape == (2, 2, 2, 2)
        assert inst.rewards().shape == (2, 2, 2)
        assert _arm().reward_dist is RewardDist.BERNOULLI


class TestStationary:
    def test_swap_chain(self):
        pi = stationary_distribution([[0, 1], [1, 0]])
        assert np.allclose(pi, [0.5, 0.5], atol=1e-12)

    def test_identity_is_reducible(self):
        with pytest.raises(ChainError, match="periodic or reducible chain suspected"):
            stationary_distribution(np.eye(2))

    def test_two_state_chain_matches_oracle(self):
        P = np.array([[0.9, 0.1], [0.2, 0.8]])
        pi = stationary_distribution(P)
        assert np.allclose(pi, [2 / 3, 1 / 3], atol=1e-9)
        assert np.allclose(pi, _power_oracle(P), atol=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_fixed_point_on_random_chains(self, seed):
        P = np.random.default_rng(seed).dirichlet(np.ones(4), size=4)
        pi = stationary_distribution(P)
        assert np.max(np.abs(pi @ P - pi)) <= 1e-8
        assert abs(pi.sum() - 1) <= 1e-9
        assert np.allclose(pi, _power_oracle(P), atol=1e-6)

    def test_policy_kernel_mixes_actions(self):
        P0 = np.array([[1.0, 0.0], [1.0, 0.0]])
        P1 = np.array([[0.0, 1.0], [0.0, 1.0]])
        arm = ArmModel(np.stack([P0, P1]), np.zeros((2, 2)))
        K = policy_kernel(arm, [0.25, 1.0])
        assert np.allclose(K, [[0.75, 0.25], [0.0, 1.0]])
