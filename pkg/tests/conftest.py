import numpy as np
import pytest

from rmabf.mdp import ArmModel, RewardDist, RmabInstance

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


def random_arm(rng: np.random.Generator, S: int, dist=RewardDist.BERNOULLI) -> ArmModel:
    P = rng.dirichlet(np.ones(S), size=(2, S))
    r = np.zeros((S, 2))
    r[:, 1] = rng.random(S)
    return ArmModel(P, r, dist)


def random_instance(rng: np.random.Generator, N: int, S: int, B: int | None = None,
                    eta_scale: float = 0.5) -> RmabInstance:
    arms = tuple(random_arm(rng, S) for _ in range(N))
    B = B if B is not None else int(rng.integers(1, N + 1))
    eta = rng.dirichlet(np.ones(N)) * B * eta_scale
    eta = np.minimum(eta, 1.0)
    return RmabInstance(arms, B, eta, rng.integers(0, S, size=N))


@pytest.fixture
def swap_arm() -> ArmModel:
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    return ArmModel(np.stack([P, P]), np.array([[0.0, 0.0], [0.0, 1.0]]), RewardDist.DETERMINISTIC)
