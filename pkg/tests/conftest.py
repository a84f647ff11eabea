import numpy as np
import pytest

from coopsim.epidemic import INFECTED, REMOVED, SUSCEPTIBLE, EpidemicState
from coopsim.geometry import distance


def brute_force_neighbors(space, positions, pid, radius):
    """All-pairs oracle for the fixed-radius neighbor query."""
    out = []
    for j in range(len(positions)):
        if j != pid and distance(space, positions[pid], positions[j]) <= radius:
            out.append(j)
    return set(out)


def assert_valid_state(state: EpidemicState) -> None:
    """S/I/R partition and counter invariants."""
    status = state.status
    n_inf = int(np.count_nonzero(status == INFECTED))
    n_rem = int(np.count_nonzero(status == REMOVED))
    n_sus = int(np.count_nonzero(status == SUSCEPTIBLE))
    assert n_inf + n_rem + n_sus == state.graph.size
    assert n_inf == state.infected.size
    assert state.cumulative == n_inf + n_rem
    assert state.removed_count == n_rem
    assert np.all(status[state.infected] == INFECTED)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
