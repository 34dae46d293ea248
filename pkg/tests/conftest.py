import numpy as np
import pytest

from trapnls import NonlinearitySpec, build_grid, ground_state


@pytest.fixture(scope="session")
def grid1024():
    return build_grid(1024, 12.0)


@pytest.fixture(scope="session")
def spec_exp():
    return NonlinearitySpec("exp_truncated", mu=0.5, K=2)


@pytest.fixture(scope="session")
def spec_p3():
    return NonlinearitySpec("monomial", mu=0.5, p=3.0)


@pytest.fixture(scope="session")
def spec_p5():
    return NonlinearitySpec("monomial", mu=0.5, p=5.0)


@pytest.fixture(scope="session")
def gs_p3(spec_p3, grid1024):
    with pytest.warns(RuntimeWarning):  # q_g = 3 fails the sampled conditions
        return ground_state(spec_p3, grid1024)


@pytest.fixture(scope="session")
def gs_p5(spec_p5, grid1024):
    return ground_state(spec_p5, grid1024)


@pytest.fixture(scope="session")
def gs_exp(spec_exp, grid1024):
    return ground_state(spec_exp, grid1024)


def random_fields(grid, n=100, seed=0, amplitude=0.5):
    """Smooth random radial bumps, deterministic across runs."""
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(n):
        a = amplitude * rng.uniform(0.2, 1.0)
        w = rng.uniform(0.6, 2.0)
        c = rng.uniform(0.0, 2.0)
        phase = rng.uniform(0, 2 * np.pi)
        chirp = rng.uniform(-0.3, 0.3)
        vals = a * np.exp(-((grid.r - c) ** 2) / (2 * w * w)) * np.exp(
            1j * (phase + chirp * grid.r**2)
        )
        fields.append(vals.astype(complex))
    return fields
