import numpy as np
import pytest

from geocluster.graph import Individual, SocialMatrix, build_weight_matrix, compute_sigma
from geocluster.synth import SynthConfig, generate_dataset

# Dataset seed for trend tests; the calibrated preset is deterministic per seed.
HOLLENBECK_SEED = 18

# One line per acceptance criterion, echoed after the run (test_acceptance
# fills this; capture would otherwise swallow the in-test prints).
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(rng, n, contact_rate=0.1):
    """Random individuals plus a sparse contact matrix."""
    xy = rng.uniform(0.0, 2000.0, size=(n, 2))
    individuals = [Individual(f"p{i}", float(x), float(y)) for i, (x, y) in enumerate(xy)]
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < contact_rate
    ]
    return individuals, SocialMatrix.from_pairs(n, pairs)


def random_weighted_graph(rng, n, density=0.6):
    """Symmetric nonnegative weight matrix with a zero diagonal."""
    a = rng.uniform(0.0, 1.0, size=(n, n))
    a *= rng.random(size=(n, n)) < density
    a = np.triu(a, k=1)
    return a + a.T


@pytest.fixture(scope="session")
def hollenbeck():
    """Calibrated 748-member / 31-group dataset shared by trend tests."""
    individuals, social = generate_dataset(SynthConfig(seed=HOLLENBECK_SEED))
    labels = np.array([p.gang for p in individuals])
    return individuals, social, labels


@pytest.fixture(scope="session")
def small_dataset():
    """Fast 160-member / 8-group dataset for integration-level tests."""
    config = SynthConfig(n_members=160, n_groups=8, seed=5)
    individuals, social = generate_dataset(config)
    labels = np.array([p.gang for p in individuals])
    return individuals, social, labels


@pytest.fixture(scope="session")
def small_graph(small_dataset):
    individuals, social, _ = small_dataset
    sigma = compute_sigma(individuals, social)
    return build_weight_matrix(individuals, social, 0.4, sigma)
