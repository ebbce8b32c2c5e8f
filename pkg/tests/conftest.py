import pytest

from noiselab.data import SyntheticSpec, generate_synthetic

# lines appended by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def blobs():
    """Small, well separated binary set used by quick training tests."""
    return generate_synthetic(SyntheticSpec(n=120, c=2, feature_dim=6, cluster_spread=0.08, seed=21))
