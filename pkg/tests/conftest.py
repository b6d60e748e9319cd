import pytest
from hypothesis import strategies as st

from vrda.core import Dataset, Example, SparseVector

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sv(entries, dim=10):
    return SparseVector(entries, dim)


def sparse_vectors(dim=8, min_value=-100.0, max_value=100.0):
    values = st.floats(min_value=min_value, max_value=max_value, allow_nan=False)
    return st.dictionaries(st.integers(0, dim - 1), values, max_size=dim).map(
        lambda d: SparseVector(d, dim)
    )


@pytest.fixture
def tiny_data():
    """Two examples that are each mispredicted once by a hinge vRDA run."""
    return Dataset(
        (
            Example(SparseVector({0: 1.0}, 2), -1),
            Example(SparseVector({1: 1.0}, 2), -1),
        ),
        2,
    )
