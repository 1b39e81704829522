import pytest
from hypothesis import strategies as st

from permubench.perm import Permutation

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@st.composite
def permutations(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    images = draw(st.permutations(range(1, n + 1)))
    return Permutation(tuple(images))


def record_criterion(number: int, title: str, passed: bool) -> None:
    _ACCEPTANCE[number] = (title, "PASS" if passed else "FAIL")


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion from the test's own result."""
    number, title = request.node.get_closest_marker("criterion").args
    yield
    rep = getattr(request.node, "rep_call", None)
    record_criterion(number, title, rep is not None and rep.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")
