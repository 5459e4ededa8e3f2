"""Shared helpers.  Random states here are drawn independently of the package
(Ginibre construction with numpy's default generator) so they can serve as
oracle inputs."""

import numpy as np
import pytest


def ginibre_states(seed: int, n: int, dim: int, rank: int | None = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    k = dim if rank is None else rank
    g = rng.normal(size=(n, dim, k)) + 1j * rng.normal(size=(n, dim, k))
    m = g @ np.conj(np.swapaxes(g, 1, 2))
    return m / np.trace(m, axis1=1, axis2=2)[:, None, None]


def random_kets(seed: int, n: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def two_qubit_states():
    return ginibre_states(1234, 200, 4)


# --- acceptance criteria summary ---------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
    _CRITERIA[number] = ("PASS" if report.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        line = f"criterion {number:2d} {status}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
