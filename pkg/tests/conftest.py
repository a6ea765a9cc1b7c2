import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "holofact",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("holofact")


@pytest.fixture(scope="session")
def benchmark_chart():
    from holofact.ivp import benchmark_spec, solve_local

    return solve_local(benchmark_spec(), 64)


@pytest.fixture(scope="session")
def benchmark_atlas():
    from holofact.atlas import Budget, build_atlas
    from holofact.ivp import benchmark_spec

    return build_atlas(benchmark_spec(), Budget(3, 64, 64))


@pytest.fixture(scope="session")
def ng_seq():
    from holofact.ng import MAX_K, build_cs

    return build_cs(MAX_K)


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
