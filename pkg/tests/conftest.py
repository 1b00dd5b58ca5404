import pytest

from lamespec import DIRICHLET, NEUMANN, ElasticModuli
from lamespec.exact_spectra import elastic_disk_spectrum, scalar_disk_spectrum, scalar_interval_spectrum


@pytest.fixture(scope="session")
def steel_like():
    return ElasticModuli(1.0, 0.0)


@pytest.fixture(scope="session")
def interval_dirichlet():
    return scalar_interval_spectrum(3.141592653589793, DIRICHLET, 100_000)


@pytest.fixture(scope="session")
def interval_neumann():
    return scalar_interval_spectrum(3.141592653589793, NEUMANN, 100_000)


@pytest.fixture(scope="session")
def scalar_disk():
    return scalar_disk_spectrum(1.0, DIRICHLET, 12_000)


@pytest.fixture(scope="session")
def elastic_disk_dirichlet(steel_like):
    return elastic_disk_spectrum(steel_like, 1.0, DIRICHLET, 3_000)


@pytest.fixture(scope="session")
def elastic_disk_neumann(steel_like):
    return elastic_disk_spectrum(steel_like, 1.0, NEUMANN, 3_000)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
