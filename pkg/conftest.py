import sys

import pytest
import structlog


def _quiet_structlog():
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(40),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    )


def pytest_configure(config):
    _quiet_structlog()


@pytest.fixture(autouse=True)
def quiet_logging():
    _quiet_structlog()
    yield
    _quiet_structlog()
