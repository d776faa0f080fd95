import json

import numpy as np
import pytest

from geomlab.dsl import parse_document
from geomlab.fixtures import builtin_document

ACCEPTANCE_LINES: list = []


def load_builtin(name, **params):
    """Metric document for a builtin fixture, parsed through the JSON front end."""
    return parse_document(json.dumps(builtin_document(name, **params)))


@pytest.fixture(scope="session")
def builtin():
    cache = {}

    def get(name, **params):
        key = (name, tuple(sorted(params.items())))
        if key not in cache:
            cache[key] = load_builtin(name, **params)
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
