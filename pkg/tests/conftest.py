import glob
import os

import pytest

from conicpencil.forms import load_pencil

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = sorted(glob.glob(os.path.join(ROOT, "fixtures", "*.json")))


def fixture_path(name):
    return os.path.join(ROOT, "fixtures", name + ".json")


@pytest.fixture(scope="session")
def eligible():
    return load_pencil(fixture_path("eligible"))


@pytest.fixture(scope="session")
def diag():
    return load_pencil(fixture_path("diag"))


@pytest.fixture(scope="session")
def pencils():
    return [load_pencil(f) for f in FIXTURES]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
